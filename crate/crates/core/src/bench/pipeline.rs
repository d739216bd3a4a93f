use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::demo::{compare_searches, DemoReport};
use super::manifest::{file_sha256, sha256_hex, Manifest, StageRecord};
use crate::data::{read_bvecs, read_fvecs, split_queries, synth_dataset_labeled, DataSource, DatasetMeta, Format};
use crate::error::{Error, Result};
use crate::eval::{
    build_report, mse, r_squared_paper, r_squared_standard, time_predictions, write_report_csv, CellResult, MetricSet,
    WorkerGuard, FOLD_HELD_OUT,
};
use crate::learn::{
    extract_features_with, generate_ground_truth, parse_samples_csv, scenario_indices, to_design, write_samples_csv,
    FeatureMode, ScenarioSpec, TrainingSample,
};
use crate::lsh::{build_index, ProjectionTable, SearchSettings};
use crate::matrix::Matrix;
use crate::regress::{cross_validate, fit, RegressorKind, RegressorModel};
use crate::seed::derive_seed;

pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Index,
    Truth,
    Train,
    Eval,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Index, Stage::Truth, Stage::Train, Stage::Eval, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Index => "index",
            Stage::Truth => "truth",
            Stage::Train => "train",
            Stage::Eval => "eval",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Train/test membership of one scenario, as indices into truth.csv rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub scenario: ScenarioSpec,
    pub test_size: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

struct Points {
    meta: DatasetMeta,
    index: Matrix,
    truth_queries: Matrix,
    demo_queries: Matrix,
}

/// Staged experiment rooted at the configured output directory. Each stage
/// runs its upstream stages first, reusing any whose recorded input hash
/// and artifacts still match.
pub struct Pipeline {
    config: ExperimentConfig,
    out: PathBuf,
    manifest: Manifest,
    points: Option<Points>,
}

fn model_file(scenario: u8, kind: RegressorKind) -> String {
    format!("models/s{scenario}_{kind}.rgrm")
}

fn split_file(scenario: u8) -> String {
    format!("splits/scenario_{scenario}.json")
}

const INDEX_FILE: &str = "index.bin";
const DATASET_FILE: &str = "dataset.json";
const TRUTH_FILE: &str = "truth.csv";
const CV_FILE: &str = "results/cv.json";
const HELD_OUT_FILE: &str = "results/heldout.json";
const REPORT_FILE: &str = "report.csv";
const TIMINGS_FILE: &str = "timings.csv";
const CONFIG_FILE: &str = "config.toml";
const DEMO_FILE: &str = "demo.csv";

impl Pipeline {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let out = config.out.clone();
        fs::create_dir_all(&out).map_err(|e| Error::Config(format!("cannot create {}: {e}", out.display())))?;
        // an unreadable manifest only means nothing is cached
        let mut manifest = Manifest::load(&out).ok().flatten().unwrap_or_default();
        manifest.version = env!("CARGO_PKG_VERSION").to_string();
        manifest.config_hash = sha256_hex(config.to_toml().as_bytes());
        manifest.master_seed = config.seed;
        manifest.threads = rayon::current_num_threads();
        Ok(Self {
            config,
            out,
            manifest,
            points: None,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(p, bytes)?;
        Ok(())
    }

    fn read(&self, rel: &str) -> Result<Vec<u8>> {
        Ok(fs::read(self.path(rel))?)
    }

    fn seed(&self, stage: &str, counter: u64) -> u64 {
        derive_seed(self.config.seed, stage, counter)
    }

    fn input_hash(&self, stage: Stage) -> Result<String> {
        let c = &self.config;
        let own = match stage {
            Stage::Index => serde_json::json!({
                "dataset": c.dataset,
                "lsh": c.lsh,
                "seed": c.seed,
                "truth_queries": c.truth_query_count()?,
                "demo_queries": c.demo.queries,
            }),
            Stage::Truth => serde_json::json!({
                "k_values": c.truth_k_values()?,
                "features": c.features,
            }),
            Stage::Train => serde_json::json!({
                "scenarios": c.scenarios,
                "scale": c.scenario_scale,
                "kinds": c.kinds,
                "folds": c.folds,
                "regressors": c.regressors,
                "log_labels": c.log_labels,
            }),
            Stage::Eval => serde_json::json!({ "repetitions": c.timing_repetitions }),
            Stage::Report => serde_json::json!({ "report_timings": c.report_timings }),
        };
        let upstream = match stage {
            Stage::Index => String::new(),
            s => self.input_hash(Stage::ALL[s as usize - 1])?,
        };
        let text = serde_json::json!({ "stage": stage.name(), "own": own, "upstream": upstream }).to_string();
        Ok(sha256_hex(text.as_bytes()))
    }

    /// Runs `stage` after its upstream stages.
    pub fn run(&mut self, stage: Stage) -> Result<()> {
        self.write(CONFIG_FILE, self.config.to_toml().as_bytes())?;
        for s in Stage::ALL.into_iter().filter(|&s| s <= stage) {
            self.ensure(s)?;
        }
        if stage == Stage::Report {
            let marker = self.path(FAILED_MARKER);
            if marker.exists() {
                fs::remove_file(marker)?;
            }
        }
        Ok(())
    }

    pub fn run_all(&mut self) -> Result<()> {
        self.run(Stage::Report)
    }

    fn ensure(&mut self, stage: Stage) -> Result<()> {
        let hash = self.input_hash(stage)?;
        if self.manifest.is_fresh(stage.name(), &hash, &self.out) {
            log::info!("{stage}: inputs unchanged, reusing artifacts");
            return Ok(());
        }
        log::info!("{stage}: running");
        let start = Instant::now();
        let produced = match stage {
            Stage::Index => self.stage_index(),
            Stage::Truth => self.stage_truth(),
            Stage::Train => self.stage_train(),
            Stage::Eval => self.stage_eval(),
            Stage::Report => self.stage_report(),
        };
        let produced = match produced {
            Ok(p) => p,
            Err(e) => {
                let note = format!("stage: {stage}\nerror: {e}\n");
                if let Err(w) = fs::write(self.path(FAILED_MARKER), note) {
                    log::error!("could not write failure marker: {w}");
                }
                return Err(e);
            }
        };
        let mut artifacts = BTreeMap::new();
        for rel in produced {
            let h = file_sha256(&self.path(&rel))?;
            artifacts.insert(rel, h);
        }
        self.manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                input_hash: hash,
                seed: self.seed(stage.name(), 0),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                artifacts,
            },
        );
        self.manifest.save(&self.out)?;
        Ok(())
    }

    fn points(&mut self) -> Result<&Points> {
        if self.points.is_none() {
            self.points = Some(self.load_points()?);
        }
        Ok(self.points.as_ref().unwrap())
    }

    fn load_points(&self) -> Result<Points> {
        let c = &self.config;
        let held = c.truth_query_count()? + c.demo.queries;
        let (name, source, all) = match (&c.dataset.profile, &c.dataset.path) {
            (Some(p), _) => {
                let (m, _) = synth_dataset_labeled(
                    *p,
                    c.dataset.n + held,
                    c.dataset.d,
                    c.dataset.clusters,
                    self.seed("dataset", 0),
                );
                (c.dataset.name(), DataSource::Synthetic, m)
            }
            (None, Some(path)) => {
                let (_, m) = match Format::from_path(path) {
                    Some(Format::Bvecs) => read_bvecs(path)?,
                    _ => read_fvecs(path)?,
                };
                (c.dataset.name(), DataSource::File, m)
            }
            (None, None) => return Err(Error::Config("no dataset".into())),
        };
        if held >= all.rows() {
            return Err(Error::InvalidParameter(format!(
                "{held} held-out queries leave no points to index out of {}",
                all.rows()
            )));
        }
        let split = split_queries(&all, held, self.seed("split", 0))?;
        let tq = c.truth_query_count()?;
        let truth_rows: Vec<usize> = (0..tq).collect();
        let demo_rows: Vec<usize> = (tq..held).collect();
        Ok(Points {
            meta: DatasetMeta::describe(name, source, &split.index),
            truth_queries: split.queries.select_rows(&truth_rows),
            demo_queries: split.queries.select_rows(&demo_rows),
            index: split.index,
        })
    }

    fn settings(&self, table: &ProjectionTable) -> Result<SearchSettings> {
        self.config.lsh.search_settings(table.n(), table.m())
    }

    fn load_table(&self) -> Result<ProjectionTable> {
        ProjectionTable::read_from(&self.read(INDEX_FILE)?[..])
    }

    fn stage_index(&mut self) -> Result<Vec<String>> {
        let m = self.config.lsh.projection_count()?;
        let w = self.config.lsh.w;
        let seed = self.seed("index", 0);
        let points = self.points()?;
        let table = build_index(&points.index, m, w, seed)?;
        let meta = serde_json::to_vec_pretty(&points.meta)?;
        self.write(INDEX_FILE, &table.to_bytes())?;
        self.write(DATASET_FILE, &meta)?;
        Ok(vec![INDEX_FILE.into(), DATASET_FILE.into()])
    }

    fn stage_truth(&mut self) -> Result<Vec<String>> {
        let table = self.load_table()?;
        let settings = self.settings(&table)?;
        let ks = self.config.truth_k_values()?;
        let mode = self.config.features;
        let points = self.points()?;
        let samples = {
            let _busy = WorkerGuard::enter();
            generate_ground_truth(&table, &points.index, &points.truth_queries, &ks, &settings, mode)?
        };
        let mut buf = Vec::new();
        write_samples_csv(&samples, &mut buf)?;
        self.write(TRUTH_FILE, &buf)?;
        Ok(vec![TRUTH_FILE.into()])
    }

    fn load_pool(&self) -> Result<Vec<TrainingSample>> {
        let text = String::from_utf8(self.read(TRUTH_FILE)?).map_err(|e| Error::Parse(e.to_string()))?;
        parse_samples_csv(&text)
    }

    fn flags(&self, kind: RegressorKind, converged: bool) -> String {
        let mut f = Vec::new();
        if matches!(kind, RegressorKind::Svr | RegressorKind::Mlp) {
            f.push("standardized");
            if self.config.regressors.standardize_target {
                f.push("target_standardized");
            }
        }
        if !converged {
            f.push("not_converged");
        }
        if self.config.log_labels {
            f.push("log_labels");
        }
        if self.config.features == FeatureMode::Coordinates {
            f.push("coordinate_features");
        }
        f.join(";")
    }

    fn fit_seed(&self, scenario: u8, kind: RegressorKind) -> u64 {
        self.seed("fit", scenario as u64 * 16 + kind as u64)
    }

    fn stage_train(&mut self) -> Result<Vec<String>> {
        let pool = self.load_pool()?;
        let specs = self.config.scenario_specs()?;
        let mut produced = Vec::new();
        let mut designs = Vec::new();
        for spec in &specs {
            let seed = self.seed("scenario", spec.id as u64);
            let (train, test) = scenario_indices(&pool, spec, seed)?;
            let split = SplitManifest {
                scenario: spec.clone(),
                test_size: spec.test_size(),
                seed,
                train,
                test,
            };
            let rel = split_file(spec.id);
            self.write(&rel, &serde_json::to_vec(&split)?)?;
            produced.push(rel);
            let rows: Vec<TrainingSample> = split.train.iter().map(|&i| pool[i].clone()).collect();
            designs.push((spec.id, to_design(&rows, self.config.log_labels)?));
        }

        let dataset = self.config.dataset.name();
        let jobs: Vec<(usize, RegressorKind)> = (0..designs.len())
            .flat_map(|s| self.config.kinds.iter().map(move |&k| (s, k)))
            .collect();
        let this = &*self;
        let results: Vec<Result<(Vec<u8>, Vec<CellResult>)>> = jobs
            .par_iter()
            .map(|&(s, kind)| {
                let _busy = WorkerGuard::enter();
                let (id, (x, y)) = &designs[s];
                let seed = this.fit_seed(*id, kind);
                let model = fit(kind, &this.config.regressors, x, y, seed)?;
                let mut cells = Vec::new();
                if this.config.folds >= 2 {
                    for f in cross_validate(kind, &this.config.regressors, x, y, this.config.folds, seed)? {
                        cells.push(CellResult {
                            dataset: dataset.clone(),
                            scenario: *id,
                            kind,
                            fold: f.fold as i32,
                            metrics: MetricSet {
                                mse: f.mse,
                                r2_paper: f.r2_paper,
                                r2_standard: f.r2_standard,
                                predict_time_ms: f64::NAN,
                                train_time_ms: f.train_ms,
                                n_eval: f.n_test,
                            },
                            n_train: f.n_train,
                            n_test: f.n_test,
                            seed,
                            flags: this.flags(kind, f.converged),
                        });
                    }
                }
                Ok((model.to_bytes(), cells))
            })
            .collect();
        let mut cells = Vec::new();
        for (&(s, kind), r) in jobs.iter().zip(results) {
            let (blob, c) = r?;
            let rel = model_file(designs[s].0, kind);
            self.write(&rel, &blob)?;
            produced.push(rel);
            cells.extend(c);
        }
        self.write(CV_FILE, &serde_json::to_vec(&cells)?)?;
        produced.push(CV_FILE.into());
        Ok(produced)
    }

    fn load_split(&self, scenario: u8) -> Result<SplitManifest> {
        Ok(serde_json::from_slice(&self.read(&split_file(scenario))?)?)
    }

    fn load_model(&self, scenario: u8, kind: RegressorKind) -> Result<RegressorModel> {
        let path = self.path(&model_file(scenario, kind));
        if !path.is_file() {
            return Err(Error::ModelNotFound(path));
        }
        RegressorModel::from_bytes(&fs::read(path)?)
    }

    /// Held-out scoring and timing. Runs serially so timing never overlaps
    /// other registered work.
    fn stage_eval(&mut self) -> Result<Vec<String>> {
        let pool = self.load_pool()?;
        let dataset = self.config.dataset.name();
        let mut cells = Vec::new();
        for spec in self.config.scenario_specs()? {
            let split = self.load_split(spec.id)?;
            let rows: Vec<TrainingSample> = split.test.iter().map(|&i| pool[i].clone()).collect();
            let (x, y) = to_design(&rows, self.config.log_labels)?;
            for &kind in &self.config.kinds {
                let model = self.load_model(spec.id, kind)?;
                let pred = model.predict(&x)?;
                let predict_ms = timed(&model, &x, self.config.timing_repetitions)?;
                cells.push(CellResult {
                    dataset: dataset.clone(),
                    scenario: spec.id,
                    kind,
                    fold: FOLD_HELD_OUT,
                    metrics: MetricSet {
                        mse: mse(&y, &pred)?,
                        r2_paper: r_squared_paper(&y, &pred).unwrap_or(f64::NAN),
                        r2_standard: r_squared_standard(&y, &pred).unwrap_or(f64::NAN),
                        predict_time_ms: predict_ms,
                        train_time_ms: model.train_time_ms,
                        n_eval: y.len(),
                    },
                    n_train: split.train.len(),
                    n_test: split.test.len(),
                    seed: self.fit_seed(spec.id, kind),
                    flags: self.flags(kind, model.converged),
                });
            }
        }
        self.write(HELD_OUT_FILE, &serde_json::to_vec(&cells)?)?;
        Ok(vec![HELD_OUT_FILE.into()])
    }

    fn stage_report(&mut self) -> Result<Vec<String>> {
        let mut cells: Vec<CellResult> = serde_json::from_slice(&self.read(CV_FILE)?)?;
        let held: Vec<CellResult> = serde_json::from_slice(&self.read(HELD_OUT_FILE)?)?;
        cells.extend(held.iter().cloned());
        let rows = build_report(&cells, self.config.report_timings)?;
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf)?;
        self.write(REPORT_FILE, &buf)?;

        let mut t = String::from("dataset,scenario,kind,train_ms,predict_ms,repetitions\n");
        let mut held = held;
        held.sort_by_key(|c| (c.scenario, c.kind));
        for c in &held {
            t += &format!(
                "{},{},{},{},{},{}\n",
                c.dataset,
                c.scenario,
                c.kind,
                crate::eval::fmt_f64(c.metrics.train_time_ms),
                crate::eval::fmt_f64(c.metrics.predict_time_ms),
                self.config.timing_repetitions
            );
        }
        self.write(TIMINGS_FILE, t.as_bytes())?;
        Ok(vec![REPORT_FILE.into(), TIMINGS_FILE.into()])
    }

    /// Compares from-1 and predicted-start search on the reserved demo
    /// queries using the configured demo model. The model must already be
    /// trained; the index is rebuilt only if missing or stale.
    pub fn demo(&mut self, k: usize, count: usize) -> Result<DemoReport> {
        let (scenario, kind) = (self.config.demo.scenario, self.config.demo.kind);
        let model = self.load_model(scenario, kind)?;
        self.ensure(Stage::Index)?;
        let table = self.load_table()?;
        let settings = self.settings(&table)?;
        let (mode, log_labels) = (self.config.features, self.config.log_labels);
        let points = self.points()?;
        let count = count.min(points.demo_queries.rows());
        let queries = points.demo_queries.select_rows(&(0..count).collect::<Vec<_>>());
        let report = compare_searches(&table, &points.index, &queries, k, &settings, |q| {
            let f = extract_features_with(mode, &table, q, k)?;
            let y = model.predict_row(&f);
            Ok(if log_labels { y.exp2() } else { y })
        })?;
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        self.write(DEMO_FILE, &buf)?;
        Ok(report)
    }
}

/// Prediction timing that waits out briefly overlapping work instead of
/// failing the stage; gives up with NaN after a few seconds.
fn timed(model: &RegressorModel, x: &Matrix, reps: usize) -> Result<f64> {
    for _ in 0..100 {
        match time_predictions(model, x, reps) {
            Err(Error::ConcurrentTiming(n)) => {
                log::debug!("timing deferred: {n} workers active");
                std::thread::sleep(Duration::from_millis(50));
            }
            other => return other,
        }
    }
    log::warn!("timing skipped: other work never went idle");
    Ok(f64::NAN)
}

/// Runs every stage and leaves the artifacts under `config.out`.
pub fn run_experiment(config: ExperimentConfig) -> Result<Manifest> {
    let mut p = Pipeline::new(config)?;
    p.run_all()?;
    Ok(p.manifest)
}

/// [`Pipeline::demo`] for a fresh pipeline over `config`.
pub fn run_query_demo(config: ExperimentConfig, k: usize, count: usize) -> Result<DemoReport> {
    Pipeline::new(config)?.demo(k, count)
}
