use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::ExperimentConfig;
use super::manifest::Manifest;
use super::pipeline::{Pipeline, Stage};
use crate::error::{Error, Result};
use crate::regress::RegressorKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_STAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rolsh-bench", version, about = "Radius-prediction benchmark: index, ground truth, regressors, report")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// TOML experiment config; flags below override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated scenario ids, e.g. `1,3`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub scenarios: Option<Vec<u8>>,
    /// Comma-separated regressor kinds, e.g. `linear,mlp`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    #[arg(long, global = true, env = "ROLSH_BENCH_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Build and persist the LSH index.
    Index,
    /// Generate ground-truth terminal radii.
    Truth,
    /// Draw scenario splits, fit models, run cross-validation.
    Train,
    /// Score models on held-out samples and time predictions.
    Eval,
    /// Write report.csv and timings.csv.
    Report,
    /// Compare from-1 and predicted-start search on reserved queries.
    Demo {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Every stage through the report.
    All,
    /// Re-hash every artifact listed in the manifest.
    Verify,
}

impl Cli {
    /// Loads the config file (or defaults) and applies flag overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(s) = &self.scenarios {
            c.scenarios = s.clone();
        }
        if let Some(k) = &self.kinds {
            c.kinds = k
                .iter()
                .map(|s| RegressorKind::parse(s).ok_or_else(|| Error::Config(format!("unknown regressor kind {s:?}"))))
                .collect::<Result<_>>()?;
        }
        if let Some(t) = self.threads {
            c.threads = t;
        }
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: &Cli, config: ExperimentConfig) -> Result<()> {
    if let Verb::Verify = cli.verb {
        let m = Manifest::load(&config.out)?.ok_or_else(|| Error::Config("no manifest in output directory".into()))?;
        let bad = m.verify(&config.out);
        if bad.is_empty() {
            println!("all artifacts match the manifest");
            return Ok(());
        }
        for b in &bad {
            println!("mismatch: {b}");
        }
        return Err(Error::ManifestMismatch(bad.len()));
    }
    let mut p = Pipeline::new(config)?;
    match &cli.verb {
        Verb::Index => p.run(Stage::Index),
        Verb::Truth => p.run(Stage::Truth),
        Verb::Train => p.run(Stage::Train),
        Verb::Eval => p.run(Stage::Eval),
        Verb::Report | Verb::All => p.run(Stage::Report),
        Verb::Demo { k, count } => {
            let k = k.unwrap_or(p.config().demo.k);
            let count = count.unwrap_or(p.config().demo.queries);
            let report = p.demo(k, count)?;
            print!("{}", report.render());
            Ok(())
        }
        Verb::Verify => unreachable!(),
    }?;
    println!("artifacts in {}", p.out_dir().display());
    Ok(())
}

/// Parses `args`, runs the verb, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(config.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| execute(&cli, config)) {
        Ok(()) => EXIT_OK,
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_STAGE
        }
    }
}
