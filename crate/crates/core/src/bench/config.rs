use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Profile, DEFAULT_CLUSTERS};
use crate::error::{Error, Result};
use crate::learn::{FeatureMode, ScenarioSpec};
use crate::lsh::LshParams;
use crate::regress::{RegressorConfig, RegressorKind};

/// Where points come from. Exactly one of `profile` and `path` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub profile: Option<Profile>,
    /// `.fvecs` or `.bvecs` file.
    pub path: Option<PathBuf>,
    /// Indexed points for synthetic data; held-out queries are drawn in
    /// addition. Ignored for files, where queries come out of the file.
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            profile: Some(Profile::SiftLike),
            path: None,
            n: 20_000,
            d: 64,
            clusters: DEFAULT_CLUSTERS,
        }
    }
}

impl DatasetSpec {
    pub fn name(&self) -> String {
        match (&self.profile, &self.path) {
            (Some(p), _) => p.name().to_string(),
            (None, Some(path)) => path
                .file_stem()
                .map(|s| s.to_string_lossy().replace(',', "_"))
                .unwrap_or_else(|| "dataset".into()),
            (None, None) => "dataset".into(),
        }
    }
}

/// Everything one experiment run needs. Loaded from TOML; command-line
/// flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub lsh: LshParams,
    pub scenarios: Vec<u8>,
    pub kinds: Vec<RegressorKind>,
    pub folds: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Multiplies every scenario's training size; 1.0 keeps the standard
    /// sizes.
    pub scenario_scale: f64,
    /// Held-out queries used for ground truth. Defaults to the fewest that
    /// cover the largest selected scenario.
    pub truth_queries: Option<usize>,
    pub features: FeatureMode,
    pub log_labels: bool,
    /// Put wall-clock columns into report.csv. Off by default so reruns
    /// produce byte-identical reports; timings.csv always has them.
    pub report_timings: bool,
    pub timing_repetitions: usize,
    /// Worker threads for parallel stages; 0 means one per core.
    pub threads: usize,
    pub demo: DemoConfig,
    pub regressors: RegressorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    /// Held-out queries reserved for the demo, disjoint from ground truth.
    pub queries: usize,
    pub k: usize,
    pub scenario: u8,
    pub kind: RegressorKind,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            queries: 200,
            k: 10,
            scenario: 3,
            kind: RegressorKind::Mlp,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetSpec::default(),
            lsh: LshParams::default(),
            scenarios: vec![1, 2, 3, 4, 5],
            kinds: RegressorKind::ALL.to_vec(),
            folds: 10,
            seed: 42,
            out: PathBuf::from("rolsh-out"),
            scenario_scale: 1.0,
            truth_queries: None,
            features: FeatureMode::Hashes,
            log_labels: false,
            report_timings: false,
            timing_repetitions: 5,
            threads: 0,
            demo: DemoConfig::default(),
            regressors: RegressorConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Scenario specs after scaling, in the configured order.
    pub fn scenario_specs(&self) -> Result<Vec<ScenarioSpec>> {
        self.scenarios
            .iter()
            .map(|&id| ScenarioSpec::standard(id)?.scaled(self.scenario_scale))
            .collect()
    }

    /// Ascending union of the selected scenarios' k values.
    pub fn truth_k_values(&self) -> Result<Vec<usize>> {
        let mut ks: Vec<usize> = self.scenario_specs()?.into_iter().flat_map(|s| s.k_values).collect();
        ks.sort_unstable();
        ks.dedup();
        Ok(ks)
    }

    /// Every query contributes one sample per k, so the pool needs as many
    /// queries as the largest per-k demand of any scenario.
    pub fn truth_query_count(&self) -> Result<usize> {
        if let Some(q) = self.truth_queries {
            return Ok(q);
        }
        Ok(self
            .scenario_specs()?
            .iter()
            .map(|s| s.allocation(s.total_size)[0].1 + s.allocation(s.test_size())[0].1)
            .max()
            .unwrap_or(0))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.dataset.profile, &self.dataset.path) {
            (Some(_), Some(_)) | (None, None) => return bad("dataset needs exactly one of profile or path".into()),
            (None, Some(p)) if !p.is_file() => return bad(format!("dataset file {} not found", p.display())),
            (Some(_), None) if self.dataset.n == 0 || self.dataset.d == 0 || self.dataset.clusters == 0 => {
                return bad("synthetic dataset needs n, d and clusters >= 1".into())
            }
            _ => {}
        }
        if self.scenarios.is_empty() || self.kinds.is_empty() {
            return bad("at least one scenario and one regressor kind".into());
        }
        let mut s = self.scenarios.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.scenarios.len() {
            return bad("duplicate scenario id".into());
        }
        let mut k = self.kinds.clone();
        k.sort_unstable();
        k.dedup();
        if k.len() != self.kinds.len() {
            return bad("duplicate regressor kind".into());
        }
        self.scenario_specs().map_err(|e| Error::Config(e.to_string()))?;
        if self.folds == 1 {
            return bad("folds must be 0 (no cross-validation) or at least 2".into());
        }
        if self.timing_repetitions < 3 {
            return bad("timing_repetitions must be at least 3".into());
        }
        self.lsh.sensitivity().map_err(|e| Error::Config(e.to_string()))?;
        if self.demo.k == 0 || !(1..=5).contains(&self.demo.scenario) {
            return bad("demo needs k >= 1 and a scenario id in 1..=5".into());
        }
        Ok(())
    }
}
