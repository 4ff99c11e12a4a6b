//! `--config` files for `run`: flat JSON keys named after the flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub domain: Option<String>,
    pub size: Option<String>,
    pub mode: Option<String>,
    pub episodes: Option<usize>,
    pub tmax: Option<usize>,
    #[serde(alias = "plan-budget")]
    pub plan_budget: Option<f64>,
    pub seeds: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "external-planner")]
    pub external_planner: Option<PathBuf>,
    #[serde(alias = "out-dir")]
    pub out_dir: Option<PathBuf>,
    pub problems: Option<PathBuf>,
    #[serde(alias = "snapshot-every")]
    pub snapshot_every: Option<usize>,
    #[serde(alias = "expansion-cap")]
    pub expansion_cap: Option<usize>,
    #[serde(alias = "sample-cap")]
    pub sample_cap: Option<usize>,
    #[serde(alias = "split-equalities")]
    pub split_equalities: Option<bool>,
    // agent hyperparameters
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub clip: Option<f64>,
    pub vf_coef: Option<f64>,
    pub entropy_coef: Option<f64>,
    pub lr: Option<f64>,
    pub grad_clip: Option<f64>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub minibatch: Option<usize>,
    pub hidden: Option<Vec<usize>>,
}

pub fn read_run_file(path: &Path) -> Result<RunFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}
