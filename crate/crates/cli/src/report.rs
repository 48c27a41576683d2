//! Run records and file emission. Reports are deterministic: identical
//! config and seeds produce byte-identical JSON (per-stage timings are
//! kept out of the serialized form).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use phaseret_core::retrieval::RetrievalReport;
use phaseret_core::sets::UniquenessCertificate;

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub config_hash: String,
    pub per_seed: Vec<SeedOutcome>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub noise_level: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RetrievalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_condition: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Aggregate {
    pub total: usize,
    pub succeeded: usize,
    pub recovered: usize,
    pub excluded: usize,
    pub errored: usize,
    pub pass_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_recovery_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_worst_condition: Option<f64>,
}

impl Aggregate {
    /// Recomputes the aggregate statistics from per-seed entries.
    pub fn from_outcomes(outcomes: &[SeedOutcome], threshold: f64, cond_limit: f64) -> Aggregate {
        let total = outcomes.len();
        let mut errored = 0usize;
        let mut recovered = 0usize;
        let mut excluded = 0usize;
        let mut errors: Vec<f64> = Vec::new();
        let mut conds: Vec<f64> = Vec::new();
        for o in outcomes {
            match (&o.report, o.complete) {
                (Some(rep), _) => {
                    errors.push(rep.recovery_error);
                    conds.push(rep.worst_condition);
                    if rep.worst_condition > cond_limit {
                        excluded += 1;
                    } else if rep.recovery_error <= threshold {
                        recovered += 1;
                    }
                }
                (None, Some(complete)) => {
                    if let Some(c) = o.worst_condition {
                        conds.push(c);
                    }
                    if complete {
                        recovered += 1;
                    }
                }
                (None, None) => {
                    if o.status == "error" {
                        errored += 1;
                    }
                }
            }
        }
        let succeeded = total - errored;
        let denom = total.saturating_sub(excluded).max(1);
        Aggregate {
            total,
            succeeded,
            recovered,
            excluded,
            errored,
            pass_rate: recovered as f64 / denom as f64,
            median_recovery_error: median(&mut errors),
            median_worst_condition: median(&mut conds),
        }
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(v[v.len() / 2])
}

#[derive(Debug, Serialize)]
pub struct UniquenessRecord {
    pub command: String,
    pub config_hash: String,
    pub certificate: UniquenessCertificate,
}

#[derive(Debug, Serialize)]
pub struct LlnRecord {
    pub command: String,
    pub config_hash: String,
    pub checkpoints: Vec<usize>,
    pub cases: Vec<LlnCaseSummary>,
}

#[derive(Debug, Serialize)]
pub struct LlnCaseSummary {
    pub kind: String,
    pub case: String,
    pub limit_re: f64,
    pub limit_im: f64,
    pub constant_case: bool,
    /// For zero-limit cases: fraction of seeds whose final average lies
    /// within `6 (max a)^4 / sqrt(N)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_pass_rate: Option<f64>,
    /// For constant cases: largest relative deviation from the limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_deviation: Option<f64>,
}

pub fn config_hash(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).context("serializing report")?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(csv::Writer::from_writer(file))
}
