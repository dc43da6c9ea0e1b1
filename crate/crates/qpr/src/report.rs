//! JSON Lines report records. Every record repeats the parameters needed to
//! re-run it: seed, engine, lambda, cap and instance digest.

use std::io::{self, Write};

use qpr_core::{
    Discrepancy, DiscrepancyKind, FeatureMode, SearchConfig, SearchOutcome, SearchReport,
};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub seed: u64,
    pub engine: &'static str,
    pub lambda: f64,
    /// `null` when the cap is disabled.
    pub cap_factor: Option<f64>,
    pub instance_digest: String,
}

impl RunParams {
    pub fn new(config: &SearchConfig, instance_digest: &str) -> Self {
        RunParams {
            seed: config.seed,
            engine: config.engine.as_str(),
            lambda: config.lambda,
            cap_factor: config.cap_factor.is_finite().then_some(config.cap_factor),
            instance_digest: instance_digest.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub m: f64,
    pub j: u64,
    pub outcome_index: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub kind: &'static str,
    #[serde(flatten)]
    pub params: RunParams,
    /// Codebook entry and search number within it, for recognition runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entry: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<usize>,
    pub feature: u64,
    pub alpha: u64,
    pub mode: &'static str,
    /// Seed of this particular search.
    pub search_seed: u64,
    pub query_cap: u64,
    pub result: &'static str,
    pub index: Option<usize>,
    pub verified: bool,
    /// `"verified"` or `"query_cap"`; the cap is an extension of the
    /// schedule, which has no stopping rule of its own.
    pub termination: &'static str,
    pub total_gpr: u64,
    pub rounds: Vec<RoundRecord>,
}

impl SearchRecord {
    pub fn new(
        params: RunParams,
        feature: u64,
        alpha: u64,
        mode: FeatureMode,
        report: &SearchReport,
    ) -> Self {
        let found = report.outcome.found();
        SearchRecord {
            kind: "search",
            params,
            entry: None,
            search: None,
            feature,
            alpha,
            mode: mode.as_str(),
            search_seed: report.seed,
            query_cap: report.query_cap,
            result: match report.outcome {
                SearchOutcome::Found(_) => "found",
                SearchOutcome::NotFound => "not_found",
            },
            index: found,
            verified: found.is_some(),
            termination: if found.is_some() {
                "verified"
            } else {
                "query_cap"
            },
            total_gpr: report.total_gpr,
            rounds: report
                .rounds
                .iter()
                .map(|r| RoundRecord {
                    m: r.m,
                    j: r.j,
                    outcome_index: r.outcome_index,
                    verified: r.verified,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryRecord {
    pub entry: usize,
    pub feature: u64,
    pub indices: Vec<usize>,
    pub total_gpr: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiscrepancyRecord {
    pub entry: usize,
    pub feature: u64,
    pub kind: &'static str,
    pub index: usize,
}

impl From<&Discrepancy> for DiscrepancyRecord {
    fn from(d: &Discrepancy) -> Self {
        DiscrepancyRecord {
            entry: d.entry,
            feature: d.feature.get(),
            kind: match d.kind {
                DiscrepancyKind::Missing => "missing",
                DiscrepancyKind::Extra => "extra",
            },
            index: d.index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecognitionRecord {
    pub kind: &'static str,
    #[serde(flatten)]
    pub params: RunParams,
    pub alpha: u64,
    pub mode: &'static str,
    pub entries: Vec<EntryRecord>,
    pub total_gpr: u64,
    pub discrepancies: Vec<DiscrepancyRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: &'static str,
    #[serde(flatten)]
    pub params: RunParams,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub query_cap: u64,
    pub mean_gpr: f64,
    pub found_rate: f64,
    /// `mean_gpr / sqrt(n / m)`; `null` for `m = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteRecord {
    pub kind: &'static str,
    pub suite: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Writes one JSON object per line.
pub fn write_record<W: Write + ?Sized, T: Serialize>(out: &mut W, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}
