//! Seeded trial sweeps measuring iteration counts against `sqrt(N/M)`.

use std::collections::BTreeSet;

use qpr_core::rng::derive_seed;
use qpr_core::{
    run_search, DistanceValue, Engine, FeatureMode, FeatureValue, PatternDatabase, QueryContext,
    SearchConfig, SearchOutcome,
};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::report::{RunParams, SweepRow};
use crate::CliError;

const SWEEP_BITS: u32 = 4;

/// Database with exactly `m` records at feature 0 and spurious records
/// filling the rest, plus the matching query (feature 0, alpha 0).
pub fn synthesize(n: usize, m: usize) -> Result<(PatternDatabase, QueryContext), CliError> {
    if n < 2 || m > n {
        return Err(CliError::Usage(format!(
            "sweep needs 2 <= N and M <= N, got N={n}, M={m}"
        )));
    }
    let targets = vec![0u64; m];
    let spurious = vec![1u64; n - m];
    let db = PatternDatabase::build(&targets, &spurious, SWEEP_BITS, SWEEP_BITS, SWEEP_BITS)?;
    let ctx = QueryContext::new(
        &db,
        FeatureValue(0),
        DistanceValue(0),
        FeatureMode::Idealized,
    )?;
    Ok((db, ctx))
}

fn synthetic_digest(n: usize, m: usize) -> String {
    let tag = format!("sweep:n={n}:m={m}:bits={SWEEP_BITS}");
    hex::encode(Sha256::digest(tag.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub total_gpr: u64,
    pub found: Option<usize>,
}

/// Runs `trials` searches; trial `t` uses seed `derive_seed(config.seed, t)`.
/// Results are returned in trial order whatever the thread count.
pub fn run_trials(
    db: &PatternDatabase,
    ctx: &QueryContext,
    config: &SearchConfig,
    trials: usize,
    jobs: usize,
) -> Result<Vec<TrialResult>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let trial_config = config.with_seed(derive_seed(config.seed, t as u64));
                let report = run_search(db, ctx, &trial_config, &BTreeSet::new())?;
                Ok(TrialResult {
                    total_gpr: report.total_gpr,
                    found: match report.outcome {
                        SearchOutcome::Found(i) => Some(i),
                        SearchOutcome::NotFound => None,
                    },
                })
            })
            .collect::<Result<Vec<_>, qpr_core::Error>>()
    })?;
    Ok(results)
}

pub fn sweep_row(
    n: usize,
    m: usize,
    trials: usize,
    config: &SearchConfig,
    jobs: usize,
) -> Result<SweepRow, CliError> {
    if config.engine != Engine::Reduced {
        return Err(CliError::Usage(
            "sweep runs on the reduced engine only".into(),
        ));
    }
    let (db, ctx) = synthesize(n, m)?;
    let results = run_trials(&db, &ctx, config, trials, jobs)?;
    let total: u64 = results.iter().map(|r| r.total_gpr).sum();
    let found = results.iter().filter(|r| r.found.is_some()).count();
    let (mean_gpr, found_rate) = if trials == 0 {
        (0.0, 0.0)
    } else {
        (total as f64 / trials as f64, found as f64 / trials as f64)
    };
    let n = db.len();
    Ok(SweepRow {
        kind: "sweep_row",
        params: RunParams::new(config, &synthetic_digest(n, m)),
        n,
        m,
        trials,
        query_cap: config.query_cap(n),
        mean_gpr,
        found_rate,
        ratio: (m > 0).then(|| mean_gpr / (n as f64 / m as f64).sqrt()),
    })
}

/// One row per `(n, m)` pair with `m <= n`, in list order.
pub fn sweep(
    n_list: &[usize],
    m_list: &[usize],
    trials: usize,
    config: &SearchConfig,
    jobs: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for &n in n_list {
        for &m in m_list.iter().filter(|&&m| m <= n) {
            rows.push(sweep_row(n, m, trials, config, jobs)?);
        }
    }
    Ok(rows)
}
