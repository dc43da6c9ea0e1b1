use std::io::Write;

use qpr_core::recognizer::entry_config;
use qpr_core::{
    brute_force_recognize, diff_reports, recognize_feature, run_search, Discrepancy, DistanceValue,
    Engine, FeatureValue, QueryContext, RecognitionReport, SearchConfig, SearchReport,
};
use rayon::prelude::*;

use crate::instance::{constraint, Instance};
use crate::report::{
    write_record, DiscrepancyRecord, EntryRecord, RecognitionRecord, RunParams, SearchRecord,
    SweepRow,
};
use crate::selftest::{self, SelftestConfig};
use crate::sweep;
use crate::CliError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DIFF: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub engine: Engine,
    pub seed: u64,
    pub cap_factor: f64,
    pub lambda: f64,
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        let config = SearchConfig::default();
        RunOptions {
            engine: config.engine,
            seed: config.seed,
            cap_factor: config.cap_factor,
            lambda: config.lambda,
            jobs: 1,
        }
    }
}

impl RunOptions {
    pub fn search_config(&self) -> Result<SearchConfig, CliError> {
        let config = SearchConfig {
            lambda: self.lambda,
            seed: self.seed,
            cap_factor: self.cap_factor,
            engine: self.engine,
            ..SearchConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// One search for `feature` (default: first codebook entry).
pub fn cmd_simulate(
    instance: &Instance,
    feature: Option<u64>,
    alpha: Option<u64>,
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<SearchReport, CliError> {
    let config = opts.search_config()?;
    let db = &instance.database;
    let feature = match feature {
        Some(f) => FeatureValue(f),
        None => instance
            .codebook
            .entries()
            .first()
            .map(|e| e.feature)
            .ok_or_else(|| {
                CliError::Usage("no --feature given and the codebook is empty".into())
            })?,
    };
    let alpha = alpha.map_or(instance.alpha, DistanceValue);
    let ctx = QueryContext::new(db, feature, alpha, instance.mode).map_err(|e| constraint(&e))?;
    let report = run_search(db, &ctx, &config, &Default::default())?;
    let record = SearchRecord::new(
        RunParams::new(&config, &instance.digest),
        feature.get(),
        alpha.get(),
        instance.mode,
        &report,
    );
    write_record(out, &record)?;
    Ok(report)
}

/// Exhaustive recognition of every codebook entry. Entries run on up to
/// `opts.jobs` threads; the report is identical for any thread count.
pub fn recognize(instance: &Instance, opts: &RunOptions) -> Result<RecognitionReport, CliError> {
    let config = opts.search_config()?;
    let entries = opts.pool()?.install(|| {
        instance
            .codebook
            .entries()
            .par_iter()
            .enumerate()
            .map(|(e, entry)| {
                recognize_feature(
                    &instance.database,
                    entry.feature,
                    instance.alpha,
                    instance.mode,
                    &entry_config(&config, e),
                    true,
                )
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RecognitionReport { entries })
}

pub fn recognition_exit_code(discrepancies: &[Discrepancy]) -> i32 {
    if discrepancies.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIFF
    }
}

/// Emits one record per search, then a summary with the brute-force diff.
/// Returns the process exit code.
pub fn cmd_recognize(
    instance: &Instance,
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let config = opts.search_config()?;
    let report = recognize(instance, opts)?;
    let brute = brute_force_recognize(
        &instance.database,
        &instance.codebook,
        instance.alpha,
        instance.mode,
    )?;
    let diff = diff_reports(&report, &brute);
    write_recognition(instance, &config, &report, &diff, out)?;
    Ok(recognition_exit_code(&diff))
}

pub fn write_recognition(
    instance: &Instance,
    config: &SearchConfig,
    report: &RecognitionReport,
    diff: &[Discrepancy],
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let params = RunParams::new(config, &instance.digest);
    for (e, entry) in report.entries.iter().enumerate() {
        for (k, search) in entry.searches.iter().enumerate() {
            let mut record = SearchRecord::new(
                params.clone(),
                entry.feature.get(),
                instance.alpha.get(),
                instance.mode,
                search,
            );
            record.entry = Some(e);
            record.search = Some(k);
            write_record(out, &record)?;
        }
    }
    let summary = RecognitionRecord {
        kind: "recognition",
        params,
        alpha: instance.alpha.get(),
        mode: instance.mode.as_str(),
        entries: report
            .entries
            .iter()
            .enumerate()
            .map(|(entry, r)| EntryRecord {
                entry,
                feature: r.feature.get(),
                indices: r.indices.clone(),
                total_gpr: r.total_gpr(),
            })
            .collect(),
        total_gpr: report.total_gpr(),
        discrepancies: diff.iter().map(DiscrepancyRecord::from).collect(),
    };
    write_record(out, &summary)?;
    Ok(())
}

pub fn cmd_sweep(
    n_list: &[usize],
    m_list: &[usize],
    trials: usize,
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<Vec<SweepRow>, CliError> {
    let config = opts.search_config()?;
    let rows = sweep::sweep(n_list, m_list, trials, &config, opts.jobs)?;
    for row in &rows {
        write_record(out, row)?;
    }
    Ok(rows)
}

/// Runs every invariant suite; returns the exit code.
pub fn cmd_selftest(config: &SelftestConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let suites = selftest::run_all(config);
    for suite in &suites {
        write_record(out, suite)?;
    }
    Ok(if suites.iter().all(|s| s.passed) {
        EXIT_OK
    } else {
        EXIT_SELFTEST
    })
}
