//! Recognition over a whole codebook: one search per codebook feature,
//! optionally repeated with exclusion until every match is found, plus the
//! classical brute-force equivalent and a set diff between the two.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::engine::QueryContext;
use crate::pattern::{Codebook, DistanceValue, FeatureMode, FeatureValue, PatternDatabase};
use crate::rng::derive_seed;
use crate::search::{run_search, SearchConfig, SearchOutcome, SearchReport};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EntryResult {
    pub feature: FeatureValue,
    /// Recognized indices in discovery order.
    pub indices: Vec<usize>,
    pub searches: Vec<SearchReport>,
}

impl EntryResult {
    pub fn total_gpr(&self) -> u64 {
        self.searches.iter().map(|s| s.total_gpr).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecognitionReport {
    pub entries: Vec<EntryResult>,
}

impl RecognitionReport {
    pub fn total_gpr(&self) -> u64 {
        self.entries.iter().map(EntryResult::total_gpr).sum()
    }
}

/// Searches for `feature`. The `k`-th search of an exhaustive run uses seed
/// `derive_seed(config.seed, k)`.
pub fn recognize_feature(
    db: &PatternDatabase,
    feature: FeatureValue,
    alpha: DistanceValue,
    mode: FeatureMode,
    config: &SearchConfig,
    exhaustive: bool,
) -> Result<EntryResult> {
    config.validate()?;
    let ctx = QueryContext::new(db, feature, alpha, mode)?;
    let mut excluded = BTreeSet::new();
    let mut indices = Vec::new();
    let mut searches = Vec::new();
    for k in 0u64.. {
        let search_config = config.with_seed(derive_seed(config.seed, k));
        let report = run_search(db, &ctx, &search_config, &excluded)?;
        let outcome = report.outcome;
        searches.push(report);
        match outcome {
            SearchOutcome::Found(i) => {
                excluded.insert(i);
                indices.push(i);
                if !exhaustive || excluded.len() == db.len() {
                    break;
                }
            }
            SearchOutcome::NotFound => break,
        }
    }
    Ok(EntryResult {
        feature,
        indices,
        searches,
    })
}

/// Search configuration used for codebook entry `entry`.
pub fn entry_config(config: &SearchConfig, entry: usize) -> SearchConfig {
    config.with_seed(derive_seed(config.seed, entry as u64))
}

/// Exhaustive recognition of every codebook entry, in codebook order. Each
/// entry has its own exclusion set, so one record may be reported under
/// several features.
pub fn recognize_all(
    db: &PatternDatabase,
    codebook: &Codebook,
    alpha: DistanceValue,
    mode: FeatureMode,
    config: &SearchConfig,
) -> Result<RecognitionReport> {
    let entries = codebook
        .entries()
        .iter()
        .enumerate()
        .map(|(e, entry)| {
            recognize_feature(
                db,
                entry.feature,
                alpha,
                mode,
                &entry_config(config, e),
                true,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecognitionReport { entries })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BruteForceResult {
    pub entries: Vec<(FeatureValue, BTreeSet<usize>)>,
}

pub fn brute_force_recognize(
    db: &PatternDatabase,
    codebook: &Codebook,
    alpha: DistanceValue,
    mode: FeatureMode,
) -> Result<BruteForceResult> {
    let entries = codebook
        .entries()
        .iter()
        .map(|entry| Ok((entry.feature, db.marked_set(entry.feature, alpha, mode)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BruteForceResult { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiscrepancyKind {
    /// Present classically, not recognized.
    Missing,
    /// Recognized but not present classically.
    Extra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Discrepancy {
    pub entry: usize,
    pub feature: FeatureValue,
    pub kind: DiscrepancyKind,
    pub index: usize,
}

/// Per-entry set comparison. Entries are matched by position; an entry
/// missing on one side counts as an empty set.
pub fn diff_reports(quantum: &RecognitionReport, classical: &BruteForceResult) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    let len = quantum.entries.len().max(classical.entries.len());
    for entry in 0..len {
        let q = quantum.entries.get(entry);
        let c = classical.entries.get(entry);
        let feature = q
            .map(|q| q.feature)
            .or(c.map(|c| c.0))
            .unwrap_or(FeatureValue(0));
        let found: BTreeSet<usize> = q
            .map(|q| q.indices.iter().copied().collect())
            .unwrap_or_default();
        let expected = c.map(|c| c.1.clone()).unwrap_or_default();
        for &index in expected.difference(&found) {
            out.push(Discrepancy {
                entry,
                feature,
                kind: DiscrepancyKind::Missing,
                index,
            });
        }
        for &index in found.difference(&expected) {
            out.push(Discrepancy {
                entry,
                feature,
                kind: DiscrepancyKind::Extra,
                index,
            });
        }
    }
    out
}
