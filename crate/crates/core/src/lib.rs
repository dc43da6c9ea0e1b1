//! Statevector simulation of amplitude-amplified multi-pattern recognition.
//!
//! A padded pattern database (targets, spurious records, virtual padding) is
//! searched for records whose feature lies within a distance threshold of a
//! query feature. The search iteration loads the record, computes its
//! feature and distance into ancilla registers, phase-marks matches,
//! uncomputes the ancillas and reflects about the uniform index state. A
//! randomized schedule with an exponentially growing iteration budget drives
//! the iteration when the number of matches is unknown.
//!
//! Two engines are provided: [`FullState`] simulates all four registers
//! explicitly, [`ReducedState`] keeps only the index register and is exact on
//! every state reachable by whole iterations.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod engine;
mod error;
pub mod pattern;
pub mod recognizer;
pub mod reduced;
pub mod rng;
pub mod search;

pub use engine::{FullState, MeasurementOutcome, QueryContext, RegisterLayout, DEFAULT_QUBIT_CAP};
pub use error::Error;
pub use pattern::{
    Codebook, CodebookEntry, DistanceValue, FeatureExtractor, FeatureMode, FeatureValue,
    IdentityExtractor, PatternClass, PatternDatabase, PatternRecord,
};
pub use recognizer::{
    brute_force_recognize, diff_reports, entry_config, recognize_all, recognize_feature,
    BruteForceResult, Discrepancy, DiscrepancyKind, EntryResult, RecognitionReport,
};
pub use reduced::{closed_form_success, ReducedState};
pub use search::{
    draw_j, next_m, run_search, verify_candidate, Engine, SearchConfig, SearchOutcome,
    SearchReport, SearchRound,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
