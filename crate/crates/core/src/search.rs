//! Randomized search schedule for an unknown number of matches.
//!
//! Each round draws `j` uniformly below the current budget `m`, applies `j`
//! iterations to a fresh initial state, measures the index register and
//! checks the outcome classically. On a miss `m` grows by `lambda` up to
//! `sqrt(N)`. A cumulative cap of `ceil(cap_factor * sqrt(N))` iterations
//! bounds runs that have nothing to find.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use crate::engine::{FullState, QueryContext, RegisterLayout, DEFAULT_QUBIT_CAP};
use crate::pattern::PatternDatabase;
use crate::reduced::ReducedState;
use crate::rng::round_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    Full,
    #[default]
    Reduced,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Full => "full",
            Engine::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Growth factor of the iteration budget, in `(1, 4/3)`.
    pub lambda: f64,
    pub seed: u64,
    /// Query cap is `ceil(cap_factor * sqrt(N))`. Infinity disables the cap,
    /// in which case a run with nothing to find never returns.
    pub cap_factor: f64,
    pub engine: Engine,
    /// Qubit limit for the full engine.
    pub qubit_cap: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            lambda: 1.2,
            seed: 0,
            cap_factor: 8.0,
            engine: Engine::Reduced,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        SearchConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda < 4.0 / 3.0) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        if !(self.cap_factor > 0.0) {
            return Err(Error::InvalidCapFactor(self.cap_factor));
        }
        Ok(())
    }

    /// `ceil(cap_factor * sqrt(n))`, saturating at `u64::MAX`.
    pub fn query_cap(&self, n: usize) -> u64 {
        let cap = libm::ceil(self.cap_factor * libm::sqrt(n as f64));
        if cap >= u64::MAX as f64 {
            u64::MAX
        } else {
            cap as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRound {
    pub m: f64,
    pub j: u64,
    pub outcome_index: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchOutcome {
    Found(usize),
    /// The query cap was reached without a verified index.
    NotFound,
}

impl SearchOutcome {
    pub fn found(self) -> Option<usize> {
        match self {
            SearchOutcome::Found(i) => Some(i),
            SearchOutcome::NotFound => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub rounds: Vec<SearchRound>,
    pub total_gpr: u64,
    pub outcome: SearchOutcome,
    pub seed: u64,
    pub query_cap: u64,
}

/// `min(lambda * m, sqrt(n))`.
pub fn next_m(m: f64, lambda: f64, n: usize) -> f64 {
    (lambda * m).min(libm::sqrt(n as f64))
}

/// Uniform over `0..ceil(m)`.
pub fn draw_j<R: Rng + ?Sized>(m: f64, rng: &mut R) -> u64 {
    let bound = libm::ceil(m).max(1.0) as u64;
    rng.random_range(0..bound)
}

/// Classical check of one candidate index.
pub fn verify_candidate(db: &PatternDatabase, ctx: &QueryContext, index: usize) -> Result<bool> {
    ctx.matches(db, index)
}

/// One complete randomized search. Indices in `excluded` are neither marked
/// nor accepted.
pub fn run_search(
    db: &PatternDatabase,
    ctx: &QueryContext,
    config: &SearchConfig,
    excluded: &BTreeSet<usize>,
) -> Result<SearchReport> {
    config.validate()?;
    db.check_alpha(ctx.alpha)?;
    db.check_query_feature(ctx.query_feature)?;
    if let Some(&index) = excluded.iter().find(|&&i| i >= db.len()) {
        return Err(Error::IndexOutOfRange {
            index,
            len: db.len(),
        });
    }

    let n = db.len();
    let query_cap = config.query_cap(n);
    let engine = RoundEngine::new(db, ctx, config, excluded)?;

    let mut rounds = Vec::new();
    let mut total_gpr = 0u64;
    let mut m = 1.0;
    let mut outcome = SearchOutcome::NotFound;
    for round in 0u64.. {
        let mut rng = round_rng(config.seed, round);
        let remaining = query_cap - total_gpr;
        let drawn = draw_j(m, &mut rng);
        // the round that would overrun the cap is cut short and is the last
        let j = drawn.min(remaining);
        let measured = engine.run(j, &mut rng)?;
        total_gpr += j;

        let verified = !excluded.contains(&measured) && verify_candidate(db, ctx, measured)?;
        rounds.push(SearchRound {
            m,
            j,
            outcome_index: measured,
            verified,
        });
        if verified {
            outcome = SearchOutcome::Found(measured);
            break;
        }
        if drawn > remaining || total_gpr == query_cap {
            break;
        }
        m = next_m(m, config.lambda, n);
    }

    if let SearchOutcome::Found(i) = outcome {
        assert!(!excluded.contains(&i) && verify_candidate(db, ctx, i)?);
    }
    assert!(total_gpr <= query_cap);
    Ok(SearchReport {
        rounds,
        total_gpr,
        outcome,
        seed: config.seed,
        query_cap,
    })
}

/// Prepares a fresh initial state per round and runs `j` iterations on it.
enum RoundEngine<'a> {
    Full {
        db: &'a PatternDatabase,
        ctx: &'a QueryContext,
        excluded: &'a BTreeSet<usize>,
        initial: FullState,
    },
    Reduced(ReducedState),
}

impl<'a> RoundEngine<'a> {
    fn new(
        db: &'a PatternDatabase,
        ctx: &'a QueryContext,
        config: &SearchConfig,
        excluded: &'a BTreeSet<usize>,
    ) -> Result<Self> {
        Ok(match config.engine {
            Engine::Full => {
                let layout = RegisterLayout::for_database(db);
                let initial = FullState::prepare_with_cap(layout, config.qubit_cap)?;
                RoundEngine::Full {
                    db,
                    ctx,
                    excluded,
                    initial,
                }
            }
            Engine::Reduced => RoundEngine::Reduced(ReducedState::build(db, ctx, excluded)?),
        })
    }

    fn run<R: Rng + ?Sized>(&self, j: u64, rng: &mut R) -> Result<usize> {
        match self {
            RoundEngine::Full {
                db,
                ctx,
                excluded,
                initial,
            } => {
                let mut state = initial.clone();
                for _ in 0..j {
                    state.apply_gpr_excluding(db, ctx, excluded)?;
                }
                Ok(state.measure_index(rng)?.index)
            }
            RoundEngine::Reduced(initial) => {
                let mut state = initial.clone();
                state.apply_gpr_times(j);
                Ok(state.measure_index(rng)?.index)
            }
        }
    }
}
