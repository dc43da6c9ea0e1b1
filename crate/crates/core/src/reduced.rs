//! Index-subspace engine.
//!
//! After every whole iteration the payload, feature and distance registers
//! are back at zero, so a reachable state is fully described by its `N`
//! index amplitudes. One iteration then reduces to a sign flip on the marked
//! indices followed by inversion about the mean.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::engine::{sample_marginal, MeasurementOutcome, QueryContext, NORM_TOLERANCE};
use crate::pattern::PatternDatabase;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    amplitudes: Vec<Complex64>,
    marked: BTreeSet<usize>,
    // membership by index, kept alongside `marked` for the hot loop
    is_marked: Vec<bool>,
    gpr_count: u64,
}

impl ReducedState {
    /// Uniform state whose marked set is the linear-scan marked set minus
    /// `excluded`.
    pub fn build(
        db: &PatternDatabase,
        ctx: &QueryContext,
        excluded: &BTreeSet<usize>,
    ) -> Result<Self> {
        let marked = db.marked_set(ctx.query_feature, ctx.alpha, ctx.mode)?;
        Ok(Self::with_marked(
            db.len(),
            marked.difference(excluded).copied().collect(),
        ))
    }

    /// Uniform state over `n` indices with an explicit marked set. Indices
    /// `>= n` are dropped.
    pub fn with_marked(n: usize, marked: BTreeSet<usize>) -> Self {
        let marked: BTreeSet<usize> = marked.into_iter().filter(|&i| i < n).collect();
        let mut is_marked = vec![false; n];
        for &i in &marked {
            is_marked[i] = true;
        }
        let amp = Complex64::new(1.0 / libm::sqrt(n as f64), 0.0);
        ReducedState {
            amplitudes: vec![amp; n],
            marked,
            is_marked,
            gpr_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn marked(&self) -> &BTreeSet<usize> {
        &self.marked
    }

    pub fn gpr_count(&self) -> u64 {
        self.gpr_count
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn apply_gpr(&mut self) {
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, &m) in self.amplitudes.iter_mut().zip(&self.is_marked) {
            if m {
                *a = -*a;
            }
            sum += *a;
        }
        let twice_mean = sum * (2.0 / self.amplitudes.len() as f64);
        for a in &mut self.amplitudes {
            *a = twice_mean - *a;
        }
        self.gpr_count += 1;
    }

    pub fn apply_gpr_times(&mut self, j: u64) {
        for _ in 0..j {
            self.apply_gpr();
        }
    }

    pub fn success_probability(&self) -> f64 {
        self.marked
            .iter()
            .map(|&i| self.amplitudes[i].norm_sqr())
            .sum()
    }

    pub fn index_marginal(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn measure_index<R: Rng + ?Sized>(self, rng: &mut R) -> Result<MeasurementOutcome> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized { norm });
        }
        Ok(sample_marginal(&self.index_marginal(), rng))
    }
}

/// `sin^2((2j + 1) * asin(sqrt(M / N)))`, the success probability of `j`
/// amplitude-amplification rounds with `M` of `N` items marked.
pub fn closed_form_success(n: usize, m: usize, j: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if m >= n {
        return 1.0;
    }
    let theta = libm::asin(libm::sqrt(m as f64 / n as f64));
    let s = libm::sin((2 * j + 1) as f64 * theta);
    s * s
}
