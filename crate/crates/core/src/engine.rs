//! Full statevector engine over the index, payload, feature and distance
//! registers.
//!
//! Basis ordinals are laid out with the index register in the high bits and
//! the distance register in the low bits:
//!
//! ```text
//! ordinal(i, x, c, d) = ((i * 2^P + x) * 2^F + c) * 2^D + d
//! ```
//!
//! The threshold and the query feature are classical context
//! ([`QueryContext`]); they are never superposed so they are not simulated.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::pattern::{distance, mask, DistanceValue, FeatureMode, FeatureValue, PatternDatabase};
use crate::{Error, Result};

/// Default limit on the total qubit count of a [`FullState`].
pub const DEFAULT_QUBIT_CAP: u32 = 24;

pub(crate) const NORM_TOLERANCE: f64 = 1e-9;
const ANCILLA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    pub index_bits: u32,
    pub payload_bits: u32,
    pub feature_bits: u32,
    pub distance_bits: u32,
}

impl RegisterLayout {
    pub fn for_database(db: &PatternDatabase) -> Self {
        RegisterLayout {
            index_bits: db.index_bits(),
            payload_bits: db.payload_bits(),
            feature_bits: db.feature_bits(),
            distance_bits: db.distance_bits(),
        }
    }

    pub fn total_bits(&self) -> u32 {
        self.index_bits + self.ancilla_bits()
    }

    pub fn ancilla_bits(&self) -> u32 {
        self.payload_bits + self.feature_bits + self.distance_bits
    }

    pub fn index_count(&self) -> usize {
        1 << self.index_bits
    }

    pub fn dimension(&self) -> usize {
        1 << self.total_bits()
    }

    pub fn ordinal(&self, index: usize, payload: u64, feature: u64, dist: u64) -> usize {
        let ordinal = (((index as u64) << self.payload_bits | payload) << self.feature_bits
            | feature)
            << self.distance_bits
            | dist;
        ordinal as usize
    }

    /// Splits an ordinal into `(index, payload, feature, distance)`.
    pub fn fields(&self, ordinal: usize) -> (usize, u64, u64, u64) {
        let o = ordinal as u64;
        let dist = o & mask(self.distance_bits);
        let feature = (o >> self.feature_shift()) & mask(self.feature_bits);
        let payload = (o >> self.payload_shift()) & mask(self.payload_bits);
        ((o >> self.index_shift()) as usize, payload, feature, dist)
    }

    fn feature_shift(&self) -> u32 {
        self.distance_bits
    }

    fn payload_shift(&self) -> u32 {
        self.distance_bits + self.feature_bits
    }

    fn index_shift(&self) -> u32 {
        self.ancilla_bits()
    }

    fn check_cap(&self, cap: u32) -> Result<()> {
        let total_bits = self.total_bits();
        // usize indexing needs headroom regardless of the configured cap
        if total_bits > cap || total_bits >= usize::BITS - 1 {
            return Err(Error::SimulationCap { total_bits, cap });
        }
        Ok(())
    }
}

/// Classical query parameters: the threshold and the feature being looked
/// for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryContext {
    pub alpha: DistanceValue,
    pub query_feature: FeatureValue,
    pub mode: FeatureMode,
}

impl QueryContext {
    pub fn new(
        db: &PatternDatabase,
        query_feature: FeatureValue,
        alpha: DistanceValue,
        mode: FeatureMode,
    ) -> Result<Self> {
        db.check_alpha(alpha)?;
        db.check_query_feature(query_feature)?;
        Ok(QueryContext {
            alpha,
            query_feature,
            mode,
        })
    }

    /// Classical evaluation of the marking predicate for one record.
    pub fn matches(&self, db: &PatternDatabase, index: usize) -> Result<bool> {
        let feature = db.feature_of(index, self.mode)?;
        Ok(db.distance(feature, self.query_feature) <= self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    /// The uniform variate in `[0, 1)` consumed by the measurement.
    pub draw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    amplitudes: Vec<Complex64>,
    layout: RegisterLayout,
    gpr_count: u64,
}

impl FullState {
    /// Uniform superposition over the index register with every ancilla at
    /// zero.
    pub fn prepare(layout: RegisterLayout) -> Result<Self> {
        Self::prepare_with_cap(layout, DEFAULT_QUBIT_CAP)
    }

    pub fn prepare_with_cap(layout: RegisterLayout, cap: u32) -> Result<Self> {
        layout.check_cap(cap)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        let n = layout.index_count();
        let amp = Complex64::new(1.0 / libm::sqrt(n as f64), 0.0);
        for i in 0..n {
            amplitudes[layout.ordinal(i, 0, 0, 0)] = amp;
        }
        Ok(FullState {
            amplitudes,
            layout,
            gpr_count: 0,
        })
    }

    /// Wraps explicit amplitudes. The vector must have the layout's dimension
    /// and unit norm.
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        layout.check_cap(usize::BITS - 2)?;
        if amplitudes.len() != layout.dimension() {
            return Err(Error::LayoutMismatch);
        }
        let state = FullState {
            amplitudes,
            layout,
            gpr_count: 0,
        };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn gpr_count(&self) -> u64 {
        self.gpr_count
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    /// XORs each record's payload into the payload register, conditioned on
    /// the index register.
    pub fn apply_load(&mut self, db: &PatternDatabase) -> Result<()> {
        self.check_database(db)?;
        let shift = self.layout.payload_shift();
        let index_shift = self.layout.index_shift();
        let records = db.records();
        self.xor_permute(|o| records[o >> index_shift].payload << shift);
        Ok(())
    }

    /// XORs the record feature into the feature register, conditioned on the
    /// index register.
    pub fn apply_feature_oracle(&mut self, db: &PatternDatabase, mode: FeatureMode) -> Result<()> {
        self.check_database(db)?;
        let shift = self.layout.feature_shift();
        let index_shift = self.layout.index_shift();
        let features = (0..db.len())
            .map(|i| db.feature_of(i, mode).map(FeatureValue::get))
            .collect::<Result<Vec<_>>>()?;
        self.xor_permute(|o| features[o >> index_shift] << shift);
        Ok(())
    }

    /// XORs the distance between the feature register and the query feature
    /// into the distance register.
    pub fn apply_distance_oracle(&mut self, ctx: &QueryContext) {
        let layout = self.layout;
        let (fbits, dbits) = (layout.feature_bits, layout.distance_bits);
        let fmask = mask(fbits);
        // one entry per feature register value
        let table: Vec<u64> = (0..=fmask)
            .map(|c| distance(FeatureValue(c), ctx.query_feature, fbits, dbits).get())
            .collect();
        self.xor_permute(|o| table[(o as u64 >> layout.feature_shift() & fmask) as usize]);
    }

    /// Phase flip on every basis state whose distance register is within the
    /// threshold.
    pub fn apply_mark_oracle(&mut self, ctx: &QueryContext) {
        let alpha = ctx.alpha.get();
        self.apply_phase_flip_where(|_, d| d <= alpha);
    }

    /// As [`apply_mark_oracle`](Self::apply_mark_oracle), leaving the
    /// `excluded` indices unmarked.
    pub fn apply_mark_oracle_excluding(&mut self, ctx: &QueryContext, excluded: &BTreeSet<usize>) {
        let alpha = ctx.alpha.get();
        if excluded.is_empty() {
            return self.apply_mark_oracle(ctx);
        }
        self.apply_phase_flip_where(|i, d| d <= alpha && !excluded.contains(&i));
    }

    /// Multiplies by -1 every amplitude whose `(index, distance register)`
    /// satisfies `predicate`.
    pub fn apply_phase_flip_where(&mut self, predicate: impl Fn(usize, u64) -> bool) {
        let layout = self.layout;
        let dmask = mask(layout.distance_bits);
        let index_shift = layout.index_shift();
        for (o, amp) in self.amplitudes.iter_mut().enumerate() {
            if predicate(o >> index_shift, o as u64 & dmask) {
                *amp = -*amp;
            }
        }
    }

    /// Reflection about the uniform index state, independently for each
    /// ancilla configuration.
    pub fn apply_diffusion(&mut self) {
        let stride = 1usize << self.layout.ancilla_bits();
        let n = self.layout.index_count();
        let scale = 2.0 / n as f64;
        for anc in 0..stride {
            let sum: Complex64 = (0..n).map(|i| self.amplitudes[i * stride + anc]).sum();
            let twice_mean = sum * scale;
            for i in 0..n {
                let a = &mut self.amplitudes[i * stride + anc];
                *a = twice_mean - *a;
            }
        }
    }

    /// Load, feature and distance oracles in order.
    pub fn apply_compute(&mut self, db: &PatternDatabase, ctx: &QueryContext) -> Result<()> {
        self.apply_load(db)?;
        self.apply_feature_oracle(db, ctx.mode)?;
        self.apply_distance_oracle(ctx);
        Ok(())
    }

    /// Adjoint of [`apply_compute`](Self::apply_compute). Each oracle is its
    /// own inverse so this is the same three in reverse order.
    pub fn apply_uncompute(&mut self, db: &PatternDatabase, ctx: &QueryContext) -> Result<()> {
        self.apply_distance_oracle(ctx);
        self.apply_feature_oracle(db, ctx.mode)?;
        self.apply_load(db)
    }

    /// One pattern-recognition iteration: compute, mark, uncompute, diffuse.
    pub fn apply_gpr(&mut self, db: &PatternDatabase, ctx: &QueryContext) -> Result<()> {
        self.apply_gpr_excluding(db, ctx, &BTreeSet::new())
    }

    pub fn apply_gpr_excluding(
        &mut self,
        db: &PatternDatabase,
        ctx: &QueryContext,
        excluded: &BTreeSet<usize>,
    ) -> Result<()> {
        self.apply_gpr_with(db, ctx, |s| s.apply_mark_oracle_excluding(ctx, excluded))
    }

    /// Iteration with a caller-supplied marking step, for fault injection and
    /// variant oracles.
    pub fn apply_gpr_with(
        &mut self,
        db: &PatternDatabase,
        ctx: &QueryContext,
        mark: impl FnOnce(&mut Self),
    ) -> Result<()> {
        self.check_database(db)?;
        self.check_ancilla_clean()?;
        self.apply_compute(db, ctx)?;
        mark(self);
        self.apply_uncompute(db, ctx)?;
        self.apply_diffusion();
        self.gpr_count += 1;
        Ok(())
    }

    /// Total squared weight on basis states with a nonzero ancilla.
    pub fn ancilla_weight(&self) -> f64 {
        let amask = (1usize << self.layout.ancilla_bits()) - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(o, _)| o & amask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Largest amplitude magnitude on a basis state with a nonzero ancilla.
    pub fn max_ancilla_amplitude(&self) -> f64 {
        let amask = (1usize << self.layout.ancilla_bits()) - 1;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(o, _)| o & amask != 0)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }

    /// Probability of each index value, summed over the ancillas.
    pub fn index_marginal(&self) -> Vec<f64> {
        let stride = 1usize << self.layout.ancilla_bits();
        self.amplitudes
            .chunks_exact(stride)
            .map(|block| block.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Samples the index register with one uniform draw. The state is
    /// consumed.
    pub fn measure_index<R: Rng + ?Sized>(self, rng: &mut R) -> Result<MeasurementOutcome> {
        self.check_normalized()?;
        Ok(sample_marginal(&self.index_marginal(), rng))
    }

    fn check_ancilla_clean(&self) -> Result<()> {
        if self.max_ancilla_amplitude() > ANCILLA_TOLERANCE {
            return Err(Error::AncillaNotClean {
                leak: self.ancilla_weight(),
            });
        }
        Ok(())
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized { norm });
        }
        Ok(())
    }

    fn check_database(&self, db: &PatternDatabase) -> Result<()> {
        if RegisterLayout::for_database(db) != self.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(())
    }

    /// Applies the permutation `o -> o ^ delta(o)`. `delta` must not depend
    /// on the bits it flips, which makes the map an involution.
    fn xor_permute(&mut self, delta: impl Fn(usize) -> u64) {
        for o in 0..self.amplitudes.len() {
            let t = o ^ delta(o) as usize;
            if t > o {
                self.amplitudes.swap(o, t);
            }
        }
    }
}

/// Inverse-CDF sampling from a probability vector with a single draw.
pub(crate) fn sample_marginal<R: Rng + ?Sized>(
    marginal: &[f64],
    rng: &mut R,
) -> MeasurementOutcome {
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_support = 0;
    for (index, &p) in marginal.iter().enumerate() {
        if p > 0.0 {
            last_support = index;
        }
        acc += p;
        if draw < acc && p > 0.0 {
            return MeasurementOutcome { index, draw };
        }
    }
    // rounding left the cumulative sum just below the draw
    MeasurementOutcome {
        index: last_support,
        draw,
    }
}
