//! Classical model of the pattern database, feature map and similarity
//! measure, plus the linear-scan marked-set oracle every quantum path is
//! checked against.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Widest register the classical model accepts.
pub const MAX_REGISTER_BITS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternClass {
    Target,
    Spurious,
    Virtual,
}

impl PatternClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternClass::Target => "target",
            PatternClass::Spurious => "spurious",
            PatternClass::Virtual => "virtual",
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How records are mapped to features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FeatureMode {
    /// Spurious records are known and carry the spurious sentinel.
    #[default]
    Idealized,
    /// Spurious records go through the extractor like targets.
    Extractor,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Idealized => "idealized",
            FeatureMode::Extractor => "extractor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureValue(pub u64);

impl FeatureValue {
    pub fn get(self) -> u64 {
        self.0
    }

    /// Code reserved for spurious records: `2^bits - 1`.
    pub fn spurious_sentinel(feature_bits: u32) -> Self {
        FeatureValue(mask(feature_bits))
    }

    /// Code reserved for virtual padding: `2^bits - 2`.
    pub fn virtual_sentinel(feature_bits: u32) -> Self {
        FeatureValue(mask(feature_bits) - 1)
    }

    /// Largest value an extractor may produce.
    pub fn max_extracted(feature_bits: u32) -> u64 {
        mask(feature_bits) - 2
    }

    pub fn is_sentinel(self, feature_bits: u32) -> bool {
        self.0 >= mask(feature_bits) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistanceValue(pub u64);

impl DistanceValue {
    pub fn get(self) -> u64 {
        self.0
    }

    pub fn max(distance_bits: u32) -> Self {
        DistanceValue(mask(distance_bits))
    }
}

/// Maps a payload to a feature code. Outputs above
/// [`FeatureValue::max_extracted`] are saturated by the database so the two
/// sentinel codes are never produced.
pub trait FeatureExtractor {
    fn extract(&self, payload: u64) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityExtractor;

impl FeatureExtractor for IdentityExtractor {
    fn extract(&self, payload: u64) -> u64 {
        payload
    }
}

impl<F: Fn(u64) -> u64> FeatureExtractor for F {
    fn extract(&self, payload: u64) -> u64 {
        self(payload)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternRecord {
    pub index: usize,
    pub payload: u64,
    pub class: PatternClass,
}

/// The padded record set. Records are ordered targets, spurious, virtual and
/// the length is a power of two no smaller than 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDatabase {
    records: Vec<PatternRecord>,
    // extractor output per record, already saturated
    extracted: Vec<u64>,
    targets: usize,
    spurious: usize,
    payload_bits: u32,
    feature_bits: u32,
    distance_bits: u32,
}

impl PatternDatabase {
    /// Builds the database with the identity extractor.
    pub fn build(
        targets: &[u64],
        spurious: &[u64],
        payload_bits: u32,
        feature_bits: u32,
        distance_bits: u32,
    ) -> Result<Self> {
        Self::build_with(
            targets,
            spurious,
            payload_bits,
            feature_bits,
            distance_bits,
            &IdentityExtractor,
        )
    }

    pub fn build_with<E: FeatureExtractor + ?Sized>(
        targets: &[u64],
        spurious: &[u64],
        payload_bits: u32,
        feature_bits: u32,
        distance_bits: u32,
        extractor: &E,
    ) -> Result<Self> {
        check_width("payload", payload_bits, 1)?;
        check_width("feature", feature_bits, 2)?;
        check_width("distance", distance_bits, 1)?;
        let real = targets.len() + spurious.len();
        if real == 0 {
            return Err(Error::EmptyInput);
        }
        let limit = mask(payload_bits);
        for (position, &payload) in targets.iter().chain(spurious).enumerate() {
            if payload > limit {
                return Err(Error::PayloadOverflow {
                    position,
                    payload,
                    bits: payload_bits,
                });
            }
        }

        let len = real.next_power_of_two().max(2);
        let classes = core::iter::repeat_n(PatternClass::Target, targets.len())
            .chain(core::iter::repeat_n(PatternClass::Spurious, spurious.len()))
            .chain(core::iter::repeat_n(PatternClass::Virtual, len - real));
        let payloads = targets
            .iter()
            .chain(spurious)
            .copied()
            .chain(core::iter::repeat(0));
        let records: Vec<PatternRecord> = classes
            .zip(payloads)
            .enumerate()
            .map(|(index, (class, payload))| PatternRecord {
                index,
                payload,
                class,
            })
            .collect();

        let ceiling = FeatureValue::max_extracted(feature_bits);
        let extracted = records
            .iter()
            .map(|r| extractor.extract(r.payload).min(ceiling))
            .collect();

        Ok(PatternDatabase {
            records,
            extracted,
            targets: targets.len(),
            spurious: spurious.len(),
            payload_bits,
            feature_bits,
            distance_bits,
        })
    }

    /// Total record count `N`, always a power of two.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn records(&self) -> &[PatternRecord] {
        &self.records
    }

    pub fn record(&self, index: usize) -> Result<&PatternRecord> {
        self.records.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.len(),
        })
    }

    pub fn target_count(&self) -> usize {
        self.targets
    }

    pub fn spurious_count(&self) -> usize {
        self.spurious
    }

    pub fn virtual_count(&self) -> usize {
        self.len() - self.targets - self.spurious
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn feature_bits(&self) -> u32 {
        self.feature_bits
    }

    pub fn distance_bits(&self) -> u32 {
        self.distance_bits
    }

    /// `log2(N)`.
    pub fn index_bits(&self) -> u32 {
        self.len().trailing_zeros()
    }

    pub fn d_max(&self) -> DistanceValue {
        DistanceValue::max(self.distance_bits)
    }

    /// The feature map `g`.
    pub fn feature_of(&self, index: usize, mode: FeatureMode) -> Result<FeatureValue> {
        let record = self.record(index)?;
        Ok(match (record.class, mode) {
            (PatternClass::Virtual, _) => FeatureValue::virtual_sentinel(self.feature_bits),
            (PatternClass::Spurious, FeatureMode::Idealized) => {
                FeatureValue::spurious_sentinel(self.feature_bits)
            }
            _ => FeatureValue(self.extracted[index]),
        })
    }

    pub fn distance(&self, a: FeatureValue, b: FeatureValue) -> DistanceValue {
        distance(a, b, self.feature_bits, self.distance_bits)
    }

    /// Checks that `feature` is a valid, non-sentinel query feature.
    pub fn check_query_feature(&self, feature: FeatureValue) -> Result<()> {
        if feature.0 > mask(self.feature_bits) {
            return Err(Error::FeatureOutOfRange {
                feature: feature.0,
                bits: self.feature_bits,
            });
        }
        if feature.is_sentinel(self.feature_bits) {
            return Err(Error::SentinelFeature { feature: feature.0 });
        }
        Ok(())
    }

    pub fn check_alpha(&self, alpha: DistanceValue) -> Result<()> {
        let d_max = self.d_max();
        if alpha >= d_max {
            return Err(Error::AlphaTooLarge {
                alpha: alpha.0,
                d_max: d_max.0,
            });
        }
        Ok(())
    }

    /// Linear-scan oracle: every index whose feature lies within `alpha` of
    /// `query`.
    pub fn marked_set(
        &self,
        query: FeatureValue,
        alpha: DistanceValue,
        mode: FeatureMode,
    ) -> Result<BTreeSet<usize>> {
        self.check_alpha(alpha)?;
        self.check_query_feature(query)?;
        let mut marked = BTreeSet::new();
        for index in 0..self.len() {
            let feature = self.feature_of(index, mode)?;
            if self.distance(feature, query) <= alpha {
                marked.insert(index);
            }
        }
        Ok(marked)
    }
}

/// Saturated absolute difference. Either operand being a sentinel yields
/// `d_max`.
pub fn distance(
    a: FeatureValue,
    b: FeatureValue,
    feature_bits: u32,
    distance_bits: u32,
) -> DistanceValue {
    let d_max = mask(distance_bits);
    if a.is_sentinel(feature_bits) || b.is_sentinel(feature_bits) {
        return DistanceValue(d_max);
    }
    DistanceValue(a.0.abs_diff(b.0).min(d_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookEntry {
    pub exemplar_payload: Option<u64>,
    pub feature: FeatureValue,
}

/// Stored sample features of known target patterns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Codebook {
    entries: Vec<CodebookEntry>,
}

impl Codebook {
    pub fn new(entries: Vec<CodebookEntry>, feature_bits: u32) -> Result<Self> {
        check_width("feature", feature_bits, 2)?;
        for entry in &entries {
            let feature = entry.feature;
            if feature.0 > mask(feature_bits) {
                return Err(Error::FeatureOutOfRange {
                    feature: feature.0,
                    bits: feature_bits,
                });
            }
            if feature.is_sentinel(feature_bits) {
                return Err(Error::SentinelFeature { feature: feature.0 });
            }
        }
        Ok(Codebook { entries })
    }

    pub fn from_features(features: &[u64], feature_bits: u32) -> Result<Self> {
        let entries = features
            .iter()
            .map(|&f| CodebookEntry {
                exemplar_payload: None,
                feature: FeatureValue(f),
            })
            .collect();
        Self::new(entries, feature_bits)
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn check_width(register: &'static str, bits: u32, min: u32) -> Result<()> {
    if bits < min || bits > MAX_REGISTER_BITS {
        return Err(Error::BitWidth {
            register,
            bits,
            min,
            max: MAX_REGISTER_BITS,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked() -> PatternDatabase {
        PatternDatabase::build(&[5, 9, 12], &[3, 6, 14], 4, 4, 4).unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn build_pads_to_power_of_two() {
        let db = worked();
        assert_eq!(db.len(), 8);
        assert_eq!(
            (db.target_count(), db.spurious_count(), db.virtual_count()),
            (3, 3, 2)
        );
        let classes: Vec<_> = db.records().iter().map(|r| r.class).collect();
        use PatternClass::*;
        assert_eq!(
            classes,
            [Target, Target, Target, Spurious, Spurious, Spurious, Virtual, Virtual]
        );
        assert!(db.records().iter().enumerate().all(|(k, r)| r.index == k));
        assert_eq!(db.records()[6].payload, 0);
        assert_eq!(db.records()[7].payload, 0);
    }

    #[test]
    fn build_minimum_two_records() {
        let db = PatternDatabase::build(&[7], &[], 4, 4, 4).unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.virtual_count(), 1);
        assert_eq!(db.index_bits(), 1);
    }

    #[test]
    fn build_exact_power_needs_no_padding() {
        let db = PatternDatabase::build(&[5, 9, 12, 2], &[3, 6, 14, 8], 4, 4, 4).unwrap();
        assert_eq!(db.len(), 8);
        assert_eq!(db.virtual_count(), 0);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            PatternDatabase::build(&[], &[], 4, 4, 4),
            Err(Error::EmptyInput)
        );
        assert_eq!(
            PatternDatabase::build(&[1], &[2, 99], 4, 4, 4),
            Err(Error::PayloadOverflow {
                position: 2,
                payload: 99,
                bits: 4
            })
        );
        assert!(matches!(
            PatternDatabase::build(&[1], &[], 4, 1, 4),
            Err(Error::BitWidth {
                register: "feature",
                ..
            })
        ));
    }

    #[test]
    fn feature_map_examples() {
        let db = worked();
        assert_eq!(
            db.feature_of(0, FeatureMode::Idealized),
            Ok(FeatureValue(5))
        );
        assert_eq!(
            db.feature_of(3, FeatureMode::Idealized),
            Ok(FeatureValue(15))
        );
        assert_eq!(
            db.feature_of(6, FeatureMode::Idealized),
            Ok(FeatureValue(14))
        );
        assert_eq!(
            db.feature_of(3, FeatureMode::Extractor),
            Ok(FeatureValue(3))
        );
        assert_eq!(
            db.feature_of(7, FeatureMode::Extractor),
            Ok(FeatureValue(14))
        );
        assert_eq!(
            db.feature_of(8, FeatureMode::Idealized),
            Err(Error::IndexOutOfRange { index: 8, len: 8 })
        );
    }

    #[test]
    fn identity_extractor_saturates_below_sentinels() {
        // payload 14 and 15 would collide with the sentinels
        let db = PatternDatabase::build(&[14, 15, 13], &[], 4, 4, 4).unwrap();
        for i in 0..3 {
            assert_eq!(
                db.feature_of(i, FeatureMode::Idealized),
                Ok(FeatureValue(13))
            );
        }
    }

    #[test]
    fn custom_extractor_is_saturated() {
        let db = PatternDatabase::build_with(&[1, 2], &[3], 4, 4, 4, &|p: u64| p * 100).unwrap();
        assert_eq!(
            db.feature_of(0, FeatureMode::Extractor),
            Ok(FeatureValue(13))
        );
        let db = PatternDatabase::build_with(&[1, 2], &[3], 4, 4, 4, &|p: u64| p + 1).unwrap();
        assert_eq!(
            db.feature_of(1, FeatureMode::Extractor),
            Ok(FeatureValue(3))
        );
        assert_eq!(
            db.feature_of(2, FeatureMode::Extractor),
            Ok(FeatureValue(4))
        );
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            distance(FeatureValue(5), FeatureValue(5), 4, 4),
            DistanceValue(0)
        );
        assert_eq!(
            distance(FeatureValue(3), FeatureValue(7), 4, 4),
            DistanceValue(4)
        );
        assert_eq!(
            distance(FeatureValue(15), FeatureValue(5), 4, 4),
            DistanceValue(15)
        );
        assert_eq!(
            distance(FeatureValue(5), FeatureValue(14), 4, 4),
            DistanceValue(15)
        );
        // saturation at d_max when distance register is narrow
        assert_eq!(
            distance(FeatureValue(0), FeatureValue(13), 4, 2),
            DistanceValue(3)
        );
    }

    #[test]
    fn distance_symmetric_exhaustive() {
        for bits in 2..=8u32 {
            for dbits in [1, 3, bits] {
                let top = 1u64 << bits;
                for a in 0..top {
                    for b in 0..top {
                        let (fa, fb) = (FeatureValue(a), FeatureValue(b));
                        assert_eq!(distance(fa, fb, bits, dbits), distance(fb, fa, bits, dbits));
                    }
                }
            }
        }
    }

    #[test]
    fn marked_set_examples() {
        let db = worked();
        let mode = FeatureMode::Idealized;
        assert_eq!(
            db.marked_set(FeatureValue(5), DistanceValue(0), mode),
            Ok(set(&[0]))
        );
        assert_eq!(
            db.marked_set(FeatureValue(5), DistanceValue(4), mode),
            Ok(set(&[0, 1]))
        );
        assert_eq!(
            db.marked_set(FeatureValue(2), DistanceValue(0), mode),
            Ok(set(&[]))
        );
        assert_eq!(
            db.marked_set(FeatureValue(5), DistanceValue(15), mode),
            Err(Error::AlphaTooLarge {
                alpha: 15,
                d_max: 15
            })
        );
        // extractor mode sees the spurious payloads
        assert_eq!(
            db.marked_set(FeatureValue(5), DistanceValue(1), FeatureMode::Extractor),
            Ok(set(&[0, 4]))
        );
    }

    #[test]
    fn codebook_rejects_sentinels() {
        assert!(Codebook::from_features(&[5, 12], 4).is_ok());
        assert_eq!(
            Codebook::from_features(&[14], 4),
            Err(Error::SentinelFeature { feature: 14 })
        );
        assert_eq!(
            Codebook::from_features(&[16], 4),
            Err(Error::FeatureOutOfRange {
                feature: 16,
                bits: 4
            })
        );
    }

    fn arb_db() -> impl Strategy<Value = (PatternDatabase, u32)> {
        (2u32..=6, 1u32..=6).prop_flat_map(|(fbits, dbits)| {
            let pmax = (1u64 << 6) - 1;
            (
                proptest::collection::vec(0..=pmax, 0..12),
                proptest::collection::vec(0..=pmax, 0..12),
            )
                .prop_filter("non-empty", |(t, s)| !t.is_empty() || !s.is_empty())
                .prop_map(move |(t, s)| {
                    (
                        PatternDatabase::build(&t, &s, 6, fbits, dbits).unwrap(),
                        fbits,
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn feature_map_respects_classes((db, fbits) in arb_db()) {
            for mode in [FeatureMode::Idealized, FeatureMode::Extractor] {
                for r in db.records() {
                    let f = db.feature_of(r.index, mode).unwrap();
                    match r.class {
                        PatternClass::Target => prop_assert!(!f.is_sentinel(fbits)),
                        PatternClass::Virtual => prop_assert_eq!(f, FeatureValue::virtual_sentinel(fbits)),
                        PatternClass::Spurious => if mode == FeatureMode::Idealized {
                            prop_assert_eq!(f, FeatureValue::spurious_sentinel(fbits));
                        } else {
                            prop_assert!(!f.is_sentinel(fbits));
                        },
                    }
                }
            }
        }

        #[test]
        fn marked_set_excludes_sentinels_and_is_monotone(
            (db, fbits) in arb_db(), q in 0u64..64, a in 0u64..64, b in 0u64..64,
        ) {
            let q = FeatureValue(q % (FeatureValue::max_extracted(fbits) + 1));
            let d_max = db.d_max().get();
            let (lo, hi) = (a.min(b) % d_max, a.max(b) % d_max);
            let (lo, hi) = (DistanceValue(lo.min(hi)), DistanceValue(lo.max(hi)));
            for mode in [FeatureMode::Idealized, FeatureMode::Extractor] {
                let small = db.marked_set(q, lo, mode).unwrap();
                let large = db.marked_set(q, hi, mode).unwrap();
                prop_assert!(small.is_subset(&large));
                for &i in &large {
                    let class = db.records()[i].class;
                    prop_assert!(class != PatternClass::Virtual);
                    if mode == FeatureMode::Idealized {
                        prop_assert_eq!(class, PatternClass::Target);
                    }
                }
            }
        }
    }

    #[test]
    fn mask_edges() {
        assert_eq!(mask(4), 15);
        assert_eq!(mask(64), u64::MAX);
        assert_eq!(mask(1), 1);
    }
}
