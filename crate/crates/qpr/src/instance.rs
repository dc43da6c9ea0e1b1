//! JSON instance files.
//!
//! ```json
//! {"payload_bits":4,"feature_bits":4,"distance_bits":4,"alpha":0,"mode":"idealized",
//!  "patterns":[{"payload":5,"class":"target"},{"payload":3,"class":"spurious"}],
//!  "codebook":[{"feature":5}]}
//! ```
//!
//! Patterns may appear in any order; the database always places targets
//! first, then spurious records, then virtual padding.

use std::fs;
use std::path::Path;

use qpr_core::{
    Codebook, CodebookEntry, DistanceValue, FeatureMode, FeatureValue, PatternDatabase,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("constraint \"{rule}\" violated: {detail}")]
    Constraint { rule: &'static str, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    Target,
    Spurious,
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Idealized,
    Extractor,
}

impl From<ModeTag> for FeatureMode {
    fn from(tag: ModeTag) -> Self {
        match tag {
            ModeTag::Idealized => FeatureMode::Idealized,
            ModeTag::Extractor => FeatureMode::Extractor,
        }
    }
}

impl From<FeatureMode> for ModeTag {
    fn from(mode: FeatureMode) -> Self {
        match mode {
            FeatureMode::Idealized => ModeTag::Idealized,
            FeatureMode::Extractor => ModeTag::Extractor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    pub payload: u64,
    pub class: ClassTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    pub feature: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exemplar_payload: Option<u64>,
}

/// On-disk shape of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub payload_bits: u32,
    pub feature_bits: u32,
    pub distance_bits: u32,
    pub alpha: u64,
    #[serde(default = "default_mode")]
    pub mode: ModeTag,
    pub patterns: Vec<PatternSpec>,
    #[serde(default)]
    pub codebook: Vec<CodebookSpec>,
}

fn default_mode() -> ModeTag {
    ModeTag::Idealized
}

/// A validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub database: PatternDatabase,
    pub codebook: Codebook,
    pub alpha: DistanceValue,
    pub mode: FeatureMode,
    /// Hex SHA-256 of the canonical JSON form.
    pub digest: String,
}

impl Instance {
    pub fn from_file(file: &InstanceFile) -> Result<Self, InstanceError> {
        if let Some(k) = file
            .patterns
            .iter()
            .position(|p| p.class == ClassTag::Virtual)
        {
            return Err(InstanceError::Constraint {
                rule: "no virtual patterns in input",
                detail: format!("pattern {k} is virtual; padding is added automatically"),
            });
        }
        let targets: Vec<u64> = file
            .patterns
            .iter()
            .filter(|p| p.class == ClassTag::Target)
            .map(|p| p.payload)
            .collect();
        let spurious: Vec<u64> = file
            .patterns
            .iter()
            .filter(|p| p.class == ClassTag::Spurious)
            .map(|p| p.payload)
            .collect();
        if let Some(k) = file.patterns.iter().position(|p| {
            (1..=32).contains(&file.payload_bits) && p.payload >= 1u64 << file.payload_bits
        }) {
            return Err(InstanceError::Constraint {
                rule: "payload < 2^payload_bits",
                detail: format!(
                    "pattern {k} has payload {} but payload_bits is {}",
                    file.patterns[k].payload, file.payload_bits
                ),
            });
        }
        let database = PatternDatabase::build(
            &targets,
            &spurious,
            file.payload_bits,
            file.feature_bits,
            file.distance_bits,
        )
        .map_err(|e| constraint(&e))?;

        let alpha = DistanceValue(file.alpha);
        database.check_alpha(alpha).map_err(|e| constraint(&e))?;

        let entries = file
            .codebook
            .iter()
            .map(|c| CodebookEntry {
                exemplar_payload: c.exemplar_payload,
                feature: FeatureValue(c.feature),
            })
            .collect();
        let codebook = Codebook::new(entries, file.feature_bits).map_err(|e| constraint(&e))?;

        let canonical = serde_json::to_vec(file).expect("instance serializes");
        Ok(Instance {
            database,
            codebook,
            alpha,
            mode: file.mode.into(),
            digest: hex::encode(Sha256::digest(&canonical)),
        })
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_file(&file)
    }
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Instance::parse(&text)
}

/// Names the violated rule for a core validation error.
pub fn constraint(err: &qpr_core::Error) -> InstanceError {
    use qpr_core::Error as E;
    let rule = match err {
        E::EmptyInput => "at least one pattern",
        E::PayloadOverflow { .. } => "payload < 2^payload_bits",
        E::BitWidth { .. } => "register width in range",
        E::AlphaTooLarge { .. } => "alpha < d_max",
        E::SentinelFeature { .. } => "codebook feature is not a sentinel",
        E::FeatureOutOfRange { .. } => "feature < 2^feature_bits",
        _ => "instance invariant",
    };
    InstanceError::Constraint {
        rule,
        detail: err.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const WORKED: &str = r#"{"payload_bits":4,"feature_bits":4,"distance_bits":4,"alpha":0,"mode":"idealized","patterns":[{"payload":5,"class":"target"},{"payload":9,"class":"target"},{"payload":12,"class":"target"},{"payload":3,"class":"spurious"},{"payload":6,"class":"spurious"},{"payload":14,"class":"spurious"}],"codebook":[{"feature":5},{"feature":12}]}"#;

    fn rule_of(text: &str) -> &'static str {
        match Instance::parse(text) {
            Err(InstanceError::Constraint { rule, .. }) => rule,
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn worked_instance() {
        let inst = Instance::parse(WORKED).unwrap();
        let db = &inst.database;
        assert_eq!(db.len(), 8);
        assert_eq!(
            (db.target_count(), db.spurious_count(), db.virtual_count()),
            (3, 3, 2)
        );
        assert_eq!(inst.codebook.len(), 2);
        assert_eq!(inst.mode, FeatureMode::Idealized);
        assert_eq!(inst.digest.len(), 64);
    }

    #[test]
    fn alpha_at_d_max_rejected() {
        let text = WORKED.replace("\"alpha\":0", "\"alpha\":15");
        assert_eq!(rule_of(&text), "alpha < d_max");
    }

    #[test]
    fn payload_overflow_rejected() {
        let text = WORKED.replace("\"payload\":9", "\"payload\":99");
        let err = Instance::parse(&text).unwrap_err();
        assert!(
            err.to_string().contains("pattern 1 has payload 99"),
            "{err}"
        );
        assert_eq!(rule_of(&text), "payload < 2^payload_bits");
    }

    #[test]
    fn sentinel_codebook_rejected() {
        let text = WORKED.replace("{\"feature\":12}", "{\"feature\":14}");
        assert_eq!(rule_of(&text), "codebook feature is not a sentinel");
    }

    #[test]
    fn parse_error_has_position() {
        let text = "{\n  \"payload_bits\": 4,\n  \"feature_bits\": \"four\"\n}";
        match Instance::parse(text) {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Instance::parse(&WORKED.replace("\"mode\"", "\"colour\"")),
            Err(InstanceError::Parse { .. })
        ));
    }

    #[test]
    fn digest_ignores_formatting() {
        let pretty: serde_json::Value = serde_json::from_str(WORKED).unwrap();
        let pretty = serde_json::to_string_pretty(&pretty).unwrap();
        assert_eq!(
            Instance::parse(&pretty).unwrap().digest,
            Instance::parse(WORKED).unwrap().digest
        );
        let other = WORKED.replace("\"alpha\":0", "\"alpha\":1");
        assert_ne!(
            Instance::parse(&other).unwrap().digest,
            Instance::parse(WORKED).unwrap().digest
        );
    }
}
