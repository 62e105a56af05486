//! Versioned JSON model files.
//!
//! ```text
//! { "format_version": 1, "checksum": "<sha256 hex>", "payload": { ... } }
//! ```
//!
//! The checksum covers the compact serialization of `payload` with object
//! keys in sorted order. Files of any other version are rejected before the
//! payload is interpreted.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::TimeBinning;
use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::models::{Classifier, ModelKind};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binning: Option<TimeBinning>,
    pub vocabulary: Vocabulary,
    pub model: Classifier,
    /// Free-form snapshot of the run configuration.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl ModelFile {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn to_json(&self) -> Result<String> {
        // Value objects keep sorted keys, which makes the checksum canonical.
        let payload = serde_json::to_value(self)?;
        let checksum = checksum(&payload)?;
        let envelope = serde_json::json!({
            "format_version": FORMAT_VERSION,
            "checksum": checksum,
            "payload": payload,
        });
        Ok(serde_json::to_string(&envelope)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut envelope: serde_json::Value = serde_json::from_str(text)?;
        let version = envelope
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::ModelFile("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelVersion { found: version, supported: FORMAT_VERSION });
        }
        let stored = envelope
            .get("checksum")
            .and_then(serde_json::Value::as_str)
            .ok_or_else(|| Error::ModelFile("missing checksum".into()))?
            .to_string();
        let payload = envelope
            .get_mut("payload")
            .map(serde_json::Value::take)
            .ok_or_else(|| Error::ModelFile("missing payload".into()))?;
        let actual = checksum(&payload)?;
        if actual != stored {
            return Err(Error::ModelFile(format!("checksum mismatch: stored {stored}, computed {actual}")));
        }
        let file: ModelFile = serde_json::from_value(payload)?;
        if file.labels.len() != file.model.n_classes() {
            return Err(Error::ModelFile(format!(
                "{} labels for a {}-class model",
                file.labels.len(),
                file.model.n_classes()
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn checksum(payload: &serde_json::Value) -> Result<String> {
    let canonical = serde_json::to_string(payload)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}
