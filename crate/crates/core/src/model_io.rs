//! JSON model files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classify::ModelParams;
use crate::error::{Error, Result};
use crate::ssi::EnsembleModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub creation_seed: u64,
    /// Fully resolved run configuration, as `key = value` pairs.
    pub config: BTreeMap<String, String>,
    pub model: EnsembleModel,
}

impl ModelFile {
    pub fn new(model: EnsembleModel, creation_seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            creation_seed,
            config,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<()> {
        let m = &self.model;
        if m.standardizer.dim() != m.dim {
            return Err(Error::Model(format!(
                "standardizer has {} features, model has {}",
                m.standardizer.dim(),
                m.dim
            )));
        }
        for (i, d) in m.detectors.iter().enumerate() {
            let expected = d.selected_features.as_ref().map_or(m.dim, Vec::len);
            if let Some(sel) = &d.selected_features {
                if sel.iter().any(|&j| j >= m.dim) {
                    return Err(Error::Model(format!(
                        "detector {i} selects a missing feature"
                    )));
                }
            }
            if let ModelParams::Rbf {
                references,
                coefficients,
                ..
            } = &d.classifier.params
            {
                if references.len() != coefficients.len() {
                    return Err(Error::Model(format!(
                        "detector {i} has {} reference points but {} coefficients",
                        references.len(),
                        coefficients.len()
                    )));
                }
            }
            if let Some(found) = d.classifier.dim() {
                if found != expected {
                    return Err(Error::Model(format!(
                        "detector {i} expects {found} inputs, not {expected}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
