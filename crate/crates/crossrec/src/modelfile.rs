//! Versioned on-disk form of a trained model.

use std::path::Path;

use crossrec_core::corpus::Granularity;
use crossrec_core::eval::Method;
use crossrec_core::model::{Hyperparams, ModelState};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "crossrec-model";
pub const VERSION: u32 = 1;

/// Everything needed to rebuild the training view of the data and score it.
///
/// Floats are written in shortest round-trip form and parsed back exactly,
/// so saving and loading reproduces every parameter bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub method: Method,
    pub hyperparams: Hyperparams,
    pub granularity: Granularity,
    pub min_user_interactions: usize,
    pub min_item_interactions: usize,
    pub trained_intervals: u32,
    /// Row order of the user-indexed parameters.
    pub users: Vec<String>,
    /// Row order of the item factors.
    pub items: Vec<String>,
    pub new_users: Vec<String>,
    pub losses: Vec<f64>,
    pub state: ModelState,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("cannot read model {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("model {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error("model {path}: expected format `{FORMAT}` version {VERSION}, found `{format}` version {version}")]
    Version { path: String, format: String, version: u32 },
    #[error("model {path}: parameters do not match the stored user and item lists")]
    Shape { path: String },
}

impl ModelFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model state is always finite and serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, ModelFileError> {
        let p = || path.display().to_string();
        // Check the header first so an old file gets a version error, not a field error.
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text).map_err(|source| ModelFileError::Parse { path: p(), source })?;
        if header.format != FORMAT || header.version != VERSION {
            return Err(ModelFileError::Version {
                path: p(),
                format: header.format,
                version: header.version,
            });
        }
        let file: ModelFile = serde_json::from_str(text).map_err(|source| ModelFileError::Parse { path: p(), source })?;
        let s = &file.state;
        if s.num_users() != file.users.len() || s.num_items() != file.items.len() || s.existing.len() != file.users.len() {
            return Err(ModelFileError::Shape { path: p() });
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, path)
    }
}
