use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::TaskKind;

pub const MODEL_FORMAT: &str = "mpbcfw-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub task: TaskKind,
    pub algorithm: String,
    pub lambda: f64,
    pub seed: u64,
    pub dim: usize,
    /// Classes or labels per position; absent for binary Potts models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_labels: Option<usize>,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: Vec<f64>,
    pub meta: ModelMetadata,
}

impl Model {
    /// Errors unless the model was trained for a dataset with this header.
    pub fn check_compatible(&self, header: &super::DatasetHeader) -> Result<()> {
        if self.meta.task != header.task {
            return Err(Error::TaskMismatch {
                expected: header.task.to_string(),
                found: self.meta.task.to_string(),
            });
        }
        if self.meta.num_labels != header.num_labels || self.meta.feature_dim != header.feature_dim
        {
            return Err(Error::invalid(format!(
                "model shape (labels {:?}, features {}) does not match dataset (labels {:?}, features {})",
                self.meta.num_labels, self.meta.feature_dim, header.num_labels, header.feature_dim
            )));
        }
        Ok(())
    }
}

/// On-disk layout. `weights` holds the little-endian IEEE-754 bytes of each
/// weight, hex encoded, so values survive exactly; `weights_preview` is for
/// humans and ignored on load.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    meta: ModelMetadata,
    weights: String,
    #[serde(default)]
    weights_preview: Vec<f64>,
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    if model.weights.len() != model.meta.dim {
        return Err(Error::invalid(format!(
            "weight vector has length {}, metadata says {}",
            model.weights.len(),
            model.meta.dim
        )));
    }
    let bytes: Vec<u8> = model.weights.iter().flat_map(|w| w.to_le_bytes()).collect();
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        meta: model.meta.clone(),
        weights: hex::encode(bytes),
        weights_preview: model.weights.clone(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let corrupt = |msg: String| Error::Corrupt {
        path: path.to_path_buf(),
        msg,
    };
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    if file.format != MODEL_FORMAT {
        return Err(corrupt(format!("not a model file (format '{}')", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION,
            found: file.version,
        });
    }
    let bytes = hex::decode(&file.weights).map_err(|e| corrupt(format!("bad weight payload: {e}")))?;
    if bytes.len() != 8 * file.meta.dim {
        return Err(corrupt(format!(
            "weight payload holds {} bytes, expected {}",
            bytes.len(),
            8 * file.meta.dim
        )));
    }
    let weights: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(corrupt("non-finite weight".into()));
    }
    Ok(Model {
        weights,
        meta: file.meta,
    })
}
