//! Dataset files, synthetic generators and model persistence.
//!
//! Multiclass data is a sparse text format:
//!
//! ```text
//! #multiclass K d
//! label idx:val idx:val ...
//! ```
//!
//! with 1-based, strictly increasing feature indices. Chain and graph data
//! are single JSON documents with a `header` object and an `examples` array
//! (see [`ChainRecord`] and [`GraphRecord`]).

mod generate;
mod model;
mod multiclass;
mod structured;

pub use generate::{
    binary_potts_grid, chain, default_separation, generate, grid_edges, multiclass, simplex_vertex, GenParams,
};
pub use model::{load_model, save_model, Model, ModelMetadata, MODEL_FORMAT, MODEL_VERSION};
pub use multiclass::{load_multiclass, parse_multiclass, save_multiclass, write_multiclass};
pub use structured::{
    load_binary_potts, load_chain, save_binary_potts, save_chain, ChainRecord, GraphRecord,
};

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Dataset, TaskKind};
use crate::tasks::{BinaryPottsTask, ChainTask, MulticlassTask};

pub const DATASET_VERSION: u32 = 1;

/// Header of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub task: TaskKind,
    pub version: u32,
    pub n: usize,
    /// Number of classes / labels; absent for binary Potts data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_labels: Option<usize>,
    /// Dimension of the per-example (multiclass) or per-part feature vectors.
    pub feature_dim: usize,
}

/// A dataset of any built-in task.
#[derive(Debug, Clone)]
pub enum AnyDataset {
    Multiclass(Dataset<MulticlassTask>),
    Chain(Dataset<ChainTask>),
    BinaryPotts(Dataset<BinaryPottsTask>),
}

impl AnyDataset {
    pub fn kind(&self) -> TaskKind {
        match self {
            AnyDataset::Multiclass(_) => TaskKind::Multiclass,
            AnyDataset::Chain(_) => TaskKind::Chain,
            AnyDataset::BinaryPotts(_) => TaskKind::BinaryPotts,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyDataset::Multiclass(d) => d.len(),
            AnyDataset::Chain(d) => d.len(),
            AnyDataset::BinaryPotts(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyDataset::Multiclass(d) => d.dim(),
            AnyDataset::Chain(d) => d.dim(),
            AnyDataset::BinaryPotts(d) => d.dim(),
        }
    }

    pub fn header(&self) -> DatasetHeader {
        let (num_labels, feature_dim) = match self {
            AnyDataset::Multiclass(d) => (Some(d.task.num_classes()), d.task.base_dim()),
            AnyDataset::Chain(d) => (Some(d.task.num_labels()), d.task.unary_dim()),
            AnyDataset::BinaryPotts(d) => (None, d.task.unary_dim()),
        };
        DatasetHeader {
            task: self.kind(),
            version: DATASET_VERSION,
            n: self.len(),
            num_labels,
            feature_dim,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        match self {
            AnyDataset::Multiclass(d) => save_multiclass(d, path),
            AnyDataset::Chain(d) => save_chain(d, path),
            AnyDataset::BinaryPotts(d) => save_binary_potts(d, path),
        }
    }
}

/// Loads a dataset file. Without an explicit kind the format is detected
/// from the file contents.
pub fn load_dataset(path: impl AsRef<Path>, kind: Option<TaskKind>) -> Result<AnyDataset> {
    let path = path.as_ref();
    let kind = match kind {
        Some(k) => k,
        None => sniff_kind(path)?,
    };
    Ok(match kind {
        TaskKind::Multiclass => AnyDataset::Multiclass(load_multiclass(path)?),
        TaskKind::Chain => AnyDataset::Chain(load_chain(path)?),
        TaskKind::BinaryPotts => AnyDataset::BinaryPotts(load_binary_potts(path)?),
    })
}

fn sniff_kind(path: &Path) -> Result<TaskKind> {
    let text = fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with("#multiclass") {
        return Ok(TaskKind::Multiclass);
    }
    #[derive(Deserialize)]
    struct Probe {
        header: DatasetHeader,
    }
    match serde_json::from_str::<Probe>(trimmed) {
        Ok(p) => Ok(p.header.task),
        Err(e) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: format!("unrecognized dataset format: {e}"),
        }),
    }
}
