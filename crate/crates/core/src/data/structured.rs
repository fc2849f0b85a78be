use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetHeader, DATASET_VERSION};
use crate::error::{Error, Result};
use crate::oracle::{Dataset, TaskKind};
use crate::tasks::{BinaryPottsTask, ChainInstance, ChainTask, GraphInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub labels: Vec<usize>,
    pub features: Vec<Vec<f64>>,
}

/// Graph example; edges are 0-based node pairs `[k, l]` with `k < l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub labels: Vec<usize>,
    pub features: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile<R> {
    header: DatasetHeader,
    examples: Vec<R>,
}

fn read_file<R: for<'de> Deserialize<'de>>(path: &Path, expect: TaskKind) -> Result<DatasetFile<R>> {
    let text = fs::read_to_string(path)?;
    let file: DatasetFile<R> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let h = &file.header;
    if h.version != DATASET_VERSION {
        return Err(Error::VersionMismatch {
            expected: DATASET_VERSION,
            found: h.version,
        });
    }
    if h.task != expect {
        return Err(Error::TaskMismatch {
            expected: expect.to_string(),
            found: h.task.to_string(),
        });
    }
    if h.n != file.examples.len() {
        return Err(record_error(
            path,
            0,
            format!("header declares {} examples, file has {}", h.n, file.examples.len()),
        ));
    }
    Ok(file)
}

fn record_error(path: &Path, record: usize, msg: impl Into<String>) -> Error {
    Error::Corrupt {
        path: path.to_path_buf(),
        msg: format!("example {record}: {}", msg.into()),
    }
}

pub fn load_chain(path: impl AsRef<Path>) -> Result<Dataset<ChainTask>> {
    let path = path.as_ref();
    let file: DatasetFile<ChainRecord> = read_file(path, TaskKind::Chain)?;
    let k = file
        .header
        .num_labels
        .ok_or_else(|| record_error(path, 0, "chain header needs num_labels"))?;
    let task = ChainTask::new(k, file.header.feature_dim)?;
    let mut instances = Vec::with_capacity(file.examples.len());
    for (idx, r) in file.examples.into_iter().enumerate() {
        let inst = ChainInstance {
            features: r.features,
            labels: r.labels,
        };
        crate::oracle::Task::validate_instance(&task, &inst)
            .map_err(|e| record_error(path, idx, e.to_string()))?;
        instances.push(inst);
    }
    Dataset::new(task, instances)
}

pub fn load_binary_potts(path: impl AsRef<Path>) -> Result<Dataset<BinaryPottsTask>> {
    let path = path.as_ref();
    let file: DatasetFile<GraphRecord> = read_file(path, TaskKind::BinaryPotts)?;
    let task = BinaryPottsTask::new(file.header.feature_dim)?;
    let mut instances = Vec::with_capacity(file.examples.len());
    for (idx, r) in file.examples.into_iter().enumerate() {
        if let Some(e) = r.edges.iter().find(|e| e[0] >= e[1]) {
            return Err(record_error(
                path,
                idx,
                format!("edge [{}, {}] must satisfy k < l", e[0], e[1]),
            ));
        }
        let inst = GraphInstance {
            features: r.features,
            edges: r.edges.iter().map(|e| (e[0], e[1])).collect(),
            labels: r.labels,
        };
        crate::oracle::Task::validate_instance(&task, &inst)
            .map_err(|e| record_error(path, idx, e.to_string()))?;
        instances.push(inst);
    }
    Dataset::new(task, instances)
}

pub fn save_chain(data: &Dataset<ChainTask>, path: impl AsRef<Path>) -> Result<()> {
    let file = DatasetFile {
        header: DatasetHeader {
            task: TaskKind::Chain,
            version: DATASET_VERSION,
            n: data.len(),
            num_labels: Some(data.task.num_labels()),
            feature_dim: data.task.unary_dim(),
        },
        examples: data
            .instances
            .iter()
            .map(|i| ChainRecord {
                labels: i.labels.clone(),
                features: i.features.clone(),
            })
            .collect(),
    };
    fs::write(path, serde_json::to_string(&file)? + "\n")?;
    Ok(())
}

pub fn save_binary_potts(data: &Dataset<BinaryPottsTask>, path: impl AsRef<Path>) -> Result<()> {
    let file = DatasetFile {
        header: DatasetHeader {
            task: TaskKind::BinaryPotts,
            version: DATASET_VERSION,
            n: data.len(),
            num_labels: None,
            feature_dim: data.task.unary_dim(),
        },
        examples: data
            .instances
            .iter()
            .map(|i| GraphRecord {
                labels: i.labels.clone(),
                features: i.features.clone(),
                edges: i
                    .edges
                    .iter()
                    .map(|&(k, l)| [k.min(l), k.max(l)])
                    .collect(),
            })
            .collect(),
    };
    fs::write(path, serde_json::to_string(&file)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn chain_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.json",
            r#"{"header":{"task":"chain","version":1,"n":1,"num_labels":2,"feature_dim":1},
               "examples":[{"labels":[0,1],"features":[[1.0]]}]}"#,
        );
        assert!(matches!(load_chain(&p), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn graph_self_loop() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "g.json",
            r#"{"header":{"task":"binary-potts","version":1,"n":1,"feature_dim":1},
               "examples":[{"labels":[0,1],"features":[[1.0],[2.0]],"edges":[[1,1]]}]}"#,
        );
        assert!(matches!(load_binary_potts(&p), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn header_checks() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "v.json",
            r#"{"header":{"task":"chain","version":2,"n":0,"num_labels":2,"feature_dim":1},"examples":[]}"#,
        );
        assert!(matches!(load_chain(&p), Err(Error::VersionMismatch { .. })));
        let p = write(
            &dir,
            "t.json",
            r#"{"header":{"task":"chain","version":1,"n":0,"num_labels":2,"feature_dim":1},"examples":[]}"#,
        );
        assert!(matches!(load_binary_potts(&p), Err(Error::TaskMismatch { .. })));
        let p = write(&dir, "bad.json", "{\n\"header\": [}");
        assert!(matches!(load_chain(&p), Err(Error::Parse { line: 2, .. })));
        let p = write(
            &dir,
            "dim.json",
            r#"{"header":{"task":"chain","version":1,"n":1,"num_labels":2,"feature_dim":2},
               "examples":[{"labels":[0],"features":[[1.0]]}]}"#,
        );
        assert!(load_chain(&p).is_err());
    }
}
