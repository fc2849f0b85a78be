use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracle::Dataset;
use crate::tasks::{MulticlassInstance, MulticlassTask};

pub fn load_multiclass(path: impl AsRef<Path>) -> Result<Dataset<MulticlassTask>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_multiclass(&text, path)
}

/// Parses the sparse text format; `path` is only used in error messages.
pub fn parse_multiclass(text: &str, path: &Path) -> Result<Dataset<MulticlassTask>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (num_classes, dim) = match fields.as_slice() {
        ["#multiclass", k, d] => {
            let k: usize = k.parse().map_err(|_| err(1, format!("bad class count '{k}'")))?;
            let d: usize = d.parse().map_err(|_| err(1, format!("bad dimension '{d}'")))?;
            (k, d)
        }
        _ => return Err(err(1, "expected header '#multiclass K d'".into())),
    };
    let task = MulticlassTask::new(num_classes, dim).map_err(|e| err(1, e.to_string()))?;

    let mut instances = Vec::new();
    for (lineno, line) in lines {
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else {
            continue;
        };
        let label: usize = label
            .parse()
            .map_err(|_| err(lineno, format!("bad label '{label}'")))?;
        if label >= num_classes {
            return Err(err(
                lineno,
                format!("label {label} out of range for {num_classes} classes"),
            ));
        }
        let mut features = vec![0.0; dim];
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(lineno, format!("expected idx:val, got '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(lineno, format!("bad feature index '{idx}'")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| err(lineno, format!("bad feature value '{val}'")))?;
            if idx == 0 || idx > dim {
                return Err(err(lineno, format!("feature index {idx} outside 1..={dim}")));
            }
            if idx <= last {
                return Err(err(
                    lineno,
                    format!("feature indices must be strictly increasing ({idx} after {last})"),
                ));
            }
            if !val.is_finite() {
                return Err(err(lineno, format!("non-finite feature value '{val}'")));
            }
            features[idx - 1] = val;
            last = idx;
        }
        instances.push(MulticlassInstance { features, label });
    }
    if instances.is_empty() {
        return Err(err(1, "no examples".into()));
    }
    Dataset::new(task, instances)
}

pub fn write_multiclass(data: &Dataset<MulticlassTask>) -> String {
    let mut out = format!(
        "#multiclass {} {}\n",
        data.task.num_classes(),
        data.task.base_dim()
    );
    for inst in &data.instances {
        write!(out, "{}", inst.label).unwrap();
        for (j, v) in inst.features.iter().enumerate() {
            // Positive zero is implicit; everything else, -0.0 included, is written.
            if v.to_bits() != 0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_multiclass(data: &Dataset<MulticlassTask>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_multiclass(data))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset<MulticlassTask>> {
        parse_multiclass(text, Path::new("test.mc"))
    }

    fn parse_line(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn minimal_file() {
        let d = parse("#multiclass 2 3\n0 1:1.0\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.instances[0].features, vec![1.0, 0.0, 0.0]);
        assert_eq!(d.instances[0].label, 0);
    }

    #[test]
    fn rejects_unsorted_and_duplicate_indices() {
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 2:1 1:1\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 1:1\n1 2:1 2:3\n").unwrap_err()), 3);
    }

    #[test]
    fn rejects_bad_records() {
        assert_eq!(parse_line(parse("#multiclass 2 3\n2 1:1\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 4:1\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 0:1\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 1:x\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multiclass 2 3\n0 1:nan\n").unwrap_err()), 2);
        assert_eq!(parse_line(parse("#multi 2 3\n0 1:1\n").unwrap_err()), 1);
        assert_eq!(parse_line(parse("#multiclass 1 3\n0 1:1\n").unwrap_err()), 1);
        assert_eq!(parse_line(parse("#multiclass 2 3\n").unwrap_err()), 1);
    }

    #[test]
    fn blank_lines_and_negative_zero() {
        let d = parse("#multiclass 3 2\n\n1 2:-0\n2\n").unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.instances[0].features[1].is_sign_negative());
        let again = parse(&write_multiclass(&d)).unwrap();
        assert_eq!(again.instances[0].features[1].to_bits(), (-0.0f64).to_bits());
    }
}
