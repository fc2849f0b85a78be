//! Built-in task families: multiclass, chain labeling, binary Potts segmentation.
//!
//! All three share the block joint feature map: the feature vector of a
//! part labeled `k` is written into block `k` of the weight vector.

mod chain;
mod multiclass;
mod potts;

pub use chain::{ChainInstance, ChainTask};
pub use multiclass::{MulticlassInstance, MulticlassTask};
pub use potts::{BinaryPottsTask, GraphInstance};

use crate::error::{Error, Result};

/// Normalized Hamming loss between equal-length label sequences.
pub(crate) fn hamming(truth: &[usize], label: &[usize]) -> Result<f64> {
    if truth.len() != label.len() {
        return Err(Error::invalid(format!(
            "label length {} does not match ground-truth length {}",
            label.len(),
            truth.len()
        )));
    }
    let wrong = truth.iter().zip(label).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Adds `x` into block `k` (of width `x.len()`) of `out`.
pub(crate) fn add_block(out: &mut [f64], k: usize, x: &[f64]) {
    let width = x.len();
    for (o, v) in out[k * width..(k + 1) * width].iter_mut().zip(x) {
        *o += v;
    }
}

/// `<w_k, x>` for block `k` of `w`.
pub(crate) fn block_dot(w: &[f64], k: usize, x: &[f64]) -> f64 {
    let width = x.len();
    crate::plane::dot(&w[k * width..(k + 1) * width], x)
}

/// Index of the first maximum.
pub(crate) fn first_argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (k, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = k;
            best_value = v;
        }
    }
    best
}

/// Digits of `index` in base `radix`, most significant first.
pub(crate) fn mixed_radix(mut index: u128, radix: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut().rev() {
        *d = (index % radix as u128) as usize;
        index /= radix as u128;
    }
    digits
}

pub(crate) fn saturating_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

pub(crate) fn check_rows(rows: &[Vec<f64>], width: usize, what: &str) -> Result<()> {
    for (l, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::invalid(format!(
                "{what} {l} has {} features, expected {width}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{what} {l} has non-finite features")));
        }
    }
    Ok(())
}
