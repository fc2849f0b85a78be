//! The max-oracle contract shared by all tasks, and a brute-force reference.
//!
//! For example `i` and label `y` the oracle plane is
//! `star = (phi(x_i, y) - phi(x_i, y_i)) / n` and
//! `offset = (loss(y_i, y) + s(y) - s(y_i)) / n`, where `s` is the fixed,
//! unweighted part of the score (zero except for Potts models). The oracle
//! returns the plane maximizing `<plane, [w 1]>`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// Default cap on the number of labels the brute-force oracle will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Multiclass,
    Chain,
    BinaryPotts,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Multiclass => "multiclass",
            TaskKind::Chain => "chain",
            TaskKind::BinaryPotts => "binary-potts",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiclass" => Ok(TaskKind::Multiclass),
            "chain" => Ok(TaskKind::Chain),
            "binary-potts" => Ok(TaskKind::BinaryPotts),
            other => Err(Error::invalid(format!("unknown task kind '{other}'"))),
        }
    }
}

/// Output of one oracle call.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<L> {
    pub plane: Plane,
    pub label: L,
    /// `<plane, [w 1]>` at the query weights.
    pub value: f64,
}

/// A structured prediction task: joint feature map, loss, and exact oracle.
///
/// Implementations must be pure so that oracle calls can run concurrently
/// over shared, read-only data.
pub trait Task: Send + Sync {
    type Instance: Send + Sync;
    type Label: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn kind(&self) -> TaskKind;

    /// Model dimension `d`.
    fn dim(&self) -> usize;

    fn truth<'a>(&self, instance: &'a Self::Instance) -> &'a Self::Label;

    /// Checks that an instance is consistent with the task's dimensions.
    fn validate_instance(&self, instance: &Self::Instance) -> Result<()>;

    /// `loss(y_i, label)`, in `[0, 1]` for every built-in task.
    fn loss(&self, instance: &Self::Instance, label: &Self::Label) -> Result<f64>;

    /// Joint feature vector `phi(x, label)` and the unweighted score term `s(label)`.
    fn joint_feature(&self, instance: &Self::Instance, label: &Self::Label)
        -> Result<(Vec<f64>, f64)>;

    /// Exact loss-augmented maximizer over all labels.
    fn max_oracle(
        &self,
        instance: &Self::Instance,
        w: &[f64],
        n: usize,
    ) -> Result<OracleResult<Self::Label>>;

    /// `argmax_y <w, phi(x, y)> + s(y)`, the prediction rule.
    fn predict(&self, instance: &Self::Instance, w: &[f64]) -> Result<Self::Label>;

    /// Number of labels, saturating at `u128::MAX`.
    fn label_space_size(&self, instance: &Self::Instance) -> u128;

    /// The label at position `index` of the canonical enumeration order.
    fn label_at(&self, instance: &Self::Instance, index: u128) -> Self::Label;
}

pub(crate) fn check_query<T: Task + ?Sized>(task: &T, w: &[f64], n: usize) -> Result<()> {
    if w.len() != task.dim() {
        return Err(Error::invalid(format!(
            "weight dimension {} does not match model dimension {}",
            w.len(),
            task.dim()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("example count must be at least 1"));
    }
    Ok(())
}

/// The oracle plane of `label` for `instance`, scaled by `1/n`.
pub fn label_plane<T: Task + ?Sized>(
    task: &T,
    instance: &T::Instance,
    label: &T::Label,
    n: usize,
) -> Result<Plane> {
    let (mut star, score) = task.joint_feature(instance, label)?;
    let (truth_star, truth_score) = task.joint_feature(instance, task.truth(instance))?;
    let loss = task.loss(instance, label)?;
    let scale = 1.0 / n as f64;
    for (a, b) in star.iter_mut().zip(&truth_star) {
        *a = (*a - b) * scale;
    }
    Plane::new(star, (loss + score - truth_score) * scale)
}

/// Assembles the oracle result for an already chosen maximizer.
pub(crate) fn result_for<T: Task + ?Sized>(
    task: &T,
    instance: &T::Instance,
    label: T::Label,
    w: &[f64],
    n: usize,
) -> Result<OracleResult<T::Label>> {
    let plane = label_plane(task, instance, &label, n)?;
    let value = plane.eval(w);
    Ok(OracleResult {
        plane,
        label,
        value,
    })
}

/// Exhaustive oracle over the canonical enumeration; the first maximum wins.
pub fn brute_force_oracle<T: Task + ?Sized>(
    task: &T,
    instance: &T::Instance,
    w: &[f64],
    n: usize,
    cap: u128,
) -> Result<OracleResult<T::Label>> {
    check_query(task, w, n)?;
    let size = task.label_space_size(instance);
    if size > cap {
        return Err(Error::Capacity { size, cap });
    }
    let mut best: Option<OracleResult<T::Label>> = None;
    for index in 0..size {
        let label = task.label_at(instance, index);
        let plane = label_plane(task, instance, &label, n)?;
        let value = plane.eval(w);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(OracleResult {
                plane,
                label,
                value,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidState("empty label space".into()))
}

/// A task together with its training examples.
#[derive(Debug, Clone)]
pub struct Dataset<T: Task> {
    pub task: T,
    pub instances: Vec<T::Instance>,
}

impl<T: Task> Dataset<T> {
    pub fn new(task: T, instances: Vec<T::Instance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::invalid("dataset has no examples"));
        }
        for inst in &instances {
            task.validate_instance(inst)?;
        }
        Ok(Dataset { task, instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.task.dim()
    }

    /// Calls the exact oracle for example `i` with the `1/n` scaling of this dataset.
    pub fn oracle(&self, i: usize, w: &[f64]) -> Result<OracleResult<T::Label>> {
        self.task.max_oracle(&self.instances[i], w, self.instances.len())
    }

    /// `sum_i H_i(w)`; oracle calls fan out over threads, summation is in index order.
    pub fn hinge_sum(&self, w: &[f64]) -> Result<f64> {
        use rayon::prelude::*;
        let values: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| self.oracle(i, w).map(|r| r.value))
            .collect::<Result<_>>()?;
        Ok(values.iter().sum())
    }

    /// Primal objective `lambda/2 |w|^2 + sum_i H_i(w)`.
    pub fn primal(&self, w: &[f64], lambda: f64) -> Result<f64> {
        check_query(&self.task, w, self.len())?;
        let reg: f64 = w.iter().map(|v| v * v).sum();
        Ok(0.5 * lambda * reg + self.hinge_sum(w)?)
    }

    /// Mean task loss of the prediction rule at `w`.
    pub fn prediction_error(&self, w: &[f64]) -> Result<f64> {
        use rayon::prelude::*;
        check_query(&self.task, w, self.len())?;
        let losses: Vec<f64> = self
            .instances
            .par_iter()
            .map(|inst| {
                let y = self.task.predict(inst, w)?;
                self.task.loss(inst, &y)
            })
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum::<f64>() / self.len() as f64)
    }
}
