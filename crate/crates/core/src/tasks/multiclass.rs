use crate::error::{Error, Result};
use crate::oracle::{check_query, result_for, OracleResult, Task, TaskKind};

use super::{add_block, block_dot, first_argmax};

/// `K`-way classification with joint map `phi(x, y) = psi(x)` placed in block `y`
/// and the 0/1 loss.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassTask {
    num_classes: usize,
    base_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassInstance {
    pub features: Vec<f64>,
    pub label: usize,
}

impl MulticlassTask {
    pub fn new(num_classes: usize, base_dim: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid("multiclass task needs at least 2 classes"));
        }
        if base_dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        Ok(MulticlassTask {
            num_classes,
            base_dim,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    fn scores(&self, inst: &MulticlassInstance, w: &[f64], loss_scale: f64) -> Vec<f64> {
        (0..self.num_classes)
            .map(|y| {
                let loss = if y == inst.label { 0.0 } else { loss_scale };
                loss + block_dot(w, y, &inst.features)
            })
            .collect()
    }
}

impl Task for MulticlassTask {
    type Instance = MulticlassInstance;
    type Label = usize;

    fn kind(&self) -> TaskKind {
        TaskKind::Multiclass
    }

    fn dim(&self) -> usize {
        self.num_classes * self.base_dim
    }

    fn truth<'a>(&self, instance: &'a MulticlassInstance) -> &'a usize {
        &instance.label
    }

    fn validate_instance(&self, inst: &MulticlassInstance) -> Result<()> {
        if inst.features.len() != self.base_dim {
            return Err(Error::invalid(format!(
                "instance has {} features, expected {}",
                inst.features.len(),
                self.base_dim
            )));
        }
        if inst.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        if inst.label >= self.num_classes {
            return Err(Error::invalid(format!(
                "label {} out of range for {} classes",
                inst.label, self.num_classes
            )));
        }
        Ok(())
    }

    fn loss(&self, inst: &MulticlassInstance, label: &usize) -> Result<f64> {
        if *label >= self.num_classes {
            return Err(Error::invalid(format!("label {label} out of range")));
        }
        Ok(if *label == inst.label { 0.0 } else { 1.0 })
    }

    fn joint_feature(&self, inst: &MulticlassInstance, label: &usize) -> Result<(Vec<f64>, f64)> {
        if *label >= self.num_classes {
            return Err(Error::invalid(format!("label {label} out of range")));
        }
        let mut phi = vec![0.0; self.dim()];
        add_block(&mut phi, *label, &inst.features);
        Ok((phi, 0.0))
    }

    fn max_oracle(
        &self,
        inst: &MulticlassInstance,
        w: &[f64],
        n: usize,
    ) -> Result<OracleResult<usize>> {
        check_query(self, w, n)?;
        let best = first_argmax(self.scores(inst, w, 1.0));
        result_for(self, inst, best, w, n)
    }

    fn predict(&self, inst: &MulticlassInstance, w: &[f64]) -> Result<usize> {
        check_query(self, w, 1)?;
        Ok(first_argmax(self.scores(inst, w, 0.0)))
    }

    fn label_space_size(&self, _inst: &MulticlassInstance) -> u128 {
        self.num_classes as u128
    }

    fn label_at(&self, _inst: &MulticlassInstance, index: u128) -> usize {
        index as usize
    }
}
