#![allow(dead_code)]

use std::sync::Mutex;

use mpbcfw::data;
use mpbcfw::oracle::{brute_force_oracle, OracleResult, Task, TaskKind};
use mpbcfw::tasks::{BinaryPottsTask, ChainTask, MulticlassTask};
use mpbcfw::{Dataset, Plane, Result};

/// `n = 20`, `K = 3`, model dimension 6.
pub fn multiclass_toy(seed: u64) -> Dataset<MulticlassTask> {
    data::multiclass(20, 3, 2, 4.0, seed).unwrap()
}

pub fn chain_toy(seed: u64) -> Dataset<ChainTask> {
    data::chain(30, 5, 3, 3, 1.0, seed).unwrap()
}

pub fn potts_toy(seed: u64) -> Dataset<BinaryPottsTask> {
    data::binary_potts_grid(15, 4, 4, 3, 0.5, 1.0, seed).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Wraps a task so that instances carry their index and every oracle answer
/// is logged.
pub struct Logged<T: Task> {
    pub inner: T,
    pub log: Mutex<Vec<(usize, OracleResult<T::Label>)>>,
}

pub fn logged<T: Task>(data: Dataset<T>) -> Dataset<Logged<T>>
where
    T::Instance: Clone,
{
    let instances = data.instances.into_iter().enumerate().collect();
    Dataset::new(
        Logged {
            inner: data.task,
            log: Mutex::new(Vec::new()),
        },
        instances,
    )
    .unwrap()
}

impl<T: Task> Task for Logged<T> {
    type Instance = (usize, T::Instance);
    type Label = T::Label;

    fn kind(&self) -> TaskKind {
        self.inner.kind()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn truth<'a>(&self, inst: &'a Self::Instance) -> &'a T::Label {
        self.inner.truth(&inst.1)
    }
    fn validate_instance(&self, inst: &Self::Instance) -> Result<()> {
        self.inner.validate_instance(&inst.1)
    }
    fn loss(&self, inst: &Self::Instance, label: &T::Label) -> Result<f64> {
        self.inner.loss(&inst.1, label)
    }
    fn joint_feature(&self, inst: &Self::Instance, label: &T::Label) -> Result<(Vec<f64>, f64)> {
        self.inner.joint_feature(&inst.1, label)
    }
    fn max_oracle(&self, inst: &Self::Instance, w: &[f64], n: usize) -> Result<OracleResult<T::Label>> {
        let r = self.inner.max_oracle(&inst.1, w, n)?;
        self.log.lock().unwrap().push((inst.0, r.clone()));
        Ok(r)
    }
    fn predict(&self, inst: &Self::Instance, w: &[f64]) -> Result<T::Label> {
        self.inner.predict(&inst.1, w)
    }
    fn label_space_size(&self, inst: &Self::Instance) -> u128 {
        self.inner.label_space_size(&inst.1)
    }
    fn label_at(&self, inst: &Self::Instance, index: u128) -> T::Label {
        self.inner.label_at(&inst.1, index)
    }
}

/// Two labels with identical features and zero loss: every oracle plane is
/// the zero plane.
pub struct Flat;

impl Task for Flat {
    type Instance = [f64; 2];
    type Label = usize;

    fn kind(&self) -> TaskKind {
        TaskKind::Multiclass
    }
    fn dim(&self) -> usize {
        2
    }
    fn truth<'a>(&self, _: &'a [f64; 2]) -> &'a usize {
        &0
    }
    fn validate_instance(&self, _: &[f64; 2]) -> Result<()> {
        Ok(())
    }
    fn loss(&self, _: &[f64; 2], _: &usize) -> Result<f64> {
        Ok(0.0)
    }
    fn joint_feature(&self, inst: &[f64; 2], _: &usize) -> Result<(Vec<f64>, f64)> {
        Ok((inst.to_vec(), 0.0))
    }
    fn max_oracle(&self, inst: &[f64; 2], w: &[f64], n: usize) -> Result<OracleResult<usize>> {
        brute_force_oracle(self, inst, w, n, 2)
    }
    fn predict(&self, _: &[f64; 2], _: &[f64]) -> Result<usize> {
        Ok(0)
    }
    fn label_space_size(&self, _: &[f64; 2]) -> u128 {
        2
    }
    fn label_at(&self, _: &[f64; 2], index: u128) -> usize {
        index as usize
    }
}

pub fn grid_max(f: impl Fn(f64) -> f64, points: usize) -> f64 {
    (0..points)
        .map(|k| f(k as f64 / (points - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn segment(a: &Plane, b: &Plane, gamma: f64) -> Plane {
    let mut p = a.clone();
    p.interpolate(b, gamma);
    p
}
