//! Planes in `R^(d+1)` and the dual state shared by all solvers.
//!
//! A plane `(star, offset)` represents the affine function
//! `w -> <star, w> + offset`. The dual bound of an aggregate plane is
//! `F = -|star|^2 / (2 lambda) + offset`, attained at `w = -star / lambda`.

use crate::error::{Error, Result};

/// Squared step lengths below this are treated as a zero step in the line search.
pub const DEGENERATE_STEP: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    star: Vec<f64>,
    offset: f64,
}

impl Plane {
    pub fn zeros(dim: usize) -> Self {
        Plane {
            star: vec![0.0; dim],
            offset: 0.0,
        }
    }

    pub fn new(star: Vec<f64>, offset: f64) -> Result<Self> {
        if !offset.is_finite() || star.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("plane components must be finite"));
        }
        Ok(Plane { star, offset })
    }

    pub fn dim(&self) -> usize {
        self.star.len()
    }

    pub fn star(&self) -> &[f64] {
        &self.star
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<star, w> + offset`.
    pub fn eval(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.star.len());
        dot(&self.star, w) + self.offset
    }

    pub fn star_norm_sq(&self) -> f64 {
        dot(&self.star, &self.star)
    }

    pub fn add_assign(&mut self, other: &Plane) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.star.iter_mut().zip(&other.star) {
            *a += b;
        }
        self.offset += other.offset;
    }

    pub fn sub_assign(&mut self, other: &Plane) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.star.iter_mut().zip(&other.star) {
            *a -= b;
        }
        self.offset -= other.offset;
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.star {
            *a *= factor;
        }
        self.offset *= factor;
    }

    /// `self <- (1 - gamma) self + gamma other`.
    pub fn interpolate(&mut self, other: &Plane, gamma: f64) {
        debug_assert_eq!(self.dim(), other.dim());
        let keep = 1.0 - gamma;
        for (a, b) in self.star.iter_mut().zip(&other.star) {
            *a = keep * *a + gamma * b;
        }
        self.offset = keep * self.offset + gamma * other.offset;
    }

    /// Largest component-wise absolute difference, offset included.
    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.star
            .iter()
            .zip(&other.star)
            .map(|(a, b)| (a - b).abs())
            .fold((self.offset - other.offset).abs(), f64::max)
    }

    pub fn norm(&self) -> f64 {
        (self.star_norm_sq() + self.offset * self.offset).sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "regularization constant must be positive and finite, got {lambda}"
        )))
    }
}

/// Dual bound `F(p) = -|p_star|^2 / (2 lambda) + p_offset`.
pub fn dual_bound(p: &Plane, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(dual_bound_unchecked(p, lambda))
}

#[inline]
pub(crate) fn dual_bound_unchecked(p: &Plane, lambda: f64) -> f64 {
    -p.star_norm_sq() / (2.0 * lambda) + p.offset
}

/// The minimizer `w = -p_star / lambda` of `lambda/2 |w|^2 + <p, [w 1]>`.
pub fn weights_of(p: &Plane, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(weights_unchecked(p, lambda))
}

pub(crate) fn weights_unchecked(p: &Plane, lambda: f64) -> Vec<f64> {
    let inv = -1.0 / lambda;
    p.star.iter().map(|v| v * inv).collect()
}

/// Step size in `[0, 1]` maximizing `F(aggregate - old + (1-gamma) old + gamma new)`.
///
/// When the star parts of `old` and `new` coincide, `F` is affine in `gamma`
/// with slope `new_offset - old_offset`; the step is 1 if that slope is
/// positive and 0 otherwise.
pub fn line_search_gamma(old: &Plane, new: &Plane, aggregate: &Plane, lambda: f64) -> f64 {
    debug_assert_eq!(old.dim(), new.dim());
    debug_assert_eq!(old.dim(), aggregate.dim());
    let mut num = 0.0;
    let mut den = 0.0;
    for ((o, n), a) in old.star.iter().zip(&new.star).zip(&aggregate.star) {
        let diff = o - n;
        num += diff * a;
        den += diff * diff;
    }
    let offset_gain = new.offset - old.offset;
    if den < DEGENERATE_STEP {
        return if offset_gain > 0.0 { 1.0 } else { 0.0 };
    }
    let gamma = (num + lambda * offset_gain) / den;
    if gamma.is_nan() {
        0.0
    } else {
        gamma.clamp(0.0, 1.0)
    }
}

/// Per-example planes `phi^1..phi^n`, their sum, and the regularizer.
#[derive(Debug, Clone)]
pub struct DualState {
    blocks: Vec<Plane>,
    aggregate: Plane,
    lambda: f64,
    updates_since_resum: usize,
}

impl DualState {
    /// All blocks start at the zero plane, i.e. at the ground-truth labels.
    pub fn new(n: usize, dim: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if n == 0 {
            return Err(Error::invalid("dual state needs at least one example"));
        }
        Ok(DualState {
            blocks: vec![Plane::zeros(dim); n],
            aggregate: Plane::zeros(dim),
            lambda,
            updates_since_resum: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.aggregate.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn block(&self, i: usize) -> &Plane {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Plane] {
        &self.blocks
    }

    pub fn aggregate(&self) -> &Plane {
        &self.aggregate
    }

    pub fn weights(&self) -> Vec<f64> {
        weights_unchecked(&self.aggregate, self.lambda)
    }

    pub fn dual_bound(&self) -> f64 {
        dual_bound_unchecked(&self.aggregate, self.lambda)
    }

    /// `phi^i <- (1-gamma) phi^i + gamma new_block`, aggregate updated incrementally.
    pub fn apply_block_update(&mut self, i: usize, new_block: &Plane, gamma: f64) -> Result<()> {
        if i >= self.blocks.len() {
            return Err(Error::invalid(format!(
                "block index {i} out of range for {} examples",
                self.blocks.len()
            )));
        }
        if new_block.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "plane dimension {} does not match model dimension {}",
                new_block.dim(),
                self.dim()
            )));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!("step size {gamma} outside [0, 1]")));
        }
        if gamma == 0.0 {
            return Ok(());
        }
        let block = &mut self.blocks[i];
        self.aggregate.sub_assign(block);
        if gamma == 1.0 {
            block.clone_from(new_block);
        } else {
            block.interpolate(new_block, gamma);
        }
        self.aggregate.add_assign(block);

        self.updates_since_resum += 1;
        if self.updates_since_resum >= self.blocks.len() {
            self.resum();
        }
        Ok(())
    }

    /// Line search for block `i` against `candidate`, then apply. Returns the step.
    pub fn block_step(&mut self, i: usize, candidate: &Plane) -> Result<f64> {
        let old = self
            .blocks
            .get(i)
            .ok_or_else(|| Error::invalid(format!("block index {i} out of range")))?;
        let gamma = line_search_gamma(old, candidate, &self.aggregate, self.lambda);
        self.apply_block_update(i, candidate, gamma)?;
        Ok(gamma)
    }

    /// Full Frank-Wolfe step: every block moves toward its candidate by the same `gamma`.
    pub fn apply_full_update(&mut self, candidates: &[Plane], gamma: f64) -> Result<()> {
        if candidates.len() != self.blocks.len() {
            return Err(Error::invalid("one candidate plane per block required"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!("step size {gamma} outside [0, 1]")));
        }
        if gamma == 0.0 {
            return Ok(());
        }
        for (block, cand) in self.blocks.iter_mut().zip(candidates) {
            block.interpolate(cand, gamma);
        }
        self.resum();
        Ok(())
    }

    /// Recompute the aggregate from scratch.
    pub fn resum(&mut self) {
        let mut sum = Plane::zeros(self.dim());
        for b in &self.blocks {
            sum.add_assign(b);
        }
        self.aggregate = sum;
        self.updates_since_resum = 0;
    }

    /// Distance between the maintained aggregate and a fresh resummation.
    pub fn aggregate_drift(&self) -> f64 {
        let mut sum = Plane::zeros(self.dim());
        for b in &self.blocks {
            sum.add_assign(b);
        }
        sum.max_abs_diff(&self.aggregate)
    }
}
