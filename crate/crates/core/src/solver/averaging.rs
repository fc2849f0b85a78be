//! Weighted averages of dual iterates.
//!
//! After `k` incorporations the average is `2/(k(k+1)) sum_t t phi^(t)`,
//! maintained as `avg <- k/(k+2) avg + 2/(k+2) phi`.

use crate::error::{Error, Result};
use crate::plane::{line_search_gamma, Plane};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunningAverage {
    plane: Option<Plane>,
    count: u64,
}

impl RunningAverage {
    pub fn plane(&self) -> Option<&Plane> {
        self.plane.as_ref()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn update(&mut self, iterate: &Plane) {
        match &mut self.plane {
            None => self.plane = Some(iterate.clone()),
            Some(avg) => {
                let k = self.count as f64;
                avg.interpolate(iterate, 2.0 / (k + 2.0));
            }
        }
        self.count += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    Exact,
    Approx,
}

/// Separate averages over iterates following exact and approximate oracle calls.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AveragingState {
    pub exact: RunningAverage,
    pub approx: RunningAverage,
}

impl AveragingState {
    pub fn update(&mut self, aggregate: &Plane, which: AverageKind) {
        match which {
            AverageKind::Exact => self.exact.update(aggregate),
            AverageKind::Approx => self.approx.update(aggregate),
        }
    }

    /// Point on the segment between the two averages with the highest dual bound.
    pub fn best_average(&self, lambda: f64) -> Result<Plane> {
        match (self.exact.plane(), self.approx.plane()) {
            (None, None) => Err(Error::InvalidState("no averaged iterate yet".into())),
            (Some(p), None) | (None, Some(p)) => Ok(p.clone()),
            (Some(exact), Some(approx)) => {
                let gamma = line_search_gamma(exact, approx, exact, lambda);
                let mut p = exact.clone();
                p.interpolate(approx, gamma);
                Ok(p)
            }
        }
    }
}
