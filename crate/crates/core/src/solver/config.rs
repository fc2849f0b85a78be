use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Fw,
    Bcfw,
    BcfwAvg,
    MpBcfw,
    MpBcfwAvg,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fw => "fw",
            Algorithm::Bcfw => "bcfw",
            Algorithm::BcfwAvg => "bcfw-avg",
            Algorithm::MpBcfw => "mp-bcfw",
            Algorithm::MpBcfwAvg => "mp-bcfw-avg",
        }
    }

    pub fn is_multi_plane(self) -> bool {
        matches!(self, Algorithm::MpBcfw | Algorithm::MpBcfwAvg)
    }

    pub fn is_averaged(self) -> bool {
        matches!(self, Algorithm::BcfwAvg | Algorithm::MpBcfwAvg)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fw" => Algorithm::Fw,
            "bcfw" => Algorithm::Bcfw,
            "bcfw-avg" => Algorithm::BcfwAvg,
            "mp-bcfw" => Algorithm::MpBcfw,
            "mp-bcfw-avg" => Algorithm::MpBcfwAvg,
            other => return Err(Error::invalid(format!("unknown algorithm '{other}'"))),
        })
    }
}

/// How many approximate passes follow each exact pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxPolicy {
    /// Continue while the last pass gains faster than the iteration as a whole.
    Auto,
    /// Exactly `min(K, M)` passes.
    Fixed(usize),
}

impl fmt::Display for ApproxPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxPolicy::Auto => f.write_str("auto"),
            ApproxPolicy::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for ApproxPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ApproxPolicy::Auto);
        }
        s.strip_prefix("fixed:")
            .and_then(|k| k.parse().ok())
            .map(ApproxPolicy::Fixed)
            .ok_or_else(|| Error::invalid(format!("approx policy must be 'auto' or 'fixed:K', got '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stopping {
    /// Maximum number of outer iterations.
    pub max_iterations: Option<usize>,
    /// Stop once the duality gap falls to this value.
    pub gap_tolerance: Option<f64>,
    /// Training time budget in seconds (evaluation time excluded).
    pub time_budget: Option<f64>,
    /// Stop once this many exact training oracle calls were made.
    pub max_exact_calls: Option<u64>,
}

impl Stopping {
    pub fn iterations(n: usize) -> Self {
        Stopping {
            max_iterations: Some(n),
            ..Default::default()
        }
    }

    fn is_set(&self) -> bool {
        self.max_iterations.is_some()
            || self.gap_tolerance.is_some()
            || self.time_budget.is_some()
            || self.max_exact_calls.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Regularizer; `None` means `1/n`.
    pub lambda: Option<f64>,
    /// Working-set capacity `N`.
    pub cache_size: usize,
    /// Maximum approximate passes per outer iteration `M`.
    pub max_approx_passes: usize,
    /// Inactivity horizon `T` in outer iterations.
    pub inactivity: usize,
    pub approx_policy: ApproxPolicy,
    pub seed: u64,
    pub stopping: Stopping,
    /// Evaluate the primal objective every this many outer iterations (0 = never).
    pub primal_every: usize,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            lambda: None,
            cache_size: 1000,
            max_approx_passes: 1000,
            inactivity: 10,
            approx_policy: ApproxPolicy::Auto,
            seed: 0,
            stopping: Stopping::iterations(100),
            primal_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid(format!("lambda must be positive, got {l}")));
            }
        }
        if self.inactivity == 0 {
            return Err(Error::invalid("inactivity horizon T must be at least 1"));
        }
        if !self.stopping.is_set() {
            return Err(Error::invalid("at least one stopping criterion is required"));
        }
        if let Some(tol) = self.stopping.gap_tolerance {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::invalid(format!("gap tolerance must be non-negative, got {tol}")));
            }
            if self.primal_every == 0 {
                return Err(Error::invalid("a gap tolerance needs primal evaluation enabled"));
            }
        }
        if let Some(t) = self.stopping.time_budget {
            if t.is_nan() || t < 0.0 {
                return Err(Error::invalid(format!("time budget must be non-negative, got {t}")));
            }
        }
        Ok(())
    }
}
