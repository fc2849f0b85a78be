//! Structural SVM training in the dual.
//!
//! The crate implements three solvers for the regularized structured hinge
//! loss objective: Frank-Wolfe, block-coordinate Frank-Wolfe (BCFW), and the
//! multi-plane BCFW variant that caches oracle planes per example and
//! interleaves cheap approximate passes with exact ones. Passes are scheduled
//! automatically by comparing objective gain rates.
//!
//! Three loss-augmented max-oracles are built in:
//! - [`tasks::MulticlassTask`]: explicit search over classes,
//! - [`tasks::ChainTask`]: Viterbi over a first-order chain,
//! - [`tasks::BinaryPottsTask`]: binary segmentation with a Potts smoothness
//!   term, solved exactly by one s-t min-cut ([`maxflow`]).
//!
//! The shared math lives in [`plane`]: planes in `R^(d+1)`, the dual bound,
//! the closed-form line search and the weights of a plane.

pub mod autotune;
pub mod data;
pub mod error;
pub mod maxflow;
pub mod oracle;
pub mod plane;
pub mod solver;
pub mod tasks;

pub use error::{Error, Result};
pub use oracle::{Dataset, OracleResult, Task, TaskKind};
pub use plane::{DualState, Plane};
