//! Frank-Wolfe, BCFW and multi-plane BCFW training loops.
//!
//! Every solver starts from the zero plane in every block (each example at
//! its ground-truth label), so `w = 0` and the dual bound is 0 initially.
//! BCFW-style passes visit the examples in a fresh random permutation.
//!
//! Multi-plane BCFW runs outer iterations of one exact pass followed by up to
//! `M` approximate passes. The exact pass stores each oracle plane in the
//! example's working set; approximate passes replace the oracle by the best
//! cached plane and evict planes that were not a maximizer during the last
//! `T` outer iterations. With `N = 0` and `M = 0` it performs exactly the
//! BCFW updates.

mod averaging;
mod clock;
mod config;
mod working_set;

pub use averaging::{AverageKind, AveragingState, RunningAverage};
pub use clock::{Clock, ClockEvent, SimulatedClock, WallClock};
pub use config::{Algorithm, ApproxPolicy, SolverConfig, Stopping};
pub use working_set::{CachedPlane, Insertion, WorkingSet, DUPLICATE_TOL};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autotune::{should_continue_approx, IterationProgress};
use crate::error::Result;
use crate::oracle::{Dataset, Task};
use crate::plane::{dual_bound_unchecked, line_search_gamma, weights_unchecked, DualState, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PassKind {
    Exact,
    Approx,
}

/// One logged pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub pass_kind: PassKind,
    pub exact_calls: u64,
    pub approx_calls: u64,
    pub elapsed_ms: f64,
    pub dual: f64,
    pub primal: Option<f64>,
    pub gap: Option<f64>,
    pub dual_avg: Option<f64>,
    pub primal_avg: Option<f64>,
    pub gap_avg: Option<f64>,
    pub mean_ws_size: f64,
    pub approx_passes_this_iter: usize,
}

/// Emitted after every single block update (or full FW step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateEvent {
    pub kind: PassKind,
    pub iteration: usize,
    pub exact_calls: u64,
    pub approx_calls: u64,
    pub dual: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    /// Exact oracle calls made by the training passes.
    pub exact_calls: u64,
    /// Block updates made against a working set.
    pub approx_calls: u64,
    /// Exact oracle calls spent on primal evaluation.
    pub primal_calls: u64,
    pub approx_passes: u64,
    /// Invocations of the automatic pass-count rule.
    pub autotune_decisions: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput<L> {
    pub weights: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub state: DualState,
    pub working_sets: Vec<WorkingSet<L>>,
    pub averages: AveragingState,
    pub counters: Counters,
}

impl<L> TrainOutput<L> {
    pub fn final_dual(&self) -> f64 {
        self.state.dual_bound()
    }
}

type Observer<'a> = Box<dyn FnMut(&UpdateEvent) + 'a>;

/// Mutable training state for one run.
pub struct Trainer<'a, T: Task, C: Clock> {
    data: &'a Dataset<T>,
    config: SolverConfig,
    lambda: f64,
    clock: C,
    rng: ChaCha8Rng,
    state: DualState,
    working_sets: Vec<WorkingSet<T::Label>>,
    averages: AveragingState,
    counters: Counters,
    iteration: usize,
    insert_seq: u64,
    start_time: f64,
    eval_seconds: f64,
    trace: Vec<TraceRecord>,
    observer: Option<Observer<'a>>,
}

impl<'a, T: Task, C: Clock> Trainer<'a, T, C> {
    pub fn new(config: SolverConfig, data: &'a Dataset<T>, mut clock: C) -> Result<Self> {
        config.validate()?;
        let n = data.len();
        let lambda = config.lambda.unwrap_or(1.0 / n as f64);
        let state = DualState::new(n, data.dim(), lambda)?;
        let capacity = if config.algorithm.is_multi_plane() {
            config.cache_size
        } else {
            0
        };
        let mut working_sets = Vec::with_capacity(n);
        let mut insert_seq = 0;
        for (i, inst) in data.instances.iter().enumerate() {
            let mut ws = WorkingSet::new(capacity);
            // W_i = {phi^i}: the zero plane of the ground-truth label.
            ws.insert(
                state.block(i).clone(),
                data.task.truth(inst).clone(),
                0,
                insert_seq,
            );
            insert_seq += 1;
            working_sets.push(ws);
        }
        let start_time = clock.now();
        Ok(Trainer {
            data,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            lambda,
            clock,
            state,
            working_sets,
            averages: AveragingState::default(),
            counters: Counters::default(),
            iteration: 0,
            insert_seq,
            start_time,
            eval_seconds: 0.0,
            trace: Vec::new(),
            observer: None,
        })
    }

    pub fn with_observer(mut self, f: impl FnMut(&UpdateEvent) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn state(&self) -> &DualState {
        &self.state
    }

    pub fn working_sets(&self) -> &[WorkingSet<T::Label>] {
        &self.working_sets
    }

    pub fn averages(&self) -> &AveragingState {
        &self.averages
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    fn emit(&mut self, kind: PassKind) {
        if let Some(f) = self.observer.as_mut() {
            f(&UpdateEvent {
                kind,
                iteration: self.iteration,
                exact_calls: self.counters.exact_calls,
                approx_calls: self.counters.approx_calls,
                dual: dual_bound_unchecked(self.state.aggregate(), self.lambda),
            });
        }
    }

    fn permutation(&mut self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        order.shuffle(&mut self.rng);
        order
    }

    fn exact_call(&mut self, i: usize) -> Result<crate::oracle::OracleResult<T::Label>> {
        let w = self.state.weights();
        let r = self.data.oracle(i, &w)?;
        self.counters.exact_calls += 1;
        self.clock.charge(ClockEvent::ExactOracleCall);
        Ok(r)
    }

    /// One Frank-Wolfe step on the aggregate: all `n` oracles at the current `w`,
    /// then a line search toward the summed plane.
    pub fn fw_iteration(&mut self) -> Result<()> {
        let n = self.data.len();
        let mut candidates = Vec::with_capacity(n);
        let mut combined = Plane::zeros(self.data.dim());
        let w = self.state.weights();
        for i in 0..n {
            let r = self.data.oracle(i, &w)?;
            self.counters.exact_calls += 1;
            self.clock.charge(ClockEvent::ExactOracleCall);
            combined.add_assign(&r.plane);
            candidates.push(r.plane);
        }
        let agg = self.state.aggregate();
        let gamma = line_search_gamma(agg, &combined, agg, self.lambda);
        self.state.apply_full_update(&candidates, gamma)?;
        self.emit(PassKind::Exact);
        Ok(())
    }

    /// One BCFW pass over a random permutation of the examples.
    pub fn bcfw_pass(&mut self) -> Result<()> {
        for i in self.permutation() {
            let r = self.exact_call(i)?;
            self.state.block_step(i, &r.plane)?;
            if self.config.algorithm.is_averaged() {
                self.averages.update(self.state.aggregate(), AverageKind::Exact);
            }
            self.emit(PassKind::Exact);
        }
        Ok(())
    }

    /// BCFW pass that also stores every oracle plane in the working sets.
    pub fn mpbcfw_exact_pass(&mut self) -> Result<()> {
        let stamp = self.iteration;
        for i in self.permutation() {
            let r = self.exact_call(i)?;
            self.state.block_step(i, &r.plane)?;
            if self.config.algorithm.is_averaged() {
                self.averages.update(self.state.aggregate(), AverageKind::Exact);
            }
            self.working_sets[i].insert(r.plane, r.label, stamp, self.insert_seq);
            self.insert_seq += 1;
            self.emit(PassKind::Exact);
        }
        Ok(())
    }

    /// One pass of block updates against the working sets. Blocks with an
    /// empty working set are skipped. Returns the gain in the dual bound and
    /// the elapsed clock time.
    pub fn mpbcfw_approx_pass(&mut self) -> Result<(f64, f64)> {
        let before = self.state.dual_bound();
        let t0 = self.clock.now();
        let stamp = self.iteration;
        let horizon = self.config.inactivity;
        for i in self.permutation() {
            if self.working_sets[i].is_empty() {
                continue;
            }
            let w = weights_unchecked(self.state.aggregate(), self.lambda);
            let best = self.working_sets[i].best(&w).expect("non-empty working set");
            self.working_sets[i].mark_active(best, stamp);
            let candidate = self.working_sets[i].entries()[best].plane.clone();
            self.state.block_step(i, &candidate)?;
            self.counters.approx_calls += 1;
            self.clock.charge(ClockEvent::ApproxBlockUpdate);
            if self.config.algorithm.is_averaged() {
                self.averages.update(self.state.aggregate(), AverageKind::Approx);
            }
            self.working_sets[i].evict_inactive(stamp, horizon);
            self.emit(PassKind::Approx);
        }
        self.counters.approx_passes += 1;
        let gain = self.state.dual_bound() - before;
        Ok((gain, self.clock.now() - t0))
    }

    fn any_cached(&self) -> bool {
        self.working_sets.iter().any(|ws| !ws.is_empty())
    }

    fn elapsed(&mut self) -> f64 {
        self.clock.now() - self.start_time - self.eval_seconds
    }

    fn mean_ws_size(&self) -> f64 {
        let total: usize = self.working_sets.iter().map(WorkingSet::len).sum();
        total as f64 / self.working_sets.len() as f64
    }

    fn record(&mut self, kind: PassKind, approx_passes_this_iter: usize) {
        let elapsed_ms = self.elapsed() * 1e3;
        self.trace.push(TraceRecord {
            iter: self.iteration,
            pass_kind: kind,
            exact_calls: self.counters.exact_calls,
            approx_calls: self.counters.approx_calls,
            elapsed_ms,
            dual: self.state.dual_bound(),
            primal: None,
            gap: None,
            dual_avg: None,
            primal_avg: None,
            gap_avg: None,
            mean_ws_size: self.mean_ws_size(),
            approx_passes_this_iter,
        });
    }

    /// Plane the final model is read from: the aggregate, or the best
    /// interpolation of the two averages for averaged variants.
    pub fn model_plane(&self) -> Plane {
        if self.config.algorithm.is_averaged() {
            if let Ok(p) = self.averages.best_average(self.lambda) {
                return p;
            }
        }
        self.state.aggregate().clone()
    }

    fn evaluate_primal(&mut self) -> Result<()> {
        let t0 = self.clock.now();
        let n = self.data.len() as u64;
        let dual = self.state.dual_bound();
        let primal = self.data.primal(&self.state.weights(), self.lambda)?;
        self.counters.primal_calls += n;
        let mut avg = None;
        if self.config.algorithm.is_averaged() {
            if let Ok(p) = self.averages.best_average(self.lambda) {
                let d = dual_bound_unchecked(&p, self.lambda);
                let pr = self.data.primal(&weights_unchecked(&p, self.lambda), self.lambda)?;
                self.counters.primal_calls += n;
                avg = Some((d, pr));
            }
        }
        if let Some(rec) = self.trace.last_mut() {
            rec.primal = Some(primal);
            rec.gap = Some(primal - dual);
            if let Some((d, pr)) = avg {
                rec.dual_avg = Some(d);
                rec.primal_avg = Some(pr);
                rec.gap_avg = Some(pr - d);
            }
        }
        self.eval_seconds += self.clock.now() - t0;
        Ok(())
    }

    fn time_exhausted(&mut self) -> bool {
        match self.config.stopping.time_budget {
            Some(budget) => self.elapsed() >= budget,
            None => false,
        }
    }

    /// Runs one outer iteration: the exact pass (or FW step) and, for the
    /// multi-plane variants, the approximate passes that follow it.
    pub fn outer_iteration(&mut self) -> Result<()> {
        self.iteration += 1;
        let iter_start_time = self.clock.now();
        let iter_start_bound = self.state.dual_bound();
        match self.config.algorithm {
            Algorithm::Fw => self.fw_iteration()?,
            Algorithm::Bcfw | Algorithm::BcfwAvg => self.bcfw_pass()?,
            Algorithm::MpBcfw | Algorithm::MpBcfwAvg => self.mpbcfw_exact_pass()?,
        }
        self.record(PassKind::Exact, 0);
        if !self.config.algorithm.is_multi_plane() {
            return Ok(());
        }

        let limit = match self.config.approx_policy {
            ApproxPolicy::Auto => self.config.max_approx_passes,
            ApproxPolicy::Fixed(k) => k.min(self.config.max_approx_passes),
        };
        let mut done = 0;
        while done < limit && self.any_cached() && !self.time_exhausted() {
            let (gain, duration) = self.mpbcfw_approx_pass()?;
            done += 1;
            self.record(PassKind::Approx, done);
            if self.config.approx_policy == ApproxPolicy::Auto {
                self.counters.autotune_decisions += 1;
                let progress = IterationProgress {
                    iter_start_bound,
                    iter_start_time,
                    last_pass_gain: gain,
                    last_pass_duration: duration,
                };
                let now = self.clock.now();
                if !should_continue_approx(&progress, now, self.state.dual_bound()) {
                    break;
                }
            }
        }
        // Blocks skipped by the approximate passes still age out.
        let (stamp, horizon) = (self.iteration, self.config.inactivity);
        for ws in &mut self.working_sets {
            ws.evict_inactive(stamp, horizon);
        }
        Ok(())
    }

    fn should_stop(&mut self) -> bool {
        let stop = self.config.stopping.clone();
        if stop.max_iterations.is_some_and(|m| self.iteration >= m) {
            return true;
        }
        if stop.max_exact_calls.is_some_and(|m| self.counters.exact_calls >= m) {
            return true;
        }
        if let (Some(tol), Some(rec)) = (stop.gap_tolerance, self.trace.last()) {
            let gap = if self.config.algorithm.is_averaged() {
                rec.gap_avg.or(rec.gap)
            } else {
                rec.gap
            };
            if gap.is_some_and(|g| g <= tol) {
                return true;
            }
        }
        self.time_exhausted()
    }

    /// Trains until a stopping criterion holds.
    pub fn run(mut self) -> Result<TrainOutput<T::Label>> {
        loop {
            self.outer_iteration()?;
            let every = self.config.primal_every;
            if every > 0 && self.iteration.is_multiple_of(every) {
                self.evaluate_primal()?;
            }
            if self.should_stop() {
                break;
            }
        }
        let plane = self.model_plane();
        Ok(TrainOutput {
            weights: weights_unchecked(&plane, self.lambda),
            lambda: self.lambda,
            iterations: self.iteration,
            trace: self.trace,
            state: self.state,
            working_sets: self.working_sets,
            averages: self.averages,
            counters: self.counters,
        })
    }
}

/// Trains on `data` with the given configuration and clock.
pub fn train<T: Task, C: Clock>(
    config: &SolverConfig,
    data: &Dataset<T>,
    clock: C,
) -> Result<TrainOutput<T::Label>> {
    Trainer::new(config.clone(), data, clock)?.run()
}

/// Like [`train`], calling `observer` after every block update.
pub fn train_observed<'a, T: Task, C: Clock>(
    config: &SolverConfig,
    data: &'a Dataset<T>,
    clock: C,
    observer: impl FnMut(&UpdateEvent) + 'a,
) -> Result<TrainOutput<T::Label>> {
    Trainer::new(config.clone(), data, clock)?
        .with_observer(observer)
        .run()
}
