//! Decides whether another approximate pass is worth its time.
//!
//! After each approximate pass the gain rate of that pass is compared with
//! the gain rate of the whole outer iteration so far, exact pass included.
//! Another pass is made only while the most recent one was steeper.

/// Durations are clamped to at least this many seconds before dividing.
pub const MIN_DURATION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationProgress {
    /// Dual bound when the current outer iteration started.
    pub iter_start_bound: f64,
    /// Clock reading (seconds) when the current outer iteration started.
    pub iter_start_time: f64,
    pub last_pass_gain: f64,
    /// Seconds spent in the last approximate pass.
    pub last_pass_duration: f64,
}

pub fn should_continue_approx(p: &IterationProgress, now: f64, current_bound: f64) -> bool {
    if p.last_pass_gain <= 0.0 {
        return false;
    }
    let last_rate = p.last_pass_gain / p.last_pass_duration.max(MIN_DURATION);
    let total_gain = current_bound - p.iter_start_bound;
    let total_rate = total_gain / (now - p.iter_start_time).max(MIN_DURATION);
    last_rate > total_rate
}
