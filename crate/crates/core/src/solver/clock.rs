//! Time sources for the training loop.

use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockEvent {
    ExactOracleCall,
    ApproxBlockUpdate,
}

/// A monotonic clock reading seconds. Solvers report the work they do
/// through [`Clock::charge`], which simulated clocks use to advance.
pub trait Clock {
    fn now(&mut self) -> f64;

    fn charge(&mut self, _event: ClockEvent) {}
}

#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock {
            start: Instant::now(),
        }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&mut self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Deterministic clock that only moves when work is charged to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedClock {
    pub exact_call_cost: f64,
    pub approx_update_cost: f64,
    time: f64,
}

impl SimulatedClock {
    pub fn new(exact_call_cost: f64, approx_update_cost: f64) -> Self {
        SimulatedClock {
            exact_call_cost,
            approx_update_cost,
            time: 0.0,
        }
    }
}

impl Clock for SimulatedClock {
    fn now(&mut self) -> f64 {
        self.time
    }

    fn charge(&mut self, event: ClockEvent) {
        self.time += match event {
            ClockEvent::ExactOracleCall => self.exact_call_cost,
            ClockEvent::ApproxBlockUpdate => self.approx_update_cost,
        };
    }
}

impl<C: Clock + ?Sized> Clock for &mut C {
    fn now(&mut self) -> f64 {
        (**self).now()
    }

    fn charge(&mut self, event: ClockEvent) {
        (**self).charge(event)
    }
}
