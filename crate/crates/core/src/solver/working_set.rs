//! Per-example caches of oracle planes with activity stamps.

use crate::plane::Plane;

/// Planes closer than this in every component are treated as the same plane.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CachedPlane<L> {
    pub plane: Plane,
    /// Maximizing label the plane was produced for.
    pub label: L,
    /// Global insertion sequence number; smaller is older.
    pub inserted: u64,
    /// Outer iteration in which the plane was last returned as a maximizer.
    pub last_active: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Inserted,
    /// An equal plane was already cached at this index; its stamp was refreshed.
    Refreshed(usize),
    /// Capacity is zero.
    Disabled,
}

/// Bounded working set `W_i`.
#[derive(Debug, Clone)]
pub struct WorkingSet<L> {
    entries: Vec<CachedPlane<L>>,
    capacity: usize,
}

impl<L: Clone> WorkingSet<L> {
    pub fn new(capacity: usize) -> Self {
        WorkingSet {
            entries: Vec::new(),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CachedPlane<L>] {
        &self.entries
    }

    /// Adds a plane stamped active at `stamp`, then drops the longest-inactive
    /// entry if the capacity is exceeded (older insertion loses ties).
    pub fn insert(&mut self, plane: Plane, label: L, stamp: usize, seq: u64) -> Insertion {
        if self.capacity == 0 {
            return Insertion::Disabled;
        }
        if let Some(idx) = self
            .entries
            .iter()
            .position(|e| e.plane.max_abs_diff(&plane) <= DUPLICATE_TOL)
        {
            self.mark_active(idx, stamp);
            return Insertion::Refreshed(idx);
        }
        self.entries.push(CachedPlane {
            plane,
            label,
            inserted: seq,
            last_active: stamp,
        });
        while self.entries.len() > self.capacity {
            let stale = self
                .entries
                .iter()
                .enumerate()
                .min_by_key(|(_, e)| (e.last_active, e.inserted))
                .map(|(i, _)| i)
                .expect("non-empty");
            self.entries.remove(stale);
        }
        Insertion::Inserted
    }

    /// Index of the plane maximizing `<plane, [w 1]>`; the first maximum wins.
    pub fn best(&self, w: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_value = f64::NEG_INFINITY;
        for (i, e) in self.entries.iter().enumerate() {
            let v = e.plane.eval(w);
            if best.is_none() || v > best_value {
                best = Some(i);
                best_value = v;
            }
        }
        best
    }

    pub fn mark_active(&mut self, idx: usize, stamp: usize) {
        let e = &mut self.entries[idx];
        e.last_active = e.last_active.max(stamp);
    }

    /// Removes planes not active during the last `horizon` outer iterations,
    /// i.e. those with `current - last_active >= horizon`. Returns how many.
    pub fn evict_inactive(&mut self, current: usize, horizon: usize) -> usize {
        let before = self.entries.len();
        self.entries
            .retain(|e| current.saturating_sub(e.last_active) < horizon);
        before - self.entries.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, o: f64) -> Plane {
        Plane::new(vec![x], o).unwrap()
    }

    #[test]
    fn zero_capacity_stays_empty() {
        let mut ws = WorkingSet::new(0);
        assert_eq!(ws.insert(p(1.0, 0.0), 0u8, 1, 0), Insertion::Disabled);
        assert!(ws.is_empty());
        assert_eq!(ws.best(&[1.0]), None);
    }

    #[test]
    fn capacity_one_keeps_latest() {
        let mut ws = WorkingSet::new(1);
        for (k, stamp) in [(1.0, 1), (2.0, 1), (3.0, 2)] {
            ws.insert(p(k, 0.0), k as u8, stamp, k as u64);
            assert_eq!(ws.len(), 1);
            assert_eq!(ws.entries()[0].plane, p(k, 0.0));
        }
    }

    #[test]
    fn duplicates_refresh_stamp() {
        let mut ws = WorkingSet::new(5);
        ws.insert(p(1.0, 0.5), 0u8, 1, 0);
        assert_eq!(ws.insert(p(1.0, 0.5), 0u8, 4, 1), Insertion::Refreshed(0));
        assert_eq!(ws.len(), 1);
        assert_eq!(ws.entries()[0].last_active, 4);
    }

    #[test]
    fn longest_inactive_is_dropped() {
        let mut ws = WorkingSet::new(2);
        ws.insert(p(1.0, 0.0), 1u8, 3, 0);
        ws.insert(p(2.0, 0.0), 2u8, 1, 1);
        ws.insert(p(3.0, 0.0), 3u8, 4, 2);
        let labels: Vec<u8> = ws.entries().iter().map(|e| e.label).collect();
        assert_eq!(labels, vec![1, 3]);
    }

    #[test]
    fn best_prefers_first_maximum() {
        let mut ws = WorkingSet::new(4);
        ws.insert(p(1.0, 0.0), 0u8, 1, 0);
        ws.insert(p(0.0, 1.0), 1u8, 1, 1);
        ws.insert(p(0.5, 0.0), 2u8, 1, 2);
        assert_eq!(ws.best(&[1.0]), Some(0));
        assert_eq!(ws.best(&[2.0]), Some(0));
        assert_eq!(ws.best(&[-1.0]), Some(1));
    }

    #[test]
    fn eviction_horizon() {
        let mut ws = WorkingSet::new(4);
        ws.insert(p(1.0, 0.0), 0u8, 2, 0);
        assert_eq!(ws.evict_inactive(4, 3), 0);
        assert_eq!(ws.evict_inactive(5, 3), 1);
    }
}
