//! Exact s-t max-flow / min-cut and submodular binary energy minimization.
//!
//! Flow is computed with Dinic's algorithm on `f64` capacities. Residual
//! capacities at or below [`FLOW_EPS`] count as saturated. The returned cut
//! is the canonical one: nodes reachable from the source in the final
//! residual graph are source-side, all others sink-side.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const FLOW_EPS: f64 = 1e-12;

/// A directed arc `from -> to` with a non-negative capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
}

/// Flow network over `node_count` non-terminal nodes `0..node_count` plus
/// the terminals [`FlowNetwork::source`] and [`FlowNetwork::sink`].
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork {
            node_count,
            arcs: Vec::new(),
        }
    }

    pub fn from_arcs(node_count: usize, arcs: impl IntoIterator<Item = Arc>) -> Result<Self> {
        let mut net = FlowNetwork::new(node_count);
        for a in arcs {
            net.add_arc(a.from, a.to, a.capacity)?;
        }
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.node_count
    }

    pub fn sink(&self) -> usize {
        self.node_count + 1
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        let total = self.node_count + 2;
        if from >= total || to >= total {
            return Err(Error::invalid(format!("arc ({from}, {to}) references a missing node")));
        }
        if !(capacity >= 0.0 && capacity.is_finite()) {
            return Err(Error::invalid(format!(
                "arc capacity must be non-negative and finite, got {capacity}"
            )));
        }
        if from == self.source() && to == self.sink() {
            return Err(Error::invalid("direct source-sink arcs are not allowed"));
        }
        if from == to {
            return Err(Error::invalid(format!("self-loop on node {from}")));
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(())
    }

    /// Total capacity of arcs leaving the source side of `source_side`
    /// (indexed by non-terminal node) toward the sink side.
    pub fn cut_capacity(&self, source_side: &[bool]) -> f64 {
        debug_assert_eq!(source_side.len(), self.node_count);
        let side = |v: usize| {
            if v == self.source() {
                true
            } else if v == self.sink() {
                false
            } else {
                source_side[v]
            }
        };
        self.arcs
            .iter()
            .filter(|a| side(a.from) && !side(a.to))
            .map(|a| a.capacity)
            .sum()
    }

    /// Capacity leaving the source.
    pub fn source_capacity(&self) -> f64 {
        let s = self.source();
        self.arcs.iter().filter(|a| a.from == s).map(|a| a.capacity).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCut {
    pub flow_value: f64,
    /// `true` for non-terminal nodes on the source side of the canonical cut.
    pub source_side: Vec<bool>,
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn build(net: &FlowNetwork) -> Self {
        let total = net.node_count + 2;
        let mut r = Residual {
            head: Vec::with_capacity(2 * net.arcs.len()),
            cap: Vec::with_capacity(2 * net.arcs.len()),
            adj: vec![Vec::new(); total],
        };
        for a in &net.arcs {
            if a.capacity <= 0.0 {
                continue;
            }
            let e = r.head.len();
            r.head.push(a.to);
            r.cap.push(a.capacity);
            r.adj[a.from].push(e);
            r.head.push(a.from);
            r.cap.push(0.0);
            r.adj[a.to].push(e + 1);
        }
        r
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[v] {
                let u = self.head[e];
                if self.cap[e] > FLOW_EPS && level[u] == usize::MAX {
                    level[u] = level[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        level
    }

    fn augment(&mut self, v: usize, sink: usize, limit: f64, level: &[usize], next: &mut [usize]) -> f64 {
        if v == sink {
            return limit;
        }
        while next[v] < self.adj[v].len() {
            let e = self.adj[v][next[v]];
            let u = self.head[e];
            if self.cap[e] > FLOW_EPS && level[u] == level[v] + 1 {
                let pushed = self.augment(u, sink, limit.min(self.cap[e]), level, next);
                if pushed > 0.0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[v] += 1;
        }
        0.0
    }
}

/// Maximum s-t flow and the canonical minimum cut.
pub fn max_flow(net: &FlowNetwork) -> Result<MinCut> {
    if let Some(a) = net.arcs.iter().find(|a| !(a.capacity >= 0.0 && a.capacity.is_finite())) {
        return Err(Error::invalid(format!("invalid arc capacity {}", a.capacity)));
    }
    let (s, t) = (net.source(), net.sink());
    let mut res = Residual::build(net);
    let mut flow = 0.0;
    loop {
        let level = res.levels(s);
        if level[t] == usize::MAX {
            let source_side = level[..net.node_count]
                .iter()
                .map(|&l| l != usize::MAX)
                .collect();
            return Ok(MinCut {
                flow_value: flow,
                source_side,
            });
        }
        let mut next = vec![0; res.adj.len()];
        loop {
            let pushed = res.augment(s, t, f64::INFINITY, &level, &mut next);
            if pushed <= 0.0 {
                break;
            }
            flow += pushed;
        }
    }
}

/// Binary pairwise energy
/// `E(y) = sum_l unary[l][y_l] + sum_(k,l,w) w [y_k != y_l]`, with `w >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEnergy {
    pub unary: Vec<[f64; 2]>,
    pub pairwise: Vec<(usize, usize, f64)>,
}

impl BinaryEnergy {
    pub fn new(unary: Vec<[f64; 2]>, pairwise: Vec<(usize, usize, f64)>) -> Result<Self> {
        let e = BinaryEnergy { unary, pairwise };
        e.validate()?;
        Ok(e)
    }

    pub fn node_count(&self) -> usize {
        self.unary.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.unary.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("unary costs must be finite"));
        }
        for &(k, l, w) in &self.pairwise {
            if k >= self.unary.len() || l >= self.unary.len() || k == l {
                return Err(Error::invalid(format!("invalid pairwise term ({k}, {l})")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!(
                    "pairwise weight {w} on ({k}, {l}) is not submodular"
                )));
            }
        }
        Ok(())
    }

    pub fn energy(&self, labels: &[u8]) -> f64 {
        debug_assert_eq!(labels.len(), self.unary.len());
        let unary: f64 = self
            .unary
            .iter()
            .zip(labels)
            .map(|(c, &y)| c[y as usize])
            .sum();
        let pairwise: f64 = self
            .pairwise
            .iter()
            .filter(|&&(k, l, _)| labels[k] != labels[l])
            .map(|&(_, _, w)| w)
            .sum();
        unary + pairwise
    }
}

/// Cut graph for `e`: label 0 is the source side, label 1 the sink side.
///
/// Returns the network and a constant such that for every labeling the
/// capacity of the induced cut plus the constant equals its energy.
pub fn energy_to_network(e: &BinaryEnergy) -> Result<(FlowNetwork, f64)> {
    e.validate()?;
    let mut net = FlowNetwork::new(e.node_count());
    let (s, t) = (net.source(), net.sink());
    let mut constant = 0.0;
    for (v, &[c0, c1]) in e.unary.iter().enumerate() {
        if c0 > c1 {
            // Cut v -> t when v stays on the source side (label 0).
            net.add_arc(v, t, c0 - c1)?;
            constant += c1;
        } else {
            if c1 > c0 {
                net.add_arc(s, v, c1 - c0)?;
            }
            constant += c0;
        }
    }
    for &(k, l, w) in &e.pairwise {
        if w > 0.0 {
            net.add_arc(k, l, w)?;
            net.add_arc(l, k, w)?;
        }
    }
    Ok((net, constant))
}

/// Global minimizer of a submodular binary energy via one min-cut.
pub fn minimize_binary_energy(e: &BinaryEnergy) -> Result<(Vec<u8>, f64)> {
    let (net, _) = energy_to_network(e)?;
    let cut = max_flow(&net)?;
    let labels: Vec<u8> = cut.source_side.iter().map(|&src| u8::from(!src)).collect();
    let energy = e.energy(&labels);
    Ok((labels, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_min_cut(net: &FlowNetwork) -> f64 {
        let n = net.node_count();
        (0u32..1 << n)
            .map(|mask| {
                let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
                net.cut_capacity(&side)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn brute_min_energy(e: &BinaryEnergy) -> f64 {
        let n = e.node_count();
        (0u32..1 << n)
            .map(|mask| {
                let y: Vec<u8> = (0..n).map(|v| (mask >> v & 1) as u8).collect();
                e.energy(&y)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn random_network(rng: &mut ChaCha8Rng) -> FlowNetwork {
        let n = rng.random_range(1..=12);
        let mut net = FlowNetwork::new(n);
        let (s, t) = (net.source(), net.sink());
        let arcs = rng.random_range(0..4 * n);
        for _ in 0..arcs {
            let from = rng.random_range(0..n + 2);
            let to = rng.random_range(0..n + 2);
            if from == to || (from == s && to == t) || from == t || to == s {
                continue;
            }
            let cap = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..5.0) };
            net.add_arc(from, to, cap).unwrap();
        }
        net
    }

    #[test]
    fn empty_network() {
        let net = FlowNetwork::new(3);
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 0.0);
        assert_eq!(cut.source_side, vec![false; 3]);
    }

    #[test]
    fn single_path_bottleneck() {
        let mut net = FlowNetwork::new(1);
        net.add_arc(net.source(), 0, 3.0).unwrap();
        net.add_arc(0, net.sink(), 2.0).unwrap();
        let cut = max_flow(&net).unwrap();
        assert_eq!(cut.flow_value, 2.0);
        assert_eq!(cut.source_side, vec![true]);
        assert_eq!(net.cut_capacity(&cut.source_side), 2.0);
    }

    #[test]
    fn invalid_arcs_rejected() {
        let mut net = FlowNetwork::new(2);
        assert!(net.add_arc(0, 1, -1.0).is_err());
        assert!(net.add_arc(0, 1, f64::NAN).is_err());
        assert!(net.add_arc(net.source(), net.sink(), 1.0).is_err());
        assert!(net.add_arc(0, 7, 1.0).is_err());
        assert!(net.add_arc(1, 1, 1.0).is_err());
    }

    #[test]
    fn random_networks_match_exhaustive_cuts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let net = random_network(&mut rng);
            let cut = max_flow(&net).unwrap();
            let brute = brute_min_cut(&net);
            assert!((cut.flow_value - brute).abs() <= 1e-9, "{} vs {brute}", cut.flow_value);
            assert!((net.cut_capacity(&cut.source_side) - cut.flow_value).abs() <= 1e-9);
            assert!(cut.flow_value <= net.source_capacity() + 1e-9);
        }
    }

    #[test]
    fn single_node_energy() {
        let e = BinaryEnergy::new(vec![[5.0, 3.0]], vec![]).unwrap();
        assert_eq!(minimize_binary_energy(&e).unwrap(), (vec![1], 3.0));
        let e = BinaryEnergy::new(vec![[1.0, 3.0]], vec![]).unwrap();
        assert_eq!(minimize_binary_energy(&e).unwrap(), (vec![0], 1.0));
    }

    #[test]
    fn strong_coupling_forces_agreement() {
        let e = BinaryEnergy::new(vec![[0.0, 0.2], [0.3, 0.0]], vec![(0, 1, 10.0)]).unwrap();
        let (y, energy) = minimize_binary_energy(&e).unwrap();
        assert_eq!(y[0], y[1]);
        assert_eq!(energy, brute_min_energy(&e));
    }

    #[test]
    fn zero_energy_is_all_sink_side() {
        let e = BinaryEnergy::new(vec![[0.0, 0.0]; 4], vec![(0, 1, 0.0), (2, 3, 0.0)]).unwrap();
        let (y, energy) = minimize_binary_energy(&e).unwrap();
        assert_eq!(y, vec![1; 4]);
        assert_eq!(energy, 0.0);
    }

    #[test]
    fn edgeless_energy_is_independent_argmin() {
        let unary = vec![[0.5, -0.1], [-2.0, 1.0], [0.0, 0.3]];
        let e = BinaryEnergy::new(unary.clone(), vec![]).unwrap();
        let (y, _) = minimize_binary_energy(&e).unwrap();
        let expect: Vec<u8> = unary.iter().map(|c| u8::from(c[1] < c[0])).collect();
        assert_eq!(y, expect);
    }

    #[test]
    fn negative_pairwise_is_rejected() {
        assert!(BinaryEnergy::new(vec![[0.0, 0.0]; 2], vec![(0, 1, -1.0)]).is_err());
    }

    #[test]
    fn network_cut_equals_energy_plus_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let unary = (0..n)
                .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
                .collect();
            let mut pairwise = Vec::new();
            for k in 0..n {
                for l in k + 1..n {
                    if rng.random_bool(0.4) {
                        pairwise.push((k, l, rng.random_range(0.0..1.5)));
                    }
                }
            }
            let e = BinaryEnergy::new(unary, pairwise).unwrap();
            let (net, constant) = energy_to_network(&e).unwrap();
            for mask in 0u32..1 << n {
                let y: Vec<u8> = (0..n).map(|v| (mask >> v & 1) as u8).collect();
                let side: Vec<bool> = y.iter().map(|&l| l == 0).collect();
                let lhs = net.cut_capacity(&side) + constant;
                assert!((lhs - e.energy(&y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn grid_energy_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let v = r * 3 + c;
                if c + 1 < 3 {
                    edges.push((v, v + 1, 0.5));
                }
                if r + 1 < 3 {
                    edges.push((v, v + 3, 0.5));
                }
            }
        }
        for _ in 0..100 {
            let unary = (0..9)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let e = BinaryEnergy::new(unary, edges.clone()).unwrap();
            let (_, energy) = minimize_binary_energy(&e).unwrap();
            assert!((energy - brute_min_energy(&e)).abs() < 1e-12);
        }
    }
}
