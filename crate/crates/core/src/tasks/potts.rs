use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::maxflow::{minimize_binary_energy, BinaryEnergy};
use crate::oracle::{check_query, result_for, OracleResult, Task, TaskKind};

use super::{add_block, block_dot, check_rows, hamming, mixed_radix, saturating_pow};

/// Binary segmentation of a graph with a fixed Potts smoothness term.
///
/// The score of a labeling is `<w, phi(x, y)> - pairwise_weight * Theta(y)`,
/// where `Theta(y)` counts edges whose endpoints disagree. The Potts part has
/// no learned weight, so it only enters the plane offsets. The loss is the
/// normalized Hamming loss over nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPottsTask {
    unary_dim: usize,
    pairwise_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    /// One feature row per node.
    pub features: Vec<Vec<f64>>,
    /// Undirected edges between distinct nodes.
    pub edges: Vec<(usize, usize)>,
    /// Ground truth, each entry 0 or 1.
    pub labels: Vec<usize>,
}

impl GraphInstance {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of edges whose endpoints carry different labels.
    pub fn disagreements(&self, labels: &[usize]) -> usize {
        self.edges
            .iter()
            .filter(|&&(k, l)| labels[k] != labels[l])
            .count()
    }
}

impl BinaryPottsTask {
    pub fn new(unary_dim: usize) -> Result<Self> {
        Self::with_pairwise_weight(unary_dim, 1.0)
    }

    /// The oracle stays submodular only for non-negative weights.
    pub fn with_pairwise_weight(unary_dim: usize, pairwise_weight: f64) -> Result<Self> {
        if unary_dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        if !(pairwise_weight >= 0.0 && pairwise_weight.is_finite()) {
            return Err(Error::invalid(format!(
                "Potts weight {pairwise_weight} makes the oracle non-submodular"
            )));
        }
        Ok(BinaryPottsTask {
            unary_dim,
            pairwise_weight,
        })
    }

    pub fn unary_dim(&self) -> usize {
        self.unary_dim
    }

    pub fn pairwise_weight(&self) -> f64 {
        self.pairwise_weight
    }

    fn check_label(&self, inst: &GraphInstance, label: &[usize]) -> Result<()> {
        if label.len() != inst.node_count() {
            return Err(Error::invalid(format!(
                "labeling has {} nodes, expected {}",
                label.len(),
                inst.node_count()
            )));
        }
        if let Some(&y) = label.iter().find(|&&y| y > 1) {
            return Err(Error::invalid(format!("binary label {y} out of range")));
        }
        Ok(())
    }

    /// Minimizes the negated loss-augmented score with one min-cut.
    fn solve(&self, inst: &GraphInstance, w: &[f64], loss_scale: f64) -> Result<Vec<usize>> {
        let per_node = loss_scale / inst.node_count() as f64;
        let unary = inst
            .features
            .iter()
            .zip(&inst.labels)
            .map(|(x, &t)| {
                let cost = |y: usize| {
                    let loss = if y == t { 0.0 } else { per_node };
                    -(loss + block_dot(w, y, x))
                };
                [cost(0), cost(1)]
            })
            .collect();
        let pairwise = inst
            .edges
            .iter()
            .map(|&(k, l)| (k, l, self.pairwise_weight))
            .collect();
        let energy = BinaryEnergy::new(unary, pairwise)?;
        let (labels, _) = minimize_binary_energy(&energy)?;
        Ok(labels.into_iter().map(usize::from).collect())
    }
}

impl Task for BinaryPottsTask {
    type Instance = GraphInstance;
    type Label = Vec<usize>;

    fn kind(&self) -> TaskKind {
        TaskKind::BinaryPotts
    }

    fn dim(&self) -> usize {
        2 * self.unary_dim
    }

    fn truth<'a>(&self, instance: &'a GraphInstance) -> &'a Vec<usize> {
        &instance.labels
    }

    fn validate_instance(&self, inst: &GraphInstance) -> Result<()> {
        if inst.labels.is_empty() {
            return Err(Error::invalid("graph has no nodes"));
        }
        if inst.features.len() != inst.labels.len() {
            return Err(Error::invalid(format!(
                "graph has {} feature rows but {} labels",
                inst.features.len(),
                inst.labels.len()
            )));
        }
        check_rows(&inst.features, self.unary_dim, "node")?;
        self.check_label(inst, &inst.labels)?;
        let mut seen = HashSet::new();
        for &(k, l) in &inst.edges {
            if k == l {
                return Err(Error::invalid(format!("self-loop on node {k}")));
            }
            if k >= inst.node_count() || l >= inst.node_count() {
                return Err(Error::invalid(format!("edge ({k}, {l}) references a missing node")));
            }
            if !seen.insert((k.min(l), k.max(l))) {
                return Err(Error::invalid(format!("duplicate edge ({k}, {l})")));
            }
        }
        Ok(())
    }

    fn loss(&self, inst: &GraphInstance, label: &Vec<usize>) -> Result<f64> {
        self.check_label(inst, label)?;
        hamming(&inst.labels, label)
    }

    fn joint_feature(&self, inst: &GraphInstance, label: &Vec<usize>) -> Result<(Vec<f64>, f64)> {
        self.check_label(inst, label)?;
        let mut phi = vec![0.0; self.dim()];
        for (x, &y) in inst.features.iter().zip(label) {
            add_block(&mut phi, y, x);
        }
        let potts = -self.pairwise_weight * inst.disagreements(label) as f64;
        Ok((phi, potts))
    }

    fn max_oracle(
        &self,
        inst: &GraphInstance,
        w: &[f64],
        n: usize,
    ) -> Result<OracleResult<Vec<usize>>> {
        check_query(self, w, n)?;
        let labels = self.solve(inst, w, 1.0)?;
        result_for(self, inst, labels, w, n)
    }

    fn predict(&self, inst: &GraphInstance, w: &[f64]) -> Result<Vec<usize>> {
        check_query(self, w, 1)?;
        self.solve(inst, w, 0.0)
    }

    fn label_space_size(&self, inst: &GraphInstance) -> u128 {
        saturating_pow(2, inst.node_count())
    }

    fn label_at(&self, inst: &GraphInstance, index: u128) -> Vec<usize> {
        mixed_radix(index, 2, inst.node_count())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_oracle, label_plane};
    use crate::tasks::MulticlassInstance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_nodes_zero_weights() {
        let task = BinaryPottsTask::new(1).unwrap();
        let inst = GraphInstance {
            features: vec![vec![1.0], vec![1.0]],
            edges: vec![(0, 1)],
            labels: vec![0, 0],
        };
        // 00 -> 0, 01 and 10 -> 1/2 - 1, 11 -> 1
        let r = task.max_oracle(&inst, &[0.0, 0.0], 1).unwrap();
        assert_eq!(r.label, vec![1, 1]);
        assert_eq!(r.value, 1.0);
        let slow = brute_force_oracle(&task, &inst, &[0.0, 0.0], 1, 16).unwrap();
        assert_eq!(slow.label, vec![1, 1]);
    }

    #[test]
    fn edgeless_graph_is_nodewise_multiclass() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let task = BinaryPottsTask::new(2).unwrap();
        for _ in 0..50 {
            let len = rng.random_range(1..6);
            let inst = GraphInstance {
                features: (0..len)
                    .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    .collect(),
                edges: vec![],
                labels: (0..len).map(|_| rng.random_range(0..2)).collect(),
            };
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = task.max_oracle(&inst, &w, 1).unwrap();
            for l in 0..len {
                // Node-wise problem with the loss scaled by 1/L.
                let node = MulticlassInstance {
                    features: inst.features[l].clone(),
                    label: inst.labels[l],
                };
                let rival = 1 - node.label;
                let margin = 1.0 / len as f64
                    + block_dot(&w, rival, &node.features)
                    - block_dot(&w, node.label, &node.features);
                let expect = if margin > 0.0 { rival } else { node.label };
                assert_eq!(r.label[l], expect);
            }
        }
    }

    #[test]
    fn constant_labeling_has_zero_potts_term() {
        let task = BinaryPottsTask::new(1).unwrap();
        let inst = GraphInstance {
            features: vec![vec![1.0]; 3],
            edges: vec![(0, 1), (1, 2)],
            labels: vec![0, 1, 0],
        };
        assert_eq!(task.joint_feature(&inst, &vec![1, 1, 1]).unwrap().1, 0.0);
        assert_eq!(task.joint_feature(&inst, &vec![0, 1, 0]).unwrap().1, -2.0);
    }

    #[test]
    fn plane_offset_includes_potts_difference() {
        let task = BinaryPottsTask::new(1).unwrap();
        let inst = GraphInstance {
            features: vec![vec![1.0], vec![2.0]],
            edges: vec![(0, 1)],
            labels: vec![0, 1],
        };
        let p = label_plane(&task, &inst, &vec![1, 1], 2).unwrap();
        // loss 1/2, Potts score 0 - (-1) = 1
        assert_eq!(p.offset(), 0.75);
        assert_eq!(p.star(), &[-0.5, 0.5]);
    }

    #[test]
    fn grid_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let task = BinaryPottsTask::new(2).unwrap();
        let mut edges = Vec::new();
        for v in 0..9 {
            if v % 3 < 2 {
                edges.push((v, v + 1));
            }
            if v + 3 < 9 {
                edges.push((v, v + 3));
            }
        }
        for _ in 0..30 {
            let inst = GraphInstance {
                features: (0..9)
                    .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    .collect(),
                edges: edges.clone(),
                labels: (0..9).map(|_| rng.random_range(0..2)).collect(),
            };
            let w: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let fast = task.max_oracle(&inst, &w, 5).unwrap();
            let slow = brute_force_oracle(&task, &inst, &w, 5, 1 << 20).unwrap();
            assert_eq!(fast.value, slow.value);
            assert!(fast.value >= 0.0);
        }
    }

    #[test]
    fn invalid_graphs() {
        let task = BinaryPottsTask::new(1).unwrap();
        let base = GraphInstance {
            features: vec![vec![0.0]; 3],
            edges: vec![(0, 1)],
            labels: vec![0, 1, 0],
        };
        assert!(task.validate_instance(&base).is_ok());
        let mut g = base.clone();
        g.edges.push((2, 2));
        assert!(task.validate_instance(&g).is_err());
        let mut g = base.clone();
        g.edges.push((1, 0));
        assert!(task.validate_instance(&g).is_err());
        let mut g = base.clone();
        g.labels[0] = 2;
        assert!(task.validate_instance(&g).is_err());
        assert!(BinaryPottsTask::with_pairwise_weight(1, -1.0).is_err());
    }
}
