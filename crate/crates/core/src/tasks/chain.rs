use crate::error::{Error, Result};
use crate::oracle::{check_query, result_for, OracleResult, Task, TaskKind};

use super::{add_block, block_dot, check_rows, first_argmax, hamming, mixed_radix, saturating_pow};

/// First-order chain labeling.
///
/// Weights split into a unary part (`num_labels` blocks of `unary_dim`) and a
/// transition part (`num_labels^2` entries, row-major `from * K + to`). The
/// loss is the normalized Hamming loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTask {
    num_labels: usize,
    unary_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainInstance {
    /// One feature row per position.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl ChainInstance {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl ChainTask {
    pub fn new(num_labels: usize, unary_dim: usize) -> Result<Self> {
        if num_labels < 2 {
            return Err(Error::invalid("chain task needs at least 2 labels"));
        }
        if unary_dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        Ok(ChainTask {
            num_labels,
            unary_dim,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn unary_dim(&self) -> usize {
        self.unary_dim
    }

    fn transition_index(&self, from: usize, to: usize) -> usize {
        self.num_labels * self.unary_dim + from * self.num_labels + to
    }

    fn check_label(&self, inst: &ChainInstance, label: &[usize]) -> Result<()> {
        if label.len() != inst.len() {
            return Err(Error::invalid(format!(
                "label sequence has length {}, expected {}",
                label.len(),
                inst.len()
            )));
        }
        if let Some(&y) = label.iter().find(|&&y| y >= self.num_labels) {
            return Err(Error::invalid(format!("label {y} out of range")));
        }
        Ok(())
    }

    /// Viterbi maximization of
    /// `sum_l [loss_scale * [y_l != t_l] / L + <w_u(y_l), x_l>] + sum_l w_p(y_l, y_l+1)`.
    ///
    /// Ties prefer the lower label id, both in back-pointers and at the last position.
    fn viterbi(&self, inst: &ChainInstance, w: &[f64], loss_scale: f64) -> Vec<usize> {
        let k = self.num_labels;
        let len = inst.len();
        let per_position = loss_scale / len as f64;
        let node = |l: usize, y: usize| {
            let loss = if y == inst.labels[l] { 0.0 } else { per_position };
            loss + block_dot(w, y, &inst.features[l])
        };

        let mut score: Vec<f64> = (0..k).map(|y| node(0, y)).collect();
        let mut back = vec![vec![0usize; k]; len];
        for (l, back_l) in back.iter_mut().enumerate().skip(1) {
            let mut next = vec![0.0; k];
            for to in 0..k {
                let mut best_from = 0;
                let mut best = f64::NEG_INFINITY;
                for (from, &s) in score.iter().enumerate() {
                    let cand = s + w[self.transition_index(from, to)];
                    if cand > best {
                        best = cand;
                        best_from = from;
                    }
                }
                back_l[to] = best_from;
                next[to] = best + node(l, to);
            }
            score = next;
        }

        let mut labels = vec![0; len];
        labels[len - 1] = first_argmax(score.iter().copied());
        for l in (1..len).rev() {
            labels[l - 1] = back[l][labels[l]];
        }
        labels
    }
}

impl Task for ChainTask {
    type Instance = ChainInstance;
    type Label = Vec<usize>;

    fn kind(&self) -> TaskKind {
        TaskKind::Chain
    }

    fn dim(&self) -> usize {
        self.num_labels * self.unary_dim + self.num_labels * self.num_labels
    }

    fn truth<'a>(&self, instance: &'a ChainInstance) -> &'a Vec<usize> {
        &instance.labels
    }

    fn validate_instance(&self, inst: &ChainInstance) -> Result<()> {
        if inst.labels.is_empty() {
            return Err(Error::invalid("chain has no positions"));
        }
        if inst.features.len() != inst.labels.len() {
            return Err(Error::invalid(format!(
                "chain has {} feature rows but {} labels",
                inst.features.len(),
                inst.labels.len()
            )));
        }
        check_rows(&inst.features, self.unary_dim, "position")?;
        self.check_label(inst, &inst.labels)
    }

    fn loss(&self, inst: &ChainInstance, label: &Vec<usize>) -> Result<f64> {
        self.check_label(inst, label)?;
        hamming(&inst.labels, label)
    }

    fn joint_feature(&self, inst: &ChainInstance, label: &Vec<usize>) -> Result<(Vec<f64>, f64)> {
        self.check_label(inst, label)?;
        let mut phi = vec![0.0; self.dim()];
        for (x, &y) in inst.features.iter().zip(label) {
            add_block(&mut phi, y, x);
        }
        for pair in label.windows(2) {
            phi[self.transition_index(pair[0], pair[1])] += 1.0;
        }
        Ok((phi, 0.0))
    }

    fn max_oracle(
        &self,
        inst: &ChainInstance,
        w: &[f64],
        n: usize,
    ) -> Result<OracleResult<Vec<usize>>> {
        check_query(self, w, n)?;
        let labels = self.viterbi(inst, w, 1.0);
        result_for(self, inst, labels, w, n)
    }

    fn predict(&self, inst: &ChainInstance, w: &[f64]) -> Result<Vec<usize>> {
        check_query(self, w, 1)?;
        Ok(self.viterbi(inst, w, 0.0))
    }

    fn label_space_size(&self, inst: &ChainInstance) -> u128 {
        saturating_pow(self.num_labels, inst.len())
    }

    fn label_at(&self, inst: &ChainInstance, index: u128) -> Vec<usize> {
        mixed_radix(index, self.num_labels, inst.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_oracle, label_plane};
    use crate::tasks::{MulticlassInstance, MulticlassTask};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng, len: usize, k: usize, u: usize) -> ChainInstance {
        ChainInstance {
            features: (0..len)
                .map(|_| (0..u).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            labels: (0..len).map(|_| rng.random_range(0..k)).collect(),
        }
    }

    #[test]
    fn zero_weights_flip_every_position() {
        let task = ChainTask::new(2, 1).unwrap();
        let inst = ChainInstance {
            features: vec![vec![0.5]; 3],
            labels: vec![0, 0, 0],
        };
        let r = task.max_oracle(&inst, &vec![0.0; task.dim()], 4).unwrap();
        assert_eq!(r.label, vec![1, 1, 1]);
        assert!((r.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn single_position_reduces_to_multiclass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chain = ChainTask::new(4, 3).unwrap();
        let mc = MulticlassTask::new(4, 3).unwrap();
        for _ in 0..100 {
            let inst = random_instance(&mut rng, 1, 4, 3);
            let w: Vec<f64> = (0..chain.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let r = chain.max_oracle(&inst, &w, 2).unwrap();
            let mc_inst = MulticlassInstance {
                features: inst.features[0].clone(),
                label: inst.labels[0],
            };
            let m = mc.max_oracle(&mc_inst, &w[..12], 2).unwrap();
            assert_eq!(r.label, vec![m.label]);
            assert!((r.value - m.value).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_feature_transition_slot() {
        let task = ChainTask::new(2, 1).unwrap();
        let inst = ChainInstance {
            features: vec![vec![2.0], vec![3.0]],
            labels: vec![0, 0],
        };
        let (phi, s) = task.joint_feature(&inst, &vec![0, 1]).unwrap();
        assert_eq!(phi, vec![2.0, 3.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s, 0.0);
        assert!(task.joint_feature(&inst, &vec![0]).is_err());
        assert!(task.joint_feature(&inst, &vec![0, 2]).is_err());
    }

    #[test]
    fn plane_identity() {
        let task = ChainTask::new(2, 1).unwrap();
        let inst = ChainInstance {
            features: vec![vec![2.0], vec![3.0]],
            labels: vec![0, 0],
        };
        let p = label_plane(&task, &inst, &vec![1, 1], 2).unwrap();
        // (phi(11) - phi(00)) / 2 = ([0,5,0,0,0,1] - [5,0,1,0,0,0]) / 2
        assert_eq!(p.star(), &[-2.5, 2.5, -0.5, 0.0, 0.0, 0.5]);
        assert_eq!(p.offset(), 0.5);
    }

    #[test]
    fn two_by_two_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let task = ChainTask::new(2, 2).unwrap();
        for _ in 0..200 {
            let inst = random_instance(&mut rng, 2, 2, 2);
            let w: Vec<f64> = (0..task.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = task.max_oracle(&inst, &w, 1).unwrap();
            let slow = brute_force_oracle(&task, &inst, &w, 1, 1_000_000).unwrap();
            assert_eq!(fast.label, slow.label);
            assert_eq!(fast.value, slow.value);
        }
    }

    #[test]
    fn length_eight_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let task = ChainTask::new(4, 2).unwrap();
        for _ in 0..10 {
            let inst = random_instance(&mut rng, 8, 4, 2);
            let w: Vec<f64> = (0..task.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = task.max_oracle(&inst, &w, 3).unwrap();
            let slow = brute_force_oracle(&task, &inst, &w, 3, 1_000_000).unwrap();
            assert_eq!(fast.value, slow.value);
        }
    }

    #[test]
    fn enumeration_cap() {
        let task = ChainTask::new(4, 1).unwrap();
        let inst = ChainInstance {
            features: vec![vec![0.0]; 11],
            labels: vec![0; 11],
        };
        let err = brute_force_oracle(&task, &inst, &vec![0.0; task.dim()], 1, 1_000_000);
        assert!(matches!(err, Err(Error::Capacity { .. })));
    }

    #[test]
    fn invalid_instances() {
        let task = ChainTask::new(3, 2).unwrap();
        let bad_len = ChainInstance {
            features: vec![vec![0.0, 0.0]; 2],
            labels: vec![0, 1, 2],
        };
        assert!(task.validate_instance(&bad_len).is_err());
        let bad_label = ChainInstance {
            features: vec![vec![0.0, 0.0]],
            labels: vec![3],
        };
        assert!(task.validate_instance(&bad_label).is_err());
        let empty = ChainInstance { features: vec![], labels: vec![] };
        assert!(task.validate_instance(&empty).is_err());
    }
}
