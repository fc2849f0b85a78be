use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::AnyDataset;
use crate::error::{Error, Result};
use crate::oracle::{Dataset, TaskKind};
use crate::tasks::{
    BinaryPottsTask, ChainInstance, ChainTask, GraphInstance, MulticlassInstance, MulticlassTask,
};

/// Size parameters for [`generate`]. Fields a task does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    /// Classes (multiclass) or labels per position (chain).
    pub num_labels: usize,
    /// Chain length.
    pub len: usize,
    /// Per-example or per-part feature dimension.
    pub dim: usize,
    pub rows: usize,
    pub cols: usize,
    /// Grid smoothing in `[0, 1]`; 1 gives a constant ground truth.
    pub smoothing: f64,
    /// Distance of the class means from the origin; `None` picks
    /// [`default_separation`].
    pub separation: Option<f64>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n: 20,
            num_labels: 3,
            len: 5,
            dim: 6,
            rows: 4,
            cols: 4,
            smoothing: 0.5,
            separation: None,
        }
    }
}

/// Multiclass clusters are well separated; chain and grid unaries are noisy
/// so that the pairwise terms matter.
pub fn default_separation(kind: TaskKind) -> f64 {
    match kind {
        TaskKind::Multiclass => 4.0,
        TaskKind::Chain | TaskKind::BinaryPotts => 1.0,
    }
}

pub fn generate(kind: TaskKind, p: &GenParams, seed: u64) -> Result<AnyDataset> {
    let separation = p.separation.unwrap_or(default_separation(kind));
    Ok(match kind {
        TaskKind::Multiclass => {
            AnyDataset::Multiclass(multiclass(p.n, p.num_labels, p.dim, separation, seed)?)
        }
        TaskKind::Chain => AnyDataset::Chain(chain(
            p.n,
            p.len,
            p.num_labels,
            p.dim,
            separation,
            seed,
        )?),
        TaskKind::BinaryPotts => AnyDataset::BinaryPotts(binary_potts_grid(
            p.n,
            p.rows,
            p.cols,
            p.dim,
            p.smoothing,
            separation,
            seed,
        )?),
    })
}

/// Vertex `k` of a regular `num_classes`-simplex centred at the origin with
/// unit circumradius, embedded in the first `num_classes - 1` coordinates of
/// `R^dim` (Helmert basis).
pub fn simplex_vertex(k: usize, num_classes: usize, dim: usize) -> Vec<f64> {
    assert!(k < num_classes && dim + 1 >= num_classes);
    let radius = (1.0 - 1.0 / num_classes as f64).sqrt();
    let mut v = vec![0.0; dim];
    for j in 1..num_classes {
        let norm = ((j * (j + 1)) as f64).sqrt();
        v[j - 1] = match k.cmp(&j) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -(j as f64) / norm,
            std::cmp::Ordering::Greater => 0.0,
        } / radius;
    }
    v
}

fn check_common(n: usize, separation: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("need at least one example"));
    }
    if !separation.is_finite() {
        return Err(Error::invalid("separation must be finite"));
    }
    Ok(())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn noisy_point(rng: &mut ChaCha8Rng, mean: &[f64]) -> Vec<f64> {
    mean.iter().map(|m| m + normal(rng)).collect()
}

/// `K` unit-variance Gaussian clusters with means on a simplex of radius
/// `separation`.
pub fn multiclass(
    n: usize,
    num_classes: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset<MulticlassTask>> {
    check_common(n, separation)?;
    let task = MulticlassTask::new(num_classes, dim)?;
    if dim + 1 < num_classes {
        return Err(Error::invalid(format!(
            "{num_classes} clusters need dimension at least {}",
            num_classes - 1
        )));
    }
    let means = cluster_means(num_classes, dim, separation);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n)
        .map(|_| {
            let label = rng.random_range(0..num_classes);
            MulticlassInstance {
                features: noisy_point(&mut rng, &means[label]),
                label,
            }
        })
        .collect();
    Dataset::new(task, instances)
}

fn cluster_means(k: usize, dim: usize, separation: f64) -> Vec<Vec<f64>> {
    (0..k)
        .map(|c| {
            simplex_vertex(c, k, dim)
                .into_iter()
                .map(|x| x * separation)
                .collect()
        })
        .collect()
}

/// Label sequences from a random Markov chain; each position's features are
/// its label's cluster mean plus unit Gaussian noise.
pub fn chain(
    n: usize,
    len: usize,
    num_labels: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset<ChainTask>> {
    check_common(n, separation)?;
    if len == 0 {
        return Err(Error::invalid("chain length must be at least 1"));
    }
    let task = ChainTask::new(num_labels, dim)?;
    if dim + 1 < num_labels {
        return Err(Error::invalid(format!(
            "{num_labels} labels need feature dimension at least {}",
            num_labels - 1
        )));
    }
    let means = cluster_means(num_labels, dim, separation);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let transitions: Vec<Vec<f64>> = (0..num_labels)
        .map(|_| {
            let row: Vec<f64> = (0..num_labels).map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|p| p / total).collect()
        })
        .collect();
    let instances = (0..n)
        .map(|_| {
            let mut labels = Vec::with_capacity(len);
            let mut y = rng.random_range(0..num_labels);
            for _ in 0..len {
                labels.push(y);
                y = sample_categorical(&mut rng, &transitions[y]);
            }
            let features = labels
                .iter()
                .map(|&y| noisy_point(&mut rng, &means[y]))
                .collect();
            ChainInstance { features, labels }
        })
        .collect();
    Dataset::new(task, instances)
}

fn sample_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}

/// 4-neighbourhood edges of a row-major `rows × cols` grid, each as `(k, l)`
/// with `k < l`.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    edges
}

/// Grid graphs whose truth thresholds a box-blurred Gaussian field blended
/// towards its mean by `smoothing`. Node features are
/// `[1, (2y-1)·separation + noise, noise...]`.
pub fn binary_potts_grid(
    n: usize,
    rows: usize,
    cols: usize,
    dim: usize,
    smoothing: f64,
    separation: f64,
    seed: u64,
) -> Result<Dataset<BinaryPottsTask>> {
    check_common(n, separation)?;
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid must have at least one row and column"));
    }
    if dim < 2 {
        return Err(Error::invalid("grid features need dimension at least 2"));
    }
    if !(0.0..=1.0).contains(&smoothing) {
        return Err(Error::invalid(format!("smoothing must lie in [0, 1], got {smoothing}")));
    }
    let task = BinaryPottsTask::new(dim)?;
    let edges = grid_edges(rows, cols);
    let nodes = rows * cols;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances = (0..n)
        .map(|_| {
            let field: Vec<f64> = (0..nodes).map(|_| normal(&mut rng)).collect();
            let mean = field.iter().sum::<f64>() / nodes as f64;
            let labels: Vec<usize> = (0..nodes)
                .map(|v| {
                    let blurred = box_blur(&field, rows, cols, v);
                    let f = (1.0 - smoothing) * blurred + smoothing * mean;
                    usize::from(f > 0.0)
                })
                .collect();
            let features = labels
                .iter()
                .map(|&y| {
                    let sign = if y == 1 { 1.0 } else { -1.0 };
                    let mut x = Vec::with_capacity(dim);
                    x.push(1.0);
                    x.push(sign * separation + normal(&mut rng));
                    x.extend((2..dim).map(|_| normal(&mut rng)));
                    x
                })
                .collect();
            GraphInstance {
                features,
                edges: edges.clone(),
                labels,
            }
        })
        .collect();
    Dataset::new(task, instances)
}

fn box_blur(field: &[f64], rows: usize, cols: usize, v: usize) -> f64 {
    let (r, c) = (v / cols, v % cols);
    let mut sum = 0.0;
    let mut count = 0usize;
    for rr in r.saturating_sub(1)..=(r + 1).min(rows - 1) {
        for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
            sum += field[rr * cols + cc];
            count += 1;
        }
    }
    sum / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::dot;

    #[test]
    fn simplex_vertices_are_regular() {
        for k in 2..7 {
            let vs: Vec<_> = (0..k).map(|c| simplex_vertex(c, k, k + 1)).collect();
            let expected_dot = -1.0 / (k as f64 - 1.0);
            for a in 0..k {
                assert!((dot(&vs[a], &vs[a]) - 1.0).abs() < 1e-12);
                for b in 0..a {
                    assert!((dot(&vs[a], &vs[b]) - expected_dot).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn grid_edge_count() {
        assert_eq!(grid_edges(4, 4).len(), 24);
        assert_eq!(grid_edges(1, 5).len(), 4);
        assert!(grid_edges(3, 7).iter().all(|&(k, l)| k < l));
    }

    #[test]
    fn full_smoothing_is_constant() {
        let d = binary_potts_grid(10, 4, 5, 3, 1.0, 1.0, 3).unwrap();
        for inst in &d.instances {
            assert!(inst.labels.iter().all(|&y| y == inst.labels[0]));
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = chain(5, 4, 3, 3, 1.0, 9).unwrap();
        let b = chain(5, 4, 3, 3, 1.0, 9).unwrap();
        let c = chain(5, 4, 3, 3, 1.0, 10).unwrap();
        assert_eq!(a.instances, b.instances);
        assert_ne!(a.instances, c.instances);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(multiclass(0, 3, 6, 1.0, 0).is_err());
        assert!(multiclass(5, 4, 2, 1.0, 0).is_err());
        assert!(chain(5, 0, 3, 3, 1.0, 0).is_err());
        assert!(binary_potts_grid(5, 3, 3, 1, 0.5, 1.0, 0).is_err());
        assert!(binary_potts_grid(5, 3, 3, 2, 1.5, 1.0, 0).is_err());
    }
}
