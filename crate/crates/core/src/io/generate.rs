//! Synthetic instances: PageRank feasibility LPs and the bilinear toy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::SparseMatrix;
use crate::problem::LpProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct PagerankSpec {
    pub num_nodes: usize,
    pub attach_degree: usize,
    /// Damping factor `λ`.
    pub damping: f64,
    pub seed: u64,
}

impl Default for PagerankSpec {
    fn default() -> Self {
        Self {
            num_nodes: 10_000,
            attach_degree: 3,
            damping: 0.85,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid instance spec: {0}")]
pub struct SpecInvalid(pub String);

impl PagerankSpec {
    pub fn validate(&self) -> Result<(), SpecInvalid> {
        if self.attach_degree == 0 {
            return Err(SpecInvalid("attach degree must be positive".into()));
        }
        if self.num_nodes <= self.attach_degree {
            return Err(SpecInvalid(format!(
                "node count {} must exceed the attach degree {}",
                self.num_nodes, self.attach_degree
            )));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(SpecInvalid(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        Ok(())
    }
}

/// Undirected Barabási–Albert graph as an edge list.
///
/// Starts from `k` isolated vertices. Vertex `k` links to all of them; every
/// later vertex links to `k` distinct earlier vertices drawn with probability
/// proportional to degree. This yields exactly `k(n − k)` edges.
pub fn barabasi_albert_edges(n: usize, k: usize, seed: u64) -> Vec<(usize, usize)> {
    assert!(k >= 1 && n > k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(k * (n - k));
    // Every vertex appears once per incident edge.
    let mut weighted = Vec::with_capacity(2 * k * (n - k));
    for target in 0..k {
        edges.push((k, target));
        weighted.extend([k, target]);
    }
    let mut picked = vec![false; n];
    let mut targets = Vec::with_capacity(k);
    for source in k + 1..n {
        targets.clear();
        while targets.len() < k {
            let t = weighted[rng.gen_range(0..weighted.len())];
            if !picked[t] {
                picked[t] = true;
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((source, t));
            weighted.extend([source, t]);
            picked[t] = false;
        }
    }
    edges
}

/// PageRank as a feasibility LP over a Barabási–Albert graph:
///
/// ```text
/// x_i − λ(S′x)_i ≥ (1 − λ)/n  for all i,   1ᵀx = 1,   x ≥ 0
/// ```
///
/// with `S′` the column-normalized adjacency matrix and a zero objective.
pub fn generate_pagerank(spec: &PagerankSpec) -> Result<LpProblem, SpecInvalid> {
    spec.validate()?;
    let n = spec.num_nodes;
    let edges = barabasi_albert_edges(n, spec.attach_degree, spec.seed);
    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    assert!(degree.iter().all(|&d| d > 0), "every vertex has an edge");
    let lambda = spec.damping;
    let mut triplets = Vec::with_capacity(n + 2 * edges.len());
    triplets.extend((0..n).map(|i| (i, i, 1.0)));
    for &(a, b) in &edges {
        triplets.push((a, b, -lambda / degree[b] as f64));
        triplets.push((b, a, -lambda / degree[a] as f64));
    }
    let ineq = SparseMatrix::from_triplets(n, n, triplets).expect("indices in range");
    let eq = SparseMatrix::from_triplets(1, n, (0..n).map(|j| (0, j, 1.0))).expect("indices in range");
    let mut problem = LpProblem::new(vec![0.0; n], vec![0.0; n], vec![f64::INFINITY; n])
        .with_inequalities(ineq, vec![(1.0 - lambda) / n as f64; n])
        .with_equalities(eq, vec![1.0])
        .with_name(format!("pagerank_{n}_{}", spec.seed));
    problem.var_names = (0..n).map(|i| format!("x{i}")).collect();
    problem.ineq_names = (0..n).map(|i| format!("rank{i}")).collect();
    problem.eq_names = vec!["total".into()];
    Ok(problem)
}

/// `min 0·x  s.t.  x = 3,  x ≥ 0`, whose saddle point is `(3, 0)`.
pub fn generate_bilinear_toy() -> LpProblem {
    let mut problem = LpProblem::new(vec![0.0], vec![0.0], vec![f64::INFINITY])
        .with_equalities(SparseMatrix::from_dense(&[vec![1.0]]), vec![3.0])
        .with_name("bilinear");
    problem.var_names = vec!["x".into()];
    problem.eq_names = vec!["fix".into()];
    problem
}
