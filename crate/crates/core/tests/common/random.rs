//! Random LPs whose optimal primal-dual pair is known by construction.

use pdhg_lp::linalg::SparseMatrix;
use pdhg_lp::LpProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

pub struct KnownLp {
    pub problem: LpProblem,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Copy)]
enum BoundKind {
    Lower,
    Box,
    Upper,
    Free,
}

/// Builds `(x*, y*)` and complementary data around it: active rows carry
/// positive duals, variables at a bound carry reduced costs of the matching
/// sign and interior variables carry none. `c = Kᵀy* + λ`, so the pair
/// satisfies the KKT conditions exactly.
pub fn random_lp(seed: u64, n: usize, m_ineq: usize, m_eq: usize, density: f64) -> KnownLp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = vec![-INF; n];
    let mut upper = vec![INF; n];
    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; n];
    for j in 0..n {
        let kind = match rng.gen_range(0..10) {
            0..=4 => BoundKind::Lower,
            5..=7 => BoundKind::Box,
            8 => BoundKind::Upper,
            _ => BoundKind::Free,
        };
        let l = rng.gen_range(-2.0..1.0);
        let width = rng.gen_range(0.5..4.0);
        match kind {
            BoundKind::Lower => lower[j] = l,
            BoundKind::Box => {
                lower[j] = l;
                upper[j] = l + width;
            }
            BoundKind::Upper => upper[j] = l + width,
            BoundKind::Free => {}
        }
        // Where x* sits: 0 at lower, 1 at upper, 2 interior.
        let mut place = rng.gen_range(0..3);
        if (place == 0 && !lower[j].is_finite()) || (place == 1 && !upper[j].is_finite()) {
            place = 2;
        }
        match place {
            0 => {
                x[j] = lower[j];
                lambda[j] = rng.gen_range(0.1..1.0);
            }
            1 => {
                x[j] = upper[j];
                lambda[j] = -rng.gen_range(0.1..1.0);
            }
            _ => {
                x[j] = match (lower[j].is_finite(), upper[j].is_finite()) {
                    (true, true) => rng.gen_range(lower[j]..upper[j]),
                    (true, false) => lower[j] + rng.gen_range(0.1..2.0),
                    (false, true) => upper[j] - rng.gen_range(0.1..2.0),
                    (false, false) => rng.gen_range(-2.0..2.0),
                };
            }
        }
    }
    let random_rows = |rows: usize, rng: &mut ChaCha8Rng| {
        let mut dense = vec![vec![0.0; n]; rows];
        for row in dense.iter_mut() {
            for v in row.iter_mut() {
                if rng.gen_bool(density) {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            if row.iter().all(|v| *v == 0.0) {
                row[rng.gen_range(0..n)] = rng.gen_range(0.5..1.0);
            }
        }
        dense
    };
    let g = random_rows(m_ineq, &mut rng);
    let a = random_rows(m_eq, &mut rng);
    let dot = |row: &[f64], v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut y = Vec::with_capacity(m_ineq + m_eq);
    let mut h = Vec::with_capacity(m_ineq);
    for row in &g {
        if rng.gen_bool(0.5) {
            h.push(dot(row, &x));
            y.push(rng.gen_range(0.1..1.0));
        } else {
            h.push(dot(row, &x) - rng.gen_range(0.1..1.0));
            y.push(0.0);
        }
    }
    let b: Vec<f64> = a.iter().map(|row| dot(row, &x)).collect();
    y.extend((0..m_eq).map(|_| rng.gen_range(-1.0..1.0)));
    let mut c = lambda;
    for (row, yi) in g.iter().chain(&a).zip(&y) {
        for (cj, kij) in c.iter_mut().zip(row) {
            *cj += kij * yi;
        }
    }
    let objective = dot(&c, &x);
    let problem = LpProblem::new(c, lower, upper)
        .with_inequalities(sparse(&g, n), h)
        .with_equalities(sparse(&a, n), b)
        .with_name(format!("random_{seed}"));
    KnownLp {
        problem,
        x_star: x,
        y_star: y,
        objective,
    }
}

fn sparse(rows: &[Vec<f64>], n: usize) -> SparseMatrix {
    let triplets = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)));
    SparseMatrix::from_triplets(rows.len(), n, triplets).unwrap()
}
