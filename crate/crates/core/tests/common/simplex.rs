//! Dense two-phase tableau simplex, used as an independent reference solver.

use pdhg_lp::LpProblem;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Objective with offset and sense applied, as the solver reports it.
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

/// `x_j = base + Σ coef · z_col` in terms of nonnegative standard-form columns.
struct VarMap {
    base: f64,
    terms: Vec<(usize, f64)>,
}

pub fn simplex(p: &LpProblem) -> Outcome {
    let n = p.num_vars();
    let mut ncols = 0;
    let mut new_col = || {
        ncols += 1;
        ncols - 1
    };
    let mut maps = Vec::with_capacity(n);
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (p.lower[j], p.upper[j]);
        let map = if l.is_finite() {
            let c = new_col();
            if u.is_finite() {
                let s = new_col();
                rows.push((vec![(c, 1.0), (s, 1.0)], u - l));
            }
            VarMap { base: l, terms: vec![(c, 1.0)] }
        } else if u.is_finite() {
            VarMap { base: u, terms: vec![(new_col(), -1.0)] }
        } else {
            let plus = new_col();
            let minus = new_col();
            VarMap { base: 0.0, terms: vec![(plus, 1.0), (minus, -1.0)] }
        };
        maps.push(map);
    }
    let dense_g = p.ineq_matrix.to_dense();
    let dense_a = p.eq_matrix.to_dense();
    let mut constraint_row = |coefs: &[f64], rhs: f64, slack: Option<usize>| {
        let mut terms = Vec::new();
        let mut rhs = rhs;
        for (j, &a) in coefs.iter().enumerate() {
            if a != 0.0 {
                rhs -= a * maps[j].base;
                terms.extend(maps[j].terms.iter().map(|&(c, k)| (c, a * k)));
            }
        }
        if let Some(s) = slack {
            terms.push((s, -1.0));
        }
        rows.push((terms, rhs));
    };
    for (i, row) in dense_g.iter().enumerate() {
        let s = new_col();
        constraint_row(row, p.ineq_rhs[i], Some(s));
    }
    for (i, row) in dense_a.iter().enumerate() {
        constraint_row(row, p.eq_rhs[i], None);
    }
    let mut cost = vec![0.0; ncols];
    let mut constant = 0.0;
    for (j, map) in maps.iter().enumerate() {
        constant += p.objective[j] * map.base;
        for &(c, k) in &map.terms {
            cost[c] += p.objective[j] * k;
        }
    }
    let mut a = vec![vec![0.0; ncols]; rows.len()];
    let mut b = vec![0.0; rows.len()];
    for (i, (terms, rhs)) in rows.iter().enumerate() {
        for &(c, v) in terms {
            a[i][c] += v;
        }
        b[i] = *rhs;
    }
    match standard_form(a, b, &cost) {
        Std::Optimal(z) => {
            let x: Vec<f64> = maps
                .iter()
                .map(|m| m.base + m.terms.iter().map(|&(c, k)| k * z[c]).sum::<f64>())
                .collect();
            let stored: f64 = cost.iter().zip(&z).map(|(c, v)| c * v).sum::<f64>() + constant;
            Outcome::Optimal {
                objective: p.reported_objective(stored),
                x,
            }
        }
        Std::Infeasible => Outcome::Infeasible,
        Std::Unbounded => Outcome::Unbounded,
    }
}

enum Std {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.width]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.t[r][e];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            let f = row[e];
            if i != r && f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        self.basis[r] = e;
    }

    /// Minimizes `cost` over the columns marked `allowed`. Dantzig's rule,
    /// with Bland's rule during long degenerate stretches.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<(), ()> {
        let m = self.t.len();
        let mut degenerate_streak = 0;
        for _ in 0..200_000 {
            let mut reduced = cost.to_vec();
            for i in 0..m {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    for (d, v) in reduced.iter_mut().zip(&self.t[i]) {
                        *d -= cb * v;
                    }
                }
            }
            let bland = degenerate_streak > 50;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..self.width {
                if allowed[j] && reduced[j] < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = reduced[j];
                }
            }
            let Some(e) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][e];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else { return Err(()) };
            degenerate_streak = if ratio.abs() < 1e-12 { degenerate_streak + 1 } else { 0 };
            self.pivot(r, e);
        }
        panic!("simplex did not terminate");
    }
}

/// `min cᵀz  s.t.  Az = b, z ≥ 0`.
fn standard_form(a: Vec<Vec<f64>>, b: Vec<f64>, cost: &[f64]) -> Std {
    let m = a.len();
    let n = cost.len();
    let width = n + m;
    let mut t = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.into_iter().zip(&b).enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let mut full: Vec<f64> = row.into_iter().map(|v| sign * v).collect();
        full.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
        full.push(sign * rhs);
        t.push(full);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        width,
    };
    let phase1_cost: Vec<f64> = (0..width).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    tab.optimize(&phase1_cost, &vec![true; width])
        .expect("phase one is bounded below");
    let infeasibility: f64 = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.rhs(i)).sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > 1e-7 * scale {
        return Std::Infeasible;
    }
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[i][j].abs() > PIVOT_TOL) {
                tab.pivot(i, j);
            }
        }
    }
    let mut phase2_cost = cost.to_vec();
    phase2_cost.extend(std::iter::repeat_n(0.0, m));
    let allowed: Vec<bool> = (0..width).map(|j| j < n).collect();
    if tab.optimize(&phase2_cost, &allowed).is_err() {
        return Std::Unbounded;
    }
    let mut z = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            z[tab.basis[i]] = tab.rhs(i);
        }
    }
    Std::Optimal(z)
}
