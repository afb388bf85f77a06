//! Bounded-variable revised simplex for small dense problems of the form
//!
//! ```text
//! maximize  cᵀx   subject to  A x <= b,  0 <= x <= u,   with b >= 0.
//! ```
//!
//! The slack basis is feasible because `b >= 0`, so no phase one is needed.
//! The basis inverse is kept dense and updated by elementary row operations,
//! with periodic refactorization from scratch.

use thiserror::Error;

pub const PIVOT_TOL: f64 = 1e-10;
pub const OPT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum SimplexError {
    #[error("right-hand side {0} is negative; the slack basis is infeasible")]
    InfeasibleStart(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("basis matrix became singular during refactorization")]
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    pub x: Vec<f64>,
    /// Row multipliers, one per constraint.
    pub duals: Vec<f64>,
    /// `c_j - yᵀa_j` for each structural column.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Whether the anti-cycling rule was engaged.
    pub used_bland: bool,
}

/// A dense problem stored column by column.
#[derive(Clone, Debug)]
pub struct DenseLp {
    pub rows: usize,
    /// `columns[j][i] = A[i][j]`.
    pub columns: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub cost: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
}

struct Solver<'a> {
    lp: &'a DenseLp,
    n: usize,
    r: usize,
    basis: Vec<usize>,
    state: Vec<VarState>,
    binv: Vec<f64>,
    xb: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            out.copy_from_slice(&self.lp.columns[j]);
        } else {
            out.fill(0.0);
            out[j - self.n] = 1.0;
        }
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.lp.cost[j]
        } else {
            0.0
        }
    }

    fn upper(&self, j: usize) -> f64 {
        if j < self.n {
            self.lp.upper[j]
        } else {
            f64::INFINITY
        }
    }

    /// `y = c_Bᵀ B⁻¹`.
    fn duals(&self) -> Vec<f64> {
        let r = self.r;
        let mut y = vec![0.0; r];
        for (i, &bj) in self.basis.iter().enumerate() {
            let c = self.cost(bj);
            if c != 0.0 {
                let row = &self.binv[i * r..(i + 1) * r];
                for (yk, b) in y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.lp.cost[j] - self.lp.columns[j].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
        } else {
            -y[j - self.n]
        }
    }

    fn ftran(&self, a: &[f64], out: &mut [f64]) {
        let r = self.r;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.binv[i * r..(i + 1) * r].iter().zip(a).map(|(b, x)| b * x).sum();
        }
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination and recomputes `x_B`.
    fn refactor(&mut self) -> Result<(), SimplexError> {
        let r = self.r;
        let mut m = vec![0.0; r * r];
        let mut col = vec![0.0; r];
        for (k, &bj) in self.basis.iter().enumerate() {
            self.column(bj, &mut col);
            for i in 0..r {
                m[i * r + k] = col[i];
            }
        }
        let mut inv = vec![0.0; r * r];
        for i in 0..r {
            inv[i * r + i] = 1.0;
        }
        for k in 0..r {
            let p = (k..r)
                .max_by(|&a, &b| m[a * r + k].abs().total_cmp(&m[b * r + k].abs()).then(b.cmp(&a)))
                .ok_or(SimplexError::Singular)?;
            if m[p * r + k].abs() < 1e-14 {
                return Err(SimplexError::Singular);
            }
            if p != k {
                for c in 0..r {
                    m.swap(p * r + c, k * r + c);
                    inv.swap(p * r + c, k * r + c);
                }
            }
            let piv = m[k * r + k];
            for c in 0..r {
                m[k * r + c] /= piv;
                inv[k * r + c] /= piv;
            }
            for i in 0..r {
                if i != k {
                    let f = m[i * r + k];
                    if f != 0.0 {
                        for c in 0..r {
                            m[i * r + c] -= f * m[k * r + c];
                            inv[i * r + c] -= f * inv[k * r + c];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        let mut rhs = self.lp.rhs.clone();
        for j in 0..self.n {
            if self.state[j] == VarState::Upper {
                for (ri, a) in rhs.iter_mut().zip(&self.lp.columns[j]) {
                    *ri -= a * self.lp.upper[j];
                }
            }
        }
        let mut xb = vec![0.0; r];
        self.ftran(&rhs, &mut xb);
        self.xb = xb;
        Ok(())
    }

    fn pivot(&mut self, p: usize, alpha: &[f64]) {
        let r = self.r;
        let piv = alpha[p];
        for c in 0..r {
            self.binv[p * r + c] /= piv;
        }
        let prow: Vec<f64> = self.binv[p * r..(p + 1) * r].to_vec();
        for (i, &a) in alpha.iter().enumerate() {
            if i != p && a != 0.0 {
                for (b, pr) in self.binv[i * r..(i + 1) * r].iter_mut().zip(&prow) {
                    *b -= a * pr;
                }
            }
        }
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(i) => self.xb[i],
            VarState::Lower => 0.0,
            VarState::Upper => self.upper(j),
        }
    }
}

/// Solves `lp` with Dantzig pricing, switching to Bland's rule after
/// `5·(rows + columns)` consecutive degenerate pivots.
pub fn solve(lp: &DenseLp, max_iterations: usize) -> Result<SimplexResult, SimplexError> {
    let n = lp.columns.len();
    let r = lp.rows;
    if lp.rhs.len() != r || lp.cost.len() != n || lp.upper.len() != n || lp.columns.iter().any(|c| c.len() != r) {
        return Err(SimplexError::Shape(format!("{r} rows, {n} columns")));
    }
    if let Some(&b) = lp.rhs.iter().find(|&&b| b < 0.0) {
        return Err(SimplexError::InfeasibleStart(b));
    }
    let mut state = vec![VarState::Lower; n + r];
    for i in 0..r {
        state[n + i] = VarState::Basic(i);
    }
    let mut binv = vec![0.0; r * r];
    for i in 0..r {
        binv[i * r + i] = 1.0;
    }
    let mut s = Solver { lp, n, r, basis: (n..n + r).collect(), state, binv, xb: lp.rhs.clone() };

    let degenerate_limit = 5 * (r + n);
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let mut iterations = 0usize;
    let mut since_refactor = 0usize;
    let mut alpha = vec![0.0; r];
    let mut col = vec![0.0; r];

    let status = loop {
        let y = s.duals();
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..n + r {
            let dir = match s.state[j] {
                VarState::Basic(_) => continue,
                VarState::Lower => 1.0,
                VarState::Upper => -1.0,
            };
            let d = s.reduced_cost(j, &y);
            if d * dir > OPT_TOL {
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
        }
        let Some((q, dq)) = entering else {
            break SimplexStatus::Optimal;
        };
        if iterations >= max_iterations {
            break SimplexStatus::IterationLimit;
        }
        iterations += 1;
        let dir = if dq > 0.0 { 1.0 } else { -1.0 };
        s.column(q, &mut col);
        s.ftran(&col, &mut alpha);

        let ratio = |i: usize, slack: f64| -> Option<(f64, bool)> {
            let delta = dir * alpha[i];
            if delta > PIVOT_TOL {
                Some(((s.xb[i].max(0.0) + slack) / delta, false))
            } else if delta < -PIVOT_TOL {
                let u = s.upper(s.basis[i]);
                u.is_finite().then(|| (((u - s.xb[i]).max(0.0) + slack) / -delta, true))
            } else {
                None
            }
        };
        let mut t_best = s.upper(q);
        let mut leave: Option<(usize, bool)> = None;
        if bland {
            for i in 0..r {
                if let Some((t, to_upper)) = ratio(i, 0.0) {
                    let better = t < t_best || (t == t_best && leave.is_some_and(|(p, _)| s.basis[i] < s.basis[p]));
                    if better {
                        t_best = t;
                        leave = Some((i, to_upper));
                    }
                }
            }
        } else {
            // Harris: bound the step with relaxed ratios, then take the
            // largest pivot among rows whose exact ratio fits under it.
            let relaxed = (0..r).filter_map(|i| ratio(i, HARRIS_TOL)).map(|(t, _)| t).fold(f64::INFINITY, f64::min);
            if relaxed < t_best {
                let mut best_pivot = 0.0;
                for (i, a) in alpha.iter().enumerate() {
                    if let Some((t, to_upper)) = ratio(i, 0.0) {
                        if t <= relaxed && a.abs() > best_pivot {
                            best_pivot = a.abs();
                            leave = Some((i, to_upper));
                            t_best = t;
                        }
                    }
                }
            }
        }
        if !t_best.is_finite() {
            break SimplexStatus::Unbounded;
        }
        if t_best <= 1e-12 {
            degenerate_run += 1;
            if degenerate_run > degenerate_limit {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
        for (x, a) in s.xb.iter_mut().zip(&alpha) {
            *x -= dir * t_best * a;
        }
        match leave {
            None => {
                s.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
            }
            Some((p, to_upper)) => {
                let out = s.basis[p];
                s.state[out] = if to_upper { VarState::Upper } else { VarState::Lower };
                let entering_value = if dir > 0.0 { t_best } else { s.upper(q) - t_best };
                s.pivot(p, &alpha);
                s.basis[p] = q;
                s.state[q] = VarState::Basic(p);
                s.xb[p] = entering_value;
                since_refactor += 1;
                if since_refactor >= REFACTOR_EVERY {
                    s.refactor()?;
                    since_refactor = 0;
                }
            }
        }
    };

    if r > 0 {
        s.refactor()?;
    }
    let y = s.duals();
    let x: Vec<f64> = (0..n).map(|j| s.value(j)).collect();
    let reduced_costs = (0..n).map(|j| s.reduced_cost(j, &y)).collect();
    let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
    Ok(SimplexResult { status, x, duals: y, reduced_costs, objective, iterations, used_bland: bland })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: &[&[f64]], rhs: &[f64], cost: &[f64], upper: &[f64]) -> DenseLp {
        let n = cost.len();
        let columns = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        DenseLp { rows: rows.len(), columns, rhs: rhs.to_vec(), cost: cost.to_vec(), upper: upper.to_vec() }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let p = lp(&[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]], &[4.0, 12.0, 18.0], &[3.0, 5.0], &[f64::INFINITY; 2]);
        let s = solve(&p, 100).unwrap();
        assert_eq!(s.status, SimplexStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
        let dual_obj: f64 = s.duals.iter().zip(&p.rhs).map(|(a, b)| a * b).sum();
        assert!((dual_obj - 36.0).abs() < 1e-12);
        assert!(s.duals.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn bounds_and_flips() {
        let p = lp(&[&[1.0, 1.0]], &[10.0], &[1.0, 2.0], &[3.0, 4.0]);
        let s = solve(&p, 100).unwrap();
        assert_eq!(s.x, vec![3.0, 4.0]);
        assert_eq!(s.objective, 11.0);
        assert_eq!(s.duals, vec![0.0]);

        let empty = lp(&[], &[], &[1.0, -1.0], &[2.0, 2.0]);
        let s = solve(&empty, 10).unwrap();
        assert_eq!(s.x, vec![2.0, 0.0]);
    }

    #[test]
    fn unbounded_and_errors() {
        let p = lp(&[&[-1.0]], &[1.0], &[1.0], &[f64::INFINITY]);
        assert_eq!(solve(&p, 100).unwrap().status, SimplexStatus::Unbounded);
        let p = lp(&[&[1.0]], &[-1.0], &[1.0], &[1.0]);
        assert_eq!(solve(&p, 100).unwrap_err(), SimplexError::InfeasibleStart(-1.0));
        let p = lp(&[&[1.0, 1.0], &[1.0, -1.0]], &[1.0, 1.0], &[1.0, 1.0], &[9.0, 9.0]);
        assert_eq!(solve(&p, 0).unwrap().status, SimplexStatus::IterationLimit);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let p = lp(
            &[&[0.25, -60.0, -0.04, 9.0], &[0.5, -90.0, -0.02, 3.0], &[0.0, 0.0, 1.0, 0.0]],
            &[0.0, 0.0, 1.0],
            &[0.75, -150.0, 0.02, -6.0],
            &[f64::INFINITY; 4],
        );
        let s = solve(&p, 10_000).unwrap();
        assert_eq!(s.status, SimplexStatus::Optimal);
        assert!((s.objective - 0.05).abs() < 1e-12);
    }

    #[test]
    fn random_problems_satisfy_duality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let r = rng.gen_range(1..12);
            let n = rng.gen_range(1..15);
            let columns: Vec<Vec<f64>> = (0..n).map(|_| (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let p = DenseLp {
                rows: r,
                columns,
                rhs: (0..r).map(|_| rng.gen_range(0.0..2.0)).collect(),
                cost: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                upper: (0..n).map(|_| rng.gen_range(0.5..3.0)).collect(),
            };
            let s = solve(&p, 10_000).unwrap();
            assert_eq!(s.status, SimplexStatus::Optimal);
            for i in 0..r {
                let lhs: f64 = (0..n).map(|j| p.columns[j][i] * s.x[j]).sum();
                assert!(lhs <= p.rhs[i] + 1e-9);
                assert!(s.duals[i] >= -1e-9);
            }
            // Dual objective: bᵀy + Σ u_j max(d_j, 0).
            let dual: f64 = s.duals.iter().zip(&p.rhs).map(|(a, b)| a * b).sum::<f64>()
                + s.reduced_costs.iter().zip(&p.upper).map(|(d, u)| d.max(0.0) * u).sum::<f64>();
            assert!((dual - s.objective).abs() < 1e-8, "{dual} vs {}", s.objective);
        }
    }
}
