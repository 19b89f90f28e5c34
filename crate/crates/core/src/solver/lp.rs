//! Dense-inverse revised simplex for small sparse LPs in standard form.
//!
//! Two phases with artificial variables. Dantzig pricing, switching to
//! Bland's rule after a run of degenerate pivots. The basis inverse is
//! refactorized periodically.

use crate::error::SolveError;

/// `min c.x` subject to `A x = b`, `x >= 0`, with sparse columns of `A`.
#[derive(Clone, Debug, Default)]
pub struct StandardLp {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 50;

struct Tableau<'a> {
    r: usize,
    n_real: usize,
    cols: &'a [Vec<(usize, f64)>],
    b: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
}

impl StandardLp {
    pub fn add_column(&mut self, entries: Vec<(usize, f64)>, cost: f64) -> usize {
        self.columns.push(entries);
        self.cost.push(cost);
        self.columns.len() - 1
    }
}

pub fn solve_standard(lp: &StandardLp, max_iterations: usize) -> Result<LpSolution, SolveError> {
    let r = lp.rows;
    let n_real = lp.columns.len();
    // Flip rows so the right-hand side is non-negative, then append artificials.
    let sign: Vec<f64> = lp.rhs.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut cols: Vec<Vec<(usize, f64)>> = lp
        .columns
        .iter()
        .map(|c| c.iter().map(|&(i, v)| (i, v * sign[i])).collect())
        .collect();
    for i in 0..r {
        cols.push(vec![(i, 1.0)]);
    }
    let b: Vec<f64> = lp.rhs.iter().map(|v| v.abs()).collect();
    let mut binv = vec![0.0; r * r];
    for i in 0..r {
        binv[i * r + i] = 1.0;
    }
    let mut in_basis = vec![false; n_real + r];
    for k in n_real..n_real + r {
        in_basis[k] = true;
    }
    let mut t = Tableau {
        r,
        n_real,
        cols: &cols,
        xb: b.clone(),
        b,
        basis: (n_real..n_real + r).collect(),
        in_basis,
        binv,
        iterations: 0,
    };
    let scale_b = 1.0 + t.b.iter().fold(0.0, |a: f64, v| a.max(*v));
    let mut phase1 = vec![0.0; n_real + r];
    for c in phase1.iter_mut().skip(n_real) {
        *c = 1.0;
    }
    if t.run(&phase1, true, 1e-11, max_iterations)? == LpStatus::Unbounded {
        return Err(SolveError::Lp("phase one unbounded".into()));
    }
    let infeasibility: f64 = (0..r).filter(|&p| t.basis[p] >= n_real).map(|p| t.xb[p]).sum();
    if infeasibility > 1e-8 * scale_b {
        return Ok(LpSolution { status: LpStatus::Infeasible, value: f64::NAN, x: vec![], iterations: t.iterations });
    }
    t.drive_out_artificials();
    let max_c = lp.cost.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    let mut phase2 = lp.cost.clone();
    phase2.extend(std::iter::repeat(0.0).take(r));
    let status = t.run(&phase2, false, 1e-10 * (1.0 + max_c), max_iterations)?;
    let mut x = vec![0.0; n_real];
    for p in 0..r {
        if t.basis[p] < n_real {
            x[t.basis[p]] = t.xb[p].max(0.0);
        }
    }
    let value = x.iter().zip(&lp.cost).map(|(a, c)| a * c).sum();
    Ok(LpSolution { status, value, x, iterations: t.iterations })
}

impl Tableau<'_> {
    fn column_times_binv(&self, q: usize) -> Vec<f64> {
        let r = self.r;
        let mut alpha = vec![0.0; r];
        for &(row, v) in &self.cols[q] {
            for (i, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[i * r + row] * v;
            }
        }
        alpha
    }

    fn run(&mut self, cost: &[f64], phase_one: bool, opt_tol: f64, max_iterations: usize) -> Result<LpStatus, SolveError> {
        let r = self.r;
        let mut bland = false;
        let mut degenerate = 0usize;
        let mut since_refactor = 0usize;
        loop {
            if self.iterations >= max_iterations {
                return Err(SolveError::IterationLimit(max_iterations));
            }
            let mut y = vec![0.0; r];
            for p in 0..r {
                let cb = cost[self.basis[p]];
                if cb != 0.0 {
                    for (k, yk) in y.iter_mut().enumerate() {
                        *yk += cb * self.binv[p * r + k];
                    }
                }
            }
            let limit = if phase_one { self.cols.len() } else { self.n_real };
            let mut entering: Option<(usize, f64)> = None;
            for q in 0..limit {
                if self.in_basis[q] {
                    continue;
                }
                let d = cost[q] - self.cols[q].iter().map(|&(i, v)| y[i] * v).sum::<f64>();
                if d < -opt_tol {
                    if bland {
                        entering = Some((q, d));
                        break;
                    }
                    if entering.map_or(true, |(_, best)| d < best) {
                        entering = Some((q, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.column_times_binv(q);
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..r {
                let a = alpha[p];
                let locked = !phase_one && self.basis[p] >= self.n_real;
                let ratio = if locked && a.abs() > PIVOT_TOL {
                    0.0
                } else if a > PIVOT_TOL {
                    self.xb[p].max(0.0) / a
                } else {
                    continue;
                };
                leave = match leave {
                    None => Some((p, ratio)),
                    Some((lp, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        let better = if tie {
                            if bland {
                                self.basis[p] < self.basis[lp]
                            } else {
                                a.abs() > alpha[lp].abs()
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            Some((p, ratio))
                        } else {
                            Some((lp, lr))
                        }
                    }
                };
            }
            let Some((p, theta)) = leave else {
                // A ray may be an artefact of drift in the inverse; confirm on a fresh one.
                if since_refactor > 0 {
                    self.refactor()?;
                    since_refactor = 0;
                    continue;
                }
                return Ok(LpStatus::Unbounded);
            };
            self.pivot(p, q, &alpha, theta);
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }

    fn pivot(&mut self, p: usize, q: usize, alpha: &[f64], theta: f64) {
        let r = self.r;
        for i in 0..r {
            if i != p {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[p] = theta;
        let piv = alpha[p];
        let row_p: Vec<f64> = self.binv[p * r..(p + 1) * r].iter().map(|v| v / piv).collect();
        for i in 0..r {
            if i == p || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..r {
                self.binv[i * r + k] -= f * row_p[k];
            }
        }
        self.binv[p * r..(p + 1) * r].copy_from_slice(&row_p);
        self.in_basis[self.basis[p]] = false;
        self.in_basis[q] = true;
        self.basis[p] = q;
        self.iterations += 1;
    }

    fn refactor(&mut self) -> Result<(), SolveError> {
        let r = self.r;
        let mut m = vec![0.0; r * r];
        for (p, &q) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[q] {
                m[i * r + p] = v;
            }
        }
        self.binv = invert(m, r).ok_or_else(|| SolveError::Lp("singular basis".into()))?;
        for i in 0..r {
            let v: f64 = (0..r).map(|k| self.binv[i * r + k] * self.b[k]).sum();
            self.xb[i] = if v < 0.0 && v > -1e-11 { 0.0 } else { v };
        }
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        let r = self.r;
        for p in 0..r {
            if self.basis[p] < self.n_real {
                continue;
            }
            let row = &self.binv[p * r..(p + 1) * r];
            let found = (0..self.n_real).find(|&q| {
                !self.in_basis[q]
                    && self.cols[q].iter().map(|&(i, v)| row[i] * v).sum::<f64>().abs() > 1e-7
            });
            if let Some(q) = found {
                let alpha = self.column_times_binv(q);
                let theta = self.xb[p] / alpha[p];
                self.pivot(p, q, &alpha, theta);
            }
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` if singular.
fn invert(mut a: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-13 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        let d = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i * n + col];
                if f != 0.0 {
                    for k in 0..n {
                        a[i * n + k] -= f * a[col * n + k];
                        inv[i * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + s1 = 1, y + s2 = 2, x + y + s3 = 2.5
        let mut lp = StandardLp { rows: 3, rhs: vec![1.0, 2.0, 2.5], ..Default::default() };
        lp.add_column(vec![(0, 1.0), (2, 1.0)], -1.0);
        lp.add_column(vec![(1, 1.0), (2, 1.0)], -1.0);
        for i in 0..3 {
            lp.add_column(vec![(i, 1.0)], 0.0);
        }
        let s = solve_standard(&lp, 1000).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 2.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = StandardLp { rows: 1, rhs: vec![-1.0], ..Default::default() };
        lp.add_column(vec![(0, 1.0)], 1.0);
        assert_eq!(solve_standard(&lp, 100).unwrap().status, LpStatus::Infeasible);
        let mut lp = StandardLp { rows: 1, rhs: vec![1.0], ..Default::default() };
        lp.add_column(vec![(0, 1.0)], 0.0);
        lp.add_column(vec![(0, 1.0), (0, -1.0)], -1.0);
        assert_eq!(solve_standard(&lp, 100).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        // Transport 2x2 with all four marginal rows (one redundant).
        let c = [[1.0, 2.0], [3.0, 1.0]];
        let mut lp = StandardLp { rows: 4, rhs: vec![0.5, 0.5, 0.4, 0.6], ..Default::default() };
        for i in 0..2 {
            for j in 0..2 {
                lp.add_column(vec![(i, 1.0), (2 + j, 1.0)], c[i][j]);
            }
        }
        let s = solve_standard(&lp, 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        // 0.4 at (0,0), 0.1 at (0,1), 0.5 at (1,1).
        assert!((s.value - (0.4 + 0.2 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn inverse() {
        let inv = invert(vec![2.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(inv, vec![1.0, -1.0, -1.0, 2.0]);
        assert!(invert(vec![1.0, 1.0, 1.0, 1.0], 2).is_none());
    }
}
