//! Cost functions: closed-form kinds and explicit matrices.

use serde::{Deserialize, Serialize};

use crate::error::CostError;

/// A cost function on `X x Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `c(x, y) = |x - y|_q^p`.
    LpNormPower { q: f64, p: f64 },
    /// `c(x, y) = h(|x - y|_2)`.
    ProfileOfDistance { profile: Profile },
    /// `c(x_i, y_j) = values[i][j]`.
    ExplicitMatrix { values: Vec<Vec<f64>> },
}

/// Radial profile `h : [0, inf) -> [0, inf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Piecewise-linear interpolation of `(r, h)` knots starting at `r = 0`,
    /// extended linearly past the last knot.
    Tabulated { knots: Vec<[f64; 2]> },
    /// `h(r) = sum_k coefficients[k] r^k`.
    Polynomial { coefficients: Vec<f64> },
}

/// Cost that can be evaluated at arbitrary points.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedFormCost {
    LpNormPower { q: f64, p: f64 },
    Profile(Profile),
}

impl CostSpec {
    pub fn lp(q: f64, p: f64) -> Self {
        CostSpec::LpNormPower { q, p }
    }

    pub fn squared_euclidean() -> Self {
        CostSpec::LpNormPower { q: 2.0, p: 2.0 }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        match self {
            CostSpec::LpNormPower { q, p } => validate_lp(*q, *p),
            CostSpec::ProfileOfDistance { profile } => profile.validate(),
            CostSpec::ExplicitMatrix { values } => {
                for (i, row) in values.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if !v.is_finite() || v < 0.0 {
                            return Err(CostError::InvalidEntry { i, j, value: v });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn closed_form(&self) -> Option<ClosedFormCost> {
        match self {
            CostSpec::LpNormPower { q, p } => Some(ClosedFormCost::LpNormPower { q: *q, p: *p }),
            CostSpec::ProfileOfDistance { profile } => Some(ClosedFormCost::Profile(profile.clone())),
            CostSpec::ExplicitMatrix { .. } => None,
        }
    }
}

fn validate_lp(q: f64, p: f64) -> Result<(), CostError> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(CostError::InvalidExponent(format!("q = {q}, need 1 <= q < inf")));
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(CostError::InvalidExponent(format!("p = {p}, need p > 0")));
    }
    Ok(())
}

impl Profile {
    pub fn validate(&self) -> Result<(), CostError> {
        match self {
            Profile::Tabulated { knots } => {
                if knots.len() < 2 {
                    return Err(CostError::InvalidProfile("need at least two knots".into()));
                }
                if knots[0][0] != 0.0 {
                    return Err(CostError::InvalidProfile("first knot must be at r = 0".into()));
                }
                for k in knots {
                    if !k[0].is_finite() || !k[1].is_finite() || k[1] < 0.0 {
                        return Err(CostError::InvalidProfile(format!("bad knot {k:?}")));
                    }
                }
                if knots.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(CostError::InvalidProfile("knots must increase in r".into()));
                }
                if self.tail_slope() < 0.0 {
                    return Err(CostError::InvalidProfile("profile turns negative".into()));
                }
                Ok(())
            }
            Profile::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(CostError::InvalidProfile("bad coefficients".into()));
                }
                let lead = coefficients.iter().rev().find(|c| **c != 0.0).copied().unwrap_or(0.0);
                if lead < 0.0 || coefficients[0] < 0.0 {
                    return Err(CostError::InvalidProfile("profile turns negative".into()));
                }
                Ok(())
            }
        }
    }

    fn tail_slope(&self) -> f64 {
        match self {
            Profile::Tabulated { knots } => {
                let a = knots[knots.len() - 2];
                let b = knots[knots.len() - 1];
                (b[1] - a[1]) / (b[0] - a[0])
            }
            Profile::Polynomial { .. } => f64::INFINITY,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Tabulated { knots } => {
                let k = segment(knots, r);
                let (a, b) = (knots[k], knots[k + 1]);
                a[1] + (b[1] - a[1]) * (r - a[0]) / (b[0] - a[0])
            }
            Profile::Polynomial { coefficients } => horner(coefficients, r),
        }
    }

    /// Right derivative `h'(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Profile::Tabulated { knots } => {
                let k = segment(knots, r);
                let (a, b) = (knots[k], knots[k + 1]);
                (b[1] - a[1]) / (b[0] - a[0])
            }
            Profile::Polynomial { coefficients } => horner(&poly_derivative(coefficients), r),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            Profile::Tabulated { knots } => knots.windows(2).all(|w| w[1][1] >= w[0][1]),
            Profile::Polynomial { coefficients } => {
                let d = poly_derivative(coefficients);
                let bound = cauchy_bound(&d);
                let lead = d.iter().rev().find(|c| **c != 0.0).copied().unwrap_or(0.0);
                if lead < 0.0 {
                    return false;
                }
                let scale = d.iter().map(|c| c.abs()).fold(0.0, f64::max);
                (0..=4096).all(|k| horner(&d, bound * k as f64 / 4096.0) >= -1e-12 * (1.0 + scale))
            }
        }
    }

    /// `inf_{b >= a} h'(b)`.
    pub fn derivative_lower_envelope(&self, a: f64) -> f64 {
        match self {
            Profile::Tabulated { knots } => {
                let k = segment(knots, a);
                (k..knots.len() - 1)
                    .map(|s| (knots[s + 1][1] - knots[s][1]) / (knots[s + 1][0] - knots[s][0]))
                    .fold(f64::INFINITY, f64::min)
            }
            Profile::Polynomial { coefficients } => {
                let d = poly_derivative(coefficients);
                if d.iter().all(|c| *c == 0.0) {
                    return 0.0;
                }
                let dd = poly_derivative(&d);
                if dd.iter().all(|c| *c == 0.0) {
                    return d[0];
                }
                // Beyond the root bound of h'' the derivative is monotone.
                let span = cauchy_bound(&dd) + 1.0;
                let lead = d.iter().rev().find(|c| **c != 0.0).copied().unwrap_or(0.0);
                if lead < 0.0 {
                    return f64::NEG_INFINITY;
                }
                (0..=4096)
                    .map(|k| horner(&d, a + span * k as f64 / 4096.0))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn segment(knots: &[[f64; 2]], r: f64) -> usize {
    let last = knots.len() - 2;
    knots.windows(2).position(|w| r < w[1][0]).unwrap_or(last).min(last)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

/// Upper bound on the magnitude of real roots.
fn cauchy_bound(c: &[f64]) -> f64 {
    let lead_idx = match c.iter().rposition(|v| *v != 0.0) {
        Some(i) if i > 0 => i,
        _ => return 1.0,
    };
    let lead = c[lead_idx].abs();
    1.0 + c[..lead_idx].iter().map(|v| v.abs() / lead).fold(0.0, f64::max)
}

impl ClosedFormCost {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            ClosedFormCost::LpNormPower { q, p } => lp_power(x, y, *q, *p),
            ClosedFormCost::Profile(h) => h.eval(crate::measure::euclidean(x, y)),
        }
    }

    /// Gradient of `c(., y)` at `x`; zero where the norm is not differentiable.
    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        match self {
            ClosedFormCost::LpNormPower { q, p } => {
                let (q, p) = (*q, *p);
                if q == 2.0 && p == 2.0 {
                    return d.iter().map(|v| 2.0 * v).collect();
                }
                let r = lp_norm(&d, q);
                if r == 0.0 {
                    return vec![0.0; d.len()];
                }
                let outer = p * r.powf(p - 1.0);
                d.iter()
                    .map(|v| outer * v.signum() * (v.abs() / r).powf(q - 1.0))
                    .collect()
            }
            ClosedFormCost::Profile(h) => {
                let r = lp_norm(&d, 2.0);
                if r == 0.0 {
                    return vec![0.0; d.len()];
                }
                let s = h.derivative(r) / r;
                d.iter().map(|v| s * v).collect()
            }
        }
    }

    /// Radial profile `h` with `c(x, y) = h(|x - y|)` for the natural norm.
    pub fn radial(&self, r: f64) -> f64 {
        match self {
            ClosedFormCost::LpNormPower { p, .. } => r.powf(*p),
            ClosedFormCost::Profile(h) => h.eval(r),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        match self {
            ClosedFormCost::LpNormPower { .. } => true,
            ClosedFormCost::Profile(h) => h.is_nondecreasing(),
        }
    }

    /// `g(a) = inf_{b >= a} h'(b)` for the radial profile.
    pub fn superlinearity_bound(&self, a: f64) -> f64 {
        match self {
            ClosedFormCost::LpNormPower { p, .. } => {
                let p = *p;
                if p < 1.0 {
                    0.0
                } else if p == 1.0 {
                    1.0
                } else {
                    p * a.max(0.0).powf(p - 1.0)
                }
            }
            ClosedFormCost::Profile(h) => h.derivative_lower_envelope(a.max(0.0)),
        }
    }
}

fn lp_norm(d: &[f64], q: f64) -> f64 {
    if q == 1.0 {
        d.iter().map(|v| v.abs()).sum()
    } else if q == 2.0 {
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        d.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn lp_power(x: &[f64], y: &[f64], q: f64, p: f64) -> f64 {
    if q == 2.0 && p == 2.0 {
        return x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let r = lp_norm(&d, q);
    if p == 1.0 {
        r
    } else if p == 2.0 {
        r * r
    } else {
        r.powf(p)
    }
}
