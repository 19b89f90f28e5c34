//! Exact-rational solves for regression and degenerate inputs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::network_simplex::network_simplex;
use super::{BasisCell, SolveResult};
use crate::cost::{CostSpec, Profile};
use crate::duality::PotentialPair;
use crate::error::SolveError;
use crate::plan::{PlanEntry, TransportPlan};
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub basis: Vec<(usize, usize, BigRational)>,
    pub f: Vec<BigRational>,
    pub g: Vec<BigRational>,
    pub cost: BigRational,
    pub anchor: usize,
    pub iterations: usize,
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact transportation simplex; balance is checked without tolerance.
pub fn solve_exact(
    supply: &[BigRational],
    demand: &[BigRational],
    cost: &[Vec<BigRational>],
    max_iterations: usize,
) -> Result<ExactSolution, SolveError> {
    let (n, m) = (supply.len(), demand.len());
    if cost.len() != n || cost.iter().any(|r| r.len() != m) {
        return Err(SolveError::ExactUnsupported("cost matrix shape".into()));
    }
    if supply.iter().chain(demand).any(|w| w.is_negative()) {
        return Err(SolveError::ExactUnsupported("negative weight".into()));
    }
    let ts: BigRational = supply.iter().cloned().sum();
    let td: BigRational = demand.iter().cloned().sum();
    if ts != td {
        return Err(SolveError::Unbalanced { source_total: to_f64(&ts), target_total: to_f64(&td) });
    }
    let c = |i: usize, j: usize| cost[i][j].clone();
    let sol = network_simplex(supply, demand, &c, &BigRational::zero(), max_iterations)?;
    let g: Vec<BigRational> = (0..m)
        .map(|j| (0..n).map(|i| &cost[i][j] - &sol.u[i]).min().expect("n > 0"))
        .collect();
    let f: Vec<BigRational> = (0..n)
        .map(|i| (0..m).map(|j| &cost[i][j] - &g[j]).min().expect("m > 0"))
        .collect();
    let anchor = supply.iter().position(|w| w.is_positive()).ok_or_else(|| {
        SolveError::ExactUnsupported("source measure has no mass".into())
    })?;
    let shift = f[anchor].clone();
    let f: Vec<BigRational> = f.iter().map(|v| v - &shift).collect();
    let g: Vec<BigRational> = g.iter().map(|v| v + &shift).collect();
    let basis: Vec<(usize, usize, BigRational)> = sol
        .cells
        .iter()
        .zip(sol.flows)
        .map(|(&(i, j), x)| (i, j, x))
        .collect();
    let total = basis
        .iter()
        .fold(BigRational::zero(), |acc, (i, j, x)| acc + &cost[*i][*j] * x);
    Ok(ExactSolution { basis, f, g, cost: total, anchor, iterations: sol.iterations })
}

impl ExactSolution {
    /// Floating-point view; positive basic flows form the plan.
    pub fn to_solve_result(&self, problem: &Problem) -> SolveResult {
        let basis: Vec<BasisCell> = self
            .basis
            .iter()
            .map(|(i, j, x)| BasisCell { i: *i, j: *j, flow: to_f64(x) })
            .collect();
        let plan = TransportPlan::from_entries(
            problem.n(),
            problem.m(),
            self.basis
                .iter()
                .filter(|(_, _, x)| x.is_positive())
                .map(|(i, j, x)| PlanEntry { i: *i, j: *j, mass: to_f64(x) }),
            0.0,
        );
        SolveResult {
            plan,
            pair: PotentialPair {
                f: self.f.iter().map(to_f64).collect(),
                g: self.g.iter().map(to_f64).collect(),
            },
            basis,
            anchor: self.anchor,
            cost: to_f64(&self.cost),
            iterations: self.iterations,
        }
    }
}

/// Rational cost matrix for costs that are polynomial in the coordinates.
pub fn exact_cost_matrix(
    source: &[Vec<BigRational>],
    target: &[Vec<BigRational>],
    spec: &CostSpec,
) -> Result<Vec<Vec<BigRational>>, SolveError> {
    let unsupported = |why: &str| SolveError::ExactUnsupported(why.to_string());
    let cell: Box<dyn Fn(&[BigRational], &[BigRational]) -> BigRational> = match spec {
        CostSpec::ExplicitMatrix { values } => {
            let exact: Option<Vec<Vec<BigRational>>> = values
                .iter()
                .map(|r| r.iter().map(|v| BigRational::from_float(*v)).collect())
                .collect();
            return exact.ok_or_else(|| unsupported("non-finite cost entry"));
        }
        CostSpec::LpNormPower { q, p } => {
            let int_p = (p.fract() == 0.0 && *p >= 1.0 && *p <= 64.0).then_some(*p as i32);
            match (*q, int_p) {
                (q, Some(p)) if q == 1.0 => Box::new(move |x, y| {
                    let s: BigRational = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
                    s.pow(p)
                }),
                (q, Some(p)) if q == 2.0 && p % 2 == 0 => Box::new(move |x, y| {
                    let s: BigRational = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                    s.pow(p / 2)
                }),
                _ => return Err(unsupported("lp_norm_power needs q = 1 with integer p, or q = 2 with even p")),
            }
        }
        CostSpec::ProfileOfDistance { profile: Profile::Polynomial { coefficients } } => {
            if coefficients.iter().enumerate().any(|(k, c)| k % 2 == 1 && *c != 0.0) {
                return Err(unsupported("polynomial profile must have only even powers"));
            }
            let coeffs: Vec<BigRational> = coefficients
                .iter()
                .map(|c| BigRational::from_float(*c).expect("validated finite"))
                .collect();
            Box::new(move |x, y| {
                let r2: BigRational = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                coeffs
                    .iter()
                    .enumerate()
                    .step_by(2)
                    .fold(BigRational::zero(), |acc, (k, c)| acc + c * r2.pow(k as i32 / 2))
            })
        }
        CostSpec::ProfileOfDistance { .. } => return Err(unsupported("tabulated profile")),
    };
    Ok(source
        .iter()
        .map(|x| target.iter().map(|y| cell(x, y)).collect())
        .collect())
}

/// Parses `p/q`, an integer, or a finite decimal such as `-0.125` or `1e-3`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut r = BigRational::from_integer(num) * ten.pow(scale);
    if neg {
        r = -r;
    }
    Some(r)
}
