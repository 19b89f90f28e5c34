//! A transport problem: two measures and a cost, with a per-cell cost cache.

use std::sync::OnceLock;

use crate::cost::{ClosedFormCost, CostSpec};
use crate::error::CostError;
use crate::measure::DiscreteMeasure;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug)]
pub struct Problem {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    spec: CostSpec,
    closed: Option<ClosedFormCost>,
    cells: Vec<OnceLock<f64>>,
    max_cost: OnceLock<f64>,
    tol: Tolerances,
}

impl Problem {
    pub fn new(source: DiscreteMeasure, target: DiscreteMeasure, spec: CostSpec) -> Result<Self, CostError> {
        Self::with_tolerances(source, target, spec, Tolerances::default())
    }

    pub fn with_tolerances(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        spec: CostSpec,
        tol: Tolerances,
    ) -> Result<Self, CostError> {
        spec.validate()?;
        let (n, m) = (source.len(), target.len());
        if let CostSpec::ExplicitMatrix { values } = &spec {
            let cols = values.first().map_or(0, |r| r.len());
            if values.len() != n || values.iter().any(|r| r.len() != m) {
                return Err(CostError::Shape { rows: values.len(), cols, n, m });
            }
        } else if source.dim() != target.dim() {
            return Err(CostError::DimensionMismatch(source.dim(), target.dim()));
        }
        let closed = spec.closed_form();
        let problem = Self {
            source,
            target,
            spec,
            closed,
            cells: (0..n * m).map(|_| OnceLock::new()).collect(),
            max_cost: OnceLock::new(),
            tol,
        };
        if matches!(problem.spec, CostSpec::ProfileOfDistance { .. }) {
            for i in 0..n {
                for j in 0..m {
                    let v = problem.cost(i, j);
                    if !v.is_finite() || v < 0.0 {
                        return Err(CostError::InvalidEntry { i, j, value: v });
                    }
                }
            }
        }
        Ok(problem)
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn cost_spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn closed_form(&self) -> Option<&ClosedFormCost> {
        self.closed.as_ref()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn n(&self) -> usize {
        self.source.len()
    }

    pub fn m(&self) -> usize {
        self.target.len()
    }

    /// `c(x_i, y_j)`, evaluated on first use and cached.
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        match &self.spec {
            CostSpec::ExplicitMatrix { values } => values[i][j],
            _ => *self.cells[i * self.m() + j].get_or_init(|| {
                let c = self.closed.as_ref().expect("closed-form cost");
                c.eval(self.source.point(i), self.target.point(j))
            }),
        }
    }

    pub fn max_cost(&self) -> f64 {
        *self.max_cost.get_or_init(|| {
            let mut mx: f64 = 0.0;
            for i in 0..self.n() {
                for j in 0..self.m() {
                    mx = mx.max(self.cost(i, j).abs());
                }
            }
            mx
        })
    }

    /// Absolute tightness threshold for this problem.
    pub fn tight_tol(&self) -> f64 {
        self.tol.tight_abs(self.max_cost())
    }

    /// Sub-problem on the given source and target indices with new weights.
    pub fn subproblem(
        &self,
        sources: &[usize],
        targets: &[usize],
        source_weights: Vec<f64>,
        target_weights: Vec<f64>,
    ) -> Result<Problem, crate::error::DecomposeError> {
        let mu = DiscreteMeasure::with_tolerances(
            sources.iter().map(|&i| self.source.point(i).to_vec()).collect(),
            source_weights,
            &self.tol,
        )?;
        let nu = DiscreteMeasure::with_tolerances(
            targets.iter().map(|&j| self.target.point(j).to_vec()).collect(),
            target_weights,
            &self.tol,
        )?;
        let spec = match &self.spec {
            CostSpec::ExplicitMatrix { values } => CostSpec::ExplicitMatrix {
                values: sources
                    .iter()
                    .map(|&i| targets.iter().map(|&j| values[i][j]).collect())
                    .collect(),
            },
            other => other.clone(),
        };
        Ok(Problem::with_tolerances(mu, nu, spec, self.tol)?)
    }
}
