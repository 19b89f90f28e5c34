//! Finitely supported probability measures.

use serde::{Deserialize, Serialize};

use crate::error::MeasureError;
use crate::tolerance::Tolerances;

/// A probability measure on finitely many distinct points of `R^d`.
///
/// Zero weights are allowed; such points belong to the point set but not
/// to the support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    labels: Option<Vec<usize>>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, MeasureError> {
        Self::with_tolerances(points, weights, &Tolerances::default())
    }

    pub fn with_tolerances(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::Empty);
        }
        if points.len() != weights.len() {
            return Err(MeasureError::WeightCount {
                points: points.len(),
                weights: weights.len(),
            });
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(MeasureError::NonFiniteCoordinate { index });
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(MeasureError::InvalidWeight { index, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.mass {
            return Err(MeasureError::NotNormalized { total });
        }
        check_distinct(&points, tol.geom)?;
        Ok(Self {
            points,
            weights,
            labels: None,
        })
    }

    /// Uniform weights on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self, MeasureError> {
        let n = points.len().max(1);
        let w = vec![1.0 / n as f64; points.len()];
        Self::new(points, w)
    }

    /// Attach component labels; labels must cover `0..k` without gaps.
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self, MeasureError> {
        if labels.len() != self.points.len() {
            return Err(MeasureError::LabelCount {
                points: self.points.len(),
                labels: labels.len(),
            });
        }
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(label) = seen.iter().position(|s| !s) {
            return Err(MeasureError::EmptyLabelGroup { label });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    /// Euclidean diameter of the support.
    pub fn support_diameter(&self) -> f64 {
        let s = self.support();
        let mut d: f64 = 0.0;
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                d = d.max(euclidean(&self.points[i], &self.points[j]));
            }
        }
        d
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Rejects pairs of points that agree coordinatewise within `tol`.
fn check_distinct(points: &[Vec<f64>], tol: f64) -> Result<(), MeasureError> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    for (k, &a) in order.iter().enumerate() {
        for &b in &order[k + 1..] {
            if points[b][0] - points[a][0] > tol {
                break;
            }
            let same = points[a]
                .iter()
                .zip(&points[b])
                .all(|(x, y)| (x - y).abs() <= tol);
            if same {
                return Err(MeasureError::DuplicatePoint {
                    first: a.min(b),
                    second: a.max(b),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(DiscreteMeasure::new(vec![], vec![]), Err(MeasureError::Empty));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.6]),
            Err(MeasureError::NotNormalized { .. })
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1e-13]], vec![0.5, 0.5]),
            Err(MeasureError::DuplicatePoint { first: 0, second: 1 })
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]),
            Err(MeasureError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.5, -0.5]),
            Err(MeasureError::InvalidWeight { index: 1, .. })
        ));
    }

    #[test]
    fn duplicate_detection_looks_past_first_coordinate() {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1e-13, 0.0]];
        let r = DiscreteMeasure::new(pts, vec![0.2, 0.3, 0.5]);
        assert_eq!(r, Err(MeasureError::DuplicatePoint { first: 0, second: 2 }));
    }

    #[test]
    fn labels_must_be_contiguous() {
        let m = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert!(m.clone().with_labels(vec![0, 1, 1]).is_ok());
        assert_eq!(
            m.clone().with_labels(vec![0, 2, 2]),
            Err(MeasureError::EmptyLabelGroup { label: 1 })
        );
        assert!(matches!(m.with_labels(vec![0]), Err(MeasureError::LabelCount { .. })));
    }

    #[test]
    fn zero_weights_stay_out_of_support() {
        let m = DiscreteMeasure::new(vec![vec![0.0], vec![1.0], vec![3.0]], vec![0.5, 0.0, 0.5])
            .unwrap();
        assert_eq!(m.support(), vec![0, 2]);
        assert_eq!(m.support_diameter(), 3.0);
    }
}
