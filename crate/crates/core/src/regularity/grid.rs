//! Regular grids: generation, detection and CSV output.

use std::collections::HashMap;
use std::io::{self, Write};

/// Points of the lattice `lower + k * (upper - lower) / (counts - 1)`,
/// last axis varying fastest.
pub fn regular_grid(lower: &[f64], upper: &[f64], counts: &[usize]) -> Vec<Vec<f64>> {
    let d = lower.len();
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut k| {
            let mut p = vec![0.0; d];
            for axis in (0..d).rev() {
                let c = counts[axis];
                let idx = k % c;
                k /= c;
                p[axis] = if c == 1 {
                    lower[axis]
                } else {
                    lower[axis] + (upper[axis] - lower[axis]) * idx as f64 / (c - 1) as f64
                };
            }
            p
        })
        .collect()
}

/// A set of points recognised as a subset of a regular lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub origin: Vec<f64>,
    /// Lattice spacing per axis; `0` for an axis with a single coordinate.
    pub spacing: Vec<f64>,
    /// Integer lattice coordinates of each input point.
    pub index: Vec<Vec<i64>>,
    lookup: HashMap<Vec<i64>, usize>,
}

impl Grid {
    /// Position (in the input list) of the point at the given lattice index.
    pub fn find(&self, idx: &[i64]) -> Option<usize> {
        self.lookup.get(idx).copied()
    }

    /// Positions of the `-h` and `+h` neighbours along `axis`, if present.
    pub fn neighbours(&self, k: usize, axis: usize) -> Option<(usize, usize)> {
        if self.spacing[axis] == 0.0 {
            return None;
        }
        let mut lo = self.index[k].clone();
        let mut hi = self.index[k].clone();
        lo[axis] -= 1;
        hi[axis] += 1;
        Some((self.find(&lo)?, self.find(&hi)?))
    }

    /// Points with both neighbours present along every non-degenerate axis.
    pub fn interior(&self) -> Vec<bool> {
        let d = self.spacing.len();
        (0..self.index.len())
            .map(|k| {
                (0..d).filter(|&a| self.spacing[a] > 0.0).count() > 0
                    && (0..d).all(|a| self.spacing[a] == 0.0 || self.neighbours(k, a).is_some())
            })
            .collect()
    }
}

/// Recognises points lying on a common regular lattice.
pub fn detect_grid(points: &[Vec<f64>]) -> Option<Grid> {
    let d = points.first()?.len();
    let mut origin = vec![0.0; d];
    let mut spacing = vec![0.0; d];
    for a in 0..d {
        let mut xs: Vec<f64> = points.iter().map(|p| p[a]).collect();
        xs.sort_by(f64::total_cmp);
        let span = xs[xs.len() - 1] - xs[0];
        let tol = 1e-9 * (1.0 + span.abs());
        xs.dedup_by(|x, y| (*x - *y).abs() <= tol);
        origin[a] = xs[0];
        if xs.len() > 1 {
            let h = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            spacing[a] = h;
        }
    }
    let mut index = Vec::with_capacity(points.len());
    let mut lookup = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        let mut idx = vec![0i64; d];
        for a in 0..d {
            if spacing[a] > 0.0 {
                let t = (p[a] - origin[a]) / spacing[a];
                let r = t.round();
                if (t - r).abs() > 1e-6 {
                    return None;
                }
                idx[a] = r as i64;
            }
        }
        if lookup.insert(idx.clone(), k).is_some() {
            return None;
        }
        index.push(idx);
    }
    Some(Grid { origin, spacing, index, lookup })
}

/// Writes `x1,...,xd,value` rows.
pub fn write_csv<W: Write>(mut w: W, points: &[Vec<f64>], values: &[f64]) -> io::Result<()> {
    let d = points.first().map_or(0, |p| p.len());
    let header: Vec<String> = (1..=d).map(|k| format!("x{k}")).chain(["value".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (p, v) in points.iter().zip(values) {
        let row: Vec<String> = p.iter().chain(std::iter::once(v)).map(|x| format!("{x}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
