//! Colored, optionally weighted point sets.

use crate::error::{Error, Result};

/// `n` points in `R^dim`, each carrying a group id in `0..k` and an optional
/// positive weight.
///
/// Coordinates are stored row-major in one flat buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredPointSet {
    dim: usize,
    coords: Vec<f64>,
    colors: Vec<usize>,
    weights: Option<Vec<f64>>,
    k: usize,
    labels: Vec<String>,
}

impl ColoredPointSet {
    /// Builds a point set from per-point coordinate vectors. `k` is taken as
    /// `max(color) + 1`.
    pub fn new(points: Vec<Vec<f64>>, colors: Vec<usize>) -> Result<Self> {
        let k = colors.iter().max().map_or(0, |&c| c + 1);
        Self::with_groups(points, colors, None, k)
    }

    pub fn with_weights(
        points: Vec<Vec<f64>>,
        colors: Vec<usize>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let k = colors.iter().max().map_or(0, |&c| c + 1);
        Self::with_groups(points, colors, Some(weights), k)
    }

    /// Full constructor with an explicit group count (groups may be empty).
    pub fn with_groups(
        points: Vec<Vec<f64>>,
        colors: Vec<usize>,
        weights: Option<Vec<f64>>,
        k: usize,
    ) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if !points.is_empty() && dim == 0 {
            return Err(Error::InvalidPointSet("points must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, colors, weights, k)
    }

    /// Builds from a flat row-major coordinate buffer.
    pub fn from_flat(
        dim: usize,
        coords: Vec<f64>,
        colors: Vec<usize>,
        weights: Option<Vec<f64>>,
        k: usize,
    ) -> Result<Self> {
        let n = colors.len();
        if n > 0 && dim == 0 {
            return Err(Error::InvalidPointSet("points must have dimension >= 1".into()));
        }
        if coords.len() != n * dim {
            return Err(Error::InvalidPointSet(format!(
                "{} coordinates do not match {} points of dimension {}",
                coords.len(),
                n,
                dim
            )));
        }
        if let Some(&bad) = colors.iter().find(|&&c| c >= k) {
            return Err(Error::InvalidPointSet(format!(
                "group id {bad} outside 0..{k}"
            )));
        }
        if let Some(w) = &weights {
            if w.len() != n {
                return Err(Error::InvalidPointSet(format!(
                    "{} weights for {} points",
                    w.len(),
                    n
                )));
            }
            if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidPointSet(format!(
                    "weights must be positive, found {bad}"
                )));
            }
        }
        let labels = (0..k).map(|c| c.to_string()).collect();
        Ok(Self {
            dim,
            coords,
            colors,
            weights,
            k,
            labels,
        })
    }

    /// Attaches human-readable group labels (one per group id).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.k {
            return Err(Error::InvalidPointSet(format!(
                "{} labels for {} groups",
                labels.len(),
                self.k
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of groups.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn color(&self, i: usize) -> usize {
        self.colors[i]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Weight of point `i` (1 when the set is unweighted).
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.len() as f64,
        }
    }

    /// Weights divided by their total, so they sum to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let total = self.total_weight();
        (0..self.len()).map(|i| self.weight(i) / total).collect()
    }

    /// `|X_c|` for every group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.colors {
            sizes[c] += 1;
        }
        sizes
    }

    /// Indices of each group, in increasing index order.
    pub fn group_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &c) in self.colors.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    /// Per-group counts within `subset`.
    pub fn count_colors(&self, subset: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &i in subset {
            counts[self.colors[i]] += 1;
        }
        counts
    }

    /// The sub-point-set at `indices` (in the given order). Group ids and
    /// labels are kept so ratios remain comparable.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut colors = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            coords.extend_from_slice(self.point(i));
            colors.push(self.colors[i]);
        }
        let weights = self
            .weights
            .as_ref()
            .map(|w| indices.iter().map(|&i| w[i]).collect());
        Ok(Self {
            dim: self.dim,
            coords,
            colors,
            weights,
            k: self.k,
            labels: self.labels.clone(),
        })
    }

    /// Checks that every index is in range.
    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        let n = self.len();
        match indices.iter().find(|&&i| i >= n) {
            Some(&i) => Err(Error::IndexOutOfRange { index: i, len: n }),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_points() {
        let err = ColoredPointSet::new(vec![vec![0.0, 1.0], vec![2.0]], vec![0, 0]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let err = ColoredPointSet::with_weights(vec![vec![0.0], vec![1.0]], vec![0, 1], vec![1.0, 0.0]);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_color_outside_k() {
        let err = ColoredPointSet::with_groups(vec![vec![0.0]], vec![2], None, 2);
        assert!(err.is_err());
    }

    #[test]
    fn group_bookkeeping() {
        let x = ColoredPointSet::new(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![1, 0, 1, 1],
        )
        .unwrap();
        assert_eq!(x.k(), 2);
        assert_eq!(x.group_sizes(), vec![1, 3]);
        assert_eq!(x.group_members(), vec![vec![1], vec![0, 2, 3]]);
        assert_eq!(x.count_colors(&[0, 1]), vec![1, 1]);
        assert_eq!(x.point(2), &[2.0]);
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let x = ColoredPointSet::with_weights(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![0, 0, 1],
            vec![1.0, 1.0, 2.0],
        )
        .unwrap();
        let w = x.normalized_weights();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(w[2], 0.5);
    }
}
