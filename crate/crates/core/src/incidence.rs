//! Materialized point-in-range membership.

use std::collections::HashSet;

use crate::bitrow::BitRow;
use crate::error::{Error, Result};
use crate::points::ColoredPointSet;
use crate::range::RangeFamily;

/// Slack used when comparing weight sums against a threshold.
pub const WEIGHT_SLACK: f64 = 1e-12;

/// `m` rows of `n` bits; row `j` bit `i` is set iff point `i` lies in range `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix {
    n: usize,
    rows: Vec<BitRow>,
    cardinality: Vec<usize>,
    weight_sums: Option<Vec<f64>>,
    total_weight: f64,
}

impl IncidenceMatrix {
    /// Evaluates every range on every point.
    pub fn materialize(x: &ColoredPointSet, family: &RangeFamily) -> Result<Self> {
        let n = x.len();
        if !x.is_empty() {
            family.validate_for(n, x.dim())?;
        }
        let mut rows = Vec::with_capacity(family.len());
        for range in family {
            let mut row = BitRow::zeros(n);
            for i in 0..n {
                if range.contains_index(i, x.point(i))? {
                    row.set(i);
                }
            }
            rows.push(row);
        }
        let mut inc = Self::from_rows(n, rows);
        if let Some(w) = x.weights() {
            inc.weight_sums = Some(
                inc.rows
                    .iter()
                    .map(|r| r.iter_ones().map(|i| w[i]).sum())
                    .collect(),
            );
            inc.total_weight = w.iter().sum();
        }
        Ok(inc)
    }

    /// Builds an unweighted matrix from precomputed rows.
    pub fn from_rows(n: usize, rows: Vec<BitRow>) -> Self {
        assert!(rows.iter().all(|r| r.len() == n), "row length mismatch");
        let cardinality = rows.iter().map(BitRow::count_ones).collect();
        Self {
            n,
            rows,
            cardinality,
            weight_sums: None,
            total_weight: n as f64,
        }
    }

    /// Builds an unweighted matrix from member index lists.
    pub fn from_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        let mut rows = Vec::with_capacity(sets.len());
        for set in sets {
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, len: n });
            }
            rows.push(BitRow::from_indices(n, set.iter().copied()));
        }
        Ok(Self::from_rows(n, rows))
    }

    /// Number of points (columns).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of ranges (rows).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, j: usize) -> &BitRow {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn cardinality(&self, j: usize) -> usize {
        self.cardinality[j]
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinality
    }

    pub fn weight_sums(&self) -> Option<&[f64]> {
        self.weight_sums.as_deref()
    }

    pub fn members(&self, j: usize) -> Vec<usize> {
        self.rows[j].iter_ones().collect()
    }

    pub fn contains(&self, j: usize, i: usize) -> bool {
        self.rows[j].get(i)
    }

    /// Keeps the listed rows (in the given order), caches included.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            n: self.n,
            rows: rows.iter().map(|&j| self.rows[j].clone()).collect(),
            cardinality: rows.iter().map(|&j| self.cardinality[j]).collect(),
            weight_sums: self
                .weight_sums
                .as_ref()
                .map(|w| rows.iter().map(|&j| w[j]).collect()),
            total_weight: self.total_weight,
        }
    }

    /// The distinct nonempty subsets `R ∩ T` for `T = subset`.
    ///
    /// Column `t` of the result corresponds to point `subset[t]`. Rows keep
    /// the order of their first occurrence.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.n });
        }
        Ok(Self::from_rows(
            subset.len(),
            dedup_nonempty(self.rows.iter().map(|r| r.gather(subset))),
        ))
    }

    /// Rows whose cardinality is at least `eps * n`, or whose normalized
    /// weight is at least `eps - 1e-12` when `use_weights` is set.
    pub fn heavy_ranges(&self, eps: f64, use_weights: bool) -> Result<Vec<usize>> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidEpsilon(eps));
        }
        if use_weights {
            let sums = self.weight_sums.as_ref().ok_or_else(|| {
                Error::InvalidParameter("weighted heavy ranges need point weights".into())
            })?;
            Ok((0..self.m())
                .filter(|&j| sums[j] / self.total_weight >= eps - WEIGHT_SLACK)
                .collect())
        } else {
            // absorbs round-off in eps * n for eps = a/n
            let threshold = eps * self.n as f64 - 1e-9;
            Ok((0..self.m())
                .filter(|&j| self.cardinality[j] as f64 >= threshold)
                .collect())
        }
    }

    /// Point-major view: entry `i` holds the rows containing point `i`.
    pub fn transpose(&self) -> Vec<BitRow> {
        let m = self.m();
        let mut cols = vec![BitRow::zeros(m); self.n];
        for (j, row) in self.rows.iter().enumerate() {
            for i in row.iter_ones() {
                cols[i].set(j);
            }
        }
        cols
    }
}

/// Drops empty rows and duplicates, keeping first occurrences in order.
pub(crate) fn dedup_nonempty(rows: impl Iterator<Item = BitRow>) -> Vec<BitRow> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in rows {
        if r.any() && seen.insert(r.clone()) {
            out.push(r);
        }
    }
    out
}
