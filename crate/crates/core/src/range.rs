//! Geometric ranges and range families.
//!
//! Membership is boundary-inclusive for every variant, with no floating
//! point slack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Range {
    /// Axis-aligned box `lo <= x <= hi`.
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    /// `dot(normal, x) >= offset`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// An abstract subset given by strictly increasing point indices.
    Explicit { members: Vec<usize> },
}

impl Range {
    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let r = Range::Rect { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let r = Range::Halfspace { normal, offset };
        r.validate()?;
        Ok(r)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let r = Range::Ball { center, radius };
        r.validate()?;
        Ok(r)
    }

    /// Explicit range; the members are sorted and deduplicated.
    pub fn explicit(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Range::Explicit { members }
    }

    /// Geometric dimension, `None` for explicit ranges.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Range::Rect { lo, .. } => Some(lo.len()),
            Range::Halfspace { normal, .. } => Some(normal.len()),
            Range::Ball { center, .. } => Some(center.len()),
            Range::Explicit { .. } => None,
        }
    }

    /// Checks the per-variant invariants (independent of any point set).
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        match self {
            Range::Rect { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.len(),
                        found: hi.len(),
                    });
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return Err(Error::InvalidRange("rect requires lo <= hi".into()));
                }
            }
            Range::Halfspace { normal, offset } => {
                if normal.iter().all(|&v| v == 0.0) {
                    return Err(Error::InvalidRange("halfspace normal is zero".into()));
                }
                if !offset.is_finite() {
                    return Err(Error::InvalidRange("halfspace offset not finite".into()));
                }
            }
            Range::Ball { radius, .. } => {
                if !(*radius >= 0.0) {
                    return Err(Error::InvalidRange("ball radius must be >= 0".into()));
                }
            }
            Range::Explicit { members } => {
                if members.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidRange(
                        "explicit members must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Membership of a coordinate vector. Explicit ranges need the point's
    /// index; use [`Range::contains_index`] for those.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        if let Some(d) = self.dim() {
            if d != point.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: point.len(),
                });
            }
        }
        Ok(match self {
            Range::Rect { lo, hi } => point
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| a <= x && x <= b),
            Range::Halfspace { normal, offset } => dot(normal, point) >= *offset,
            Range::Ball { center, radius } => {
                let d2: f64 = center
                    .iter()
                    .zip(point)
                    .map(|(c, x)| (x - c) * (x - c))
                    .sum();
                d2 <= radius * radius
            }
            Range::Explicit { .. } => {
                return Err(Error::InvalidRange(
                    "explicit range membership needs a point index".into(),
                ))
            }
        })
    }

    /// Membership of point `index` with coordinates `point`.
    pub fn contains_index(&self, index: usize, point: &[f64]) -> Result<bool> {
        match self {
            Range::Explicit { members } => Ok(members.binary_search(&index).is_ok()),
            _ => self.contains(point),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A finite list of ranges.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RangeFamily {
    pub ranges: Vec<Range>,
}

impl RangeFamily {
    pub fn new(ranges: Vec<Range>) -> Self {
        Self { ranges }
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Range> {
        self.ranges.iter()
    }

    /// Checks every range against a point set of `n` points in `dim`
    /// dimensions.
    pub fn validate_for(&self, n: usize, dim: usize) -> Result<()> {
        for r in &self.ranges {
            r.validate()?;
            match r {
                Range::Explicit { members } => {
                    if let Some(&last) = members.last() {
                        if last >= n {
                            return Err(Error::IndexOutOfRange { index: last, len: n });
                        }
                    }
                }
                _ => {
                    let d = r.dim().unwrap_or(dim);
                    if d != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            found: d,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl FromIterator<Range> for RangeFamily {
    fn from_iter<I: IntoIterator<Item = Range>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a RangeFamily {
    type Item = &'a Range;
    type IntoIter = std::slice::Iter<'a, Range>;

    fn into_iter(self) -> Self::IntoIter {
        self.ranges.iter()
    }
}
