//! Target group ratios and the two unfairness measures.
//!
//! Both measures work on group *counts* of the selected subset, even when
//! the run itself was weighted.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::ColoredPointSet;

const SUM_TOLERANCE: f64 = 1e-9;

/// Target ratio vector `(tau_1, ..., tau_k)`, each in `(0, 1]`, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GroupRatios {
    taus: Vec<f64>,
}

impl GroupRatios {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidRatios("at least one ratio is required".into()));
        }
        if let Some(bad) = taus.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidRatios(format!("ratio {bad} outside (0, 1]")));
        }
        let sum: f64 = taus.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidRatios(format!("ratios sum to {sum}")));
        }
        Ok(Self { taus })
    }

    pub fn k(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn tau(&self, l: usize) -> f64 {
        self.taus[l]
    }

    pub fn min_tau(&self) -> f64 {
        self.taus.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when both vectors agree entry-wise within `tol`.
    pub fn approx_eq(&self, other: &GroupRatios, tol: f64) -> bool {
        self.k() == other.k()
            && self
                .taus
                .iter()
                .zip(&other.taus)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// True when `size * tau_l` is an integer (within 1e-9) for every group.
    pub fn integral_at(&self, size: usize) -> bool {
        self.taus.iter().all(|&t| {
            let v = t * size as f64;
            (v - v.round()).abs() <= 1e-9
        })
    }
}

impl TryFrom<Vec<f64>> for GroupRatios {
    type Error = Error;

    fn try_from(taus: Vec<f64>) -> Result<Self> {
        Self::new(taus)
    }
}

impl From<GroupRatios> for Vec<f64> {
    fn from(r: GroupRatios) -> Self {
        r.taus
    }
}

/// The ratio argument accepted on the command line: `dp` or a comma list of
/// decimals or fractions (`0.5,0.3,0.2`, `1/2,1/3,1/6`).
#[derive(Debug, Clone, PartialEq)]
pub enum RatioSpec {
    DemographicParity,
    Custom(GroupRatios),
}

impl RatioSpec {
    /// Resolves the spec against a point set.
    pub fn resolve(&self, x: &ColoredPointSet, use_weights: bool) -> Result<GroupRatios> {
        match self {
            RatioSpec::DemographicParity => dp_ratios(x, use_weights),
            RatioSpec::Custom(r) => {
                if r.k() != x.k() {
                    return Err(Error::InvalidRatios(format!(
                        "{} ratios for {} groups",
                        r.k(),
                        x.k()
                    )));
                }
                Ok(r.clone())
            }
        }
    }
}

impl FromStr for RatioSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("dp") {
            return Ok(RatioSpec::DemographicParity);
        }
        let taus = s
            .split(',')
            .map(parse_ratio)
            .collect::<Result<Vec<_>>>()?;
        Ok(RatioSpec::Custom(GroupRatios::new(taus)?))
    }
}

fn parse_ratio(item: &str) -> Result<f64> {
    let item = item.trim();
    let bad = || Error::InvalidRatios(format!("cannot parse ratio '{item}'"));
    match item.split_once('/') {
        Some((num, den)) => {
            let num: u64 = num.trim().parse().map_err(|_| bad())?;
            let den: u64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            Ok(num as f64 / den as f64)
        }
        None => item.parse().map_err(|_| bad()),
    }
}

/// Demographic-parity ratios: `|X_c| / |X|`, or the normalized group weight
/// sums when `use_weights` is set.
pub fn dp_ratios(x: &ColoredPointSet, use_weights: bool) -> Result<GroupRatios> {
    if x.is_empty() {
        return Err(Error::InvalidPointSet("point set is empty".into()));
    }
    let mut mass = vec![0.0; x.k()];
    let mut counts = vec![0usize; x.k()];
    for i in 0..x.len() {
        let c = x.color(i);
        counts[c] += 1;
        mass[c] += if use_weights { x.weight(i) } else { 1.0 };
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyGroup(empty));
    }
    let total: f64 = mass.iter().sum();
    let mut taus: Vec<f64> = mass.iter().map(|m| m / total).collect();
    // re-close the sum after division round-off
    let sum: f64 = taus.iter().sum();
    taus.iter_mut().for_each(|t| *t /= sum);
    GroupRatios::new(taus)
}

/// Group shares of `subset`, aligned with `ratios`.
fn shares(subset: &[usize], x: &ColoredPointSet, ratios: &GroupRatios) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!(
            "{} ratios for {} groups",
            ratios.k(),
            x.k()
        )));
    }
    x.check_indices(subset)?;
    let counts = x.count_colors(subset);
    let size = subset.len() as f64;
    Ok(counts.iter().map(|&c| c as f64 / size).collect())
}

/// Mean squared deviation of the subset's group shares from the targets.
pub fn f2(subset: &[usize], x: &ColoredPointSet, ratios: &GroupRatios) -> Result<f64> {
    let s = shares(subset, x, ratios)?;
    let k = ratios.k() as f64;
    Ok(s.iter()
        .zip(ratios.taus())
        .map(|(a, t)| (a - t) * (a - t))
        .sum::<f64>()
        / k)
}

/// Largest absolute deviation of the subset's group shares from the targets.
pub fn finf(subset: &[usize], x: &ColoredPointSet, ratios: &GroupRatios) -> Result<f64> {
    let s = shares(subset, x, ratios)?;
    Ok(s.iter()
        .zip(ratios.taus())
        .map(|(a, t)| (a - t).abs())
        .fold(0.0, f64::max))
}
