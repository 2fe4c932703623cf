//! Definitional checks and exhaustive baselines.
//!
//! Nothing here calls into the construction modules; the only shared code is
//! the membership data in [`IncidenceMatrix`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::discrepancy::Matching;
use crate::error::{Error, Result};
use crate::fairness::GroupRatios;
use crate::incidence::IncidenceMatrix;
use crate::points::ColoredPointSet;

/// Largest point count accepted by [`brute_min_fair_hitting_set`].
pub const MAX_HITTING_POINTS: usize = 20;
/// Largest pair count accepted by [`brute_min_discrepancy`].
pub const MAX_DISCREPANCY_PAIRS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetCheck {
    pub valid: bool,
    /// First heavy range that the subset misses.
    pub violating: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub valid: bool,
    pub max_deviation: f64,
    pub worst_range: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitCheck {
    pub valid: bool,
    pub unhit: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FairHittingOpt {
    Optimal { size: usize, witness: Vec<usize> },
    Infeasible,
}

fn membership(n: usize, subset: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        inside[i] = true;
    }
    Ok(inside)
}

/// True iff every range holding at least an `eps` fraction of the points
/// (or of the normalized weight, with `use_weights`) meets `subset`.
pub fn check_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    eps: f64,
    subset: &[usize],
    use_weights: bool,
) -> Result<NetCheck> {
    let n = inc.n();
    let inside = membership(n, subset)?;
    let weights: Vec<f64> = if use_weights {
        let w = x.weights().ok_or_else(|| {
            Error::InvalidParameter("weighted net check needs point weights".into())
        })?;
        let total: f64 = w.iter().sum();
        w.iter().map(|v| v / total).collect()
    } else {
        vec![]
    };
    for j in 0..inc.m() {
        let members: Vec<usize> = inc.row(j).iter_ones().collect();
        let heavy = if use_weights {
            members.iter().map(|&i| weights[i]).sum::<f64>() >= eps - 1e-12
        } else {
            members.len() as f64 >= eps * n as f64 - 1e-9
        };
        if heavy && !members.iter().any(|&i| inside[i]) {
            return Ok(NetCheck {
                valid: false,
                violating: Some(j),
            });
        }
    }
    Ok(NetCheck {
        valid: true,
        violating: None,
    })
}

/// Largest `| |A ∩ R|/|A| - |R|/n |` over all ranges, and whether it is at
/// most `eps`.
pub fn check_epssample(inc: &IncidenceMatrix, eps: f64, sample: &[usize]) -> Result<SampleCheck> {
    if sample.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = inc.n() as f64;
    let inside = membership(inc.n(), sample)?;
    let a = sample.len() as f64;
    let mut worst = (0.0f64, None);
    for j in 0..inc.m() {
        let mut total = 0usize;
        let mut hit = 0usize;
        for i in inc.row(j).iter_ones() {
            total += 1;
            if inside[i] {
                hit += 1;
            }
        }
        let dev = (hit as f64 / a - total as f64 / n).abs();
        if dev > worst.0 {
            worst = (dev, Some(j));
        }
    }
    Ok(SampleCheck {
        valid: worst.0 <= eps + 1e-12,
        max_deviation: worst.0,
        worst_range: worst.1,
    })
}

/// Ranges that `subset` misses.
pub fn check_hitting(inc: &IncidenceMatrix, subset: &[usize]) -> Result<HitCheck> {
    let inside = membership(inc.n(), subset)?;
    let unhit: Vec<usize> = (0..inc.m())
        .filter(|&j| !inc.row(j).iter_ones().any(|i| inside[i]))
        .collect();
    Ok(HitCheck {
        valid: unhit.is_empty(),
        unhit,
    })
}

/// Exact smallest subset that hits every range and whose group counts are
/// exactly `|S| * tau_l`. Ties are broken by the lexicographically smallest
/// sorted index list.
pub fn brute_min_fair_hitting_set(
    inc: &IncidenceMatrix,
    x: &ColoredPointSet,
    ratios: &GroupRatios,
) -> Result<FairHittingOpt> {
    let n = inc.n();
    if n > MAX_HITTING_POINTS {
        return Err(Error::InstanceTooLarge {
            size: n,
            limit: MAX_HITTING_POINTS,
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!("{} ratios for {} groups", ratios.k(), x.k())));
    }
    let rows: Vec<u32> = (0..inc.m())
        .map(|j| inc.row(j).iter_ones().fold(0u32, |acc, i| acc | 1 << i))
        .collect();
    if rows.contains(&0) {
        return Ok(FairHittingOpt::Infeasible);
    }
    // required counts per size, when integral
    let required: Vec<Option<Vec<usize>>> = (0..=n)
        .map(|s| {
            let counts: Vec<f64> = ratios.taus().iter().map(|t| t * s as f64).collect();
            counts
                .iter()
                .all(|c| (c - c.round()).abs() <= 1e-9)
                .then(|| counts.iter().map(|c| c.round() as usize).collect())
        })
        .collect();
    let color_masks: Vec<u32> = (0..x.k())
        .map(|c| (0..n).filter(|&i| x.color(i) == c).fold(0u32, |acc, i| acc | 1 << i))
        .collect();

    let mut best: Option<(usize, Vec<usize>)> = None;
    for mask in 0u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if best.as_ref().is_some_and(|(b, _)| size > *b) {
            continue;
        }
        let Some(req) = &required[size] else { continue };
        if !color_masks
            .iter()
            .zip(req)
            .all(|(cm, &r)| (mask & cm).count_ones() as usize == r)
        {
            continue;
        }
        if !rows.iter().all(|&r| r & mask != 0) {
            continue;
        }
        let witness: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let better = match &best {
            None => true,
            Some((b, w)) => size < *b || (size == *b && witness < *w),
        };
        if better {
            best = Some((size, witness));
        }
    }
    Ok(match best {
        Some((size, witness)) => FairHittingOpt::Optimal { size, witness },
        None => FairHittingOpt::Infeasible,
    })
}

/// Minimum over all colorings compatible with `matching` of the largest
/// `|kappa(R)|` across the rows of `inc_y`, whose column `t` is point `y[t]`.
pub fn brute_min_discrepancy(y: &[usize], inc_y: &IncidenceMatrix, matching: &Matching) -> Result<i64> {
    let pairs = matching.pairs.len();
    if pairs > MAX_DISCREPANCY_PAIRS {
        return Err(Error::InstanceTooLarge {
            size: pairs,
            limit: MAX_DISCREPANCY_PAIRS,
        });
    }
    let pos: HashMap<usize, usize> = y.iter().enumerate().map(|(t, &i)| (i, t)).collect();
    let mut local = Vec::with_capacity(pairs);
    for &(a, b) in &matching.pairs {
        match (pos.get(&a), pos.get(&b)) {
            (Some(&pa), Some(&pb)) => local.push((pa, pb)),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "pair ({a}, {b}) is not inside the working set"
                )))
            }
        }
    }
    // per row: pairs whose first point alone is inside, and whose second is
    let oriented: Vec<(u32, u32)> = (0..inc_y.m())
        .map(|j| {
            let row = inc_y.row(j);
            let mut plus = 0u32;
            let mut minus = 0u32;
            for (p, &(a, b)) in local.iter().enumerate() {
                match (row.get(a), row.get(b)) {
                    (true, false) => plus |= 1 << p,
                    (false, true) => minus |= 1 << p,
                    _ => {}
                }
            }
            (plus, minus)
        })
        .filter(|&(p, m)| p | m != 0)
        .collect();
    if pairs == 0 || oriented.is_empty() {
        return Ok(0);
    }
    // flipping every sign preserves |kappa|, so pair 0 is fixed to +1
    let mut best = i64::MAX;
    for rest in 0u32..(1u32 << (pairs - 1)) {
        let sigma = rest << 1 | 1;
        let mut worst = 0i64;
        for &(plus, minus) in &oriented {
            let k = 2 * (plus & sigma).count_ones() as i64 - plus.count_ones() as i64
                - (2 * (minus & sigma).count_ones() as i64 - minus.count_ones() as i64);
            worst = worst.max(k.abs());
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colored(colors: &[usize]) -> ColoredPointSet {
        ColoredPointSet::new(
            (0..colors.len()).map(|i| vec![i as f64]).collect(),
            colors.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn epsnet_trivial_cases() {
        let x = colored(&[0, 0, 0, 0]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(check_epsnet(&x, &inc, 0.5, &[0, 1, 2, 3], false).unwrap().valid);
        let empty = check_epsnet(&x, &inc, 0.5, &[], false).unwrap();
        assert_eq!(empty, NetCheck { valid: false, violating: Some(0) });
    }

    #[test]
    fn epssample_cases() {
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1]]).unwrap();
        let all = check_epssample(&inc, 0.0, &[0, 1, 2, 3]).unwrap();
        assert!(all.valid);
        assert_eq!(all.max_deviation, 0.0);
        // the range is one group holding half the points; an all-other sample
        let off = check_epssample(&inc, 0.1, &[2, 3]).unwrap();
        assert_eq!(off.max_deviation, 0.5);
        assert!(!off.valid);
        assert!(matches!(check_epssample(&inc, 0.1, &[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn hitting_cases() {
        let inc = IncidenceMatrix::from_sets(3, &[vec![0], vec![1, 2]]).unwrap();
        assert!(check_hitting(&inc, &[0, 1, 2]).unwrap().valid);
        let miss = check_hitting(&inc, &[2]).unwrap();
        assert_eq!(miss.unhit, vec![0]);
        let none = IncidenceMatrix::from_sets(3, &[]).unwrap();
        assert!(check_hitting(&none, &[]).unwrap().valid);
    }

    #[test]
    fn fair_hitting_fixture() {
        // R1 = {red 0, blue 1}, R2 = {red 2, blue 3}
        let x = colored(&[0, 1, 0, 1]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            brute_min_fair_hitting_set(&inc, &x, &t).unwrap(),
            FairHittingOpt::Optimal { size: 2, witness: vec![0, 3] }
        );
        let one = colored(&[0, 0, 0]);
        let inc = IncidenceMatrix::from_sets(3, &[vec![1, 2]]).unwrap();
        let t1 = GroupRatios::new(vec![1.0]).unwrap();
        assert!(matches!(
            brute_min_fair_hitting_set(&inc, &one, &t1).unwrap(),
            FairHittingOpt::Optimal { size: 1, .. }
        ));
        // every range is blue-only but all weight must be red
        let x = ColoredPointSet::with_groups(vec![vec![0.0], vec![1.0]], vec![0, 1], None, 2).unwrap();
        let inc = IncidenceMatrix::from_sets(2, &[vec![1]]).unwrap();
        let skew = GroupRatios::new(vec![0.999_999_999_5, 0.000_000_000_5]).unwrap();
        assert_eq!(brute_min_fair_hitting_set(&inc, &x, &skew).unwrap(), FairHittingOpt::Infeasible);
    }

    #[test]
    fn fair_hitting_size_guard() {
        let x = colored(&[0; 21]);
        let inc = IncidenceMatrix::from_sets(21, &[vec![0]]).unwrap();
        let t = GroupRatios::new(vec![1.0]).unwrap();
        assert!(matches!(
            brute_min_fair_hitting_set(&inc, &x, &t),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn min_discrepancy_single_pair() {
        let m = Matching { pairs: vec![(0, 1)] };
        let inside = IncidenceMatrix::from_sets(2, &[vec![0, 1]]).unwrap();
        assert_eq!(brute_min_discrepancy(&[0, 1], &inside, &m).unwrap(), 0);
        let straddle = IncidenceMatrix::from_sets(2, &[vec![1]]).unwrap();
        assert_eq!(brute_min_discrepancy(&[0, 1], &straddle, &m).unwrap(), 1);
    }

    #[test]
    fn min_discrepancy_needs_both_orientations() {
        // pairs (0,1), (2,3); R = {0, 2} forces opposite signs, R' = {0, 3} forces equal
        let m = Matching { pairs: vec![(0, 1), (2, 3)] };
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 2], vec![0, 3]]).unwrap();
        assert_eq!(brute_min_discrepancy(&[0, 1, 2, 3], &inc, &m).unwrap(), 2);
    }
}
