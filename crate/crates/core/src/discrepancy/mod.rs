//! Deterministic constructions by repeated halving: the discrepancy-based
//! fair ε-net, fair sketch-and-merge, and the fair ε-sample that
//! sketch-and-merge produces along the way.
//!
//! Every halving pairs points of equal group, so each group count halves
//! exactly and the output keeps the input's group ratios. This needs every
//! group size to be a power of two; see [`crate::datagen::trim_to_powers`].

mod halving;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::IncidenceMatrix;
use crate::points::ColoredPointSet;

pub use halving::{
    arbitrary_matching, discrepancy_bound, fair_matching, halving, range_discrepancies, Coloring,
    Matching,
};
use halving::{PointMajor, Restricted};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyParams {
    pub eps: f64,
    pub vc_dim: usize,
    /// Constant of the target sizes. Heuristic; defaults to 1.
    pub c0_net: f64,
    /// Sketch-and-merge leaf size exponent; derived when absent.
    pub leaf_exponent: Option<u32>,
}

impl DiscrepancyParams {
    pub fn new(eps: f64, vc_dim: usize) -> Result<Self> {
        let p = Self {
            eps,
            vc_dim,
            c0_net: 1.0,
            leaf_exponent: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_c0(mut self, c0: f64) -> Result<Self> {
        self.c0_net = c0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_leaf_exponent(mut self, p: u32) -> Self {
        self.leaf_exponent = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidEpsilon(self.eps));
        }
        if self.vc_dim == 0 {
            return Err(Error::InvalidParameter("VC dimension must be >= 1".into()));
        }
        if !(self.c0_net > 0.0 && self.c0_net.is_finite()) {
            return Err(Error::InvalidParameter("c0 must be positive".into()));
        }
        Ok(())
    }

    /// Requested net size `c0 (d/eps) ln(d/eps)`, with the log clamped to 1.
    pub fn net_target(&self) -> f64 {
        let r = self.vc_dim as f64 / self.eps;
        self.c0_net * r * r.ln().max(1.0)
    }

    /// Sketch-and-merge sample size `c0 (4d/eps^2) ln(2d/eps)`, log clamped to 1.
    pub fn sample_threshold(&self) -> f64 {
        let d = self.vc_dim as f64;
        self.c0_net * 4.0 * d / (self.eps * self.eps) * (2.0 * d / self.eps).ln().max(1.0)
    }

    fn halved(&self) -> Self {
        Self {
            eps: self.eps / 2.0,
            ..*self
        }
    }
}

/// Output of the halving-based ε-net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscNet {
    pub indices: Vec<usize>,
    /// Number of halvings `U`.
    pub rounds: u32,
}

/// Output of sketch-and-merge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmNet {
    pub indices: Vec<usize>,
    /// The intermediate sample the final net was built on.
    pub sample: Vec<usize>,
    pub leaf_exponent: u32,
    /// Size of the set left at the root of the merge tree (`2^p`).
    pub root_size: usize,
}

/// Output size of the discrepancy net for a working set of `n` points whose
/// smallest group has `min_group` points: the smallest `n / 2^U` that is at
/// least the requested target (and at least `k`), with `2^U <= min_group`.
pub fn disc_output_size(n: usize, min_group: usize, k: usize, p: &DiscrepancyParams) -> usize {
    n >> disc_rounds(n, min_group, k, p.net_target())
}

fn disc_rounds(n: usize, min_group: usize, k: usize, target: f64) -> u32 {
    let target = target.max(k as f64).max(1.0);
    let mut u = 0;
    while min_group >> (u + 1) >= 1
        && (min_group >> u).is_multiple_of(2)
        && ((n >> (u + 1)) as f64) >= target
    {
        u += 1;
    }
    u
}

fn pow2_groups(x: &ColoredPointSet, y: &[usize]) -> Result<Vec<usize>> {
    let counts = x.count_colors(y);
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt > 0 && !cnt.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                what: format!("size of group {c}"),
                value: cnt,
            });
        }
    }
    Ok(counts)
}

fn check_inc(x: &ColoredPointSet, inc: &IncidenceMatrix) -> Result<()> {
    if inc.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: inc.n(),
        });
    }
    Ok(())
}

/// Discrepancy-based fair ε-net.
///
/// Halves `U` times with fair matchings, where `U` is given by
/// [`disc_output_size`]. The output keeps every group ratio exactly.
pub fn disc_fair_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &DiscrepancyParams,
) -> Result<DiscNet> {
    p.validate()?;
    check_inc(x, inc)?;
    let pm = PointMajor::new(inc);
    disc_on(x, Restricted::full(&pm, (0..x.len()).collect()), p, true)
}

/// Baseline with index-order matchings that ignore groups.
pub fn disc_unfair_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &DiscrepancyParams,
) -> Result<DiscNet> {
    p.validate()?;
    check_inc(x, inc)?;
    let pm = PointMajor::new(inc);
    disc_on(x, Restricted::full(&pm, (0..x.len()).collect()), p, false)
}

fn disc_on(x: &ColoredPointSet, mut set: Restricted, p: &DiscrepancyParams, fair: bool) -> Result<DiscNet> {
    let y = &set.y;
    if y.is_empty() {
        return Err(Error::InvalidPointSet("point set is empty".into()));
    }
    let (min_group, k) = if fair {
        let counts = pow2_groups(x, y)?;
        let present: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
        (present.iter().copied().min().unwrap_or(0), present.len())
    } else {
        (1usize << y.len().trailing_zeros(), 1)
    };
    let target = p.net_target();
    if target.max(k as f64) > y.len() as f64 {
        warn!(
            "target net size {:.1} exceeds the {} input points; returning the input",
            target,
            y.len()
        );
    }
    let rounds = disc_rounds(y.len(), min_group, k, target);
    for _ in 0..rounds {
        let matching = if fair {
            fair_matching(&set.y, x)?
        } else {
            arbitrary_matching(&set.y)?
        };
        set = set.halve(&matching);
    }
    Ok(DiscNet {
        indices: set.y,
        rounds,
    })
}

/// Fair sketch-and-merge ε-net.
///
/// Leaves are single-group blocks of `2^p` points laid out by decreasing
/// group size, so every group fills an aligned run of leaves. Each merge
/// joins two sibling sets and halves the union with a fair matching. The
/// root set is halved further down to the sample threshold, and the result
/// is turned into a net by [`disc_fair_epsnet`] at `eps / 2`.
pub fn fsm_fair_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &DiscrepancyParams,
) -> Result<FsmNet> {
    fsm(x, inc, p, true)
}

/// Sketch-and-merge with index-order leaves and group-blind matchings.
pub fn fsm_unfair_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &DiscrepancyParams,
) -> Result<FsmNet> {
    fsm(x, inc, p, false)
}

/// The sketch-and-merge sample: an `eps/2`-sample with exact group ratios.
pub fn disc_fair_epssample(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &DiscrepancyParams,
) -> Result<Vec<usize>> {
    p.validate()?;
    check_inc(x, inc)?;
    let pm = PointMajor::new(inc);
    Ok(fsm_sample(x, &pm, p, true)?.0.y)
}

fn fsm(x: &ColoredPointSet, inc: &IncidenceMatrix, p: &DiscrepancyParams, fair: bool) -> Result<FsmNet> {
    p.validate()?;
    check_inc(x, inc)?;
    let pm = PointMajor::new(inc);
    let (set, leaf_exponent, root_size) = fsm_sample(x, &pm, p, fair)?;
    let sample = set.y.clone();
    let net = disc_on(x, set, &p.halved(), fair)?;
    Ok(FsmNet {
        indices: net.indices,
        sample,
        leaf_exponent,
        root_size,
    })
}

/// Leaf exponent for sketch-and-merge: the given one after validation, or
/// the smallest `p` with `2^p` at least the sample threshold, raised so the
/// root keeps every group and capped by the smallest group.
pub fn fsm_leaf_exponent(n: usize, group_sizes: &[usize], p: &DiscrepancyParams) -> Result<u32> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo {
            what: "n".into(),
            value: n,
        });
    }
    let log_n = n.trailing_zeros();
    let min_group = group_sizes.iter().copied().filter(|&c| c > 0).min().unwrap_or(n);
    let log_min = min_group.trailing_zeros();
    // the root holds 2^p points, so the smallest group needs 2^p >= n / min_group
    let lower = log_n - log_min;
    let upper = log_min;
    let exp = match p.leaf_exponent {
        Some(e) => e,
        None => {
            let want = p.sample_threshold().max(1.0).log2().ceil() as u32;
            want.clamp(lower, upper.max(lower))
        }
    };
    if exp > log_min {
        return Err(Error::LeafSizeIncompatible {
            exponent: exp,
            reason: format!("leaves must fit in the smallest group of {min_group} points"),
        });
    }
    if exp < lower {
        return Err(Error::LeafSizeIncompatible {
            exponent: exp,
            reason: format!("the root set of 2^{exp} points cannot keep a group of {min_group} out of {n}"),
        });
    }
    Ok(exp)
}

/// Returns (sample, leaf exponent, root size).
fn fsm_sample(
    x: &ColoredPointSet,
    pm: &PointMajor,
    p: &DiscrepancyParams,
    fair: bool,
) -> Result<(Restricted, u32, usize)> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidPointSet("point set is empty".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let sizes = if fair {
        pow2_groups(x, &all)?
    } else {
        vec![n]
    };
    let exp = fsm_leaf_exponent(n, &sizes, p)?;
    let leaf = 1usize << exp;

    let order: Vec<usize> = if fair {
        let mut groups: Vec<usize> = (0..x.k()).filter(|&c| sizes[c] > 0).collect();
        groups.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
        let mut members = x.group_members();
        groups
            .iter()
            .flat_map(|&c| {
                let mut g = std::mem::take(&mut members[c]);
                kd_order(x, &mut g, leaf);
                g
            })
            .collect()
    } else {
        let mut all = all;
        kd_order(x, &mut all, leaf);
        all
    };
    let mut level: Vec<Restricted> = order
        .chunks_exact(leaf)
        .map(|c| {
            let mut v = c.to_vec();
            v.sort_unstable();
            Restricted::full(pm, v)
        })
        .collect();
    let halve = |set: &Restricted| -> Result<Restricted> {
        let matching = if fair {
            fair_matching(&set.y, x)?
        } else {
            arbitrary_matching(&set.y)?
        };
        Ok(set.halve(&matching))
    };
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks_exact(2) {
            next.push(halve(&Restricted::merge(&pair[0], &pair[1]))?);
        }
        level = next;
    }
    let mut sample = level.pop().expect("n >= 1 gives at least one leaf");
    let root_size = sample.y.len();
    let threshold = p.sample_threshold();
    while sample.y.len() as f64 > threshold && sample.y.len() > 1 {
        if fair && x.count_colors(&sample.y).iter().any(|&c| c % 2 == 1) {
            break;
        }
        sample = halve(&sample)?;
    }
    debug!("sketch-and-merge root {} points, sample {} points over {} ranges", root_size, sample.y.len(), sample.m_prime());
    Ok((sample, exp, root_size))
}

/// Reorders `idx` so that aligned blocks of `block` points are spatially
/// compact: median splits along the axes in turn, down to block size. Small
/// blocks then induce few distinct ranges, which is what makes the bottom of
/// the merge tree cheap.
fn kd_order(x: &ColoredPointSet, idx: &mut [usize], block: usize) {
    let dim = x.dim();
    let coords = x.coords();
    let mut keyed: Vec<(f64, usize)> = idx.iter().map(|&i| (0.0, i)).collect();
    split(&mut keyed, coords, dim, 0, block.max(1));
    for (slot, (_, i)) in idx.iter_mut().zip(keyed) {
        *slot = i;
    }

    fn split(v: &mut [(f64, usize)], coords: &[f64], dim: usize, depth: usize, block: usize) {
        if v.len() <= block {
            return;
        }
        let axis = depth % dim;
        for e in v.iter_mut() {
            e.0 = coords[e.1 * dim + axis];
        }
        let mid = v.len() / 2;
        v.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (lo, hi) = v.split_at_mut(mid);
        split(lo, coords, dim, depth + 1, block);
        split(hi, coords, dim, depth + 1, block);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{dp_ratios, finf};
    use crate::rng::seeded;
    use rand::Rng;

    fn instance(n: usize, k: usize, m: usize, seed: u64) -> (ColoredPointSet, IncidenceMatrix) {
        let mut rng = seeded(seed);
        let x = ColoredPointSet::new(
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| i % k).collect(),
        )
        .unwrap();
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let len = rng.gen_range(1..=n / 2);
                (a..(a + len).min(n)).collect()
            })
            .collect();
        (x, IncidenceMatrix::from_sets(n, &sets).unwrap())
    }

    #[test]
    fn no_rounds_when_target_covers_input() {
        let (x, inc) = instance(16, 2, 5, 1);
        let p = DiscrepancyParams::new(0.1, 2).unwrap();
        let out = disc_fair_epsnet(&x, &inc, &p).unwrap();
        assert_eq!(out.rounds, 0);
        assert_eq!(out.indices, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn sixty_four_to_eight() {
        let (x, inc) = instance(64, 2, 10, 2);
        // target c0 * (1/0.5) * 1 = 2 c0; c0 = 4 gives 8
        let p = DiscrepancyParams::new(0.5, 1).unwrap().with_c0(4.0).unwrap();
        assert_eq!(disc_output_size(64, 32, 2, &p), 8);
        let out = disc_fair_epsnet(&x, &inc, &p).unwrap();
        assert_eq!(out.rounds, 3);
        assert_eq!(out.indices.len(), 8);
        assert_eq!(x.count_colors(&out.indices), vec![4, 4]);
        let t = dp_ratios(&x, false).unwrap();
        assert_eq!(finf(&out.indices, &x, &t).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_power_group() {
        let x = ColoredPointSet::new((0..6).map(|i| vec![i as f64]).collect(), vec![0, 0, 0, 1, 1, 1]).unwrap();
        let inc = IncidenceMatrix::from_sets(6, &[vec![0]]).unwrap();
        let p = DiscrepancyParams::new(0.5, 1).unwrap();
        assert!(matches!(disc_fair_epsnet(&x, &inc, &p), Err(Error::NotPowerOfTwo { .. })));
    }

    #[test]
    fn deterministic() {
        let (x, inc) = instance(256, 4, 20, 3);
        let p = DiscrepancyParams::new(0.3, 1).unwrap();
        assert_eq!(disc_fair_epsnet(&x, &inc, &p).unwrap(), disc_fair_epsnet(&x, &inc, &p).unwrap());
        let q = DiscrepancyParams::new(0.6, 1).unwrap().with_leaf_exponent(4);
        assert_eq!(fsm_fair_epsnet(&x, &inc, &q).unwrap(), fsm_fair_epsnet(&x, &inc, &q).unwrap());
    }

    #[test]
    fn fsm_structure() {
        let (x, inc) = instance(512, 2, 30, 4);
        let p = DiscrepancyParams::new(0.6, 1).unwrap().with_leaf_exponent(5);
        let out = fsm_fair_epsnet(&x, &inc, &p).unwrap();
        assert_eq!(out.root_size, 32);
        assert_eq!(out.leaf_exponent, 5);
        let counts = x.count_colors(&out.indices);
        assert_eq!(counts[0], counts[1]);
        assert!(out.sample.len() <= 32);
    }

    #[test]
    fn leaf_exponent_rules() {
        let p = DiscrepancyParams::new(0.5, 1).unwrap();
        assert!(matches!(fsm_leaf_exponent(12, &[12], &p), Err(Error::NotPowerOfTwo { .. })));
        // 8 of 1024: the root needs 2^7 points but the group only has 8
        assert!(matches!(
            fsm_leaf_exponent(1024, &[1016, 8], &p),
            Err(Error::LeafSizeIncompatible { .. })
        ));
        assert!(fsm_leaf_exponent(64, &[32, 32], &p.with_leaf_exponent(6)).is_err());
        assert_eq!(fsm_leaf_exponent(64, &[32, 32], &p.with_leaf_exponent(3)).unwrap(), 3);
    }

    #[test]
    fn epssample_single_group_at_threshold() {
        let p = DiscrepancyParams::new(0.9, 1).unwrap();
        let n = p.sample_threshold().ceil() as usize;
        let n = n.next_power_of_two() / 2;
        let (x, inc) = instance(n, 1, 5, 9);
        let out = disc_fair_epssample(&x, &inc, &p).unwrap();
        assert_eq!(out, (0..n).collect::<Vec<_>>());
    }
}
