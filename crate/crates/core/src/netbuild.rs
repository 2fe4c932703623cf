//! Sampling-based constructions: the plain random ε-net, the fair
//! Monte-Carlo (FMC) ε-net, its weighted variant and the Monte-Carlo fair
//! ε-sample.
//!
//! FMC draws a uniform (or weighted) sample, then tops every group up to
//! `ceil((1 + v) * tau_l * lambda)` distinct points with `v = 2 ln(2k/phi)`.
//! Sampled points are kept in draw order; missing points are filled with
//! the lowest-index unused members of the group. All logarithms are natural.

use std::collections::HashSet;

use log::warn;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::{dp_ratios, GroupRatios};
use crate::points::ColoredPointSet;
use crate::rng::seeded;

/// Tolerance for treating a real target as an integer before taking ceilings.
const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub eps: f64,
    pub phi: f64,
    pub vc_dim: usize,
    pub seed: u64,
    /// Constant of the ε-sample size bound. Heuristic; defaults to 1.
    pub c0_sample: f64,
}

impl SamplingParams {
    pub fn new(eps: f64, phi: f64, vc_dim: usize, seed: u64) -> Result<Self> {
        let p = Self {
            eps,
            phi,
            vc_dim,
            seed,
            c0_sample: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_c0_sample(mut self, c0: f64) -> Result<Self> {
        self.c0_sample = c0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidEpsilon(self.eps));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "phi = {} must lie in (0, 1)",
                self.phi
            )));
        }
        if self.vc_dim == 0 {
            return Err(Error::InvalidParameter("VC dimension must be >= 1".into()));
        }
        if !(self.c0_sample > 0.0 && self.c0_sample.is_finite()) {
            return Err(Error::InvalidParameter("c0_sample must be positive".into()));
        }
        Ok(())
    }
}

/// `lambda = ceil(max((4/eps) ln(4/phi), (8d/eps) ln(16/eps)))`.
pub fn epsnet_sample_size(p: &SamplingParams) -> Result<usize> {
    p.validate()?;
    let d = p.vc_dim as f64;
    let a = 4.0 / p.eps * (4.0 / p.phi).ln();
    let b = 8.0 * d / p.eps * (16.0 / p.eps).ln();
    Ok(a.max(b).ceil() as usize)
}

/// `gamma = ceil((c0/eps^2) (d ln(d/eps) + ln(1/phi)))`; the first term is
/// clamped to zero when `d/eps <= 1`.
pub fn epssample_sample_size(p: &SamplingParams) -> Result<usize> {
    p.validate()?;
    let d = p.vc_dim as f64;
    let ratio = d / p.eps;
    let first = if ratio <= 1.0 { 0.0 } else { d * ratio.ln() };
    let value = p.c0_sample / (p.eps * p.eps) * (first + (1.0 / p.phi).ln());
    Ok(value.ceil() as usize)
}

/// The FMC oversampling factor `v = 2 ln(2k/phi)`.
pub fn oversampling_factor(k: usize, phi: f64) -> f64 {
    2.0 * (2.0 * k as f64 / phi).ln()
}

/// Per-group targets `ceil((1 + v) tau_l draws)`.
pub fn group_targets(ratios: &GroupRatios, draws: usize, v: f64) -> Vec<usize> {
    ratios
        .taus()
        .iter()
        .map(|&t| ((1.0 + v) * t * draws as f64 - CEIL_SLACK).ceil().max(0.0) as usize)
        .collect()
}

/// Plain ε-net by sampling: `lambda` uniform draws with replacement,
/// deduplicated and sorted.
pub fn epsnet_sampling(x: &ColoredPointSet, p: &SamplingParams) -> Result<Vec<usize>> {
    if x.is_empty() {
        return Err(Error::InvalidPointSet("point set is empty".into()));
    }
    let draws = epsnet_sample_size(p)?;
    let mut rng = seeded(p.seed);
    let mut out: Vec<usize> = (0..draws).map(|_| rng.gen_range(0..x.len())).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// What to do when a group target exceeds the number of points in the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopUpPolicy {
    /// Fail with [`Error::InsufficientColorPoints`].
    #[default]
    Strict,
    /// Shrink all targets proportionally to the largest ratio-respecting
    /// size the data can support.
    Saturate,
}

/// Output of a fair Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct FairSample {
    /// Selected points, sorted.
    pub indices: Vec<usize>,
    /// Number of draws (`lambda` or `gamma`).
    pub draws: usize,
    pub v: f64,
    /// Per-group counts in the output.
    pub targets: Vec<usize>,
    /// Distinct sampled points in first-draw order.
    pub sampled: Vec<usize>,
}

impl FairSample {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Fair Monte-Carlo ε-net under demographic parity (`ratios` must equal the
/// data's group shares).
///
/// Draws `lambda` points with `lambda` evaluated at failure probability
/// `phi / 2`, as the sampled net and the group counts each get half of the
/// failure budget.
pub fn fmc_fair_epsnet(
    x: &ColoredPointSet,
    p: &SamplingParams,
    ratios: &GroupRatios,
) -> Result<FairSample> {
    require_dp(x, ratios)?;
    let draws = fmc_draws(p)?;
    let mut rng = seeded(p.seed);
    let n = x.len();
    let sample = (0..draws).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>();
    assemble(x, ratios, p.phi, draws, &sample, TopUpPolicy::Strict)
}

/// Weighted FMC: each draw picks point `i` with probability `weights[i]`.
///
/// `weights` must be non-negative and sum to one; `ratios` should equal the
/// per-group weight sums (checked to 1e-6).
pub fn fmc_weighted(
    x: &ColoredPointSet,
    weights: &[f64],
    p: &SamplingParams,
    ratios: &GroupRatios,
    policy: TopUpPolicy,
) -> Result<FairSample> {
    let draws = fmc_draws(p)?;
    let sample = weighted_draws(x, weights, ratios, draws, p.seed)?;
    assemble(x, ratios, p.phi, draws, &sample, policy)
}

/// Monte-Carlo fair ε-sample: `gamma` uniform draws and the same top-up.
pub fn fmc_fair_epssample(
    x: &ColoredPointSet,
    p: &SamplingParams,
    ratios: &GroupRatios,
) -> Result<FairSample> {
    require_dp(x, ratios)?;
    let draws = epssample_sample_size(p)?;
    let mut rng = seeded(p.seed);
    let n = x.len();
    let sample = (0..draws).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>();
    assemble(x, ratios, p.phi, draws, &sample, TopUpPolicy::Strict)
}

/// Number of FMC draws: the ε-net bound at `phi / 2`.
pub fn fmc_draws(p: &SamplingParams) -> Result<usize> {
    p.validate()?;
    epsnet_sample_size(&SamplingParams {
        phi: p.phi / 2.0,
        ..*p
    })
}

/// `draws` weighted draws with replacement, after checking that the group
/// masses of `weights` match `ratios`.
pub(crate) fn weighted_draws(
    x: &ColoredPointSet,
    weights: &[f64],
    ratios: &GroupRatios,
    draws: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if weights.len() != x.len() {
        return Err(Error::InvalidParameter(format!(
            "{} weights for {} points",
            weights.len(),
            x.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::UnnormalizedWeights(total));
    }
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!(
            "{} ratios for {} groups",
            ratios.k(),
            x.k()
        )));
    }
    let mut mass = vec![0.0; x.k()];
    for (i, &w) in weights.iter().enumerate() {
        mass[x.color(i)] += w;
    }
    if let Some(l) = (0..x.k()).find(|&l| (mass[l] - ratios.tau(l)).abs() > 1e-6) {
        return Err(Error::InvalidRatios(format!(
            "group {l} carries weight {} but its ratio is {}",
            mass[l],
            ratios.tau(l)
        )));
    }
    draw_weighted(weights, draws, seed)
}

/// `draws` draws with replacement from a normalized weight vector.
pub(crate) fn draw_weighted(weights: &[f64], draws: usize, seed: u64) -> Result<Vec<usize>> {
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::UnnormalizedWeights(total));
    }
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InvalidParameter(format!("weights: {e}")))?;
    let mut rng = seeded(seed);
    Ok((0..draws).map(|_| dist.sample(&mut rng)).collect())
}

fn require_dp(x: &ColoredPointSet, ratios: &GroupRatios) -> Result<()> {
    let dp = dp_ratios(x, false)?;
    if !dp.approx_eq(ratios, 1e-9) {
        return Err(Error::InvalidRatios(
            "Monte-Carlo constructions only support demographic-parity ratios".into(),
        ));
    }
    Ok(())
}

/// Shared top-up step.
pub(crate) fn assemble(
    x: &ColoredPointSet,
    ratios: &GroupRatios,
    phi: f64,
    draws: usize,
    sample: &[usize],
    policy: TopUpPolicy,
) -> Result<FairSample> {
    let k = x.k();
    if ratios.k() != k {
        return Err(Error::InvalidRatios(format!("{} ratios for {k} groups", ratios.k())));
    }
    if draws > 0 && (ratios.min_tau() * draws as f64) < 1.0 {
        warn!(
            "min ratio * sample size = {:.3} < 1; the fair net may be much larger than an unfair one",
            ratios.min_tau() * draws as f64
        );
    }
    let v = oversampling_factor(k, phi);
    let sizes = x.group_sizes();
    let mut targets = group_targets(ratios, draws, v);
    if let Some(l) = (0..k).find(|&l| targets[l] > sizes[l]) {
        match policy {
            TopUpPolicy::Strict => {
                return Err(Error::InsufficientColorPoints {
                    color: l,
                    needed: targets[l],
                    available: sizes[l],
                })
            }
            TopUpPolicy::Saturate => {
                targets = saturated_targets(ratios, &sizes);
                warn!("group targets exceed available points; saturating to {targets:?}");
            }
        }
    }

    let mut seen = HashSet::with_capacity(sample.len());
    let sampled: Vec<usize> = sample.iter().copied().filter(|&i| seen.insert(i)).collect();

    let mut chosen = vec![false; x.len()];
    let mut counts = vec![0usize; k];
    for &i in &sampled {
        let c = x.color(i);
        if counts[c] < targets[c] {
            chosen[i] = true;
            counts[c] += 1;
        }
    }
    for (i, flag) in chosen.iter_mut().enumerate() {
        let c = x.color(i);
        if !*flag && counts[c] < targets[c] {
            *flag = true;
            counts[c] += 1;
        }
    }
    let indices = (0..x.len()).filter(|&i| chosen[i]).collect();
    Ok(FairSample {
        indices,
        draws,
        v,
        targets,
        sampled,
    })
}

/// Largest targets of the form `ceil(s tau_l)` that fit every group.
fn saturated_targets(ratios: &GroupRatios, sizes: &[usize]) -> Vec<usize> {
    let s = ratios
        .taus()
        .iter()
        .zip(sizes)
        .map(|(&t, &c)| c as f64 / t)
        .fold(f64::INFINITY, f64::min);
    ratios
        .taus()
        .iter()
        .zip(sizes)
        .map(|(&t, &c)| ((s * t - CEIL_SLACK).ceil().max(0.0) as usize).min(c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::finf;

    fn balanced(n: usize, k: usize) -> ColoredPointSet {
        ColoredPointSet::new(
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| i % k).collect(),
        )
        .unwrap()
    }

    // independent evaluation of the size formulas
    fn lambda_oracle(eps: f64, phi: f64, d: f64) -> f64 {
        let a = 4.0 / eps * (4.0 / phi).ln();
        let b = 8.0 * d / eps * (16.0 / eps).ln();
        a.max(b)
    }

    #[test]
    fn epsnet_size_examples() {
        let p = SamplingParams::new(0.5, 0.5, 1, 0).unwrap();
        assert_eq!(lambda_oracle(0.5, 0.5, 1.0).ceil(), 56.0);
        assert_eq!(epsnet_sample_size(&p).unwrap(), 56);
        let p = SamplingParams::new(0.1, 0.05, 2, 0).unwrap();
        assert_eq!(lambda_oracle(0.1, 0.05, 2.0).ceil(), 813.0);
        assert_eq!(epsnet_sample_size(&p).unwrap(), 813);
        let half = SamplingParams::new(0.05, 0.05, 2, 0).unwrap();
        assert!(epsnet_sample_size(&half).unwrap() > 813);
    }

    #[test]
    fn epssample_size_examples() {
        let p = SamplingParams::new(0.5, 0.5, 2, 0).unwrap();
        assert_eq!(epssample_sample_size(&p).unwrap(), 14);
        let small = SamplingParams::new(0.01, 0.05, 1, 0).unwrap();
        let big = SamplingParams::new(0.02, 0.05, 1, 0).unwrap();
        let ratio =
            epssample_sample_size(&small).unwrap() as f64 / epssample_sample_size(&big).unwrap() as f64;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        let clamp = SamplingParams::new(1.0 - 1e-9, 0.5, 1, 0).unwrap();
        assert_eq!(epssample_sample_size(&clamp).unwrap(), (2f64).ln().ceil() as usize);
    }

    #[test]
    fn params_validation() {
        assert!(SamplingParams::new(0.0, 0.5, 1, 0).is_err());
        assert!(SamplingParams::new(0.5, 1.0, 1, 0).is_err());
        assert!(SamplingParams::new(0.5, 0.5, 0, 0).is_err());
        assert!(SamplingParams::new(0.5, 0.5, 1, 0).unwrap().with_c0_sample(-1.0).is_err());
    }

    #[test]
    fn oversampling_factor_k2() {
        assert!((oversampling_factor(2, 0.5) - 4.158883083359672).abs() < 1e-12);
    }

    #[test]
    fn sampling_single_point_and_determinism() {
        let one = balanced(1, 1);
        let p = SamplingParams::new(0.3, 0.2, 2, 11).unwrap();
        assert_eq!(epsnet_sampling(&one, &p).unwrap(), vec![0]);
        let x = balanced(500, 2);
        assert_eq!(epsnet_sampling(&x, &p).unwrap(), epsnet_sampling(&x, &p).unwrap());
        assert!(epsnet_sampling(&x, &p).unwrap().len() <= epsnet_sample_size(&p).unwrap());
    }

    #[test]
    fn fmc_single_group() {
        let x = balanced(4096, 1);
        let p = SamplingParams::new(0.5, 0.1, 1, 3).unwrap();
        let t = dp_ratios(&x, false).unwrap();
        let out = fmc_fair_epsnet(&x, &p, &t).unwrap();
        let lambda = fmc_draws(&p).unwrap();
        let expected = ((1.0 + oversampling_factor(1, 0.1)) * lambda as f64).ceil() as usize;
        assert_eq!(out.len(), expected);
        assert_eq!(finf(&out.indices, &x, &t).unwrap(), 0.0);
    }

    #[test]
    fn fmc_balanced_counts_equal() {
        let x = balanced(4096, 2);
        let p = SamplingParams::new(0.5, 0.5, 1, 9).unwrap();
        let t = dp_ratios(&x, false).unwrap();
        let out = fmc_fair_epsnet(&x, &p, &t).unwrap();
        let counts = x.count_colors(&out.indices);
        assert_eq!(counts[0], counts[1]);
        assert_eq!(counts, out.targets);
        // the whole deduplicated sample survives when counts fit
        let sampled_counts = x.count_colors(&out.sampled);
        if (0..2).all(|l| sampled_counts[l] <= out.targets[l]) {
            assert!(out.sampled.iter().all(|i| out.indices.binary_search(i).is_ok()));
        }
    }

    #[test]
    fn fmc_rejects_custom_ratios_and_small_groups() {
        let x = balanced(4096, 2);
        let p = SamplingParams::new(0.5, 0.5, 1, 9).unwrap();
        let cr = GroupRatios::new(vec![0.3, 0.7]).unwrap();
        assert!(matches!(fmc_fair_epsnet(&x, &p, &cr), Err(Error::InvalidRatios(_))));
        let tiny = balanced(8, 2);
        let t = dp_ratios(&tiny, false).unwrap();
        assert!(matches!(
            fmc_fair_epsnet(&tiny, &p, &t),
            Err(Error::InsufficientColorPoints { .. })
        ));
    }

    #[test]
    fn weighted_degenerate_distribution() {
        let x = balanced(4096, 2);
        let mut w = vec![1e-15 / 4095.0; 4096];
        w[10] = 1.0 - 1e-15;
        let mass0: f64 = (0..4096).filter(|i| i % 2 == 0).map(|i| w[i]).sum();
        let t = GroupRatios::new(vec![mass0, 1.0 - mass0]).unwrap();
        let p = SamplingParams::new(0.5, 0.1, 1, 5).unwrap();
        let out = fmc_weighted(&x, &w, &p, &t, TopUpPolicy::Strict).unwrap();
        assert_eq!(out.sampled, vec![10]);
        assert!(out.indices.contains(&10));
        assert_eq!(x.count_colors(&out.indices), out.targets);
    }

    #[test]
    fn weighted_equal_weights_matches_uniform_targets() {
        let x = balanced(4096, 2);
        let w = vec![1.0 / 4096.0; 4096];
        let t = dp_ratios(&x, false).unwrap();
        let p = SamplingParams::new(0.5, 0.1, 1, 5).unwrap();
        let a = fmc_weighted(&x, &w, &p, &t, TopUpPolicy::Strict).unwrap();
        let b = fmc_fair_epsnet(&x, &p, &t).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn weighted_rejects_unnormalized() {
        let x = balanced(4, 2);
        let t = dp_ratios(&x, false).unwrap();
        let p = SamplingParams::new(0.5, 0.1, 1, 5).unwrap();
        assert!(matches!(
            fmc_weighted(&x, &[0.5; 4], &p, &t, TopUpPolicy::Strict),
            Err(Error::UnnormalizedWeights(_))
        ));
    }

    #[test]
    fn saturation_keeps_ratio() {
        let x = ColoredPointSet::new(
            (0..10).map(|i| vec![i as f64]).collect(),
            vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
        )
        .unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        let w = vec![0.5 / 9.0; 9].into_iter().chain([0.5]).collect::<Vec<_>>();
        let p = SamplingParams::new(0.5, 0.1, 1, 5).unwrap();
        let out = fmc_weighted(&x, &w, &p, &t, TopUpPolicy::Saturate).unwrap();
        assert_eq!(x.count_colors(&out.indices), vec![1, 1]);
    }

    #[test]
    fn epssample_size_bound() {
        let x = balanced(4096, 1);
        let p = SamplingParams::new(0.5, 0.1, 1, 1).unwrap();
        let t = dp_ratios(&x, false).unwrap();
        let out = fmc_fair_epssample(&x, &p, &t).unwrap();
        let gamma = epssample_sample_size(&p).unwrap();
        let v = oversampling_factor(1, 0.1);
        assert_eq!(out.draws, gamma);
        assert_eq!(out.len(), ((1.0 + v) * gamma as f64).ceil() as usize);
        assert!(out.len() as f64 <= (1.0 + v) * gamma as f64 + 1.0);
    }
}
