//! Fair geometric hitting sets through the LP relaxation.
//!
//! The fair LP is
//!
//! ```text
//! maximize  eps_bar
//! subject to  sum_i w_i = 1
//!             sum_{i in R} w_i >= eps_bar      for every range R
//!             sum_{i in X_c} w_i = tau_c       for every group c
//!             w >= 0, eps_bar >= 0
//! ```
//!
//! and its optimum `eps*` satisfies `1 / eps* <= OPT`. Rounding draws a
//! weighted fair ε-net at `eps = eps*` from the optimal weights, repeating
//! with fresh seeds until every range is hit.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fairness::GroupRatios;
use crate::incidence::IncidenceMatrix;
use crate::lp::{DenseSimplex, LinearProgram, LpSolver, LpStatus, Sense};
use crate::netbuild::{
    draw_weighted, epsnet_sample_size, fmc_weighted, SamplingParams, TopUpPolicy,
};
use crate::oracle::check_hitting;
use crate::points::ColoredPointSet;
use crate::rng::derive_seed;

/// The LP together with the layout of its variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FairLpInstance {
    pub lp: LinearProgram,
    /// Point weights are variables `0..n`, `eps_bar` is variable `n`.
    pub n: usize,
    pub fair: bool,
}

impl FairLpInstance {
    pub fn eps_var(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub eps_bar: f64,
    pub weights: Vec<f64>,
    pub duals: Vec<f64>,
    pub infeasible_row: Option<usize>,
}

fn check_shapes(x: &ColoredPointSet, inc: &IncidenceMatrix) -> Result<()> {
    if inc.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: inc.n(),
        });
    }
    if let Some(j) = (0..inc.m()).find(|&j| inc.cardinality(j) == 0) {
        return Err(Error::EmptyRange(j));
    }
    Ok(())
}

fn base_lp(inc: &IncidenceMatrix) -> LinearProgram {
    let n = inc.n();
    let mut names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    names.push("eps".into());
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::new(names, objective);
    lp.add_row("total", (0..n).map(|i| (i, 1.0)).collect(), Sense::Eq, 1.0);
    for j in 0..inc.m() {
        let mut coeffs: Vec<(usize, f64)> = inc.row(j).iter_ones().map(|i| (i, 1.0)).collect();
        coeffs.push((n, -1.0));
        lp.add_row(format!("r{j}"), coeffs, Sense::Ge, 0.0);
    }
    lp
}

/// The fair LP: `1 + m + k` rows.
pub fn build_fair_lp(
    inc: &IncidenceMatrix,
    x: &ColoredPointSet,
    ratios: &GroupRatios,
) -> Result<FairLpInstance> {
    check_shapes(x, inc)?;
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!("{} ratios for {} groups", ratios.k(), x.k())));
    }
    let mut lp = base_lp(inc);
    for (c, members) in x.group_members().into_iter().enumerate() {
        lp.add_row(
            format!("c{c}"),
            members.into_iter().map(|i| (i, 1.0)).collect(),
            Sense::Eq,
            ratios.tau(c),
        );
    }
    Ok(FairLpInstance {
        lp,
        n: x.len(),
        fair: true,
    })
}

/// The LP without group constraints: `1 + m` rows.
pub fn build_unfair_lp(inc: &IncidenceMatrix, x: &ColoredPointSet) -> Result<FairLpInstance> {
    check_shapes(x, inc)?;
    Ok(FairLpInstance {
        lp: base_lp(inc),
        n: x.len(),
        fair: false,
    })
}

/// Solves with the bundled simplex.
pub fn solve_lp(inst: &FairLpInstance) -> Result<LpSolution> {
    solve_lp_with(inst, &DenseSimplex::default())
}

pub fn solve_lp_with(inst: &FairLpInstance, solver: &dyn LpSolver) -> Result<LpSolution> {
    let out = solver.solve(&inst.lp)?;
    let n = inst.n;
    match out.status {
        LpStatus::Optimal => {
            let residual = inst.lp.max_violation(&out.x);
            if residual > 1e-9 {
                return Err(Error::NumericalBreakdown(format!(
                    "LP solution violates a constraint by {residual:e}"
                )));
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                eps_bar: out.x[n],
                weights: out.x[..n].to_vec(),
                duals: out.duals,
                infeasible_row: None,
            })
        }
        status => Ok(LpSolution {
            status,
            eps_bar: 0.0,
            weights: vec![0.0; n],
            duals: out.duals,
            infeasible_row: out.infeasible_row,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingParams {
    pub phi: f64,
    pub vc_dim: usize,
    pub seed: u64,
    /// Attempt cap; defaults to `ceil(10 / phi)`.
    pub max_attempts: Option<usize>,
}

impl HittingParams {
    pub fn new(phi: f64, vc_dim: usize, seed: u64) -> Result<Self> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::InvalidParameter(format!("phi = {phi} must lie in (0, 1)")));
        }
        if vc_dim == 0 {
            return Err(Error::InvalidParameter("VC dimension must be >= 1".into()));
        }
        Ok(Self {
            phi,
            vc_dim,
            seed,
            max_attempts: None,
        })
    }

    pub fn attempts(&self) -> usize {
        self.max_attempts.unwrap_or((10.0 / self.phi).ceil() as usize).max(1)
    }
}

/// Result of an LP-rounded hitting set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRun {
    pub indices: Vec<usize>,
    pub eps_bar: f64,
    /// Attempts used, including the accepted one.
    pub attempts: usize,
    /// Draws per attempt.
    pub draws: usize,
}

fn sampling_eps(eps_bar: f64) -> f64 {
    eps_bar.min(1.0 - 1e-9)
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    clipped.iter().map(|v| v / total).collect()
}

fn solved(sol: LpSolution) -> Result<LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(Error::LpInfeasible {
            row: sol.infeasible_row,
        }),
        LpStatus::Unbounded => Err(Error::LpUnbounded),
    }
}

/// Fair hitting set: fair LP, then weighted fair ε-net sampling at
/// `eps = eps*` until the sample hits every range.
///
/// Group targets that exceed the available points are saturated (all
/// targets shrink together) rather than rejected.
pub fn fglp(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    ratios: &GroupRatios,
    p: &HittingParams,
) -> Result<HittingRun> {
    let inst = build_fair_lp(inc, x, ratios)?;
    if inc.m() == 0 {
        return Ok(HittingRun {
            indices: vec![],
            eps_bar: 1.0,
            attempts: 0,
            draws: 0,
        });
    }
    let sol = solved(solve_lp(&inst)?)?;
    let w = normalized(&sol.weights);
    let mut sp = SamplingParams::new(sampling_eps(sol.eps_bar), p.phi, p.vc_dim, p.seed)?;
    for attempt in 0..p.attempts() {
        sp.seed = derive_seed(p.seed, attempt as u64);
        let run = fmc_weighted(x, &w, &sp, ratios, TopUpPolicy::Saturate)?;
        if check_hitting(inc, &run.indices)?.valid {
            return Ok(HittingRun {
                indices: run.indices,
                eps_bar: sol.eps_bar,
                attempts: attempt + 1,
                draws: run.draws,
            });
        }
    }
    Err(Error::RetriesExhausted(p.attempts()))
}

/// Unfair baseline: plain LP and plain weighted ε-net sampling.
pub fn glp(x: &ColoredPointSet, inc: &IncidenceMatrix, p: &HittingParams) -> Result<HittingRun> {
    let inst = build_unfair_lp(inc, x)?;
    if inc.m() == 0 {
        return Ok(HittingRun {
            indices: vec![],
            eps_bar: 1.0,
            attempts: 0,
            draws: 0,
        });
    }
    let sol = solved(solve_lp(&inst)?)?;
    let w = normalized(&sol.weights);
    let sp = SamplingParams::new(sampling_eps(sol.eps_bar), p.phi, p.vc_dim, p.seed)?;
    let draws = epsnet_sample_size(&sp)?;
    for attempt in 0..p.attempts() {
        let seed = derive_seed(p.seed, attempt as u64);
        let mut s = draw_weighted(&w, draws, seed)?;
        s.sort_unstable();
        s.dedup();
        if check_hitting(inc, &s)?.valid {
            return Ok(HittingRun {
                indices: s,
                eps_bar: sol.eps_bar,
                attempts: attempt + 1,
                draws,
            });
        }
    }
    Err(Error::RetriesExhausted(p.attempts()))
}

/// Fair ε-net under arbitrary ratios: a fair hitting set of the heavy
/// ranges. With no heavy range, the smallest set whose group counts
/// `s * tau_l` are all integral, using the lowest indices of each group.
pub fn cr_fair_epsnet(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    eps: f64,
    ratios: &GroupRatios,
    p: &HittingParams,
) -> Result<HittingRun> {
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!("{} ratios for {} groups", ratios.k(), x.k())));
    }
    let heavy = inc.heavy_ranges(eps, false)?;
    if heavy.is_empty() {
        let indices = smallest_ratio_set(x, ratios)?;
        return Ok(HittingRun {
            indices,
            eps_bar: 1.0,
            attempts: 0,
            draws: 0,
        });
    }
    fglp(x, &inc.select_rows(&heavy), ratios, p)
}

fn smallest_ratio_set(x: &ColoredPointSet, ratios: &GroupRatios) -> Result<Vec<usize>> {
    let members = x.group_members();
    for s in 1..=x.len() {
        if !ratios.integral_at(s) {
            continue;
        }
        let counts: Vec<usize> = ratios
            .taus()
            .iter()
            .map(|t| (t * s as f64).round() as usize)
            .collect();
        if counts.iter().zip(&members).all(|(&c, g)| c <= g.len()) {
            let mut out: Vec<usize> = counts
                .iter()
                .zip(&members)
                .flat_map(|(&c, g)| g[..c].iter().copied())
                .collect();
            out.sort_unstable();
            return Ok(out);
        }
    }
    warn!("no subset size up to n realizes the ratios exactly");
    Err(Error::InvalidRatios(
        "no subset size up to n realizes the ratios exactly".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandViolation {
    pub range: usize,
    pub color: usize,
    pub lo: f64,
    pub hi: f64,
    pub tau: f64,
}

/// Obstructions to a fair ε-sample under custom ratios.
///
/// A range equal to a whole group `X_c` pins any ε-sample's share of that
/// group to `|X_c|/n ± eps`. An empty report means no obstruction was
/// found, not that a fair ε-sample exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<BandViolation>,
}

impl FeasibilityReport {
    pub fn obstructed(&self) -> bool {
        !self.violations.is_empty()
    }
}

pub fn cr_sample_feasibility(
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    eps: f64,
    ratios: &GroupRatios,
) -> Result<FeasibilityReport> {
    if ratios.k() != x.k() {
        return Err(Error::InvalidRatios(format!("{} ratios for {} groups", ratios.k(), x.k())));
    }
    if inc.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: inc.n(),
        });
    }
    let sizes = x.group_sizes();
    let n = x.len() as f64;
    let mut violations = Vec::new();
    for j in 0..inc.m() {
        let mut members = inc.row(j).iter_ones();
        let Some(first) = members.next() else { continue };
        let c = x.color(first);
        if inc.cardinality(j) != sizes[c] || !members.all(|i| x.color(i) == c) {
            continue;
        }
        let share = sizes[c] as f64 / n;
        let (lo, hi) = (share - eps, share + eps);
        let tau = ratios.tau(c);
        if tau < lo || tau > hi {
            violations.push(BandViolation {
                range: j,
                color: c,
                lo,
                hi,
                tau,
            });
        }
    }
    Ok(FeasibilityReport { violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::finf;

    fn colored(colors: &[usize]) -> ColoredPointSet {
        ColoredPointSet::new(
            (0..colors.len()).map(|i| vec![i as f64]).collect(),
            colors.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn lp_shape() {
        let x = colored(&[0, 1, 0, 1]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        let inst = build_fair_lp(&inc, &x, &t).unwrap();
        assert_eq!(inst.lp.rows.len(), 1 + 2 + 2);
        assert_eq!(build_unfair_lp(&inc, &x).unwrap().lp.rows.len(), 3);
        let bad = IncidenceMatrix::from_sets(4, &[vec![0], vec![]]).unwrap();
        assert!(matches!(build_fair_lp(&bad, &x, &t), Err(Error::EmptyRange(1))));
    }

    #[test]
    fn lp_optima() {
        let one = colored(&[0, 0, 0]);
        let inc = IncidenceMatrix::from_sets(3, &[vec![0, 1, 2]]).unwrap();
        let t = GroupRatios::new(vec![1.0]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &one, &t).unwrap()).unwrap();
        assert!((sol.eps_bar - 1.0).abs() < 1e-9);

        let two = colored(&[0, 0]);
        let inc = IncidenceMatrix::from_sets(2, &[vec![0], vec![1]]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &two, &t).unwrap()).unwrap();
        assert!((sol.eps_bar - 0.5).abs() < 1e-9);

        let single = colored(&[0]);
        let inc = IncidenceMatrix::from_sets(1, &[vec![0]]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &single, &t).unwrap()).unwrap();
        assert!((sol.weights[0] - 1.0).abs() < 1e-9 && (sol.eps_bar - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_fixture_weights() {
        let x = colored(&[0, 1, 0, 1]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &x, &t).unwrap()).unwrap();
        assert!((sol.eps_bar - 0.5).abs() < 1e-9);
        // the optimum face contains (1/4, 1/4, 1/4, 1/4); any optimum puts 1/2 on each range
        assert!((sol.weights[0] + sol.weights[1] - 0.5).abs() < 1e-9);
        assert!((sol.weights[0] + sol.weights[2] - 0.5).abs() < 1e-9);
        let dup = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3], vec![0, 1]]).unwrap();
        let again = solve_lp(&build_fair_lp(&dup, &x, &t).unwrap()).unwrap();
        assert!((again.eps_bar - sol.eps_bar).abs() < 1e-9);
    }

    #[test]
    fn infeasible_ratio() {
        // every range holds only group 1, which must carry (almost) no weight
        let x = colored(&[0, 0, 1]);
        let inc = IncidenceMatrix::from_sets(3, &[vec![2]]).unwrap();
        let t = GroupRatios::new(vec![1.0 - 1e-12, 1e-12]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &x, &t).unwrap()).unwrap();
        // eps_bar is forced to the tiny weight on the blue point
        assert!(sol.eps_bar <= 1e-9);
        let x = ColoredPointSet::with_groups(vec![vec![0.0], vec![1.0]], vec![0, 0], None, 2).unwrap();
        let inc = IncidenceMatrix::from_sets(2, &[vec![0]]).unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        let sol = solve_lp(&build_fair_lp(&inc, &x, &t).unwrap()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let p = HittingParams::new(0.1, 1, 0).unwrap();
        assert!(matches!(fglp(&x, &inc, &t, &p), Err(Error::LpInfeasible { .. })));
    }

    #[test]
    fn fglp_fixture() {
        let x = colored(&[0, 1, 0, 1]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let t = GroupRatios::new(vec![0.5, 0.5]).unwrap();
        let p = HittingParams::new(0.1, 1, 3).unwrap();
        let out = fglp(&x, &inc, &t, &p).unwrap();
        assert!(check_hitting(&inc, &out.indices).unwrap().valid);
        let counts = x.count_colors(&out.indices);
        assert_eq!(counts[0], counts[1]);
        assert_eq!(finf(&out.indices, &x, &t).unwrap(), 0.0);
    }

    #[test]
    fn glp_simple_cases() {
        let x = colored(&[0, 0, 0, 0]);
        let p = HittingParams::new(0.1, 1, 3).unwrap();
        let single = IncidenceMatrix::from_sets(4, &[vec![1, 2]]).unwrap();
        let out = glp(&x, &single, &p).unwrap();
        assert!(check_hitting(&single, &out.indices).unwrap().valid);
        let disjoint = IncidenceMatrix::from_sets(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        assert_eq!(glp(&x, &disjoint, &p).unwrap().indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn cr_vacuous_net() {
        let x = colored(&[0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        let inc = IncidenceMatrix::from_sets(10, &[vec![0]]).unwrap();
        let t = GroupRatios::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let p = HittingParams::new(0.1, 1, 3).unwrap();
        let out = cr_fair_epsnet(&x, &inc, 0.5, &t, &p).unwrap();
        assert_eq!(out.indices, vec![0, 4, 5]);
    }

    #[test]
    fn feasibility_band() {
        let x = colored(&[0, 0, 1, 1]);
        let inc = IncidenceMatrix::from_sets(4, &[vec![0, 1], vec![0, 2]]).unwrap();
        let bad = GroupRatios::new(vec![0.8, 0.2]).unwrap();
        let rep = cr_sample_feasibility(&x, &inc, 0.1, &bad).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].range, 0);
        let ok = GroupRatios::new(vec![0.55, 0.45]).unwrap();
        assert!(!cr_sample_feasibility(&x, &inc, 0.1, &ok).unwrap().obstructed());
        let none = IncidenceMatrix::from_sets(4, &[vec![0, 2]]).unwrap();
        assert!(!cr_sample_feasibility(&x, &none, 0.1, &bad).unwrap().obstructed());
    }
}
