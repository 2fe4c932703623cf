//! One algorithm run on one instance, validated by the oracle.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

use fairnet_core::datagen::trim_to_powers;
use fairnet_core::discrepancy::{self, DiscrepancyParams};
use fairnet_core::hitting::{self, HittingParams};
use fairnet_core::io::RunReport;
use fairnet_core::netbuild::{self, SamplingParams, TopUpPolicy};
use fairnet_core::oracle::{check_epsnet, check_epssample, check_hitting};
use fairnet_core::{f2, finf, ColoredPointSet, Error, GroupRatios, IncidenceMatrix, RatioSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetAlgo {
    Sampling,
    Fmc,
    Disc,
    Fsm,
    DiscUnfair,
    FsmUnfair,
    Cr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleAlgo {
    Fmc,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HitAlgo {
    Glp,
    Fglp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Net(NetAlgo),
    Sample(SampleAlgo),
    Hit(HitAlgo),
}

impl Task {
    /// Names used in reports and bench configs.
    pub fn name(self) -> String {
        let v = match self {
            Task::Net(a) => a.to_possible_value(),
            Task::Sample(a) => a.to_possible_value(),
            Task::Hit(a) => a.to_possible_value(),
        };
        let name = v.expect("no skipped variants").get_name().to_string();
        match self {
            Task::Sample(_) => format!("sample-{name}"),
            _ => name,
        }
    }

    pub fn parse(s: &str) -> Result<Task> {
        if let Some(rest) = s.strip_prefix("sample-") {
            return Ok(Task::Sample(SampleAlgo::from_str(rest, false).map_err(anyhow::Error::msg)?));
        }
        if let Ok(a) = HitAlgo::from_str(s, false) {
            return Ok(Task::Hit(a));
        }
        NetAlgo::from_str(s, false)
            .map(Task::Net)
            .map_err(|_| anyhow::anyhow!("unknown algorithm '{s}'"))
    }
}

#[derive(Debug, Clone)]
pub struct Params {
    pub eps: f64,
    pub phi: f64,
    pub vc: usize,
    pub seed: u64,
    pub ratios: RatioSpec,
    pub weighted: bool,
    pub c0_sample: f64,
    pub c0: f64,
    pub leaf_exp: Option<u32>,
    pub max_attempts: Option<usize>,
    pub trim: bool,
}

impl Params {
    pub fn new(eps: f64, phi: f64, vc: usize, seed: u64) -> Self {
        Self {
            eps,
            phi,
            vc,
            seed,
            ratios: RatioSpec::DemographicParity,
            weighted: false,
            c0_sample: 1.0,
            c0: 1.0,
            leaf_exp: None,
            max_attempts: None,
            trim: false,
        }
    }

    fn sampling(&self) -> Result<SamplingParams> {
        Ok(SamplingParams::new(self.eps, self.phi, self.vc, self.seed)?.with_c0_sample(self.c0_sample)?)
    }

    fn disc(&self, eps: f64) -> Result<DiscrepancyParams> {
        let p = DiscrepancyParams::new(eps, self.vc)?.with_c0(self.c0)?;
        Ok(match self.leaf_exp {
            Some(e) => p.with_leaf_exponent(e),
            None => p,
        })
    }

    fn hitting(&self) -> Result<HittingParams> {
        let mut p = HittingParams::new(self.phi, self.vc, self.seed)?;
        p.max_attempts = self.max_attempts;
        Ok(p)
    }
}

/// A run plus the fields bench rows need.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub k: usize,
}

/// Flat CSV form of a run. `eps` is the requested parameter; hitting-set
/// runs ignore it and report their LP value in the JSON params instead.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub algo: String,
    pub eps: f64,
    pub phi: f64,
    pub k: usize,
    pub d: usize,
    pub seed: u64,
    pub size: usize,
    pub f2: f64,
    pub finf: f64,
    pub valid: bool,
    pub runtime_ms: f64,
    pub error: String,
}

impl Row {
    pub fn from_outcome(o: &Outcome, p: &Params) -> Row {
        Row {
            algo: o.report.algo.clone(),
            eps: p.eps,
            phi: p.phi,
            k: o.k,
            d: p.vc,
            seed: p.seed,
            size: o.report.size,
            f2: o.report.f2,
            finf: o.report.finf,
            valid: o.report.valid,
            runtime_ms: o.report.runtime_ms,
            error: String::new(),
        }
    }
}

/// Runs `task` on `(x, inc)`. With `p.trim` the run happens on the
/// per-color power-of-two trim of `x` and the indices are mapped back.
pub fn run(task: Task, x: &ColoredPointSet, inc: &IncidenceMatrix, p: &Params) -> Result<Outcome> {
    if p.trim {
        let (xt, report) = trim_to_powers(x)?;
        let inct = inc.restrict(&report.kept)?;
        let mut out = run_on(task, &xt, &inct, p)?;
        for i in &mut out.report.output_indices {
            *i = report.kept[*i];
        }
        out.report.params["trimmed_n"] = json!(report.n);
        return Ok(out);
    }
    run_on(task, x, inc, p)
}

fn run_on(task: Task, x: &ColoredPointSet, inc: &IncidenceMatrix, p: &Params) -> Result<Outcome> {
    if p.weighted && !matches!(task, Task::Net(NetAlgo::Fmc)) {
        bail!("--weighted is supported by the fmc net only");
    }
    if p.weighted && x.weights().is_none() {
        bail!("--weighted needs a weight column in the points file");
    }
    let ratios = p.ratios.resolve(x, p.weighted)?;
    let mut params = json!({
        "phi": p.phi,
        "vc": p.vc,
        "ratios": ratios.taus(),
    });
    let start = Instant::now();
    let indices = match task {
        Task::Net(algo) => {
            params["eps"] = json!(p.eps);
            net(algo, x, inc, p, &ratios, &mut params)?
        }
        Task::Sample(algo) => {
            params["eps"] = json!(p.eps);
            match algo {
                SampleAlgo::Fmc => netbuild::fmc_fair_epssample(x, &p.sampling()?, &ratios)?.indices,
                SampleAlgo::Disc => discrepancy::disc_fair_epssample(x, inc, &p.disc(p.eps)?)?,
            }
        }
        Task::Hit(algo) => {
            let hp = p.hitting()?;
            let run = match algo {
                HitAlgo::Glp => hitting::glp(x, inc, &hp)?,
                HitAlgo::Fglp => hitting::fglp(x, inc, &ratios, &hp)?,
            };
            params["eps_bar"] = json!(run.eps_bar);
            params["attempts"] = json!(run.attempts);
            params["draws"] = json!(run.draws);
            run.indices
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let valid = match task {
        Task::Net(_) => check_epsnet(x, inc, p.eps, &indices, p.weighted)?.valid,
        Task::Sample(_) => check_epssample(inc, p.eps, &indices)?.valid,
        Task::Hit(_) => check_hitting(inc, &indices)?.valid,
    };
    let (f2v, finfv) = metrics(&indices, x, &ratios)?;
    Ok(Outcome {
        report: RunReport {
            algo: task.name(),
            params,
            size: indices.len(),
            output_indices: indices,
            f2: f2v,
            finf: finfv,
            valid,
            runtime_ms,
            seed: p.seed,
        },
        k: x.k(),
    })
}

fn net(
    algo: NetAlgo,
    x: &ColoredPointSet,
    inc: &IncidenceMatrix,
    p: &Params,
    ratios: &GroupRatios,
    params: &mut serde_json::Value,
) -> Result<Vec<usize>> {
    Ok(match algo {
        NetAlgo::Sampling => netbuild::epsnet_sampling(x, &p.sampling()?)?,
        NetAlgo::Fmc => {
            let sp = p.sampling()?;
            let s = if p.weighted {
                let w = x.normalized_weights();
                netbuild::fmc_weighted(x, &w, &sp, ratios, TopUpPolicy::Strict)?
            } else {
                netbuild::fmc_fair_epsnet(x, &sp, ratios)?
            };
            params["draws"] = json!(s.draws);
            s.indices
        }
        NetAlgo::Disc | NetAlgo::DiscUnfair => {
            let dp = p.disc(p.eps)?;
            let r = if algo == NetAlgo::Disc {
                discrepancy::disc_fair_epsnet(x, inc, &dp)
            } else {
                discrepancy::disc_unfair_epsnet(x, inc, &dp)
            }
            .map_err(trim_hint)?;
            params["rounds"] = json!(r.rounds);
            r.indices
        }
        NetAlgo::Fsm | NetAlgo::FsmUnfair => {
            let dp = p.disc(p.eps)?;
            let r = if algo == NetAlgo::Fsm {
                discrepancy::fsm_fair_epsnet(x, inc, &dp)
            } else {
                discrepancy::fsm_unfair_epsnet(x, inc, &dp)
            }
            .map_err(trim_hint)?;
            params["leaf_exponent"] = json!(r.leaf_exponent);
            params["sample_size"] = json!(r.sample.len());
            r.indices
        }
        NetAlgo::Cr => {
            let r = hitting::cr_fair_epsnet(x, inc, p.eps, ratios, &p.hitting()?)?;
            params["eps_bar"] = json!(r.eps_bar);
            r.indices
        }
    })
}

fn trim_hint(e: Error) -> anyhow::Error {
    let hint = matches!(e, Error::NotPowerOfTwo { .. } | Error::OddColorCount { .. });
    let e = anyhow::Error::from(e);
    if hint {
        e.context("group sizes must be powers of two; rerun with --trim")
    } else {
        e
    }
}

/// Fairness metrics; an empty output is reported as deviation 0.
fn metrics(indices: &[usize], x: &ColoredPointSet, ratios: &GroupRatios) -> Result<(f64, f64)> {
    if indices.is_empty() {
        return Ok((0.0, 0.0));
    }
    Ok((
        f2(indices, x, ratios).context("f2")?,
        finf(indices, x, ratios).context("finf")?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_names_round_trip() {
        let all = [
            Task::Net(NetAlgo::Sampling),
            Task::Net(NetAlgo::DiscUnfair),
            Task::Net(NetAlgo::Cr),
            Task::Sample(SampleAlgo::Disc),
            Task::Hit(HitAlgo::Fglp),
        ];
        for t in all {
            assert_eq!(Task::parse(&t.name()).unwrap(), t);
        }
        assert_eq!(Task::Net(NetAlgo::FsmUnfair).name(), "fsm-unfair");
        assert!(Task::parse("mwu").is_err());
    }
}
