//! Parameter sweeps from a TOML config.
//!
//! ```toml
//! algos = ["fmc", "sampling"]
//! seeds = { start = 0, count = 10 }   # or a list: [1, 2, 3]
//! record_runtime = true
//!
//! [data]
//! task = "rects"        # generator, as in `fairnet gen`
//! n = 4096
//! m = 64
//! # points = "pts.csv"  # or a fixed instance; paths are relative to the config
//! # ranges = "r.jsonl"
//!
//! [grid]
//! eps = [0.1, 0.05]
//! phi = [0.1]
//! k = [2, 4]            # balanced groups; ignored for fixed instances
//! vc = 2
//! ```
//!
//! Rows come out in grid order (algorithm, k, eps, phi, seed) whatever the
//! scheduling. With `record_runtime = false` the runtime column is zero and
//! the output is byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fairnet_core::io::{load_points_csv, load_ranges_jsonl};
use fairnet_core::{ColoredPointSet, IncidenceMatrix, RangeFamily, RatioSpec};

use crate::gen::{balanced, generate, GenSpec, GenTask};
use crate::run::{run, Params, Row, Task};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub algos: Vec<String>,
    pub seeds: Seeds,
    #[serde(default = "yes")]
    pub record_runtime: bool,
    pub data: DataSpec,
    #[serde(default)]
    pub grid: Grid,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl Seeds {
    fn values(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range { start, count } => (*start..start + count).collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub points: Option<PathBuf>,
    pub ranges: Option<PathBuf>,
    pub task: Option<GenTask>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "two")]
    pub dim: usize,
    /// Overrides the balanced split given by `grid.k`.
    pub color_dist: Option<Vec<f64>>,
    #[serde(default)]
    pub exact_sizes: bool,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "one")]
    pub l: usize,
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub eps: Vec<f64>,
    pub phi: Vec<f64>,
    pub k: Vec<usize>,
    pub vc: usize,
    pub ratios: String,
    pub c0_sample: f64,
    pub c0: f64,
    pub leaf_exp: Option<u32>,
    pub trim: bool,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            eps: vec![0.1],
            phi: vec![0.1],
            k: vec![2],
            vc: 2,
            ratios: "dp".into(),
            c0_sample: 1.0,
            c0: 1.0,
            leaf_exp: None,
            trim: false,
        }
    }
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn default_n() -> usize {
    4096
}
fn default_m() -> usize {
    64
}
fn default_radius() -> f64 {
    0.1
}

pub fn load_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg: BenchConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [&mut cfg.data.points, &mut cfg.data.ranges].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

struct Job {
    task: Task,
    k: usize,
    params: Params,
}

enum Source {
    Fixed(ColoredPointSet, IncidenceMatrix),
    Generated(GenSpec),
}

/// Runs the sweep; returns the raw rows in grid order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<Row>> {
    let tasks = cfg.algos.iter().map(|a| Task::parse(a)).collect::<Result<Vec<_>>>()?;
    let ratios: RatioSpec = cfg.grid.ratios.parse()?;
    let source = source(&cfg.data)?;
    let ks: Vec<usize> = match &source {
        Source::Fixed(x, _) => vec![x.k()],
        Source::Generated(_) => match &cfg.data.color_dist {
            Some(d) => vec![d.len()],
            None => cfg.grid.k.clone(),
        },
    };

    let mut jobs = Vec::new();
    for &task in &tasks {
        for &k in &ks {
            for &eps in &cfg.grid.eps {
                for &phi in &cfg.grid.phi {
                    for seed in cfg.seeds.values() {
                        let mut p = Params::new(eps, phi, cfg.grid.vc, seed);
                        p.ratios = ratios.clone();
                        p.c0_sample = cfg.grid.c0_sample;
                        p.c0 = cfg.grid.c0;
                        p.leaf_exp = cfg.grid.leaf_exp;
                        p.trim = cfg.grid.trim;
                        jobs.push(Job { task, k, params: p });
                    }
                }
            }
        }
    }

    let rows = jobs
        .par_iter()
        .map(|job| {
            let mut row = execute(job, &source, cfg);
            if !cfg.record_runtime {
                row.runtime_ms = 0.0;
            }
            row
        })
        .collect();
    Ok(rows)
}

fn source(d: &DataSpec) -> Result<Source> {
    match (&d.points, d.task) {
        (Some(points), None) => {
            let x = load_points_csv(points).with_context(|| format!("loading {}", points.display()))?;
            let fam = match &d.ranges {
                Some(r) => load_ranges_jsonl(r).with_context(|| format!("loading {}", r.display()))?,
                None => RangeFamily::new(vec![]),
            };
            let inc = IncidenceMatrix::materialize(&x, &fam)?;
            Ok(Source::Fixed(x, inc))
        }
        (None, Some(task)) => Ok(Source::Generated(GenSpec {
            task,
            n: d.n,
            dim: d.dim,
            dist: vec![],
            exact: d.exact_sizes,
            m: d.m,
            radius: d.radius,
            l: d.l,
            thresholds: d.thresholds.clone(),
        })),
        (Some(_), Some(_)) => bail!("data: give either points or task, not both"),
        (None, None) => bail!("data: needs points or task"),
    }
}

fn execute(job: &Job, source: &Source, cfg: &BenchConfig) -> Row {
    let p = &job.params;
    let result = match source {
        Source::Fixed(x, inc) => run(job.task, x, inc, p),
        Source::Generated(spec) => {
            let spec = GenSpec {
                dist: cfg.data.color_dist.clone().unwrap_or_else(|| balanced(job.k)),
                ..spec.clone()
            };
            generate(&spec, p.seed).and_then(|(x, fam)| {
                let inc = IncidenceMatrix::materialize(&x, &fam)?;
                run(job.task, &x, &inc, p)
            })
        }
    };
    match result {
        Ok(o) => Row::from_outcome(&o, p),
        Err(e) => Row {
            algo: job.task.name(),
            eps: p.eps,
            phi: p.phi,
            k: job.k,
            d: p.vc,
            seed: p.seed,
            size: 0,
            f2: 0.0,
            finf: 0.0,
            valid: false,
            runtime_ms: 0.0,
            error: format!("{e:#}"),
        },
    }
}

/// Mean and sample standard deviation per parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub algo: String,
    pub eps: f64,
    pub phi: f64,
    pub k: usize,
    pub d: usize,
    pub runs: usize,
    pub valid_rate: f64,
    pub size_mean: f64,
    pub size_sd: f64,
    pub f2_mean: f64,
    pub f2_sd: f64,
    pub finf_mean: f64,
    pub finf_sd: f64,
    pub runtime_ms_mean: f64,
    pub runtime_ms_sd: f64,
}

pub fn summarize(rows: &[Row]) -> Vec<Summary> {
    // first-appearance order of the parameter points
    let mut order: Vec<(String, u64, u64, usize, usize)> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        let key = (r.algo.clone(), r.eps.to_bits(), r.phi.to_bits(), r.k, r.d);
        let id = match order.iter().position(|o| *o == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        groups.entry(id).or_default().push(r);
    }
    groups
        .into_values()
        .map(|g| {
            let stat = |f: fn(&Row) -> f64| mean_sd(&g.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (size_mean, size_sd) = stat(|r| r.size as f64);
            let (f2_mean, f2_sd) = stat(|r| r.f2);
            let (finf_mean, finf_sd) = stat(|r| r.finf);
            let (runtime_ms_mean, runtime_ms_sd) = stat(|r| r.runtime_ms);
            Summary {
                algo: g[0].algo.clone(),
                eps: g[0].eps,
                phi: g[0].phi,
                k: g[0].k,
                d: g[0].d,
                runs: g.len(),
                valid_rate: g.iter().filter(|r| r.valid).count() as f64 / g.len() as f64,
                size_mean,
                size_sd,
                f2_mean,
                f2_sd,
                finf_mean,
                finf_sd,
                runtime_ms_mean,
                runtime_ms_sd,
            }
        })
        .collect()
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Writes records with a header even when there are none.
pub fn write_csv<T: Serialize, W: Write>(items: &[T], headers: &[&str], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(headers)?;
    for it in items {
        w.serialize(it)?;
    }
    w.flush()?;
    Ok(())
}

pub const ROW_HEADERS: &[&str] = &[
    "algo", "eps", "phi", "k", "d", "seed", "size", "f2", "finf", "valid", "runtime_ms", "error",
];

pub const SUMMARY_HEADERS: &[&str] = &[
    "algo",
    "eps",
    "phi",
    "k",
    "d",
    "runs",
    "valid_rate",
    "size_mean",
    "size_sd",
    "f2_mean",
    "f2_sd",
    "finf_mean",
    "finf_sd",
    "runtime_ms_mean",
    "runtime_ms_sd",
];
