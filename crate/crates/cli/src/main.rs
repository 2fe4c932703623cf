//! `fairnet`: fair ε-nets, ε-samples and hitting sets from the command line.
//!
//! Exit status is 0 when every run passed its validity check, 1 when a run
//! produced an output the oracle rejects, and 2 on usage or input errors.

mod bench;
mod gen;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fairnet_core::hitting::{build_fair_lp, build_unfair_lp};
use fairnet_core::io::{load_points_csv, load_ranges_jsonl, save_points_csv, save_ranges_jsonl, RunReport};
use fairnet_core::oracle::{check_epsnet, check_epssample, check_hitting};
use fairnet_core::{ColoredPointSet, IncidenceMatrix, RatioSpec};

use crate::gen::{GenSpec, GenTask};
use crate::run::{HitAlgo, NetAlgo, Params, Row, SampleAlgo, Task};

#[derive(Parser)]
#[command(name = "fairnet", version, about = "Fair epsilon-nets, epsilon-samples and hitting sets")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout (a directory for `gen`).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format of single runs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic instance (points.csv and ranges.jsonl).
    Gen(GenArgs),
    /// Build an ε-net.
    Net {
        #[arg(long, value_enum)]
        algo: NetAlgo,
        #[command(flatten)]
        common: Common,
    },
    /// Build a fair ε-sample.
    Sample {
        #[arg(long, value_enum)]
        algo: SampleAlgo,
        #[command(flatten)]
        common: Common,
    },
    /// Build a hitting set via the LP.
    Hitset {
        #[arg(long, value_enum)]
        algo: HitAlgo,
        /// Also write the LP in CPLEX LP format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a subset against the oracle.
    Check(CheckArgs),
    /// Run a parameter sweep from a TOML config and emit CSV rows.
    Bench {
        config: PathBuf,
        /// Write per-parameter-point mean and standard deviation here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Instance {
    /// Points CSV (`x0,...,color[,weight]`).
    #[arg(long)]
    points: PathBuf,
    /// Ranges, one JSON object per line.
    #[arg(long)]
    ranges: Option<PathBuf>,
}

impl Instance {
    fn load(&self) -> Result<(ColoredPointSet, IncidenceMatrix)> {
        let x = load_points_csv(&self.points).with_context(|| format!("loading {}", self.points.display()))?;
        let fam = match &self.ranges {
            Some(r) => load_ranges_jsonl(r).with_context(|| format!("loading {}", r.display()))?,
            None => Default::default(),
        };
        let inc = IncidenceMatrix::materialize(&x, &fam)?;
        Ok((x, inc))
    }
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Failure probability.
    #[arg(long, default_value_t = 0.1)]
    phi: f64,
    /// VC dimension of the range space.
    #[arg(long = "vc", default_value_t = 2)]
    vc: usize,
    /// `dp` or a comma list of group ratios (decimals or fractions).
    #[arg(long, default_value = "dp")]
    ratios: RatioSpec,
    /// Use point weights (fmc net only).
    #[arg(long)]
    weighted: bool,
    /// Constant of the ε-sample size bound (heuristic).
    #[arg(long, default_value_t = 1.0)]
    c0_sample: f64,
    /// Constant of the discrepancy target sizes (heuristic).
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Sketch-and-merge leaf size exponent.
    #[arg(long)]
    leaf_exp: Option<u32>,
    /// Attempt cap of the verified hitting-set retry.
    #[arg(long)]
    max_attempts: Option<usize>,
    /// Trim every group to a power of two first (lowest indices kept).
    #[arg(long)]
    trim: bool,
}

impl Common {
    fn params(&self, seed: u64) -> Params {
        Params {
            ratios: self.ratios.clone(),
            weighted: self.weighted,
            c0_sample: self.c0_sample,
            c0: self.c0,
            leaf_exp: self.leaf_exp,
            max_attempts: self.max_attempts,
            trim: self.trim,
            ..Params::new(self.eps, self.phi, self.vc, seed)
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    task: GenTask,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Group probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.5")]
    dist: Vec<f64>,
    /// Exact group sizes `round(n * p)` instead of i.i.d. colors.
    #[arg(long)]
    exact: bool,
    /// Number of ranges (ranking functions for `topl`).
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
    /// Top-l size.
    #[arg(long, default_value_t = 1)]
    l: usize,
    /// Per-attribute thresholds for `summarize` (default: medians).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Net,
    Sample,
    Hitset,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    what: What,
    #[command(flatten)]
    instance: Instance,
    /// A run report, or a JSON array of point indices.
    #[arg(long)]
    subset: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Heavy ranges by normalized weight (nets only).
    #[arg(long)]
    weighted: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every run was valid.
fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Gen(g) => gen_cmd(g, cli),
        Cmd::Net { algo, common } => single(Task::Net(*algo), common, cli),
        Cmd::Sample { algo, common } => single(Task::Sample(*algo), common, cli),
        Cmd::Hitset {
            algo,
            export_lp,
            common,
        } => {
            if let Some(path) = export_lp {
                let (x, inc) = common.instance.load()?;
                let inst = match algo {
                    HitAlgo::Fglp => build_fair_lp(&inc, &x, &common.ratios.resolve(&x, false)?)?,
                    HitAlgo::Glp => build_unfair_lp(&inc, &x)?,
                };
                std::fs::write(path, inst.lp.to_lp_format())?;
            }
            single(Task::Hit(*algo), common, cli)
        }
        Cmd::Check(c) => check_cmd(c, cli),
        Cmd::Bench { config, summary } => bench_cmd(config, summary.as_deref(), cli),
    }
}

fn out(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn single(task: Task, common: &Common, cli: &Cli) -> Result<bool> {
    let (x, inc) = common.instance.load()?;
    let params = common.params(cli.seed);
    let o = run::run(task, &x, &inc, &params)?;
    let mut w = out(cli)?;
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &o.report)?;
            writeln!(w)?;
        }
        Format::Csv => bench::write_csv(&[Row::from_outcome(&o, &params)], bench::ROW_HEADERS, &mut w)?,
    }
    w.flush()?;
    Ok(o.report.valid)
}

fn gen_cmd(g: &GenArgs, cli: &Cli) -> Result<bool> {
    let Some(dir) = &cli.output else {
        bail!("gen needs --output DIR");
    };
    std::fs::create_dir_all(dir)?;
    let spec = GenSpec {
        task: g.task,
        n: g.n,
        dim: g.dim,
        dist: g.dist.clone(),
        exact: g.exact,
        m: g.m,
        radius: g.radius,
        l: g.l,
        thresholds: g.thresholds.clone(),
    };
    let (x, fam) = gen::generate(&spec, cli.seed)?;
    save_points_csv(&x, dir.join("points.csv"))?;
    if g.task != GenTask::Uniform {
        save_ranges_jsonl(&fam, dir.join("ranges.jsonl"))?;
    }
    eprintln!("wrote {} points and {} ranges to {}", x.len(), fam.len(), dir.display());
    Ok(true)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SubsetFile {
    Report(RunReport),
    Indices(Vec<usize>),
}

fn read_subset(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: SubsetFile = serde_json::from_str(&text)
        .with_context(|| format!("{}: expected a run report or an index array", path.display()))?;
    Ok(match parsed {
        SubsetFile::Report(r) => r.output_indices,
        SubsetFile::Indices(v) => v,
    })
}

fn check_cmd(c: &CheckArgs, cli: &Cli) -> Result<bool> {
    let (x, inc) = c.instance.load()?;
    let subset = read_subset(&c.subset)?;
    let (valid, detail) = match c.what {
        What::Net => {
            let r = check_epsnet(&x, &inc, c.eps, &subset, c.weighted)?;
            (r.valid, serde_json::to_value(r)?)
        }
        What::Sample => {
            let r = check_epssample(&inc, c.eps, &subset)?;
            (r.valid, serde_json::to_value(r)?)
        }
        What::Hitset => {
            let r = check_hitting(&inc, &subset)?;
            (r.valid, serde_json::to_value(r)?)
        }
    };
    let mut w = out(cli)?;
    serde_json::to_writer_pretty(&mut w, &detail)?;
    writeln!(w)?;
    w.flush()?;
    Ok(valid)
}

fn bench_cmd(config: &Path, summary: Option<&Path>, cli: &Cli) -> Result<bool> {
    let cfg = bench::load_config(config)?;
    let rows = bench::run_bench(&cfg)?;
    let mut w = out(cli)?;
    bench::write_csv(&rows, bench::ROW_HEADERS, &mut w)?;
    let stats = bench::summarize(&rows);
    match summary {
        Some(p) => bench::write_csv(&stats, bench::SUMMARY_HEADERS, File::create(p)?)?,
        None => bench::write_csv(&stats, bench::SUMMARY_HEADERS, io::stderr().lock())?,
    }
    for r in rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!("{} seed {}: {}", r.algo, r.seed, r.error);
    }
    Ok(rows.iter().all(|r| r.valid))
}
