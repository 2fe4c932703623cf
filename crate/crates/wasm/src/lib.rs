//! Browser bindings for three side-by-side comparisons on random planar
//! instances: FMC against uniform sampling, the fair discrepancy net against
//! its unfair baseline, and the fair LP hitting set against the plain one.
//!
//! Every export takes plain numbers and returns a JSON string; failures come
//! back as `{"error": "..."}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fairnet_core::datagen::{gen_balls, gen_points, gen_points_exact, gen_rects, incidence};
use fairnet_core::discrepancy::{disc_fair_epsnet, disc_unfair_epsnet, DiscrepancyParams};
use fairnet_core::hitting::{fglp, glp, HittingParams};
use fairnet_core::netbuild::{epsnet_sampling, fmc_fair_epsnet, SamplingParams};
use fairnet_core::oracle::{check_epsnet, check_hitting};
use fairnet_core::rng::derive_seed;
use fairnet_core::{dp_ratios, f2, finf, ColoredPointSet, GroupRatios, IncidenceMatrix, Range, RangeFamily, Result};

#[derive(Debug, Serialize)]
pub struct Selection {
    pub name: String,
    pub indices: Vec<usize>,
    pub f2: f64,
    pub finf: f64,
    pub valid: bool,
    /// Per-group counts.
    pub counts: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct Demo {
    /// `[x, y, group]` per point.
    pub points: Vec<[f64; 3]>,
    pub rects: Vec<[f64; 4]>,
    /// `[cx, cy, r]` per ball.
    pub balls: Vec<[f64; 3]>,
    pub ratios: Vec<f64>,
    pub selections: Vec<Selection>,
    /// LP value, for the hitting-set demo.
    pub eps_bar: Option<f64>,
}

impl Demo {
    fn new(x: &ColoredPointSet, fam: &RangeFamily, ratios: &GroupRatios) -> Self {
        let mut d = Demo {
            points: x.points().zip(x.colors()).map(|(p, &c)| [p[0], p[1], c as f64]).collect(),
            rects: vec![],
            balls: vec![],
            ratios: ratios.taus().to_vec(),
            selections: vec![],
            eps_bar: None,
        };
        for r in fam {
            match r {
                Range::Rect { lo, hi } => d.rects.push([lo[0], lo[1], hi[0], hi[1]]),
                Range::Ball { center, radius } => d.balls.push([center[0], center[1], *radius]),
                _ => {}
            }
        }
        d
    }

    fn select(&mut self, name: &str, x: &ColoredPointSet, ratios: &GroupRatios, indices: Vec<usize>, valid: bool) -> Result<()> {
        let (f2v, finfv) = if indices.is_empty() {
            (0.0, 0.0)
        } else {
            (f2(&indices, x, ratios)?, finf(&indices, x, ratios)?)
        };
        self.selections.push(Selection {
            name: name.into(),
            counts: x.count_colors(&indices),
            indices,
            f2: f2v,
            finf: finfv,
            valid,
        });
        Ok(())
    }
}

/// Group shares: `skew = 0` is balanced, larger values shrink later groups
/// geometrically by `1 - skew`.
fn shares(k: usize, skew: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|i| (1.0 - skew).powi(i as i32)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

pub fn sampling_demo(n: usize, k: usize, skew: f64, eps: f64, phi: f64, seed: u64) -> Result<Demo> {
    let x = gen_points(n, 2, &shares(k, skew), seed)?;
    let fam = gen_rects(32, 2, derive_seed(seed, 1))?;
    let inc = incidence(&x, &fam)?;
    let ratios = dp_ratios(&x, false)?;
    let p = SamplingParams::new(eps, phi, 4, seed)?;
    let mut d = Demo::new(&x, &fam, &ratios);
    let fmc = fmc_fair_epsnet(&x, &p, &ratios)?.indices;
    let valid = check_epsnet(&x, &inc, eps, &fmc, false)?.valid;
    d.select("fmc", &x, &ratios, fmc, valid)?;
    let base = epsnet_sampling(&x, &p)?;
    let valid = check_epsnet(&x, &inc, eps, &base, false)?.valid;
    d.select("sampling", &x, &ratios, base, valid)?;
    Ok(d)
}

/// Group `c` gets `2^(log_n - c)` points, so every group size is a power
/// of two and later groups are smaller.
pub fn discrepancy_demo(log_n: u32, k: usize, m: usize, eps: f64, seed: u64) -> Result<Demo> {
    if k == 0 || k > log_n as usize + 1 || log_n > 16 {
        return Err(fairnet_core::Error::InvalidParameter(format!(
            "need 1 <= k <= log_n + 1 and log_n <= 16, got k = {k}, log_n = {log_n}"
        )));
    }
    let sizes: Vec<usize> = (0..k as u32).map(|c| 1usize << (log_n - c)).collect();
    let x = gen_points_exact(&sizes, 2, seed)?;
    let fam = gen_rects(m, 2, derive_seed(seed, 1))?;
    let inc = incidence(&x, &fam)?;
    let ratios = dp_ratios(&x, false)?;
    let p = DiscrepancyParams::new(eps, 4)?;
    let mut d = Demo::new(&x, &fam, &ratios);
    let fair = disc_fair_epsnet(&x, &inc, &p)?.indices;
    let valid = check_epsnet(&x, &inc, eps, &fair, false)?.valid;
    d.select("disc", &x, &ratios, fair, valid)?;
    let unfair = disc_unfair_epsnet(&x, &inc, &p)?.indices;
    let valid = check_epsnet(&x, &inc, eps, &unfair, false)?.valid;
    d.select("disc-unfair", &x, &ratios, unfair, valid)?;
    Ok(d)
}

pub fn hitting_demo(n: usize, red_share: f64, m: usize, radius: f64, seed: u64) -> Result<Demo> {
    let x = gen_points(n, 2, &[red_share, 1.0 - red_share], seed)?;
    let fam = gen_balls(m, radius, &x, derive_seed(seed, 1))?;
    let inc: IncidenceMatrix = incidence(&x, &fam)?;
    let ratios = dp_ratios(&x, false)?;
    let hp = HittingParams::new(0.1, 3, seed)?;
    let mut d = Demo::new(&x, &fam, &ratios);
    let fair = fglp(&x, &inc, &ratios, &hp)?;
    d.eps_bar = Some(fair.eps_bar);
    let valid = check_hitting(&inc, &fair.indices)?.valid;
    d.select("fglp", &x, &ratios, fair.indices, valid)?;
    let plain = glp(&x, &inc, &hp)?;
    let valid = check_hitting(&inc, &plain.indices)?.valid;
    d.select("glp", &x, &ratios, plain.indices, valid)?;
    Ok(d)
}

fn to_json(r: Result<Demo>) -> String {
    match r {
        Ok(d) => serde_json::to_string(&d).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// FMC against uniform sampling, with 32 random rectangles.
#[wasm_bindgen(js_name = samplingDemo)]
pub fn sampling_demo_js(n: usize, k: usize, skew: f64, eps: f64, phi: f64, seed: u32) -> String {
    to_json(sampling_demo(n, k, skew, eps, phi, seed as u64))
}

/// Fair against unfair discrepancy nets; group sizes halve from `2^log_n`.
#[wasm_bindgen(js_name = discrepancyDemo)]
pub fn discrepancy_demo_js(log_n: u32, k: usize, m: usize, eps: f64, seed: u32) -> String {
    to_json(discrepancy_demo(log_n, k, m, eps, seed as u64))
}

/// FGLP against GLP with `m` balls of a fixed radius.
#[wasm_bindgen(js_name = hittingDemo)]
pub fn hitting_demo_js(n: usize, red_share: f64, m: usize, radius: f64, seed: u32) -> String {
    to_json(hitting_demo(n, red_share, m, radius, seed as u64))
}
