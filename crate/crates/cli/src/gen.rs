//! Instance generation shared by `gen` and `bench`.

use anyhow::{bail, Result};
use clap::ValueEnum;
use serde::Deserialize;

use fairnet_core::datagen;
use fairnet_core::rng::derive_seed;
use fairnet_core::{ColoredPointSet, RangeFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenTask {
    Uniform,
    Rects,
    Halfspaces,
    Balls,
    Topl,
    Summarize,
}

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub task: GenTask,
    pub n: usize,
    pub dim: usize,
    pub dist: Vec<f64>,
    /// Exact group sizes `round(n * dist)` instead of i.i.d. colors.
    pub exact: bool,
    pub m: usize,
    pub radius: f64,
    pub l: usize,
    pub thresholds: Option<Vec<f64>>,
}

/// Points come from `seed`, ranges from an independent derived stream.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<(ColoredPointSet, RangeFamily)> {
    let x = if spec.exact {
        datagen::gen_points_exact(&exact_sizes(spec.n, &spec.dist)?, spec.dim, seed)?
    } else {
        datagen::gen_points(spec.n, spec.dim, &spec.dist, seed)?
    };
    let rs = derive_seed(seed, 1);
    let ranges = match spec.task {
        GenTask::Uniform => RangeFamily::new(vec![]),
        GenTask::Rects => datagen::gen_rects(spec.m, spec.dim, rs)?,
        GenTask::Halfspaces => datagen::gen_halfspaces(spec.m, &x, rs)?,
        GenTask::Balls => datagen::gen_balls(spec.m, spec.radius, &x, rs)?,
        GenTask::Topl => datagen::gen_topl_ranges(&x, spec.m, spec.l, rs)?,
        GenTask::Summarize => datagen::gen_summarization_ranges(&x, spec.thresholds.as_deref())?,
    };
    Ok((x, ranges))
}

/// Group sizes `round(n * p_c)`, with the rounding remainder given to the
/// largest group so they sum to `n`.
pub fn exact_sizes(n: usize, dist: &[f64]) -> Result<Vec<usize>> {
    if dist.is_empty() {
        bail!("empty color distribution");
    }
    let mut sizes: Vec<usize> = dist.iter().map(|p| (p * n as f64).round() as usize).collect();
    let total: usize = sizes.iter().sum();
    let big = (0..dist.len())
        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    if total > n {
        let over = total - n;
        if sizes[big] < over {
            bail!("cannot split {n} points as {dist:?}");
        }
        sizes[big] -= over;
    } else {
        sizes[big] += n - total;
    }
    Ok(sizes)
}

/// `k` equal shares.
pub fn balanced(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sizes_sum_to_n() {
        assert_eq!(exact_sizes(4096, &balanced(4)).unwrap(), vec![1024; 4]);
        assert_eq!(exact_sizes(10, &[0.7, 0.3]).unwrap(), vec![7, 3]);
        let s = exact_sizes(100, &balanced(3)).unwrap();
        assert_eq!(s.iter().sum::<usize>(), 100);
    }

    #[test]
    fn generation_is_seeded() {
        let spec = GenSpec {
            task: GenTask::Balls,
            n: 200,
            dim: 2,
            dist: vec![0.5, 0.5],
            exact: false,
            m: 10,
            radius: 0.2,
            l: 1,
            thresholds: None,
        };
        let a = generate(&spec, 3).unwrap();
        let b = generate(&spec, 3).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.1.len(), 10);
    }
}
