//! Synthetic instances, power-of-two trimming and small fixtures.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::IncidenceMatrix;
use crate::points::ColoredPointSet;
use crate::range::{Range, RangeFamily};
use crate::rng::seeded;

/// `n` uniform points in `[0,1]^dim` with i.i.d. groups drawn from
/// `color_dist` (one probability per group).
pub fn gen_points(n: usize, dim: usize, color_dist: &[f64], seed: u64) -> Result<ColoredPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if color_dist.is_empty() {
        return Err(Error::BadDistribution("no groups".into()));
    }
    if color_dist.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(Error::BadDistribution("probabilities must be non-negative".into()));
    }
    let total: f64 = color_dist.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution(format!("probabilities sum to {total}")));
    }
    let dist = WeightedIndex::new(color_dist).map_err(|e| Error::BadDistribution(e.to_string()))?;
    let mut rng = seeded(seed);
    let mut coords = Vec::with_capacity(n * dim);
    let mut colors = Vec::with_capacity(n);
    for _ in 0..n {
        coords.extend((0..dim).map(|_| rng.gen::<f64>()));
        colors.push(dist.sample(&mut rng));
    }
    ColoredPointSet::from_flat(dim, coords, colors, None, color_dist.len())
}

/// `n` points with group `c` getting exactly `sizes[c]` of them, assigned in
/// a seeded random order.
pub fn gen_points_exact(sizes: &[usize], dim: usize, seed: u64) -> Result<ColoredPointSet> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = seeded(seed);
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    let mut colors: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
        .collect();
    // Fisher-Yates with the same stream
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        colors.swap(i, j);
    }
    ColoredPointSet::from_flat(dim, coords, colors, None, sizes.len())
}

/// `m` axis-aligned boxes in `[0,1]^dim`, each spanned by two uniform corners.
pub fn gen_rects(m: usize, dim: usize, seed: u64) -> Result<RangeFamily> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let mut rng = seeded(seed);
    (0..m)
        .map(|_| {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (0..dim)
                .map(|_| {
                    let a: f64 = rng.gen();
                    let b: f64 = rng.gen();
                    (a.min(b), a.max(b))
                })
                .unzip();
            Range::rect(lo, hi)
        })
        .collect()
}

fn random_normal<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm2: f64 = v.iter().map(|a| a * a).sum();
        if norm2 > 1e-12 && norm2 <= 1.0 {
            return v;
        }
    }
}

/// `m` halfspaces with random normals; each boundary passes through a random
/// point of `x`, so every halfspace holds at least that point.
pub fn gen_halfspaces(m: usize, x: &ColoredPointSet, seed: u64) -> Result<RangeFamily> {
    if x.is_empty() {
        return Err(Error::InvalidPointSet("anchored ranges need points".into()));
    }
    let mut rng = seeded(seed);
    (0..m)
        .map(|_| {
            let normal = random_normal(&mut rng, x.dim());
            let anchor = x.point(rng.gen_range(0..x.len()));
            let offset = normal.iter().zip(anchor).map(|(a, b)| a * b).sum();
            Range::halfspace(normal, offset)
        })
        .collect()
}

/// `m` balls of a fixed radius centered on random points of `x` (distinct
/// centers while `m <= n`).
pub fn gen_balls(m: usize, radius: f64, x: &ColoredPointSet, seed: u64) -> Result<RangeFamily> {
    if x.is_empty() {
        return Err(Error::InvalidPointSet("anchored ranges need points".into()));
    }
    let mut rng = seeded(seed);
    let centers: Vec<usize> = if m <= x.len() {
        sample_indices(&mut rng, x.len(), m).into_vec()
    } else {
        (0..m).map(|_| rng.gen_range(0..x.len())).collect()
    };
    centers
        .into_iter()
        .map(|c| Range::ball(x.point(c).to_vec(), radius))
        .collect()
}

/// Indices of the `l` largest scores `f . x_i`, ties to the lower index.
pub fn topl_range(x: &ColoredPointSet, f: &[f64], l: usize) -> Result<Range> {
    if f.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: f.len(),
        });
    }
    if l == 0 || l > x.len() {
        return Err(Error::InvalidParameter(format!("l = {l} must lie in 1..={}", x.len())));
    }
    let scores: Vec<f64> = x
        .points()
        .map(|p| p.iter().zip(f).map(|(a, b)| a * b).sum())
        .collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(l);
    Ok(Range::explicit(order))
}

/// Top-`l` sets of `num_functions` random non-negative linear functions.
pub fn gen_topl_ranges(x: &ColoredPointSet, num_functions: usize, l: usize, seed: u64) -> Result<RangeFamily> {
    let mut rng = seeded(seed);
    (0..num_functions)
        .map(|_| {
            let f: Vec<f64> = (0..x.dim()).map(|_| rng.gen::<f64>()).collect();
            topl_range(x, &f, l)
        })
        .collect()
}

/// The `2^dim` orthant cells cut by one threshold per attribute (default:
/// the per-attribute median). A cell takes `<= t` or `> t` on each axis, so
/// every point lies in exactly one cell.
pub fn gen_summarization_ranges(x: &ColoredPointSet, thresholds: Option<&[f64]>) -> Result<RangeFamily> {
    let dim = x.dim();
    if dim > 20 {
        return Err(Error::TooManyAttributes(dim));
    }
    if x.is_empty() && thresholds.is_none() {
        return Err(Error::InvalidPointSet("median thresholds need points".into()));
    }
    let t: Vec<f64> = match thresholds {
        Some(t) => {
            if t.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.len(),
                });
            }
            t.to_vec()
        }
        None => (0..dim).map(|a| median(x.points().map(|p| p[a]).collect())).collect(),
    };
    let lo_bound: Vec<f64> = (0..dim)
        .map(|a| x.points().map(|p| p[a]).fold(0.0f64, f64::min).min(t[a]))
        .collect();
    let hi_bound: Vec<f64> = (0..dim)
        .map(|a| x.points().map(|p| p[a]).fold(1.0f64, f64::max).max(t[a].next_up()))
        .collect();
    (0..1usize << dim)
        .map(|mask| {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (0..dim)
                .map(|a| {
                    if mask >> a & 1 == 1 {
                        (t[a].next_up(), hi_bound[a])
                    } else {
                        (lo_bound[a], t[a])
                    }
                })
                .unzip();
            Range::rect(lo, hi)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimReport {
    /// Original indices of the kept points, in order.
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// Size after trimming; not necessarily a power of two.
    pub n: usize,
    pub n_is_power_of_two: bool,
}

/// Keeps the lowest-index `2^floor(log2 |X_c|)` points of every group.
pub fn trim_to_powers(x: &ColoredPointSet) -> Result<(ColoredPointSet, TrimReport)> {
    let mut keep_per = vec![0usize; x.k()];
    for (c, &s) in x.group_sizes().iter().enumerate() {
        keep_per[c] = if s == 0 { 0 } else { 1 << s.ilog2() };
    }
    let mut seen = vec![0usize; x.k()];
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..x.len() {
        let c = x.color(i);
        if seen[c] < keep_per[c] {
            seen[c] += 1;
            kept.push(i);
        } else {
            dropped.push(i);
        }
    }
    let out = x.select(&kept)?;
    let n = kept.len();
    Ok((
        out,
        TrimReport {
            kept,
            dropped,
            n,
            n_is_power_of_two: n.is_power_of_two(),
        },
    ))
}

/// Every distinct nonempty subset cut out by an axis-aligned rectangle on a
/// planar point set, as rectangles spanned by point coordinates.
pub fn all_rectangles(x: &ColoredPointSet) -> Result<RangeFamily> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    let mut xs: Vec<f64> = x.points().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = x.points().map(|p| p[1]).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (a, &x0) in xs.iter().enumerate() {
        for &x1 in &xs[a..] {
            for (c, &y0) in ys.iter().enumerate() {
                for &y1 in &ys[c..] {
                    let r = Range::rect(vec![x0, y0], vec![x1, y1])?;
                    let members: Vec<usize> = (0..x.len())
                        .filter(|&i| r.contains(x.point(i)).unwrap_or(false))
                        .collect();
                    if !members.is_empty() && seen.insert(members) {
                        out.push(r);
                    }
                }
            }
        }
    }
    Ok(RangeFamily::new(out))
}

/// The 18-point two-group instance with a 5-point rectangle `r1` and a
/// 6-point rectangle `r2`. Group 0 is blue, group 1 is red.
pub fn example_instance() -> (ColoredPointSet, RangeFamily) {
    let blue = [
        [-2.0, 1.5],
        [-1.0, 1.0],
        [-2.0, 3.0],
        [1.0, 2.5],
        [1.0, 3.0],
        [-0.2, 2.0],
        [-0.6, 1.7],
        [0.1, 2.9],
        [-0.4, 3.0],
    ];
    let red = [
        [-2.1, 2.5],
        [-1.5, 1.0],
        [1.4, 2.0],
        [0.0, 3.5],
        [1.3, 2.8],
        [0.2, 1.0],
        [-0.3, 1.1],
        [-1.0, 1.4],
        [-0.6, 3.1],
    ];
    let points: Vec<Vec<f64>> = blue.iter().chain(red.iter()).map(|p| p.to_vec()).collect();
    let colors: Vec<usize> = (0..18).map(|i| usize::from(i >= 9)).collect();
    let x = ColoredPointSet::new(points, colors)
        .and_then(|x| x.with_labels(vec!["blue".into(), "red".into()]))
        .expect("fixture is valid");
    let ranges = RangeFamily::new(vec![
        Range::rect(vec![-0.8, 2.65], vec![1.5, 3.3]).expect("valid"),
        Range::rect(vec![-1.2, 0.5], vec![0.5, 2.2]).expect("valid"),
    ]);
    (x, ranges)
}

/// Indices (into [`example_instance`]) of its 5-point example net.
pub fn example_net() -> Vec<usize> {
    // red (-2.1,2.5), (1.3,2.8), (0,3.5), (-1,1.4) and blue (-0.2,2)
    vec![5, 9, 12, 13, 16]
}

/// Two groups of 8 separated by the line `x = 0`, with a halfspace equal to
/// the red group and three halfspaces mixing both. Group 0 is red.
pub fn separated_instance() -> (ColoredPointSet, RangeFamily) {
    let mut points = Vec::new();
    let mut colors = Vec::new();
    for i in 0..8 {
        let y = i as f64 / 7.0;
        points.push(vec![-1.0 - 0.1 * (i % 3) as f64, y]);
        colors.push(0);
    }
    for i in 0..8 {
        let y = i as f64 / 7.0;
        points.push(vec![1.0 + 0.1 * (i % 3) as f64, y]);
        colors.push(1);
    }
    let x = ColoredPointSet::new(points, colors)
        .and_then(|x| x.with_labels(vec!["red".into(), "blue".into()]))
        .expect("fixture is valid");
    let ranges = RangeFamily::new(vec![
        Range::halfspace(vec![-1.0, 0.0], 0.0).expect("valid"),
        Range::halfspace(vec![0.0, 1.0], 0.5).expect("valid"),
        Range::halfspace(vec![0.0, -1.0], -0.3).expect("valid"),
        Range::halfspace(vec![1.0, 1.0], 1.5).expect("valid"),
    ]);
    (x, ranges)
}

/// Materializes `family` on `x`, the usual first step for every algorithm.
pub fn incidence(x: &ColoredPointSet, family: &RangeFamily) -> Result<IncidenceMatrix> {
    IncidenceMatrix::materialize(x, family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_basic() {
        let one = gen_points(100, 2, &[1.0], 1).unwrap();
        assert!(one.colors().iter().all(|&c| c == 0));
        assert_eq!(gen_points(0, 3, &[0.5, 0.5], 1).unwrap().len(), 0);
        assert!(matches!(gen_points(5, 2, &[0.5, 0.6], 1), Err(Error::BadDistribution(_))));
        assert_eq!(gen_points(50, 2, &[0.3, 0.7], 9).unwrap(), gen_points(50, 2, &[0.3, 0.7], 9).unwrap());
        let exact = gen_points_exact(&[3, 5], 2, 4).unwrap();
        assert_eq!(exact.group_sizes(), vec![3, 5]);
    }

    #[test]
    fn color_frequencies_chi_square() {
        let dist = [0.5, 0.3, 0.2];
        let n = 1 << 16;
        let x = gen_points(n, 1, &dist, 12).unwrap();
        let sizes = x.group_sizes();
        let chi2: f64 = sizes
            .iter()
            .zip(dist)
            .map(|(&o, p)| {
                let e = p * n as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        // 2 degrees of freedom: P(chi2 > 13.82) = 0.001
        assert!(chi2 < 13.82, "{chi2}");
    }

    #[test]
    fn anchored_ranges_nonempty() {
        let x = gen_points(200, 3, &[0.5, 0.5], 2).unwrap();
        let hs = gen_halfspaces(50, &x, 3).unwrap();
        let inc = IncidenceMatrix::materialize(&x, &hs).unwrap();
        assert!(inc.cardinalities().iter().all(|&c| c >= 1));
        let balls = gen_balls(50, 0.0, &x, 3).unwrap();
        let inc = IncidenceMatrix::materialize(&x, &balls).unwrap();
        assert!(inc.cardinalities().iter().all(|&c| c >= 1));
        let rects = gen_rects(30, 2, 5).unwrap();
        assert!(rects.iter().all(|r| r.validate().is_ok()));
        let a = serde_json::to_string(&gen_rects(5, 2, 8).unwrap()).unwrap();
        let b = serde_json::to_string(&gen_rects(5, 2, 8).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn topl_against_sort() {
        let x = gen_points(64, 2, &[1.0], 6).unwrap();
        let all = topl_range(&x, &[0.3, 0.7], 64).unwrap();
        assert_eq!(all, Range::explicit((0..64).collect()));
        let Range::Explicit { members } = topl_range(&x, &[1.0, 0.0], 10).unwrap() else {
            panic!()
        };
        let mut by_first: Vec<(f64, usize)> = (0..64).map(|i| (x.point(i)[0], i)).collect();
        by_first.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut want: Vec<usize> = by_first[..10].iter().map(|e| e.1).collect();
        want.sort_unstable();
        assert_eq!(members, want);
        let fam = gen_topl_ranges(&x, 5, 7, 1).unwrap();
        let inc = IncidenceMatrix::materialize(&x, &fam).unwrap();
        assert!(inc.cardinalities().iter().all(|&c| c == 7));
    }

    #[test]
    fn summarization_partition() {
        for dim in 1..=3 {
            let x = gen_points(300, dim, &[1.0], dim as u64).unwrap();
            let fam = gen_summarization_ranges(&x, None).unwrap();
            assert_eq!(fam.len(), 1 << dim);
            let inc = IncidenceMatrix::materialize(&x, &fam).unwrap();
            let cols = inc.transpose();
            assert!(cols.iter().all(|c| c.count_ones() == 1));
        }
        let wide = gen_points(2, 21, &[1.0], 0).unwrap();
        assert!(matches!(gen_summarization_ranges(&wide, None), Err(Error::TooManyAttributes(21))));
    }

    #[test]
    fn trimming() {
        let x = ColoredPointSet::new(
            (0..9).map(|i| vec![i as f64]).collect(),
            vec![0, 0, 1, 0, 0, 0, 1, 1, 1],
        )
        .unwrap();
        let (t, rep) = trim_to_powers(&x).unwrap();
        assert_eq!(t.group_sizes(), vec![4, 4]);
        assert_eq!(rep.dropped, vec![5]);
        assert!(rep.n_is_power_of_two);
        let (same, rep) = trim_to_powers(&t).unwrap();
        assert_eq!(same, t);
        assert!(rep.dropped.is_empty());
    }

    #[test]
    fn example_fixture() {
        let (x, r) = example_instance();
        let inc = IncidenceMatrix::materialize(&x, &r).unwrap();
        assert_eq!(inc.cardinality(0), 5);
        assert_eq!(inc.cardinality(1), 6);
        assert_eq!(x.count_colors(&example_net()), vec![1, 4]);
    }
}
