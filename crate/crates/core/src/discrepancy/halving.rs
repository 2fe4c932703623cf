//! Matchings, compatible colorings and the derandomized halving step.

use std::collections::HashMap;

use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};

use crate::bitrow::BitRow;
use crate::error::{Error, Result};
use crate::incidence::IncidenceMatrix;
use crate::points::ColoredPointSet;

/// A perfect pairing of a working set. Pairs hold point indices with the
/// lower index first and are sorted by that index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A ±1 coloring of a working set, aligned with the working set order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub signs: Vec<i8>,
}

impl Coloring {
    /// Positions colored +1.
    pub fn plus_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.signs.iter().enumerate().filter(|(_, &s)| s > 0).map(|(t, _)| t)
    }
}

/// Pairs points of the same group, consecutive in index order.
pub fn fair_matching(y: &[usize], x: &ColoredPointSet) -> Result<Matching> {
    x.check_indices(y)?;
    let mut by_color: Vec<Vec<usize>> = vec![Vec::new(); x.k()];
    for &i in y {
        by_color[x.color(i)].push(i);
    }
    if let Some(c) = by_color.iter().position(|g| g.len() % 2 == 1) {
        return Err(Error::OddColorCount {
            color: c,
            count: by_color[c].len(),
        });
    }
    let mut pairs = Vec::with_capacity(y.len() / 2);
    for mut g in by_color {
        g.sort_unstable();
        pairs.extend(g.chunks_exact(2).map(|c| (c[0], c[1])));
    }
    pairs.sort_unstable();
    Ok(Matching { pairs })
}

/// Pairs consecutive points in index order, ignoring groups.
pub fn arbitrary_matching(y: &[usize]) -> Result<Matching> {
    if y.len() % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "working set of odd size {} cannot be matched",
            y.len()
        )));
    }
    let mut sorted = y.to_vec();
    sorted.sort_unstable();
    Ok(Matching {
        pairs: sorted.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
    })
}

/// `sqrt(2 |Y| ln(4 m'))`, or 0 when there are no ranges.
pub fn discrepancy_bound(ny: usize, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    (2.0 * ny as f64 * (4.0 * m as f64).ln()).sqrt()
}

/// Signed sum `sum_{i in R} kappa(i)` for every row of `inc_y`.
pub fn range_discrepancies(inc_y: &IncidenceMatrix, coloring: &Coloring) -> Vec<i64> {
    inc_y
        .rows()
        .iter()
        .map(|r| r.iter_ones().map(|t| coloring.signs[t] as i64).sum())
        .collect()
}

/// Derandomized halving: a coloring compatible with `matching` whose
/// discrepancy on every row of `inc_y` is at most
/// [`discrepancy_bound`]`(|Y|, m')`.
///
/// Column `t` of `inc_y` is point `y[t]`; `matching` pairs point indices.
pub fn halving(y: &[usize], inc_y: &IncidenceMatrix, matching: &Matching) -> Result<Coloring> {
    if inc_y.n() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: inc_y.n(),
        });
    }
    let pos: HashMap<usize, usize> = y.iter().enumerate().map(|(t, &i)| (i, t)).collect();
    let mut local = Vec::with_capacity(matching.len());
    let mut used = vec![false; y.len()];
    for &(a, b) in &matching.pairs {
        let (pa, pb) = match (pos.get(&a), pos.get(&b)) {
            (Some(&pa), Some(&pb)) => (pa, pb),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "pair ({a}, {b}) is not inside the working set"
                )))
            }
        };
        if pa == pb || used[pa] || used[pb] {
            return Err(Error::InvalidParameter(format!("pair ({a}, {b}) reuses a point")));
        }
        used[pa] = true;
        used[pb] = true;
        local.push(if a < b { (pa, pb) } else { (pb, pa) });
    }
    if used.iter().any(|&u| !u) {
        return Err(Error::InvalidParameter("matching does not cover the working set".into()));
    }
    let cols = inc_y.transpose();
    Ok(Coloring {
        signs: halve_columns(&cols, inc_y.m(), &local),
    })
}

/// Conditional-expectation kernel over point-major columns.
///
/// `pairs` hold positions with the lower point index first. Per range we
/// track the signed sum `s` and the number `r` of undecided straddling
/// pairs, and give each pair the sign that does not increase
/// `sum_R cosh(t s_R) cosh(t)^r_R`.
pub(crate) fn halve_columns(cols: &[BitRow], m: usize, pairs: &[(usize, usize)]) -> Vec<i8> {
    let ny = cols.len();
    let mut signs = vec![0i8; ny];
    if m == 0 {
        for &(a, b) in pairs {
            signs[a] = 1;
            signs[b] = -1;
        }
        return signs;
    }
    let t = (2.0 * (4.0 * m as f64).ln() / ny as f64).sqrt();

    let mut r = vec![0u32; m];
    for &(a, b) in pairs {
        for_straddled(&cols[a], &cols[b], |j, _| r[j] += 1);
    }
    let max_r = r.iter().copied().max().unwrap_or(0) as usize;
    let cosh_t = t.cosh();
    let mut cosh_pow = Vec::with_capacity(max_r + 1);
    let mut acc = 1.0f64;
    for _ in 0..=max_r {
        cosh_pow.push(acc);
        acc *= cosh_t;
    }
    // |s_R| never exceeds the number of pairs
    let half = pairs.len() as i64;
    let sinh_tab: Vec<f64> = (-half..=half).map(|s| (t * s as f64).sinh()).collect();

    let mut s = vec![0i64; m];
    for &(a, b) in pairs {
        let mut d = 0.0f64;
        for_straddled(&cols[a], &cols[b], |j, in_a| {
            let term = sinh_tab[(s[j] + half) as usize] * cosh_pow[r[j] as usize - 1];
            if in_a {
                d += term;
            } else {
                d -= term;
            }
        });
        let sigma: i64 = if d > 0.0 { -1 } else { 1 };
        signs[a] = sigma as i8;
        signs[b] = -sigma as i8;
        for_straddled(&cols[a], &cols[b], |j, in_a| {
            s[j] += if in_a { sigma } else { -sigma };
            r[j] -= 1;
        });
    }
    signs
}

/// Calls `f(row, row contains a)` for every row containing exactly one of
/// the two columns.
#[inline]
fn for_straddled(a: &BitRow, b: &BitRow, mut f: impl FnMut(usize, bool)) {
    for (wi, (&wa, &wb)) in a.words().iter().zip(b.words()).enumerate() {
        let mut x = wa ^ wb;
        while x != 0 {
            let bit = x.trailing_zeros() as usize;
            x &= x - 1;
            f(wi * 64 + bit, wa >> bit & 1 == 1);
        }
    }
}

/// Point-major view of a full incidence matrix.
pub(crate) struct PointMajor {
    m: usize,
    cols: Vec<BitRow>,
}

impl PointMajor {
    pub(crate) fn new(inc: &IncidenceMatrix) -> Self {
        Self {
            m: inc.m(),
            cols: inc.transpose(),
        }
    }
}

const NONE: u32 = u32::MAX;

/// A sorted working set with its distinct nonempty induced ranges
/// ("classes"). `class[j]` maps original range `j` to its class, and
/// `cols[t]` lists the classes holding `y[t]`.
///
/// Restricting from a parent's classes instead of the full matrix keeps
/// the cost of each step proportional to the range space actually induced
/// on the working set.
pub(crate) struct Restricted {
    pub(crate) y: Vec<usize>,
    class: Vec<u32>,
    m_prime: usize,
    cols: Vec<BitRow>,
}

impl Restricted {
    /// Restriction of the full matrix to the sorted set `y`.
    pub(crate) fn full(pm: &PointMajor, y: Vec<usize>) -> Self {
        let mut h = vec![0u128; pm.m];
        for (t, &i) in y.iter().enumerate() {
            let z = fingerprint(t as u64);
            for j in pm.cols[i].iter_ones() {
                h[j] ^= z;
            }
        }
        let (class, m_prime) = classes_from(&h);
        let cols = y
            .iter()
            .map(|&i| {
                let mut row = BitRow::zeros(m_prime);
                for j in pm.cols[i].iter_ones() {
                    if class[j] != NONE {
                        row.set(class[j] as usize);
                    }
                }
                row
            })
            .collect();
        Self {
            y,
            class,
            m_prime,
            cols,
        }
    }

    pub(crate) fn m_prime(&self) -> usize {
        self.m_prime
    }

    /// Restriction to the positions `keep` (ascending).
    fn keep(&self, keep: &[usize]) -> Self {
        let mut h = vec![0u128; self.m_prime];
        for (t, &pos) in keep.iter().enumerate() {
            let z = fingerprint(t as u64);
            for c in self.cols[pos].iter_ones() {
                h[c] ^= z;
            }
        }
        let (map, m_prime) = classes_from(&h);
        let cols = keep
            .iter()
            .map(|&pos| {
                let mut row = BitRow::zeros(m_prime);
                for c in self.cols[pos].iter_ones() {
                    if map[c] != NONE {
                        row.set(map[c] as usize);
                    }
                }
                row
            })
            .collect();
        Self {
            y: keep.iter().map(|&pos| self.y[pos]).collect(),
            class: self
                .class
                .iter()
                .map(|&c| if c == NONE { NONE } else { map[c as usize] })
                .collect(),
            m_prime,
            cols,
        }
    }

    /// Union of two disjoint working sets over the same ranges. A class of
    /// the union is a pair of classes of the parts, so no fingerprints are
    /// needed.
    pub(crate) fn merge(a: &Self, b: &Self) -> Self {
        let mut ids: FxHashMap<u64, u32> = FxHashMap::default();
        let class: Vec<u32> = a
            .class
            .iter()
            .zip(&b.class)
            .map(|(&ca, &cb)| {
                if ca == NONE && cb == NONE {
                    return NONE;
                }
                let next = ids.len() as u32;
                *ids.entry(u64::from(ca) << 32 | u64::from(cb)).or_insert(next)
            })
            .collect();
        let m_prime = ids.len();
        // union classes grouped by the part class they extend
        let by_a = Grouped::new(a.m_prime, ids.iter().map(|(&key, &u)| ((key >> 32) as u32, u)));
        let by_b = Grouped::new(b.m_prime, ids.iter().map(|(&key, &u)| (key as u32, u)));
        let lift = |col: &BitRow, by: &Grouped| {
            let mut row = BitRow::zeros(m_prime);
            for c in col.iter_ones() {
                for &u in by.get(c) {
                    row.set(u as usize);
                }
            }
            row
        };
        let mut y = Vec::with_capacity(a.y.len() + b.y.len());
        let mut cols = Vec::with_capacity(a.y.len() + b.y.len());
        let (mut s, mut t) = (0, 0);
        while s < a.y.len() || t < b.y.len() {
            if t == b.y.len() || (s < a.y.len() && a.y[s] < b.y[t]) {
                y.push(a.y[s]);
                cols.push(lift(&a.cols[s], &by_a));
                s += 1;
            } else {
                y.push(b.y[t]);
                cols.push(lift(&b.cols[t], &by_b));
                t += 1;
            }
        }
        Self {
            y,
            class,
            m_prime,
            cols,
        }
    }

    /// Halves the working set with `matching`, keeping the +1 side.
    pub(crate) fn halve(&self, matching: &Matching) -> Self {
        let at = |i: usize| self.y.binary_search(&i).expect("matching stays inside the working set");
        let local: Vec<(usize, usize)> = matching.pairs.iter().map(|&(a, b)| (at(a), at(b))).collect();
        let signs = halve_columns(&self.cols, self.m_prime, &local);
        let plus: Vec<usize> = (0..self.y.len()).filter(|&t| signs[t] > 0).collect();
        self.keep(&plus)
    }
}

/// Values bucketed by key in one flat array.
struct Grouped {
    start: Vec<usize>,
    items: Vec<u32>,
}

impl Grouped {
    /// Pairs with key `NONE` are dropped.
    fn new(keys: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> Self {
        let mut start = vec![0usize; keys + 1];
        for (k, _) in pairs.clone() {
            if k != NONE {
                start[k as usize + 1] += 1;
            }
        }
        for i in 0..keys {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut items = vec![0u32; start[keys]];
        for (k, v) in pairs {
            if k != NONE {
                items[fill[k as usize]] = v;
                fill[k as usize] += 1;
            }
        }
        Self { start, items }
    }

    fn get(&self, k: usize) -> &[u32] {
        &self.items[self.start[k]..self.start[k + 1]]
    }
}

/// Dense class ids for the nonzero fingerprints, in first-seen order.
fn classes_from(h: &[u128]) -> (Vec<u32>, usize) {
    let mut ids: FxHashMap<u128, u32> = FxHashMap::default();
    let class = h
        .iter()
        .map(|&v| {
            if v == 0 {
                NONE
            } else {
                let next = ids.len() as u32;
                *ids.entry(v).or_insert(next)
            }
        })
        .collect();
    (class, ids.len())
}

fn fingerprint(t: u64) -> u128 {
    let lo = splitmix(t.wrapping_mul(2));
    let hi = splitmix(t.wrapping_mul(2).wrapping_add(1));
    (hi as u128) << 64 | lo as u128
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn colored(colors: &[usize]) -> ColoredPointSet {
        ColoredPointSet::new(
            (0..colors.len()).map(|i| vec![i as f64]).collect(),
            colors.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn fair_matching_examples() {
        let x = colored(&[0, 0]);
        assert_eq!(fair_matching(&[0, 1], &x).unwrap().pairs, vec![(0, 1)]);
        let x = colored(&[0, 1, 0, 1]);
        let m = fair_matching(&[0, 1, 2, 3], &x).unwrap();
        assert_eq!(m.pairs, vec![(0, 2), (1, 3)]);
        let x = colored(&[0, 0, 0, 1]);
        assert!(matches!(
            fair_matching(&[0, 1, 2, 3], &x),
            Err(Error::OddColorCount { color: 0, count: 3 })
        ));
    }

    #[test]
    fn halving_single_pair() {
        let inside = IncidenceMatrix::from_sets(2, &[vec![0, 1]]).unwrap();
        let m = Matching { pairs: vec![(0, 1)] };
        let c = halving(&[0, 1], &inside, &m).unwrap();
        assert_eq!(range_discrepancies(&inside, &c), vec![0]);
        assert_eq!(c.signs, vec![1, -1]);

        let straddle = IncidenceMatrix::from_sets(2, &[vec![0]]).unwrap();
        let c = halving(&[0, 1], &straddle, &m).unwrap();
        let k = range_discrepancies(&straddle, &c)[0];
        assert_eq!(k.abs(), 1);
        assert!(1.0 <= discrepancy_bound(2, 1));
    }

    #[test]
    fn halving_is_compatible_and_bounded() {
        let mut rng = seeded(42);
        for _ in 0..50 {
            let n = 2 * rng.gen_range(1..40);
            let m = rng.gen_range(1..30);
            let sets: Vec<Vec<usize>> = (0..m)
                .map(|_| (0..n).filter(|_| rng.gen_bool(0.4)).collect())
                .collect();
            let inc = IncidenceMatrix::from_sets(n, &sets).unwrap();
            let y: Vec<usize> = (0..n).collect();
            let matching = arbitrary_matching(&y).unwrap();
            let c = halving(&y, &inc, &matching).unwrap();
            for &(a, b) in &matching.pairs {
                assert_eq!(c.signs[a] + c.signs[b], 0);
            }
            let bound = discrepancy_bound(n, m);
            assert!(range_discrepancies(&inc, &c)
                .iter()
                .all(|&k| (k.abs() as f64) <= bound));
        }
    }

    fn induced(r: &Restricted) -> Vec<Vec<usize>> {
        let mut got: Vec<Vec<usize>> = (0..r.m_prime)
            .map(|c| (0..r.y.len()).filter(|&t| r.cols[t].get(c)).map(|t| r.y[t]).collect())
            .collect();
        got.sort();
        got
    }

    fn exact(inc: &IncidenceMatrix, y: &[usize]) -> Vec<Vec<usize>> {
        let e = inc.restrict(y).unwrap();
        let mut want: Vec<Vec<usize>> = (0..e.m())
            .map(|j| e.members(j).into_iter().map(|t| y[t]).collect())
            .collect();
        want.sort();
        want
    }

    #[test]
    fn restricted_matches_exact_restrict() {
        let mut rng = seeded(7);
        for _ in 0..30 {
            let n = 24;
            let sets: Vec<Vec<usize>> = (0..20)
                .map(|_| (0..n).filter(|_| rng.gen_bool(0.3)).collect())
                .collect();
            let inc = IncidenceMatrix::from_sets(n, &sets).unwrap();
            let pm = PointMajor::new(&inc);
            let (ya, yb): (Vec<usize>, Vec<usize>) = (0..n).partition(|_| rng.gen_bool(0.5));
            let a = Restricted::full(&pm, ya.clone());
            let b = Restricted::full(&pm, yb.clone());
            assert_eq!(induced(&a), exact(&inc, &ya));
            let u = Restricted::merge(&a, &b);
            assert_eq!(u.y, (0..n).collect::<Vec<_>>());
            assert_eq!(induced(&u), exact(&inc, &u.y));
            let keep: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let k = u.keep(&keep);
            assert_eq!(induced(&k), exact(&inc, &k.y));
            // every range still maps to the class of its induced subset
            for j in 0..inc.m() {
                let members: Vec<usize> = k.y.iter().copied().filter(|&i| inc.contains(j, i)).collect();
                match k.class[j] {
                    NONE => assert!(members.is_empty()),
                    c => assert_eq!(
                        (0..k.y.len()).filter(|&t| k.cols[t].get(c as usize)).map(|t| k.y[t]).collect::<Vec<_>>(),
                        members
                    ),
                }
            }
        }
    }
}
