//! Shared test oracles.

#![allow(dead_code)]

use fairnet_core::lp::{LinearProgram, Sense};
use fairnet_core::rng::seeded;
use rand::Rng;

/// Best objective over all basic feasible points of `max c.x, rows, x >= 0`,
/// or `None` when no vertex is feasible. Assumes a bounded feasible region.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    let mut ok = true;
    // every hyperplane as (coeffs, rhs, is_equality)
    let mut planes: Vec<(Vec<f64>, f64, bool)> = lp
        .rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; n];
            for &(j, v) in &r.coeffs {
                a[j] += v;
            }
            (a, r.rhs, r.sense == Sense::Eq)
        })
        // all-zero rows are either trivially satisfied or make the LP infeasible
        .filter(|(a, rhs, is_eq)| {
            a.iter().any(|&v| v != 0.0) || {
                ok &= if *is_eq { rhs.abs() <= 1e-9 } else { true };
                false
            }
        })
        .collect();
    if !ok {
        return None;
    }
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        planes.push((a, 0.0, false));
    }
    let eqs: Vec<usize> = (0..planes.len()).filter(|&i| planes[i].2).collect();
    let free: Vec<usize> = (0..planes.len()).filter(|&i| !planes[i].2).collect();
    if eqs.len() > n {
        return None;
    }
    let mut best: Option<f64> = None;
    for combo in combinations(free.len(), n - eqs.len()) {
        let chosen: Vec<usize> = eqs.iter().copied().chain(combo.iter().map(|&c| free[c])).collect();
        let a: Vec<Vec<f64>> = chosen.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = chosen.iter().map(|&i| planes[i].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        if x.iter().any(|&v| v < -1e-9) || lp.max_violation(&x) > 1e-9 {
            continue;
        }
        let obj = lp.objective_value(&x);
        best = Some(best.map_or(obj, |b: f64| b.max(obj)));
    }
    best
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(r);
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    rec(0, n, r, &mut cur, &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *v -= f * p;
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// A bounded LP that is feasible by construction: the rows are built around
/// a random non-negative point.
pub fn random_feasible_lp(seed: u64, max_vars: usize, max_rows: usize) -> LinearProgram {
    let mut rng = seeded(seed);
    let n = rng.gen_range(2..=max_vars);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
    let names = (0..n).map(|j| format!("x{j}")).collect();
    let obj = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut lp = LinearProgram::new(names, obj);
    let rows = rng.gen_range(1..=max_rows);
    let mut eq_rows = 0;
    for r in 0..rows {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-5i32..=5) as f64));
            }
        }
        let ax: f64 = coeffs.iter().map(|&(j, v)| v * x0[j]).sum();
        let slack = rng.gen_range(0.0..2.0);
        let (sense, rhs) = match rng.gen_range(0..3) {
            0 => (Sense::Le, ax + slack),
            1 => (Sense::Ge, ax - slack),
            _ if eq_rows < n / 2 => {
                eq_rows += 1;
                (Sense::Eq, ax)
            }
            _ => (Sense::Le, ax + slack),
        };
        lp.add_row(format!("r{r}"), coeffs, sense, rhs);
    }
    let total: f64 = x0.iter().sum();
    lp.add_row("bound", (0..n).map(|j| (j, 1.0)).collect(), Sense::Le, total + 5.0);
    lp
}
