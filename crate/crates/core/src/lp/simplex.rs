//! Two-phase revised simplex with an explicit dense basis inverse.
//!
//! Pricing is partial Dantzig (best reduced cost within a rotating segment
//! of columns) and switches to Bland's rule after a run of degenerate
//! pivots, which rules out cycling. The inverse is rebuilt from scratch
//! every `refactor_every` pivots and once more before the final solution
//! is read off.

use log::debug;

use super::{LinearProgram, LpOutcome, LpSolver, LpStatus, Sense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSimplex {
    /// Optimality and feasibility tolerance.
    pub tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    pub refactor_every: usize,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degenerate_streak: usize,
    /// Iteration cap; `None` derives one from the instance size.
    pub max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            pivot_tol: 1e-9,
            refactor_every: 100,
            degenerate_streak: 50,
            max_iterations: None,
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpOutcome> {
        Tableau::build(lp, self)?.run(lp)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau<'a> {
    cfg: &'a DenseSimplex,
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    kind: Vec<Kind>,
    b: Vec<f64>,
    /// +1 or -1 per row, the factor applied to make `b >= 0`.
    row_sign: Vec<f64>,
    /// Artificial column of each row, if any.
    art_of_row: Vec<Option<usize>>,
    basis: Vec<usize>,
    /// Position in the basis, or `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    cursor: usize,
}

impl<'a> Tableau<'a> {
    fn build(lp: &LinearProgram, cfg: &'a DenseSimplex) -> Result<Self> {
        let n = lp.n_vars();
        let m = lp.rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut kind = vec![Kind::Structural; n];
        let mut b = Vec::with_capacity(m);
        let mut row_sign = Vec::with_capacity(m);
        let mut senses = Vec::with_capacity(m);
        for (i, row) in lp.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!("row {i} has a non-finite bound")));
            }
            let mut sense = row.sense;
            let mut sign = 1.0;
            if row.rhs < 0.0 || (row.rhs == 0.0 && sense == Sense::Ge) {
                sign = -1.0;
                sense = match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::IndexOutOfRange { index: j, len: n });
                }
                if a != 0.0 {
                    cols[j].push((i, sign * a));
                }
            }
            b.push(sign * row.rhs);
            row_sign.push(sign);
            senses.push(sense);
        }
        // merge repeated (row, var) entries
        for c in &mut cols {
            c.sort_by_key(|e| e.0);
            c.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 += next.1;
                    true
                } else {
                    false
                }
            });
        }

        let mut basis = vec![usize::MAX; m];
        let mut art_of_row = vec![None; m];
        for (i, &s) in senses.iter().enumerate() {
            match s {
                Sense::Le => {
                    basis[i] = cols.len();
                    cols.push(vec![(i, 1.0)]);
                    kind.push(Kind::Slack);
                }
                Sense::Ge => {
                    cols.push(vec![(i, -1.0)]);
                    kind.push(Kind::Slack);
                }
                Sense::Eq => {}
            }
        }
        for (i, &s) in senses.iter().enumerate() {
            if s != Sense::Le {
                basis[i] = cols.len();
                art_of_row[i] = Some(cols.len());
                cols.push(vec![(i, 1.0)]);
                kind.push(Kind::Artificial);
            }
        }
        let total = cols.len();
        let mut pos = vec![usize::MAX; total];
        for (r, &j) in basis.iter().enumerate() {
            pos[j] = r;
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let xb = b.clone();
        Ok(Self {
            cfg,
            m,
            n,
            cols,
            kind,
            b,
            row_sign,
            art_of_row,
            basis,
            pos,
            binv,
            xb,
            iterations: 0,
            since_refactor: 0,
            cursor: 0,
        })
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpOutcome> {
        let limit = self
            .cfg
            .max_iterations
            .unwrap_or(50 * (self.m + self.cols.len()) + 1000);

        // phase 1: maximize minus the sum of artificials
        let phase1: Vec<f64> = self
            .kind
            .iter()
            .map(|&k| if k == Kind::Artificial { -1.0 } else { 0.0 })
            .collect();
        if self.art_of_row.iter().any(Option::is_some) {
            match self.optimize(&phase1, true, limit)? {
                Step::Optimal => {}
                Step::Unbounded => {
                    return Err(Error::NumericalBreakdown("phase 1 reported unbounded".into()))
                }
            }
            self.refactor()?;
            let scale = self.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let mut worst: Option<(usize, f64)> = None;
            for (r, &j) in self.basis.iter().enumerate() {
                if self.kind[j] == Kind::Artificial && self.xb[r] > self.cfg.tol * scale {
                    let row = self.cols[j][0].0;
                    if worst.is_none_or(|(_, v)| self.xb[r] > v) {
                        worst = Some((row, self.xb[r]));
                    }
                }
            }
            if let Some((row, _)) = worst {
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible,
                    x: vec![0.0; self.n],
                    objective: f64::NAN,
                    duals: vec![0.0; self.m],
                    infeasible_row: Some(row),
                    iterations: self.iterations,
                });
            }
            self.drive_out_artificials()?;
        }

        let mut phase2 = vec![0.0; self.cols.len()];
        phase2[..self.n].copy_from_slice(&lp.objective);
        let step = self.optimize(&phase2, false, limit)?;
        self.refactor()?;
        if step == Step::Unbounded {
            return Ok(LpOutcome {
                status: LpStatus::Unbounded,
                x: vec![0.0; self.n],
                objective: f64::INFINITY,
                duals: vec![0.0; self.m],
                infeasible_row: None,
                iterations: self.iterations,
            });
        }
        let mut x = vec![0.0; self.n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                // round-off below tolerance is not a sign violation
                x[j] = if self.xb[r].abs() < self.cfg.tol * 1e-3 { 0.0 } else { self.xb[r] };
            }
        }
        let y = self.duals(&phase2);
        let duals = y.iter().zip(&self.row_sign).map(|(v, s)| v * s).collect();
        debug!("simplex finished after {} iterations", self.iterations);
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            objective: lp.objective_value(&x),
            x,
            duals,
            infeasible_row: None,
            iterations: self.iterations,
        })
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = cost[j];
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, &v) in y.iter_mut().zip(row) {
                    *yi += c * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    fn eligible(&self, j: usize, phase1: bool) -> bool {
        self.pos[j] == usize::MAX && (phase1 || self.kind[j] != Kind::Artificial)
    }

    fn optimize(&mut self, cost: &[f64], phase1: bool, limit: usize) -> Result<Step> {
        let total = self.cols.len();
        let segment = (total / 8).max(256).min(total.max(1));
        let mut streak = 0usize;
        loop {
            if self.iterations >= limit {
                return Err(Error::NumericalBreakdown(format!(
                    "simplex exceeded {limit} iterations"
                )));
            }
            let y = self.duals(cost);
            let bland = streak >= self.cfg.degenerate_streak;
            let entering = if bland {
                (0..total).find(|&j| self.eligible(j, phase1) && self.reduced_cost(j, cost, &y) > self.cfg.tol)
            } else {
                self.partial_price(cost, &y, phase1, segment)
            };
            let Some(q) = entering else {
                return Ok(Step::Optimal);
            };
            let alpha = self.column(q);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = alpha[r];
                if a <= self.cfg.pivot_tol {
                    continue;
                }
                let theta = self.xb[r].max(0.0) / a;
                leave = match leave {
                    None => Some((r, theta)),
                    Some((lr, lt)) => {
                        let better = if theta < lt - 1e-12 {
                            true
                        } else if theta <= lt + 1e-12 {
                            if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > alpha[lr]
                            }
                        } else {
                            false
                        };
                        if better {
                            Some((r, theta))
                        } else {
                            Some((lr, lt))
                        }
                    }
                };
            }
            let Some((r, theta)) = leave else {
                return Ok(Step::Unbounded);
            };
            if theta <= self.cfg.tol {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, q, &alpha, theta)?;
        }
    }

    fn partial_price(&mut self, cost: &[f64], y: &[f64], phase1: bool, segment: usize) -> Option<usize> {
        let total = self.cols.len();
        let mut scanned = 0;
        while scanned < total {
            let mut best: Option<(usize, f64)> = None;
            let end = (scanned + segment).min(total);
            for off in scanned..end {
                let j = (self.cursor + off) % total;
                if !self.eligible(j, phase1) {
                    continue;
                }
                let d = self.reduced_cost(j, cost, y);
                if d > self.cfg.tol && best.is_none_or(|(bj, bd)| d > bd || (d == bd && j < bj)) {
                    best = Some((j, d));
                }
            }
            scanned = end;
            if let Some((j, _)) = best {
                self.cursor = (self.cursor + scanned) % total;
                return Some(j);
            }
        }
        None
    }

    fn column(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.cols[q] {
            for (r, out) in alpha.iter_mut().enumerate() {
                *out += self.binv[r * m + i] * a;
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], theta: f64) -> Result<()> {
        let m = self.m;
        let piv = alpha[r];
        for (i, (xb, a)) in self.xb.iter_mut().zip(alpha).enumerate() {
            if i != r {
                *xb -= theta * a;
            }
        }
        self.xb[r] = theta;
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (i, row) in head.chunks_exact_mut(m).enumerate() {
            let f = alpha[i];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (off, row) in tail.chunks_exact_mut(m).enumerate() {
            let f = alpha[r + 1 + off];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        let old = self.basis[r];
        self.pos[old] = usize::MAX;
        self.basis[r] = q;
        self.pos[q] = r;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.cfg.refactor_every {
            self.refactor()?;
        }
        Ok(())
    }

    /// Rebuilds `B^-1` by Gauss-Jordan elimination with partial pivoting and
    /// recomputes the basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let (p, best) = (col..m)
                .map(|i| (i, a[i * m + col].abs()))
                .fold((col, -1.0), |acc, e| if e.1 > acc.1 { e } else { acc });
            if best < 1e-12 {
                return Err(Error::NumericalBreakdown("singular basis".into()));
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i != col {
                    let f = a[i * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[col * m + k];
                            inv[i * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        // `inv` inverts B with columns in basis order, so row r gives basic variable r
        self.binv = inv;
        for r in 0..m {
            self.xb[r] = (0..m).map(|i| self.binv[r * m + i] * self.b[i]).sum();
        }
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis where a structural or
    /// slack column can replace them; the rest sit on redundant rows.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            let j = self.basis[r];
            if self.kind[j] != Kind::Artificial {
                continue;
            }
            self.xb[r] = 0.0;
            let row = &self.binv[r * m..(r + 1) * m];
            let mut best: Option<(usize, f64)> = None;
            for q in 0..self.cols.len() {
                if self.pos[q] != usize::MAX || self.kind[q] == Kind::Artificial {
                    continue;
                }
                let v: f64 = self.cols[q].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, bv)| v.abs() > bv) {
                    best = Some((q, v.abs()));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.column(q);
                self.pivot(r, q, &alpha, 0.0)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Optimal,
    Unbounded,
}
