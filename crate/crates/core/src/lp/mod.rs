//! Linear programs in the form `max c.x` subject to sparse rows and `x >= 0`,
//! a bundled dense simplex solver, and CPLEX LP text export.

mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use simplex::DenseSimplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Sparse `(variable, coefficient)` entries.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective . x` subject to `rows`, with every variable `>= 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub var_names: Vec<String>,
    pub objective: Vec<f64>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(var_names: Vec<String>, objective: Vec<f64>) -> Self {
        assert_eq!(var_names.len(), objective.len());
        Self {
            var_names,
            objective,
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Constraint {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }

    /// Largest violation of any row or sign constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match r.sense {
                Sense::Le => lhs - r.rhs,
                Sense::Ge => r.rhs - lhs,
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::from("Maximize\n obj:");
        let obj: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        write_terms(&mut s, &obj, &self.var_names);
        s.push_str("\nSubject To\n");
        for r in &self.rows {
            let _ = write!(s, " {}:", r.name);
            write_terms(&mut s, &r.coeffs, &self.var_names);
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            let _ = writeln!(s, " {op} {}", r.rhs);
        }
        s.push_str("End\n");
        s
    }
}

fn write_terms(s: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        s.push_str(" 0 ");
        s.push_str(names.first().map(String::as_str).unwrap_or("x0"));
        return;
    }
    for (pos, &(j, a)) in terms.iter().enumerate() {
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        if pos == 0 && a >= 0.0 {
            s.push(' ');
        } else {
            let _ = write!(s, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(s, "{mag} ");
        }
        s.push_str(&names[j]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal values (meaningful when optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals for the maximization (meaningful when optimal).
    pub duals: Vec<f64>,
    /// A row that could not be satisfied, when infeasible.
    pub infeasible_row: Option<usize>,
    pub iterations: usize,
}

/// Anything that can solve a [`LinearProgram`].
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> Result<LpOutcome>;
}
