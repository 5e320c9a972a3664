//! Fitness-complexity fixed point on a non-negative country × activity
//! matrix.
//!
//! One step maps `(F, Q)` to
//!
//! ```text
//! F~_c = sum_s M_cs Q_s
//! Q~_s = 1 / sum_c M_cs / F_c
//! ```
//!
//! and rescales both to mean one. Run on a binary RCA matrix this is
//! Economic Fitness; on the value-added share matrix it is VXF.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::math::{max_abs_diff, sum};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 1000;
/// Fitness below this fraction of the mean is floored and flagged.
pub const ZERO_FITNESS_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessResult {
    /// Country fitness, mean one.
    pub fitness: Vec<f64>,
    /// Activity complexity, mean one.
    pub industry_complexity: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute change over both vectors at the last step.
    pub final_delta: f64,
    /// Countries whose fitness hit the zero floor ("fitness ≈ 0").
    pub floored: Vec<usize>,
}

/// Iteration state; exposed so callers can inspect every step.
#[derive(Debug, Clone)]
pub struct FitnessState<'a> {
    adj: &'a DMatrix<f64>,
    fitness: Vec<f64>,
    complexity: Vec<f64>,
    iterations: usize,
    floored: BTreeSet<usize>,
}

fn validate(adj: &DMatrix<f64>) -> Result<()> {
    if adj.nrows() == 0 || adj.ncols() == 0 {
        return Err(Error::DimensionMismatch {
            what: "adjacency matrix",
            expected: "at least 1x1".into(),
            found: alloc::format!("{}x{}", adj.nrows(), adj.ncols()),
        });
    }
    for s in 0..adj.ncols() {
        for c in 0..adj.nrows() {
            let v = adj[(c, s)];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "adjacency matrix",
                    index: c,
                    label: alloc::format!("country {c}, activity {s}"),
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    matrix: "adjacency",
                    row: c,
                    col: s,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

fn normalize(v: &mut [f64]) -> f64 {
    let m = sum(v.iter().copied()) / v.len() as f64;
    for x in v.iter_mut() {
        *x /= m;
    }
    m
}

impl<'a> FitnessState<'a> {
    /// Starts from `F = 1`, `Q = 1`.
    pub fn new(adj: &'a DMatrix<f64>) -> Result<Self> {
        validate(adj)?;
        Ok(Self {
            adj,
            fitness: vec![1.0; adj.nrows()],
            complexity: vec![1.0; adj.ncols()],
            iterations: 0,
            floored: BTreeSet::new(),
        })
    }

    /// Resumes from given normalized values.
    pub fn from_values(adj: &'a DMatrix<f64>, fitness: Vec<f64>, complexity: Vec<f64>) -> Result<Self> {
        validate(adj)?;
        if fitness.len() != adj.nrows() || complexity.len() != adj.ncols() {
            return Err(Error::DimensionMismatch {
                what: "fitness state",
                expected: alloc::format!("{} and {}", adj.nrows(), adj.ncols()),
                found: alloc::format!("{} and {}", fitness.len(), complexity.len()),
            });
        }
        Ok(Self {
            adj,
            fitness,
            complexity,
            iterations: 0,
            floored: BTreeSet::new(),
        })
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn complexity(&self) -> &[f64] {
        &self.complexity
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Applies one step and returns the max-norm changes `(dF, dQ)`.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        let adj = self.adj;
        let (nc, ns) = adj.shape();

        let mut f_new: Vec<f64> = (0..nc)
            .map(|c| sum((0..ns).map(|s| adj[(c, s)] * self.complexity[s])))
            .collect();
        let mut q_new = Vec::with_capacity(ns);
        for s in 0..ns {
            let denom = sum((0..nc).map(|c| adj[(c, s)] / self.fitness[c]));
            let q = 1.0 / denom;
            if !q.is_finite() {
                return Err(Error::NonFinite {
                    what: "activity complexity",
                    index: s,
                    label: alloc::format!("activity {s}"),
                });
            }
            q_new.push(q);
        }

        let f_mean = sum(f_new.iter().copied()) / nc as f64;
        if !(f_mean > 0.0) || !f_mean.is_finite() {
            let c = f_new
                .iter()
                .position(|v| !v.is_finite() || *v <= 0.0)
                .unwrap_or(0);
            return Err(Error::NonFinite {
                what: "country fitness",
                index: c,
                label: alloc::format!("country {c}"),
            });
        }
        let floor = ZERO_FITNESS_FLOOR * f_mean;
        for (c, v) in f_new.iter_mut().enumerate() {
            if *v < floor {
                *v = floor;
                self.floored.insert(c);
            }
        }
        normalize(&mut f_new);
        let q_mean = normalize(&mut q_new);
        if !q_mean.is_finite() || q_mean <= 0.0 {
            return Err(Error::NonFinite {
                what: "activity complexity",
                index: 0,
                label: "mean".into(),
            });
        }

        let df = max_abs_diff(&f_new, &self.fitness);
        let dq = max_abs_diff(&q_new, &self.complexity);
        self.fitness = f_new;
        self.complexity = q_new;
        self.iterations += 1;
        Ok((df, dq))
    }

    fn into_result(self, converged: bool, final_delta: f64) -> FitnessResult {
        FitnessResult {
            fitness: self.fitness,
            industry_complexity: self.complexity,
            iterations: self.iterations,
            converged,
            final_delta,
            floored: self.floored.into_iter().collect(),
        }
    }
}

/// Iterates until both vectors move less than `tol` in max norm on two
/// consecutive steps, or `max_iter` steps have run (then `converged` is
/// false).
///
/// Each step reads only the previous state, so the sequence splits into two
/// interleaved chains (`F` even / `Q` odd and the reverse). One small step
/// only says the chains are momentarily close; two in a row say both have
/// settled. Both chains start from the same point, so the first step alone
/// decides when it is already below `tol`.
pub fn fitness(adj: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<FitnessResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: alloc::format!("must be positive, got {tol}"),
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            reason: "must be at least 1".into(),
        });
    }
    let mut state = FitnessState::new(adj)?;
    let mut delta = f64::INFINITY;
    let mut prev = 0.0;
    while state.iterations < max_iter {
        let (df, dq) = state.step()?;
        delta = df.max(dq);
        if delta < tol && prev < tol {
            return Ok(state.into_result(true, delta));
        }
        prev = delta;
    }
    Ok(state.into_result(false, delta))
}

pub fn fitness_with(adj: &DMatrix<f64>, config: FitnessConfig) -> Result<FitnessResult> {
    fitness(adj, config.tol, config.max_iter)
}
