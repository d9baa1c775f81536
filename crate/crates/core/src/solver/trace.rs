use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Gradient,
    Residual,
    MaxIters,
    /// No step along either search direction decreased the objective.
    Stalled,
}

/// Per-iteration record of a solve. Entry 0 is the starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterations: usize,
    /// Values of the scale-invariant quotient `J`.
    pub objective: Vec<f64>,
    /// Internal per-atom relative residual after the optimal dilation.
    pub residuals: Vec<f64>,
    /// Accepted line-search step; `0` for the starting point.
    pub steps: Vec<f64>,
    /// Residual of the returned polytope, measured from its own facets.
    pub final_residual: f64,
    pub terminated_by: Termination,
}

impl SolverTrace {
    pub(crate) fn start(objective: f64, residual: f64) -> Self {
        SolverTrace {
            iterations: 0,
            objective: vec![objective],
            residuals: vec![residual],
            steps: vec![0.0],
            final_residual: residual,
            terminated_by: Termination::MaxIters,
        }
    }

    pub(crate) fn push(&mut self, objective: f64, residual: f64, step: f64) {
        self.iterations += 1;
        self.objective.push(objective);
        self.residuals.push(residual);
        self.steps.push(step);
    }

    /// Largest relative increase between consecutive objective values.
    pub fn max_relative_increase(&self) -> f64 {
        self.objective
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns `iter,objective,residual,step`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,residual,step\n");
        for (i, ((o, r), s)) in self
            .objective
            .iter()
            .zip(&self.residuals)
            .zip(&self.steps)
            .enumerate()
        {
            let _ = writeln!(out, "{i},{o:e},{r:e},{s:e}");
        }
        out
    }
}
