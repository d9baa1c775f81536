//! The discrete L_p Minkowski problem.
//!
//! Given atoms `(u_j, α_j)` not contained in a closed hemisphere, the solver
//! minimises the scale-invariant quotient
//!
//! ```text
//! J(h) = Σ_j α_j h_j^p / (n V(h))^{p/n}
//! ```
//!
//! over log-support numbers `s_j = ln h_j`, where `V(h)` is the volume of
//! `{x : u_j·x <= h_j}`. Since `∂V/∂h_j` is the area of facet `j`, a critical
//! point satisfies `α_j ∝ |F_j| h_j^{1-p}`, i.e. `S_p(P, ·) ∝ μ`, and a final
//! dilation fixes the constant (`S_p(tP) = t^{n-p} S_p(P)`).
//!
//! Search directions come from the exact Hessian of `ln J`, assembled from
//! the mixed-area derivatives `∂|F_i|/∂h_j = ℓ_ij / sin θ_ij`, regularised
//! Levenberg-style when indefinite, with a backtracking line search.

mod trace;

pub use trace::{SolverTrace, Termination};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{
    facet_geometry, in_closed_hemisphere, lp_surface_measure, Direction, DiscreteSphereMeasure,
    Polytope, Vec3,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub p: f64,
    pub max_iters: usize,
    /// Stop when the gradient of `ln J`, each component relative to its
    /// atom's share of `Σ α h^p`, falls below this in sup-norm.
    pub grad_tol: f64,
    /// Required per-atom relative residual of the returned polytope. Each
    /// atom also gets a round-off allowance `ROUNDOFF · ε · W / w_j`, where
    /// `w_j / W` is its share of the mass; it only matters below shares of
    /// about `1e-5`.
    pub residual_tol: f64,
    /// Initial step of the backtracking line search (halved on rejection).
    pub step_init: f64,
    /// Starting support numbers; all ones when `None`.
    pub initial: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(p: f64) -> Self {
        SolverConfig {
            p,
            max_iters: 5000,
            grad_tol: 1e-10,
            residual_tol: 1e-8,
            step_init: 1.0,
            initial: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {} must exceed 1", self.p)));
        }
        if !(self.grad_tol > 0.0 && self.residual_tol > 0.0 && self.step_init > 0.0) {
            return Err(Error::InvalidParameter("tolerances and step must be positive".into()));
        }
        Ok(())
    }
}

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MIN_STEP: f64 = 1e-14;
const STALL_ITERS: usize = 200;
/// Facet areas carry an absolute error of a few hundred ulps of the total
/// surface, so an atom of share `s` cannot be matched to better than about
/// `ROUNDOFF · ε / s` in relative terms.
pub const ROUNDOFF: f64 = 1e3;

fn allowance(share: f64) -> f64 {
    ROUNDOFF * f64::EPSILON / share
}

/// True iff the atoms are *not* contained in any closed hemisphere.
pub fn hemisphere_check(mu: &DiscreteSphereMeasure) -> Result<bool> {
    if mu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let dirs: Vec<Direction> = mu.atoms().iter().map(|a| a.u).collect();
    Ok(!in_closed_hemisphere(mu.dim(), &dirs))
}

/// State of `ln J` at one point.
struct Eval {
    s: Vec<f64>,
    h: Vec<f64>,
    log_j: f64,
    /// `α_j h_j^p / Σ α h^p`
    w: Vec<f64>,
    /// `h_j |F_j| / V`
    q: Vec<f64>,
    volume: f64,
    neighbors: Vec<Vec<(usize, f64)>>,
    grad: Vec<f64>,
}

impl Eval {
    fn residual(&self, n: f64) -> f64 {
        self.q
            .iter()
            .zip(&self.w)
            .map(|(q, w)| (q / (n * w) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Every atom within `slack` times the tolerance plus its round-off
    /// allowance.
    fn converged(&self, n: f64, tol: f64, slack: f64) -> bool {
        self.q
            .iter()
            .zip(&self.w)
            .all(|(q, w)| (q / (n * w) - 1.0).abs() <= slack * (tol + allowance(*w)))
    }

    /// Sup of `|∂_j ln J| / w_j`; measuring each component against its own
    /// atom keeps light atoms from stopping the iteration early.
    fn grad_norm(&self) -> f64 {
        self.grad
            .iter()
            .zip(&self.w)
            .fold(0.0, |m, (g, w)| m.max(g.abs() / w))
    }

    fn objective(&self) -> f64 {
        self.log_j.exp()
    }
}

struct Problem<'a> {
    dim: usize,
    dirs: Vec<Vec3>,
    alpha: &'a [f64],
    p: f64,
}

impl Problem<'_> {
    fn eval(&self, s: Vec<f64>) -> Result<Eval> {
        let n = self.dim as f64;
        let h: Vec<f64> = s.iter().map(|x| x.exp()).collect();
        let geom = facet_geometry(self.dim, &self.dirs, &h)?;
        let areas: Vec<f64> = geom.iter().map(|g| g.area).collect();
        let volume = areas.iter().zip(&h).map(|(a, h)| a * h).sum::<f64>() / n;
        // factor out the largest power to avoid overflow
        let lp: Vec<f64> = self
            .alpha
            .iter()
            .zip(&s)
            .map(|(a, s)| a.ln() + self.p * s)
            .collect();
        let top = lp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expo: Vec<f64> = lp.iter().map(|x| (x - top).exp()).collect();
        let sum: f64 = expo.iter().sum();
        let w: Vec<f64> = expo.iter().map(|e| e / sum).collect();
        let q: Vec<f64> = areas.iter().zip(&h).map(|(a, h)| a * h / volume).collect();
        let log_j = top + sum.ln() - self.p / n * (n * volume).ln();
        let grad = w
            .iter()
            .zip(&q)
            .map(|(w, q)| self.p * w - self.p / n * q)
            .collect();
        Ok(Eval {
            s,
            h,
            log_j,
            w,
            q,
            volume,
            neighbors: geom.into_iter().map(|g| g.neighbors).collect(),
            grad,
        })
    }

    fn hessian(&self, e: &Eval) -> DMatrix<f64> {
        let m = e.s.len();
        let n = self.dim as f64;
        let p = self.p;
        // ∂|F_i|/∂h_j
        let mut dar = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            let ui = self.dirs[i];
            for &(j, ridge) in &e.neighbors[i] {
                let uj = self.dirs[j];
                let cos = ui.dot(&uj);
                let sin = ui.cross(&uj).norm();
                if sin < 1e-14 {
                    continue;
                }
                dar[(i, j)] += ridge / sin;
                dar[(i, i)] -= ridge * cos / sin;
            }
        }
        let dar = (&dar + dar.transpose()) * 0.5;
        let mut hess = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let mut v = -p * p * e.w[i] * e.w[j] + p / n * e.q[i] * e.q[j];
                v -= p / n * e.h[i] * e.h[j] * dar[(i, j)] / e.volume;
                if i == j {
                    v += p * p * e.w[i] - p / n * e.q[i];
                }
                hess[(i, j)] = v;
            }
        }
        // ln J is constant along s + c·1; pin that direction
        let pin = 1.0 / m as f64;
        hess.add_scalar_mut(pin);
        hess
    }

    /// Regularised Newton direction, or `None` if no usable factorisation.
    fn direction(&self, e: &Eval) -> Option<Vec<f64>> {
        let m = e.s.len();
        let hess = self.hessian(e);
        let g = DVector::from_column_slice(&e.grad);
        let scale = hess.diagonal().amax().max(1e-300);
        let mut mu = 0.0;
        for _ in 0..30 {
            let mut reg = hess.clone();
            for i in 0..m {
                reg[(i, i)] += mu;
            }
            if let Some(chol) = reg.cholesky() {
                let d = -chol.solve(&g);
                if d.iter().all(|x| x.is_finite()) && d.dot(&g) < 0.0 {
                    return Some(d.iter().copied().collect());
                }
            }
            mu = if mu == 0.0 { 1e-10 * scale } else { mu * 10.0 };
        }
        None
    }
}

/// Core minimisation; returns the support numbers at the optimum (arbitrary
/// scale) and the trace.
fn minimize(dim: usize, mu: &DiscreteSphereMeasure, p: f64, cfg: &SolverConfig) -> Result<(Eval, SolverTrace)> {
    let dirs: Vec<Vec3> = mu.atoms().iter().map(|a| *a.u.vec()).collect();
    let alpha: Vec<f64> = mu.atoms().iter().map(|a| a.w).collect();
    let problem = Problem {
        dim,
        dirs,
        alpha: &alpha,
        p,
    };
    let m = alpha.len();
    let s0: Vec<f64> = match &cfg.initial {
        Some(h) if h.len() == m && h.iter().all(|x| *x > 0.0) => h.iter().map(|x| x.ln()).collect(),
        Some(_) => {
            return Err(Error::InvalidParameter(
                "initial support numbers must be positive, one per atom".into(),
            ))
        }
        None => vec![0.0; m],
    };
    let n = dim as f64;
    let mut cur = problem.eval(s0)?;
    let mut trace = SolverTrace::start(cur.objective(), cur.residual(n));
    let mut terminated_by = Termination::MaxIters;
    let mut best = cur.residual(n);
    let mut since_best = 0;
    for _ in 0..cfg.max_iters {
        if cur.converged(n, cfg.residual_tol, 1e-2) {
            terminated_by = Termination::Residual;
            break;
        }
        if cur.grad_norm() <= cfg.grad_tol {
            terminated_by = Termination::Gradient;
            break;
        }
        let newton = problem.direction(&cur);
        let steepest: Vec<f64> = cur.grad.iter().map(|g| -g).collect();
        let mut accepted = None;
        for d in newton.iter().chain(std::iter::once(&steepest)) {
            // keep any single log-coordinate move moderate
            let dmax = d.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
            let mut t = cfg.step_init.min(2.0 / dmax.max(1e-300));
            let slope: f64 = d.iter().zip(&cur.grad).map(|(a, b)| a * b).sum();
            while t >= MIN_STEP {
                let s: Vec<f64> = cur.s.iter().zip(d).map(|(s, d)| s + t * d).collect();
                if let Ok(next) = problem.eval(s) {
                    let sufficient = next.log_j <= cur.log_j + ARMIJO * t * slope;
                    // below the resolution of ln J, accept on gradient progress
                    let roundoff = (next.log_j - cur.log_j).abs() <= 1e-14 * (1.0 + cur.log_j.abs())
                        && next.grad_norm() < cur.grad_norm();
                    if sufficient || roundoff {
                        accepted = Some((next, t));
                        break;
                    }
                }
                t *= BACKTRACK;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((next, t)) => {
                cur = next;
                trace.push(cur.objective(), cur.residual(n), t);
                // round-off plateau: close to the solution yet no real
                // progress for a long stretch
                if cur.residual(n) < 0.5 * best {
                    best = cur.residual(n);
                    since_best = 0;
                } else if best < 1e-3 {
                    since_best += 1;
                    if since_best >= STALL_ITERS {
                        terminated_by = Termination::Stalled;
                        break;
                    }
                }
            }
            None => {
                terminated_by = Termination::Stalled;
                break;
            }
        }
    }
    trace.terminated_by = terminated_by;
    Ok((cur, trace))
}

fn check_measure(mu: &DiscreteSphereMeasure) -> Result<()> {
    if !hemisphere_check(mu)? {
        return Err(Error::HemisphereViolation);
    }
    Ok(())
}

fn finish(
    mu: &DiscreteSphereMeasure,
    eval: &Eval,
    scale: f64,
    target: impl Fn(&Polytope) -> DiscreteSphereMeasure,
    mut trace: SolverTrace,
    cfg: &SolverConfig,
) -> Result<(Polytope, SolverTrace)> {
    let dirs: Vec<Direction> = mu.atoms().iter().map(|a| a.u).collect();
    let hs: Vec<f64> = eval.h.iter().map(|h| h * scale).collect();
    let poly = Polytope::canonicalize(mu.dim(), &dirs, &hs);
    let total = mu.total_mass();
    let (residual, converged) = match &poly {
        Ok(poly) => {
            let got = target(poly);
            mu.atoms().iter().fold((0.0, true), |(r, ok), a| {
                let e = match got.weight_at(&a.u) {
                    Some(w) => (w - a.w).abs() / a.w,
                    None => 1.0,
                };
                (f64::max(r, e), ok && e <= cfg.residual_tol + allowance(a.w / total))
            })
        }
        Err(_) => (f64::INFINITY, false),
    };
    trace.final_residual = residual;
    if converged {
        Ok((poly?, trace))
    } else {
        Err(Error::NotConverged {
            residual,
            iterations: trace.iterations,
            trace: Box::new(trace),
        })
    }
}

/// The unique `P` with `S_p(P, ·) = μ` for `p > 1`, `p ≠ n`.
pub fn solve(mu: &DiscreteSphereMeasure, cfg: &SolverConfig) -> Result<(Polytope, SolverTrace)> {
    cfg.validate()?;
    let n = mu.dim() as f64;
    if (cfg.p - n).abs() < 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "p = n = {n} requires the volume-normalised problem"
        )));
    }
    check_measure(mu)?;
    let (eval, trace) = minimize(mu.dim(), mu, cfg.p, cfg)?;
    // S_p(P) = μ / c with c = Σ α h^p / (nV); dilate by c^{1/(n-p)}
    let sum: f64 = mu
        .atoms()
        .iter()
        .zip(&eval.h)
        .map(|(a, h)| a.w * h.powf(cfg.p))
        .sum();
    let c = sum / (n * eval.volume);
    let t = c.powf(1.0 / (n - cfg.p));
    let p = cfg.p;
    finish(mu, &eval, t, |poly| lp_surface_measure(poly, p), trace, cfg)
}

/// The unique `P` with `S_n(P, ·) / |P| = μ`.
pub fn solve_normalized(mu: &DiscreteSphereMeasure, cfg: &SolverConfig) -> Result<(Polytope, SolverTrace)> {
    let n = mu.dim() as f64;
    let cfg = SolverConfig { p: n, ..cfg.clone() };
    cfg.validate()?;
    check_measure(mu)?;
    let (eval, trace) = minimize(mu.dim(), mu, n, &cfg)?;
    // S_n is dilation invariant, so S_n(P) = μ / c fixes the shape and
    // |tP| = 1 / c fixes the scale
    let sum: f64 = mu
        .atoms()
        .iter()
        .zip(&eval.h)
        .map(|(a, h)| a.w * h.powf(n))
        .sum();
    let c = sum / (n * eval.volume);
    let t = (c * eval.volume).powf(-1.0 / n);
    finish(
        mu,
        &eval,
        t,
        |poly| lp_surface_measure(poly, n).scaled(1.0 / poly.volume()),
        trace,
        &cfg,
    )
}

/// `K ♯_p L`: the polytope whose `S_p` measure is `S_p(K) + S_p(L)`.
pub fn blaschke_sum(k: &Polytope, l: &Polytope, cfg: &SolverConfig) -> Result<Polytope> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            found: l.dim(),
        });
    }
    let mu = lp_surface_measure(k, cfg.p).add(&lp_surface_measure(l, cfg.p))?;
    solve(&mu, cfg).map(|(poly, _)| poly)
}

#[cfg(test)]
mod tests;
