//! Distribution functions, decreasing rearrangements and convex
//! symmetrization.
//!
//! For a profile `f*` on `[0, S]` and a body `K̃` with `|K̃| = ω_n`, the
//! symmetral is `f^K(x) = f*(ω_n ‖x‖_K̃^n)` where `‖·‖_K̃` is the gauge of `K̃`.
//! Everything downstream of a profile (norms, gradient measures, directional
//! energies) is evaluated in closed form on the piecewise-linear profile.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{lp_surface_measure, Direction, DiscreteSphereMeasure, Polytope, Vec3};
use crate::par;
use crate::pwa::{simplex, PwaFunction};
use crate::special::{abs_cosine_moment, gauss_legendre_unit, omega};
use crate::sphere::DirectionalEnergy;

pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 1024;

/// Refinement stops once linear interpolation between neighbouring samples
/// misses the true midpoint by less than this fraction of `max |f|`.
const REFINE_TOL: f64 = 1e-7;
const REFINE_PASSES: usize = 40;

/// Samples of the decreasing rearrangement `f*` on an increasing `s`-grid,
/// linear in between and zero past the last grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidParameter("profile needs at least two matching samples".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidParameter("profile grid must start at s = 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidParameter("profile grid must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("profile values must be finite, nonnegative and non-increasing".into()));
        }
        if *values.last().unwrap() != 0.0 {
            return Err(Error::InvalidParameter("profile must vanish at the end of its support".into()));
        }
        if values[0] == 0.0 {
            return Err(Error::TrivialFunction);
        }
        let slopes = grid
            .windows(2)
            .zip(values.windows(2))
            .map(|(s, v)| (v[1] - v[0]) / (s[1] - s[0]))
            .collect();
        Ok(RadialProfile { grid, values, slopes })
    }

    /// Samples `g` at `grid` (which must start at 0; the last value is forced
    /// to 0).
    pub fn from_fn(grid: Vec<f64>, g: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = grid.iter().map(|&s| g(s)).collect();
        if let Some(last) = values.last_mut() {
            *last = 0.0;
        }
        RadialProfile::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-interval slopes; `slopes()[k]` belongs to `[grid[k], grid[k+1]]`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `|sprt f|`.
    pub fn support_measure(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn sup(&self) -> f64 {
        self.values[0]
    }

    fn interval(&self, s: f64) -> Option<usize> {
        if s < 0.0 || s >= self.support_measure() {
            return None;
        }
        Some(self.grid.partition_point(|&g| g <= s) - 1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.values[0];
        }
        match self.interval(s) {
            Some(k) => self.values[k] + self.slopes[k] * (s - self.grid[k]),
            None => 0.0,
        }
    }

    /// `f*'(s)`, taken from the interval containing `s`.
    pub fn slope_at(&self, s: f64) -> f64 {
        self.interval(s).map_or(0.0, |k| self.slopes[k])
    }

    /// `|{s : f*(s) > t}|`, the distribution function of the profile.
    pub fn level_measure(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.support_measure();
        }
        let k = self.values.partition_point(|&v| v > t);
        if k == 0 {
            return 0.0;
        }
        if k == self.len() {
            return self.support_measure();
        }
        let (v0, s0) = (self.values[k - 1], self.grid[k - 1]);
        s0 + (t - v0) / self.slopes[k - 1]
    }

    /// `∫_0^S f*(s)^q ds`, exact for the piecewise-linear profile.
    pub fn power_integral(&self, q: f64) -> f64 {
        let terms: Vec<f64> = (0..self.len() - 1)
            .map(|k| {
                let (a, b) = (self.values[k], self.values[k + 1]);
                let ds = self.grid[k + 1] - self.grid[k];
                if (a - b).abs() <= 1e-12 * a {
                    ds * a.powf(q)
                } else {
                    ds * (a.powf(q + 1.0) - b.powf(q + 1.0)) / ((q + 1.0) * (a - b))
                }
            })
            .collect();
        par::pairwise_sum(&terms)
    }

    /// `∫_0^S (s/ω_n)^{p(n-1)/n} |f*'(s)|^p ds`, exact for the
    /// piecewise-linear profile.
    pub fn weighted_slope_integral(&self, n: usize, p: f64) -> f64 {
        let w = omega(n as f64);
        let a = p * (n as f64 - 1.0) / n as f64 + 1.0;
        let terms: Vec<f64> = (0..self.len() - 1)
            .map(|k| {
                let (s0, s1) = (self.grid[k] / w, self.grid[k + 1] / w);
                self.slopes[k].abs().powf(p) * w * (s1.powf(a) - s0.powf(a)) / a
            })
            .collect();
        par::pairwise_sum(&terms)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        RadialProfile::new(self.grid.clone(), self.values.iter().map(|v| v * t).collect())
    }

    /// CSV with columns `s,f_star,slope`; the slope is that of the interval
    /// starting at `s` (0 on the last row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,f_star,slope\n");
        for k in 0..self.len() {
            let slope = self.slopes.get(k).copied().unwrap_or(0.0);
            let _ = writeln!(out, "{:?},{:?},{:?}", self.grid[k], self.values[k], slope);
        }
        out
    }
}

/// `μ_f(t) = |{x : |f(x)| > t}|`, exact.
pub fn distribution_function(f: &PwaFunction, t: f64) -> f64 {
    distribution_batch(f, &[t.max(0.0)])[0]
}

/// `μ_f` at every level of the ascending list `ts` in one sweep: a simplex
/// contributes its whole volume to levels below its smallest vertex value,
/// nothing from its largest on, and an exact partial volume in between.
pub fn distribution_batch(f: &PwaFunction, ts: &[f64]) -> Vec<f64> {
    debug_assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    let dim = f.dim();
    let count = f.simplices().len();
    let chunks = 64.min(count.max(1));
    let per = count.div_ceil(chunks);
    let parts = par::map_range(chunks, |c| {
        let mut whole = vec![0.0; ts.len() + 1];
        let mut direct = vec![0.0; ts.len()];
        for i in c * per..((c + 1) * per).min(count) {
            let pts = f.simplex_points(i);
            let vol = f.pieces()[i].measure;
            let vals = f.simplex_values(i);
            let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
            for vs in [vals, neg] {
                let lo = vs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let a = ts.partition_point(|&t| t < lo);
                let b = ts.partition_point(|&t| t < hi);
                whole[0] += vol;
                whole[a] -= vol;
                for k in a..b {
                    direct[k] += simplex::superlevel_volume(dim, &pts, &vs, vol, ts[k]);
                }
            }
        }
        (whole, direct)
    });
    let mut out = vec![0.0; ts.len()];
    let mut run = 0.0;
    for (k, o) in out.iter_mut().enumerate() {
        run += parts.iter().map(|(w, _)| w[k]).sum::<f64>();
        *o = run + parts.iter().map(|(_, d)| d[k]).sum::<f64>();
    }
    out
}

/// `f*(s) = inf{t > 0 : μ_f(t) <= s}` sampled exactly at every critical value
/// of `|f|`, on a uniform `t`-grid with `grid_size` steps, and at points
/// added adaptively until both the `s`-spacing is at most `|sprt f| /
/// grid_size` and linear interpolation is accurate.
pub fn decreasing_rearrangement(f: &PwaFunction, grid_size: usize) -> Result<RadialProfile> {
    if grid_size < MIN_GRID {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} is below {MIN_GRID}")));
    }
    let tmax = f.sup_norm();
    if !(tmax > 0.0) {
        return Err(Error::TrivialFunction);
    }
    let mut ts: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    ts.extend((0..=grid_size).map(|i| tmax * i as f64 / grid_size as f64));
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup();
    let ss = distribution_batch(f, &ts);
    let total = ss[0];
    let max_ds = total / grid_size as f64;
    let max_points = 64 * grid_size + ts.len();
    let mut pts: Vec<(f64, f64)> = ts.into_iter().zip(ss).collect();

    // intervals (t0, s0, t1, s1) still to be checked, ascending in t
    let mut pending: Vec<[f64; 4]> = pts.windows(2).map(|w| [w[0].0, w[0].1, w[1].0, w[1].1]).collect();
    for _ in 0..REFINE_PASSES {
        pending.retain(|iv| iv[2] - iv[0] > 1e-13 * tmax);
        if pending.is_empty() || pts.len() + pending.len() > max_points {
            break;
        }
        let mids: Vec<f64> = pending.iter().map(|iv| 0.5 * (iv[0] + iv[2])).collect();
        let mid_s = distribution_batch(f, &mids);
        let mut next = Vec::new();
        for ((iv, tm), sm) in pending.iter().zip(mids).zip(mid_s) {
            let [t0, s0, t1, s1] = *iv;
            let wide = s0 - s1 > max_ds;
            let lin = if s0 > s1 { t0 + (t1 - t0) * (s0 - sm) / (s0 - s1) } else { tm };
            if wide || (lin - tm).abs() > REFINE_TOL * tmax {
                pts.push((tm, sm));
                next.push([t0, s0, tm, sm]);
                next.push([tm, sm, t1, s1]);
            }
        }
        pending = next;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    // ascending s (descending t), forcing monotonicity against roundoff and
    // keeping the smallest t for a repeated s
    pts.reverse();
    let mut grid: Vec<f64> = Vec::with_capacity(pts.len());
    let mut values: Vec<f64> = Vec::with_capacity(pts.len());
    let mut s_run = 0.0f64;
    for (t, s) in pts {
        s_run = s_run.max(s);
        if grid.last() == Some(&s_run) {
            *values.last_mut().unwrap() = t;
        } else {
            grid.push(s_run);
            values.push(t);
        }
    }
    grid[0] = 0.0;
    *values.last_mut().unwrap() = 0.0;
    RadialProfile::new(grid, values)
}

/// The body whose dilates are the level sets of a symmetral.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ball,
    Polytope(Polytope),
}

/// `K̃`: the dilate of `K` with volume `ω_n`.
pub fn dilate_to_ball_volume(k: &Polytope) -> Polytope {
    let n = k.dim() as f64;
    k.scaled((omega(n) / k.volume()).powf(1.0 / n))
}

/// `x ↦ f*(ω_n ‖x‖^n)` with the gauge of the shape.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialConvexFunction {
    dim: usize,
    shape: Shape,
    profile: RadialProfile,
}

/// The factor of the measure identity `S_p(⟨f^K⟩_p, ·) = ξ S_p(K̃, ·)` and,
/// for `p ≠ n`, its root `ξ^{1/(n-p)}`, the dilation factor of `⟨f^K⟩_p`
/// relative to `K̃`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiFactor {
    pub proof: f64,
    pub statement: Option<f64>,
}

/// `ξ = n (nω_n)^{p-1} ∫ (s/ω_n)^{p(n-1)/n} |f*'(s)|^p ds`, which is the
/// `t`-integral `n (nω_n)^p ∫ t^{np+n-p-1} ((-f*)'(ω_n t^n))^p dt` after
/// `s = ω_n t^n`.
pub fn xi_factor(profile: &RadialProfile, n: usize, p: f64) -> Result<XiFactor> {
    check_dim(n)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let nf = n as f64;
    let integral = profile.weighted_slope_integral(n, p);
    let proof = nf * (nf * omega(nf)).powf(p - 1.0) * integral;
    if !proof.is_finite() {
        return Err(Error::DivergentIntegral {
            tail: f64::INFINITY,
            total: proof,
        });
    }
    let statement = (p != nf).then(|| proof.powf(1.0 / (nf - p)));
    Ok(XiFactor { proof, statement })
}

impl RadialConvexFunction {
    /// A polytope shape must already have volume `ω_n`.
    pub fn new(dim: usize, shape: Shape, profile: RadialProfile) -> Result<Self> {
        check_dim(dim)?;
        if let Shape::Polytope(k) = &shape {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            let w = omega(dim as f64);
            if ((k.volume() - w) / w).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "shape volume {} differs from the unit-ball volume {w}",
                    k.volume()
                )));
            }
        }
        Ok(RadialConvexFunction { dim, shape, profile })
    }

    pub fn symmetric(dim: usize, profile: RadialProfile) -> Result<Self> {
        RadialConvexFunction::new(dim, Shape::Ball, profile)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.shape, Shape::Ball)
    }

    /// Gauge of the shape.
    pub fn gauge(&self, x: &Vec3) -> f64 {
        match &self.shape {
            Shape::Ball => x.norm(),
            Shape::Polytope(k) => k
                .normals()
                .iter()
                .zip(k.offsets())
                .map(|(u, h)| u.dot(x) / h)
                .fold(0.0, f64::max),
        }
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let n = self.dim as f64;
        self.profile.eval(omega(n) * self.gauge(x).powf(n))
    }

    /// `|{f^K > t}|`.
    pub fn distribution(&self, t: f64) -> f64 {
        self.profile.level_measure(t)
    }

    pub fn support_measure(&self) -> f64 {
        self.profile.support_measure()
    }

    pub fn sup_norm(&self) -> f64 {
        self.profile.sup()
    }

    /// `∫ |f^K|^q`.
    pub fn abs_power_integral(&self, q: f64) -> f64 {
        self.profile.power_integral(q)
    }

    pub fn lp_norm(&self, q: f64) -> f64 {
        self.abs_power_integral(q).powf(1.0 / q)
    }

    pub fn xi(&self, p: f64) -> Result<XiFactor> {
        xi_factor(&self.profile, self.dim, p)
    }

    /// `S_p(K̃, ·)` of the shape.
    pub fn shape_measure(&self, p: f64) -> Result<DiscreteSphereMeasure> {
        match &self.shape {
            Shape::Ball => Err(Error::InvalidParameter("the ball has no discrete surface measure".into())),
            Shape::Polytope(k) => Ok(lp_surface_measure(k, p)),
        }
    }

    /// `S_p(f^K, ·) = ξ S_p(K̃, ·)`; polytope shapes only.
    pub fn gradient_measure(&self, p: f64) -> Result<DiscreteSphereMeasure> {
        let xi = self.xi(p)?.proof;
        Ok(self.shape_measure(p)?.scaled(xi))
    }

    /// `‖∇f^K‖_p = ((ξ/n) |S_p(K̃)|)^{1/p}`.
    pub fn gradient_norm(&self, p: f64) -> Result<f64> {
        let n = self.dim as f64;
        let xi = self.xi(p)?.proof;
        let mass = match &self.shape {
            Shape::Ball => n * omega(n),
            Shape::Polytope(k) => lp_surface_measure(k, p).total_mass(),
        };
        Ok((xi / n * mass).powf(1.0 / p))
    }
}

impl DirectionalEnergy for RadialConvexFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    /// On the cone over the facet with normal `u`, `∇f^K` is a negative
    /// multiple of `u`, so `(D_v f)_+` pairs with `(u·v)_-`.
    fn directional_energy(&self, v: &Direction, lambda: f64, p: f64) -> f64 {
        let n = self.dim as f64;
        let Ok(xi) = self.xi(p) else { return f64::NAN };
        match &self.shape {
            Shape::Ball => xi.proof / n * abs_cosine_moment(self.dim, p) / 2.0,
            Shape::Polytope(k) => {
                let mu = lp_surface_measure(k, p);
                let s: f64 = mu
                    .atoms()
                    .iter()
                    .map(|a| {
                        let c = a.u.dot(v.vec());
                        let w = if c < 0.0 {
                            (1.0 - lambda) * (-c).powf(p)
                        } else {
                            lambda * c.powf(p)
                        };
                        a.w * w
                    })
                    .sum();
                xi.proof / n * s
            }
        }
    }
}

/// `S_p(f^K, ·)` by direct integration, independent of the `ξ` closed form:
/// on the cone over the facet `F_j` of `K̃`, `x = ρy` with `y ∈ F_j` and
/// `dx = h_j ρ^{n-1} dρ dA(y)`, and `|∇f^K| = |f*'(ω_n ρ^n)| nω_n ρ^{n-1} / h_j`;
/// the `ρ`-integral is done by Gauss–Legendre between consecutive profile
/// radii.
pub fn gradient_measure_by_rays(g: &RadialConvexFunction, p: f64) -> Result<DiscreteSphereMeasure> {
    let Shape::Polytope(k) = g.shape() else {
        return Err(Error::InvalidParameter("the ball has no discrete surface measure".into()));
    };
    let n = g.dim() as f64;
    let w = omega(n);
    let rule = gauss_legendre_unit(12);
    let rho: Vec<f64> = g.profile().grid().iter().map(|s| (s / w).powf(1.0 / n)).collect();
    let atoms = k.normals().iter().zip(k.offsets()).zip(k.facet_areas()).map(|((u, &h), area)| {
        let terms: Vec<f64> = rho
            .windows(2)
            .zip(g.profile().slopes())
            .map(|(seg, slope)| {
                let len = seg[1] - seg[0];
                rule.iter()
                    .map(|&(x, wt)| {
                        let r = seg[0] + len * x;
                        let grad = slope.abs() * n * w * r.powf(n - 1.0) / h;
                        wt * len * grad.powf(p) * h * area * r.powf(n - 1.0)
                    })
                    .sum::<f64>()
            })
            .collect();
        (*u, n * par::pairwise_sum(&terms))
    });
    DiscreteSphereMeasure::from_pairs(g.dim(), atoms.collect::<Vec<_>>())
}

/// `f^K`: the decreasing rearrangement of `f` paired with `K̃`.
pub fn convex_symmetrization(f: &PwaFunction, k: &Polytope, grid_size: usize) -> Result<RadialConvexFunction> {
    if k.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: k.dim(),
        });
    }
    let profile = decreasing_rearrangement(f, grid_size)?;
    RadialConvexFunction::new(f.dim(), Shape::Polytope(dilate_to_ball_volume(k)), profile)
}

/// `f^⋆(x) = f*(ω_n |x|^n)`.
pub fn symmetric_rearrangement(f: &PwaFunction, grid_size: usize) -> Result<RadialConvexFunction> {
    RadialConvexFunction::symmetric(f.dim(), decreasing_rearrangement(f, grid_size)?)
}

/// `‖∇g‖_p = (nω_n ∫ r^{n-1} |g'(r)|^p dr)^{1/p}` for a ball-shaped symmetral.
pub fn radial_gradient_norm(g: &RadialConvexFunction, p: f64) -> Result<f64> {
    if !g.is_ball() {
        return Err(Error::InvalidParameter("radial gradient norm needs a ball-shaped symmetral".into()));
    }
    g.gradient_norm(p)
}
