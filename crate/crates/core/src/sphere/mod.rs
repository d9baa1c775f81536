//! Spherical quadrature, asymmetric L_p cosine transforms, general L_p
//! projection bodies, polar volumes and the affine energy.

mod energy;

pub use energy::{affine_energy, ConstantMode, DirectionalEnergy, EnergyValue};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    icosphere, in_closed_hemisphere, lp_surface_measure, BodyDescriptor, Direction, DiscreteSphereMeasure,
    Polytope, SupportBody, Vec3,
};
use crate::par;
use crate::special::sphere_area;

/// Nodes and positive weights approximating `∫_{S^{n-1}} · du`.
#[derive(Clone, Debug)]
pub struct SphericalQuadrature {
    dim: usize,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub dim: usize,
    pub level: usize,
    pub nodes: usize,
}

impl SphericalQuadrature {
    /// 2D: `2^{level+8}` equally spaced nodes with equal weights.
    /// 3D: one node per triangle of the `level`-times subdivided icosahedron
    /// (its normalised centroid), weighted by the spherical triangle area.
    pub fn build(dim: usize, level: usize) -> Result<Self> {
        check_dim(dim)?;
        if dim == 2 {
            if level > 20 {
                return Err(Error::InvalidParameter(format!("quadrature level {level} is too fine")));
            }
            let m = 1usize << (level + 8);
            let w = 2.0 * std::f64::consts::PI / m as f64;
            let nodes = (0..m)
                .map(|k| Direction::planar(2.0 * std::f64::consts::PI * k as f64 / m as f64))
                .collect();
            return Ok(SphericalQuadrature {
                dim,
                nodes,
                weights: vec![w; m],
                level,
            });
        }
        if level > 7 {
            return Err(Error::InvalidParameter(format!("quadrature level {level} is too fine")));
        }
        let (verts, faces) = icosphere(level);
        let (nodes, weights) = faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (verts[a], verts[b], verts[c]);
                let node = Direction::new(a + b + c).expect("nonzero centroid");
                (node, spherical_triangle_area(&a, &b, &c))
            })
            .unzip();
        Ok(SphericalQuadrature {
            dim,
            nodes,
            weights,
            level,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn info(&self) -> QuadratureInfo {
        QuadratureInfo {
            dim: self.dim,
            level: self.level,
            nodes: self.len(),
        }
    }

    /// `Σ w_k F(u_k)` with pairwise summation.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&Direction) -> f64 + Sync + Send,
    {
        let terms = par::map_range(self.len(), |k| self.weights[k] * f(&self.nodes[k]));
        par::pairwise_sum(&terms)
    }

    /// As [`integrate`](Self::integrate) for fallible integrands.
    pub fn try_integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Direction) -> Result<f64> + Sync + Send,
    {
        let terms = par::map_range(self.len(), |k| f(&self.nodes[k]).map(|v| self.weights[k] * v));
        let terms = terms.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(par::pairwise_sum(&terms))
    }

    fn check_body(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::QuadratureMissing {
                quadrature: self.dim,
                body: dim,
            });
        }
        Ok(())
    }
}

/// Area of the spherical triangle with unit vertices `a, b, c`.
fn spherical_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// `(C_p^+ μ)(v) = Σ_j (v·u_j)_+^p w_j`.
pub fn cosine_transform_plus(mu: &DiscreteSphereMeasure, p: f64, v: &Direction) -> f64 {
    cosine_plus(mu, p, v.vec())
}

fn cosine_plus(mu: &DiscreteSphereMeasure, p: f64, x: &Vec3) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| {
            let d = x.dot(a.u.vec());
            if d > 0.0 {
                d.powf(p) * a.w
            } else {
                0.0
            }
        })
        .sum()
}

/// `Φ_{λ,p}` of the body whose `S_p` measure is `μ`:
/// `h(v)^p = (1-λ) C_p^+μ(v) + λ C_p^+μ̂(v)`, with `μ̂` the reflected measure.
pub fn projection_body(mu: &DiscreteSphereMeasure, p: f64, lambda: f64) -> Result<SupportBody> {
    check_lambda(lambda)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    if mu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let dirs: Vec<Direction> = mu.atoms().iter().map(|a| a.u).collect();
    if in_closed_hemisphere(mu.dim(), &dirs) {
        return Err(Error::HemisphereViolation);
    }
    let plus = mu.clone();
    let minus = mu.reflected();
    Ok(SupportBody::new(
        mu.dim(),
        BodyDescriptor::ProjectionBody { p, lambda },
        move |x: &Vec3| ((1.0 - lambda) * cosine_plus(&plus, p, x) + lambda * cosine_plus(&minus, p, x)).powf(1.0 / p),
    ))
}

/// `Φ̃_{λ,n} K`: the `p = n` projection body of `S_n(K, ·) / |K|`.
pub fn normalized_projection_body(k: &Polytope, lambda: f64) -> Result<SupportBody> {
    let n = k.dim() as f64;
    let mu = lp_surface_measure(k, n).scaled(1.0 / k.volume());
    let body = projection_body(&mu, n, lambda)?;
    Ok(SupportBody::new(
        k.dim(),
        BodyDescriptor::NormalizedProjectionBody { lambda },
        move |x: &Vec3| body.eval_vec(x),
    ))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("λ = {lambda} must lie in [0, 1]")));
    }
    Ok(())
}

/// `|B°| = (1/n) ∫_S h(B, u)^{-n} du`.
pub fn polar_volume(body: &SupportBody, q: &SphericalQuadrature) -> Result<f64> {
    q.check_body(body.dim())?;
    let n = body.dim() as i32;
    let integral = q.try_integrate(|u| body.eval_positive(u).map(|h| h.powi(-n)))?;
    Ok(integral / n as f64)
}

/// Polar volume of a polytope by quadrature of its support function.
pub fn polar_volume_polytope(k: &Polytope, q: &SphericalQuadrature) -> Result<f64> {
    polar_volume(&SupportBody::from_polytope(k), q)
}

/// Surface measure of `S^{n-1}` for quick checks of quadrature weights.
pub fn sphere_measure(dim: usize) -> f64 {
    sphere_area(dim)
}
