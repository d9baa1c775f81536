//! Piecewise-affine, compactly supported functions on simplicial meshes.
//!
//! A [`PwaFunction`] is affine on each simplex and vanishes outside their
//! union. Its gradient data define the measure
//!
//! ```text
//! S_p(f, ·) = n Σ_i |M_i| |g_i|^p δ_{-g_i/|g_i|}
//! ```
//!
//! whose Minkowski-problem solution is the optimal Sobolev body `⟨f⟩_p`.

mod overlay;
pub(crate) mod simplex;

use std::collections::HashMap;

use nalgebra::{Matrix2, Matrix3, Vector2};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Direction, DiscreteSphereMeasure, LinearMap, Polytope, Vec3};
use crate::par;
use crate::solver::{solve, solve_normalized, SolverConfig, SolverTrace};

pub use overlay::{lattice_join, lattice_meet};

/// Gradients below this fraction of the largest one are treated as zero.
const ZERO_GRADIENT: f64 = 1e-12;

/// Affine data of one simplex: `f(x) = grad·x + offset` on `M_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub grad: Vec3,
    pub offset: f64,
    pub measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PwaFunction {
    dim: usize,
    vertices: Vec<Vec3>,
    simplices: Vec<Vec<usize>>,
    values: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PwaFunction {
    /// Validates the mesh, orients every simplex positively and checks that
    /// `f` vanishes on the boundary of its support.
    pub fn new(dim: usize, vertices: Vec<Vec3>, mut simplices: Vec<Vec<usize>>, values: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if values.len() != vertices.len() {
            return Err(Error::InvalidMesh(format!(
                "{} values for {} vertices",
                values.len(),
                vertices.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("value at vertex {k} is not finite")));
        }
        if let Some(k) = vertices
            .iter()
            .position(|v| !v.iter().all(|x| x.is_finite()) || (dim == 2 && v.z != 0.0))
        {
            return Err(Error::InvalidMesh(format!("vertex {k} is not a finite {dim}-vector")));
        }
        if simplices.is_empty() {
            return Err(Error::InvalidMesh("mesh has no simplices".into()));
        }
        let extent = vertices
            .iter()
            .flat_map(|v| v.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for (i, s) in simplices.iter_mut().enumerate() {
            if s.len() != dim + 1 || s.iter().any(|&k| k >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("simplex {i} has invalid vertex indices")));
            }
            let pts: Vec<Vec3> = s.iter().map(|&k| vertices[k]).collect();
            let vol = simplex::signed_volume(dim, &pts);
            if vol.abs() <= 1e-14 * extent.powi(dim as i32) {
                return Err(Error::InvalidMesh(format!("simplex {i} is degenerate")));
            }
            if vol < 0.0 {
                s.swap(0, 1);
            }
        }
        let f = PwaFunction::assemble(dim, vertices, simplices, values)?;
        f.check_boundary()?;
        f.check_nontrivial()?;
        Ok(f)
    }

    /// Builds from positively oriented simplices without the boundary audit.
    fn assemble(dim: usize, vertices: Vec<Vec3>, simplices: Vec<Vec<usize>>, values: Vec<f64>) -> Result<Self> {
        let pieces = simplices
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let pts: Vec<Vec3> = s.iter().map(|&k| vertices[k]).collect();
                let vals: Vec<f64> = s.iter().map(|&k| values[k]).collect();
                affine_piece(dim, &pts, &vals)
                    .ok_or_else(|| Error::InvalidMesh(format!("simplex {i} is degenerate")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PwaFunction {
            dim,
            vertices,
            simplices,
            values,
            pieces,
        })
    }

    /// Internal constructor for meshes built by exact constructions, with
    /// the affine data supplied rather than re-derived from vertex values.
    pub(crate) fn from_pieces(dim: usize, vertices: Vec<Vec3>, simplices: Vec<Vec<usize>>, values: Vec<f64>, grads: Vec<(Vec3, f64)>) -> Self {
        let pieces = simplices
            .iter()
            .zip(grads)
            .map(|(s, (grad, offset))| {
                let pts: Vec<Vec3> = s.iter().map(|&k| vertices[k]).collect();
                Piece {
                    grad,
                    offset,
                    measure: simplex::signed_volume(dim, &pts).abs(),
                }
            })
            .collect();
        PwaFunction {
            dim,
            vertices,
            simplices,
            values,
            pieces,
        }
    }

    fn check_nontrivial(&self) -> Result<()> {
        if self.max_gradient() == 0.0 {
            return Err(Error::TrivialFunction);
        }
        Ok(())
    }

    /// Every face of exactly one simplex that is not covered from the other
    /// side by another simplex lies on the boundary of the support and must
    /// carry zero values. Faces shared by more than two simplices are
    /// rejected.
    fn check_boundary(&self) -> Result<()> {
        let dim = self.dim;
        let mut faces: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (i, s) in self.simplices.iter().enumerate() {
            for skip in 0..=dim {
                let mut face: Vec<usize> = s.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &v)| v).collect();
                face.sort_unstable();
                let e = faces.entry(face).or_insert((0, i));
                e.0 += 1;
            }
        }
        let vmax = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let locator = Locator::new(self);
        let mut once: Vec<(&Vec<usize>, usize)> = Vec::new();
        for (face, &(count, owner)) in &faces {
            if count > 2 {
                return Err(Error::InvalidMesh(format!("face {face:?} is shared by {count} simplices")));
            }
            if count == 1 {
                once.push((face, owner));
            }
        }
        once.sort();
        for (face, owner) in once {
            if face.iter().all(|&k| self.values[k].abs() <= 1e-12 * vmax) {
                continue;
            }
            let pts: Vec<Vec3> = face.iter().map(|&k| self.vertices[k]).collect();
            let opposite = self.simplices[owner]
                .iter()
                .find(|k| !face.contains(k))
                .map(|&k| self.vertices[k])
                .expect("simplex has a vertex off the face");
            let centre = pts.iter().sum::<Vec3>() / pts.len() as f64;
            let normal = if dim == 2 {
                let e = pts[1] - pts[0];
                Vec3::new(e.y, -e.x, 0.0)
            } else {
                (pts[1] - pts[0]).cross(&(pts[2] - pts[0]))
            };
            let normal = if normal.dot(&(opposite - centre)) > 0.0 { -normal } else { normal };
            let size = pts.iter().map(|p| (p - centre).norm()).fold(0.0, f64::max);
            let probe = centre + normal.normalize() * (1e-7 * size);
            if !locator.covered(&probe, owner) {
                let k = *face
                    .iter()
                    .find(|&&k| self.values[k].abs() > 1e-12 * vmax)
                    .expect("some value is nonzero");
                return Err(Error::InvalidMesh(format!(
                    "boundary vertex {k} has nonzero value {}",
                    self.values[k]
                )));
            }
        }
        Ok(())
    }

    /// Replaces the derived affine data by `grads` (gradient, offset) when
    /// they agree with it to `1e-9` relative; used to reload exact
    /// constructions bit for bit.
    pub(crate) fn with_exact_pieces(mut self, grads: &[(Vec3, f64)]) -> Result<Self> {
        if grads.len() != self.pieces.len() {
            return Err(Error::InvalidMesh(format!(
                "{} gradients for {} simplices",
                grads.len(),
                self.pieces.len()
            )));
        }
        let scale = self.pieces.iter().map(|p| p.grad.norm()).fold(0.0, f64::max);
        let reach = self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (i, (pc, (g, c))) in self.pieces.iter().zip(grads).enumerate() {
            if (pc.grad - g).norm() > 1e-9 * scale || (pc.offset - c).abs() > 1e-9 * scale * (1.0 + reach) {
                return Err(Error::InvalidMesh(format!("gradient of simplex {i} contradicts the vertex values")));
            }
        }
        for (pc, (g, c)) in self.pieces.iter_mut().zip(grads) {
            pc.grad = *g;
            pc.offset = *c;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub(crate) fn simplex_points(&self, i: usize) -> Vec<Vec3> {
        self.simplices[i].iter().map(|&k| self.vertices[k]).collect()
    }

    pub(crate) fn simplex_values(&self, i: usize) -> Vec<f64> {
        self.simplices[i].iter().map(|&k| self.values[k]).collect()
    }

    fn max_gradient(&self) -> f64 {
        self.pieces.iter().map(|p| p.grad.norm()).fold(0.0, f64::max)
    }

    /// Pieces whose gradient is nonzero (relative to the largest gradient).
    fn active_pieces(&self) -> impl Iterator<Item = &Piece> {
        let cutoff = ZERO_GRADIENT * self.max_gradient();
        self.pieces.iter().filter(move |p| p.grad.norm() > cutoff)
    }

    /// Evaluates `f` (zero outside the mesh).
    pub fn eval(&self, x: &Vec3) -> f64 {
        Locator::new(self)
            .find(x, usize::MAX)
            .map(|i| {
                let p = &self.pieces[i];
                p.grad.dot(x) + p.offset
            })
            .unwrap_or(0.0)
    }

    /// Largest `|f|`, attained at a vertex.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|sprt f|`: measure of the simplices on which `f` is not identically 0.
    pub fn support_measure(&self) -> f64 {
        par::pairwise_sum(
            &(0..self.simplices.len())
                .filter(|&i| self.simplex_values(i).iter().any(|v| *v != 0.0))
                .map(|i| self.pieces[i].measure)
                .collect::<Vec<_>>(),
        )
    }

    /// `t f`.
    pub fn scaled(&self, t: f64) -> PwaFunction {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= t;
        }
        for p in out.pieces.iter_mut() {
            p.grad *= t;
            p.offset *= t;
        }
        out
    }

    /// `x ↦ f(x - x0)`: the mesh is translated.
    pub fn translated(&self, x0: &Vec3) -> PwaFunction {
        let mut out = self.clone();
        for v in out.vertices.iter_mut() {
            *v += x0;
        }
        for p in out.pieces.iter_mut() {
            p.offset -= p.grad.dot(x0);
        }
        out
    }

    /// `(∫ |∇f|^p)^{1/p}`, exact.
    pub fn gradient_norm(&self, p: f64) -> f64 {
        let terms: Vec<f64> = self.pieces.iter().map(|pc| pc.measure * pc.grad.norm().powf(p)).collect();
        par::pairwise_sum(&terms).powf(1.0 / p)
    }

    /// `∫ |f|^q`, exact up to rounding.
    pub fn abs_power_integral(&self, q: f64) -> f64 {
        let terms = par::map_range(self.simplices.len(), |i| {
            simplex::abs_power_integral(
                self.dim,
                &self.simplex_points(i),
                &self.simplex_values(i),
                self.pieces[i].measure,
                q,
            )
        });
        par::pairwise_sum(&terms)
    }
}

/// Affine interpolant of `vals` on the simplex `pts`.
fn affine_piece(dim: usize, pts: &[Vec3], vals: &[f64]) -> Option<Piece> {
    let grad = if dim == 2 {
        let e = Matrix2::new(
            pts[1].x - pts[0].x,
            pts[1].y - pts[0].y,
            pts[2].x - pts[0].x,
            pts[2].y - pts[0].y,
        );
        let rhs = Vector2::new(vals[1] - vals[0], vals[2] - vals[0]);
        let g = e.lu().solve(&rhs)?;
        Vec3::new(g.x, g.y, 0.0)
    } else {
        let e = Matrix3::from_rows(&[
            (pts[1] - pts[0]).transpose(),
            (pts[2] - pts[0]).transpose(),
            (pts[3] - pts[0]).transpose(),
        ]);
        let rhs = Vec3::new(vals[1] - vals[0], vals[2] - vals[0], vals[3] - vals[0]);
        e.lu().solve(&rhs)?
    };
    Some(Piece {
        grad,
        offset: vals[0] - grad.dot(&pts[0]),
        measure: simplex::signed_volume(dim, pts).abs(),
    })
}

/// Point location by barycentric coordinates with a bounding-box filter.
struct Locator<'a> {
    f: &'a PwaFunction,
    boxes: Vec<(Vec3, Vec3)>,
}

impl<'a> Locator<'a> {
    fn new(f: &'a PwaFunction) -> Self {
        let boxes = (0..f.simplices.len())
            .map(|i| {
                let pts = f.simplex_points(i);
                let lo = pts.iter().fold(Vec3::repeat(f64::INFINITY), |a, p| a.inf(p));
                let hi = pts.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
                (lo, hi)
            })
            .collect();
        Locator { f, boxes }
    }

    fn contains(&self, i: usize, x: &Vec3) -> bool {
        let (lo, hi) = &self.boxes[i];
        let slack = 1e-9 * (hi - lo).norm();
        if (0..3).any(|k| x[k] < lo[k] - slack || x[k] > hi[k] + slack) {
            return false;
        }
        let pts = self.f.simplex_points(i);
        let total = simplex::signed_volume(self.f.dim, &pts);
        (0..=self.f.dim).all(|k| {
            let mut q = pts.clone();
            q[k] = *x;
            simplex::signed_volume(self.f.dim, &q) >= -1e-10 * total.abs()
        })
    }

    fn find(&self, x: &Vec3, skip: usize) -> Option<usize> {
        (0..self.boxes.len()).find(|&i| i != skip && self.contains(i, x))
    }

    fn covered(&self, x: &Vec3, skip: usize) -> bool {
        self.find(x, skip).is_some()
    }
}

/// `S_p(f, ·) = n Σ |M_i| |g_i|^p δ_{-g_i/|g_i|}`; flat pieces are skipped.
pub fn gradient_measure(f: &PwaFunction, p: f64) -> Result<DiscreteSphereMeasure> {
    f.check_nontrivial()?;
    let n = f.dim as f64;
    weighted_gradient_atoms(f, p, n)
}

fn weighted_gradient_atoms(f: &PwaFunction, p: f64, factor: f64) -> Result<DiscreteSphereMeasure> {
    let atoms: Vec<(Direction, f64)> = f
        .active_pieces()
        .map(|pc| {
            let g = pc.grad.norm();
            (Direction::new(-pc.grad).expect("nonzero gradient"), factor * pc.measure * g.powf(p))
        })
        .collect();
    DiscreteSphereMeasure::from_pairs(f.dim, atoms)
}

/// `⟨f⟩_p` for `p ≠ n`: the polytope with `S_p(⟨f⟩_p, ·) = S_p(f, ·)`.
pub fn sobolev_body(f: &PwaFunction, cfg: &SolverConfig) -> Result<(Polytope, SolverTrace)> {
    solve(&gradient_measure(f, cfg.p)?, cfg)
}

/// `⟨f⟩_n`: the polytope with `S_n(⟨f⟩_n, ·) / |⟨f⟩_n| = Σ |M_i| |g_i|^n δ_{-u_i}`.
/// Unlike [`gradient_measure`], the matching measure carries no factor `n`.
pub fn sobolev_body_normalized(f: &PwaFunction, cfg: &SolverConfig) -> Result<(Polytope, SolverTrace)> {
    f.check_nontrivial()?;
    let n = f.dim as f64;
    solve_normalized(&weighted_gradient_atoms(f, n, 1.0)?, cfg)
}

/// The cone function `l_P`: 1 at the origin, 0 on `∂P`, affine on the fan
/// over the facets.
pub fn cone_function(poly: &Polytope) -> PwaFunction {
    let dim = poly.dim();
    let mut vertices = vec![Vec3::zeros()];
    vertices.extend(poly.vertices().iter().copied());
    let mut values = vec![0.0; vertices.len()];
    values[0] = 1.0;
    let mut simplices = Vec::new();
    let mut grads = Vec::new();
    for (facet, (u, h)) in poly.facets().iter().zip(poly.normals().iter().zip(poly.offsets())) {
        let c: Vec<usize> = facet.cycle.iter().map(|k| k + 1).collect();
        let fan: Vec<Vec<usize>> = if dim == 2 {
            vec![vec![0, c[0], c[1]]]
        } else {
            (1..c.len() - 1).map(|i| vec![0, c[0], c[i], c[i + 1]]).collect()
        };
        for mut s in fan {
            let pts: Vec<Vec3> = s.iter().map(|&k| vertices[k]).collect();
            if simplex::signed_volume(dim, &pts) < 0.0 {
                s.swap(1, 2);
            }
            simplices.push(s);
            grads.push((-u.vec() / *h, 1.0));
        }
    }
    PwaFunction::from_pieces(dim, vertices, simplices, values, grads)
}

/// `f ∘ φ^{-1}`: vertices are mapped by `φ`, values carried along.
pub fn compose_linear(f: &PwaFunction, phi: &LinearMap) -> Result<PwaFunction> {
    if phi.dim() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            found: phi.dim(),
        });
    }
    let det = phi.det();
    if det.abs() < 1e-14 {
        return Err(Error::SingularMatrix(det));
    }
    let vertices: Vec<Vec3> = f.vertices.iter().map(|v| phi.apply(v)).collect();
    let mut simplices = f.simplices.clone();
    if det < 0.0 {
        for s in simplices.iter_mut() {
            s.swap(0, 1);
        }
    }
    // ∇(f∘φ^{-1}) = φ^{-T} ∇f
    let inv_t = phi.inverse().transpose();
    let grads = f.pieces.iter().map(|p| (inv_t.apply(&p.grad), p.offset)).collect();
    Ok(PwaFunction::from_pieces(f.dim, vertices, simplices, f.values.clone(), grads))
}

/// `‖f‖_q = (∫ |f|^q)^{1/q}`.
pub fn lp_star_norm(f: &PwaFunction, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent {q} must be at least 1")));
    }
    Ok(f.abs_power_integral(q).powf(1.0 / q))
}

/// `∫ ((1-λ)(D_v f)_+^p + λ(D_v f)_-^p) dx`, exact since `D_v f` is constant
/// on each simplex.
pub fn directional_energy(f: &PwaFunction, v: &Direction, lambda: f64, p: f64) -> f64 {
    let terms: Vec<f64> = f
        .pieces
        .iter()
        .map(|pc| {
            let d = v.dot(&pc.grad);
            let w = if d > 0.0 {
                (1.0 - lambda) * d.powf(p)
            } else {
                lambda * (-d).powf(p)
            };
            pc.measure * w
        })
        .collect();
    par::pairwise_sum(&terms)
}
