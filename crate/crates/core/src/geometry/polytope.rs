use std::f64::consts::PI;

use super::{
    facet_geometry, in_closed_hemisphere, Atom, Direction, DiscreteSphereMeasure, LinearMap,
    SupportBody, Vec3,
};
use crate::error::{check_dim, Error, Result};

/// Facets whose measure falls below this fraction of `|K|^{(n-1)/n}` are
/// treated as redundant.
pub const FACET_AREA_THRESHOLD: f64 = 1e-12;

/// One facet: the halfspace with the same index, its (n−1)-measure and its
/// vertex cycle (indices into [`Polytope::vertices`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub area: f64,
    pub cycle: Vec<usize>,
}

/// A convex polytope with the origin in its interior, stored as an
/// irredundant intersection of halfspaces `u_j·x <= h_j` with cached vertices
/// and facets. Equality compares the halfspaces only.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    normals: Vec<Direction>,
    offsets: Vec<f64>,
    vertices: Vec<Vec3>,
    facets: Vec<Facet>,
    volume: f64,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.normals == other.normals && self.offsets == other.offsets
    }
}

impl Polytope {
    /// Removes duplicate and redundant halfspaces and caches the vertex and
    /// facet data.
    pub fn canonicalize(dim: usize, normals: &[Direction], offsets: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if normals.len() != offsets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} normals but {} offsets",
                normals.len(),
                offsets.len()
            )));
        }
        for (index, &offset) in offsets.iter().enumerate() {
            if !(offset > 0.0 && offset.is_finite()) {
                return Err(Error::EmptyInterior { index, offset });
            }
        }
        if dim == 2 && normals.iter().any(|u| u.vec().z != 0.0) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: 3,
            });
        }
        // duplicate normals: keep the tighter halfspace
        let mut us: Vec<Direction> = Vec::with_capacity(normals.len());
        let mut hs: Vec<f64> = Vec::with_capacity(normals.len());
        for (u, &h) in normals.iter().zip(offsets) {
            match us
                .iter()
                .position(|v| (v.vec() - u.vec()).norm() <= super::MERGE_TOLERANCE)
            {
                Some(k) => hs[k] = hs[k].min(h),
                None => {
                    us.push(*u);
                    hs.push(h);
                }
            }
        }
        if in_closed_hemisphere(dim, &us) {
            return Err(Error::UnboundedBody);
        }
        let raw: Vec<Vec3> = us.iter().map(|u| *u.vec()).collect();
        let geometry = facet_geometry(dim, &raw, &hs)?;
        let volume: f64 = geometry
            .iter()
            .zip(&hs)
            .map(|(g, h)| g.area * h)
            .sum::<f64>()
            / dim as f64;
        let threshold = FACET_AREA_THRESHOLD * volume.powf((dim as f64 - 1.0) / dim as f64);
        let keep: Vec<usize> = (0..us.len()).filter(|&j| geometry[j].area > threshold).collect();
        let us: Vec<Direction> = keep.iter().map(|&j| us[j]).collect();
        let hs: Vec<f64> = keep.iter().map(|&j| hs[j]).collect();
        Polytope::assemble(dim, us, hs)
    }

    /// Like [`Polytope::canonicalize`] but accepts non-unit normals, dividing
    /// each offset by the normal's length.
    pub fn from_halfspaces(dim: usize, normals: &[Vec3], offsets: &[f64]) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(Error::InvalidParameter("normals/offsets length mismatch".into()));
        }
        let mut us = Vec::with_capacity(normals.len());
        let mut hs = Vec::with_capacity(normals.len());
        for (n, &c) in normals.iter().zip(offsets) {
            us.push(Direction::new(*n)?);
            hs.push(c / n.norm());
        }
        Polytope::canonicalize(dim, &us, &hs)
    }

    fn assemble(dim: usize, normals: Vec<Direction>, offsets: Vec<f64>) -> Result<Self> {
        let raw: Vec<Vec3> = normals.iter().map(|u| *u.vec()).collect();
        let geometry = facet_geometry(dim, &raw, &offsets)?;
        let scale = offsets.iter().cloned().fold(0.0, f64::max);
        let tol = 1e-9 * scale;
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut facets = Vec::with_capacity(geometry.len());
        for g in &geometry {
            let cycle = g
                .vertices
                .iter()
                .map(|v| match vertices.iter().position(|w| (w - v).norm() <= tol) {
                    Some(k) => k,
                    None => {
                        vertices.push(*v);
                        vertices.len() - 1
                    }
                })
                .collect();
            facets.push(Facet {
                area: g.area,
                cycle,
            });
        }
        let volume = facets
            .iter()
            .zip(&offsets)
            .map(|(f, h)| f.area * h)
            .sum::<f64>()
            / dim as f64;
        Ok(Polytope {
            dim,
            normals,
            offsets,
            vertices,
            facets,
            volume,
        })
    }

    /// `[-s, s]^n`.
    pub fn cube(dim: usize, s: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut normals = Vec::new();
        for i in 0..dim {
            normals.push(Direction::axis(i));
            normals.push(Direction::axis(i).neg());
        }
        Polytope::canonicalize(dim, &normals, &vec![s; 2 * dim])
    }

    /// Regular `m`-gon circumscribed about the circle of radius `r`, with a
    /// facet normal at angle `phase`.
    pub fn regular_polygon(m: usize, r: f64, phase: f64) -> Result<Self> {
        let normals: Vec<Direction> = (0..m)
            .map(|k| Direction::planar(phase + 2.0 * PI * k as f64 / m as f64))
            .collect();
        Polytope::canonicalize(2, &normals, &vec![r; m])
    }

    /// Polytope circumscribed about the unit ball with the given facet normals.
    pub fn circumscribed(dim: usize, normals: &[Direction]) -> Result<Self> {
        Polytope::canonicalize(dim, normals, &vec![1.0; normals.len()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Direction] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    /// Lebesgue measure, `(1/n) Σ h_j |F_j|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn facet_areas(&self) -> Vec<f64> {
        self.facets.iter().map(|f| f.area).collect()
    }

    /// `h(K, x) = max_v v·x`.
    pub fn support(&self, x: &Vec3) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// `Σ_j |F_j| u_j`, zero for every closed polytope.
    pub fn closure_defect(&self) -> Vec3 {
        self.facets
            .iter()
            .zip(&self.normals)
            .map(|(f, u)| u.vec() * f.area)
            .sum()
    }

    /// Centre of mass.
    pub fn centroid(&self) -> Vec3 {
        let mut acc = Vec3::zeros();
        for facet in &self.facets {
            let pts: Vec<Vec3> = facet.cycle.iter().map(|&k| self.vertices[k]).collect();
            if self.dim == 2 {
                let (a, b) = (pts[0], pts[1]);
                let area = (a.x * b.y - a.y * b.x) / 2.0;
                acc += (a + b) / 3.0 * area;
            } else {
                for i in 1..pts.len().saturating_sub(1) {
                    let (a, b, c) = (pts[0], pts[i], pts[i + 1]);
                    let vol = a.dot(&b.cross(&c)) / 6.0;
                    acc += (a + b + c) / 4.0 * vol;
                }
            }
        }
        acc / self.volume
    }

    /// `K + t`; fails if the origin leaves the interior.
    pub fn translated(&self, t: &Vec3) -> Result<Self> {
        let hs: Vec<f64> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(u, h)| h + u.dot(t))
            .collect();
        Polytope::canonicalize(self.dim, &self.normals, &hs)
    }

    /// `tK` for `t > 0`, exact on the cached data.
    pub fn scaled(&self, t: f64) -> Self {
        assert!(t > 0.0, "dilation factor must be positive");
        let n = self.dim as i32;
        Polytope {
            dim: self.dim,
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|h| h * t).collect(),
            vertices: self.vertices.iter().map(|v| v * t).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    area: f.area * t.powi(n - 1),
                    cycle: f.cycle.clone(),
                })
                .collect(),
            volume: self.volume * t.powi(n),
        }
    }

    /// `{M x : x ∈ K}`: the halfspace `u·x <= h` maps to `(M^{-T} u)·y <= h`.
    pub fn transform(&self, m: &LinearMap) -> Result<Self> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        let det = m.det();
        if det.abs() < 1e-14 {
            return Err(Error::SingularMatrix(det));
        }
        let dual = m.inverse().transpose();
        let mut normals = Vec::with_capacity(self.normals.len());
        let mut offsets = Vec::with_capacity(self.normals.len());
        for (u, h) in self.normals.iter().zip(&self.offsets) {
            let v = dual.apply(u.vec());
            normals.push(Direction::new(v)?);
            offsets.push(h / v.norm());
        }
        Polytope::canonicalize(self.dim, &normals, &offsets)
    }

    /// The polar body `{y : y·x <= 1 ∀x ∈ K} = conv{u_j / h_j}`, built from
    /// the vertices of `K`.
    pub fn polar(&self) -> Result<Self> {
        let normals: Vec<Direction> = self
            .vertices
            .iter()
            .map(|v| Direction::new(*v))
            .collect::<Result<_>>()?;
        let offsets: Vec<f64> = self.vertices.iter().map(|v| 1.0 / v.norm()).collect();
        Polytope::canonicalize(self.dim, &normals, &offsets)
    }

    /// Sup-norm distance of support functions over the union of both facet
    /// normal sets and `probes`.
    pub fn support_distance(&self, other: &Polytope, probes: &[Direction]) -> f64 {
        self.normals
            .iter()
            .chain(other.normals.iter())
            .chain(probes.iter())
            .map(|u| (self.support(u.vec()) - other.support(u.vec())).abs())
            .fold(0.0, f64::max)
    }
}

/// `S_p(K, ·)`: one atom per facet with weight `|F_j| h_j^{1-p}`.
pub fn lp_surface_measure(k: &Polytope, p: f64) -> DiscreteSphereMeasure {
    let atoms = k
        .normals
        .iter()
        .zip(&k.offsets)
        .zip(&k.facets)
        .map(|((u, h), f)| Atom {
            u: *u,
            w: f.area * h.powf(1.0 - p),
        });
    DiscreteSphereMeasure::new(k.dim, atoms).expect("facet data of a canonical polytope")
}

/// `V_p(K, L) = (1/n) Σ_j h(L, u_j)^p S_p(K)_j`.
pub fn lp_mixed_volume(k: &Polytope, l: &SupportBody, p: f64) -> f64 {
    let terms: Vec<f64> = k
        .normals
        .iter()
        .zip(&k.offsets)
        .zip(&k.facets)
        .map(|((u, h), f)| l.eval(u).powf(p) * f.area * h.powf(1.0 - p))
        .collect();
    crate::par::pairwise_sum(&terms) / k.dim as f64
}
