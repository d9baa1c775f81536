//! Exact polytope kernel for dimensions 2 and 3, discrete sphere measures and
//! support-function bodies.
//!
//! Vectors are stored as [`Vec3`] in both dimensions; planar objects live in
//! the `z = 0` plane.

mod clip;
mod hemisphere;
mod icosphere;
mod measure;
mod polytope;
mod support;

pub use hemisphere::in_closed_hemisphere;
pub use icosphere::icosphere;
pub use measure::{Atom, DiscreteSphereMeasure, MERGE_TOLERANCE};
pub use polytope::{lp_mixed_volume, lp_surface_measure, Facet, Polytope};
pub use support::{lp_combination, BodyDescriptor, SupportBody};

pub(crate) use clip::facet_geometry;

use nalgebra::Matrix3;
use crate::error::{check_dim, Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Tolerance on `|u| = 1` for directions.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector of S^{n-1}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(Vec3);

impl Direction {
    /// Normalises `v`; fails on zero or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cannot normalise vector {:?}",
                v.as_slice()
            )));
        }
        Ok(Direction(v / norm))
    }

    /// Wraps a vector already of unit length.
    pub(crate) fn unit_unchecked(v: Vec3) -> Self {
        Direction(v)
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        check_dim(coords.len())?;
        let z = if coords.len() == 3 { coords[2] } else { 0.0 };
        Direction::new(Vec3::new(coords[0], coords[1], z))
    }

    /// Unit vector at angle `theta` in the plane.
    pub fn planar(theta: f64) -> Self {
        Direction(Vec3::new(theta.cos(), theta.sin(), 0.0))
    }

    pub fn axis(i: usize) -> Self {
        let mut v = Vec3::zeros();
        v[i] = 1.0;
        Direction(v)
    }

    #[inline]
    pub fn vec(&self) -> &Vec3 {
        &self.0
    }

    #[inline]
    pub fn dot(&self, v: &Vec3) -> f64 {
        self.0.dot(v)
    }

    pub fn neg(&self) -> Self {
        Direction(-self.0)
    }

    /// Great-circle distance.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        2.0 * ((self.0 - other.0).norm() / 2.0).min(1.0).asin()
    }

    pub fn coords(&self, dim: usize) -> Vec<f64> {
        self.0.as_slice()[..dim].to_vec()
    }
}

/// Embeds an n-vector (n = 2 or 3) into [`Vec3`].
pub fn embed(coords: &[f64]) -> Result<Vec3> {
    check_dim(coords.len())?;
    Ok(Vec3::new(
        coords[0],
        coords[1],
        if coords.len() == 3 { coords[2] } else { 0.0 },
    ))
}

/// An invertible linear map of R^n, n ∈ {2, 3}.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    dim: usize,
    matrix: Matrix3<f64>,
}

impl LinearMap {
    pub fn new(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        check_dim(dim)?;
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "expected a {dim}x{dim} matrix"
            )));
        }
        let mut matrix = Matrix3::identity();
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                matrix[(i, j)] = x;
            }
        }
        let map = LinearMap { dim, matrix };
        let det = map.det();
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::SingularMatrix(det));
        }
        Ok(map)
    }

    pub fn identity(dim: usize) -> Self {
        LinearMap {
            dim,
            matrix: Matrix3::identity(),
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { values[i] } else { 0.0 }).collect())
            .collect();
        LinearMap::new(dim, &rows)
    }

    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        LinearMap::new(2, &[vec![c, -s], vec![s, c]]).expect("rotation is invertible")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.matrix * x
    }

    pub fn inverse(&self) -> LinearMap {
        LinearMap {
            dim: self.dim,
            matrix: self.matrix.try_inverse().expect("checked invertible"),
        }
    }

    pub fn transpose(&self) -> LinearMap {
        LinearMap {
            dim: self.dim,
            matrix: self.matrix.transpose(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.matrix[(i, j)]).collect())
            .collect()
    }
}
