//! Optimal Sobolev bodies of piecewise-affine functions and the affine
//! inequalities built on them.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: exact convex polytopes in dimensions 2 and 3 (H/V
//!   representation, volume, facet areas, L_p surface-area measures, L_p
//!   mixed volumes, linear images) plus support-function bodies.
//! - [`solver`]: the discrete L_p Minkowski problem and its volume-normalised
//!   `p = n` variant, and L_p Blaschke sums.
//! - [`pwa`]: piecewise-affine functions on simplicial meshes, their gradient
//!   measures, optimal Sobolev bodies, cone functions and lattice operations.
//! - [`sphere`]: spherical quadrature, asymmetric L_p cosine transforms,
//!   general projection bodies, polar volumes and the affine energy.
//! - [`rearrange`]: distribution functions, decreasing rearrangements and
//!   convex symmetrization.
//! - [`harness`]: seeded corpora and batch verification of the inequalities.
//!
//! With the default `parallel` feature the data-parallel inner loops run on
//! rayon; without it the same code paths run sequentially.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod par;
pub mod pwa;
pub mod rearrange;
pub mod solver;
pub mod sphere;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{
    lp_combination, lp_mixed_volume, lp_surface_measure, Direction, DiscreteSphereMeasure,
    LinearMap, Polytope, SupportBody, Vec3,
};
pub use pwa::PwaFunction;
pub use solver::{solve, solve_normalized, SolverConfig, SolverTrace};
pub use sphere::SphericalQuadrature;
