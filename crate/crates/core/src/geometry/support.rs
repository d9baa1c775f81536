use std::fmt;
use std::sync::Arc;

use super::{Direction, Polytope, Vec3};
use crate::error::{Error, Result};

/// Where a [`SupportBody`] came from.
#[derive(Clone, Debug, PartialEq)]
pub enum BodyDescriptor {
    Polytope,
    Ball { radius: f64 },
    LpCombination { p: f64, alpha: f64, beta: f64 },
    ProjectionBody { p: f64, lambda: f64 },
    NormalizedProjectionBody { lambda: f64 },
    Custom(String),
}

type Evaluator = dyn Fn(&Vec3) -> f64 + Send + Sync;

/// A convex body known through its support function on the unit sphere.
#[derive(Clone)]
pub struct SupportBody {
    dim: usize,
    evaluator: Arc<Evaluator>,
    descriptor: BodyDescriptor,
}

impl fmt::Debug for SupportBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportBody")
            .field("dim", &self.dim)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl SupportBody {
    pub fn new<F>(dim: usize, descriptor: BodyDescriptor, evaluator: F) -> Self
    where
        F: Fn(&Vec3) -> f64 + Send + Sync + 'static,
    {
        SupportBody {
            dim,
            evaluator: Arc::new(evaluator),
            descriptor,
        }
    }

    pub fn from_polytope(k: &Polytope) -> Self {
        let k = k.clone();
        SupportBody::new(k.dim(), BodyDescriptor::Polytope, move |u| k.support(u))
    }

    pub fn ball(dim: usize, radius: f64) -> Self {
        SupportBody::new(dim, BodyDescriptor::Ball { radius }, move |_| radius)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn descriptor(&self) -> &BodyDescriptor {
        &self.descriptor
    }

    #[inline]
    pub fn eval(&self, u: &Direction) -> f64 {
        (self.evaluator)(u.vec())
    }

    /// Evaluates at an arbitrary vector (positively homogeneous of degree 1
    /// only if the evaluator is).
    #[inline]
    pub fn eval_vec(&self, x: &Vec3) -> f64 {
        (self.evaluator)(x)
    }

    /// Evaluates and checks positivity.
    pub fn eval_positive(&self, u: &Direction) -> Result<f64> {
        let value = self.eval(u);
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonpositiveSupport { value })
        }
    }
}

/// `α·K +_p β·L` with `h^p = α h(K)^p + β h(L)^p`.
pub fn lp_combination(alpha: f64, k: &SupportBody, beta: f64, l: &SupportBody, p: f64) -> Result<SupportBody> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter("combination weights must be positive".into()));
    }
    if k.dim != l.dim {
        return Err(Error::DimensionMismatch {
            expected: k.dim,
            found: l.dim,
        });
    }
    let (ek, el) = (k.evaluator.clone(), l.evaluator.clone());
    Ok(SupportBody::new(
        k.dim,
        BodyDescriptor::LpCombination { p, alpha, beta },
        move |u| (alpha * ek(u).powf(p) + beta * el(u).powf(p)).powf(1.0 / p),
    ))
}
