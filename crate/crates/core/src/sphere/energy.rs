//! The affine energy
//!
//! ```text
//! Ω_{λ,p}(f) = c_{n,p} (∫_S E_f(v)^{-n/p} dv)^{-1/n},
//! E_f(v) = ∫ ((1-λ)(D_v f)_+^p + λ(D_v f)_-^p) dx.
//! ```

use serde::{Deserialize, Serialize};

use super::{check_lambda, SphericalQuadrature};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::pwa::{self, PwaFunction};
use crate::special::{affine_energy_constant, affine_energy_constant_by_ball_volumes};

/// Functions whose directional energies `E_f(v)` can be evaluated.
pub trait DirectionalEnergy: Sync {
    fn dim(&self) -> usize;

    /// `∫ ((1-λ)(D_v f)_+^p + λ(D_v f)_-^p) dx`.
    fn directional_energy(&self, v: &Direction, lambda: f64, p: f64) -> f64;
}

impl DirectionalEnergy for PwaFunction {
    fn dim(&self) -> usize {
        PwaFunction::dim(self)
    }

    fn directional_energy(&self, v: &Direction, lambda: f64, p: f64) -> f64 {
        pwa::directional_energy(self, v, lambda, p)
    }
}

/// Which normalisation constant multiplies the raw spherical integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// Fixed so that the energy equals `‖∇f‖_p` on radial functions.
    Calibrated,
    /// The closed form through unit-ball volumes,
    /// `(nω_n)^{1/n} (nω_n ω_{p-1} / ω_{n+p-2})^{1/p}`.
    BallVolumes,
    /// No constant: the raw value `(∫_S E^{-n/p})^{-1/n}`.
    Raw,
}

impl ConstantMode {
    pub fn constant(self, n: usize, p: f64) -> f64 {
        match self {
            ConstantMode::Calibrated => affine_energy_constant(n, p),
            ConstantMode::BallVolumes => affine_energy_constant_by_ball_volumes(n, p),
            ConstantMode::Raw => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    /// `(∫_S E^{-n/p})^{-1/n}` before normalisation.
    pub raw: f64,
    pub constant: f64,
    pub mode: ConstantMode,
    pub p: f64,
    pub lambda: f64,
    pub dim: usize,
    pub level: usize,
    pub nodes: usize,
}

/// `Ω_{λ,p}(f)` by quadrature over `v`; the inner integrals are exact.
pub fn affine_energy<F: DirectionalEnergy + ?Sized>(
    f: &F,
    lambda: f64,
    p: f64,
    q: &SphericalQuadrature,
    mode: ConstantMode,
) -> Result<EnergyValue> {
    check_lambda(lambda)?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let dim = f.dim();
    q.check_body(dim)?;
    let n = dim as f64;
    let integral = q.try_integrate(|v| {
        let e = f.directional_energy(v, lambda, p);
        if e > 0.0 && e.is_finite() {
            Ok(e.powf(-n / p))
        } else {
            Err(Error::DegenerateDirection)
        }
    })?;
    let raw = integral.powf(-1.0 / n);
    let constant = mode.constant(dim, p);
    Ok(EnergyValue {
        value: constant * raw,
        raw,
        constant,
        mode,
        p,
        lambda,
        dim,
        level: q.level(),
        nodes: q.len(),
    })
}
