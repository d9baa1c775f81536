//! Closed-form constants: unit-ball volumes, sphere moments, Gauss rules.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Volume of the Euclidean unit ball in R^n (`n` may be any positive real,
/// as used in the sharp-constant formulas).
pub fn omega(n: f64) -> f64 {
    // exact values for the dimensions used everywhere
    if n == 2.0 {
        return PI;
    }
    if n == 3.0 {
        return 4.0 * PI / 3.0;
    }
    PI.powf(n / 2.0) / gamma(1.0 + n / 2.0)
}

/// Surface measure of S^{n-1}.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * omega(n as f64)
}

/// `∫_{S^{n-1}} |u·e|^p du` for a unit vector `e`.
pub fn abs_cosine_moment(n: usize, p: f64) -> f64 {
    let n = n as f64;
    2.0 * PI.powf((n - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / gamma((n + p) / 2.0)
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(k: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        // Initial guess from the asymptotic root location, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pk = if k == 0 { 1.0 } else if k == 1 { x } else { p1 };
            let pkm1 = if k == 1 { 1.0 } else { p0 };
            dp = k as f64 * (x * pk - pkm1) / (x * x - 1.0);
            let dx = pk / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Sharp constant `C` in `‖f‖_{p*} <= C ‖∇f‖_p`, `1 < p < n`,
/// `p* = np/(n-p)`.
pub fn sobolev_constant(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf.powf(-1.0 / p)
        * ((p - 1.0) / (nf - p)).powf(1.0 - 1.0 / p)
        * (gamma(nf) / (omega(nf) * gamma(nf / p) * gamma(nf + 1.0 - nf / p))).powf(1.0 / nf)
}

/// Sharp constant `C` in `‖f‖_∞ <= C |sprt f|^{(p-n)/(np)} ‖∇f‖_p`, `p > n`.
pub fn morrey_constant(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf.powf(-1.0 / p) * omega(nf).powf(-1.0 / nf) * ((p - 1.0) / (p - nf)).powf((p - 1.0) / p)
}

/// Normalisation `c` of the affine energy
/// `Ω(f) = c (∫_S E_f(v)^{-n/p} dv)^{-1/n}` fixed by requiring
/// `Ω(f) = ‖∇f‖_p` for radially symmetric `f`:
/// `c = (nω_n)^{1/n} (2nω_n / ∫_S |u·e|^p du)^{1/p}`.
pub fn affine_energy_constant(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let area = nf * omega(nf);
    area.powf(1.0 / nf) * (2.0 * area / abs_cosine_moment(n, p)).powf(1.0 / p)
}

/// The same constant written through unit-ball volumes,
/// `(nω_n)^{1/n} (nω_n ω_{p-1} / ω_{n+p-2})^{1/p}`.
pub fn affine_energy_constant_by_ball_volumes(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let area = nf * omega(nf);
    area.powf(1.0 / nf) * (area * omega(p - 1.0) / omega(nf + p - 2.0)).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((omega(2.0) - PI).abs() < 1e-14);
        assert!((omega(3.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn cosine_moments_match_elementary_values() {
        // ∫_{S^1} cos^2 = π, ∫_{S^2} (u·e)^2 = 4π/3, ∫_{S^1} |cos| = 4
        assert!((abs_cosine_moment(2, 2.0) - PI).abs() < 1e-13);
        assert!((abs_cosine_moment(3, 2.0) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((abs_cosine_moment(2, 1.0) - 4.0).abs() < 1e-13);
        assert!((abs_cosine_moment(3, 0.0) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn energy_constants_agree() {
        for n in [2, 3] {
            for p in [1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 7.0] {
                let a = affine_energy_constant(n, p);
                let b = affine_energy_constant_by_ball_volumes(n, p);
                assert!((a - b).abs() < 1e-12 * a, "n {n} p {p}: {a} vs {b}");
            }
        }
        // at p = 2 in the plane: (2π)^{1/2} (4π/π)^{1/2}
        let c = affine_energy_constant(2, 2.0);
        assert!((c - (8.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sobolev_constant_at_p2_n3() {
        // the p = 2 case in its usual form 1/sqrt(π n (n-2)) (Γ(n)/Γ(n/2))^{1/n}
        let n = 3.0;
        let expected = 1.0 / (PI * n * (n - 2.0)).sqrt() * (gamma(n) / gamma(n / 2.0)).powf(1.0 / n);
        assert!((sobolev_constant(3, 2.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let rule = gauss_legendre_unit(6);
        for d in 0..=11 {
            let approx: f64 = rule.iter().map(|(x, w)| w * x.powi(d)).sum();
            assert!((approx - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "degree {d}");
        }
        let total: f64 = gauss_legendre_unit(1).iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
