//! Exact kernels on a single simplex carrying an affine function given by its
//! vertex values.

use nalgebra::{DMatrix, DVector};

use crate::geometry::Vec3;
use crate::special::gauss_legendre_unit;

/// Signed `n`-volume of the simplex `pts[0..=dim]`.
pub(crate) fn signed_volume(dim: usize, pts: &[Vec3]) -> f64 {
    let a = pts[0];
    if dim == 2 {
        let (b, c) = (pts[1] - a, pts[2] - a);
        (b.x * c.y - b.y * c.x) / 2.0
    } else {
        (pts[1] - a).dot(&(pts[2] - a).cross(&(pts[3] - a))) / 6.0
    }
}

fn cut(a: &Vec3, fa: f64, b: &Vec3, fb: f64, t: f64) -> Vec3 {
    a + (b - a) * ((fa - t) / (fa - fb))
}

fn tet_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    ((b - a).dot(&(c - a).cross(&(d - a))) / 6.0).abs()
}

/// `|{x ∈ T : a(x) > t}|` where `a` is affine with values `vals` at the
/// vertices and `vol = |T|`.
pub(crate) fn superlevel_volume(dim: usize, pts: &[Vec3], vals: &[f64], vol: f64, t: f64) -> f64 {
    let above: Vec<usize> = (0..=dim).filter(|&i| vals[i] > t).collect();
    let below: Vec<usize> = (0..=dim).filter(|&i| vals[i] <= t).collect();
    match above.len() {
        0 => 0.0,
        k if k == dim + 1 => vol,
        1 => {
            let i = above[0];
            vol * below
                .iter()
                .map(|&j| (vals[i] - t) / (vals[i] - vals[j]))
                .product::<f64>()
        }
        k if k == dim => {
            let i = below[0];
            vol - vol
                * above
                    .iter()
                    .map(|&j| (t - vals[i]) / (vals[j] - vals[i]))
                    .product::<f64>()
        }
        _ => {
            // tetrahedron, two vertices on each side: the part above is a
            // triangular prism
            let (a, b) = (above[0], above[1]);
            let (c, d) = (below[0], below[1]);
            let p = |x: usize, y: usize| cut(&pts[x], vals[x], &pts[y], vals[y], t);
            let (ac, ad, bc, bd) = (p(a, c), p(a, d), p(b, c), p(b, d));
            prism_tets([pts[a], ac, ad], [pts[b], bc, bd])
                .iter()
                .map(|t| tet_volume(&t[0], &t[1], &t[2], &t[3]))
                .sum()
        }
    }
}

/// Prism with bottom `a` and top `b`, `a[i]` joined to `b[i]`.
fn prism_tets(a: [Vec3; 3], b: [Vec3; 3]) -> [[Vec3; 4]; 3] {
    [
        [a[0], a[1], a[2], b[0]],
        [a[1], a[2], b[0], b[1]],
        [a[2], b[0], b[1], b[2]],
    ]
}

/// Split a simplex by the level `t` of the affine function; returns the
/// simplices of `{a >= t}` and `{a <= t}`. Pieces may be degenerate when
/// a vertex sits exactly on the level.
pub(crate) fn split(dim: usize, pts: &[Vec3], vals: &[f64], t: f64) -> (Vec<Vec<Vec3>>, Vec<Vec<Vec3>>) {
    let above: Vec<usize> = (0..=dim).filter(|&i| vals[i] > t).collect();
    let below: Vec<usize> = (0..=dim).filter(|&i| vals[i] <= t).collect();
    let whole = pts[..=dim].to_vec();
    if above.is_empty() {
        return (vec![], vec![whole]);
    }
    if below.is_empty() {
        return (vec![whole], vec![]);
    }
    let p = |x: usize, y: usize| cut(&pts[x], vals[x], &pts[y], vals[y], t);
    let one_side = |apex: usize, rest: &[usize]| -> (Vec<Vec<Vec3>>, Vec<Vec<Vec3>>) {
        let cuts: Vec<Vec3> = rest.iter().map(|&j| p(apex, j)).collect();
        let mut tip = vec![pts[apex]];
        tip.extend(cuts.iter().copied());
        let base: Vec<Vec<Vec3>> = if dim == 2 {
            // quad cuts[0], rest[0], rest[1], cuts[1]
            vec![
                vec![cuts[0], pts[rest[0]], pts[rest[1]]],
                vec![cuts[0], pts[rest[1]], cuts[1]],
            ]
        } else {
            prism_tets(
                [cuts[0], cuts[1], cuts[2]],
                [pts[rest[0]], pts[rest[1]], pts[rest[2]]],
            )
            .iter()
            .map(|t| t.to_vec())
            .collect()
        };
        (vec![tip], base)
    };
    if above.len() == 1 {
        one_side(above[0], &below)
    } else if below.len() == 1 {
        let (tip, base) = one_side(below[0], &above);
        (base, tip)
    } else {
        let (a, b) = (above[0], above[1]);
        let (c, d) = (below[0], below[1]);
        let (ac, ad, bc, bd) = (p(a, c), p(a, d), p(b, c), p(b, d));
        let up = prism_tets([pts[a], ac, ad], [pts[b], bc, bd]);
        let down = prism_tets([pts[c], ac, bc], [pts[d], ad, bd]);
        (
            up.iter().map(|t| t.to_vec()).collect(),
            down.iter().map(|t| t.to_vec()).collect(),
        )
    }
}

/// `∫_T |a(x)|^q dx`.
///
/// The push-forward of Lebesgue measure on `T` under `a` has a distribution
/// function `V(y) = |{a <= y}|` that is a polynomial of degree `dim` between
/// consecutive vertex values, so the integral reduces to one-dimensional
/// integrals of `|y|^q V'(y)` that are evaluated exactly (near `y = 0`) or by
/// a Gauss rule whose integrand is analytic well beyond the interval.
pub(crate) fn abs_power_integral(dim: usize, pts: &[Vec3], vals: &[f64], vol: f64, q: f64) -> f64 {
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    // snap rounding noise so that no knot interval straddles zero
    let vals: Vec<f64> = vals[..=dim]
        .iter()
        .map(|&v| if v.abs() <= 1e-14 * scale { 0.0 } else { v })
        .collect();
    let vals = &vals[..];
    let mut knots: Vec<f64> = vals.to_vec();
    let lo = knots.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = knots.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo < 0.0 && hi > 0.0 {
        knots.push(0.0);
    }
    knots.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * scale);
    if knots.len() == 1 {
        // constant function
        return vol * scale.powf(q);
    }
    let cdf = |y: f64| vol - superlevel_volume(dim, pts, vals, vol, y);
    knots
        .windows(2)
        .map(|w| interval_integral(w[0], w[1], dim, q, &cdf))
        .sum()
}

/// `∫_c^d |y|^q dV(y)` where `V` is a polynomial of degree `deg` on `[c, d]`
/// and `c, d` have the same sign (or one is zero).
fn interval_integral(c: f64, d: f64, deg: usize, q: f64, cdf: &dyn Fn(f64) -> f64) -> f64 {
    let w = d - c;
    let positive = c >= 0.0;
    let (near, far) = if positive { (c, d) } else { (-d, -c) };
    if near >= 0.25 * w {
        // by parts: the boundary terms use V at the knots, and the remaining
        // integrand |y|^{q-1} V(y) is analytic well beyond [c, d]
        let rule = gauss_legendre_unit(20);
        let inner: f64 = rule
            .iter()
            .map(|&(t, wt)| {
                let y: f64 = c + w * t;
                wt * y.abs().powf(q - 1.0) * cdf(y)
            })
            .sum::<f64>()
            * w;
        let ends = d.abs().powf(q) * cdf(d) - c.abs().powf(q) * cdf(c);
        return if positive { ends - q * inner } else { ends + q * inner };
    }
    // Chebyshev points in (0, 1) and the interpolating polynomial of V(c + w t)
    let m = deg + 1;
    let nodes: Vec<f64> = (0..m)
        .map(|k| 0.5 - 0.5 * ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * m) as f64).cos())
        .collect();
    let vander = DMatrix::from_fn(m, m, |i, j| nodes[i].powi(j as i32));
    let rhs = DVector::from_iterator(m, nodes.iter().map(|&t| cdf(c + w * t)));
    let coef = vander.lu().solve(&rhs).expect("distinct nodes");
    // density in t: P'(t) = Σ_{j>=1} j c_j t^{j-1}
    let dens: Vec<f64> = (1..m).map(|j| j as f64 * coef[j]).collect();
    // exact: with z = |y| ∈ [near, far], t = alpha + beta z
    let (alpha, beta) = if positive { (-c / w, 1.0 / w) } else { (-c / w, -1.0 / w) };
    // density as a polynomial in z, including the Jacobian |dt/dz| = 1/w
    let mut poly = vec![0.0; dens.len()];
    for (j, &a) in dens.iter().enumerate() {
        for k in 0..=j {
            poly[k] += a * binom(j, k) * alpha.powi((j - k) as i32) * beta.powi(k as i32);
        }
    }
    poly.iter()
        .enumerate()
        .map(|(k, &r)| {
            let e = q + k as f64 + 1.0;
            r / w * (far.powf(e) - near.powf(e)) / e
        })
        .sum()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tri() -> Vec<Vec3> {
        vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]
    }

    fn tet() -> Vec<Vec3> {
        vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ]
    }

    /// Monte-Carlo-free oracle: midpoint rule on a fine barycentric grid.
    fn grid_superlevel(dim: usize, vals: &[f64], t: f64) -> f64 {
        let k = 200;
        let mut count = 0usize;
        let mut total = 0usize;
        let h = 1.0 / k as f64;
        for i in 0..k {
            for j in 0..k {
                let zs = if dim == 2 { 1 } else { k };
                for l in 0..zs {
                    let x = (i as f64 + 0.5) * h;
                    let y = (j as f64 + 0.5) * h;
                    let z = if dim == 2 { 0.0 } else { (l as f64 + 0.5) * h };
                    if x + y + z >= 1.0 {
                        continue;
                    }
                    total += 1;
                    let v = vals[0] * (1.0 - x - y - z) + vals[1] * x + vals[2] * y
                        + if dim == 3 { vals[3] * z } else { 0.0 };
                    if v > t {
                        count += 1;
                    }
                }
            }
        }
        count as f64 / total as f64
    }

    #[test]
    fn superlevel_matches_grid() {
        for (vals, t) in [
            (vec![1.0, 0.0, 0.0], 0.3),
            (vec![1.0, 0.8, -0.5], 0.1),
            (vec![0.2, -0.3, 0.9], 0.0),
        ] {
            let got = superlevel_volume(2, &tri(), &vals, 0.5, t) / 0.5;
            assert!((got - grid_superlevel(2, &vals, t)).abs() < 5e-3);
        }
        for (vals, t) in [
            (vec![1.0, 0.0, 0.0, 0.0], 0.3),
            (vec![1.0, 0.8, -0.5, 0.1], 0.3),
            (vec![1.0, 0.2, 0.9, -0.4], 0.5),
        ] {
            let got = superlevel_volume(3, &tet(), &vals, 1.0 / 6.0, t) * 6.0;
            assert!((got - grid_superlevel(3, &vals, t)).abs() < 1e-2);
        }
    }

    #[test]
    fn split_pieces_add_up() {
        let vals = [1.0, 0.8, -0.5, 0.1];
        for t in [-0.2, 0.05, 0.5, 0.95] {
            let (up, down) = split(3, &tet(), &vals, t);
            let vu: f64 = up.iter().map(|s| signed_volume(3, s).abs()).sum();
            let vd: f64 = down.iter().map(|s| signed_volume(3, s).abs()).sum();
            assert_relative_eq!(vu + vd, 1.0 / 6.0, max_relative = 1e-12);
            assert_relative_eq!(vu, superlevel_volume(3, &tet(), &vals, 1.0 / 6.0, t), max_relative = 1e-12);
        }
        let vals = [1.0, -0.5, 0.25];
        let (up, down) = split(2, &tri(), &vals, 0.0);
        let vu: f64 = up.iter().map(|s| signed_volume(2, s).abs()).sum();
        let vd: f64 = down.iter().map(|s| signed_volume(2, s).abs()).sum();
        assert_relative_eq!(vu + vd, 0.5, max_relative = 1e-12);
    }

    /// `∫_T (Σ λ_i v_i)^2 = |T| Σ_{i,j} v_i v_j (1 + δ_ij) / ((n+1)(n+2))`.
    fn quadratic_moment(dim: usize, vals: &[f64], vol: f64) -> f64 {
        let n = dim as f64;
        let mut s = 0.0;
        for i in 0..=dim {
            for j in 0..=dim {
                s += vals[i] * vals[j] * if i == j { 2.0 } else { 1.0 };
            }
        }
        vol * s / ((n + 1.0) * (n + 2.0))
    }

    #[test]
    fn even_moments_are_exact() {
        assert_relative_eq!(abs_power_integral(2, &tri(), &[1.0, 0.0, 0.0], 0.5, 2.0), 1.0 / 12.0, max_relative = 1e-13);
        for vals in [vec![1.0, -0.7, 0.3], vec![0.5, 0.5, 0.5000001], vec![-1.0, 2.0, 2.0]] {
            let got = abs_power_integral(2, &tri(), &vals, 0.5, 2.0);
            assert_relative_eq!(got, quadratic_moment(2, &vals, 0.5), max_relative = 1e-10);
        }
        for vals in [vec![1.0, -0.7, 0.3, 0.2], vec![0.1, 0.9, -0.9, 0.0]] {
            let got = abs_power_integral(3, &tet(), &vals, 1.0 / 6.0, 2.0);
            assert_relative_eq!(got, quadratic_moment(3, &vals, 1.0 / 6.0), max_relative = 1e-10);
        }
    }

    #[test]
    fn linear_moment_is_centroid_rule() {
        let vals = [0.3, 0.9, 0.6];
        let got = abs_power_integral(2, &tri(), &vals, 0.5, 1.0);
        assert_relative_eq!(got, 0.5 * 1.8 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn fractional_power_of_vertex_hat() {
        // ∫_T λ_0^q = |T| n! Γ(q+1) / Γ(q+n+1)
        let q: f64 = 2.7;
        let got = abs_power_integral(2, &tri(), &[1.0, 0.0, 0.0], 0.5, q);
        assert_relative_eq!(got, 0.5 * 2.0 / ((q + 1.0) * (q + 2.0)), max_relative = 1e-12);
        let got = abs_power_integral(3, &tet(), &[0.0, 1.0, 0.0, 0.0], 1.0 / 6.0, q);
        let exact = 1.0 / 6.0 * 6.0 / ((q + 1.0) * (q + 2.0) * (q + 3.0));
        assert_relative_eq!(got, exact, max_relative = 1e-12);
    }
}
