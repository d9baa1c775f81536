//! Seeded generators for the verification corpora.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::geometry::{icosphere, in_closed_hemisphere, Direction, LinearMap, Polytope, Vec3};
use crate::pwa::PwaFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point on S^{n-1}.
pub fn random_direction<R: Rng>(rng: &mut R, dim: usize) -> Direction {
    loop {
        let mut v = Vec3::zeros();
        for i in 0..dim {
            v[i] = rng.gen_range(-1.0..1.0);
        }
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return Direction::new(v).expect("nonzero");
        }
    }
}

/// Polar of the convex hull of `m ∈ [5, 12]` uniform sphere points, i.e.
/// `{x : x·y_i <= 1}`, translated so its centroid is the origin.
pub fn random_polytope<R: Rng>(rng: &mut R, dim: usize) -> Result<Polytope> {
    loop {
        let m = rng.gen_range(5..=12);
        let dirs: Vec<Direction> = (0..m).map(|_| random_direction(rng, dim)).collect();
        if in_closed_hemisphere(dim, &dirs) {
            continue;
        }
        let raw = Polytope::canonicalize(dim, &dirs, &vec![1.0; m])?;
        let centered = raw.translated(&-raw.centroid())?;
        // reject slivers that would make tolerances meaningless
        let v = centered.volume();
        let d = centered.diameter();
        if v < 1e-2 * d.powi(dim as i32) {
            continue;
        }
        return Ok(centered);
    }
}

/// Uniform random matrix of determinant 1 with moderate condition number.
pub fn random_sl<R: Rng>(rng: &mut R, dim: usize) -> LinearMap {
    loop {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let Ok(m) = LinearMap::new(dim, &rows) else {
            continue;
        };
        let det = m.det();
        if det.abs() < 0.2 {
            continue;
        }
        let s = det.abs().powf(-1.0 / dim as f64);
        let mut rows = m.rows();
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        if det < 0.0 {
            rows.swap(0, 1);
        }
        let m = LinearMap::new(dim, &rows).expect("nonsingular");
        // in 2D the padded third singular value is 1, which lies in [lo, hi]
        let sv = m.matrix().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if cond < 6.0 {
            return m;
        }
    }
}

/// Deterministic, roughly uniform probe directions (Fibonacci lattice in 3D).
pub fn probe_directions(dim: usize, count: usize) -> Vec<Direction> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            if dim == 2 {
                Direction::planar(2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64)
            } else {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                Direction::new(Vec3::new(r * phi.cos(), r * phi.sin(), z)).expect("unit")
            }
        })
        .collect()
}

/// Random nonnegative function on a jittered Kuhn triangulation of the cube
/// `centre + [-half, half]^n` with `k` cells per side; zero on the boundary.
pub fn random_pwa<R: Rng>(rng: &mut R, dim: usize, k: usize, centre: Vec3, half: f64) -> Result<PwaFunction> {
    let side = k + 1;
    let h = 2.0 * half / k as f64;
    let jitter = if dim == 2 { 0.1 } else { 0.04 } * h;
    let count = side.pow(dim as u32);
    let index = |c: &[usize]| c.iter().rev().fold(0, |acc, &x| acc * side + x);
    let mut vertices = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for id in 0..count {
        let mut c = vec![0; dim];
        let mut r = id;
        for x in c.iter_mut() {
            *x = r % side;
            r /= side;
        }
        let interior = c.iter().all(|&x| x > 0 && x < k);
        let mut p = centre;
        for (a, &x) in c.iter().enumerate() {
            p[a] += -half + x as f64 * h;
            if interior {
                p[a] += rng.gen_range(-jitter..jitter);
            }
        }
        vertices.push(p);
        values.push(if interior { rng.gen_range(0.0..1.0) } else { 0.0 });
    }
    let mut simplices = Vec::new();
    let cells = k.pow(dim as u32);
    for id in 0..cells {
        let mut c = vec![0; dim];
        let mut r = id;
        for x in c.iter_mut() {
            *x = r % k;
            r /= k;
        }
        // Kuhn: one simplex per axis permutation, walking corner to corner
        let perms: Vec<Vec<usize>> = if dim == 2 {
            vec![vec![0, 1], vec![1, 0]]
        } else {
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ]
        };
        for perm in perms {
            let mut cur = c.clone();
            let mut s = vec![index(&cur)];
            for &a in &perm {
                cur[a] += 1;
                s.push(index(&cur));
            }
            simplices.push(s);
        }
    }
    if values.iter().all(|v| *v == 0.0) {
        // a single interior vertex always exists for k >= 2
        return Err(Error::InvalidParameter("need at least 2 cells per side".into()));
    }
    PwaFunction::new(dim, vertices, simplices, values)
}

/// Piecewise-affine radial function: `values[k]` on the sphere of radius
/// `radii[k]` (approximated by a regular `m`-gon in 2D or an icosphere of the
/// given `level` in 3D), linear in between; `radii[0] = 0` and the last value
/// must be 0.
pub fn radial_pwa(dim: usize, radii: &[f64], values: &[f64], resolution: usize) -> Result<PwaFunction> {
    if radii.len() != values.len() || radii.len() < 2 || radii[0] != 0.0 || *values.last().unwrap() != 0.0 {
        return Err(Error::InvalidParameter("radial profile needs r_0 = 0 and a zero last value".into()));
    }
    let (dirs, tris): (Vec<Vec3>, Vec<Vec<usize>>) = if dim == 2 {
        let m = resolution;
        (
            (0..m).map(|i| *Direction::planar(2.0 * std::f64::consts::PI * i as f64 / m as f64).vec()).collect(),
            (0..m).map(|i| vec![i, (i + 1) % m]).collect(),
        )
    } else {
        let (v, f) = icosphere(resolution);
        (v, f.iter().map(|t| t.to_vec()).collect())
    };
    shell_pwa(dim, &dirs, &tris, radii, values)
}

/// Piecewise-affine function whose level sets are the dilates `r_k K` of a
/// polytope: `values[k]` on `r_k ∂K`, affine on each simplex of the layered
/// cone over a triangulation of `∂K`.
pub fn shaped_radial_pwa(shape: &Polytope, radii: &[f64], values: &[f64]) -> Result<PwaFunction> {
    if radii.len() != values.len() || radii.len() < 2 || radii[0] != 0.0 || *values.last().unwrap() != 0.0 {
        return Err(Error::InvalidParameter("radial profile needs r_0 = 0 and a zero last value".into()));
    }
    let dim = shape.dim();
    let tris: Vec<Vec<usize>> = shape
        .facets()
        .iter()
        .flat_map(|f| {
            let c = &f.cycle;
            if dim == 2 {
                vec![vec![c[0], c[1]]]
            } else {
                (1..c.len() - 1).map(|i| vec![c[0], c[i], c[i + 1]]).collect()
            }
        })
        .collect();
    shell_pwa(dim, shape.vertices(), &tris, radii, values)
}

fn shell_pwa(dim: usize, dirs: &[Vec3], tris: &[Vec<usize>], radii: &[f64], values: &[f64]) -> Result<PwaFunction> {
    let m = dirs.len();
    let mut vertices = vec![Vec3::zeros()];
    let mut vals = vec![values[0]];
    for (r, v) in radii.iter().zip(values).skip(1) {
        vertices.extend(dirs.iter().map(|d| d * *r));
        vals.extend(std::iter::repeat(*v).take(m));
    }
    let ring = |k: usize, i: usize| if k == 0 { 0 } else { 1 + (k - 1) * m + i };
    let mut simplices = Vec::new();
    for t in tris {
        let mut s = vec![0];
        s.extend(t.iter().map(|&i| ring(1, i)));
        simplices.push(s);
        for k in 1..radii.len() - 1 {
            let mut o = t.clone();
            o.sort_unstable();
            let a = |i: usize| ring(k, o[i]);
            let b = |i: usize| ring(k + 1, o[i]);
            if dim == 2 {
                simplices.push(vec![a(0), a(1), b(1)]);
                simplices.push(vec![a(0), b(1), b(0)]);
            } else {
                simplices.push(vec![a(0), a(1), a(2), b(2)]);
                simplices.push(vec![a(0), a(1), b(1), b(2)]);
                simplices.push(vec![a(0), b(0), b(1), b(2)]);
            }
        }
    }
    PwaFunction::new(dim, vertices, simplices, vals)
}

