//! Facet extraction for `{x : u_j·x <= h_j}` by labelled polygon clipping.
//!
//! A clipped polygon is stored as a cyclic list of line labels; vertex `k` is
//! always recomputed as the intersection of lines `k` and `k + 1`, so no
//! interpolation error accumulates across clips. In 3D each facet is the 2D
//! problem obtained by restricting all other halfspaces to the facet plane.

use super::Vec3;
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, Debug)]
struct Line {
    n: [f64; 2],
    c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Label {
    Halfspace(usize),
    Frame(usize),
}

fn intersect(a: &Line, b: &Line) -> [f64; 2] {
    let det = a.n[0] * b.n[1] - a.n[1] * b.n[0];
    [
        (a.c * b.n[1] - b.c * a.n[1]) / det,
        (a.n[0] * b.c - b.n[0] * a.c) / det,
    ]
}

struct Clipper<'a> {
    lines: &'a [Line],
    frame: [Line; 4],
}

impl Clipper<'_> {
    fn line(&self, l: Label) -> &Line {
        match l {
            Label::Halfspace(i) => &self.lines[i],
            Label::Frame(i) => &self.frame[i],
        }
    }

    fn vertices(&self, labels: &[Label]) -> Vec<[f64; 2]> {
        let k = labels.len();
        (0..k)
            .map(|i| intersect(self.line(labels[i]), self.line(labels[(i + 1) % k])))
            .collect()
    }

    /// Clips the polygon by line `idx`. Vertex `i` sits between edges `i` and
    /// `i + 1`; edge `i` runs from vertex `i - 1` to vertex `i`.
    fn clip(&self, labels: Vec<Label>, idx: usize, eps: f64) -> Vec<Label> {
        let line = &self.lines[idx];
        let verts = self.vertices(&labels);
        let inside: Vec<bool> = verts
            .iter()
            .map(|v| line.n[0] * v[0] + line.n[1] * v[1] - line.c <= eps)
            .collect();
        if inside.iter().all(|&b| b) {
            return labels;
        }
        let k = labels.len();
        let mut out = Vec::with_capacity(k + 1);
        for i in 0..k {
            let start = inside[(i + k - 1) % k];
            let end = inside[i];
            match (start, end) {
                (true, true) | (true, false) => out.push(labels[i]),
                (false, true) => {
                    out.push(Label::Halfspace(idx));
                    out.push(labels[i]);
                }
                (false, false) => {}
            }
        }
        if out.len() < 3 {
            Vec::new()
        } else {
            out
        }
    }
}

struct Polygon {
    labels: Vec<Label>,
    verts: Vec<[f64; 2]>,
}

/// Intersection of the halfplanes `lines` inside a square frame of half-width
/// `r`. Edges no longer than `short` are collapsed after every clip: several
/// lines through one vertex otherwise leave a cluster of nearly equal
/// vertices whose inside tests disagree on the next clip.
fn clip_all(lines: &[Line], order: &[usize], r: f64, eps: f64, short: f64) -> Polygon {
    let frame = [
        Line { n: [1.0, 0.0], c: r },
        Line { n: [0.0, 1.0], c: r },
        Line { n: [-1.0, 0.0], c: r },
        Line { n: [0.0, -1.0], c: r },
    ];
    let clipper = Clipper { lines, frame };
    let mut labels: Vec<Label> = (0..4).map(Label::Frame).collect();
    for &i in order {
        labels = collapse(&clipper, clipper.clip(labels, i, eps), short);
        if labels.is_empty() {
            break;
        }
    }
    let verts = if labels.is_empty() { Vec::new() } else { clipper.vertices(&labels) };
    Polygon { labels, verts }
}

/// Drops edges of length `<= short` so consecutive labels are true
/// neighbours; a cycle that would fall below three edges is empty.
fn collapse(clipper: &Clipper, mut labels: Vec<Label>, short: f64) -> Vec<Label> {
    loop {
        if labels.is_empty() {
            return labels;
        }
        let verts = clipper.vertices(&labels);
        let k = labels.len();
        let found = (0..k).find(|&i| {
            let a = verts[(i + k - 1) % k];
            let b = verts[i];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt() <= short
        });
        match found {
            Some(i) if k > 3 => {
                labels.remove(i);
            }
            Some(_) => return Vec::new(),
            None => return labels,
        }
    }
}

fn shoelace(verts: &[[f64; 2]]) -> f64 {
    let k = verts.len();
    let mut s = 0.0;
    for i in 0..k {
        let a = verts[i];
        let b = verts[(i + 1) % k];
        s += a[0] * b[1] - a[1] * b[0];
    }
    s / 2.0
}

/// Geometry of one halfspace's facet. Inactive halfspaces have zero area and
/// no vertices.
#[derive(Clone, Debug, Default)]
pub(crate) struct FacetGeometry {
    /// (n−1)-measure of the facet.
    pub area: f64,
    /// Facet vertices; counter-clockwise seen from outside in 3D, the two
    /// endpoints in counter-clockwise order in 2D.
    pub vertices: Vec<Vec3>,
    /// Adjacent halfspaces with the (n−2)-measure of the shared ridge
    /// (edge length in 3D, 1 in 2D).
    pub neighbors: Vec<(usize, f64)>,
}

const GROWTH: f64 = 64.0;
const MAX_GROWTH_STEPS: usize = 8;

/// Facets of `{x : u_j·x <= h_j}` for all `j`. All `h_j` must be positive and
/// the normals must not lie in a closed hemisphere.
pub(crate) fn facet_geometry(dim: usize, normals: &[Vec3], offsets: &[f64]) -> Result<Vec<FacetGeometry>> {
    let scale = offsets.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-13 * scale;
    let short = 1e-12 * scale;
    let mut r = 16.0 * scale;
    for _ in 0..MAX_GROWTH_STEPS {
        let attempt = match dim {
            2 => planar(normals, offsets, r, eps, short),
            3 => spatial(normals, offsets, r, eps, short),
            d => return Err(Error::UnsupportedDimension(d)),
        };
        if let Some(facets) = attempt {
            return Ok(facets);
        }
        r *= GROWTH;
    }
    Err(Error::UnboundedBody)
}

fn planar(normals: &[Vec3], offsets: &[f64], r: f64, eps: f64, short: f64) -> Option<Vec<FacetGeometry>> {
    let lines: Vec<Line> = normals
        .iter()
        .zip(offsets)
        .map(|(u, &h)| Line { n: [u.x, u.y], c: h })
        .collect();
    let order: Vec<usize> = (0..lines.len()).collect();
    let poly = clip_all(&lines, &order, r, eps, short);
    let mut facets = vec![FacetGeometry::default(); lines.len()];
    let k = poly.labels.len();
    for i in 0..k {
        let j = match poly.labels[i] {
            Label::Halfspace(j) => j,
            Label::Frame(_) => return None,
        };
        let a = poly.verts[(i + k - 1) % k];
        let b = poly.verts[i];
        let prev = poly.labels[(i + k - 1) % k];
        let next = poly.labels[(i + 1) % k];
        let facet = &mut facets[j];
        facet.area = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        facet.vertices = vec![Vec3::new(a[0], a[1], 0.0), Vec3::new(b[0], b[1], 0.0)];
        for l in [prev, next] {
            if let Label::Halfspace(n) = l {
                facet.neighbors.push((n, 1.0));
            }
        }
    }
    Some(facets)
}

fn plane_basis(u: &Vec3) -> (Vec3, Vec3) {
    let helper = if u.x.abs() < 0.6 {
        Vec3::x()
    } else if u.y.abs() < 0.6 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let a = (helper - u * u.dot(&helper)).normalize();
    let b = u.cross(&a);
    (a, b)
}

fn spatial(normals: &[Vec3], offsets: &[f64], r: f64, eps: f64, short: f64) -> Option<Vec<FacetGeometry>> {
    let m = normals.len();
    let results: Vec<Option<FacetGeometry>> = par::map_range(m, |i| {
        let u = normals[i];
        let h = offsets[i];
        let (a, b) = plane_basis(&u);
        let mut lines = Vec::with_capacity(m);
        let mut index = Vec::with_capacity(m);
        for k in 0..m {
            if k == i {
                continue;
            }
            let n = [a.dot(&normals[k]), b.dot(&normals[k])];
            let c = offsets[k] - h * u.dot(&normals[k]);
            if (n[0] * n[0] + n[1] * n[1]).sqrt() < 1e-12 {
                if c < -eps {
                    return Some(FacetGeometry::default());
                }
                continue;
            }
            lines.push(Line { n, c });
            index.push(k);
        }
        // most parallel neighbours first: they shrink the polygon fastest
        let mut order: Vec<usize> = (0..lines.len()).collect();
        order.sort_by(|&x, &y| {
            let cx = u.dot(&normals[index[x]]);
            let cy = u.dot(&normals[index[y]]);
            cy.total_cmp(&cx)
        });
        let poly = clip_all(&lines, &order, r, eps, short);
        if poly.labels.is_empty() {
            return Some(FacetGeometry::default());
        }
        let k = poly.labels.len();
        let mut neighbors = Vec::with_capacity(k);
        for j in 0..k {
            match poly.labels[j] {
                Label::Frame(_) => return None,
                Label::Halfspace(l) => {
                    let p = poly.verts[(j + k - 1) % k];
                    let q = poly.verts[j];
                    let len = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    neighbors.push((index[l], len));
                }
            }
        }
        let center = u * h;
        let vertices = poly
            .verts
            .iter()
            .map(|v| center + a * v[0] + b * v[1])
            .collect();
        Some(FacetGeometry {
            area: shoelace(&poly.verts).max(0.0),
            vertices,
            neighbors,
        })
    });
    results.into_iter().collect()
}
