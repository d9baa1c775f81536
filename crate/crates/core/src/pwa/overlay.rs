//! Pointwise maximum and minimum of two piecewise-affine functions.
//!
//! In the plane the two meshes are overlaid exactly: every cell of the common
//! refinement is a convex polygon (a triangle–triangle intersection or a piece
//! of a triangle outside the other support). Each cell is then split along
//! `{F = G}` and carries the exact affine data of the selected parent, so
//! gradients of the result are bitwise equal to parent gradients. In space
//! only identical meshes and separated supports are handled.

use super::{simplex, PwaFunction};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Affine {
    grad: Vec3,
    offset: f64,
}

impl Affine {
    const ZERO: Affine = Affine {
        grad: Vec3::new(0.0, 0.0, 0.0),
        offset: 0.0,
    };

    fn at(&self, x: &Vec3) -> f64 {
        self.grad.dot(x) + self.offset
    }

    fn is_zero(&self) -> bool {
        self.grad == Vec3::zeros() && self.offset == 0.0
    }
}

/// `f ∨ g`.
pub fn lattice_join(f: &PwaFunction, g: &PwaFunction) -> Result<PwaFunction> {
    combine(f, g, true)
}

/// `f ∧ g`.
pub fn lattice_meet(f: &PwaFunction, g: &PwaFunction) -> Result<PwaFunction> {
    combine(f, g, false)
}

/// A region of the common refinement given as simplices, with both parents'
/// affine data on it.
struct Cell {
    simplices: Vec<Vec<Vec3>>,
    f: Affine,
    g: Affine,
}

fn affine(f: &PwaFunction, i: usize) -> Affine {
    let p = &f.pieces()[i];
    Affine {
        grad: p.grad,
        offset: p.offset,
    }
}

fn combine(f: &PwaFunction, g: &PwaFunction, take_max: bool) -> Result<PwaFunction> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let dim = f.dim();
    let cells = if dim == 2 { overlay_planar(f, g)? } else { overlay_spatial(f, g)? };
    let total: f64 = f.pieces().iter().chain(g.pieces()).map(|p| p.measure).sum();
    let tiny = 1e-14 * total;
    let mut vertices = Vec::new();
    let mut simplices = Vec::new();
    let mut values = Vec::new();
    let mut grads = Vec::new();
    for cell in cells {
        for s in &cell.simplices {
            let diff: Vec<f64> = s.iter().map(|x| cell.f.at(x) - cell.g.at(x)).collect();
            let (up, down) = simplex::split(dim, s, &diff, 0.0);
            let (hi, lo) = if take_max { (cell.f, cell.g) } else { (cell.g, cell.f) };
            for (pieces, chosen) in [(up, hi), (down, lo)] {
                if chosen.is_zero() {
                    continue;
                }
                for mut piece in pieces {
                    let vol = simplex::signed_volume(dim, &piece);
                    if vol.abs() <= tiny {
                        continue;
                    }
                    if vol < 0.0 {
                        piece.swap(0, 1);
                    }
                    let base = vertices.len();
                    simplices.push((base..base + piece.len()).collect());
                    values.extend(piece.iter().map(|x| chosen.at(x)));
                    vertices.extend(piece);
                    grads.push((chosen.grad, chosen.offset));
                }
            }
        }
    }
    if simplices.is_empty() {
        return Err(Error::TrivialFunction);
    }
    Ok(PwaFunction::from_pieces(dim, vertices, simplices, values, grads))
}

fn overlay_spatial(f: &PwaFunction, g: &PwaFunction) -> Result<Vec<Cell>> {
    let whole = |h: &PwaFunction, i: usize| vec![h.simplex_points(i)];
    if f.vertices() == g.vertices() && f.simplices() == g.simplices() {
        return Ok((0..f.simplices().len())
            .map(|i| Cell {
                simplices: whole(f, i),
                f: affine(f, i),
                g: affine(g, i),
            })
            .collect());
    }
    let bbox = |h: &PwaFunction| {
        h.vertices().iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), p| (lo.inf(p), hi.sup(p)),
        )
    };
    let (flo, fhi) = bbox(f);
    let (glo, ghi) = bbox(g);
    let separated = (0..3).any(|k| fhi[k] <= glo[k] || ghi[k] <= flo[k]);
    if !separated {
        return Err(Error::MeshOverlayFailure(
            "in dimension 3 the meshes must coincide or the supports must be separated".into(),
        ));
    }
    let mut cells: Vec<Cell> = (0..f.simplices().len())
        .map(|i| Cell {
            simplices: whole(f, i),
            f: affine(f, i),
            g: Affine::ZERO,
        })
        .collect();
    cells.extend((0..g.simplices().len()).map(|j| Cell {
        simplices: whole(g, j),
        f: Affine::ZERO,
        g: affine(g, j),
    }));
    Ok(cells)
}

type Polygon = Vec<Vec3>;

/// Halfplane `{x : n·x <= c}`.
#[derive(Clone, Copy)]
struct HalfPlane {
    n: Vec3,
    c: f64,
}

impl HalfPlane {
    fn flipped(&self) -> HalfPlane {
        HalfPlane { n: -self.n, c: -self.c }
    }
}

/// Inner halfplanes of a positively oriented triangle.
fn triangle_halfplanes(t: &[Vec3]) -> [HalfPlane; 3] {
    std::array::from_fn(|k| {
        let a = t[k];
        let b = t[(k + 1) % 3];
        let e = b - a;
        let n = Vec3::new(e.y, -e.x, 0.0);
        HalfPlane { n, c: n.dot(&a) }
    })
}

fn clip(poly: &Polygon, h: &HalfPlane) -> Polygon {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let da = h.n.dot(&a) - h.c;
        let db = h.n.dot(&b) - h.c;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

fn area(poly: &Polygon) -> f64 {
    (0..poly.len())
        .map(|k| {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
        / 2.0
}

fn fan(poly: &Polygon) -> Vec<Vec<Vec3>> {
    (1..poly.len().saturating_sub(1))
        .map(|i| vec![poly[0], poly[i], poly[i + 1]])
        .collect()
}

/// `P \ U` for convex `P` and a triangle `U`, as convex pieces.
fn subtract(poly: &Polygon, planes: &[HalfPlane; 3], tiny: f64) -> Vec<Polygon> {
    let mut out = Vec::new();
    let mut rest = poly.clone();
    for h in planes {
        let outside = clip(&rest, &h.flipped());
        if outside.len() >= 3 && area(&outside) > tiny {
            out.push(outside);
        }
        rest = clip(&rest, h);
        if rest.len() < 3 {
            break;
        }
    }
    out
}

fn bbox_overlap(a: &[Vec3], b: &[Vec3]) -> bool {
    let lo = |p: &[Vec3]| p.iter().fold(Vec3::repeat(f64::INFINITY), |m, x| m.inf(x));
    let hi = |p: &[Vec3]| p.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |m, x| m.sup(x));
    let (alo, ahi, blo, bhi) = (lo(a), hi(a), lo(b), hi(b));
    (0..2).all(|k| alo[k] < bhi[k] && blo[k] < ahi[k])
}

fn overlay_planar(f: &PwaFunction, g: &PwaFunction) -> Result<Vec<Cell>> {
    let ft: Vec<Polygon> = (0..f.simplices().len()).map(|i| f.simplex_points(i)).collect();
    let gt: Vec<Polygon> = (0..g.simplices().len()).map(|j| g.simplex_points(j)).collect();
    let gplanes: Vec<[HalfPlane; 3]> = gt.iter().map(|t| triangle_halfplanes(t)).collect();
    let fplanes: Vec<[HalfPlane; 3]> = ft.iter().map(|t| triangle_halfplanes(t)).collect();
    let total: f64 = f.pieces().iter().chain(g.pieces()).map(|p| p.measure).sum();
    let tiny = 1e-14 * total;
    let mut cells = Vec::new();
    let mut covered = 0.0;
    let mut overlap = 0.0;
    for (i, t) in ft.iter().enumerate() {
        for (j, u) in gt.iter().enumerate() {
            if !bbox_overlap(t, u) {
                continue;
            }
            let mut cell = t.clone();
            for h in &gplanes[j] {
                cell = clip(&cell, h);
                if cell.len() < 3 {
                    break;
                }
            }
            if cell.len() < 3 {
                continue;
            }
            let a = area(&cell);
            if a <= tiny {
                continue;
            }
            overlap += a;
            covered += a;
            cells.push(Cell {
                simplices: fan(&cell),
                f: affine(f, i),
                g: affine(g, j),
            });
        }
    }
    let mut outside = |own: &[Polygon], other: &[Polygon], planes: &[[HalfPlane; 3]], h: &PwaFunction, first: bool| {
        for (i, t) in own.iter().enumerate() {
            let mut rest = vec![t.clone()];
            for (j, u) in other.iter().enumerate() {
                if !bbox_overlap(t, u) {
                    continue;
                }
                rest = rest.iter().flat_map(|p| subtract(p, &planes[j], tiny)).collect();
                if rest.is_empty() {
                    break;
                }
            }
            for piece in rest {
                covered += area(&piece);
                let (fa, ga) = if first {
                    (affine(h, i), Affine::ZERO)
                } else {
                    (Affine::ZERO, affine(h, i))
                };
                cells.push(Cell {
                    simplices: fan(&piece),
                    f: fa,
                    g: ga,
                });
            }
        }
    };
    outside(&ft, &gt, &gplanes, f, true);
    outside(&gt, &ft, &fplanes, g, false);
    let expected = total - overlap;
    if (covered - expected).abs() > 1e-9 * total {
        return Err(Error::MeshOverlayFailure(format!(
            "refinement covers {covered} but the union has measure {expected}"
        )));
    }
    Ok(cells)
}
