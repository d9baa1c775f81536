//! JSON artifacts.
//!
//! ```text
//! polytope  {"dim": 2|3, "normals": [[f64; n]], "offsets": [f64]}
//! measure   {"dim": n, "atoms": [{"u": [f64; n], "w": f64}]}
//! function  {"dim": n, "vertices": [[f64; n]], "simplices": [[usize; n+1]],
//!            "values": [f64], "gradients"?: [[f64; n+1]]}
//! radial    {"dim": n, "shape": <polytope> | "ball", "profile": [[s, f*(s)]]}
//! ```
//!
//! Normals need not be unit on input. Floats are written in shortest
//! round-trip form, so every saved artifact reloads to an identical value.
//! The optional `gradients` rows (gradient then offset) preserve the exact
//! affine data of constructed functions; they must agree with the vertex
//! values.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{embed, Atom, Direction, DiscreteSphereMeasure, Polytope, Vec3};
use crate::pwa::PwaFunction;
use crate::rearrange::{RadialConvexFunction, RadialProfile, Shape};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub u: Vec<f64>,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub dim: usize,
    pub atoms: Vec<AtomJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradients: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeJson {
    Tag(String),
    Polytope(PolytopeJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialJson {
    pub dim: usize,
    pub shape: ShapeJson,
    pub profile: Vec<[f64; 2]>,
}

fn vector(dim: usize, coords: &[f64], what: &str) -> Result<Vec3> {
    if coords.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "{what} has {} coordinates, expected {dim}",
            coords.len()
        )));
    }
    embed(coords)
}

/// Unit vectors are kept bit for bit; others are normalised. Returns the
/// direction and the input length.
fn direction(v: Vec3) -> Result<(Direction, f64)> {
    if (v.norm() - 1.0).abs() <= 2.0 * f64::EPSILON {
        Ok((Direction::unit_unchecked(v), 1.0))
    } else {
        Ok((Direction::new(v)?, v.norm()))
    }
}

impl From<&Polytope> for PolytopeJson {
    fn from(k: &Polytope) -> Self {
        PolytopeJson {
            dim: k.dim(),
            normals: k.normals().iter().map(|u| u.coords(k.dim())).collect(),
            offsets: k.offsets().to_vec(),
        }
    }
}

impl TryFrom<&PolytopeJson> for Polytope {
    type Error = Error;

    fn try_from(j: &PolytopeJson) -> Result<Self> {
        check_dim(j.dim)?;
        if j.normals.len() != j.offsets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} normals but {} offsets",
                j.normals.len(),
                j.offsets.len()
            )));
        }
        let mut us = Vec::with_capacity(j.normals.len());
        let mut hs = Vec::with_capacity(j.normals.len());
        for (n, &h) in j.normals.iter().zip(&j.offsets) {
            let (u, len) = direction(vector(j.dim, n, "normal")?)?;
            us.push(u);
            hs.push(h / len);
        }
        Polytope::canonicalize(j.dim, &us, &hs)
    }
}

impl From<&DiscreteSphereMeasure> for MeasureJson {
    fn from(mu: &DiscreteSphereMeasure) -> Self {
        MeasureJson {
            dim: mu.dim(),
            atoms: mu
                .atoms()
                .iter()
                .map(|a| AtomJson {
                    u: a.u.coords(mu.dim()),
                    w: a.w,
                })
                .collect(),
        }
    }
}

impl TryFrom<&MeasureJson> for DiscreteSphereMeasure {
    type Error = Error;

    fn try_from(j: &MeasureJson) -> Result<Self> {
        check_dim(j.dim)?;
        let atoms = j
            .atoms
            .iter()
            .map(|a| {
                let (u, _) = direction(vector(j.dim, &a.u, "atom direction")?)?;
                Ok(Atom { u, w: a.w })
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteSphereMeasure::new(j.dim, atoms)
    }
}

impl From<&PwaFunction> for FunctionJson {
    fn from(f: &PwaFunction) -> Self {
        let d = f.dim();
        FunctionJson {
            dim: d,
            vertices: f.vertices().iter().map(|v| v.as_slice()[..d].to_vec()).collect(),
            simplices: f.simplices().to_vec(),
            values: f.values().to_vec(),
            gradients: Some(
                f.pieces()
                    .iter()
                    .map(|p| {
                        let mut row = p.grad.as_slice()[..d].to_vec();
                        row.push(p.offset);
                        row
                    })
                    .collect(),
            ),
        }
    }
}

impl TryFrom<&FunctionJson> for PwaFunction {
    type Error = Error;

    fn try_from(j: &FunctionJson) -> Result<Self> {
        check_dim(j.dim)?;
        let vertices = j
            .vertices
            .iter()
            .map(|v| vector(j.dim, v, "vertex"))
            .collect::<Result<Vec<_>>>()?;
        let f = PwaFunction::new(j.dim, vertices, j.simplices.clone(), j.values.clone())?;
        match &j.gradients {
            None => Ok(f),
            Some(rows) => {
                let grads = rows
                    .iter()
                    .map(|r| {
                        if r.len() != j.dim + 1 {
                            return Err(Error::InvalidMesh("gradient rows need n + 1 entries".into()));
                        }
                        Ok((embed(&r[..j.dim])?, r[j.dim]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                f.with_exact_pieces(&grads)
            }
        }
    }
}

impl From<&RadialConvexFunction> for RadialJson {
    fn from(g: &RadialConvexFunction) -> Self {
        RadialJson {
            dim: g.dim(),
            shape: match g.shape() {
                Shape::Ball => ShapeJson::Tag("ball".into()),
                Shape::Polytope(k) => ShapeJson::Polytope(k.into()),
            },
            profile: g
                .profile()
                .grid()
                .iter()
                .zip(g.profile().values())
                .map(|(s, v)| [*s, *v])
                .collect(),
        }
    }
}

impl TryFrom<&RadialJson> for RadialConvexFunction {
    type Error = Error;

    fn try_from(j: &RadialJson) -> Result<Self> {
        let shape = match &j.shape {
            ShapeJson::Tag(t) if t == "ball" => Shape::Ball,
            ShapeJson::Tag(t) => return Err(Error::InvalidParameter(format!("unknown shape tag {t:?}"))),
            ShapeJson::Polytope(p) => Shape::Polytope(Polytope::try_from(p)?),
        };
        let profile = RadialProfile::new(
            j.profile.iter().map(|r| r[0]).collect(),
            j.profile.iter().map(|r| r[1]).collect(),
        )?;
        RadialConvexFunction::new(j.dim, shape, profile)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

pub fn load_polytope(path: &Path) -> Result<Polytope> {
    Polytope::try_from(&read_json::<PolytopeJson>(path)?)
}

pub fn load_measure(path: &Path) -> Result<DiscreteSphereMeasure> {
    DiscreteSphereMeasure::try_from(&read_json::<MeasureJson>(path)?)
}

pub fn load_function(path: &Path) -> Result<PwaFunction> {
    PwaFunction::try_from(&read_json::<FunctionJson>(path)?)
}

pub fn load_radial(path: &Path) -> Result<RadialConvexFunction> {
    RadialConvexFunction::try_from(&read_json::<RadialJson>(path)?)
}

pub fn save_polytope(path: &Path, k: &Polytope) -> Result<()> {
    write_text(path, &to_json(&PolytopeJson::from(k))?)
}

pub fn save_measure(path: &Path, mu: &DiscreteSphereMeasure) -> Result<()> {
    write_text(path, &to_json(&MeasureJson::from(mu))?)
}

pub fn save_function(path: &Path, f: &PwaFunction) -> Result<()> {
    write_text(path, &to_json(&FunctionJson::from(f))?)
}

pub fn save_radial(path: &Path, g: &RadialConvexFunction) -> Result<()> {
    write_text(path, &to_json(&RadialJson::from(g))?)
}
