use super::{Direction, Vec3};
use crate::error::{check_dim, Error, Result};

/// Angular distance below which two atoms are treated as the same direction.
pub const MERGE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub u: Direction,
    pub w: f64,
}

/// A finite positive combination of Dirac masses on S^{n-1}.
///
/// Atoms closer than [`MERGE_TOLERANCE`] are merged on construction by adding
/// their weights; the direction of the first atom of a cluster is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSphereMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscreteSphereMeasure {
    pub fn new(dim: usize, atoms: impl IntoIterator<Item = Atom>) -> Result<Self> {
        check_dim(dim)?;
        let mut merged: Vec<Atom> = Vec::new();
        for atom in atoms {
            if !(atom.w > 0.0 && atom.w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "atom weight {} is not positive",
                    atom.w
                )));
            }
            if dim == 2 && atom.u.vec().z != 0.0 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: 3,
                });
            }
            match merged
                .iter_mut()
                .find(|a| (a.u.vec() - atom.u.vec()).norm() <= MERGE_TOLERANCE)
            {
                Some(existing) => existing.w += atom.w,
                None => merged.push(atom),
            }
        }
        Ok(DiscreteSphereMeasure { dim, atoms: merged })
    }

    /// Builds a measure from `(direction, weight)` pairs, skipping zero weights.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (Direction, f64)>) -> Result<Self> {
        DiscreteSphereMeasure::new(
            dim,
            pairs
                .into_iter()
                .filter(|(_, w)| *w != 0.0)
                .map(|(u, w)| Atom { u, w }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        let w: Vec<f64> = self.atoms.iter().map(|a| a.w).collect();
        crate::par::pairwise_sum(&w)
    }

    /// Sum of two measures with parallel atoms merged.
    pub fn add(&self, other: &DiscreteSphereMeasure) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        DiscreteSphereMeasure::new(self.dim, self.atoms.iter().chain(&other.atoms).copied())
    }

    pub fn scaled(&self, t: f64) -> Self {
        assert!(t > 0.0, "measures scale by positive factors");
        DiscreteSphereMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { u: a.u, w: a.w * t })
                .collect(),
        }
    }

    /// The reflected measure `A ↦ μ(−A)`.
    pub fn reflected(&self) -> Self {
        DiscreteSphereMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { u: a.u.neg(), w: a.w })
                .collect(),
        }
    }

    /// `∫ u dμ(u)`.
    pub fn first_moment(&self) -> Vec3 {
        self.atoms.iter().map(|a| a.u.vec() * a.w).sum()
    }

    /// Weight of the atom within the merge tolerance of `u`, if any.
    pub fn weight_at(&self, u: &Direction) -> Option<f64> {
        self.atoms
            .iter()
            .find(|a| (a.u.vec() - u.vec()).norm() <= MERGE_TOLERANCE)
            .map(|a| a.w)
    }

    /// Largest atom-wise relative discrepancy `|w − w'| / max(w, w')`; an atom
    /// present on one side only counts as discrepancy 1.
    pub fn max_relative_discrepancy(&self, other: &DiscreteSphereMeasure) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.atoms {
            let d = match other.weight_at(&a.u) {
                Some(w) => (a.w - w).abs() / a.w.max(w),
                None => 1.0,
            };
            worst = worst.max(d);
        }
        for b in &other.atoms {
            if self.weight_at(&b.u).is_none() {
                worst = 1.0;
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(x: f64, y: f64, w: f64) -> Atom {
        Atom {
            u: Direction::new(Vec3::new(x, y, 0.0)).unwrap(),
            w,
        }
    }

    #[test]
    fn parallel_atoms_merge() {
        let m = DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, 1.0), atom(1.0, 1e-12, 2.0), atom(0.0, 1.0, 1.0)])
            .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[0].w, 3.0);
    }

    #[test]
    fn nonpositive_weights_rejected() {
        assert!(DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, 0.0)]).is_err());
        assert!(DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, -1.0)]).is_err());
        assert!(DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn discrepancy_detects_missing_atoms() {
        let a = DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, 1.0)]).unwrap();
        let b = DiscreteSphereMeasure::new(2, [atom(1.0, 0.0, 1.0), atom(0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(a.max_relative_discrepancy(&a), 0.0);
        assert_eq!(a.max_relative_discrepancy(&b), 1.0);
    }
}
