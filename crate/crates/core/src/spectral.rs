//! Discrete spectral measures on the unit simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on each atom's weights summing to one.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Tolerance on the moment constraints.
pub const MOMENT_TOL: f64 = 1e-9;

/// One atom: a point `w` of the unit simplex carrying mass `h > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub weights: Vec<f64>,
    pub mass: f64,
}

impl Atom {
    pub fn new(weights: Vec<f64>, mass: f64) -> Self {
        Self { weights, mass }
    }
}

/// A finitely atomic spectral measure `H` on the `(d-1)`-simplex whose
/// first moments all equal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteSpectralMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for DiscreteSpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        Self::new(raw.dim, raw.atoms)
    }
}

impl DiscreteSpectralMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMeasure(format!("dimension must be at least 2, got {dim}")));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for (k, atom) in atoms.iter().enumerate() {
            if atom.weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: atom.weights.len(),
                });
            }
            if !(atom.mass > 0.0 && atom.mass.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has nonpositive mass {}",
                    atom.mass
                )));
            }
            if atom.weights.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::InvalidMeasure(format!("atom {k} has a negative weight")));
            }
            let s: f64 = atom.weights.iter().sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} weights sum to {s}, not 1"
                )));
            }
        }
        let measure = Self { dim, atoms };
        for (j, m) in measure.moments().iter().enumerate() {
            if (m - 1.0).abs() > MOMENT_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "moment constraint {j} gives {m}, not 1"
                )));
            }
        }
        Ok(measure)
    }

    /// Unit masses at the vertices: the independence measure.
    pub fn independence(dim: usize) -> Result<Self> {
        let atoms = (0..dim)
            .map(|j| {
                let mut w = vec![0.0; dim];
                w[j] = 1.0;
                Atom::new(w, 1.0)
            })
            .collect();
        Self::new(dim, atoms)
    }

    /// Mass `d` at the barycentre: complete dependence.
    pub fn comonotone(dim: usize) -> Result<Self> {
        Self::new(dim, vec![Atom::new(vec![1.0 / dim as f64; dim], dim as f64)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `sum_k h_k w_{k,j}` for each coordinate `j`.
    pub fn moments(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| self.atoms.iter().map(|a| a.mass * a.weights[j]).sum())
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `l(x) = sum_k h_k max_j (w_{k,j} x_j)`.
    pub fn ell(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some(bad) = x.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
            return Err(Error::Domain(format!(
                "tail dependence arguments must be finite and nonnegative, got {bad}"
            )));
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| {
                a.mass
                    * a.weights
                        .iter()
                        .zip(x)
                        .map(|(w, xi)| w * xi)
                        .fold(0.0, f64::max)
            })
            .sum())
    }
}
