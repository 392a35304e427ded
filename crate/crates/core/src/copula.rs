//! Extreme-value copulas `C(u) = exp(-l(-log u_1, ..., -log u_d))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FamilyParams;
use crate::pickands::PickandsFn;
use crate::spectral::DiscreteSpectralMeasure;
use crate::tail::{pickands_from_ell, TailDepFn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TailDepFn", into = "TailDepFn")]
pub struct EvCopula {
    ell: TailDepFn,
    pickands: Option<PickandsFn>,
}

impl TryFrom<TailDepFn> for EvCopula {
    type Error = Error;

    fn try_from(ell: TailDepFn) -> Result<Self> {
        Self::new(ell)
    }
}

impl From<EvCopula> for TailDepFn {
    fn from(c: EvCopula) -> Self {
        c.ell
    }
}

impl EvCopula {
    pub fn new(ell: TailDepFn) -> Result<Self> {
        if ell.dim() < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: ell.dim(),
            });
        }
        let pickands = if ell.dim() == 2 {
            Some(pickands_from_ell(&ell)?)
        } else {
            None
        };
        Ok(Self { ell, pickands })
    }

    /// The bivariate copula with Pickands function `a`.
    pub fn from_pickands(a: PickandsFn) -> Self {
        Self {
            ell: TailDepFn::Pickands(a.clone()),
            pickands: Some(a),
        }
    }

    /// The `d`-variate copula of a parametric family.
    pub fn family(params: FamilyParams, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim < 2 {
            return Err(Error::Unsupported(format!("dimension {dim} < 2")));
        }
        if let Some(max) = params.max_dim() {
            if dim > max {
                return Err(Error::Unsupported(format!(
                    "{} copula is available up to dimension {max}, asked for {dim}",
                    params.name()
                )));
            }
        }
        let ell = match params {
            FamilyParams::Logistic { theta } if dim > 2 => TailDepFn::Logistic { dim, theta },
            FamilyParams::Galambos { theta } if dim > 2 => TailDepFn::Galambos { dim, theta },
            _ => return Ok(Self::from_pickands(params.into())),
        };
        Self::new(ell)
    }

    pub fn independence(dim: usize) -> Result<Self> {
        Self::new(TailDepFn::Spectral(DiscreteSpectralMeasure::independence(dim)?))
    }

    pub fn comonotone(dim: usize) -> Result<Self> {
        Self::new(TailDepFn::Spectral(DiscreteSpectralMeasure::comonotone(dim)?))
    }

    pub fn dim(&self) -> usize {
        self.ell.dim()
    }

    pub fn ell(&self) -> &TailDepFn {
        &self.ell
    }

    /// Pickands function of a bivariate copula.
    pub fn pickands(&self) -> Option<&PickandsFn> {
        self.pickands.as_ref()
    }

    fn bivariate(&self) -> Result<&PickandsFn> {
        self.pickands.as_ref().ok_or(Error::DimensionMismatch {
            expected: 2,
            got: self.dim(),
        })
    }

    /// Distribution function on `[0, 1]^d`; zero whenever a coordinate is.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        if let Some(bad) = u.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("copula argument {bad} outside [0, 1]")));
        }
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        if u.iter().all(|&v| v == 1.0) {
            return Ok(1.0);
        }
        let x: Vec<f64> = u.iter().map(|v| -v.ln()).collect();
        Ok((-self.ell.eval(&x)?).exp())
    }

    /// Bivariate distribution function; arguments are clamped to [0, 1].
    pub fn cdf2(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        match &self.pickands {
            Some(a) => cdf_from_pickands(a, u, v),
            None => f64::NAN,
        }
    }

    /// `dC/du (u, v)`: the conditional distribution of `V` given `U = u`.
    /// Uses the right derivative of `A` at kinks.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> Result<f64> {
        let a = self.bivariate()?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("conditioning value {u} outside (0, 1)")));
        }
        if v <= 0.0 {
            return Ok(0.0);
        }
        if v >= 1.0 {
            return Ok(1.0);
        }
        let (x, y) = (-u.ln(), -v.ln());
        let s = x + y;
        let t = y / s;
        let at = a.eval(t);
        let c = (-s * at).exp();
        Ok((c / u * (at - t * a.derivative(t))).clamp(0.0, 1.0))
    }

    /// Copula density `d^2 C / du dv` for a twice-differentiable `A`.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        copula_density(self.bivariate()?, u, v)
    }

    /// `sup |C(u^(1/m), v^(1/m))^m - C(u, v)|` over a square grid.
    pub fn max_stability_gap(&self, m: u32, resolution: usize) -> Result<f64> {
        self.bivariate()?;
        Ok(max_stability_gap(|u, v| self.cdf2(u, v), m, resolution))
    }
}

/// `C(u, v) = (uv)^A(log v / log uv)`, with `C(1, 1) = 1` and zero on the
/// lower boundary.
pub fn cdf_from_pickands(a: &PickandsFn, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 && v >= 1.0 {
        return 1.0;
    }
    let (x, y) = (-u.ln(), -v.ln());
    let s = x + y;
    (-s * a.eval(y / s)).exp()
}

/// Density of the bivariate extreme-value copula with Pickands function
/// `a`:
///
/// `c = C/(uv) [(A - tA')(A + (1-t)A') + t(1-t)A''/(x+y)]`
///
/// with `x = -log u`, `y = -log v`, `t = y/(x+y)`.
pub fn copula_density(a: &PickandsFn, u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::Domain(format!("density needs (u, v) in (0,1)^2, got ({u}, {v})")));
    }
    if matches!(a, PickandsFn::Tabulated(_)) || a.is_comonotone() {
        return Err(Error::Unsupported(
            "density needs a twice differentiable Pickands function".into(),
        ));
    }
    let (x, y) = (-u.ln(), -v.ln());
    let s = x + y;
    let t = y / s;
    let at = a.eval(t);
    let d1 = a.derivative(t);
    let d2 = a.second_derivative(t);
    let c = (-s * at).exp();
    let lx = at - t * d1;
    let ly = at + (1.0 - t) * d1;
    Ok(c / (u * v) * (lx * ly + t * (1.0 - t) * d2 / s))
}

/// `sup |C(u^(1/m), v^(1/m))^m - C(u, v)|` over the grid
/// `{0, 1/(r-1), ..., 1}^2`. Zero for a max-stable copula.
pub fn max_stability_gap<F: Fn(f64, f64) -> f64>(cdf: F, m: u32, resolution: usize) -> f64 {
    let m = m.max(1);
    let r = resolution.max(2);
    let inv = 1.0 / m as f64;
    let mut gap: f64 = 0.0;
    for i in 0..r {
        let u = i as f64 / (r - 1) as f64;
        for j in 0..r {
            let v = j as f64 / (r - 1) as f64;
            let lhs = cdf(u.powf(inv), v.powf(inv)).powi(m as i32);
            gap = gap.max((lhs - cdf(u, v)).abs());
        }
    }
    gap
}
