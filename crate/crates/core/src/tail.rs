//! Stable tail dependence functions and conversion to and from the
//! bivariate Pickands form.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{galambos_ell, logistic_ell, FamilyParams};
use crate::pickands::{PickandsFn, TabulatedPickands, ValidityReport, Violation, ViolationKind};
use crate::rng::RngSeed;
use crate::spectral::DiscreteSpectralMeasure;

/// The stable tail dependence function `l : [0, inf)^d -> [0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TailDepFn {
    Spectral(DiscreteSpectralMeasure),
    Logistic {
        dim: usize,
        #[serde(with = "crate::serde_ext::extended_f64")]
        theta: f64,
    },
    Galambos {
        dim: usize,
        #[serde(with = "crate::serde_ext::extended_f64")]
        theta: f64,
    },
    /// `l(x, y) = (x + y) A(y / (x + y))`.
    Pickands(PickandsFn),
}

impl TailDepFn {
    pub fn dim(&self) -> usize {
        match self {
            Self::Spectral(h) => h.dim(),
            Self::Logistic { dim, .. } | Self::Galambos { dim, .. } => *dim,
            Self::Pickands(_) => 2,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            Self::Spectral(h) => h.ell(x),
            Self::Logistic { theta, .. } => logistic_ell(*theta, x),
            Self::Galambos { theta, .. } => galambos_ell(*theta, x),
            Self::Pickands(a) => {
                if let Some(bad) = x.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
                    return Err(Error::Domain(format!(
                        "tail dependence arguments must be finite and nonnegative, got {bad}"
                    )));
                }
                let s = x[0] + x[1];
                if s == 0.0 {
                    return Ok(0.0);
                }
                Ok(s * a.eval(x[1] / s))
            }
        }
    }

    /// Checks necessary conditions on random points: bounds
    /// `max x <= l(x) <= sum x`, homogeneity, and convexity along random
    /// segments. For `d = 2` these are also sufficient once restricted to
    /// the simplex; use [`PickandsFn::validate`] there.
    pub fn check_necessary(&self, tol: f64, samples: usize, seed: RngSeed) -> ValidityReport {
        let d = self.dim();
        let mut rng = seed.rng();
        let mut violations = Vec::new();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|_| rng.random::<f64>() * 3.0).collect()
        };
        for _ in 0..samples {
            let x = draw(&mut rng);
            let y = draw(&mut rng);
            let (Ok(lx), Ok(ly)) = (self.eval(&x), self.eval(&y)) else {
                violations.push(Violation {
                    kind: ViolationKind::NotFinite,
                    t: f64::NAN,
                    magnitude: f64::INFINITY,
                });
                continue;
            };
            let max = x.iter().copied().fold(0.0, f64::max);
            let sum: f64 = x.iter().sum();
            let scale = sum.max(1.0);
            if max - lx > tol * scale {
                violations.push(Violation {
                    kind: ViolationKind::LowerBound,
                    t: f64::NAN,
                    magnitude: max - lx,
                });
            }
            if lx - sum > tol * scale {
                violations.push(Violation {
                    kind: ViolationKind::UpperBound,
                    t: f64::NAN,
                    magnitude: lx - sum,
                });
            }
            let lam: f64 = rng.random();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            if let Ok(lm) = self.eval(&mid) {
                let gap = lm - (lam * lx + (1.0 - lam) * ly);
                if gap > tol * scale {
                    violations.push(Violation {
                        kind: ViolationKind::Convexity,
                        t: lam,
                        magnitude: gap,
                    });
                }
            }
        }
        ValidityReport { tol, violations }
    }
}

/// `A(t) = l(1 - t, t)` for a bivariate `l`. Spectral measures give an
/// exact piecewise-linear `A` with nodes at the atoms' first weights.
pub fn pickands_from_ell(ell: &TailDepFn) -> Result<PickandsFn> {
    if ell.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ell.dim(),
        });
    }
    match ell {
        TailDepFn::Logistic { theta, .. } => Ok(FamilyParams::logistic(*theta)?.into()),
        TailDepFn::Galambos { theta, .. } => Ok(FamilyParams::galambos(*theta)?.into()),
        TailDepFn::Pickands(a) => Ok(a.clone()),
        TailDepFn::Spectral(h) => {
            // max(w1 (1 - t), w2 t) switches branch at t = w1
            let mut grid: Vec<f64> = std::iter::once(0.0)
                .chain(h.atoms().iter().map(|a| a.weights[0]).filter(|&w| w > 0.0 && w < 1.0))
                .chain(std::iter::once(1.0))
                .collect();
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let values = grid
                .iter()
                .map(|&t| h.ell(&[1.0 - t, t]))
                .collect::<Result<Vec<_>>>()?;
            Ok(TabulatedPickands::new(grid, values)?.into())
        }
    }
}

/// The bivariate `l` built from `A`.
pub fn ell_from_pickands(a: PickandsFn) -> TailDepFn {
    TailDepFn::Pickands(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Atom;

    #[test]
    fn spectral_pickands_is_exact() {
        let h = DiscreteSpectralMeasure::new(
            2,
            vec![
                Atom::new(vec![0.2, 0.8], 0.5),
                Atom::new(vec![0.8, 0.2], 0.5),
                Atom::new(vec![0.5, 0.5], 1.0),
            ],
        )
        .unwrap();
        let ell = TailDepFn::Spectral(h);
        let a = pickands_from_ell(&ell).unwrap();
        assert!(a.validate(1e-12).passed());
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            let direct = ell.eval(&[1.0 - t, t]).unwrap();
            assert!((a.eval(t) - direct).abs() < 1e-15, "t={t}");
        }
    }

    #[test]
    fn independence_and_comonotone_pickands() {
        let ind = pickands_from_ell(&TailDepFn::Logistic { dim: 2, theta: 1.0 }).unwrap();
        assert!((0..=10).all(|k| ind.eval(k as f64 / 10.0) == 1.0));
        let com = pickands_from_ell(&TailDepFn::Spectral(
            DiscreteSpectralMeasure::comonotone(2).unwrap(),
        ))
        .unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert!((com.eval(t) - t.max(1.0 - t)).abs() < 1e-15);
        }
        let l2 = pickands_from_ell(&TailDepFn::Logistic { dim: 2, theta: 2.0 }).unwrap();
        assert!((l2.eval(0.5) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pickands_round_trip_through_ell() {
        let a: PickandsFn = FamilyParams::husler_reiss(0.8).unwrap().into();
        let ell = ell_from_pickands(a.clone());
        assert_eq!(ell.eval(&[0.0, 0.0]).unwrap(), 0.0);
        let back = pickands_from_ell(&ell).unwrap();
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            assert!((back.eval(t) - a.eval(t)).abs() < 1e-12);
        }
        assert!(pickands_from_ell(&TailDepFn::Logistic { dim: 3, theta: 2.0 }).is_err());
    }

    #[test]
    fn trivariate_families_pass_necessary_checks() {
        for ell in [
            TailDepFn::Logistic { dim: 3, theta: 2.5 },
            TailDepFn::Galambos { dim: 3, theta: 0.7 },
            TailDepFn::Galambos { dim: 4, theta: 3.0 },
            TailDepFn::Spectral(DiscreteSpectralMeasure::comonotone(3).unwrap()),
        ] {
            let r = ell.check_necessary(1e-12, 500, RngSeed::new(3));
            assert!(r.passed(), "{ell:?}: {:?}", r.worst());
        }
    }

    #[test]
    fn non_convex_function_is_caught() {
        // A concave in the middle: fails convexity along some segment
        let a = PickandsFn::tabulated(vec![0.0, 0.25, 0.5, 0.75, 1.0], vec![1.0, 0.8, 0.95, 0.8, 1.0])
            .unwrap();
        let r = TailDepFn::Pickands(a).check_necessary(1e-12, 2000, RngSeed::new(5));
        assert!(r.has(ViolationKind::Convexity));
    }
}
