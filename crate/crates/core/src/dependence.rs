//! Dependence coefficients of a bivariate extreme-value copula, computed
//! from its Pickands function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pickands::{PickandsFn, TabulatedPickands, DEFAULT_TOL};
use crate::quadrature::adaptive_with_breaks;

/// Absolute tolerance of the quadratures behind `tau` and `rho_s`.
pub const QUADRATURE_TOL: f64 = 1e-12;
/// Slack allowed in [`tau_rho_inequality`].
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// `A(1/2)` within this of `1/2` counts as comonotone in the lower tail.
pub const LOWER_TAIL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    pub tau: f64,
    pub rho_s: f64,
    pub lambda_u: f64,
    pub lambda_l: u8,
    pub extremal_coeff: f64,
    pub inequality_ok: bool,
}

impl DependenceReport {
    pub fn from_pickands(a: &PickandsFn) -> Result<Self> {
        let tau = kendall_tau(a)?;
        let rho_s = spearman_rho(a)?;
        Ok(Self {
            tau,
            rho_s,
            lambda_u: upper_tail_dep(a),
            lambda_l: lower_tail_dep(a),
            extremal_coeff: extremal_coefficient(a),
            inequality_ok: tau_rho_inequality(tau, rho_s),
        })
    }
}

fn check(a: &PickandsFn) -> Result<()> {
    if let PickandsFn::Tabulated(_) = a {
        let report = a.validate(DEFAULT_TOL);
        if let Some(v) = report.worst() {
            return Err(Error::InvalidPickands(format!(
                "{:?} violation of size {:.3e} at t = {}",
                v.kind, v.magnitude, v.t
            )));
        }
    }
    Ok(())
}

/// Kendall's tau, `int t(1-t)/A(t) dA'(t)`.
///
/// A piecewise-linear `A` gives a finite sum over its nodes. For a smooth
/// `A` the integral is taken by parts, `-int g'(t) A'(t) dt` with
/// `g = t(1-t)/A`, which needs only the first derivative.
pub fn kendall_tau(a: &PickandsFn) -> Result<f64> {
    check(a)?;
    if a.is_independence() {
        return Ok(0.0);
    }
    if a.is_comonotone() {
        return Ok(1.0);
    }
    let tau = match a {
        PickandsFn::Tabulated(tab) => tau_tabulated(tab),
        PickandsFn::Parametric(_) => {
            let integrand = |t: f64| {
                let at = a.eval(t);
                let d1 = a.derivative(t);
                let g1 = ((1.0 - 2.0 * t) * at - t * (1.0 - t) * d1) / (at * at);
                -g1 * d1
            };
            adaptive_with_breaks(integrand, 0.0, 1.0, &[0.5], QUADRATURE_TOL)?.value
        }
    };
    Ok(tau.clamp(0.0, 1.0))
}

fn tau_tabulated(tab: &TabulatedPickands) -> f64 {
    let (grid, values) = (tab.grid(), tab.values());
    (1..grid.len() - 1)
        .map(|k| {
            let t = grid[k];
            let jump = tab.slope(k) - tab.slope(k - 1);
            t * (1.0 - t) / values[k] * jump
        })
        .sum()
}

/// Spearman's rho, `12 int (1 + A)^-2 dt - 3`. Exact on each linear piece
/// of a tabulated `A`.
pub fn spearman_rho(a: &PickandsFn) -> Result<f64> {
    check(a)?;
    if a.is_independence() {
        return Ok(0.0);
    }
    let integral = match a {
        PickandsFn::Tabulated(tab) => {
            let (grid, values) = (tab.grid(), tab.values());
            (1..grid.len())
                .map(|k| (grid[k] - grid[k - 1]) / ((1.0 + values[k - 1]) * (1.0 + values[k])))
                .sum()
        }
        PickandsFn::Parametric(_) => {
            let f = |t: f64| (1.0 + a.eval(t)).powi(-2);
            adaptive_with_breaks(f, 0.0, 1.0, &[0.5], QUADRATURE_TOL)?.value
        }
    };
    Ok((12.0 * integral - 3.0).clamp(0.0, 1.0))
}

/// `-1 + sqrt(1 + 3 tau) <= rho_s <= min(3 tau / 2, 2 tau - tau^2)`, each
/// side allowed [`INEQUALITY_SLACK`].
pub fn tau_rho_inequality(tau: f64, rho_s: f64) -> bool {
    let lower = (1.0 + 3.0 * tau).sqrt() - 1.0;
    let upper = (1.5 * tau).min(2.0 * tau - tau * tau);
    rho_s - lower >= -INEQUALITY_SLACK && upper - rho_s >= -INEQUALITY_SLACK
}

/// `2 (1 - A(1/2))`.
pub fn upper_tail_dep(a: &PickandsFn) -> f64 {
    2.0 * (1.0 - a.eval(0.5))
}

/// `l(1, 1) = 2 A(1/2)`.
pub fn extremal_coefficient(a: &PickandsFn) -> f64 {
    2.0 * a.eval(0.5)
}

/// 1 for the comonotone copula, 0 otherwise.
pub fn lower_tail_dep(a: &PickandsFn) -> u8 {
    u8::from((a.eval(0.5) - 0.5).abs() <= LOWER_TAIL_TOL)
}

/// Distribution function of `C(U, V)`: `K(w) = w - (1 - tau) w log w`.
pub fn kendall_distribution(tau: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    w - (1.0 - tau) * w * w.ln()
}
