//! Closed-form parametric extreme-value families and Archimedean
//! generators.
//!
//! Infinite parameters (`f64::INFINITY`) are legal for the logistic,
//! Galambos and Hüsler-Reiss families and always dispatch to the exact
//! limiting branch.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf, student_t_cdf, student_t_pdf};

/// Largest dimension accepted by the Galambos inclusion-exclusion sum.
pub const GALAMBOS_MAX_DIM: usize = 10;

/// Distance from {0, 1} inside which a Pickands function returns its
/// endpoint value 1.
const ENDPOINT_GUARD: f64 = 1e-15;

/// Parameters of a parametric extreme-value family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    /// Gumbel-Hougaard / logistic, theta in [1, inf].
    Logistic {
        #[serde(with = "crate::serde_ext::extended_f64")]
        theta: f64,
    },
    /// Galambos / negative logistic, theta in [0, inf].
    Galambos {
        #[serde(with = "crate::serde_ext::extended_f64")]
        theta: f64,
    },
    /// Hüsler-Reiss, lambda in [0, inf].
    HuslerReiss {
        #[serde(with = "crate::serde_ext::extended_f64")]
        lambda: f64,
    },
    /// t-EV with nu > 0 degrees of freedom and correlation rho in (-1, 1).
    TEv { nu: f64, rho: f64 },
}

impl FamilyParams {
    pub fn logistic(theta: f64) -> Result<Self> {
        let p = Self::Logistic { theta };
        p.validate()?;
        Ok(p)
    }

    pub fn galambos(theta: f64) -> Result<Self> {
        let p = Self::Galambos { theta };
        p.validate()?;
        Ok(p)
    }

    pub fn husler_reiss(lambda: f64) -> Result<Self> {
        let p = Self::HuslerReiss { lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn t_ev(nu: f64, rho: f64) -> Result<Self> {
        let p = Self::TEv { nu, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Logistic { theta } if !(theta >= 1.0) => {
                Err(param("theta", theta, "logistic needs theta in [1, inf]"))
            }
            Self::Galambos { theta } if !(theta >= 0.0) => {
                Err(param("theta", theta, "galambos needs theta in [0, inf]"))
            }
            Self::HuslerReiss { lambda } if !(lambda >= 0.0) => {
                Err(param("lambda", lambda, "husler_reiss needs lambda in [0, inf]"))
            }
            Self::TEv { nu, .. } if !(nu > 0.0 && nu.is_finite()) => {
                Err(param("nu", nu, "t_ev needs finite nu > 0"))
            }
            Self::TEv { rho, .. } if !(rho.abs() < 1.0) => {
                Err(param("rho", rho, "t_ev needs |rho| < 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Logistic { .. } => "logistic",
            Self::Galambos { .. } => "galambos",
            Self::HuslerReiss { .. } => "husler_reiss",
            Self::TEv { .. } => "t_ev",
        }
    }

    /// Largest supported dimension, `None` when unbounded.
    pub fn max_dim(&self) -> Option<usize> {
        match self {
            Self::Logistic { .. } => None,
            Self::Galambos { .. } => Some(GALAMBOS_MAX_DIM),
            Self::HuslerReiss { .. } | Self::TEv { .. } => Some(2),
        }
    }

    pub fn is_independence(&self) -> bool {
        match *self {
            Self::Logistic { theta } => theta == 1.0,
            Self::Galambos { theta } => theta == 0.0,
            Self::HuslerReiss { lambda } => lambda == f64::INFINITY,
            Self::TEv { .. } => false,
        }
    }

    pub fn is_comonotone(&self) -> bool {
        match *self {
            Self::Logistic { theta } | Self::Galambos { theta } => theta == f64::INFINITY,
            Self::HuslerReiss { lambda } => lambda == 0.0,
            Self::TEv { .. } => false,
        }
    }

    /// Pickands dependence function `A(t)`.
    pub fn pickands(&self, t: f64) -> f64 {
        match *self {
            Self::Logistic { theta } => logistic_norm2(theta, 1.0 - t, t),
            Self::Galambos { theta } => galambos_pickands(theta, t),
            Self::HuslerReiss { lambda } => husler_reiss_a(lambda, t),
            Self::TEv { nu, rho } => t_ev_a(nu, rho, t),
        }
    }

    /// First derivative `A'(t)` (right derivative at kinks).
    pub fn pickands_derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Logistic { theta } => logistic_d1(theta, t),
            Self::Galambos { theta } => galambos_d1(theta, t),
            Self::HuslerReiss { lambda } => husler_reiss_d1(lambda, t),
            Self::TEv { nu, rho } => t_ev_d1(nu, rho, t),
        }
    }

    /// Second derivative `A''(t)`; zero away from the kink for the
    /// comonotone limits.
    pub fn pickands_second_derivative(&self, t: f64) -> f64 {
        match *self {
            Self::Logistic { theta } => logistic_d2(theta, t),
            Self::Galambos { .. } => central_difference(|s| self.pickands_derivative(s), t),
            Self::HuslerReiss { lambda } => husler_reiss_d2(lambda, t),
            Self::TEv { nu, rho } => t_ev_d2(nu, rho, t),
        }
    }

    /// Stable tail dependence function `l(x)`.
    pub fn ell(&self, x: &[f64]) -> Result<f64> {
        check_point(x)?;
        if let Some(max) = self.max_dim() {
            if x.len() > max {
                return Err(Error::Unsupported(format!(
                    "{} is implemented up to dimension {max}, got {}",
                    self.name(),
                    x.len()
                )));
            }
        }
        match *self {
            Self::Logistic { theta } => logistic_ell(theta, x),
            Self::Galambos { theta } => galambos_ell(theta, x),
            _ => {
                let s = x[0] + x[1];
                if s == 0.0 {
                    return Ok(0.0);
                }
                Ok(s * self.pickands(x[1] / s))
            }
        }
    }
}

fn check_point(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.len(),
        });
    }
    if let Some(bad) = x.iter().find(|v| !(**v >= 0.0) || v.is_infinite()) {
        return Err(Error::Domain(format!(
            "tail dependence arguments must be finite and nonnegative, got {bad}"
        )));
    }
    Ok(())
}

/// `(sum x_j^theta)^(1/theta)`, scaled by the maximum to avoid overflow.
fn logistic_norm(theta: f64, x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(0.0, f64::max);
    if theta == f64::INFINITY || max == 0.0 {
        return max;
    }
    if theta == 1.0 {
        return x.iter().sum();
    }
    let s: f64 = x.iter().map(|&v| (v / max).powf(theta)).sum();
    max * s.powf(1.0 / theta)
}

fn logistic_norm2(theta: f64, a: f64, b: f64) -> f64 {
    logistic_norm(theta, &[a, b])
}

/// Logistic tail dependence function `(x_1^theta + ... + x_d^theta)^(1/theta)`.
pub fn logistic_ell(theta: f64, x: &[f64]) -> Result<f64> {
    if !(theta >= 1.0) {
        return Err(param("theta", theta, "logistic needs theta in [1, inf]"));
    }
    check_point(x)?;
    Ok(logistic_norm(theta, x))
}

fn logistic_d1(theta: f64, t: f64) -> f64 {
    if theta == 1.0 {
        return 0.0;
    }
    if theta == f64::INFINITY {
        return if t < 0.5 { -1.0 } else { 1.0 };
    }
    let (a, b) = (1.0 - t, t);
    let n = logistic_norm2(theta, a, b);
    (b / n).powf(theta - 1.0) - (a / n).powf(theta - 1.0)
}

fn logistic_d2(theta: f64, t: f64) -> f64 {
    if theta == 1.0 || theta == f64::INFINITY || t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    // (theta - 1) (ab)^(theta-2) N^(1-2 theta)
    let (a, b) = (1.0 - t, t);
    let n = logistic_norm2(theta, a, b);
    let ln = (theta - 2.0) * (a * b).ln() + (1.0 - 2.0 * theta) * n.ln();
    (theta - 1.0) * ln.exp()
}

/// Galambos tail dependence function
/// `sum x_j - sum_{|I|>=2} (-1)^|I| (sum_{j in I} x_j^-theta)^(-1/theta)`.
/// Zero coordinates drop out of every subset term.
pub fn galambos_ell(theta: f64, x: &[f64]) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(param("theta", theta, "galambos needs theta in [0, inf]"));
    }
    check_point(x)?;
    let d = x.len();
    if d > GALAMBOS_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "galambos is implemented up to dimension {GALAMBOS_MAX_DIM}, got {d}"
        )));
    }
    let sum: f64 = x.iter().sum();
    if theta == 0.0 {
        return Ok(sum);
    }
    if theta == f64::INFINITY {
        return Ok(x.iter().copied().fold(0.0, f64::max));
    }
    let mut correction = 0.0;
    let mut members = Vec::with_capacity(d);
    for mask in 0u32..(1 << d) {
        let size = mask.count_ones();
        if size < 2 {
            continue;
        }
        members.clear();
        members.extend((0..d).filter(|j| mask & (1 << j) != 0).map(|j| x[j]));
        let sign = if size % 2 == 0 { 1.0 } else { -1.0 };
        correction += sign * neg_power_mean(theta, &members);
    }
    Ok(sum - correction)
}

/// `(sum x_j^-theta)^(-1/theta)`, scaled by the minimum; zero if any x_j = 0.
fn neg_power_mean(theta: f64, x: &[f64]) -> f64 {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|&v| (v / min).powf(-theta)).sum();
    min * s.powf(-1.0 / theta)
}

fn galambos_pickands(theta: f64, t: f64) -> f64 {
    if theta == 0.0 || t <= ENDPOINT_GUARD || t >= 1.0 - ENDPOINT_GUARD {
        return 1.0;
    }
    // (a^-theta + b^-theta)^(-1/theta) = ab / ||(a, b)||_theta
    let (a, b) = (1.0 - t, t);
    1.0 - a * b / logistic_norm2(theta, a, b)
}

fn galambos_d1(theta: f64, t: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    if theta == f64::INFINITY {
        return if t < 0.5 { -1.0 } else { 1.0 };
    }
    let (a, b) = (1.0 - t, t);
    let n = logistic_norm2(theta, a, b);
    let dn = logistic_d1(theta, t);
    -((a - b) * n - a * b * dn) / (n * n)
}

/// Hüsler-Reiss Pickands function.
pub fn husler_reiss_a(lambda: f64, w: f64) -> f64 {
    if lambda == f64::INFINITY || w <= ENDPOINT_GUARD || w >= 1.0 - ENDPOINT_GUARD {
        return 1.0;
    }
    if lambda == 0.0 {
        return w.max(1.0 - w);
    }
    let (z1, z2) = husler_reiss_z(lambda, w);
    (1.0 - w) * std_normal_cdf(z1) + w * std_normal_cdf(z2)
}

fn husler_reiss_z(lambda: f64, w: f64) -> (f64, f64) {
    let l = ((1.0 - w) / w).ln() / (2.0 * lambda);
    (lambda + l, lambda - l)
}

fn husler_reiss_d1(lambda: f64, w: f64) -> f64 {
    if lambda == f64::INFINITY {
        return 0.0;
    }
    if lambda == 0.0 {
        return if w < 0.5 { -1.0 } else { 1.0 };
    }
    if w <= 0.0 {
        return -1.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    // the density terms cancel since (1-w) phi(z1) = w phi(z2)
    let (z1, z2) = husler_reiss_z(lambda, w);
    std_normal_cdf(z2) - std_normal_cdf(z1)
}

fn husler_reiss_d2(lambda: f64, w: f64) -> f64 {
    if lambda == f64::INFINITY || lambda == 0.0 || w <= 0.0 || w >= 1.0 {
        return 0.0;
    }
    let (z1, z2) = husler_reiss_z(lambda, w);
    (std_normal_pdf(z1) + std_normal_pdf(z2)) / (2.0 * lambda * w * (1.0 - w))
}

fn t_ev_z(nu: f64, rho: f64, w: f64) -> f64 {
    let ratio = (w / (1.0 - w)).powf(1.0 / nu);
    (1.0 + nu).sqrt() * (ratio - rho) / (1.0 - rho * rho).sqrt()
}

fn t_ev_dz(nu: f64, rho: f64, w: f64) -> f64 {
    let r = w / (1.0 - w);
    ((1.0 + nu) / (1.0 - rho * rho)).sqrt() * r.powf(1.0 / nu - 1.0) / (nu * (1.0 - w) * (1.0 - w))
}

/// t-EV Pickands function `w t_{nu+1}(z_w) + (1-w) t_{nu+1}(z_{1-w})`.
pub fn t_ev_a(nu: f64, rho: f64, w: f64) -> f64 {
    if w <= ENDPOINT_GUARD || w >= 1.0 - ENDPOINT_GUARD {
        return 1.0;
    }
    let df = nu + 1.0;
    let t1 = student_t_cdf(t_ev_z(nu, rho, w), df).unwrap_or(f64::NAN);
    let t2 = student_t_cdf(t_ev_z(nu, rho, 1.0 - w), df).unwrap_or(f64::NAN);
    w * t1 + (1.0 - w) * t2
}

fn t_ev_d1(nu: f64, rho: f64, w: f64) -> f64 {
    if w <= 0.0 {
        return -1.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    let df = nu + 1.0;
    let t1 = student_t_cdf(t_ev_z(nu, rho, w), df).unwrap_or(f64::NAN);
    let t2 = student_t_cdf(t_ev_z(nu, rho, 1.0 - w), df).unwrap_or(f64::NAN);
    t1 - t2
}

fn t_ev_d2(nu: f64, rho: f64, w: f64) -> f64 {
    if w <= 0.0 || w >= 1.0 {
        return 0.0;
    }
    let df = nu + 1.0;
    let f1 = student_t_pdf(t_ev_z(nu, rho, w), df).unwrap_or(f64::NAN);
    let f2 = student_t_pdf(t_ev_z(nu, rho, 1.0 - w), df).unwrap_or(f64::NAN);
    f1 * t_ev_dz(nu, rho, w) + f2 * t_ev_dz(nu, rho, 1.0 - w)
}

/// Central difference of `f` at `t` on [0, 1], step 1e-6 shrunk near the
/// endpoints.
pub(crate) fn central_difference<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    let h = 1e-6_f64.min(0.5 * t).min(0.5 * (1.0 - t));
    if h <= 0.0 {
        return 0.0;
    }
    (f(t + h) - f(t - h)) / (2.0 * h)
}

/// Archimedean generator `phi`, with the few closed forms needed near the
/// endpoints computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ArchimedeanGenerator {
    /// `phi(u) = (-log u)^theta`, theta >= 1.
    Gumbel { theta: f64 },
    /// `phi(u) = (u^-alpha - 1) / alpha`, alpha > 0.
    Clayton { alpha: f64 },
    /// `phi(u) = -log u`.
    Independence,
}

impl ArchimedeanGenerator {
    pub fn gumbel(theta: f64) -> Result<Self> {
        let g = Self::Gumbel { theta };
        g.validate()?;
        Ok(g)
    }

    pub fn clayton(alpha: f64) -> Result<Self> {
        let g = Self::Clayton { alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gumbel { theta } if !(theta >= 1.0 && theta.is_finite()) => {
                Err(param("theta", theta, "gumbel generator needs finite theta >= 1"))
            }
            Self::Clayton { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(param("alpha", alpha, "clayton generator needs finite alpha > 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gumbel { .. } => "gumbel",
            Self::Clayton { .. } => "clayton",
            Self::Independence => "independence",
        }
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.phi_of_neg_log(-u.ln())
    }

    pub fn phi_derivative(&self, u: f64) -> f64 {
        match *self {
            Self::Gumbel { theta } => -theta * (-u.ln()).powf(theta - 1.0) / u,
            Self::Clayton { alpha } => -u.powf(-alpha - 1.0),
            Self::Independence => -1.0 / u,
        }
    }

    pub fn phi_inverse(&self, s: f64) -> f64 {
        (-self.neg_log_phi_inverse(s)).exp()
    }

    /// `phi(exp(-x))` for `x >= 0`.
    pub fn phi_of_neg_log(&self, x: f64) -> f64 {
        match *self {
            Self::Gumbel { theta } => x.powf(theta),
            Self::Clayton { alpha } => (alpha * x).exp_m1() / alpha,
            Self::Independence => x,
        }
    }

    /// `-log(phi^{-1}(s))` for `s >= 0`.
    pub fn neg_log_phi_inverse(&self, s: f64) -> f64 {
        match *self {
            Self::Gumbel { theta } => s.powf(1.0 / theta),
            Self::Clayton { alpha } => (alpha * s).ln_1p() / alpha,
            Self::Independence => s,
        }
    }

    /// `phi(1 - s)` for small `s`.
    pub fn phi_near_one(&self, s: f64) -> f64 {
        self.phi_of_neg_log(-(-s).ln_1p())
    }

    /// `phi'(1 - s)` for small `s`.
    pub fn phi_derivative_near_one(&self, s: f64) -> f64 {
        let x = -(-s).ln_1p();
        let u = 1.0 - s;
        match *self {
            Self::Gumbel { theta } => -theta * x.powf(theta - 1.0) / u,
            Self::Clayton { alpha } => -(alpha * x).exp() / u,
            Self::Independence => -1.0 / u,
        }
    }

    /// The Archimedean copula `phi^{-1}(phi(u) + phi(v))`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        let s = self.phi_of_neg_log(-u.ln()) + self.phi_of_neg_log(-v.ln());
        (-self.neg_log_phi_inverse(s)).exp()
    }

    /// `dC/du (u, v)`, the conditional distribution of V given U = u.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        let c = self.cdf(u, v);
        if c <= 0.0 {
            return 0.0;
        }
        (self.phi_derivative(u) / self.phi_derivative(c)).clamp(0.0, 1.0)
    }
}

/// Which Archimedean limit to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorMode {
    /// Upper tail of `C_phi`: the logistic parameter.
    Copula,
    /// Upper tail of the survival copula: the Galambos parameter.
    SurvivalCopula,
}

/// Numerical limit for the extreme-value attractor of an Archimedean
/// copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorEstimate {
    pub mode: AttractorMode,
    pub theta: f64,
    /// `(s, ratio)` pairs at `s = 10^-2 .. 10^-8`.
    pub sequence: Vec<(f64, f64)>,
    pub extrapolants: Vec<f64>,
    /// Last three extrapolants agree within 1e-6.
    pub stable: bool,
}

impl AttractorEstimate {
    /// The limiting family, `None` when the limit is unstable.
    pub fn family(&self) -> Option<FamilyParams> {
        if !self.stable {
            return None;
        }
        match self.mode {
            AttractorMode::Copula => FamilyParams::logistic(self.theta.max(1.0)).ok(),
            AttractorMode::SurvivalCopula => FamilyParams::galambos(self.theta.max(0.0)).ok(),
        }
    }
}

/// Evaluates `-s phi'(1-s)/phi(1-s)` (copula) or `-phi(s)/(s phi'(s))`
/// (survival copula) at `s = 10^-k`, `k = 2..8`, and extrapolates with
/// Aitken's delta-squared process.
pub fn archimedean_attractor_theta(
    gen: &ArchimedeanGenerator,
    mode: AttractorMode,
) -> Result<AttractorEstimate> {
    gen.validate()?;
    let sequence: Vec<(f64, f64)> = (2..=8)
        .map(|k| {
            let s = 10f64.powi(-k);
            let ratio = match mode {
                AttractorMode::Copula => -s * gen.phi_derivative_near_one(s) / gen.phi_near_one(s),
                AttractorMode::SurvivalCopula => -gen.phi(s) / (s * gen.phi_derivative(s)),
            };
            (s, ratio)
        })
        .collect();
    let g: Vec<f64> = sequence.iter().map(|p| p.1).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return Ok(AttractorEstimate {
            mode,
            theta: f64::NAN,
            sequence,
            extrapolants: Vec::new(),
            stable: false,
        });
    }
    let extrapolants: Vec<f64> = g
        .windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let denom = d2 - d1;
            if denom.abs() <= 1e-14 * w[2].abs().max(1.0) || d1 * d2 <= 0.0 {
                w[2]
            } else {
                w[2] - d2 * d2 / denom
            }
        })
        .collect();
    let tail = &extrapolants[extrapolants.len() - 3..];
    let spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().copied().fold(f64::INFINITY, f64::min);
    let theta = *extrapolants.last().expect("seven points give five extrapolants");
    Ok(AttractorEstimate {
        mode,
        theta,
        sequence,
        extrapolants,
        stable: spread <= 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::std_normal_cdf;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn logistic_examples() {
        assert_eq!(logistic_ell(1.0, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(logistic_ell(f64::INFINITY, &[1.0, 2.0, 3.0]).unwrap(), 3.0);
        assert!(close(logistic_ell(2.0, &[3.0, 4.0]).unwrap(), 5.0, 1e-14));
        assert!(logistic_ell(0.5, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn logistic_is_nonincreasing_in_theta() {
        let x = [0.3, 1.7, 0.9];
        let mut prev = f64::INFINITY;
        for theta in [1.0, 1.2, 2.0, 5.0, 40.0, f64::INFINITY] {
            let v = logistic_ell(theta, &x).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn galambos_examples() {
        assert_eq!(galambos_ell(0.0, &[1.0, 1.0]).unwrap(), 2.0);
        assert!(close(galambos_ell(1.0, &[1.0, 1.0]).unwrap(), 1.5, 1e-15));
        assert!(close(galambos_ell(1.0, &[1.0, 1.0, 1.0]).unwrap(), 3.0 - 1.5 + 1.0 / 3.0, 1e-14));
        assert!(galambos_ell(-0.1, &[1.0, 1.0]).is_err());
        assert!(galambos_ell(1.0, &[1.0; 11]).is_err());
    }

    #[test]
    fn galambos_drops_zero_coordinates() {
        let full = galambos_ell(1.3, &[0.4, 0.0, 1.1]).unwrap();
        let reduced = galambos_ell(1.3, &[0.4, 1.1]).unwrap();
        assert!(close(full, reduced, 1e-15));
    }

    #[test]
    fn galambos_bivariate_matches_direct_formula() {
        for theta in [0.3, 1.0, 2.5] {
            for &(x, y) in &[(1.0, 2.0), (0.2, 0.7), (3.0, 0.1)] {
                let direct = x + y - (f64::powf(x, -theta) + f64::powf(y, -theta)).powf(-1.0 / theta);
                assert!(close(galambos_ell(theta, &[x, y]).unwrap(), direct, 1e-13));
                let s = x + y;
                let via_a = s * galambos_pickands(theta, y / s);
                assert!(close(via_a, direct, 1e-13));
            }
        }
    }

    #[test]
    fn husler_reiss_examples() {
        assert_eq!(husler_reiss_a(f64::INFINITY, 0.3), 1.0);
        assert_eq!(husler_reiss_a(0.0, 0.3), 0.7);
        for lambda in [0.3, 1.0, 2.0] {
            assert!(close(husler_reiss_a(lambda, 0.5), std_normal_cdf(lambda), 1e-15));
        }
        assert!(close(husler_reiss_a(1.0, 0.5), 0.841_344_746_068_542_9, 1e-12));
        assert_eq!(husler_reiss_a(1.0, 0.0), 1.0);
        assert_eq!(husler_reiss_a(1.0, 1.0), 1.0);
    }

    #[test]
    fn t_ev_examples() {
        // t_2(sqrt 2) = 1/2 + sqrt2 / (2 sqrt(2 + 2)) = (2 + sqrt 2) / 4
        let expected = (2.0 + 2f64.sqrt()) / 4.0;
        assert!(close(t_ev_a(1.0, 0.0, 0.5), expected, 1e-12));
        assert_eq!(t_ev_a(3.0, 0.2, 0.0), 1.0);
        assert_eq!(t_ev_a(3.0, 0.2, 1.0), 1.0);
        assert!((t_ev_a(1.0, 0.99999, 0.5) - 0.5).abs() < 0.01);
        for (nu, rho) in [(1.0f64, 0.0f64), (4.0, 0.5), (2.5, -0.3)] {
            let z = ((1.0 + nu) * (1.0 - rho) / (1.0 + rho)).sqrt();
            let want = student_t_cdf(z, nu + 1.0).unwrap();
            assert!(close(t_ev_a(nu, rho, 0.5), want, 1e-13));
        }
        assert!(FamilyParams::t_ev(1.0, 1.0).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let families = [
            FamilyParams::logistic(1.7).unwrap(),
            FamilyParams::logistic(4.0).unwrap(),
            FamilyParams::galambos(0.8).unwrap(),
            FamilyParams::husler_reiss(0.7).unwrap(),
            FamilyParams::t_ev(2.5, 0.3).unwrap(),
        ];
        let h = 1e-5;
        for f in families {
            for t in [0.05, 0.3, 0.5, 0.71, 0.93] {
                let fd1 = (f.pickands(t + h) - f.pickands(t - h)) / (2.0 * h);
                let d1 = f.pickands_derivative(t);
                assert!(close(d1, fd1, 1e-8), "{f:?} t={t}: {d1} vs {fd1}");
                let fd2 = (f.pickands_derivative(t + h) - f.pickands_derivative(t - h)) / (2.0 * h);
                let d2 = f.pickands_second_derivative(t);
                assert!(close(d2, fd2, 1e-5 * fd2.abs().max(1.0)), "{f:?} t={t}: {d2} vs {fd2}");
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(FamilyParams::logistic(0.99).is_err());
        assert!(FamilyParams::logistic(f64::NAN).is_err());
        assert!(FamilyParams::logistic(f64::INFINITY).is_ok());
        assert!(FamilyParams::galambos(-1.0).is_err());
        assert!(FamilyParams::husler_reiss(-0.1).is_err());
        assert!(FamilyParams::t_ev(0.0, 0.1).is_err());
    }

    #[test]
    fn gumbel_generator_attracts_to_itself() {
        for theta in [1.0, 1.5, 2.0, 3.7] {
            let g = ArchimedeanGenerator::gumbel(theta).unwrap();
            let est = archimedean_attractor_theta(&g, AttractorMode::Copula).unwrap();
            assert!(est.stable, "{est:?}");
            assert!(close(est.theta, theta, 1e-6), "{est:?}");
        }
        let est =
            archimedean_attractor_theta(&ArchimedeanGenerator::Independence, AttractorMode::Copula)
                .unwrap();
        assert!(close(est.theta, 1.0, 1e-6));
    }

    #[test]
    fn clayton_survival_attracts_to_galambos() {
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            let g = ArchimedeanGenerator::clayton(alpha).unwrap();
            let est = archimedean_attractor_theta(&g, AttractorMode::SurvivalCopula).unwrap();
            assert!(est.stable, "{est:?}");
            assert!(close(est.theta, 1.0 / alpha, 1e-6), "{est:?}");
            assert!(matches!(est.family(), Some(FamilyParams::Galambos { .. })));
        }
    }

    #[test]
    fn archimedean_cdf_and_conditional() {
        let g = ArchimedeanGenerator::clayton(1.0).unwrap();
        let (u, v) = (0.3f64, 0.6f64);
        let direct = (1.0 / u + 1.0 / v - 1.0).recip();
        assert!(close(g.cdf(u, v), direct, 1e-15));
        let h = 1e-6;
        let fd = (g.cdf(u + h, v) - g.cdf(u - h, v)) / (2.0 * h);
        assert!(close(g.conditional_cdf(u, v), fd, 1e-8));
        let ind = ArchimedeanGenerator::Independence;
        assert!(close(ind.cdf(u, v), u * v, 1e-15));
        assert!(close(ind.conditional_cdf(u, v), v, 1e-14));
    }
}
