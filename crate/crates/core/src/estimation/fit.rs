//! Parametric fitting by maximum pseudo-likelihood.

use serde::{Deserialize, Serialize};

use crate::copula::copula_density;
use crate::error::{Error, Result};
use crate::families::FamilyParams;
use crate::pickands::PickandsFn;

use super::BivariateSample;

/// Half the 95% chi-square(1) quantile: a boundary value whose
/// pseudo-loglikelihood is within this of the optimum is not rejected.
const BOUNDARY_LR: f64 = 1.920_729_410_347_062;
const SCAN_POINTS: usize = 31;
const GOLDEN_TOL: f64 = 1e-8;
const NM_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFamily {
    Logistic,
    Galambos,
    HuslerReiss,
    TEv,
}

impl FitFamily {
    pub fn name(self) -> &'static str {
        match self {
            Self::Logistic => "logistic",
            Self::Galambos => "galambos",
            Self::HuslerReiss => "husler_reiss",
            Self::TEv => "t_ev",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::Logistic, Self::Galambos, Self::HuslerReiss, Self::TEv]
            .into_iter()
            .find(|f| f.name() == name)
    }

    /// Box in the unconstrained coordinates searched by the optimizer.
    fn bounds(self) -> Vec<(f64, f64)> {
        match self {
            Self::Logistic => vec![(-9.0, 4.0)],
            Self::Galambos => vec![(-7.0, 4.0)],
            Self::HuslerReiss => vec![(-4.0, 3.0)],
            Self::TEv => vec![(-2.0, 4.0), (-3.0, 3.0)],
        }
    }

    /// Natural parameters from unconstrained coordinates.
    fn natural(self, eta: &[f64]) -> Vec<f64> {
        match self {
            Self::Logistic => vec![1.0 + eta[0].exp()],
            Self::Galambos | Self::HuslerReiss => vec![eta[0].exp()],
            Self::TEv => vec![eta[0].exp(), eta[1].tanh()],
        }
    }

    fn params(self, natural: &[f64]) -> Result<FamilyParams> {
        match self {
            Self::Logistic => FamilyParams::logistic(natural[0]),
            Self::Galambos => FamilyParams::galambos(natural[0]),
            Self::HuslerReiss => FamilyParams::husler_reiss(natural[0]),
            Self::TEv => FamilyParams::t_ev(natural[0], natural[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: FitFamily,
    pub params: FamilyParams,
    /// Natural parameter values: `theta`, `theta`, `lambda` or `(nu, rho)`.
    pub estimate: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the optimum touches the search range or a range-end value
    /// is not rejected by a 5% likelihood-ratio comparison.
    pub at_boundary: bool,
    /// Standard errors from the inverse Hessian of the pseudo-loglikelihood,
    /// ignoring the effect of estimating the margins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_naive: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `sum_i log c(u_i, v_i)`; `-inf` when the density vanishes or fails.
pub fn pseudo_loglik(params: &FamilyParams, u: &[f64], v: &[f64]) -> f64 {
    let a = PickandsFn::Parametric(*params);
    let mut total = 0.0;
    for (&x, &y) in u.iter().zip(v) {
        match copula_density(&a, x, y) {
            Ok(c) if c > 0.0 && c.is_finite() => total += c.ln(),
            _ => return f64::NEG_INFINITY,
        }
    }
    total
}

struct Objective<'a> {
    family: FitFamily,
    u: &'a [f64],
    v: &'a [f64],
    evaluations: usize,
}

impl Objective<'_> {
    fn loglik_natural(&self, natural: &[f64]) -> f64 {
        match self.family.params(natural) {
            Ok(p) => pseudo_loglik(&p, self.u, self.v),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn loglik(&mut self, eta: &[f64]) -> f64 {
        self.evaluations += 1;
        let ll = self.loglik_natural(&self.family.natural(eta));
        if ll.is_nan() {
            f64::NEG_INFINITY
        } else {
            ll
        }
    }
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, bool, usize) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while (b - a).abs() > GOLDEN_TOL * (1.0 + a.abs().max(b.abs())) {
        iterations += 1;
        if iterations > 200 {
            return (0.5 * (a + b), false, iterations);
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (0.5 * (a + b), true, iterations)
}

/// Nelder-Mead maximization inside a box; points are clamped to the box.
fn nelder_mead_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    step: f64,
    bounds: &[(f64, f64)],
) -> (Vec<f64>, bool, usize) {
    let clamp = |p: Vec<f64>| -> Vec<f64> {
        p.iter().zip(bounds).map(|(x, (lo, hi))| x.clamp(*lo, *hi)).collect()
    };
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), -f(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if p[i] + step <= bounds[i].1 { step } else { -step };
        let p = clamp(p);
        let fp = -f(&p);
        simplex.push((p, fp));
    }
    for iter in 0..NM_MAX_ITER {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() < 1e-10 && size < 1e-7 {
            return (simplex[0].0.clone(), true, iter);
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |coef: f64, worst: &[f64]| -> Vec<f64> {
            clamp(centroid.iter().zip(worst).map(|(c, w)| c + coef * (w - c)).collect())
        };
        let worst = simplex[n].0.clone();
        let r = along(-1.0, &worst);
        let fr = -f(&r);
        if fr < simplex[0].1 {
            let e = along(-2.0, &worst);
            let fe = -f(&e);
            simplex[n] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (r, fr);
        } else {
            let k = if fr < simplex[n].1 { along(-0.5, &worst) } else { along(0.5, &worst) };
            let fk = -f(&k);
            if fk < simplex[n].1.min(fr) {
                simplex[n] = (k, fk);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = best.iter().zip(&item.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let fp = -f(&p);
                    *item = (p, fp);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0.clone(), false, NM_MAX_ITER)
}

/// Inverse-Hessian standard errors in natural coordinates.
fn naive_se(obj: &Objective<'_>, theta: &[f64]) -> Option<Vec<f64>> {
    let k = theta.len();
    let h: Vec<f64> = theta.iter().map(|t| 1e-4 * t.abs().max(0.1)).collect();
    let at = |d: &[(usize, f64)]| {
        let mut p = theta.to_vec();
        for &(i, s) in d {
            p[i] += s * h[i];
        }
        obj.loglik_natural(&p)
    };
    let f0 = at(&[]);
    let mut hess = vec![vec![0.0; k]; k];
    for i in 0..k {
        hess[i][i] = (at(&[(i, 1.0)]) - 2.0 * f0 + at(&[(i, -1.0)])) / (h[i] * h[i]);
        for j in 0..i {
            let v = (at(&[(i, 1.0), (j, 1.0)]) - at(&[(i, 1.0), (j, -1.0)])
                - at(&[(i, -1.0), (j, 1.0)])
                + at(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let cov_diag = match k {
        1 => vec![-1.0 / hess[0][0]],
        2 => {
            let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
            vec![-hess[1][1] / det, -hess[0][0] / det]
        }
        _ => return None,
    };
    cov_diag
        .into_iter()
        .map(|v| (v > 0.0 && v.is_finite()).then(|| v.sqrt()))
        .collect()
}

/// Maximizes the pseudo-loglikelihood of `family` on the sample's
/// uniform-scale observations: a coarse scan followed by golden section
/// (one parameter) or Nelder-Mead (two).
pub fn fit_pseudo_ml(sample: &BivariateSample, family: FitFamily) -> Result<FitResult> {
    let (u, v) = sample.uniforms();
    let mut notes = Vec::new();
    if sample.len() < 20 {
        notes.push(format!("small sample (n = {}): estimates are unreliable", sample.len()));
    }
    let mut obj = Objective {
        family,
        u: &u,
        v: &v,
        evaluations: 0,
    };
    let bounds = family.bounds();
    let (eta, converged, iterations, at_edge) = if bounds.len() == 1 {
        let (lo, hi) = bounds[0];
        let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
        let scan: Vec<f64> = (0..SCAN_POINTS).map(|i| obj.loglik(&[lo + step * i as f64])).collect();
        let best = (0..SCAN_POINTS).max_by(|&a, &b| scan[a].total_cmp(&scan[b])).unwrap_or(0);
        let a = lo + step * best.saturating_sub(1) as f64;
        let b = lo + step * (best + 1).min(SCAN_POINTS - 1) as f64;
        let (x, ok, it) = golden_max(|x| obj.loglik(&[x]), a, b);
        let edge = (x - lo) < step || (hi - x) < step;
        let ll_hat = obj.loglik(&[x]);
        let plausible = scan[0].max(scan[SCAN_POINTS - 1]) >= ll_hat - BOUNDARY_LR;
        (vec![x], ok, SCAN_POINTS + it, edge || plausible)
    } else {
        let per = 9;
        let mut best = (vec![0.0; 2], f64::NEG_INFINITY);
        for i in 0..per {
            for j in 0..per {
                let p = [
                    bounds[0].0 + (bounds[0].1 - bounds[0].0) * i as f64 / (per - 1) as f64,
                    bounds[1].0 + (bounds[1].1 - bounds[1].0) * j as f64 / (per - 1) as f64,
                ];
                let ll = obj.loglik(&p);
                if ll > best.1 {
                    best = (p.to_vec(), ll);
                }
            }
        }
        let (x, ok, it) = nelder_mead_max(|p| obj.loglik(p), &best.0, 0.3, &bounds);
        let edge = x
            .iter()
            .zip(&bounds)
            .any(|(x, (lo, hi))| (x - lo) < 0.01 * (hi - lo) || (hi - x) < 0.01 * (hi - lo));
        (x, ok, per * per + it, edge)
    };
    let natural = family.natural(&eta);
    let loglik = obj.loglik(&eta);
    if !loglik.is_finite() {
        return Err(Error::DegenerateSample(
            "pseudo-likelihood is not finite anywhere in the search range".into(),
        ));
    }
    let se_naive = naive_se(&obj, &natural);
    Ok(FitResult {
        family,
        params: family.params(&natural)?,
        estimate: natural,
        loglik,
        converged,
        iterations,
        at_boundary: at_edge,
        se_naive,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_a_parabola_peak() {
        let (x, ok, _) = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0);
        assert!(ok && (x - 0.3).abs() < 1e-7);
    }

    #[test]
    fn nelder_mead_finds_a_quadratic_peak() {
        let f = |p: &[f64]| -(p[0] - 1.0).powi(2) - 3.0 * (p[1] + 0.5).powi(2) - p[0] * p[1];
        let (x, ok, _) = nelder_mead_max(f, &[0.0, 0.0], 0.3, &[(-5.0, 5.0), (-5.0, 5.0)]);
        // gradient vanishes at (15/11, -8/11)
        assert!(ok);
        assert!((x[0] - 15.0 / 11.0).abs() < 1e-5 && (x[1] + 8.0 / 11.0).abs() < 1e-5, "{x:?}");
    }

    #[test]
    fn family_names_round_trip() {
        for f in [FitFamily::Logistic, FitFamily::Galambos, FitFamily::HuslerReiss, FitFamily::TEv] {
            assert_eq!(FitFamily::parse(f.name()), Some(f));
        }
    }

    #[test]
    fn independence_loglik_is_zero() {
        let p = FamilyParams::logistic(1.0).unwrap();
        assert!(pseudo_loglik(&p, &[0.2, 0.7], &[0.4, 0.1]).abs() < 1e-12);
    }
}
