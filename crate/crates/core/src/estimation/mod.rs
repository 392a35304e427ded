//! Nonparametric estimation of the Pickands function from a bivariate
//! sample, shape-constraint projections, pseudo-likelihood fitting and a
//! goodness-of-fit test for the extreme-value class.

mod evtest;
mod fit;
mod projection;
mod ranks;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pickands::{uniform_grid, PickandsFn, TabulatedPickands};

pub use evtest::{ev_test_kendall, ev_test_statistic, EvTestResult, MIN_BOOTSTRAP, MIN_EV_TEST_N};
pub use fit::{fit_pseudo_ml, pseudo_loglik, FitFamily, FitResult};
pub use projection::{project, project_gcm, project_l2, L2_KKT_TOL};
pub(crate) use ranks::lower_orthant_counts as ranks_lower_orthant_counts;
pub use ranks::{kendall_tau_sample, pseudo_observations, pseudo_observations_column};

/// Number of nodes in the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 101;
/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginMode {
    /// Observations are already uniform on (0, 1).
    KnownUniform,
    /// Margins are replaced by rescaled ranks.
    Ranks,
}

/// Pairs `(x_i, y_i)` together with how their margins are handled.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    x: Vec<f64>,
    y: Vec<f64>,
    mode: MarginMode,
}

impl BivariateSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>, mode: MarginMode) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "need at least 2 observations, got {}",
                x.len()
            )));
        }
        if let Some(bad) = x.iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::DegenerateSample(format!("non-finite observation {bad}")));
        }
        if mode == MarginMode::KnownUniform {
            if let Some(bad) = x.iter().chain(&y).find(|&&v| v <= 0.0 || v >= 1.0) {
                return Err(Error::DegenerateSample(format!(
                    "known-uniform margins need values in (0, 1), got {bad}"
                )));
            }
        }
        Ok(Self { x, y, mode })
    }

    pub fn from_pairs(pairs: &[(f64, f64)], mode: MarginMode) -> Result<Self> {
        let (x, y) = pairs.iter().copied().unzip();
        Self::new(x, y, mode)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mode(&self) -> MarginMode {
        self.mode
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn with_mode(self, mode: MarginMode) -> Result<Self> {
        Self::new(self.x, self.y, mode)
    }

    /// Uniform-scale observations: the data itself for known margins,
    /// pseudo-observations otherwise.
    pub fn uniforms(&self) -> (Vec<f64>, Vec<f64>) {
        match self.mode {
            MarginMode::KnownUniform => (self.x.clone(), self.y.clone()),
            MarginMode::Ranks => (
                pseudo_observations_column(&self.x),
                pseudo_observations_column(&self.y),
            ),
        }
    }

    pub fn exp_marginals(&self) -> Result<ExpMarginals> {
        let (u, v) = self.uniforms();
        ExpMarginals::from_uniforms(&u, &v)
    }
}

/// `S_i = -log U_i`, `T_i = -log V_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpMarginals {
    s: Vec<f64>,
    t: Vec<f64>,
}

impl ExpMarginals {
    pub fn new(s: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if s.len() != t.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: t.len(),
            });
        }
        if s.is_empty() {
            return Err(Error::DegenerateSample("empty sample".into()));
        }
        if let Some(bad) = s.iter().chain(&t).find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::DegenerateSample(format!(
                "exponential margins must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { s, t })
    }

    pub fn from_uniforms(u: &[f64], v: &[f64]) -> Result<Self> {
        Self::new(u.iter().map(|x| -x.ln()).collect(), v.iter().map(|x| -x.ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    fn xi_at(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.s.iter().zip(&self.t).map(move |(&s, &tt)| xi_unchecked(t, s, tt))
    }
}

/// `min(S / (1 - t), T / t)`, with `xi(0) = S` and `xi(1) = T`.
pub fn xi(t: f64, s: f64, tt: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    if !(s > 0.0 && tt > 0.0) {
        return Err(Error::Domain(format!("xi needs positive S and T, got ({s}, {tt})")));
    }
    Ok(xi_unchecked(t, s, tt))
}

fn xi_unchecked(t: f64, s: f64, tt: f64) -> f64 {
    if t <= 0.0 {
        s
    } else if t >= 1.0 {
        tt
    } else {
        (s / (1.0 - t)).min(tt / t)
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Pickands,
    Deheuvels,
    OwDeheuvels,
    HallTajvidi,
    Cfg,
    /// CFG with regression weights in log space.
    CfgWeighted,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        Self::Pickands,
        Self::Deheuvels,
        Self::OwDeheuvels,
        Self::HallTajvidi,
        Self::Cfg,
        Self::CfgWeighted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pickands => "pickands",
            Self::Deheuvels => "deheuvels",
            Self::OwDeheuvels => "ow-deheuvels",
            Self::HallTajvidi => "hall-tajvidi",
            Self::Cfg => "cfg",
            Self::CfgWeighted => "cfg-weighted",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    #[default]
    None,
    Gcm,
    L2,
}

impl Projection {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Gcm => "gcm",
            Self::L2 => "l2",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::None, Self::Gcm, Self::L2].into_iter().find(|p| p.name() == name)
    }
}

/// A Pickands estimate tabulated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub estimator: EstimatorKind,
    pub margins: MarginMode,
    #[serde(default)]
    pub projection: Projection,
    /// Final KKT residual of an L2 projection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kkt_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl EstimateCurve {
    /// The curve as a piecewise-linear Pickands function.
    pub fn to_pickands(&self) -> Result<PickandsFn> {
        if let Some(bad) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPickands(format!("curve value {bad} is not finite")));
        }
        Ok(TabulatedPickands::new(self.grid.clone(), self.values.clone())?.into())
    }

    /// Mean of `|A_hat(t_k) - A(t_k)|` over the grid.
    pub fn mean_abs_error(&self, a: &PickandsFn) -> f64 {
        mean(self.grid.iter().zip(&self.values).map(|(&t, &v)| (v - a.eval(t)).abs()))
    }

    /// `max_k |A_hat(t_k) - A(t_k)|`.
    pub fn sup_error(&self, a: &PickandsFn) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (v - a.eval(t)).abs())
            .fold(0.0, f64::max)
    }

    /// Value at the grid node closest to `t`.
    pub fn value_near(&self, t: f64) -> f64 {
        let k = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map_or(0, |(k, _)| k);
        self.values[k]
    }
}

/// Checks that `grid` runs from 0 to 1 and is strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Domain("estimation grid needs at least two nodes".into()));
    }
    if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::Domain("estimation grid must start at 0 and end at 1".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("estimation grid must be strictly increasing".into()));
    }
    Ok(())
}

/// The default 101-node grid.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID_POINTS)
}

/// Runs `kind` on `sample` over `grid`.
pub fn estimate(sample: &BivariateSample, grid: &[f64], kind: EstimatorKind) -> Result<EstimateCurve> {
    check_grid(grid)?;
    let em = sample.exp_marginals()?;
    let (values, flags) = estimate_exp(&em, grid, kind)?;
    Ok(EstimateCurve {
        grid: grid.to_vec(),
        values,
        estimator: kind,
        margins: sample.mode(),
        projection: Projection::None,
        kkt_residual: None,
        flags,
    })
}

/// Estimator values on `grid` from exponential margins, plus any flags
/// raised along the way.
pub fn estimate_exp(
    em: &ExpMarginals,
    grid: &[f64],
    kind: EstimatorKind,
) -> Result<(Vec<f64>, Vec<String>)> {
    let mut flags = Vec::new();
    let values = match kind {
        EstimatorKind::Pickands => grid.iter().map(|&t| 1.0 / mean(em.xi_at(t))).collect(),
        EstimatorKind::Deheuvels => deheuvels(em, grid),
        EstimatorKind::OwDeheuvels => {
            let (values, fallback) = ow_deheuvels(em, grid);
            if fallback {
                flags.push("singular regression design: fell back to deheuvels weights".into());
            }
            values
        }
        EstimatorKind::HallTajvidi => hall_tajvidi(em, grid),
        EstimatorKind::Cfg => cfg(em, grid),
        EstimatorKind::CfgWeighted => {
            let (values, fallback) = cfg_weighted(em, grid);
            if fallback {
                flags.push("singular regression design: fell back to cfg weights".into());
            }
            values
        }
    };
    Ok((values, flags))
}

fn deheuvels(em: &ExpMarginals, grid: &[f64]) -> Vec<f64> {
    let ms = mean(em.s.iter().copied());
    let mt = mean(em.t.iter().copied());
    grid.iter()
        .map(|&t| 1.0 / (mean(em.xi_at(t)) - t * mt - (1.0 - t) * ms + 1.0))
        .collect()
}

/// Least-squares intercept of `y` on two regressors, or `None` when the
/// regressors are (numerically) collinear.
fn ols_intercept(y: &[f64], x1: &[f64], x2: &[f64]) -> Option<f64> {
    let n = y.len() as f64;
    let (my, m1, m2) = (y.iter().sum::<f64>() / n, x1.iter().sum::<f64>() / n, x2.iter().sum::<f64>() / n);
    let (mut s11, mut s22, mut s12, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..y.len() {
        let (a, b, c) = (x1[i] - m1, x2[i] - m2, y[i] - my);
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
        s1y += a * c;
        s2y += b * c;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * s11 * s22) {
        return None;
    }
    let b1 = (s22 * s1y - s12 * s2y) / det;
    let b2 = (s11 * s2y - s12 * s1y) / det;
    Some(my - b1 * m1 - b2 * m2)
}

fn ow_deheuvels(em: &ExpMarginals, grid: &[f64]) -> (Vec<f64>, bool) {
    let x1: Vec<f64> = em.s.iter().map(|s| s - 1.0).collect();
    let x2: Vec<f64> = em.t.iter().map(|t| t - 1.0).collect();
    let fallback = deheuvels(em, grid);
    let mut singular = false;
    let values = grid
        .iter()
        .zip(&fallback)
        .map(|(&t, &d)| {
            if t == 0.0 || t == 1.0 {
                return 1.0;
            }
            let y: Vec<f64> = em.xi_at(t).collect();
            match ols_intercept(&y, &x1, &x2) {
                Some(b0) => 1.0 / b0,
                None => {
                    singular = true;
                    d
                }
            }
        })
        .collect();
    (values, singular)
}

fn hall_tajvidi(em: &ExpMarginals, grid: &[f64]) -> Vec<f64> {
    let ms = mean(em.s.iter().copied());
    let mt = mean(em.t.iter().copied());
    let scaled = ExpMarginals {
        s: em.s.iter().map(|s| s / ms).collect(),
        t: em.t.iter().map(|t| t / mt).collect(),
    };
    grid.iter()
        .map(|&t| {
            if t == 0.0 || t == 1.0 {
                return 1.0;
            }
            (1.0 / mean(scaled.xi_at(t))).max(t.max(1.0 - t))
        })
        .collect()
}

fn cfg(em: &ExpMarginals, grid: &[f64]) -> Vec<f64> {
    let mls = mean(em.s.iter().map(|s| s.ln()));
    let mlt = mean(em.t.iter().map(|t| t.ln()));
    grid.iter()
        .map(|&t| (-mean(em.xi_at(t).map(f64::ln)) + (1.0 - t) * mls + t * mlt).exp())
        .collect()
}

fn cfg_weighted(em: &ExpMarginals, grid: &[f64]) -> (Vec<f64>, bool) {
    // E[-log xi(t)] = log A(t) + gamma, so -log S - gamma and -log T - gamma
    // are centred control variates
    let x1: Vec<f64> = em.s.iter().map(|s| -s.ln() - EULER_GAMMA).collect();
    let x2: Vec<f64> = em.t.iter().map(|t| -t.ln() - EULER_GAMMA).collect();
    let fallback = cfg(em, grid);
    let mut singular = false;
    let values = grid
        .iter()
        .zip(&fallback)
        .map(|(&t, &c)| {
            if t == 0.0 || t == 1.0 {
                return 1.0;
            }
            let y: Vec<f64> = em.xi_at(t).map(|x| -x.ln()).collect();
            match ols_intercept(&y, &x1, &x2) {
                Some(b0) => (b0 - EULER_GAMMA).exp(),
                None => {
                    singular = true;
                    c
                }
            }
        })
        .collect();
    (values, singular)
}

pub fn estimate_pickands(sample: &BivariateSample, grid: &[f64]) -> Result<EstimateCurve> {
    estimate(sample, grid, EstimatorKind::Pickands)
}

pub fn estimate_deheuvels(sample: &BivariateSample, grid: &[f64]) -> Result<EstimateCurve> {
    estimate(sample, grid, EstimatorKind::Deheuvels)
}

pub fn estimate_ow_deheuvels(sample: &BivariateSample, grid: &[f64]) -> Result<EstimateCurve> {
    if sample.len() < 3 {
        return Err(Error::DegenerateSample("regression weights need n >= 3".into()));
    }
    estimate(sample, grid, EstimatorKind::OwDeheuvels)
}

pub fn estimate_hall_tajvidi(sample: &BivariateSample, grid: &[f64]) -> Result<EstimateCurve> {
    estimate(sample, grid, EstimatorKind::HallTajvidi)
}

pub fn estimate_cfg(sample: &BivariateSample, grid: &[f64]) -> Result<EstimateCurve> {
    estimate(sample, grid, EstimatorKind::Cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn em(s: &[f64], t: &[f64]) -> ExpMarginals {
        ExpMarginals::new(s.to_vec(), t.to_vec()).unwrap()
    }

    fn at(em: &ExpMarginals, kind: EstimatorKind, t: f64) -> f64 {
        estimate_exp(em, &[0.0, t, 1.0], kind).unwrap().0[1]
    }

    #[test]
    fn xi_examples() {
        assert_eq!(xi(0.5, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(xi(0.0, 0.7, 5.0).unwrap(), 0.7);
        assert_eq!(xi(1.0, 0.7, 5.0).unwrap(), 5.0);
        assert!((xi(0.75, 3.0, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(xi(0.5, 0.0, 1.0).is_err());
        assert!(xi(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn single_point_estimates() {
        let e = em(&[1.0], &[1.0]);
        for kind in [EstimatorKind::Pickands, EstimatorKind::Deheuvels, EstimatorKind::HallTajvidi] {
            assert_eq!(at(&e, kind, 0.5), 0.5, "{kind:?}");
        }
        let one = ExpMarginals::from_uniforms(&[(-1f64).exp()], &[(-1f64).exp()]).unwrap();
        assert!((at(&one, EstimatorKind::Pickands, 0.5) - 0.5).abs() < 1e-15);
        let e = em(&[0.5, 1.5], &[2.0, 0.1]);
        assert_eq!(estimate_exp(&e, &[0.0, 1.0], EstimatorKind::Pickands).unwrap().0[0], 1.0);
    }

    #[test]
    fn endpoint_identities_are_exact() {
        let e = em(&[0.3, 2.2, 0.9, 1.7], &[1.1, 0.05, 3.0, 0.4]);
        let grid = uniform_grid(11);
        for kind in [
            EstimatorKind::Deheuvels,
            EstimatorKind::OwDeheuvels,
            EstimatorKind::HallTajvidi,
            EstimatorKind::Cfg,
            EstimatorKind::CfgWeighted,
        ] {
            let (v, _) = estimate_exp(&e, &grid, kind).unwrap();
            assert_eq!((v[0], v[10]), (1.0, 1.0), "{kind:?}");
        }
    }

    #[test]
    fn hall_tajvidi_respects_lower_bound() {
        let e = em(&[0.01, 5.0, 0.2], &[4.0, 0.02, 0.3]);
        let grid = uniform_grid(51);
        let (v, _) = estimate_exp(&e, &grid, EstimatorKind::HallTajvidi).unwrap();
        for (t, a) in grid.iter().zip(v) {
            assert!(a >= t.max(1.0 - t));
        }
    }

    #[test]
    fn cfg_on_comonotone_sample_is_the_upper_bound() {
        let s = [0.3, 1.2, 0.05, 2.5, 0.8];
        let e = em(&s, &s);
        let grid = uniform_grid(21);
        let (v, _) = estimate_exp(&e, &grid, EstimatorKind::Cfg).unwrap();
        for (t, a) in grid.iter().zip(v) {
            assert!((a - t.max(1.0 - t)).abs() < 1e-14, "t={t}: {a}");
        }
    }

    #[test]
    fn ow_intercept_matches_normal_equations() {
        // three points, two regressors plus intercept: exact fit
        let s = [0.5, 1.0, 2.0];
        let tt = [1.5, 0.25, 1.0];
        let e = em(&s, &tt);
        let t = 0.4;
        let y: Vec<f64> = s.iter().zip(&tt).map(|(&a, &b)| xi(t, a, b).unwrap()).collect();
        // solve [1 x1 x2] beta = y directly by Cramer's rule
        let rows: Vec<[f64; 3]> = (0..3).map(|i| [1.0, s[i] - 1.0, tt[i] - 1.0]).collect();
        let det3 = |m: &[[f64; 3]]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let mut num = rows.clone();
        for i in 0..3 {
            num[i][0] = y[i];
        }
        let b0 = det3(&num) / det3(&rows);
        assert!((at(&e, EstimatorKind::OwDeheuvels, t) - 1.0 / b0).abs() < 1e-12);
    }

    #[test]
    fn ow_falls_back_when_design_is_singular() {
        let s = [0.5, 1.0, 2.0];
        let (v, flags) = estimate_exp(&em(&s, &s), &[0.0, 0.5, 1.0], EstimatorKind::OwDeheuvels).unwrap();
        assert_eq!(flags.len(), 1);
        let (d, _) = estimate_exp(&em(&s, &s), &[0.0, 0.5, 1.0], EstimatorKind::Deheuvels).unwrap();
        assert_eq!(v, d);
    }

    #[test]
    fn sample_validation() {
        assert!(BivariateSample::new(vec![0.2], vec![0.3], MarginMode::Ranks).is_err());
        assert!(BivariateSample::new(vec![0.2, 1.0], vec![0.3, 0.5], MarginMode::KnownUniform).is_err());
        assert!(BivariateSample::new(vec![0.2, 3.0], vec![0.3, 0.5], MarginMode::Ranks).is_ok());
        assert!(BivariateSample::new(vec![0.2, 0.4], vec![0.3], MarginMode::Ranks).is_err());
        assert!(check_grid(&[0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(check_grid(&[0.1, 1.0]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(EstimatorKind::parse(k.name()), Some(k));
        }
        assert_eq!(Projection::parse("l2"), Some(Projection::L2));
    }
}
