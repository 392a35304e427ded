//! Bivariate Pickands dependence functions and their validity checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{central_difference, FamilyParams};

/// Default tolerance for representation checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default tolerance for convexity of projected estimates.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Grid size used to check parametric forms.
pub const VALIDATION_GRID: usize = 501;

/// `n` equispaced points on [0, 1], endpoints exact.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "a grid needs both endpoints");
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { 1.0 } else { k as f64 / m })
        .collect()
}

/// A Pickands function tabulated on a grid `0 = t_0 < ... < t_m = 1`,
/// linearly interpolated in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPickands {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedPickands {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidPickands("grid needs at least two nodes".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
            return Err(Error::InvalidPickands("grid must start at 0 and end at 1".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPickands("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPickands("values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.grid, self.values)
    }

    /// Index `k` of the segment `[t_k, t_{k+1}]` used for `t`.
    fn segment(&self, t: f64) -> usize {
        let last = self.grid.len() - 2;
        self.grid.partition_point(|&g| g <= t).saturating_sub(1).min(last)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let k = self.segment(t);
        let (t0, t1) = (self.grid[k], self.grid[k + 1]);
        if t == t0 {
            return self.values[k];
        }
        if t == t1 {
            return self.values[k + 1];
        }
        let w = (t - t0) / (t1 - t0);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    /// Slope of segment `k`.
    pub fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / (self.grid[k + 1] - self.grid[k])
    }

    /// Right derivative (left derivative at t = 1).
    pub fn derivative(&self, t: f64) -> f64 {
        self.slope(self.segment(t.clamp(0.0, 1.0)))
    }

    /// Second divided differences at the interior nodes.
    pub fn second_divided_differences(&self) -> Vec<(f64, f64)> {
        (1..self.grid.len() - 1)
            .map(|k| {
                let dd = 2.0 * (self.slope(k) - self.slope(k - 1))
                    / (self.grid[k + 1] - self.grid[k - 1]);
                (self.grid[k], dd)
            })
            .collect()
    }
}

/// Bivariate Pickands dependence function `A : [0, 1] -> [1/2, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PickandsFn {
    Parametric(FamilyParams),
    Tabulated(TabulatedPickands),
}

impl From<FamilyParams> for PickandsFn {
    fn from(p: FamilyParams) -> Self {
        Self::Parametric(p)
    }
}

impl From<TabulatedPickands> for PickandsFn {
    fn from(t: TabulatedPickands) -> Self {
        Self::Tabulated(t)
    }
}

impl PickandsFn {
    /// `A = 1`.
    pub fn independence() -> Self {
        Self::Parametric(FamilyParams::Logistic { theta: 1.0 })
    }

    /// `A(t) = max(t, 1 - t)`.
    pub fn comonotone() -> Self {
        Self::Parametric(FamilyParams::Logistic {
            theta: f64::INFINITY,
        })
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        TabulatedPickands::new(grid, values).map(Self::Tabulated)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Parametric(p) => p.pickands(t.clamp(0.0, 1.0)),
            Self::Tabulated(tab) => tab.eval(t),
        }
    }

    /// `A'(t)`, the right derivative where `A` has a kink.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Parametric(p) => p.pickands_derivative(t.clamp(0.0, 1.0)),
            Self::Tabulated(tab) => tab.derivative(t),
        }
    }

    /// `A''(t)` away from kinks; piecewise-linear forms return 0.
    pub fn second_derivative(&self, t: f64) -> f64 {
        match self {
            Self::Parametric(p) => p.pickands_second_derivative(t.clamp(0.0, 1.0)),
            Self::Tabulated(_) => 0.0,
        }
    }

    /// Second derivative by central differences of `A'` (h = 1e-6).
    pub fn second_derivative_numeric(&self, t: f64) -> f64 {
        central_difference(|s| self.derivative(s), t)
    }

    pub fn is_independence(&self) -> bool {
        match self {
            Self::Parametric(p) => p.is_independence(),
            Self::Tabulated(tab) => tab.values().iter().all(|&v| v == 1.0),
        }
    }

    pub fn is_comonotone(&self) -> bool {
        match self {
            Self::Parametric(p) => p.is_comonotone(),
            Self::Tabulated(tab) => {
                tab.grid().contains(&0.5)
                    && tab
                        .grid()
                        .iter()
                        .zip(tab.values())
                        .all(|(&t, &v)| v == t.max(1.0 - t))
            }
        }
    }

    /// Interior points where `A'` jumps, when known.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Parametric(p) if p.is_comonotone() => vec![0.5],
            Self::Parametric(_) => Vec::new(),
            Self::Tabulated(tab) => tab.grid()[1..tab.grid().len() - 1].to_vec(),
        }
    }

    /// Evaluates on `grid`, returning a tabulated copy.
    pub fn tabulate(&self, grid: &[f64]) -> Result<TabulatedPickands> {
        TabulatedPickands::new(grid.to_vec(), grid.iter().map(|&t| self.eval(t)).collect())
    }

    /// Checks endpoints, bounds and convexity. Tabulated forms are checked
    /// at their nodes (exact for a piecewise-linear function); parametric
    /// forms on a 501-point grid.
    pub fn validate(&self, tol: f64) -> ValidityReport {
        match self {
            Self::Tabulated(tab) => validate_tabulated(tab, tol),
            Self::Parametric(_) => self.validate_on_grid(VALIDATION_GRID, tol),
        }
    }

    pub fn validate_on_grid(&self, points: usize, tol: f64) -> ValidityReport {
        let grid = uniform_grid(points.max(3));
        match self.tabulate(&grid) {
            Ok(tab) => validate_tabulated(&tab, tol),
            Err(_) => ValidityReport::not_finite(tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Endpoint,
    LowerBound,
    UpperBound,
    Convexity,
    NotFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t: f64,
    /// Amount by which the constraint is broken.
    pub magnitude: f64,
}

/// Outcome of a validity check; only violations larger than `tol` are
/// recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub tol: f64,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> Option<&Violation> {
        self.violations
            .iter()
            .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn not_finite(tol: f64) -> Self {
        Self {
            tol,
            violations: vec![Violation {
                kind: ViolationKind::NotFinite,
                t: f64::NAN,
                magnitude: f64::INFINITY,
            }],
        }
    }
}

fn validate_tabulated(tab: &TabulatedPickands, tol: f64) -> ValidityReport {
    let mut violations = Vec::new();
    let mut push = |kind, t, magnitude: f64| {
        if magnitude > tol {
            violations.push(Violation { kind, t, magnitude });
        }
    };
    let (grid, values) = (tab.grid(), tab.values());
    let last = grid.len() - 1;
    push(ViolationKind::Endpoint, 0.0, (values[0] - 1.0).abs());
    push(ViolationKind::Endpoint, 1.0, (values[last] - 1.0).abs());
    for (&t, &a) in grid.iter().zip(values) {
        push(ViolationKind::LowerBound, t, t.max(1.0 - t) - a);
        push(ViolationKind::UpperBound, t, a - 1.0);
    }
    for (t, dd) in tab.second_divided_differences() {
        push(ViolationKind::Convexity, t, -dd);
    }
    ValidityReport { tol, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_passes() {
        assert!(PickandsFn::independence().validate(DEFAULT_TOL).passed());
        assert!(PickandsFn::comonotone().validate(DEFAULT_TOL).passed());
    }

    #[test]
    fn value_below_one_half_fails_lower_bound() {
        let a = PickandsFn::tabulated(vec![0.0, 0.5, 1.0], vec![1.0, 0.4, 1.0]).unwrap();
        let r = a.validate(DEFAULT_TOL);
        assert!(!r.passed());
        assert!(r.has(ViolationKind::LowerBound));
        let worst = r.worst().unwrap();
        assert_eq!(worst.t, 0.5);
    }

    #[test]
    fn concave_bump_fails_convexity_at_the_middle_node() {
        let grid = uniform_grid(5);
        let a = PickandsFn::tabulated(grid, vec![1.0, 0.9, 0.95, 0.9, 1.0]).unwrap();
        let r = a.validate(DEFAULT_TOL);
        let convexity: Vec<_> = r
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::Convexity)
            .collect();
        assert_eq!(convexity.len(), 1);
        assert_eq!(convexity[0].t, 0.5);
        // second divided difference 2 * (-0.2 - 0.2) / 0.5 = -1.6
        assert!((convexity[0].magnitude - 1.6).abs() < 1e-12);
    }

    #[test]
    fn endpoint_violation_is_reported() {
        let a = PickandsFn::tabulated(vec![0.0, 0.5, 1.0], vec![0.98, 0.7, 1.0]).unwrap();
        assert!(a.validate(DEFAULT_TOL).has(ViolationKind::Endpoint));
    }

    #[test]
    fn tabulated_interpolation_and_slopes() {
        let a = TabulatedPickands::new(vec![0.0, 0.25, 1.0], vec![1.0, 0.8, 1.0]).unwrap();
        assert_eq!(a.eval(0.25), 0.8);
        assert!((a.eval(0.125) - 0.9).abs() < 1e-15);
        assert!((a.derivative(0.0) + 0.8).abs() < 1e-15);
        // right derivative at the kink
        assert!((a.derivative(0.25) - 0.2 / 0.75).abs() < 1e-15);
        assert!((a.derivative(1.0) - 0.2 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn tabulated_constructor_rejects_bad_grids() {
        assert!(TabulatedPickands::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(TabulatedPickands::new(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedPickands::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0; 4]).is_err());
        assert!(TabulatedPickands::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn uniform_grid_endpoints_are_exact() {
        let g = uniform_grid(101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[50], 0.5);
    }
}
