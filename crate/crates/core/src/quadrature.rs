//! Numerical integration: fixed Gauss-Legendre rules and adaptive
//! Gauss-Kronrod (7/15) quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
    if n == 1 {
        return vec![(0.0, 2.0)];
    }
    let mut rule = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

/// The 20-point rule, computed once.
pub fn gauss_legendre_20() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// Integrates `f` over `[a, b]` with a fixed Gauss-Legendre rule.
pub fn fixed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

// Kronrod nodes, positive half, with the Gauss nodes at odd indices.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * half, ((resk - resg) * half).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`. Intervals are bisected until the Kronrod/Gauss
/// difference on each piece falls under its share of the tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Integral> {
    const MAX_DEPTH: usize = 40;
    const MAX_EVALS: usize = 2_000_000;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut stack = vec![(a, b, tol, 0usize)];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    while let Some((lo, hi, tol_here, depth)) = stack.pop() {
        let (v, e) = kronrod15(&f, lo, hi);
        evaluations += 15;
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "integrand is not finite on [{lo}, {hi}]"
            )));
        }
        // roundoff floor: no point splitting below this
        let floor = 50.0 * f64::EPSILON * v.abs();
        if e <= tol_here.max(floor) || depth >= MAX_DEPTH {
            value += v;
            error += e;
            continue;
        }
        if evaluations > MAX_EVALS {
            return Err(Error::NoConvergence {
                iterations: evaluations,
                residual: e,
            });
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, 0.5 * tol_here, depth + 1));
        stack.push((lo, mid, 0.5 * tol_here, depth + 1));
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Adaptive integration split at the given interior breakpoints.
pub fn adaptive_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<Integral> {
    let mut points: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let share = tol / (points.len() - 1) as f64;
    let mut total = Integral {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in points.windows(2) {
        let piece = adaptive(&f, w[0], w[1], share)?;
        total.value += piece.value;
        total.error += piece.error;
        total.evaluations += piece.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_20_matches_tabulated_values() {
        // Genz's tvpack table, positive half
        let rule = gauss_legendre_20();
        let expect = [
            (0.993_128_599_185_094_9, 0.017_614_007_139_152_12),
            (0.076_526_521_133_497_33, 0.152_753_387_130_725_9),
        ];
        for (x, w) in expect {
            let got = rule.iter().find(|(n, _)| (n - x).abs() < 1e-12).unwrap();
            assert!((got.1 - w).abs() < 1e-14, "{got:?} vs {w}");
        }
        let total: f64 = rule.iter().map(|p| p.1).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_rules_are_exact_for_polynomials() {
        for n in [1usize, 2, 5, 12] {
            let rule = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got = fixed(|x| x.powi(deg as i32), 0.0, 1.0, &rule);
                let want = 1.0 / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}: {got}");
            }
        }
    }

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        let wsum: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((wsum - 2.0).abs() < 1e-15);
        let gsum: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((gsum - 2.0).abs() < 1e-15);
        for deg in 0..=22 {
            let (v, _) = kronrod15(&|x: f64| x.powi(deg), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn adaptive_handles_kinks_and_smooth_integrands() {
        let v = adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let v = adaptive_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-13).unwrap();
        assert!((v.value - (0.045 + 0.245)).abs() < 1e-14);
        let v = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v.value - 2.0 / 3.0).abs() < 1e-11);
    }
}
