//! Sampling from extreme-value and base copulas, componentwise block
//! maxima, and convergence of base copulas to their extreme-value limits.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::EvCopula;
use crate::error::{param, Error, Result};
use crate::estimation::{pseudo_observations_column, ranks_lower_orthant_counts};
use crate::families::{ArchimedeanGenerator, FamilyParams};
use crate::pickands::{uniform_grid, PickandsFn, TabulatedPickands, DEFAULT_TOL};
use crate::rng::{open01, RngSeed};
use crate::special::{
    bivariate_normal_upper, std_normal_cdf, std_normal_upper_quantile, student_t_cdf,
};
use crate::spectral::{Atom, DiscreteSpectralMeasure};

/// Bracket width at which conditional inversion stops.
pub const BISECTION_WIDTH: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 60;
/// Interior margin of the grid used by [`doa_gap`].
pub const DOA_MARGIN: f64 = 0.05;
pub const DOA_GRID: usize = 21;

/// A bivariate copula to draw samples from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", rename_all = "snake_case")]
pub enum BaseCopula {
    Gaussian { rho: f64 },
    StudentT { nu: f64, rho: f64 },
    Archimedean { generator: ArchimedeanGenerator },
    Ev { copula: EvCopula },
}

impl BaseCopula {
    pub fn gaussian(rho: f64) -> Result<Self> {
        let b = Self::Gaussian { rho };
        b.validate()?;
        Ok(b)
    }

    pub fn student_t(nu: f64, rho: f64) -> Result<Self> {
        let b = Self::StudentT { nu, rho };
        b.validate()?;
        Ok(b)
    }

    pub fn ev(params: FamilyParams) -> Result<Self> {
        Ok(Self::Ev {
            copula: EvCopula::family(params, 2)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let check_rho = |rho: f64| {
            if rho > -1.0 && rho < 1.0 {
                Ok(())
            } else {
                Err(param("rho", rho, "must lie in (-1, 1)"))
            }
        };
        match self {
            Self::Gaussian { rho } => check_rho(*rho),
            Self::StudentT { nu, rho } => {
                if !(*nu > 0.0 && nu.is_finite()) {
                    return Err(param("nu", *nu, "must be positive and finite"));
                }
                check_rho(*rho)
            }
            Self::Archimedean { generator } => generator.validate(),
            Self::Ev { copula } => {
                if copula.dim() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        got: copula.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Closed-form distribution function where one exists.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        match self {
            Self::Gaussian { rho } => {
                if u <= 0.0 || v <= 0.0 {
                    return Ok(0.0);
                }
                let (lu, lv) = (-u.ln(), -v.ln());
                Ok((-neg_log_gaussian_cdf(*rho, lu, lv)?).exp())
            }
            Self::Archimedean { generator } => Ok(generator.cdf(u, v)),
            Self::Ev { copula } => Ok(copula.cdf2(u, v)),
            Self::StudentT { .. } => Err(Error::Unsupported(
                "the t copula has no closed-form cdf here; use block maxima".into(),
            )),
        }
    }
}

/// `-log C_rho(u, v)` for the Gaussian copula, given `x = -log u` and
/// `y = -log v`; accurate when `u` and `v` are close to 1.
fn neg_log_gaussian_cdf(rho: f64, x: f64, y: f64) -> Result<f64> {
    let abar = -(-x).exp_m1();
    let bbar = -(-y).exp_m1();
    let h = std_normal_upper_quantile(abar)?;
    let k = std_normal_upper_quantile(bbar)?;
    let joint_upper = bivariate_normal_upper(h, k, rho)?;
    Ok(-(-abar - bbar + joint_upper).ln_1p())
}

/// Smallest `v` in `(0, 1)` with `f(v) >= p`, to within
/// [`BISECTION_WIDTH`], for nondecreasing `f`.
fn invert<F: Fn(f64) -> f64>(f: F, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_WIDTH {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn draw_pairs(n: usize, seed: RngSeed) -> Vec<(f64, f64)> {
    let mut rng = seed.rng();
    (0..n).map(|_| (open01(&mut rng), open01(&mut rng))).collect()
}

/// `dC/du` of a bivariate extreme-value copula with Pickands function `a`.
fn ev_conditional(a: &PickandsFn, u: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v >= 1.0 {
        return 1.0;
    }
    let (x, y) = (-u.ln(), -v.ln());
    let s = x + y;
    let t = y / s;
    let at = a.eval(t);
    ((-s * at).exp() / u * (at - t * a.derivative(t))).clamp(0.0, 1.0)
}

/// `n` pairs from a bivariate extreme-value copula by conditional
/// inversion: `U` uniform, then `V` solving `dC/du(U, V) = P` for an
/// independent uniform `P`.
pub fn sample_ev(c: &EvCopula, n: usize, seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    let a = c.pickands().ok_or(Error::DimensionMismatch {
        expected: 2,
        got: c.dim(),
    })?;
    sample_pickands(a, n, seed)
}

/// [`sample_ev`] for the copula with Pickands function `a`.
pub fn sample_pickands(a: &PickandsFn, n: usize, seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    if let Some(v) = a.validate(DEFAULT_TOL).worst() {
        return Err(Error::InvalidPickands(format!(
            "cannot sample: {:?} violation of size {:.3e} at t = {}",
            v.kind, v.magnitude, v.t
        )));
    }
    Ok(conditional_inversion(a, draw_pairs(n, seed)))
}

/// Maps pairs `(u, p)` to `(u, v)` solving `dC/du(u, v) = p`. Each output
/// pair follows the copula of `a` whenever `u` and `p` are independent
/// uniforms.
pub fn conditional_inversion(a: &PickandsFn, draws: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if a.is_independence() {
        return draws;
    }
    if a.is_comonotone() {
        return draws.into_iter().map(|(u, _)| (u, u)).collect();
    }
    draws
        .into_par_iter()
        .map(|(u, p)| (u, invert(|v| ev_conditional(a, u, v), p)))
        .collect()
}

/// `n` pairs from a base copula.
pub fn sample_base(b: &BaseCopula, n: usize, seed: RngSeed) -> Result<Vec<(f64, f64)>> {
    b.validate()?;
    match b {
        BaseCopula::Gaussian { rho } => {
            let mut rng = seed.rng();
            let r = (1.0 - rho * rho).sqrt();
            Ok((0..n)
                .map(|_| {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    (std_normal_cdf(z1), std_normal_cdf(rho * z1 + r * z2))
                })
                .collect())
        }
        BaseCopula::StudentT { nu, rho } => {
            let mut rng = seed.rng();
            let r = (1.0 - rho * rho).sqrt();
            let chi = ChiSquared::new(*nu).map_err(|_| param("nu", *nu, "must be positive"))?;
            let raw: Vec<(f64, f64, f64)> = (0..n)
                .map(|_| {
                    let z1: f64 = StandardNormal.sample(&mut rng);
                    let z2: f64 = StandardNormal.sample(&mut rng);
                    let w: f64 = chi.sample(&mut rng);
                    (z1, rho * z1 + r * z2, (w / nu).sqrt())
                })
                .collect();
            raw.into_par_iter()
                .map(|(x, y, s)| Ok((student_t_cdf(x / s, *nu)?, student_t_cdf(y / s, *nu)?)))
                .collect()
        }
        BaseCopula::Archimedean { generator } => {
            let draws = draw_pairs(n, seed);
            if let ArchimedeanGenerator::Independence = generator {
                return Ok(draws);
            }
            Ok(draws
                .into_par_iter()
                .map(|(u, p)| (u, invert(|v| generator.conditional_cdf(u, v), p)))
                .collect())
        }
        BaseCopula::Ev { copula } => sample_ev(copula, n, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMaximaConfig {
    pub block_size: usize,
    pub blocks: usize,
    pub seed: RngSeed,
}

impl BlockMaximaConfig {
    pub fn new(block_size: usize, blocks: usize, seed: RngSeed) -> Result<Self> {
        if block_size == 0 || blocks == 0 {
            return Err(Error::Domain("block size and block count must be positive".into()));
        }
        Ok(Self {
            block_size,
            blocks,
            seed,
        })
    }
}

/// Componentwise maxima of consecutive blocks of `block_size` pairs,
/// mapped back to the uniform scale by `u -> u^n`. Trailing pairs that do
/// not fill a block are dropped.
pub fn block_maxima_of(pairs: &[(f64, f64)], block_size: usize) -> Vec<(f64, f64)> {
    let n = block_size.max(1);
    pairs
        .chunks_exact(n)
        .map(|block| {
            let (mu, mv) = block
                .iter()
                .fold((0.0f64, 0.0f64), |(a, b), &(u, v)| (a.max(u), b.max(v)));
            (mu.powf(n as f64), mv.powf(n as f64))
        })
        .collect()
}

/// Draws `blocks * block_size` pairs from `base` and returns the rescaled
/// block maxima.
pub fn block_maxima(base: &BaseCopula, cfg: &BlockMaximaConfig) -> Result<Vec<(f64, f64)>> {
    let total = cfg
        .block_size
        .checked_mul(cfg.blocks)
        .ok_or_else(|| Error::Domain("block maxima sample size overflows".into()))?;
    let pairs = sample_base(base, total, cfg.seed)?;
    Ok(block_maxima_of(&pairs, cfg.block_size))
}

/// `-log C_F(u^(1/n), v^(1/n))^n` for `x = -log u`, `y = -log v`.
fn neg_log_power_cdf(base: &BaseCopula, x: f64, y: f64, n: f64) -> Result<f64> {
    match base {
        BaseCopula::Gaussian { rho } => Ok(n * neg_log_gaussian_cdf(*rho, x / n, y / n)?),
        BaseCopula::Archimedean { generator } => {
            let s = generator.phi_of_neg_log(x / n) + generator.phi_of_neg_log(y / n);
            Ok(n * generator.neg_log_phi_inverse(s))
        }
        BaseCopula::Ev { copula } => {
            let a = copula.pickands().ok_or(Error::DimensionMismatch {
                expected: 2,
                got: copula.dim(),
            })?;
            let s = (x + y) / n;
            Ok(n * s * a.eval(y / (x + y)))
        }
        BaseCopula::StudentT { .. } => Err(Error::Unsupported(
            "domain-of-attraction gap needs a closed-form base cdf; the t copula is handled by block maxima"
                .into(),
        )),
    }
}

/// `sup |C_F(u^(1/n), v^(1/n))^n - C(u, v)|` over a `grid x grid` mesh of
/// `[0.05, 0.95]^2`.
pub fn doa_gap(base: &BaseCopula, c: &EvCopula, n: u64, grid: usize) -> Result<f64> {
    base.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if c.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: c.dim(),
        });
    }
    let g = grid.max(2);
    let pts: Vec<f64> = (0..g)
        .map(|i| DOA_MARGIN + (1.0 - 2.0 * DOA_MARGIN) * i as f64 / (g - 1) as f64)
        .collect();
    let nf = n as f64;
    let mut gap: f64 = 0.0;
    for &u in &pts {
        for &v in &pts {
            let lhs = (-neg_log_power_cdf(base, -u.ln(), -v.ln(), nf)?).exp();
            gap = gap.max((lhs - c.cdf2(u, v)).abs());
        }
    }
    Ok(gap)
}

/// Gap for the triangular array of Gaussian copulas with
/// `rho_n = 1 - lambda^2 / log n` against the Husler-Reiss copula.
pub fn doa_gap_husler_reiss(lambda: f64, n: u64, grid: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("the triangular array needs n >= 2".into()));
    }
    let rho = 1.0 - lambda * lambda / (n as f64).ln();
    let base = BaseCopula::gaussian(rho)?;
    let target = EvCopula::family(FamilyParams::husler_reiss(lambda)?, 2)?;
    doa_gap(&base, &target, n, grid)
}

/// `(1/n) sum_i (C_n(U_i, V_i) - C(U_i, V_i))^2` over pseudo-observations,
/// with `C_n` the empirical copula.
pub fn empirical_copula_distance(pairs: &[(f64, f64)], c: &EvCopula) -> Result<f64> {
    let n = pairs.len();
    if n < 10 {
        return Err(Error::DegenerateSample(format!("need at least 10 pairs, got {n}")));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let u = pseudo_observations_column(&x);
    let v = pseudo_observations_column(&y);
    let counts = ranks_lower_orthant_counts(&u, &v);
    let nf = n as f64;
    let total: f64 = (0..n)
        .map(|i| (counts[i] as f64 / nf - c.cdf2(u[i], v[i])).powi(2))
        .sum();
    Ok(total / nf)
}

/// A random bivariate spectral measure with `atoms` atoms (plus at most
/// one balancing atom at a vertex).
pub fn random_spectral_measure<R: Rng + ?Sized>(
    atoms: usize,
    rng: &mut R,
) -> Result<DiscreteSpectralMeasure> {
    let mut w: Vec<f64> = (0..atoms.max(1)).map(|_| open01(rng)).collect();
    let mut p: Vec<f64> = w.iter().map(|_| open01(rng) + 0.05).collect();
    let mass: f64 = p.iter().sum();
    let first: f64 = p.iter().zip(&w).map(|(p, w)| p * w).sum();
    // bring the mean of the first coordinate to 1/2
    let extra = mass - 2.0 * first;
    if extra > 0.0 {
        w.push(1.0);
        p.push(extra);
    } else if extra < 0.0 {
        w.push(0.0);
        p.push(-extra);
    }
    let scale = 2.0 / p.iter().sum::<f64>();
    let atoms = w
        .into_iter()
        .zip(p)
        .map(|(w, p)| Atom::new(vec![w, 1.0 - w], p * scale))
        .collect();
    DiscreteSpectralMeasure::new(2, atoms)
}

/// A random valid Pickands function: a convex combination of a random
/// parametric family and a random discrete spectral measure, tabulated
/// exactly at the union of a 101-point grid and the measure's kinks.
pub fn random_pickands<R: Rng + ?Sized>(rng: &mut R) -> Result<PickandsFn> {
    let family = match rng.random_range(0..4) {
        0 => FamilyParams::logistic(1.0 + 9.0 * rng.random::<f64>())?,
        1 => FamilyParams::galambos(5.0 * rng.random::<f64>())?,
        2 => FamilyParams::husler_reiss(0.1 + 4.0 * rng.random::<f64>())?,
        _ => FamilyParams::t_ev(0.5 + 8.0 * rng.random::<f64>(), 1.8 * rng.random::<f64>() - 0.9)?,
    };
    let k = rng.random_range(1..6);
    let h = random_spectral_measure(k, rng)?;
    let alpha: f64 = rng.random();
    let mut grid = uniform_grid(101);
    grid.extend(h.atoms().iter().map(|a| a.weights[0]));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let values = grid
        .iter()
        .map(|&t| {
            let spectral = h.ell(&[1.0 - t, t])?;
            Ok(alpha * family.pickands(t) + (1.0 - alpha) * spectral)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TabulatedPickands::new(grid, values)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::kendall_tau_sample;

    fn tau_of(pairs: &[(f64, f64)]) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        kendall_tau_sample(&x, &y)
    }

    #[test]
    fn independence_and_comonotone_branches() {
        let seed = RngSeed::new(11);
        let ind = sample_pickands(&PickandsFn::independence(), 100, seed).unwrap();
        let raw = draw_pairs(100, seed);
        assert_eq!(ind, raw);
        let com = sample_pickands(&PickandsFn::comonotone(), 100, seed).unwrap();
        assert!(com.iter().all(|(u, v)| (u - v).abs() < 1e-9));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let c = EvCopula::family(FamilyParams::husler_reiss(1.0).unwrap(), 2).unwrap();
        let a = sample_ev(&c, 500, RngSeed::new(4)).unwrap();
        let b = sample_ev(&c, 500, RngSeed::new(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_ev(&c, 500, RngSeed::new(4).substream(1)).unwrap());
        let g = BaseCopula::student_t(3.0, 0.4).unwrap();
        assert_eq!(sample_base(&g, 50, RngSeed::new(1)).unwrap(), sample_base(&g, 50, RngSeed::new(1)).unwrap());
    }

    #[test]
    fn logistic_sample_has_expected_tau() {
        let c = EvCopula::family(FamilyParams::logistic(2.0).unwrap(), 2).unwrap();
        let s = sample_ev(&c, 20_000, RngSeed::new(2)).unwrap();
        assert!((tau_of(&s) - 0.5).abs() < 0.02);
        assert!(s.iter().all(|&(u, v)| u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0));
    }

    #[test]
    fn block_maxima_examples() {
        let pairs = draw_pairs(10, RngSeed::new(3));
        assert_eq!(block_maxima_of(&pairs, 1), pairs);
        let com = BaseCopula::ev(FamilyParams::logistic(f64::INFINITY).unwrap()).unwrap();
        let cfg = BlockMaximaConfig::new(7, 20, RngSeed::new(5)).unwrap();
        let m = block_maxima(&com, &cfg).unwrap();
        assert_eq!(m.len(), 20);
        assert!(m.iter().all(|(u, v)| (u - v).abs() < 1e-9));
    }

    #[test]
    fn doa_gap_gumbel_base_is_exact() {
        let base = BaseCopula::Archimedean {
            generator: ArchimedeanGenerator::gumbel(2.0).unwrap(),
        };
        let c = EvCopula::family(FamilyParams::logistic(2.0).unwrap(), 2).unwrap();
        for n in [1, 10, 1000, 100_000] {
            assert!(doa_gap(&base, &c, n, DOA_GRID).unwrap() <= 1e-10);
        }
        let t = BaseCopula::student_t(4.0, 0.5).unwrap();
        assert!(matches!(doa_gap(&t, &c, 10, DOA_GRID), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gaussian_cdf_matches_direct_evaluation() {
        let b = BaseCopula::gaussian(0.5).unwrap();
        let (u, v) = (0.3f64, 0.8f64);
        let direct = crate::special::bivariate_normal_cdf(
            crate::special::std_normal_quantile(u).unwrap(),
            crate::special::std_normal_quantile(v).unwrap(),
            0.5,
        )
        .unwrap();
        assert!((b.cdf(u, v).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn empirical_distance_matches_double_loop() {
        let pairs: Vec<(f64, f64)> = vec![
            (0.3, 1.2), (2.0, 0.1), (-1.0, 0.4), (0.7, 0.9), (1.5, 2.2),
            (0.1, -0.3), (0.9, 0.5), (-0.4, 1.0), (1.1, 1.9), (0.5, 0.2),
        ];
        let c = EvCopula::family(FamilyParams::logistic(1.7).unwrap(), 2).unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let (u, v) = (pseudo_observations_column(&x), pseudo_observations_column(&y));
        let mut brute = 0.0;
        for i in 0..10 {
            let cn = (0..10).filter(|&j| u[j] <= u[i] && v[j] <= v[i]).count() as f64 / 10.0;
            brute += (cn - c.cdf2(u[i], v[i])).powi(2);
        }
        assert_eq!(empirical_copula_distance(&pairs, &c).unwrap(), brute / 10.0);
        assert!(empirical_copula_distance(&pairs[..5], &c).is_err());
    }

    #[test]
    fn random_pickands_are_valid() {
        let mut rng = RngSeed::new(9).rng();
        for _ in 0..50 {
            let a = random_pickands(&mut rng).unwrap();
            let r = a.validate(DEFAULT_TOL);
            assert!(r.passed(), "{:?}", r.worst());
        }
    }
}
