//! Test of the extreme-value hypothesis through the Kendall distribution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::kendall_distribution;
use crate::error::{Error, Result};
use crate::families::FamilyParams;
use crate::pickands::PickandsFn;
use crate::rng::RngSeed;
use crate::simulation::sample_pickands;

use super::ranks::{kendall_tau_sample, lower_orthant_counts};
use super::BivariateSample;

pub const MIN_EV_TEST_N: usize = 50;
pub const MIN_BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub tau_hat: f64,
    /// Logistic parameter matched to `tau_hat` for the bootstrap.
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub bootstrap_theta: f64,
    pub replicates: usize,
    pub n: usize,
    /// `tau_hat < 0`: no extreme-value copula fits, rejected without
    /// resampling.
    pub rejected_immediately: bool,
    pub note: String,
}

/// `sum_i (K_n(W_i) - K(W_i))^2` with `W_i` the pseudo-values of the
/// sample, `K_n` their empirical cdf and `K` the extreme-value Kendall
/// distribution at `tau`.
pub fn ev_test_statistic(x: &[f64], y: &[f64], tau: f64) -> f64 {
    let n = x.len();
    let counts = lower_orthant_counts(x, y);
    let mut w: Vec<f64> = counts.iter().map(|&c| (c - 1) as f64 / (n - 1) as f64).collect();
    w.sort_by(f64::total_cmp);
    let mut stat = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && w[j] == w[i] {
            j += 1;
        }
        let kn = j as f64 / n as f64;
        let d = kn - kendall_distribution(tau, w[i]);
        stat += (j - i) as f64 * d * d;
        i = j;
    }
    stat
}

fn logistic_for_tau(tau: f64) -> (f64, PickandsFn) {
    let theta = if tau >= 1.0 { f64::INFINITY } else { 1.0 / (1.0 - tau.max(0.0)) };
    (theta, PickandsFn::Parametric(FamilyParams::Logistic { theta }))
}

/// Kendall-distribution test with a parametric bootstrap from the logistic
/// family matched to the sample Kendall tau. Replicate `b` uses the
/// substream `seed.derive(b)`.
pub fn ev_test_kendall(sample: &BivariateSample, b: usize, seed: RngSeed) -> Result<EvTestResult> {
    let n = sample.len();
    if n < MIN_EV_TEST_N {
        return Err(Error::DegenerateSample(format!(
            "the test needs at least {MIN_EV_TEST_N} observations, got {n}"
        )));
    }
    if b < MIN_BOOTSTRAP {
        return Err(Error::Domain(format!(
            "the test needs at least {MIN_BOOTSTRAP} bootstrap replicates, got {b}"
        )));
    }
    let (x, y) = (sample.x(), sample.y());
    let tau_hat = kendall_tau_sample(x, y);
    let (theta, a) = logistic_for_tau(tau_hat);
    let statistic = ev_test_statistic(x, y, tau_hat.max(0.0));
    if tau_hat < 0.0 {
        return Ok(EvTestResult {
            statistic,
            p_value: 0.0,
            tau_hat,
            bootstrap_theta: theta,
            replicates: 0,
            n,
            rejected_immediately: true,
            note: "negative Kendall tau lies outside the extreme-value class".into(),
        });
    }
    let boot: Vec<f64> = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            let pairs = sample_pickands(&a, n, seed.derive(r))?;
            let (bx, by): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let tau_b = kendall_tau_sample(&bx, &by);
            Ok(ev_test_statistic(&bx, &by, tau_b.max(0.0)))
        })
        .collect::<Result<_>>()?;
    let exceed = boot.iter().filter(|&&t| t >= statistic).count();
    Ok(EvTestResult {
        statistic,
        p_value: (1 + exceed) as f64 / (b + 1) as f64,
        tau_hat,
        bootstrap_theta: theta,
        replicates: b,
        n,
        rejected_immediately: false,
        note: "bootstrap null is the logistic copula matched to the sample tau, one member of the extreme-value class".into(),
    })
}
