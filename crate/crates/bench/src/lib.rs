//! Fixtures shared by the criterion benchmarks under `benches/`.

use evcop_core::{sample_ev, BivariateSample, EvCopula, FamilyParams, MarginMode, RngSeed};

/// A rank-mode sample of size `n` from the logistic copula.
pub fn logistic_sample(theta: f64, n: usize) -> BivariateSample {
    let c = EvCopula::family(FamilyParams::Logistic { theta }, 2).expect("valid family");
    let pairs = sample_ev(&c, n, RngSeed::new(7)).expect("sampling succeeds");
    BivariateSample::from_pairs(&pairs, MarginMode::Ranks).expect("non-degenerate sample")
}
