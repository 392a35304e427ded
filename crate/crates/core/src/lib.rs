//! Extreme-value copulas: representations, parametric families, dependence
//! coefficients, nonparametric estimation of the Pickands dependence
//! function, and simulation.

// `!(x >= a)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copula;
pub mod dependence;
pub mod error;
pub mod estimation;
pub mod families;
pub mod pickands;
pub mod quadrature;
pub mod rng;
pub mod serde_ext;
pub mod simulation;
pub mod special;
pub mod spectral;
pub mod tail;

pub use copula::{cdf_from_pickands, copula_density, max_stability_gap, EvCopula};
pub use dependence::{
    extremal_coefficient, kendall_distribution, kendall_tau, lower_tail_dep, spearman_rho,
    tau_rho_inequality, upper_tail_dep, DependenceReport,
};
pub use error::{Error, Result};
pub use estimation::{
    estimate, fit_pseudo_ml, project_gcm, project_l2, BivariateSample, EstimateCurve,
    EstimatorKind, FitFamily, FitResult, MarginMode, Projection,
};
pub use families::{
    archimedean_attractor_theta, ArchimedeanGenerator, AttractorEstimate, AttractorMode,
    FamilyParams,
};
pub use pickands::{
    uniform_grid, PickandsFn, TabulatedPickands, ValidityReport, Violation, ViolationKind,
};
pub use rng::{RngSeed, DEFAULT_SEED};
pub use simulation::{
    block_maxima, doa_gap, empirical_copula_distance, sample_base, sample_ev, BaseCopula,
    BlockMaximaConfig,
};
pub use spectral::{Atom, DiscreteSpectralMeasure};
pub use tail::{ell_from_pickands, pickands_from_ell, TailDepFn};
