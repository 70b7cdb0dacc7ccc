//! Linear-Gaussian realisations of a [`Dag`](crate::graph::Dag): sampling,
//! row selection, partial correlation and Fisher-z conditional-independence
//! tests, and a structural-versus-statistical agreement check.
//!
//! Effect sizes produced here are illustrative; no magnitude in this module
//! is an empirical estimate of anything.

mod faithfulness;
mod scm;
mod select;
mod stats;

pub use faithfulness::{check_table, faithfulness_check, FaithfulnessConfig, FaithfulnessReport, TripleCheck};
pub use scm::{build_scm, sample, CoefficientSource, SampleTable, ScmSpec, COEFFICIENT_RANGE, DEFAULT_NOISE_SD};
pub use select::{select, Predicate};
pub use stats::{
    ci_test, fisher_z, partial_correlation, partial_correlation_by_residuals, partial_correlation_from_covariance,
    standard_normal_cdf, standard_normal_quantile, CiTestResult,
};
