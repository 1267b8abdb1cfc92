//! Probability distributions generated by Lehmann alternatives.
//!
//! A base law `F` is extended to `G₁ = F^λ` (first alternative) or
//! `G₂ = 1 − (1 − F)^λ` (second alternative). This crate evaluates and samples
//! these laws, computes their moments, fits them by maximum likelihood,
//! measures Kullback–Leibler divergences between them, and simulates the
//! power lost by a likelihood ratio test that ignores the exponent.
//!
//! ```
//! use lehmann_core::{BaseDistribution, ExtendedDistribution, power_loss_closed};
//!
//! let g = ExtendedDistribution::first(BaseDistribution::uniform(), 2.0).unwrap();
//! assert!((g.cdf(0.5) - 0.25).abs() < 1e-15);
//! assert!((power_loss_closed(2.0).unwrap() - 0.193147).abs() < 1e-6);
//! ```

pub mod base;
pub mod descriptor;
pub mod error;
pub mod estimate;
pub mod infotheory;
pub mod lehmann;
pub mod lrt_sim;
pub mod optimize;
pub mod quadrature;
pub mod rng;

pub use base::{BaseDistribution, ContinuousLaw, Family, FamilyRegistry, ParametricFamily, Support};
pub use descriptor::{parse_base, parse_descriptor, parse_extended, Descriptor};
pub use error::{Error, ParseError, Result};
pub use estimate::{
    default_bounds, fit_full, fit_restricted, loglik, mle_lambda, FitOptions, FitResult,
};
pub use infotheory::{
    empirical_kl_objective, kl_numeric, mean_log_ratio_mc, power_loss_closed,
    power_loss_integrand_check, KlMethod, KlResult,
};
pub use lehmann::{sample_base, ExtendedDistribution, Kind, Sample};
pub use lrt_sim::{calibrate, lrt_statistics, run_power_study, LrtReport, SimConfig};
pub use optimize::Bound;
