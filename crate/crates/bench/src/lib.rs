//! Fixtures shared by the criterion benchmarks.

use lehmann_core::{BaseDistribution, ExtendedDistribution, Family, Kind, SimConfig};

/// The three bundled bases at representative parameters.
pub fn bases() -> Vec<(&'static str, BaseDistribution)> {
    vec![
        ("uniform", BaseDistribution::uniform()),
        ("exponential", BaseDistribution::exponential(1.0).expect("valid rate")),
        ("weibull", BaseDistribution::weibull(2.0, 1.0).expect("valid shape and scale")),
    ]
}

pub fn extended(base: &BaseDistribution, lambda: f64, kind: Kind) -> ExtendedDistribution {
    ExtendedDistribution::new(base.clone(), lambda, kind).expect("valid exponent")
}

/// A small power study: one exponential cell, minimum replication counts.
pub fn small_study() -> SimConfig {
    SimConfig {
        kind: Kind::FirstAlternative,
        base: Family::Exponential,
        theta0: vec![1.0],
        lambda_grid: vec![2.0],
        n: 50,
        replications: 100,
        alpha: 0.05,
        seed: 1,
        calibration_replications: 1000,
        theta_lower: None,
        theta_upper: None,
    }
}
