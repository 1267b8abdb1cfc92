//! Kullback–Leibler divergence between extended laws and the power loss of a
//! likelihood ratio test that ignores the Lehmann exponent.
//!
//! All divergences are in nats. Numerical divergences are integrated over the
//! probability scale of the first argument, `t ∈ (0, 1)` with
//! `x = Q_p(t)`, so unbounded supports need no truncation. For the first
//! alternative `Q_p(t) = Q(t^{1/λ})`, which is the `t = u^λ` substitution that
//! tames the `u^{λ−1}` singularity when `λ < 1`.

use serde::{Deserialize, Serialize};

use crate::base::ParametricFamily;
use crate::error::{Error, Result};
use crate::estimate::loglik;
use crate::lehmann::{check_lambda, ExtendedDistribution, Kind, Sample};
use crate::quadrature::integrate_unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A divergence value with its numerical error and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: KlMethod,
    pub meta: String,
}

impl KlResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("kl results serialize")
    }
}

/// `ln p(x) − ln q(x)`. When both share the same base law the base density
/// cancels and only the exponent terms are evaluated.
fn log_ratio(p: &ExtendedDistribution, q: &ExtendedDistribution, x: f64) -> f64 {
    if p.base().same_law(q.base()) {
        p.ln_density_ratio(x) - q.ln_density_ratio(x)
    } else {
        p.ln_pdf(x) - q.ln_pdf(x)
    }
}

fn check_pair(p: &ExtendedDistribution, q: &ExtendedDistribution) -> Result<()> {
    if p.base().family() != q.base().family() || p.support() != q.support() {
        return Err(Error::domain(format!(
            "support mismatch: {} on {} vs {} on {}",
            p,
            p.support(),
            q,
            q.support()
        )));
    }
    Ok(())
}

/// `D_KL(p ‖ q) = ∫ p ln(p/q)`, by adaptive quadrature on the probability
/// scale of `p`.
pub fn kl_numeric(p: &ExtendedDistribution, q: &ExtendedDistribution) -> Result<KlResult> {
    check_pair(p, q)?;
    let meta = format!("D_KL({p} || {q})");
    let integral = integrate_unit(|t| log_ratio(p, q, p.quantile_unchecked(t)), &meta)?;
    Ok(KlResult {
        value: integral.value,
        error_estimate: integral.error_estimate,
        method: KlMethod::Quadrature,
        meta,
    })
}

/// `Δ(λ) = ln λ + (1 − λ)/λ`, the divergence between a first-alternative
/// extension with exponent λ and its base, for a shared θ.
pub fn power_loss_closed(lambda: f64) -> Result<f64> {
    let lambda = check_lambda("lambda", lambda)?;
    Ok(lambda.ln() + (1.0 - lambda) / lambda)
}

/// [`power_loss_closed`] wrapped as a [`KlResult`].
pub fn power_loss_result(lambda: f64) -> Result<KlResult> {
    Ok(KlResult {
        value: power_loss_closed(lambda)?,
        error_estimate: 0.0,
        method: KlMethod::ClosedForm,
        meta: format!("power loss at lambda={lambda}"),
    })
}

/// `ln λ + λ(λ − 1) ∫₀¹ u^{λ−1} ln u du`, evaluated by quadrature.
///
/// This is the divergence before the final integration by parts, so it
/// checks [`power_loss_closed`] along an independent route. Below `λ = 1` the
/// integral is rewritten with `t = u^λ` as `λ⁻² ∫₀¹ ln t dt` to remove the
/// singular factor.
pub fn power_loss_integrand_check(lambda: f64) -> Result<KlResult> {
    let lambda = check_lambda("lambda", lambda)?;
    let meta = format!("integration-by-parts check at lambda={lambda}");
    let integral = if lambda >= 1.0 {
        integrate_unit(|u| u.powf(lambda - 1.0) * u.ln(), &meta)?
    } else {
        let r = integrate_unit(f64::ln, &meta)?;
        let scale = lambda.powi(-2);
        crate::quadrature::Integral {
            value: r.value * scale,
            error_estimate: r.error_estimate * scale,
            subintervals: r.subintervals,
        }
    };
    let factor = lambda * (lambda - 1.0);
    Ok(KlResult {
        value: lambda.ln() + factor * integral.value,
        error_estimate: factor.abs() * integral.error_estimate,
        method: KlMethod::Quadrature,
        meta,
    })
}

/// `−ℓ/n`: the parameter-dependent part of the divergence from the empirical
/// distribution to the model. Minimizing it over λ maximizes the likelihood.
pub fn empirical_kl_objective(
    kind: Kind,
    family: &dyn ParametricFamily,
    theta: &[f64],
    lambda: f64,
    sample: &Sample,
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("sample is empty"));
    }
    Ok(-loglik(kind, family, theta, lambda, sample)? / sample.len() as f64)
}

/// Monte Carlo estimate of `E_p[ln p(X) − ln q(X)]` from `n` draws of `p`.
pub fn mean_log_ratio_mc(
    p: &ExtendedDistribution,
    q: &ExtendedDistribution,
    n: usize,
    seed: u64,
) -> Result<KlResult> {
    check_pair(p, q)?;
    if n < 2 {
        return Err(Error::domain("Monte Carlo needs at least 2 draws"));
    }
    let sample = p.sample(n, seed)?;
    let ratios: Vec<f64> = sample.values.iter().map(|&x| log_ratio(p, q, x)).collect();
    let (mean, se) = mean_and_se(&ratios);
    if !mean.is_finite() {
        return Err(Error::NumericalFailure {
            what: "mean log ratio".to_owned(),
            estimate: mean,
            error_estimate: se,
        });
    }
    Ok(KlResult {
        value: mean,
        error_estimate: se,
        method: KlMethod::MonteCarlo,
        meta: format!("E_p[ln p/q], p={p}, q={q}, n={n}, seed={seed}"),
    })
}

/// Sample mean and its standard error (unbiased variance).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
