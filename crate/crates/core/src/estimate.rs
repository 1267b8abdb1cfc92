//! Log-likelihoods and maximum-likelihood fits for Lehmann-extended families.
//!
//! For fixed θ the exponent has a closed-form MLE,
//! `λ̂(θ) = −n / Σ ln F(x_j | θ)` (first alternative) or with `ln(1 − F)`
//! (second alternative). Joint fits maximize the profile `ℓ(λ̂(θ), θ)` over a
//! box of θ values with [`maximize_box`].

use serde::{Deserialize, Serialize};

use crate::base::{BaseDistribution, ParametricFamily};
use crate::error::{Error, Result};
use crate::lehmann::{check_lambda, Kind, Sample};
use crate::optimize::{maximize_box, Bound, SearchSettings};

/// Sums below this magnitude make the closed-form exponent blow up.
const DEGENERATE_SUM: f64 = 1e-300;

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda_hat: f64,
    pub theta_hat: Vec<f64>,
    pub loglik: f64,
    pub n: usize,
    /// `(θ, profile log-likelihood)` at each accepted improvement, when requested.
    #[serde(skip)]
    pub profile_trace: Option<Vec<(Vec<f64>, f64)>>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit results serialize")
    }
}

fn check_support(base: &BaseDistribution, sample: &Sample) -> Result<()> {
    let support = base.support();
    match sample
        .values
        .iter()
        .position(|&x| !support.contains(x) || x.is_nan())
    {
        Some(index) => Err(Error::OutsideSupport {
            index,
            value: sample.values[index],
            support: support.to_string(),
        }),
        None => Ok(()),
    }
}

/// `(Σ ln f(x_j), Σ ln tail(x_j))` where the tail is `F` or `1 − F`.
fn log_sums(kind: Kind, base: &BaseDistribution, sample: &Sample) -> (f64, f64) {
    sample.values.iter().fold((0.0, 0.0), |(lf, lt), &x| {
        (lf + base.ln_pdf(x), lt + kind.ln_tail(base, x))
    })
}

fn assemble(n: usize, lambda: f64, sum_ln_f: f64, sum_ln_tail: f64) -> f64 {
    let excess = if lambda == 1.0 {
        0.0
    } else {
        (lambda - 1.0) * sum_ln_tail
    };
    n as f64 * lambda.ln() + sum_ln_f + excess
}

/// `n ln λ + Σ ln f(x_j) + (λ − 1) Σ ln F(x_j)` for the first alternative,
/// with `ln(1 − F(x_j))` for the second.
pub fn loglik(
    kind: Kind,
    family: &dyn ParametricFamily,
    theta: &[f64],
    lambda: f64,
    sample: &Sample,
) -> Result<f64> {
    let lambda = check_lambda("lambda", lambda)?;
    let base = family.build(theta)?;
    loglik_base(kind, &base, lambda, sample)
}

/// [`loglik`] for an already-built base law.
pub fn loglik_base(kind: Kind, base: &BaseDistribution, lambda: f64, sample: &Sample) -> Result<f64> {
    check_support(base, sample)?;
    let (sum_ln_f, sum_ln_tail) = log_sums(kind, base, sample);
    Ok(assemble(sample.len(), lambda, sum_ln_f, sum_ln_tail))
}

fn closed_form_lambda(n: usize, sum_ln_tail: f64) -> Result<f64> {
    if !sum_ln_tail.is_finite() || sum_ln_tail.abs() < DEGENERATE_SUM {
        return Err(Error::DegenerateSample(format!(
            "sum of log tail probabilities is {sum_ln_tail}; some F(x) is saturated at 0 or 1"
        )));
    }
    Ok(-(n as f64) / sum_ln_tail)
}

/// Closed-form MLE of λ for fixed θ.
pub fn mle_lambda(
    kind: Kind,
    family: &dyn ParametricFamily,
    theta: &[f64],
    sample: &Sample,
) -> Result<f64> {
    let base = family.build(theta)?;
    mle_lambda_base(kind, &base, sample)
}

/// [`mle_lambda`] for an already-built base law.
pub fn mle_lambda_base(kind: Kind, base: &BaseDistribution, sample: &Sample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("sample is empty"));
    }
    check_support(base, sample)?;
    let sum = sample
        .values
        .iter()
        .map(|&x| kind.ln_tail(base, x))
        .sum::<f64>();
    closed_form_lambda(sample.len(), sum)
}

/// Options shared by [`fit_full_with`] and [`fit_restricted_with`].
#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    pub search: SearchSettings,
    pub record_trace: bool,
    /// Extra optimizer starting points, tried after the Halton starts.
    pub extra_starts: Vec<Vec<f64>>,
}

fn check_bounds(family: &dyn ParametricFamily, bounds: &[Bound]) -> Result<()> {
    if bounds.len() != family.dim() {
        return Err(Error::domain(format!(
            "{} has {} parameter(s) but {} bound(s) were given",
            family.name(),
            family.dim(),
            bounds.len()
        )));
    }
    for (name, b) in family.param_names().iter().zip(bounds) {
        if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
            return Err(Error::domain(format!(
                "bound for `{name}` must be a finite interval with lower < upper, got [{}, {}]",
                b.lower, b.upper
            )));
        }
    }
    let lower: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
    let upper: Vec<f64> = bounds.iter().map(|b| b.upper).collect();
    family
        .build(&lower)
        .and_then(|_| family.build(&upper))
        .map(|_| ())
        .map_err(|e| Error::domain(format!("bounds leave the parameter space: {e}")))
}

fn check_not_degenerate(family: &dyn ParametricFamily, sample: &Sample) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::domain("sample is empty"));
    }
    let first = sample.values[0];
    if family.dim() > 0 && sample.values.iter().all(|&x| x == first) {
        return Err(Error::DegenerateSample(format!(
            "all {} observations equal {first}",
            sample.len()
        )));
    }
    Ok(())
}

fn boundary_warnings(family: &dyn ParametricFamily, at_bound: &[usize]) -> Vec<String> {
    at_bound
        .iter()
        .map(|&i| {
            format!(
                "{} estimate hit a bound of the search box",
                family.param_names()[i]
            )
        })
        .collect()
}

/// Maximizes `objective(θ)` over the box, returning (θ, trace, warnings).
fn search(
    family: &dyn ParametricFamily,
    bounds: &[Bound],
    options: &FitOptions,
    mut objective: impl FnMut(&BaseDistribution) -> f64,
) -> (Vec<f64>, Option<Vec<(Vec<f64>, f64)>>, Vec<String>) {
    let mut trace = options.record_trace.then(Vec::new);
    let mut best_seen = f64::NEG_INFINITY;
    let max = maximize_box(
        |theta| {
            let value = family
                .build(theta)
                .map(|base| objective(&base))
                .unwrap_or(f64::NEG_INFINITY);
            if let Some(trace) = trace.as_mut() {
                if value > best_seen {
                    best_seen = value;
                    trace.push((theta.to_vec(), value));
                }
            }
            value
        },
        bounds,
        options.search,
        &options.extra_starts,
    );
    let warnings = boundary_warnings(family, &max.at_bound);
    (max.argmax, trace, warnings)
}

/// Unrestricted fit of `(λ, θ)` over `bounds` with default options.
pub fn fit_full(
    kind: Kind,
    family: &dyn ParametricFamily,
    sample: &Sample,
    bounds: &[Bound],
) -> Result<FitResult> {
    fit_full_with(kind, family, sample, bounds, &FitOptions::default())
}

/// Unrestricted fit: maximizes the profile `ℓ(λ̂(θ), θ)` over the box.
pub fn fit_full_with(
    kind: Kind,
    family: &dyn ParametricFamily,
    sample: &Sample,
    bounds: &[Bound],
    options: &FitOptions,
) -> Result<FitResult> {
    check_bounds(family, bounds)?;
    check_not_degenerate(family, sample)?;
    family.build(&bounds.iter().map(|b| b.lower).collect::<Vec<_>>())
        .and_then(|base| check_support(&base, sample))?;

    let n = sample.len();
    let (theta_hat, profile_trace, warnings) = search(family, bounds, options, |base| {
        let (sum_ln_f, sum_ln_tail) = log_sums(kind, base, sample);
        match closed_form_lambda(n, sum_ln_tail) {
            Ok(lambda) => assemble(n, lambda, sum_ln_f, sum_ln_tail),
            Err(_) => f64::NEG_INFINITY,
        }
    });

    let base = family.build(&theta_hat)?;
    let lambda_hat = mle_lambda_base(kind, &base, sample)?;
    let loglik = loglik_base(kind, &base, lambda_hat, sample)?;
    Ok(FitResult {
        lambda_hat,
        theta_hat,
        loglik,
        n,
        profile_trace,
        warnings,
    })
}

/// Fit of θ with λ held at `lambda_fixed`, with default options.
pub fn fit_restricted(
    kind: Kind,
    family: &dyn ParametricFamily,
    sample: &Sample,
    lambda_fixed: f64,
    bounds: &[Bound],
) -> Result<FitResult> {
    fit_restricted_with(kind, family, sample, lambda_fixed, bounds, &FitOptions::default())
}

/// Maximizes `ℓ(lambda_fixed, θ)` over the box.
pub fn fit_restricted_with(
    kind: Kind,
    family: &dyn ParametricFamily,
    sample: &Sample,
    lambda_fixed: f64,
    bounds: &[Bound],
    options: &FitOptions,
) -> Result<FitResult> {
    let lambda = check_lambda("lambda_fixed", lambda_fixed)?;
    check_bounds(family, bounds)?;
    check_not_degenerate(family, sample)?;
    family.build(&bounds.iter().map(|b| b.lower).collect::<Vec<_>>())
        .and_then(|base| check_support(&base, sample))?;

    let n = sample.len();
    let (theta_hat, profile_trace, warnings) = search(family, bounds, options, |base| {
        let (sum_ln_f, sum_ln_tail) = log_sums(kind, base, sample);
        assemble(n, lambda, sum_ln_f, sum_ln_tail)
    });

    let loglik = loglik(kind, family, &theta_hat, lambda, sample)?;
    Ok(FitResult {
        lambda_hat: lambda,
        theta_hat,
        loglik,
        n,
        profile_trace,
        warnings,
    })
}

/// Search box for the bundled families, scaled by the sample mean.
///
/// Rates span `[1e-3, 1e3] / mean`, scales `[1e-3, 1e3] · mean`, and Weibull
/// shapes `[0.02, 50]`. Returns an empty box for families without θ.
pub fn default_bounds(family: crate::base::Family, sample: &Sample) -> Vec<Bound> {
    use crate::base::Family;
    let mean = sample
        .values
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
        / sample.len().max(1) as f64;
    let mean = if mean.is_finite() && mean > 0.0 { mean } else { 1.0 };
    match family {
        Family::Uniform => Vec::new(),
        Family::Exponential => vec![Bound::new(1e-3 / mean, 1e3 / mean)],
        Family::Weibull => vec![Bound::new(0.02, 50.0), Bound::new(1e-3 * mean, 1e3 * mean)],
    }
}
