//! Distributions generated by Lehmann alternatives.
//!
//! Given a base CDF `F`, the first alternative is `G₁ = F^λ` and the second is
//! `G₂ = 1 - (1 - F)^λ`. For integer `λ` these are the laws of the maximum and
//! the minimum of `λ` independent base draws. Both keep the base support, and
//! applying the same alternative twice multiplies the exponents.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::base::{check_open_unit, BaseDistribution, Support};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_unit, Integral};
use crate::rng::{self, GENERATOR};

/// Exponents above this are accepted but logged as a likely mistake.
pub const LAMBDA_WARN_THRESHOLD: f64 = 1e8;

/// Which Lehmann alternative generates the distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    /// `G = F^λ`, the law of the maximum.
    #[serde(rename = "lehmann1", alias = "first_alternative")]
    FirstAlternative,
    /// `G = 1 - (1 - F)^λ`, the law of the minimum.
    #[serde(rename = "lehmann2", alias = "second_alternative")]
    SecondAlternative,
}

impl Kind {
    /// Descriptor keyword (`lehmann1` / `lehmann2`).
    pub fn keyword(self) -> &'static str {
        match self {
            Kind::FirstAlternative => "lehmann1",
            Kind::SecondAlternative => "lehmann2",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Kind> {
        match word {
            "lehmann1" => Some(Kind::FirstAlternative),
            "lehmann2" => Some(Kind::SecondAlternative),
            _ => None,
        }
    }

    /// `ln F(x)` for the first alternative, `ln(1 - F(x))` for the second:
    /// the log term that λ − 1 multiplies in the log-density.
    pub fn ln_tail(self, base: &BaseDistribution, x: f64) -> f64 {
        match self {
            Kind::FirstAlternative => base.ln_cdf(x),
            Kind::SecondAlternative => base.ln_sf(x),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

pub(crate) fn check_lambda(name: &str, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(name, lambda, "must be finite and > 0"));
    }
    if lambda > LAMBDA_WARN_THRESHOLD {
        log::warn!("{name} = {lambda} exceeds {LAMBDA_WARN_THRESHOLD:e}; likely a user error");
    }
    Ok(lambda)
}

/// `(λ − 1) · t` with the convention `0 · (±∞) = 0`.
fn excess_term(lambda: f64, ln_tail: f64) -> f64 {
    if lambda == 1.0 {
        0.0
    } else {
        (lambda - 1.0) * ln_tail
    }
}

/// A base law extended by a Lehmann alternative with exponent `λ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedDistribution {
    base: BaseDistribution,
    lambda: f64,
    kind: Kind,
}

impl ExtendedDistribution {
    pub fn new(base: BaseDistribution, lambda: f64, kind: Kind) -> Result<Self> {
        Ok(Self {
            base,
            lambda: check_lambda("lambda", lambda)?,
            kind,
        })
    }

    pub fn first(base: BaseDistribution, lambda: f64) -> Result<Self> {
        Self::new(base, lambda, Kind::FirstAlternative)
    }

    pub fn second(base: BaseDistribution, lambda: f64) -> Result<Self> {
        Self::new(base, lambda, Kind::SecondAlternative)
    }

    pub fn base(&self) -> &BaseDistribution {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn support(&self) -> Support {
        self.base.support()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.lambda == 1.0 {
            return self.base.cdf(x);
        }
        match self.kind {
            Kind::FirstAlternative => (self.lambda * self.base.ln_cdf(x)).exp(),
            Kind::SecondAlternative => -(self.lambda * self.base.ln_sf(x)).exp_m1(),
        }
    }

    /// `ln(g(x) / f(x)) = ln λ + (λ − 1)·ln F(x)` (or `ln(1 − F(x))`).
    ///
    /// At boundary points where the log term is `-∞` this is `-∞` for `λ > 1`
    /// and `+∞` for `λ < 1`.
    pub fn ln_density_ratio(&self, x: f64) -> f64 {
        self.lambda.ln() + excess_term(self.lambda, self.kind.ln_tail(&self.base, x))
    }

    /// Log-density, assembled in log space so large `λ` cannot underflow an
    /// intermediate power.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let ln_f = self.base.ln_pdf(x);
        if self.lambda == 1.0 || ln_f == f64::NEG_INFINITY {
            return ln_f;
        }
        ln_f + self.ln_density_ratio(x)
    }

    /// Density. Diverges to `+∞` at boundary points where the log term is
    /// `-∞` and `λ < 1` (e.g. `x = 0` under an exponential base).
    pub fn pdf(&self, x: f64) -> f64 {
        if self.lambda == 1.0 {
            return self.base.pdf(x);
        }
        self.ln_pdf(x).exp()
    }

    /// Quantile; `u` must lie in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        if self.lambda == 1.0 {
            return self.base.quantile_unchecked(u);
        }
        let inv = 1.0 / self.lambda;
        // Base probability v and its complement 1 − v, each computed without
        // cancellation; the base quantile is taken from whichever is smaller.
        let (v, v_comp) = match self.kind {
            Kind::FirstAlternative => {
                let ln_v = u.ln() * inv;
                (ln_v.exp(), -ln_v.exp_m1())
            }
            Kind::SecondAlternative => {
                let ln_c = (-u).ln_1p() * inv;
                (-ln_c.exp_m1(), ln_c.exp())
            }
        };
        if v <= 0.5 {
            self.base.quantile_unchecked(v.max(f64::MIN_POSITIVE))
        } else {
            self.base.quantile_sf_unchecked(v_comp.max(f64::MIN_POSITIVE))
        }
    }

    /// Applies the same alternative again with exponent `lambda_prime`.
    /// The result is the same family with exponent `λ·λ′`.
    pub fn compose(&self, lambda_prime: f64) -> Result<Self> {
        let lambda_prime = check_lambda("lambda_prime", lambda_prime)?;
        Self::new(self.base.clone(), self.lambda * lambda_prime, self.kind)
    }

    /// Inverse-transform sample of size `n`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Sample> {
        self.sample_stream(n, seed, &[])
    }

    /// Like [`sample`](Self::sample) but drawing from the sub-stream `path`
    /// (see [`rng::stream`]).
    pub fn sample_stream(&self, n: usize, seed: u64, path: &[u64]) -> Result<Sample> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let mut rng = rng::stream(seed, path);
        let values = (0..n)
            .map(|_| self.quantile_unchecked(rng::open_unit(&mut rng)))
            .collect();
        Ok(Sample {
            values,
            seed,
            source: self.to_string(),
            generator: GENERATOR.to_owned(),
        })
    }

    /// `E[X^k]`, computed as `∫₀¹ Q_G(t)^k dt` where `Q_G` is this
    /// distribution's quantile.
    ///
    /// For the first alternative this is the Beta(λ, 1) expectation of
    /// `Q(U)^k` after substituting `t = u^λ`; for the second it is the
    /// Beta(1, λ) expectation after `t = 1 − (1 − u)^λ`. The substitution
    /// removes the `u^{λ−1}` endpoint singularity when `λ < 1`.
    pub fn moment(&self, k: u32) -> Result<Integral> {
        if k == 0 {
            return Err(Error::domain("moment order must be at least 1"));
        }
        let k = k as i32;
        integrate_unit(
            |t| self.quantile_unchecked(t).powi(k),
            &format!("moment {k} of {self}"),
        )
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1).map(|m| m.value)
    }
}

/// Descriptor form, e.g. `lehmann1(base=exponential(rate=1),lambda=2)`.
impl fmt::Display for ExtendedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(base={},lambda={})",
            self.kind.keyword(),
            self.base,
            self.lambda
        )
    }
}

/// Draws `n` values from a base law with the same stream as
/// [`ExtendedDistribution::sample`].
pub fn sample_base(base: &BaseDistribution, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let mut rng = rng::stream(seed, &[]);
    let values = (0..n)
        .map(|_| base.quantile_unchecked(rng::open_unit(&mut rng)))
        .collect();
    Ok(Sample {
        values,
        seed,
        source: base.to_string(),
        generator: GENERATOR.to_owned(),
    })
}

/// Observations plus where they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    pub seed: u64,
    /// Descriptor of the generating distribution (empty when unknown).
    pub source: String,
    pub generator: String,
}

impl Sample {
    /// A sample without provenance, e.g. user data.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self {
            values,
            seed: 0,
            source: String::new(),
            generator: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// CSV with `#` metadata lines and a single `value` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20 + 128);
        out.push_str(&format!("# seed={}\n", self.seed));
        out.push_str(&format!("# source={}\n", self.source));
        out.push_str(&format!("# generator={}\n", self.generator));
        out.push_str("value\n");
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        out
    }

    /// Parses the format written by [`Sample::to_csv`]. Metadata lines are
    /// optional; blank lines are ignored.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut sample = Sample::from_values(Vec::new());
        let mut seen_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((key, value)) = meta.trim().split_once('=') {
                    match key.trim() {
                        "seed" => {
                            sample.seed = value.trim().parse().map_err(|_| {
                                Error::domain(format!("line {}: bad seed `{value}`", lineno + 1))
                            })?
                        }
                        "source" => sample.source = value.trim().to_owned(),
                        "generator" => sample.generator = value.trim().to_owned(),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_header {
                seen_header = true;
                if line == "value" {
                    continue;
                }
            }
            let v: f64 = line.parse().map_err(|_| {
                Error::domain(format!("line {}: `{line}` is not a number", lineno + 1))
            })?;
            sample.values.push(v);
        }
        Ok(sample)
    }
}
