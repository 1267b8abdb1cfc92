//! Base laws `F(x | θ)` that the Lehmann operators are applied to.
//!
//! A base law is anything implementing [`ContinuousLaw`]; [`BaseDistribution`]
//! is a cheap, shareable handle around one. Parametric families (the things
//! that can be *fitted*) implement [`ParametricFamily`], which maps a parameter
//! vector θ to a validated [`BaseDistribution`].
//!
//! Three families are bundled: `Uniform(0, 1)`, `Exponential(rate)` and
//! `Weibull(shape, scale)`. All of them have closed-form quantiles. New
//! families plug in by implementing the two traits and registering the family
//! in a [`FamilyRegistry`] so the descriptor parser can see it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interval of the real line, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Support {
    pub const fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Self {
        Self {
            lower,
            upper,
            lower_closed,
            upper_closed,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let below = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// A continuous univariate law with a density.
///
/// `pdf`, `ln_pdf`, `cdf`, `ln_cdf` and `ln_sf` must be total on the reals:
/// outside the support the density is zero and the CDF is clamped to 0 or 1.
/// The quantile methods are only called with arguments strictly inside
/// `(0, 1)`.
pub trait ContinuousLaw: fmt::Debug + Send + Sync {
    /// Family name as it appears in descriptors.
    fn family(&self) -> &str;

    /// Named parameter values in the family's canonical order.
    fn params(&self) -> Vec<(&'static str, f64)>;

    fn support(&self) -> Support;

    fn ln_pdf(&self, x: f64) -> f64;

    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn cdf(&self, x: f64) -> f64;

    /// `ln F(x)`.
    fn ln_cdf(&self, x: f64) -> f64 {
        self.cdf(x).ln()
    }

    /// `ln (1 - F(x))`.
    fn ln_sf(&self, x: f64) -> f64 {
        (-self.cdf(x)).ln_1p()
    }

    /// `F⁻¹(u)` for `u` in `(0, 1)`.
    fn quantile_unchecked(&self, u: f64) -> f64;

    /// `F⁻¹(1 - p)` for `p` in `(0, 1)`, accurate when `p` is tiny.
    fn quantile_sf_unchecked(&self, p: f64) -> f64 {
        self.quantile_unchecked(1.0 - p)
    }
}

/// Shared, immutable handle to a base law.
#[derive(Clone)]
pub struct BaseDistribution(Arc<dyn ContinuousLaw>);

impl BaseDistribution {
    pub fn new<L: ContinuousLaw + 'static>(law: L) -> Self {
        Self(Arc::new(law))
    }

    pub fn uniform() -> Self {
        Self::new(Uniform)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Exponential::new(rate).map(Self::new)
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Weibull::new(shape, scale).map(Self::new)
    }

    pub fn law(&self) -> &dyn ContinuousLaw {
        &*self.0
    }

    pub fn family(&self) -> &str {
        self.0.family()
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        self.0.params()
    }

    /// Parameter values without names.
    pub fn theta(&self) -> Vec<f64> {
        self.0.params().into_iter().map(|(_, v)| v).collect()
    }

    pub fn support(&self) -> Support {
        self.0.support()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return 0.0;
        }
        self.0.pdf(x)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return f64::NEG_INFINITY;
        }
        self.0.ln_pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return 0.0;
        }
        if x >= s.upper {
            return 1.0;
        }
        self.0.cdf(x).clamp(0.0, 1.0)
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return f64::NEG_INFINITY;
        }
        if x >= s.upper {
            return 0.0;
        }
        self.0.ln_cdf(x).min(0.0)
    }

    pub fn ln_sf(&self, x: f64) -> f64 {
        let s = self.support();
        if x <= s.lower {
            return 0.0;
        }
        if x >= s.upper {
            return f64::NEG_INFINITY;
        }
        self.0.ln_sf(x).min(0.0)
    }

    /// `F⁻¹(u)`; `u` must lie strictly inside `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit(u)?;
        Ok(self.0.quantile_unchecked(u))
    }

    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        self.0.quantile_unchecked(u)
    }

    pub(crate) fn quantile_sf_unchecked(&self, p: f64) -> f64 {
        self.0.quantile_sf_unchecked(p)
    }

    /// Same family with identical parameter values.
    pub fn same_law(&self, other: &BaseDistribution) -> bool {
        self.family() == other.family() && self.params() == other.params()
    }
}

impl fmt::Debug for BaseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

/// Descriptor form, e.g. `weibull(shape=2,scale=1)`.
impl fmt::Display for BaseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.family())?;
        for (i, (name, value)) in self.params().into_iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{name}={value}")?;
        }
        f.write_str(")")
    }
}

impl PartialEq for BaseDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.same_law(other)
    }
}

pub(crate) fn check_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "probability {u} is outside the open interval (0, 1)"
        )))
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(name, value, "must be finite and > 0"))
    }
}

/// `ln(1 - e^z)` for `z <= 0`.
pub(crate) fn ln_one_minus_exp(z: f64) -> f64 {
    if z > -std::f64::consts::LN_2 {
        (-z.exp_m1()).ln()
    } else {
        (-z.exp()).ln_1p()
    }
}

/// Uniform law on `(0, 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Uniform;

impl ContinuousLaw for Uniform {
    fn family(&self) -> &str {
        "uniform"
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        Vec::new()
    }

    fn support(&self) -> Support {
        Support::new(0.0, 1.0, true, true)
    }

    fn ln_pdf(&self, _x: f64) -> f64 {
        0.0
    }

    fn pdf(&self, _x: f64) -> f64 {
        1.0
    }

    fn cdf(&self, x: f64) -> f64 {
        x
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        x.ln()
    }

    fn ln_sf(&self, x: f64) -> f64 {
        (-x).ln_1p()
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        u
    }

    fn quantile_sf_unchecked(&self, p: f64) -> f64 {
        1.0 - p
    }
}

/// Exponential law with the given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        Ok(Self {
            rate: positive("rate", rate)?,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl ContinuousLaw for Exponential {
    fn family(&self) -> &str {
        "exponential"
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("rate", self.rate)]
    }

    fn support(&self) -> Support {
        Support::new(0.0, f64::INFINITY, true, false)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        self.rate.ln() - self.rate * x
    }

    fn pdf(&self, x: f64) -> f64 {
        self.rate * (-self.rate * x).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        -(-self.rate * x).exp_m1()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        ln_one_minus_exp(-self.rate * x)
    }

    fn ln_sf(&self, x: f64) -> f64 {
        -self.rate * x
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.rate
    }

    fn quantile_sf_unchecked(&self, p: f64) -> f64 {
        -p.ln() / self.rate
    }
}

/// Weibull law, `F(x) = 1 - exp(-(x/scale)^shape)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    shape: f64,
    scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            shape: positive("shape", shape)?,
            scale: positive("scale", scale)?,
        })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn hazard_integral(&self, x: f64) -> f64 {
        (x / self.scale).powf(self.shape)
    }
}

impl ContinuousLaw for Weibull {
    fn family(&self) -> &str {
        "weibull"
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("shape", self.shape), ("scale", self.scale)]
    }

    fn support(&self) -> Support {
        Support::new(0.0, f64::INFINITY, true, false)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.pdf(0.0).ln();
        }
        let z = x / self.scale;
        (self.shape / self.scale).ln() + (self.shape - 1.0) * z.ln() - z.powf(self.shape)
    }

    fn pdf(&self, x: f64) -> f64 {
        if x == 0.0 {
            // Limit depends on the shape: ∞ below 1, `1/scale` at 1, 0 above.
            return match self.shape.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => 1.0 / self.scale,
                _ => 0.0,
            };
        }
        self.ln_pdf(x).exp()
    }

    fn cdf(&self, x: f64) -> f64 {
        -(-self.hazard_integral(x)).exp_m1()
    }

    fn ln_cdf(&self, x: f64) -> f64 {
        ln_one_minus_exp(-self.hazard_integral(x))
    }

    fn ln_sf(&self, x: f64) -> f64 {
        -self.hazard_integral(x)
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        self.scale * (-(-u).ln_1p()).powf(1.0 / self.shape)
    }

    fn quantile_sf_unchecked(&self, p: f64) -> f64 {
        self.scale * (-p.ln()).powf(1.0 / self.shape)
    }
}

/// A family of base laws indexed by a parameter vector θ.
pub trait ParametricFamily: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Parameter names in θ order.
    fn param_names(&self) -> &[&'static str];

    /// Validates θ and builds the corresponding base law.
    fn build(&self, theta: &[f64]) -> Result<BaseDistribution>;

    fn dim(&self) -> usize {
        self.param_names().len()
    }
}

/// The bundled base families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Exponential,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Uniform, Family::Exponential, Family::Weibull];

    pub fn from_name(name: &str) -> Option<Family> {
        match name {
            "uniform" => Some(Family::Uniform),
            "exponential" => Some(Family::Exponential),
            "weibull" => Some(Family::Weibull),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ParametricFamily for Family {
    fn name(&self) -> &str {
        match self {
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::Weibull => "weibull",
        }
    }

    fn param_names(&self) -> &[&'static str] {
        match self {
            Family::Uniform => &[],
            Family::Exponential => &["rate"],
            Family::Weibull => &["shape", "scale"],
        }
    }

    fn build(&self, theta: &[f64]) -> Result<BaseDistribution> {
        if theta.len() != self.dim() {
            return Err(Error::domain(format!(
                "{} expects {} parameter(s), got {}",
                self.name(),
                self.dim(),
                theta.len()
            )));
        }
        match self {
            Family::Uniform => Ok(BaseDistribution::uniform()),
            Family::Exponential => BaseDistribution::exponential(theta[0]),
            Family::Weibull => BaseDistribution::weibull(theta[0], theta[1]),
        }
    }
}

/// Name → family lookup used by the descriptor parser.
#[derive(Debug, Clone)]
pub struct FamilyRegistry {
    families: BTreeMap<String, Arc<dyn ParametricFamily>>,
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self {
            families: BTreeMap::new(),
        }
    }

    /// Registry holding the three bundled families.
    pub fn bundled() -> Self {
        let mut registry = Self::empty();
        for family in Family::ALL {
            registry.register(Arc::new(family));
        }
        registry
    }

    /// Adds (or replaces) a family under its own name.
    pub fn register(&mut self, family: Arc<dyn ParametricFamily>) {
        self.families.insert(family.name().to_owned(), family);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn ParametricFamily>> {
        self.families.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.families.keys().map(String::as_str)
    }
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        Self::bundled()
    }
}
