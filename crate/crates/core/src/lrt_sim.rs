//! Monte Carlo power study of the likelihood ratio test for `H₀: θ = θ₀, λ = 1`.
//!
//! Two statistics are compared on every simulated sample:
//!
//! * the full test, `2[ℓ(λ̂, θ̂) − ℓ(1, θ₀)]`, which fits the exponent;
//! * the mis-specified test, `2[ℓ(1, θ̃) − ℓ(1, θ₀)]`, which fits θ with the
//!   exponent pinned to 1 as if the data came from the base family.
//!
//! Critical values are the empirical `1 − α` quantiles of each statistic
//! under simulated null data, so both tests have the nominal size and their
//! powers are directly comparable. Every replication draws from its own
//! generator stream keyed by `(seed, cell, replication)`, which makes reports
//! independent of thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::base::{Family, ParametricFamily};
use crate::error::{Error, Result};
use crate::estimate::{fit_full_with, fit_restricted_with, loglik, FitOptions};
use crate::infotheory::{mean_and_se, power_loss_closed};
use crate::lehmann::{ExtendedDistribution, Kind, Sample};
use crate::optimize::Bound;
use crate::rng::GENERATOR;

const CALIBRATION_STREAM: u64 = 0;
const CELL_STREAM: u64 = 1;

/// Cells whose fit-failure rate exceeds this are flagged.
pub const FAILURE_FLAG_RATE: f64 = 0.01;

fn default_calibration() -> usize {
    10_000
}

/// Simulation settings, read from a flat TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub kind: Kind,
    pub base: Family,
    #[serde(default)]
    pub theta0: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub n: usize,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(default = "default_calibration")]
    pub calibration_replications: usize,
    /// Lower corner of the θ search box; defaults to `θ₀ / 100`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_lower: Option<Vec<f64>>,
    /// Upper corner of the θ search box; defaults to `100 · θ₀`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_upper: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.lambda_grid.is_empty() {
            return bad("lambda_grid is empty".to_owned());
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return bad(format!("lambda_grid entries must be > 0, got {l}"));
        }
        if self.replications < 100 {
            return bad(format!("replications must be >= 100, got {}", self.replications));
        }
        if self.calibration_replications < 1000 {
            return bad(format!(
                "calibration_replications must be >= 1000, got {}",
                self.calibration_replications
            ));
        }
        if self.n < 2 {
            return bad(format!("n must be >= 2, got {}", self.n));
        }
        self.base
            .build(&self.theta0)
            .map_err(|e| Error::Config(format!("theta0: {e}")))?;
        let bounds = self.bounds();
        if bounds.len() != self.theta0.len() {
            return bad("theta_lower / theta_upper must match theta0 in length".to_owned());
        }
        for (b, t) in bounds.iter().zip(&self.theta0) {
            if !(b.lower <= *t && *t <= b.upper && b.lower < b.upper) {
                return bad(format!("theta0 component {t} lies outside its search box [{}, {}]", b.lower, b.upper));
            }
        }
        Ok(())
    }

    /// θ search box used by both fits.
    pub fn bounds(&self) -> Vec<Bound> {
        let lower = self
            .theta_lower
            .clone()
            .unwrap_or_else(|| self.theta0.iter().map(|t| t / 100.0).collect());
        let upper = self
            .theta_upper
            .clone()
            .unwrap_or_else(|| self.theta0.iter().map(|t| t * 100.0).collect());
        lower
            .into_iter()
            .zip(upper)
            .map(|(lo, hi)| Bound::new(lo, hi))
            .collect()
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn generating(&self, lambda: f64) -> Result<ExtendedDistribution> {
        ExtendedDistribution::new(self.base.build(&self.theta0)?, lambda, self.kind)
    }
}

/// Test statistics for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtStatistics {
    pub full: f64,
    pub misspec: f64,
    /// `(ℓ(λ̂, θ̂) − ℓ(1, θ̃)) / n`.
    pub mean_log_ratio: f64,
}

/// Computes both statistics for `sample` under the hypotheses of `cfg`.
pub fn lrt_statistics(sample: &Sample, cfg: &SimConfig) -> Result<LrtStatistics> {
    let family = cfg.base;
    let bounds = cfg.bounds();
    let null = loglik(cfg.kind, &family, &cfg.theta0, 1.0, sample)?;

    let restricted = fit_restricted_with(
        cfg.kind,
        &family,
        sample,
        1.0,
        &bounds,
        &FitOptions {
            extra_starts: vec![cfg.theta0.clone()],
            ..FitOptions::default()
        },
    )?;
    let full = fit_full_with(
        cfg.kind,
        &family,
        sample,
        &bounds,
        &FitOptions {
            extra_starts: vec![restricted.theta_hat.clone(), cfg.theta0.clone()],
            ..FitOptions::default()
        },
    )?;
    // The restricted model is nested in the full one; max() only absorbs
    // last-bit rounding between the two likelihood evaluations.
    let full_ll = full.loglik.max(restricted.loglik);
    let n = sample.len() as f64;
    Ok(LrtStatistics {
        full: 2.0 * (full_ll - null),
        misspec: (2.0 * (restricted.loglik - null)).max(0.0),
        mean_log_ratio: (full_ll - restricted.loglik) / n,
    })
}

/// Critical values from simulated null data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub crit_full: f64,
    pub crit_misspec: f64,
    pub replications: usize,
    pub failures: usize,
    /// Mean of the full statistic under the null; near `1 + dim θ` when
    /// the chi-square approximation holds.
    pub null_mean_full: f64,
}

/// Type 1 empirical quantile: the smallest order statistic whose empirical
/// CDF reaches `p`.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

fn run_replications(
    cfg: &SimConfig,
    g: &ExtendedDistribution,
    path_prefix: &[u64],
    count: usize,
) -> Vec<Result<LrtStatistics>> {
    (0..count)
        .into_par_iter()
        .map(|r| {
            let mut path = path_prefix.to_vec();
            path.push(r as u64);
            let sample = g.sample_stream(cfg.n, cfg.seed, &path)?;
            lrt_statistics(&sample, cfg)
        })
        .collect()
}

/// Empirical `1 − α` critical values of both statistics under
/// `(λ = 1, θ₀)`.
pub fn calibrate(cfg: &SimConfig) -> Result<Calibration> {
    cfg.validate()?;
    let null = cfg.generating(1.0)?;
    let results = run_replications(cfg, &null, &[CALIBRATION_STREAM], cfg.calibration_replications);
    let ok: Vec<LrtStatistics> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failures = results.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::NumericalFailure {
            what: "calibration: every replication failed to fit".to_owned(),
            estimate: f64::NAN,
            error_estimate: f64::NAN,
        });
    }
    let mut full: Vec<f64> = ok.iter().map(|s| s.full).collect();
    let mut misspec: Vec<f64> = ok.iter().map(|s| s.misspec).collect();
    full.sort_by(f64::total_cmp);
    misspec.sort_by(f64::total_cmp);
    let null_mean_full = full.iter().sum::<f64>() / full.len() as f64;
    log::info!(
        "null mean of full statistic {null_mean_full:.3} (chi-square heuristic: {})",
        1 + cfg.theta0.len()
    );
    if failures > 0 {
        log::warn!("calibration: {failures} replication(s) failed to fit and were excluded");
    }
    Ok(Calibration {
        crit_full: empirical_quantile(&full, 1.0 - cfg.alpha),
        crit_misspec: empirical_quantile(&misspec, 1.0 - cfg.alpha),
        replications: ok.len(),
        failures,
        null_mean_full,
    })
}

/// Results for one λ in the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub lambda: f64,
    pub power_full: f64,
    pub power_misspec: f64,
    pub se_full: f64,
    pub se_misspec: f64,
    pub mean_log_ratio: f64,
    pub se_mean_log_ratio: f64,
    /// Closed-form power loss at this λ (derived for the first alternative
    /// with a shared θ).
    pub delta_closed: f64,
    pub calibrated_crit_full: f64,
    pub calibrated_crit_misspec: f64,
    pub replications: usize,
    pub failures: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrtReport {
    pub config_hash: String,
    pub seed: u64,
    pub generator: String,
    pub config: SimConfig,
    pub calibration: Calibration,
    pub cells: Vec<CellReport>,
}

fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Runs the full power study described by `cfg`.
pub fn run_power_study(cfg: &SimConfig) -> Result<LrtReport> {
    let calibration = calibrate(cfg)?;
    let mut cells = Vec::with_capacity(cfg.lambda_grid.len());
    for (cell, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let g = cfg.generating(lambda)?;
        let results = run_replications(cfg, &g, &[CELL_STREAM, cell as u64], cfg.replications);
        let ok: Vec<LrtStatistics> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        let failures = results.len() - ok.len();
        if ok.is_empty() {
            return Err(Error::NumericalFailure {
                what: format!("power cell lambda={lambda}: every replication failed"),
                estimate: f64::NAN,
                error_estimate: f64::NAN,
            });
        }
        let valid = ok.len();
        let rate = |hits: usize| hits as f64 / valid as f64;
        let power_full = rate(ok.iter().filter(|s| s.full > calibration.crit_full).count());
        let power_misspec = rate(ok.iter().filter(|s| s.misspec > calibration.crit_misspec).count());
        let ratios: Vec<f64> = ok.iter().map(|s| s.mean_log_ratio).collect();
        let (mean_log_ratio, se_mean_log_ratio) = mean_and_se(&ratios);
        let flagged = failures as f64 > FAILURE_FLAG_RATE * cfg.replications as f64;
        if flagged {
            log::warn!("cell lambda={lambda}: {failures} fit failures out of {}", cfg.replications);
        }
        cells.push(CellReport {
            lambda,
            power_full,
            power_misspec,
            se_full: binomial_se(power_full, valid),
            se_misspec: binomial_se(power_misspec, valid),
            mean_log_ratio,
            se_mean_log_ratio,
            delta_closed: power_loss_closed(lambda)?,
            calibrated_crit_full: calibration.crit_full,
            calibrated_crit_misspec: calibration.crit_misspec,
            replications: valid,
            failures,
            flagged,
        });
    }
    Ok(LrtReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        generator: GENERATOR.to_owned(),
        config: cfg.clone(),
        calibration,
        cells,
    })
}

impl LrtReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One row per grid cell, with the config hash and seed as `#` comments.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# config_hash={}\n# seed={}\n# generator={}\n",
            self.config_hash, self.seed, self.generator
        );
        out.push_str(
            "lambda,power_full,se_full,power_misspec,se_misspec,mean_log_ratio,se_mean_log_ratio,\
             delta_closed,calibrated_crit_full,calibrated_crit_misspec,replications,failures,flagged\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.lambda,
                c.power_full,
                c.se_full,
                c.power_misspec,
                c.se_misspec,
                c.mean_log_ratio,
                c.se_mean_log_ratio,
                c.delta_closed,
                c.calibrated_crit_full,
                c.calibrated_crit_misspec,
                c.replications,
                c.failures,
                c.flagged
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(base: Family, theta0: Vec<f64>) -> SimConfig {
        SimConfig {
            kind: Kind::FirstAlternative,
            base,
            theta0,
            lambda_grid: vec![1.0, 3.0],
            n: 30,
            replications: 100,
            alpha: 0.05,
            seed: 99,
            calibration_replications: 1000,
            theta_lower: None,
            theta_upper: None,
        }
    }

    #[test]
    fn parses_flat_toml() {
        let cfg = SimConfig::from_toml(
            r#"
            # power study
            kind = "lehmann1"
            base = "exponential"
            theta0 = [1.0]
            lambda_grid = [1.0, 2.0, 3.0]
            n = 50
            replications = 2000
            alpha = 0.05
            seed = 7
            calibration_replications = 10000
            "#,
        )
        .unwrap();
        assert_eq!(cfg.base, Family::Exponential);
        assert_eq!(cfg.kind, Kind::FirstAlternative);
        assert_eq!(cfg.bounds(), vec![Bound::new(0.01, 100.0)]);
    }

    #[test]
    fn rejects_invalid_configs() {
        let good = config(Family::Exponential, vec![1.0]);
        assert!(good.validate().is_ok());
        for broken in [
            SimConfig { alpha: 1.0, ..good.clone() },
            SimConfig { alpha: 0.0, ..good.clone() },
            SimConfig { lambda_grid: vec![], ..good.clone() },
            SimConfig { lambda_grid: vec![1.0, -2.0], ..good.clone() },
            SimConfig { replications: 99, ..good.clone() },
            SimConfig { calibration_replications: 999, ..good.clone() },
            SimConfig { theta0: vec![], ..good.clone() },
            SimConfig { theta0: vec![-1.0], ..good.clone() },
            SimConfig { theta_upper: Some(vec![0.5]), ..good.clone() },
        ] {
            assert!(matches!(broken.validate(), Err(Error::Config(_))), "{broken:?}");
        }
        assert!(SimConfig::from_toml("kind = \"lehmann1\"\nbogus = 1\n").is_err());
    }

    #[test]
    fn hash_depends_on_every_field() {
        let a = config(Family::Exponential, vec![1.0]);
        let b = SimConfig { seed: 100, ..a.clone() };
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn empirical_quantile_definition() {
        let sorted: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&sorted, 0.5), 5.0);
        assert_eq!(empirical_quantile(&sorted, 0.95), 10.0);
        assert_eq!(empirical_quantile(&sorted, 0.0), 1.0);
    }

    #[test]
    fn statistics_are_nested() {
        let cfg = config(Family::Exponential, vec![1.0]);
        for (i, lambda) in [1.0, 2.0, 0.5].into_iter().enumerate() {
            let g = cfg.generating(lambda).unwrap();
            for r in 0..20 {
                let s = g.sample_stream(cfg.n, 5, &[i as u64, r]).unwrap();
                let st = lrt_statistics(&s, &cfg).unwrap();
                assert!(st.full >= st.misspec && st.misspec >= 0.0, "{st:?}");
                assert!(st.mean_log_ratio >= 0.0);
            }
        }
    }

    #[test]
    fn uniform_base_has_no_misspecified_signal() {
        let cfg = config(Family::Uniform, vec![]);
        let g = cfg.generating(2.0).unwrap();
        let s = g.sample(40, 1).unwrap();
        let st = lrt_statistics(&s, &cfg).unwrap();
        assert_eq!(st.misspec, 0.0);
        assert!(st.full > 0.0);
    }

    #[test]
    fn calibration_is_deterministic() {
        let cfg = config(Family::Exponential, vec![1.0]);
        let a = calibrate(&cfg).unwrap();
        let b = calibrate(&cfg).unwrap();
        assert_eq!(a, b);
        let median = calibrate(&SimConfig { alpha: 0.5, ..cfg.clone() }).unwrap();
        assert!(median.crit_full < a.crit_full);
    }

    #[test]
    fn small_study_report_shape() {
        let cfg = config(Family::Exponential, vec![1.0]);
        let report = run_power_study(&cfg).unwrap();
        assert_eq!(report.cells.len(), 2);
        assert_eq!(report.config_hash, cfg.hash());
        for c in &report.cells {
            assert!((0.0..=1.0).contains(&c.power_full));
            assert!((0.0..=1.0).contains(&c.power_misspec));
            assert_eq!(c.delta_closed, power_loss_closed(c.lambda).unwrap());
        }
        let csv = report.to_csv();
        assert!(csv.starts_with(&format!("# config_hash={}\n# seed=99\n", cfg.hash())));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
        let back: LrtReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
