//! Command-line front end for `lehmann-core`.
//!
//! [`Cli`] holds the clap definitions and [`run`] executes a parsed command,
//! returning the text to emit. The binary only wires these to the process:
//! logging, the output target and the exit code.

pub mod render;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lehmann_core::{
    default_bounds, fit_full, fit_restricted, kl_numeric, mle_lambda, parse_descriptor, run_power_study,
    Descriptor, Error, ExtendedDistribution, Family, FamilyRegistry, FitResult, Kind, ParametricFamily, Sample,
    SimConfig,
};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage errors (bad flags, descriptors, configs or parameter
    /// values), 1 for failures while computing or reading data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                Error::Parse(_) | Error::InvalidParameter { .. } | Error::Domain(_) | Error::Config(_) => 2,
                Error::NumericalFailure { .. } | Error::DegenerateSample(_) | Error::OutsideSupport { .. } => 1,
            },
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "lehmann", version, about = "Lehmann-alternative distributions: sampling, fitting, divergences and LRT power")]
pub struct Cli {
    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Lehmann1,
    Lehmann2,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Lehmann1 => Kind::FirstAlternative,
            KindArg::Lehmann2 => Kind::SecondAlternative,
        }
    }
}

/// A distribution given either as an extended descriptor, or as a base
/// descriptor plus `--lambda` and `--kind`.
#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// e.g. `lehmann1(base=exponential(rate=1),lambda=2)` or `weibull(shape=2,scale=1)`
    #[arg(long, value_name = "DESCRIPTOR")]
    pub dist: String,
    /// Exponent applied to a base descriptor.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Alternative applied to a base descriptor.
    #[arg(long, value_enum, default_value = "lehmann1")]
    pub kind: KindArg,
}

impl DistArgs {
    fn resolve(&self) -> Result<ExtendedDistribution, CliError> {
        match parse_descriptor(&self.dist, &FamilyRegistry::bundled())? {
            Descriptor::Extended(g) => {
                if self.lambda.is_some() {
                    return Err(usage("--lambda conflicts with an extended descriptor that already sets lambda"));
                }
                Ok(g)
            }
            Descriptor::Base(base) => Ok(ExtendedDistribution::new(base, self.lambda.unwrap_or(1.0), self.kind.into())?),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a seeded sample by inverse transform.
    Sample {
        #[command(flatten)]
        dist: DistArgs,
        /// Number of draws (at least 1).
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Maximum-likelihood fit of a sample file.
    ///
    /// With a parameterized base descriptor only λ is estimated (closed
    /// form). With `--free-theta` the base parameters are estimated as well,
    /// and `--lambda` then fixes λ instead of estimating it.
    Fit {
        /// Sample CSV as written by `sample`.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Base descriptor, e.g. `exponential(rate=1)`.
        #[arg(long, value_name = "DESCRIPTOR")]
        dist: String,
        #[arg(long, value_enum, default_value = "lehmann1")]
        kind: KindArg,
        /// Estimate the base parameters too; the descriptor's values are ignored.
        #[arg(long)]
        free_theta: bool,
        /// Fixed λ for a restricted fit (requires --free-theta).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// k-th raw moment by quadrature.
    Moments {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Kullback-Leibler divergence D(p || q) by quadrature.
    Kl {
        /// Extended descriptor of p.
        #[arg(long, value_name = "DESCRIPTOR")]
        p: String,
        /// Extended descriptor of q.
        #[arg(long, value_name = "DESCRIPTOR")]
        q: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Power-loss curve ln λ + (1 − λ)/λ on a uniform grid.
    Powerloss {
        #[arg(long, default_value_t = 1.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 10.0)]
        lambda_max: f64,
        /// Number of grid points, ends included.
        #[arg(long, default_value_t = 91)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Monte Carlo power study of the full and mis-specified LRTs.
    Simulate {
        /// TOML study configuration.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn only(format: Format, allowed: &[Format], command: &str) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(usage(format!("`{command}` does not support --format {format:?}").to_lowercase()))
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })
}

fn pretty(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json values serialize");
    s.push('\n');
    s
}

fn fit_csv(fit: &FitResult, names: &[&str]) -> String {
    let mut header = vec!["lambda_hat".to_owned()];
    header.extend(names.iter().map(|n| n.to_string()));
    header.extend(["loglik".to_owned(), "n".to_owned()]);
    let mut row = vec![fit.lambda_hat.to_string()];
    row.extend(fit.theta_hat.iter().map(|t| t.to_string()));
    row.extend([fit.loglik.to_string(), fit.n.to_string()]);
    let mut out = String::new();
    for w in &fit.warnings {
        out.push_str(&format!("# warning={w}\n"));
    }
    out.push_str(&format!("{}\n{}\n", header.join(","), row.join(",")));
    out
}

/// Fits `sample` as `--dist`/`--kind` describe; shared by `fit` and tests.
pub fn fit_sample(
    sample: &Sample,
    dist: &str,
    kind: Kind,
    free_theta: bool,
    lambda: Option<f64>,
) -> Result<FitResult, CliError> {
    let base = match parse_descriptor(dist, &FamilyRegistry::bundled())? {
        Descriptor::Base(b) => b,
        Descriptor::Extended(_) => return Err(usage("fit --dist takes a base descriptor; choose the alternative with --kind")),
    };
    let family = Family::from_name(base.family())
        .ok_or_else(|| usage(format!("`{}` is not a bundled family", base.family())))?;
    if !free_theta {
        if lambda.is_some() {
            return Err(usage("--lambda needs --free-theta (otherwise nothing is left to fit)"));
        }
        let theta = base.theta();
        let lambda_hat = mle_lambda(kind, &family, &theta, sample)?;
        let loglik = lehmann_core::loglik(kind, &family, &theta, lambda_hat, sample)?;
        return Ok(FitResult {
            lambda_hat,
            theta_hat: theta,
            loglik,
            n: sample.len(),
            profile_trace: None,
            warnings: Vec::new(),
        });
    }
    let bounds = default_bounds(family, sample);
    Ok(match lambda {
        Some(l) => fit_restricted(kind, &family, sample, l, &bounds)?,
        None => fit_full(kind, &family, sample, &bounds)?,
    })
}

/// Executes `command` and returns the text to emit.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Sample { dist, n, seed, format } => {
            only(*format, &[Format::Csv, Format::Json], "sample")?;
            if *n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let g = dist.resolve()?;
            let sample = g.sample(*n, *seed)?;
            Ok(match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&sample).expect("samples serialize");
                    s.push('\n');
                    s
                }
                _ => sample.to_csv(),
            })
        }
        Command::Fit {
            input,
            dist,
            kind,
            free_theta,
            lambda,
            format,
        } => {
            only(*format, &[Format::Csv, Format::Json], "fit")?;
            let sample = Sample::from_csv(&read(input)?)?;
            let fit = fit_sample(&sample, dist, (*kind).into(), *free_theta, *lambda)?;
            for w in &fit.warnings {
                log::warn!("{w}");
            }
            Ok(match format {
                Format::Json => fit.to_json() + "\n",
                _ => {
                    let family = lehmann_core::parse_base(dist)
                        .ok()
                        .and_then(|b| Family::from_name(b.family()));
                    let names = family.map(|f| f.param_names().to_vec()).unwrap_or_default();
                    fit_csv(&fit, &names)
                }
            })
        }
        Command::Moments { dist, k, format } => {
            only(*format, &[Format::Csv, Format::Json], "moments")?;
            if *k == 0 {
                return Err(usage("--k must be at least 1"));
            }
            let g = dist.resolve()?;
            let m = g.moment(*k)?;
            Ok(match format {
                Format::Json => pretty(json!({
                    "distribution": g.to_string(),
                    "k": k,
                    "value": m.value,
                    "error_estimate": m.error_estimate,
                })),
                _ => format!("k,value,error_estimate\n{k},{},{}\n", m.value, m.error_estimate),
            })
        }
        Command::Kl { p, q, format } => {
            only(*format, &[Format::Csv, Format::Json], "kl")?;
            let registry = FamilyRegistry::bundled();
            // a bare base descriptor is its own identity extension
            let p = parse_descriptor(p, &registry)?.into_extended(Kind::FirstAlternative);
            let q = parse_descriptor(q, &registry)?.into_extended(Kind::FirstAlternative);
            let kl = kl_numeric(&p, &q)?;
            Ok(match format {
                Format::Json => kl.to_json() + "\n",
                _ => format!("value,error_estimate\n{},{}\n", kl.value, kl.error_estimate),
            })
        }
        Command::Powerloss {
            lambda_min,
            lambda_max,
            steps,
            format,
        } => {
            only(*format, &[Format::Csv, Format::Svg], "powerloss")?;
            if !(*lambda_min > 0.0 && lambda_min < lambda_max && lambda_max.is_finite()) {
                return Err(usage(format!(
                    "need 0 < --lambda-min < --lambda-max, got {lambda_min} and {lambda_max}"
                )));
            }
            if *steps < 2 {
                return Err(usage("--steps must be at least 2"));
            }
            let points = render::power_loss_curve(*lambda_min, *lambda_max, *steps)?;
            Ok(match format {
                Format::Svg => render::curve_svg(&points),
                _ => render::curve_csv(&points),
            })
        }
        Command::Simulate { config, format } => {
            only(*format, &[Format::Csv, Format::Json], "simulate")?;
            let cfg = SimConfig::from_toml(&read(config)?)?;
            let report = run_power_study(&cfg)?;
            Ok(match format {
                Format::Json => report.to_json() + "\n",
                _ => report.to_csv(),
            })
        }
    }
}
