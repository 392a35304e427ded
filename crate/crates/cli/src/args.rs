//! Command-line flags and JSON configuration merging.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{usage, CliResult};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(
    name = "evcop",
    version,
    about = "Extreme-value copulas: evaluation, simulation, estimation and testing",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct GlobalArgs {
    /// JSON object of default flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every stochastic step [default: 20091203].
    #[arg(long, global = true, env = "EVCOP_SEED")]
    pub seed: Option<u64>,
    /// Output format [default: csv for sample, json otherwise].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, short = 'o', global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Write an SVG plot of the curve (eval, estimate).
    #[arg(long, global = true, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    /// Include wall-clock timing in the result document.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Tabulate A(t), l(1, t) and C(t, t) for a parametric family.
    Eval(EvalArgs),
    /// Simulate pairs from an extreme-value family or a base copula.
    Sample(SampleArgs),
    /// Estimate the Pickands function nonparametrically from CSV data.
    Estimate(EstimateArgs),
    /// Fit a parametric family by pseudo-maximum likelihood.
    Fit(FitArgs),
    /// Dependence coefficients of a family or an estimated curve.
    Coeffs(CoeffsArgs),
    /// Test the extreme-value hypothesis through the Kendall distribution.
    Evtest(EvtestArgs),
    /// Convergence of base copulas to their extreme-value limit.
    Doa(DoaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eval(_) => "eval",
            Self::Sample(_) => "sample",
            Self::Estimate(_) => "estimate",
            Self::Fit(_) => "fit",
            Self::Coeffs(_) => "coeffs",
            Self::Evtest(_) => "evtest",
            Self::Doa(_) => "doa",
        }
    }
}

/// A parametric extreme-value family.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct FamilyArgs {
    /// logistic, galambos, husler_reiss, t_ev, independence or comonotone.
    #[arg(long)]
    pub family: Option<String>,
    /// Logistic or Galambos parameter; `inf` selects complete dependence.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Hüsler-Reiss parameter; `inf` selects independence.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// t-EV degrees of freedom.
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// t-EV, Gaussian or Student-t correlation.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Number of equispaced grid points on [0, 1].
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Base copula: gaussian, student_t, gumbel, clayton, independence.
    #[arg(long)]
    pub base: Option<String>,
    /// Clayton parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Number of pairs (of block maxima when --block-size is set).
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// Return componentwise maxima of blocks of this many pairs.
    #[arg(long)]
    pub block_size: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    /// CSV file with the sample in its first two columns.
    #[arg(long, short = 'i', value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// pickands, deheuvels, ow-deheuvels, hall-tajvidi, cfg or cfg-weighted.
    #[arg(long)]
    pub estimator: Option<String>,
    /// ranks or known-uniform.
    #[arg(long)]
    pub margins: Option<String>,
    /// none, gcm or l2.
    #[arg(long)]
    pub projection: Option<String>,
    /// Number of equispaced grid points on [0, 1].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Optional true family, reported as error metrics and drawn in the plot.
    #[command(flatten)]
    pub truth: FamilyArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV file with the sample in its first two columns.
    #[arg(long, short = 'i', value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// logistic, galambos, husler_reiss or t_ev.
    #[arg(long)]
    pub family: Option<String>,
    /// ranks or known-uniform.
    #[arg(long)]
    pub margins: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Curve file written by `estimate` (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvtestArgs {
    /// CSV file with the sample in its first two columns.
    #[arg(long, short = 'i', value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Bootstrap replicates (at least 200).
    #[arg(long, short = 'B')]
    pub bootstrap: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DoaArgs {
    /// Base copula: gaussian, gumbel, clayton or independence.
    #[arg(long)]
    pub base: Option<String>,
    /// Gaussian correlation.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Gumbel generator parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Clayton generator parameter.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Gaussian array with rho_n = 1 - lambda^2 / log n against Hüsler-Reiss(lambda).
    #[arg(long)]
    pub triangular: bool,
    /// Hüsler-Reiss limit parameter for --triangular.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Target family [default: the base's attractor].
    #[arg(long)]
    pub target: Option<String>,
    /// Parameter of the target family.
    #[arg(long, allow_negative_numbers = true)]
    pub target_param: Option<f64>,
    /// Block sizes n at which to evaluate the gap.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<u64>>,
    /// Points per axis of the interior evaluation grid.
    #[arg(long)]
    pub grid: Option<usize>,
}

const SUBCOMMANDS: [&str; 7] = ["eval", "sample", "estimate", "fit", "coeffs", "evtest", "doa"];
const VALUED_GLOBALS: [&str; 6] = ["--config", "--seed", "--format", "--output", "-o", "--plot"];

/// Flag tokens for the entries of a JSON config object. Keys are flag
/// names, with `_` and `-` interchangeable.
fn config_tokens(v: &Value) -> CliResult<Vec<OsString>> {
    let Value::Object(map) = v else {
        return Err(usage("config file must hold a JSON object"));
    };
    let mut out = Vec::new();
    for (k, val) in map {
        let flag = format!("--{}", k.replace('_', "-"));
        if flag == "--config" {
            return Err(usage("config files cannot include other config files"));
        }
        let scalar = |x: &Value| -> CliResult<String> {
            match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(usage(format!("config key {k:?}: unsupported value {other}"))),
            }
        };
        match val {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Array(items) => {
                let parts: CliResult<Vec<String>> = items.iter().map(scalar).collect();
                out.push(flag.into());
                out.push(parts?.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(other)?.into());
            }
        }
    }
    Ok(out)
}

/// Parses `argv`; when `--config` is present, its entries are inserted
/// directly after the subcommand so that explicit flags override them.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let first = Cli::try_parse_from(&argv).map_err(ParseFailure::Clap)?;
    let Some(path) = first.global.config.clone() else {
        return Ok(first);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ParseFailure::Io(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| ParseFailure::Usage(format!("config {}: {e}", path.display())))?;
    let extra = config_tokens(&value).map_err(|e| ParseFailure::Usage(e.to_string()))?;

    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if SUBCOMMANDS.contains(&tok.as_ref()) {
            break;
        }
        i += if VALUED_GLOBALS.contains(&tok.as_ref()) { 2 } else { 1 };
    }
    let mut merged: Vec<OsString> = argv[..=i.min(argv.len() - 1)].to_vec();
    merged.extend(extra);
    merged.extend(argv[i + 1..].iter().cloned());
    Cli::try_parse_from(&merged).map_err(ParseFailure::Clap)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Usage(String),
    Io(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn flags_parse() {
        let cli = parse(argv("evcop eval --family logistic --theta inf --grid 5")).unwrap();
        let Command::Eval(e) = cli.command else { panic!() };
        assert_eq!(e.family.theta, Some(f64::INFINITY));
        assert_eq!(e.grid, Some(5));
        let cli = parse(argv("evcop --seed 3 sample -n 10 --base gaussian --rho -0.5")).unwrap();
        assert_eq!(cli.global.seed, Some(3));
        let Command::Sample(s) = cli.command else { panic!() };
        assert_eq!((s.n, s.family.rho), (Some(10), Some(-0.5)));
    }

    #[test]
    fn config_entries_yield_to_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"theta": 3, "grid": 7, "seed": 9, "family": "logistic"}"#).unwrap();
        let cmd = format!("evcop --config {} eval --theta 2", p.display());
        let cli = parse(argv(&cmd)).unwrap();
        assert_eq!(cli.global.seed, Some(9));
        let Command::Eval(e) = cli.command else { panic!() };
        assert_eq!((e.family.theta, e.grid), (Some(2.0), Some(7)));
        assert_eq!(e.family.family.as_deref(), Some("logistic"));

        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        assert!(matches!(parse(argv(&cmd)), Err(ParseFailure::Clap(_))));
    }

    #[test]
    fn array_values_become_lists() {
        let t = config_tokens(&serde_json::json!({"n_values": [10, 100], "triangular": true})).unwrap();
        assert_eq!(t, argv("--n-values 10,100 --triangular"));
    }
}
