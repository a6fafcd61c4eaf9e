use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use klkit::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Parser)]
#[command(
    name = "klkit",
    version,
    about = "Karhunen-Loève expansions and the equicontinuity check"
)]
pub struct Cli {
    /// JSON file with the same fields as the flags, plus "command". Flags given
    /// on the command line override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Nyström eigenpairs of a catalog kernel, written as spectrum JSON.
    Decompose(DecomposeArgs),
    /// Partial kernel K_N, the v_n table and the Cauchy gaps of a spectrum.
    Synthesize(SynthesizeArgs),
    /// Equicontinuity report; exit 0 = pass, 1 = fail, 4 = inconclusive.
    Check(CheckArgs),
    /// Tent families, the Brownian sine basis or a constant spectrum.
    Counterexample(CounterexampleArgs),
    /// Gaussian sample paths of the truncated expansion.
    Sample(SampleArgs),
    /// Increment bound and uniform Cauchy gaps against a known limit kernel.
    VerifyBounds(VerifyBoundsArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DecomposeArgs {
    /// brownian, exponential, squared-exponential or constant.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,

    /// Length-scale for the exponential kernels.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,

    /// Value of the constant kernel [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,

    /// Left endpoint [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,

    /// Right endpoint [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,

    /// Number of trapezoid nodes [default: 257].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,

    /// Maximum number of eigenpairs kept [default: 10].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// Absolute eigenvalue cut-off [default: 1e-12 × largest eigenvalue].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_tol: Option<f64>,

    /// Spectrum JSON [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Gram matrix CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SynthesizeArgs {
    /// Spectrum JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,

    /// Number of terms N [default: all].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// K_N over node pairs as CSV [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// CSV with columns x, v_1, …, v_N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vn_out: Option<PathBuf>,

    /// JSON list of gap records over a schedule of (n, m) pairs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps_out: Option<PathBuf>,

    /// Length of the gap schedule [default: 20].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CheckArgs {
    /// Spectrum JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,

    /// Number of terms N [default: all].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// Ladder depth; δ runs from (b − a)/2 down to (b − a)/2^depth [default: 8].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,

    /// [default: 1e-3 × max v_N]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_threshold: Option<f64>,

    /// [default: 10 × pass threshold]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fail_threshold: Option<f64>,

    /// Report JSON [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Flat (n, delta, omega) CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moduli_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CounterexampleArgs {
    /// failing, passing, brownian or constant.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,

    /// Number of terms [default: 12].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// Uniform base grid, refined with the family's feature points [default: 257].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,

    /// Coefficient of the constant family [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,

    /// Left endpoint, constant family only [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,

    /// Right endpoint, constant family only [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,

    /// Spectrum JSON [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SampleArgs {
    /// Spectrum JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,

    /// Number of terms [default: all].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// Number of paths [default: 1000].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,

    /// [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Paths CSV: x, then one column per path [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Empirical covariance CSV.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov_out: Option<PathBuf>,

    /// Entrywise standard errors of the covariance, same layout.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyBoundsArgs {
    /// Spectrum JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,

    /// brownian, exponential, squared-exponential or constant.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,

    /// Length-scale for the exponential kernels.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,

    /// Value of the constant kernel [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,

    /// Largest n for the increment bound [default: all].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,

    /// Length of the (n, m) gap schedule [default: 20].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,

    /// Report JSON [default: stdout].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Cli {
    /// Merge the config file (if any) with the command-line subcommand.
    pub fn resolve(self) -> Result<Command> {
        let Some(path) = self.config else {
            return self
                .command
                .ok_or_else(|| Error::InvalidArgument("no command given (see --help)".into()));
        };
        let mut base = read_config(&path)?;
        if let Some(cmd) = self.command {
            let Value::Object(flags) = serde_json::to_value(&cmd)? else {
                unreachable!("commands serialize to objects")
            };
            if let (Some(a), Some(b)) = (base.get("command"), flags.get("command")) {
                if a != b {
                    return Err(Error::InvalidArgument(format!(
                        "{} is a {a} config but the command line asks for {b}",
                        path.display()
                    )));
                }
            }
            base.extend(flags);
        }
        serde_json::from_value(Value::Object(base))
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)?;
    match serde_json::from_str(&text)? {
        Value::Object(map) => Ok(map),
        _ => Err(Error::InvalidArgument(format!(
            "{}: expected a JSON object",
            path.display()
        ))),
    }
}
