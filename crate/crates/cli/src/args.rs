use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvclone_core::cloners::CloneCount;
use cvclone_core::GaussianState;

#[derive(Debug, Parser)]
#[command(name = "cvclone", version, about = "Gaussian cloning machines and squeezed-state QKD experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Config file (key=value lines or a JSON object) supplying default flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Report format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a cloning machine on a Gaussian input, or print the optimal bounds
    Clone(CloneArgs),
    /// Simulate the squeezed-state key distribution protocol
    Qkd(QkdArgs),
    /// Cross-check the 1 -> 2 cloner against a position-space grid
    Oracle(OracleArgs),
    /// Run the full invariant suite and print a pass/fail table
    Verify(VerifyArgs),
}

impl Command {
    pub const NAMES: [&'static str; 4] = ["clone", "qkd", "oracle", "verify"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClonerImpl {
    Circuit,
    Amplifier,
    Ntom,
    Bounds,
    /// Squeezed-family cloner matched to a `squeezed:` input
    Squeezed,
}

impl ClonerImpl {
    pub fn label(self) -> &'static str {
        match self {
            ClonerImpl::Circuit => "circuit",
            ClonerImpl::Amplifier => "amplifier",
            ClonerImpl::Ntom => "ntom",
            ClonerImpl::Bounds => "bounds",
            ClonerImpl::Squeezed => "squeezed",
        }
    }
}

#[derive(Debug, Args)]
pub struct CloneArgs {
    /// Number of identical inputs
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of clones, or `inf`
    #[arg(long, value_parser = parse_clone_count)]
    pub m: Option<CloneCount>,
    #[arg(long = "impl", value_enum)]
    pub implementation: Option<ClonerImpl>,
    /// `vacuum`, `coherent:x,p` or `squeezed:r,x,p`
    #[arg(long)]
    pub input: Option<InputSpec>,
    /// Homodyne samples per clone quadrature (0 disables sampling)
    #[arg(long)]
    pub samples: Option<usize>,
    /// RNG seed; falls back to $CVCLONE_SEED, then 42
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct QkdArgs {
    /// Squeezed-quadrature variance, below 1/2
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    /// Excess noise on Bob's channel; omit for no eavesdropper
    #[arg(long = "noise-b", allow_hyphen_values = true)]
    pub noise_b: Option<f64>,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Fraction of sifted rounds disclosed for noise estimation
    #[arg(long)]
    pub disclosed: Option<f64>,
    /// RNG seed; falls back to $CVCLONE_SEED, then 42
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for transcript.csv and info.json
    #[arg(long = "out-dir", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Grid points per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Half extent L of the grid [-L, L)
    #[arg(long, allow_hyphen_values = true)]
    pub extent: Option<f64>,
    #[arg(long)]
    pub input: Option<InputSpec>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// RNG seed; falls back to $CVCLONE_SEED, then 42
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fault injection: build the amplifier cloner with this gain
    #[arg(long = "break-gain", hide = true)]
    pub break_gain: Option<f64>,
}

pub fn parse_clone_count(s: &str) -> Result<CloneCount, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(CloneCount::Infinite),
        t => t.parse::<usize>().map(CloneCount::Finite).map_err(|e| format!("expected a count or `inf`: {e}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputSpec {
    Vacuum,
    Coherent { x: f64, p: f64 },
    Squeezed { r: f64, x: f64, p: f64 },
}

impl InputSpec {
    pub fn state(&self) -> GaussianState {
        match *self {
            InputSpec::Vacuum => GaussianState::vacuum(1),
            InputSpec::Coherent { x, p } => GaussianState::coherent(x, p),
            InputSpec::Squeezed { r, x, p } => GaussianState::squeezed(r, x, p),
        }
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Vacuum => write!(f, "vacuum"),
            InputSpec::Coherent { x, p } => write!(f, "coherent:{x},{p}"),
            InputSpec::Squeezed { r, x, p } => write!(f, "squeezed:{r},{x},{p}"),
        }
    }
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "vacuum" {
            return Ok(InputSpec::Vacuum);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("bad input spec `{s}`: expected vacuum, coherent:x,p or squeezed:r,x,p"))?;
        let values = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number `{v}` in `{s}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite value in `{s}`"));
        }
        match (kind, values.as_slice()) {
            ("coherent", [x, p]) => Ok(InputSpec::Coherent { x: *x, p: *p }),
            ("squeezed", [r, x, p]) => Ok(InputSpec::Squeezed { r: *r, x: *x, p: *p }),
            ("coherent", _) => Err(format!("`{s}`: coherent takes two values x,p")),
            ("squeezed", _) => Err(format!("`{s}`: squeezed takes three values r,x,p")),
            _ => Err(format!("unknown input kind `{kind}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_specs() {
        assert_eq!("vacuum".parse::<InputSpec>(), Ok(InputSpec::Vacuum));
        assert_eq!("coherent:1,0.5".parse::<InputSpec>(), Ok(InputSpec::Coherent { x: 1.0, p: 0.5 }));
        assert_eq!("squeezed:0.5,-1,2".parse::<InputSpec>(), Ok(InputSpec::Squeezed { r: 0.5, x: -1.0, p: 2.0 }));
        for bad in ["coherent:1", "squeezed:1,2", "thermal:1", "coherent:a,b", "", "coherent:nan,0"] {
            assert!(bad.parse::<InputSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn clone_counts() {
        assert_eq!(parse_clone_count("inf"), Ok(CloneCount::Infinite));
        assert_eq!(parse_clone_count("3"), Ok(CloneCount::Finite(3)));
        assert!(parse_clone_count("-1").is_err());
    }
}
