use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use liftline_core::circulation::WingConfig;
use liftline_core::moments::{MomentMethod, NoncollapseScale, WeightForm, DEFAULT_ODE_STEP};
use liftline_core::optimizer::SolveModel;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "liftline", version, about = "Minimal induced drag span loads under bending-moment constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Solve one optimisation problem and write its report.
    Solve(SolveArgs),
    /// Rasterise the constraints over a two-mode window.
    Sweep(SweepArgs),
    /// Sample bending-moment profiles for given coefficients.
    Moment(MomentArgs),
    /// Solve several models and tabulate their drags.
    Compare(CompareArgs),
    /// Run the reproduction checks and print a pass/fail table.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long = "out", value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format; taken from the file extension when absent, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    pub fn resolve_format(&self) -> Result<Format, CliError> {
        let from_ext = self.out.as_deref().and_then(extension_format);
        match (self.format, from_ext) {
            (Some(f), Some(e)) if f != e => Err(CliError::Usage(format!(
                "--format {} does not match the extension of {}",
                format_name(f),
                self.out.as_deref().map(Path::display).map(|d| d.to_string()).unwrap_or_default()
            ))),
            (Some(f), _) => Ok(f),
            (None, Some(e)) => Ok(e),
            (None, None) => Ok(Format::Csv),
        }
    }
}

fn extension_format(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
        "csv" => Some(Format::Csv),
        "json" => Some(Format::Json),
        _ => None,
    }
}

pub fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

/// Physical constants; results are computed at unit constants and rescaled.
#[derive(Debug, Clone, Copy, Args, Serialize, Deserialize)]
pub struct Constants {
    /// Total lift A.
    #[arg(long, default_value_t = 1.0)]
    pub lift: f64,
    /// Moment arm scale r.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Air density.
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    /// Freestream speed.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Structural weight per unit bending moment.
    #[arg(long, default_value_t = 1.0)]
    pub cw: f64,
    /// Wing material density.
    #[arg(long, default_value_t = 1.0)]
    pub rhow: f64,
}

impl Constants {
    pub fn wing_config(&self) -> Result<WingConfig, CliError> {
        let cfg = WingConfig {
            lift: self.lift,
            radius: self.radius,
            density: self.density,
            speed: self.speed,
            c_w: self.cw,
            rho_w: self.rhow,
            ..WingConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn is_unit(&self) -> bool {
        self.wing_config().map(|c| c.is_unit()).unwrap_or(false)
    }

    /// Factors taking unit-constant results to physical ones.
    pub fn scaling(&self) -> Scaling {
        let gamma = self.lift / (self.density * self.speed * self.radius);
        Scaling {
            gamma,
            span: self.radius,
            drag: self.lift * gamma / (self.speed * self.radius),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub gamma: f64,
    pub span: f64,
    pub drag: f64,
}

/// Two-mode raster and improved-model constraint settings.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WindowArgs {
    /// Raster size `N0xN2`.
    #[arg(long, value_parser = parse_grid, default_value = "400x400")]
    pub grid: (usize, usize),
    /// `lo,hi` for a_0.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "0.01,0.5")]
    pub a0_range: [f64; 2],
    /// `lo,hi` for a_2.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-0.2,0.2")]
    pub a2_range: [f64; 2],
    /// Weight expression of the improved model.
    #[arg(long, value_parser = parse_from_str::<WeightForm>, default_value = "reduced")]
    pub weight_form: WeightForm,
    /// Scale of the self-load term in the non-collapse test.
    #[arg(long, value_parser = parse_from_str::<NoncollapseScale>, default_value = "consistent")]
    pub noncollapse_scale: NoncollapseScale,
    /// Right-hand side of the weight constraint.
    #[arg(long, default_value_t = 1.0)]
    pub budget: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[arg(long, value_parser = parse_from_str::<SolveModel>, default_value = "prandtl")]
    pub model: SolveModel,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Highest mode index N for `--model general`.
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    /// Moment model used by `--model general`: prandtl or improved.
    #[arg(long, default_value = "prandtl")]
    pub general_model: String,
    /// Starting coefficients a_0,a_2,... for `--model general`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Require Gamma >= 0 in `--model general`.
    #[arg(long)]
    pub gamma_nonneg: bool,
    #[command(flatten)]
    pub constants: Constants,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// prandtl or improved.
    #[arg(long, value_parser = parse_from_str::<SolveModel>, default_value = "prandtl")]
    pub model: SolveModel,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub constants: Constants,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MomentArgs {
    /// Coefficients a_0,a_2,...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub coeffs: Vec<f64>,
    /// Span; defaults to the unit-lift span 4/(pi a_0).
    #[arg(long)]
    pub span: Option<f64>,
    /// Methods to tabulate, comma separated.
    #[arg(
        long,
        value_parser = parse_from_str::<MomentMethod>,
        value_delimiter = ',',
        default_value = "lift-only,closed-form,ode,volterra-oracle"
    )]
    pub methods: Vec<MomentMethod>,
    /// Uniform stations on [0, 1].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Step of the backward ODE integration.
    #[arg(long, default_value_t = DEFAULT_ODE_STEP)]
    pub ode_step: f64,
    #[command(flatten)]
    pub constants: Constants,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    /// Models to solve, comma separated.
    #[arg(
        long,
        value_parser = parse_from_str::<SolveModel>,
        value_delimiter = ',',
        default_value = "elliptic,prandtl,improved"
    )]
    pub models: Vec<SolveModel>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub constants: Constants,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SelftestArgs {
    /// Relative offset applied to the reference values.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub perturb: f64,
    /// Raster size of the asserted sweeps.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    /// Raster size of the reported-only variant sweeps.
    #[arg(long, default_value_t = 200)]
    pub variant_grid: usize,
    /// Run only these checks (repeatable).
    #[arg(long = "check", value_name = "ID")]
    pub checks: Vec<u8>,
}

fn parse_from_str<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected N0xN2, got `{s}`"))?;
    let n0 = a.trim().parse::<usize>().map_err(|e| format!("bad N0 `{a}`: {e}"))?;
    let n2 = b.trim().parse::<usize>().map_err(|e| format!("bad N2 `{b}`: {e}"))?;
    Ok((n0, n2))
}

pub fn parse_range(s: &str) -> Result<[f64; 2], String> {
    let v = parse_list(s)?;
    match v.as_slice() {
        &[lo, hi] => Ok([lo, hi]),
        _ => Err(format!("expected lo,hi, got `{s}`")),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}")))
        .collect()
}
