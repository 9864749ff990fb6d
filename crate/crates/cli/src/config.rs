//! Command-line flags, the flat `key = value` config file, and the resolved
//! run configuration.

use std::fmt;
use std::fs;
use std::path::PathBuf;

use clap::{ArgAction, Parser, ValueEnum};
use hyperlap::Dimensions;

/// Invalid flags, config keys or parameter values (exit status 2).
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Iso,
    Profile,
    Rayleigh,
    Quasimode,
    Spectrum,
    Probe,
    Sandwich,
    LaplaceError,
    Cheeger,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Iso => "iso",
            Subcommand::Profile => "profile",
            Subcommand::Rayleigh => "rayleigh",
            Subcommand::Quasimode => "quasimode",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Probe => "probe",
            Subcommand::Sandwich => "sandwich",
            Subcommand::LaplaceError => "laplace-error",
            Subcommand::Cheeger => "cheeger",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PerturbationKind {
    Zero,
    Trig,
    Cap,
}

/// Every flag is optional so that config-file values can fill the gaps.
#[derive(Debug, Parser)]
#[command(name = "hyperlap", version, about = "Spectral sweeps for minimal submanifolds of hyperbolic space")]
#[command(args_override_self = true)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Surface dimension(s), comma separated.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    m: Option<Vec<usize>>,
    /// Dimension of the boundary sphere (defaults to m).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, action = ArgAction::Set)]
    lambda: Option<Vec<f64>>,
    /// Radii r.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    r: Option<Vec<f64>>,
    /// Family parameters R.
    #[arg(long = "R", value_delimiter = ',', action = ArgAction::Set)]
    big_r: Option<Vec<f64>>,
    /// Truncation radii L.
    #[arg(long = "L", value_delimiter = ',', action = ArgAction::Set)]
    l: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    /// equator | sphere | circle:RHO | file:PATH
    #[arg(long)]
    gamma: Option<String>,
    /// Cross-section volume for file-based spectra.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long, value_enum)]
    perturbation: Option<PerturbationKind>,
    /// Decay exponent of the trigonometric perturbation.
    #[arg(long)]
    decay: Option<f64>,
    #[arg(long = "rho-cos", value_delimiter = ',', allow_negative_numbers = true, action = ArgAction::Set)]
    rho_cos: Option<Vec<f64>>,
    #[arg(long = "rho-sin", value_delimiter = ',', allow_negative_numbers = true, action = ArgAction::Set)]
    rho_sin: Option<Vec<f64>>,
    /// Width of the radial bumps in sandwich sweeps.
    #[arg(long)]
    width: Option<f64>,
    /// Angles sampled per coordinate in laplace-error sweeps.
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, value_enum)]
    output: Option<OutputFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Keys accepted in a config file; each is also a `--flag`.
pub const CONFIG_KEYS: &[&str] = &[
    "m", "n", "lambda", "r", "R", "L", "k", "r0", "count", "gamma", "omega", "perturbation", "decay",
    "rho-cos", "rho-sin", "width", "angles", "tol", "grid", "output", "out",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected `key = value`", i + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return usage(format!("config line {}: unknown key `{key}`", i + 1));
        }
        if value.is_empty() {
            return usage(format!("config line {}: empty value for `{key}`", i + 1));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Where the cone's cross-section comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSpec {
    Equator,
    Circle(f64),
    File(PathBuf),
}

impl fmt::Display for GammaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSpec::Equator => f.write_str("equator"),
            GammaSpec::Circle(rho) => write!(f, "circle:{rho}"),
            GammaSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn parse_gamma(text: &str) -> Result<GammaSpec, UsageError> {
    match text {
        "equator" | "sphere" => Ok(GammaSpec::Equator),
        _ => {
            if let Some(rho) = text.strip_prefix("circle:") {
                match rho.parse::<f64>() {
                    Ok(v) if v > 0.0 && v < std::f64::consts::PI => Ok(GammaSpec::Circle(v)),
                    _ => usage(format!("circle radius `{rho}` must be a number in (0, π)")),
                }
            } else if let Some(path) = text.strip_prefix("file:") {
                Ok(GammaSpec::File(PathBuf::from(path)))
            } else {
                usage(format!("unknown gamma `{text}` (equator | sphere | circle:RHO | file:PATH)"))
            }
        }
    }
}

/// A fully resolved run; `None` means "use the subcommand default".
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub m: Vec<usize>,
    pub n: Option<usize>,
    pub lambda: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    pub big_r: Option<Vec<f64>>,
    pub l: Option<Vec<f64>>,
    pub k: usize,
    pub r0: Option<f64>,
    pub count: usize,
    pub gamma: Option<GammaSpec>,
    pub omega: f64,
    pub perturbation: Option<PerturbationKind>,
    pub decay: f64,
    pub rho_cos: Vec<f64>,
    pub rho_sin: Vec<f64>,
    pub width: f64,
    pub angles: usize,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub output: OutputFormat,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn dims(&self, m: usize) -> Result<Dimensions, UsageError> {
        Dimensions::new(m, self.n.unwrap_or(m)).map_err(|e| UsageError(e.to_string()))
    }

    /// `(key, value)` pairs echoed into report metadata.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        fn list<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "default".into(), |x| x.to_string())
        }
        fn opt_list<T: fmt::Display>(v: &Option<Vec<T>>) -> String {
            v.as_ref().map_or_else(|| "default".into(), |x| list(x))
        }
        vec![
            ("subcommand", self.subcommand.name().into()),
            ("m", list(&self.m)),
            ("n", opt(&self.n)),
            ("lambda", opt_list(&self.lambda)),
            ("r", opt_list(&self.r)),
            ("R", opt_list(&self.big_r)),
            ("L", opt_list(&self.l)),
            ("k", self.k.to_string()),
            ("r0", opt(&self.r0)),
            ("count", self.count.to_string()),
            ("gamma", opt(&self.gamma)),
            ("omega", self.omega.to_string()),
            (
                "perturbation",
                self.perturbation
                    .map_or_else(|| "default".into(), |p| format!("{p:?}").to_lowercase()),
            ),
            ("decay", self.decay.to_string()),
            ("rho-cos", list(&self.rho_cos)),
            ("rho-sin", list(&self.rho_sin)),
            ("width", self.width.to_string()),
            ("angles", self.angles.to_string()),
            ("tol", opt(&self.tol)),
            ("grid", opt(&self.grid)),
        ]
    }
}

fn check_sweep(name: &str, v: &Option<Vec<f64>>, positive: bool) -> Result<(), UsageError> {
    if let Some(v) = v {
        if v.is_empty() {
            return usage(format!("--{name} needs at least one value"));
        }
        if v.iter().any(|x| !x.is_finite() || (positive && *x <= 0.0)) {
            return usage(format!("--{name} values must be finite{}", if positive { " and positive" } else { "" }));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return usage(format!("--{name} values must be strictly ascending"));
        }
    }
    Ok(())
}

/// Merge the config file (if `--config` is given) under the command-line
/// flags and resolve defaults. `args[0]` is the program name.
pub fn parse_config(args: &[String]) -> Result<RunConfig, ParseOutcome> {
    let first = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let cli = match &first.config {
        None => first,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ParseOutcome::Usage(UsageError(format!("cannot read {}: {e}", path.display()))))?;
            let entries = parse_config_file(&text).map_err(ParseOutcome::Usage)?;
            // file values go first so that later command-line flags override them
            let mut merged = vec![args[0].clone()];
            for (key, value) in entries {
                merged.push(format!("--{key}"));
                merged.push(value);
            }
            merged.extend(args[1..].iter().cloned());
            Cli::try_parse_from(&merged).map_err(ParseOutcome::Clap)?
        }
    };
    resolve(cli).map_err(ParseOutcome::Usage)
}

/// Why argument parsing stopped.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help, version, or a malformed flag, rendered by clap.
    Clap(clap::Error),
    Usage(UsageError),
}

fn resolve(cli: Cli) -> Result<RunConfig, UsageError> {
    let gamma = cli.gamma.as_deref().map(parse_gamma).transpose()?;
    let cfg = RunConfig {
        subcommand: cli.subcommand,
        m: cli.m.unwrap_or_else(|| vec![2]),
        n: cli.n,
        lambda: cli.lambda,
        r: cli.r,
        big_r: cli.big_r,
        l: cli.l,
        k: cli.k.unwrap_or(5),
        r0: cli.r0,
        count: cli.count.unwrap_or(3),
        gamma,
        omega: cli.omega.unwrap_or(1.0),
        perturbation: cli.perturbation,
        decay: cli.decay.unwrap_or(1.0),
        rho_cos: cli.rho_cos.unwrap_or_else(|| vec![0.3, 0.2]),
        rho_sin: cli.rho_sin.unwrap_or_else(|| vec![0.0, 0.1]),
        width: cli.width.unwrap_or(2.0),
        angles: cli.angles.unwrap_or(8),
        tol: cli.tol,
        grid: cli.grid,
        output: cli.output.unwrap_or(OutputFormat::Csv),
        out: cli.out,
    };
    if cfg.m.is_empty() || cfg.m.windows(2).any(|w| w[1] <= w[0]) {
        return usage("--m values must be strictly ascending");
    }
    for &m in &cfg.m {
        cfg.dims(m)?;
    }
    check_sweep("lambda", &cfg.lambda, false)?;
    check_sweep("r", &cfg.r, true)?;
    check_sweep("R", &cfg.big_r, true)?;
    check_sweep("L", &cfg.l, true)?;
    if cfg.k == 0 || cfg.count == 0 || cfg.angles == 0 {
        return usage("--k, --count and --angles must be at least 1");
    }
    if cfg.r0.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
        return usage("--r0 must be nonnegative");
    }
    if !(cfg.omega > 0.0 && cfg.omega.is_finite()) {
        return usage("--omega must be positive");
    }
    if !(cfg.width > 0.0 && cfg.width.is_finite()) {
        return usage("--width must be positive");
    }
    if cfg.tol.is_some_and(|t| !(t > 0.0)) {
        return usage("--tol must be positive");
    }
    if cfg.grid.is_some_and(|g| g < 16) {
        return usage("--grid must be at least 16");
    }
    Ok(cfg)
}
