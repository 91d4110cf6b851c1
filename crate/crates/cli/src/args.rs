use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uulab_core::{Family, Scalar, UpdateRule, WeightMode};

#[derive(Debug, Parser)]
#[command(name = "uulab", version, about = "Strong unstable manifolds, u-measures and SRB measures on the 3-torus")]
pub struct Cli {
    /// key=value file supplying defaults; command-line flags and UULAB_* variables take precedence.
    #[arg(long, global = true, env = "UULAB_CONFIG")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, env = "UULAB_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Directory receiving CSV outputs and the run manifest.
    #[arg(long, global = true, env = "UULAB_OUT", default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intersections of the strong unstable manifold with the transversal y = 0.
    Manifold(ManifoldArgs),
    /// Noisy orbit sampling of the SRB measure.
    Srb(SrbArgs),
    /// Periodic orbit census and eigenvalue spectra over a parameter grid.
    Periodic(PeriodicArgs),
    /// RSD decay table and distribution-function dumps.
    Stats(StatsArgs),
    /// KS and RSD comparison of a u-sample against an SRB slice.
    Compare(CompareArgs),
    /// Oracle checks on the unperturbed automorphism.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Manifold(_) => "manifold",
            Command::Srb(_) => "srb",
            Command::Periodic(_) => "periodic",
            Command::Stats(_) => "stats",
            Command::Compare(_) => "compare",
            Command::Selftest(_) => "selftest",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// L (linear), D (dissipative) or C (conservative).
    #[arg(long, env = "UULAB_FAMILY", default_value = "C", value_parser = parse_family)]
    pub family: Family,

    #[arg(long, env = "UULAB_EPSILON", default_value = "0", value_parser = parse_scalar, allow_hyphen_values = true)]
    pub epsilon: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpdateArg {
    Newton,
    Mixing,
}

impl From<UpdateArg> for UpdateRule {
    fn from(u: UpdateArg) -> Self {
        match u {
            UpdateArg::Newton => UpdateRule::Newton,
            UpdateArg::Mixing => UpdateRule::Mixing,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ManifoldArgs {
    #[command(flatten)]
    pub map: MapArgs,

    /// Inclusive range of integer levels, e.g. 1..10000 or -500..-1; zero is skipped.
    #[arg(long, env = "UULAB_Y0", default_value = "1..10000", value_parser = parse_range, allow_hyphen_values = true)]
    pub y0: Y0Range,

    /// Number of forward iterates from the local eigenline.
    #[arg(long, env = "UULAB_DEPTH", default_value_t = 50)]
    pub depth: u32,

    #[arg(long, env = "UULAB_UPDATE", value_enum, default_value = "newton")]
    pub update: UpdateArg,

    /// Relaxation parameter of the mixing update.
    #[arg(long, env = "UULAB_MIX", default_value = "0.1", value_parser = parse_scalar)]
    pub mix: Scalar,

    #[arg(long, env = "UULAB_TOL_Y", default_value = "1e-24", value_parser = parse_scalar)]
    pub tol_y: Scalar,

    #[arg(long, env = "UULAB_MAX_ITER", default_value_t = 2000)]
    pub max_iter: u32,

    /// Offset along the transversal used for the Jacobian density.
    #[arg(long, env = "UULAB_DELTA_Q", default_value = "1e-10", value_parser = parse_scalar)]
    pub delta_q: Scalar,
}

#[derive(Debug, Clone, Args)]
pub struct SrbArgs {
    #[command(flatten)]
    pub map: MapArgs,

    #[arg(long, env = "UULAB_SIGMA", default_value = "1e-29", value_parser = parse_scalar)]
    pub sigma: Scalar,

    #[arg(long, env = "UULAB_SEED", default_value_t = 1)]
    pub seed: u64,

    #[arg(long, env = "UULAB_BURN_IN", default_value_t = 10_000)]
    pub burn_in: u64,

    /// Recorded steps per chain.
    #[arg(long, env = "UULAB_STEPS", default_value_t = 1_000_000)]
    pub steps: u64,

    /// Independent chains, concatenated in chain order.
    #[arg(long, env = "UULAB_CHAINS", default_value_t = 1)]
    pub chains: usize,

    #[arg(long, env = "UULAB_SLICE_HALF_WIDTH", default_value = "0.005", value_parser = parse_scalar)]
    pub slice_half_width: Scalar,

    /// Redraw standard normals beyond 6 in absolute value.
    #[arg(long, env = "UULAB_TRUNCATE")]
    pub truncate: bool,

    /// Also write every step to chain.csv.
    #[arg(long, env = "UULAB_FULL_CHAIN")]
    pub full_chain: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PeriodicArgs {
    #[arg(long, env = "UULAB_FAMILY", default_value = "C", value_parser = parse_family)]
    pub family: Family,

    /// Comma list (0,0.05) or inclusive start:stop:step (0:0.14:0.02).
    #[arg(long, env = "UULAB_EPSILON_GRID", default_value = "0", value_parser = parse_grid)]
    pub epsilon_grid: EpsilonGrid,

    #[arg(long, env = "UULAB_MESH", default_value_t = 120)]
    pub mesh: usize,

    #[arg(long, env = "UULAB_PERIOD", default_value_t = 3)]
    pub period: u32,

    /// Largest return distance at a mesh minimum that is passed to refinement.
    #[arg(long, env = "UULAB_CAPTURE_THRESHOLD", default_value_t = 0.3)]
    pub capture_threshold: f64,

    #[arg(long, env = "UULAB_REFINE_TARGET", default_value_t = 1e-5)]
    pub refine_target: f64,

    #[arg(long, env = "UULAB_FD_STEP", default_value_t = 1e-7)]
    pub fd_step: f64,

    #[arg(long, env = "UULAB_DESCENT_STEP", default_value_t = 1e-2)]
    pub descent_step: f64,

    /// Fail on orbits whose minimal period is a proper divisor of --period.
    #[arg(long, env = "UULAB_STRICT_PERIOD")]
    pub strict_period: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Plain,
    Rho,
    Angle,
    #[value(name = "rho_angle", alias = "rho-angle")]
    RhoAngle,
}

impl From<ModeArg> for WeightMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Plain => WeightMode::Plain,
            ModeArg::Rho => WeightMode::Rho,
            ModeArg::Angle => WeightMode::Angle,
            ModeArg::RhoAngle => WeightMode::RhoAngle,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Manifold samples CSV.
    #[arg(long, env = "UULAB_U")]
    pub u: Option<PathBuf>,

    /// SRB slice CSV.
    #[arg(long, env = "UULAB_SRB")]
    pub srb: Option<PathBuf>,

    #[arg(long, env = "UULAB_BINS", default_value_t = 200)]
    pub bins: usize,

    /// Weighting of the u-sample used for the distribution dump and KS values.
    #[arg(long, env = "UULAB_MODE", value_enum, default_value = "rho_angle")]
    pub mode: ModeArg,

    /// Write distribution functions and KS statistics.
    #[arg(long, env = "UULAB_KS")]
    pub ks: bool,

    /// Sample counts for the decay table; default is every power of ten plus the full size.
    #[arg(long, env = "UULAB_CHECKPOINTS", value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long, env = "UULAB_U")]
    pub u: PathBuf,

    #[arg(long, env = "UULAB_SRB")]
    pub srb: PathBuf,

    #[arg(long, env = "UULAB_BINS", default_value_t = 200)]
    pub bins: usize,

    #[arg(long, env = "UULAB_MODE", value_enum, default_value = "rho_angle")]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Levels 1..=N checked against the closed-form eigenline.
    #[arg(long, env = "UULAB_Y0_MAX", default_value_t = 1000)]
    pub y0_max: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Y0Range {
    pub start: i64,
    pub end: i64,
}

impl std::fmt::Display for Y0Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid(pub Vec<Scalar>);

pub fn parse_scalar(s: &str) -> Result<Scalar, String> {
    s.trim().parse::<Scalar>().map_err(|e| e.to_string())
}

pub fn parse_family(s: &str) -> Result<Family, String> {
    s.trim().parse::<Family>().map_err(|e| e.to_string())
}

pub fn parse_range(s: &str) -> Result<Y0Range, String> {
    let s = s.trim();
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let start: i64 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let end: i64 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if start > end {
        return Err(format!("empty range {s}"));
    }
    if start == 0 && end == 0 {
        return Err("range contains only y0 = 0".into());
    }
    Ok(Y0Range { start, end })
}

pub fn parse_grid(s: &str) -> Result<EpsilonGrid, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (parse_scalar(a)?, parse_scalar(b)?, parse_scalar(step)?);
            if !(step > Scalar::ZERO) || b < a {
                return Err(format!("bad grid {s:?}: need start <= stop and step > 0"));
            }
            let n = ((b - a) / step).to_f64();
            if n > 1e6 {
                return Err(format!("grid {s:?} has too many points"));
            }
            let n = (n + 1e-9).floor() as u64;
            (0..=n).map(|k| a + step * Scalar::from_f64(k as f64)).collect()
        }
        [list] => list.split(',').map(parse_scalar).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("bad grid {s:?}")),
    };
    if values.is_empty() {
        return Err("empty grid".into());
    }
    Ok(EpsilonGrid(values))
}
