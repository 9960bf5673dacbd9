use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "vortex-atlas", version, about = "Phase singularities of complex scalar waves", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Flat `key = value` file; keys are long flag names, flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,
    /// Worker threads (falls back to VORTEX_ATLAS_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the primary output here instead of stdout (a directory for `render`).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,
    /// JSON output for commands whose default is text or CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// List catalog fields or show one.
    #[command(args_override_self = true)]
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Classify the zero at a point, or every zero found by a scan.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Zeros of a planar field.
    #[command(args_override_self = true)]
    Scan(ScanArgs),
    /// Zero curves of a spatial field.
    #[command(args_override_self = true)]
    Trace(ScanArgs),
    /// Zero counts along a parameter.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Helmholtz or wave equation residual on a grid.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Helmholtz jet strata of zeros, checked against the classifier.
    #[command(args_override_self = true)]
    Strata(StrataArgs),
    /// Class and stratum statistics over random plane-wave sums.
    #[command(args_override_self = true)]
    Montecarlo(MonteCarloArgs),
    /// Equi-phase panels over a parameter grid.
    #[command(args_override_self = true)]
    Render(RenderArgs),
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogAction {
    List,
    Show { name: String },
}

#[derive(Debug, Args, Serialize, Clone)]
#[command(group(ArgGroup::new("source").required(true).args(["field", "expr", "field_file"])))]
pub struct FieldArgs {
    /// Catalog name.
    #[arg(long)]
    pub field: Option<String>,
    /// Field expression in x, y[, z][, t].
    #[arg(long, allow_hyphen_values = true)]
    pub expr: Option<String>,
    /// Dimension of an `--expr` field.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// The `--expr` field depends on time `t`.
    #[arg(long)]
    pub time: bool,
    /// Field file `name; dim; time_flag; params; expression`.
    #[arg(long, value_name = "FILE")]
    pub field_file: Option<String>,
    /// Parameter value `name=value` (repeatable); `t` fixes the time of a wave.
    #[arg(long = "set", value_name = "NAME=VALUE", allow_hyphen_values = true)]
    pub set: Vec<String>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct RegionArgs {
    /// `lo,hi` for a cube or `x0,x1,y0,y1[,z0,z1]`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Grid nodes per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct TolArgs {
    /// Tolerance override `name=value` (tau_zero, tau_rank, tau_fold,
    /// tau_curv, tau_grad, tau_hess); repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("where").required(true).args(["point", "auto"])))]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Comma-separated coordinates of a zero.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Scan the region and classify every zero.
    #[arg(long)]
    pub auto: bool,
    /// Exit with status 3 if any zero is Degenerate.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Parameter to vary.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("equation").required(true).args(["helmholtz", "wave"])))]
pub struct VerifyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Wavenumber k of Δψ + k²ψ = 0.
    #[arg(long)]
    pub helmholtz: Option<f64>,
    /// Speed c of Ψ_tt = c²ΔΨ.
    #[arg(long)]
    pub wave: Option<f64>,
    /// Comma-separated times for `--wave`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0.5,1,1.5,2")]
    pub times: String,
    /// Residuals at or above this fail with status 5.
    #[arg(long, default_value_t = 1e-10)]
    pub threshold: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("where").required(true).args(["point", "auto"])))]
pub struct StrataArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub auto: bool,
    /// Wavenumber of the Helmholtz relations (default: the field's own, else 1).
    #[arg(long)]
    pub k: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Plane waves per field.
    #[arg(long, default_value_t = 8)]
    pub terms: usize,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[command(flatten)]
    pub region: RegionArgs,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PanelFormat {
    Csv,
    Svg,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Parameter varied across panels; without it a single panel is drawn.
    #[arg(long, requires = "values")]
    pub param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Number of equally spaced phase levels.
    #[arg(long, default_value_t = 12)]
    pub levels: usize,
    #[arg(long, value_delimiter = ',', default_value = "csv,svg")]
    pub format: Vec<PanelFormat>,
}
