use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inr_opt_core::definiteness::{InnerRadiusOptions, Method, PerturbationFamily};
use inr_opt_core::levelset::DEFAULT_FILTER_TOL;
use inr_opt_core::param::DEFAULT_EPS_CLUSTER;
use inr_opt_core::subspace::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "inr-opt", version, about = "Inner numerical radius, Crawford number and definiteness tools")]
pub struct Cli {
    /// Output format; csv is the default for `fov`, json elsewhere.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inner numerical radius of C = A + iB.
    Inr(InrArgs),
    /// Crawford number and definiteness of the pair (A, B).
    Definite(InrArgs),
    /// Nearest pair with Crawford number at least delta.
    Distance(DistanceArgs),
    /// Hyperbolicity of a quadratic eigenvalue problem.
    Hyperbolic(HyperbolicArgs),
    /// Shift making a saddle-point matrix positive definite.
    Saddle(SaddleArgs),
    /// Write test matrices as Matrix Market files.
    Gallery(GalleryArgs),
    /// Sampled boundary of the field of values.
    Fov(FovArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Complex matrix C in Matrix Market format.
    #[arg(long, value_name = "C")]
    pub matrix: Option<PathBuf>,

    /// Hermitian parts A and B of C = A + iB.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub pair: Option<Vec<PathBuf>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Levelset,
    Support,
    Subspace,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Levelset => Method::Levelset,
            MethodArg::Support => Method::Support,
            MethodArg::Subspace => Method::Subspace,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,

    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// Eigenvalues within this distance of the largest count as one cluster.
    #[arg(long, default_value_t = DEFAULT_EPS_CLUSTER)]
    pub eps_cluster: f64,

    /// Negative curvature bound for the support method.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    #[arg(long)]
    pub max_iter: Option<usize>,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Starting angle for the support and subspace methods.
    #[arg(long, allow_negative_numbers = true)]
    pub omega0: Option<f64>,

    /// Relative tolerance for accepting level-set points.
    #[arg(long, default_value_t = DEFAULT_FILTER_TOL)]
    pub filter_tol: f64,

    /// Include per-iteration traces.
    #[arg(long)]
    pub trace: bool,
}

impl SolverArgs {
    pub fn options(&self) -> InnerRadiusOptions {
        InnerRadiusOptions {
            method: self.method.into(),
            tol: self.tol,
            max_iter: self.max_iter,
            eps_cluster: self.eps_cluster,
            gamma: self.gamma,
            omega0: self.omega0,
            seed: self.seed,
            filter_tol: self.filter_tol,
        }
    }
}

#[derive(Debug, Args)]
pub struct InrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Clipping,
    Scalar,
}

impl From<FamilyArg> for PerturbationFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Clipping => PerturbationFamily::Clipping,
            FamilyArg::Scalar => PerturbationFamily::Scalar,
        }
    }
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,

    /// Required Crawford number of the repaired pair.
    #[arg(long)]
    pub delta: f64,

    #[arg(long, value_enum, default_value = "clipping")]
    pub family: FamilyArg,

    /// Directory receiving deltaA.mtx, deltaB.mtx, Atilde.mtx and Btilde.mtx.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "qep_source", required = true, multiple = false, args = ["qep", "qep_mass_spring"])]
pub struct HyperbolicArgs {
    /// Mass, damping and stiffness matrices.
    #[arg(long, num_args = 3, value_names = ["M", "D", "K"])]
    pub qep: Option<Vec<PathBuf>>,

    /// Built-in damped mass-spring chain of this size.
    #[arg(long, value_name = "N")]
    pub qep_mass_spring: Option<usize>,

    /// Damping factors; several values run a sweep.
    #[arg(long, value_delimiter = ',', num_args = 1.., requires = "qep_mass_spring")]
    pub beta: Vec<f64>,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
#[group(id = "saddle_source", required = true, multiple = false, args = ["matrix", "synthetic"])]
pub struct SaddleArgs {
    /// Saddle-point matrix S.
    #[arg(long, requires_all = ["n", "m"])]
    pub matrix: Option<PathBuf>,

    /// Size of the leading block.
    #[arg(long)]
    pub n: Option<usize>,

    /// Size of the trailing block.
    #[arg(long)]
    pub m: Option<usize>,

    /// Seeded synthetic instance.
    #[arg(long, num_args = 3, value_names = ["N", "M", "SEED"])]
    pub synthetic: Option<Vec<u64>>,

    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GalleryFamily {
    ChengHigham7,
    Fiedler,
    Moler,
    Grcar,
    TridiagNonsmooth,
    QepMassSpring,
    QepLinearization,
    Poisson2d,
    SparseRandom,
    SyntheticSaddle,
}

#[derive(Debug, Args)]
pub struct GalleryArgs {
    #[arg(value_enum)]
    pub family: GalleryFamily,

    /// Matrix size; the grid side for poisson2d.
    pub size: Option<usize>,

    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,

    #[arg(long, default_value_t = 0.01)]
    pub density: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Trailing block size for synthetic-saddle.
    #[arg(long)]
    pub m: Option<usize>,

    /// Output path; families with several matrices append `_<label>` to the stem.
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FovArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,

    #[arg(long, default_value_t = 360)]
    pub samples: usize,
}
