//! `phgen`: construct, sample, check and study structured linear systems.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phgen::ScalarField;

use config::{HLawName, ReportFormat, RunConfig, SEED_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(phgen::Error),
}

impl From<phgen::Error> for CliError {
    fn from(e: phgen::Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.into())
    }
}

#[derive(Parser)]
#[command(name = "phgen", version, about = "Controllability tools for port-Hamiltonian systems")]
struct Cli {
    /// JSON file with run settings (or a previous report)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Default)]
struct DimArgs {
    /// State dimension
    #[arg(long)]
    n: Option<usize>,
    /// Input dimension
    #[arg(long)]
    m: Option<usize>,
    /// Scalar field: real or complex
    #[arg(long)]
    field: Option<ScalarField>,
}

#[derive(Args, Default)]
struct SamplerArgs {
    /// Law of H
    #[arg(long, value_enum)]
    h_law: Option<HLawName>,
    /// Wishart degrees of freedom (default n)
    #[arg(long)]
    wishart_p: Option<usize>,
    /// Diagonal shift of the shifted Gram law
    #[arg(long)]
    gram_eps: Option<f64>,
    #[arg(long)]
    j_scale: Option<f64>,
    #[arg(long)]
    b_scale: Option<f64>,
}

#[derive(Args, Default)]
struct TolArgs {
    /// Absolute tolerance for the skew/self-adjoint residual checks
    #[arg(long)]
    structure_tol: Option<f64>,
    /// Relative rank tolerance for the Kalman SVD
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Relative tolerance for the Hautus test
    #[arg(long)]
    pbh_tol: Option<f64>,
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Also run the Hautus test on every trial
    #[arg(long)]
    cross_check: bool,
}

#[derive(Args, Default)]
struct InputArgs {
    /// Input file; standard input when omitted or `-`
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
}

#[derive(Args, Default)]
struct OutArgs {
    /// Output file; standard output when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct ReportArgs {
    /// JSON report file; standard output when omitted
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// CSV table file; standard output when omitted
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a system file is structurally valid
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Also require H to be positive definite
        #[arg(long)]
        require_pd: bool,
    },
    /// Emit the canonical controllable system
    Witness {
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Map a system to its coordinate vector
    Pack {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Map a coordinate vector back to a system
    Unpack {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draw random systems as JSON lines
    Sample {
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        count: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Kalman rank report of a system
    Check {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo estimate of the controllable fraction
    McGenericity {
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        batch_size: Option<u64>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Perturb an uncontrollable system at several scales
    PerturbProbe {
        #[command(flatten)]
        dims: DimArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        tol: TolArgs,
        /// Size of the controllable block of the sampled base
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated perturbation sizes
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Base system file instead of a sampled one
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Estimate the distance to the nearest uncontrollable input pencil
    DistUnctrb {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        refine_iters: Option<usize>,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Partial measure of the dense open interval union
    Prop1 {
        #[arg(long)]
        i_max: Option<u64>,
        /// Point to test for membership
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl DimArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.n, self.n);
        set(&mut c.m, self.m);
        set(&mut c.field, self.field);
    }
}

impl SamplerArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.h_law, self.h_law);
        if self.wishart_p.is_some() {
            c.wishart_p = self.wishart_p;
        }
        set(&mut c.gram_eps, self.gram_eps);
        set(&mut c.j_scale, self.j_scale);
        set(&mut c.b_scale, self.b_scale);
    }
}

impl TolArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.structure_tol, self.structure_tol);
        if self.rank_tol.is_some() {
            c.rank_tol = self.rank_tol;
        }
        if self.pbh_tol.is_some() {
            c.pbh_tol = self.pbh_tol;
        }
    }
}

impl RunArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.seed, self.seed);
        set(&mut c.trials, self.trials);
        c.cross_check |= self.cross_check;
    }
}

impl InputArgs {
    fn apply(self, c: &mut RunConfig) {
        if self.input.is_some() {
            c.input = self.input;
        }
    }
}

impl OutArgs {
    fn apply(self, c: &mut RunConfig) {
        if self.out.is_some() {
            c.out = self.out;
        }
    }
}

impl ReportArgs {
    fn apply(self, c: &mut RunConfig) {
        if self.out.is_some() {
            c.out = self.out;
        }
        if self.csv.is_some() {
            c.csv = self.csv;
        }
        set(&mut c.format, self.format);
    }
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Validate { .. } => "validate",
            Cmd::Witness { .. } => "witness",
            Cmd::Pack { .. } => "pack",
            Cmd::Unpack { .. } => "unpack",
            Cmd::Sample { .. } => "sample",
            Cmd::Check { .. } => "check",
            Cmd::McGenericity { .. } => "mc-genericity",
            Cmd::PerturbProbe { .. } => "perturb-probe",
            Cmd::DistUnctrb { .. } => "dist-unctrb",
            Cmd::Prop1 { .. } => "prop1",
        }
    }

    /// Layers this subcommand's flags over `c`.
    fn apply(self, c: &mut RunConfig) {
        c.subcommand = self.name().to_string();
        match self {
            Cmd::Validate { input, tol, require_pd } => {
                input.apply(c);
                tol.apply(c);
                c.require_pd |= require_pd;
            }
            Cmd::Witness { dims, out } => {
                dims.apply(c);
                out.apply(c);
            }
            Cmd::Pack { input, tol, out } | Cmd::Check { input, tol, out } => {
                input.apply(c);
                tol.apply(c);
                out.apply(c);
            }
            Cmd::Unpack { input, out } => {
                input.apply(c);
                out.apply(c);
            }
            Cmd::Sample { dims, sampler, seed, count, out } => {
                dims.apply(c);
                sampler.apply(c);
                set(&mut c.seed, seed);
                set(&mut c.count, count);
                out.apply(c);
            }
            Cmd::McGenericity { dims, sampler, run, tol, batch_size, report } => {
                dims.apply(c);
                sampler.apply(c);
                run.apply(c);
                tol.apply(c);
                set(&mut c.batch_size, batch_size);
                report.apply(c);
            }
            Cmd::PerturbProbe { dims, sampler, run, tol, k, eps, input, report } => {
                dims.apply(c);
                sampler.apply(c);
                run.apply(c);
                tol.apply(c);
                set(&mut c.k, k);
                set(&mut c.eps_grid, eps);
                if input.is_some() {
                    c.input = input;
                }
                report.apply(c);
            }
            Cmd::DistUnctrb { input, tol, grid_points, refine_iters, report } => {
                input.apply(c);
                tol.apply(c);
                set(&mut c.grid_points, grid_points);
                set(&mut c.refine_iters, refine_iters);
                report.apply(c);
            }
            Cmd::Prop1 { i_max, x, report } => {
                set(&mut c.i_max, i_max);
                if x.is_some() {
                    c.x = x;
                }
                report.apply(c);
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut cfg = RunConfig::layered(env_seed.as_deref(), cli.config.as_deref())?;
    cli.cmd.apply(&mut cfg);
    commands::dispatch(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("phgen: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("phgen: error: {e}");
            ExitCode::from(1)
        }
    }
}
