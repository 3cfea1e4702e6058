mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Status;
use config::Params;

/// Spike deconvolution experiments and certification.
#[derive(Parser)]
#[command(name = "deconv", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` or `--key=value`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve an l1 program on CSV inputs (keys: samples, values, grid|grid_n, program, lambda, xi_bar, truth, out)
    Solve(Common),
    /// Certify one (delta, gamma, kappa) point, or the sparse-noise setting with mode=sparse
    Certify(Common),
    /// Certify a delta x gamma grid
    Region(Common),
    /// Singular values of the kernel matrix versus spike separation
    Conditioning(Common),
    /// Recovery fractions over (delta, gamma) with two samples per spike
    Phase(Common),
    /// Recovery fractions over (delta, grid width) with uniform samples
    UniformPhase(Common),
    /// Sparse-noise recovery sweeps
    SparsePhase(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (c, run): (&Common, fn(&Params) -> deconv_core::Result<Status>) = match &cli.cmd {
        Cmd::Solve(c) => (c, commands::solve),
        Cmd::Certify(c) => (c, commands::certify),
        Cmd::Region(c) => (c, commands::region),
        Cmd::Conditioning(c) => (c, commands::run_conditioning),
        Cmd::Phase(c) => (c, commands::run_phase),
        Cmd::UniformPhase(c) => (c, commands::run_uniform_phase),
        Cmd::SparsePhase(c) => (c, commands::run_sparse_phase),
    };
    let result = Params::load(c.config.as_deref(), &c.overrides).and_then(|p| run(&p));
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("deconv: {e}");
            ExitCode::from(2)
        }
    }
}
