//! `peskin` command-line driver: simulations, threshold sweeps, constants,
//! and the multiplier and linearization checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "peskin", version, about = "Spectral solver and verification harness for the 2D Peskin problem")]
struct Cli {
    /// Output directory for all generated files
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Seed for randomized checks
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a curve from a TOML run configuration
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Tabulate the smallness threshold k(A_mu) and its closed form
    Kcurve {
        #[arg(long, default_value_t = -0.95, allow_hyphen_values = true)]
        a_mu_min: f64,
        #[arg(long, default_value_t = 0.95, allow_hyphen_values = true)]
        a_mu_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Check the multiplier integral bounds on random tuples
    LemmaCheck {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, default_value_t = 20)]
        max_k: i64,
    },
    /// Evaluate the constants C1..C17, D1..D5 and the dissipation constants
    Constants {
        #[arg(long, allow_hyphen_values = true)]
        x_norm: f64,
        #[arg(long, allow_hyphen_values = true)]
        a_mu: f64,
        #[arg(long, default_value_t = 0.0)]
        nu_m: f64,
        #[arg(long, default_value_t = 1.0)]
        a_e: f64,
    },
    /// Measure the quadratic order of the nonlinear remainders
    VerifyLinear {
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        a_mu: f64,
        #[arg(long, default_value_t = 1.0)]
        a_e: f64,
        #[arg(long, default_value_t = 12)]
        max_mode: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(commands::EXIT_USAGE);
        }
        peskin::exec::set_threads(t);
    }
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(commands::EXIT_USAGE);
    }
    let ctx = commands::Context { out: cli.out, seed: cli.seed };
    let code = match cli.command {
        Command::Simulate { config } => commands::simulate(&ctx, &config),
        Command::Kcurve { a_mu_min, a_mu_max, steps } => commands::kcurve(&ctx, a_mu_min, a_mu_max, steps),
        Command::LemmaCheck { count, max_n, max_k } => commands::lemma_check(&ctx, count, max_n, max_k),
        Command::Constants { x_norm, a_mu, nu_m, a_e } => commands::constants(&ctx, x_norm, a_mu, nu_m, a_e),
        Command::VerifyLinear { eps, a_mu, a_e, max_mode } => commands::verify_linear(&ctx, &eps, a_mu, a_e, max_mode),
    };
    ExitCode::from(code)
}
