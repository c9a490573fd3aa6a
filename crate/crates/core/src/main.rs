use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ridgeapprox::cli::{self, Outcome, DEFAULT_VERIFY_THRESHOLD};

#[derive(Parser)]
#[command(
    name = "ridgeapprox",
    version,
    about = "Best L2 approximation by weighted ridge functions"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a config file and write the results
    Solve {
        config: PathBuf,
        /// Output directory
        #[arg(short = 'o', long = "out", default_value = "results")]
        outdir: PathBuf,
        /// Gauss nodes per axis (overrides the config)
        #[arg(short = 'q', value_parser = clap::value_parser!(u32).range(1..))]
        order: Option<u32>,
        /// Use the fixed-point solver even when all weights are one
        #[arg(long)]
        force_fixed_point: bool,
        /// Also write each component resampled at N equispaced points
        #[arg(long, value_name = "N")]
        dense: Option<usize>,
    },
    /// Check the optimality conditions of previously written results
    Verify {
        config: PathBuf,
        outdir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERIFY_THRESHOLD)]
        threshold: f64,
    },
    /// Compare the solver against the dense least-squares oracle
    Oracle {
        config: PathBuf,
        #[arg(short = 'q', value_parser = clap::value_parser!(u32).range(1..))]
        order: Option<u32>,
        #[arg(long)]
        force_fixed_point: bool,
    },
    /// Resample written components on a dense equispaced grid
    Export {
        outdir: PathBuf,
        #[arg(long, value_name = "N")]
        dense: usize,
    },
}

fn configure_threads() {
    let Ok(raw) = std::env::var("RIDGEAPPROX_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Err(_) => eprintln!("warning: ignoring RIDGEAPPROX_THREADS={raw}"),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();

    let result = match args.command {
        Command::Solve {
            config,
            outdir,
            order,
            force_fixed_point,
            dense,
        } => cli::solve(&config, &outdir, order.map(|q| q as usize), force_fixed_point, dense),
        Command::Verify {
            config,
            outdir,
            threshold,
        } => cli::verify(&config, &outdir, threshold),
        Command::Oracle {
            config,
            order,
            force_fixed_point,
        } => cli::oracle(&config, order.map(|q| q as usize), force_fixed_point),
        Command::Export { outdir, dense } => cli::export(&outdir, dense),
    };

    match result {
        Ok(Outcome { report, exit_code }) => {
            print!("{report}");
            ExitCode::from(exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
