use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oddflow::app::{self, verify};
use oddflow::config::RunConfig;
use oddflow::Result;

#[derive(Parser)]
#[command(name = "oddflow", version, about = "Incompressible flows with shear and odd viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Nonexistence,
}

#[derive(Subcommand)]
enum Command {
    /// Periodic evolution; writes state dumps, energy.csv and density.csv.
    Evolve(Common),
    /// Stream-function solve on a rectangle; writes phi/velocity dumps and iterations.csv.
    Stationary(Common),
    /// Parallel, concentric or radial flow profiles.
    Symmetric {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        demo: Option<Demo>,
    },
    /// Vanishing odd-viscosity perturbation ν_o = c0 + ε sin ρ.
    SweepOddLimit(Common),
    /// Run the invariant checks and print a table.
    Verify {
        /// Only run checks whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn load(common: &Common, section: &str) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set(section, "seed", seed.to_string());
    }
    Ok(cfg)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Evolve(c) => {
            let s = app::cmd_evolve(&load(&c, "evolve")?, &c.out)?;
            println!("steps {} t {:.6}", s.steps, s.t_end);
            println!("kinetic {:.6e} -> {:.6e}", s.kinetic.0, s.kinetic.1);
            println!("max balance defect {:.3e}", s.max_balance_defect);
            println!("density range [{:.12}, {:.12}], mass drift {:.3e}", s.rho_range.0, s.rho_range.1, s.mass_drift);
        }
        Command::Stationary(c) => {
            let s = app::cmd_stationary(&load(&c, "stationary")?, &c.out)?;
            println!("converged in {} iterations (update {:.3e})", s.iterations, s.final_update_norm);
            for (k, (n, e)) in s.errors.iter().enumerate() {
                match k.checked_sub(1).map(|j| s.errors[j]) {
                    Some((m, f)) => println!("n {n:>4} error {e:.6e} order {:.3}", (f / e).ln() / (*n as f64 / m as f64).ln()),
                    None => println!("n {n:>4} error {e:.6e}"),
                }
            }
            let r = &s.ellipticity;
            println!("ellipticity [{:.4}, {:.4}] within [{:.4}, {:.4}], odd {:.1e}", r.min_quotient, r.max_quotient, r.lower, r.upper, r.max_odd);
        }
        Command::Symmetric { common, demo } => match demo {
            Some(Demo::Nonexistence) => {
                let r = app::cmd_nonexistence(&load(&common, "symmetric")?, &common.out)?;
                println!("{:>5} {:>12} {:>12} {:>6}", "n", "residual", "|h|_H1", "iter");
                for row in &r.rows {
                    println!("{:>5} {:>12.4e} {:>12.4e} {:>6}", row.n, row.residual, row.h1_seminorm, row.iterations);
                }
                println!("indicator {}", r.indicator);
            }
            None => {
                let s = app::cmd_symmetric(&load(&common, "symmetric")?, &common.out)?.solution;
                println!("{:?}: reduced residual {:.3e}, momentum residual {:.3e}", s.kind, s.reduced_residual, s.momentum_residual);
                if let Some(inc) = s.incompatibility {
                    println!("strict incompatibility {inc:.3e}");
                }
            }
        },
        Command::SweepOddLimit(c) => {
            for row in app::cmd_sweep(&load(&c, "sweep")?, &c.out)? {
                println!("eps {:<6} l2_diff {:.6e}", row.eps, row.l2_diff);
            }
        }
        Command::Verify { filter, seed, inject_fault } => {
            let results = verify::run_checks(filter.as_deref(), seed, inject_fault);
            if results.is_empty() {
                eprintln!("no check matches the filter");
                return Ok(app::EXIT_INVALID);
            }
            print!("{}", verify::format_table(&results));
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
            if !failed.is_empty() {
                eprintln!("failed: {}", failed.join(", "));
                return Ok(app::EXIT_CHECK_FAILED);
            }
        }
    }
    Ok(app::EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            app::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
