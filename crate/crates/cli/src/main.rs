use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ism_cli::{
    bound, compare, default_grid, fig1_csv, fig1_sweep, format_bound, parse_domain, recursion_csv,
    recursion_sweep, write_csv, CliError, CompareRow, Fig1Config, RecursionConfig, Result,
    FIG1_X1_MAX,
};

/// Interval superposition bounds for factorable functions.
#[derive(Parser)]
#[command(name = "ism", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print ISA and naive interval bounds of an expression.
    Bound(Target),
    /// Compare ISA and naive interval bounds against a sampled image, as CSV.
    Compare {
        #[command(flatten)]
        target: Target,
        /// Oracle grid points per axis (default: 10^6 points in total).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the benchmark sweeps.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    expr: String,
    /// Box such as `x1=[0,1];x2=[-pi,pi]`.
    #[arg(long)]
    domain: String,
    #[arg(short = 'N', long = "branches", default_value_t = 10)]
    branches: usize,
}

#[derive(Subcommand)]
enum Experiment {
    /// Overestimation of exp(sin(x1)+sin(x2)cos(x2)) over growing boxes; one CSV per x1 bound.
    Fig1 {
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Overestimation for repeated self-composition of a map of R^3.
    Recursion {
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(short = 'N', long = "branches", default_value_t = 20)]
        branches: usize,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bound(t) => {
            let bx = parse_domain(&t.domain)?;
            print!("{}", format_bound(&bound(&t.expr, &bx, t.branches)?));
        }
        Command::Compare {
            target: t,
            grid,
            seed,
            out,
        } => {
            let bx = parse_domain(&t.domain)?;
            let grid = grid.unwrap_or_else(|| default_grid(bx.len()));
            let row = compare(&t.expr, &bx, t.branches, grid, seed)?;
            let meta = [
                ("seed", seed.to_string()),
                ("N", t.branches.to_string()),
                ("grid", grid.to_string()),
                ("config", format!("domain={}", t.domain)),
            ];
            let mut w = sink(out.as_deref())?;
            write_csv(&mut w, &meta, CompareRow::HEADER, [row.to_csv()])?;
            w.flush()?;
        }
        Command::Experiment(Experiment::Fig1 {
            out,
            grid,
            points,
            seed,
        }) => {
            if grid < 2 || points == 0 {
                return Err(CliError::Usage(
                    "fig1 needs --grid >= 2 and --points >= 1".into(),
                ));
            }
            let cfg = Fig1Config { points, grid, seed };
            fs::create_dir_all(&out)?;
            for x1max in FIG1_X1_MAX {
                let rows = fig1_sweep(x1max, &cfg)?;
                for w in rows.iter().flat_map(|r| &r.warnings) {
                    eprintln!("warning: {w}");
                }
                let path = out.join(format!("fig1_x1max_{x1max}.csv"));
                let mut w = BufWriter::new(File::create(&path)?);
                fig1_csv(&mut w, x1max, &cfg, &rows)?;
                w.flush()?;
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Experiment(Experiment::Recursion {
            out,
            depth,
            branches,
            grid,
            seed,
        }) => {
            if depth == 0 {
                return Err(CliError::Usage("--depth must be at least 1".into()));
            }
            let cfg = RecursionConfig {
                depth,
                branches,
                grid,
                seed,
            };
            let rows = recursion_sweep(&cfg)?;
            for w in rows.iter().flat_map(|r| &r.warnings) {
                eprintln!("warning: {w}");
            }
            let mut w = sink(out.as_deref())?;
            recursion_csv(&mut w, &cfg, &rows)?;
            w.flush()?;
        }
    }
    Ok(())
}
