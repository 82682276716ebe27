use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cornerlab::radius::{DEFAULT_GRID_POINTS, DEFAULT_SAMPLES};
use cornerlab::RadiusMode;
use cornerlab_cli::commands::{self, BuildOptions, SweepOptions};
use cornerlab_cli::sweep::write_rows;
use cornerlab_cli::CliError;

/// Corner-free subsets of [N]^2 from torus rotations.
#[derive(Parser, Debug)]
#[command(name = "cornerlab", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Mc,
    Exact,
}

#[derive(clap::Args, Debug, Clone)]
struct RadiusArgs {
    /// How the annulus radius is chosen.
    #[arg(long = "radius-mode", value_enum, default_value = "mc")]
    mode: Mode,
    /// Monte Carlo samples for `--radius-mode mc`.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// Grid resolution for `--radius-mode exact`.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
}

impl RadiusArgs {
    fn mode(&self) -> RadiusMode {
        match self.mode {
            Mode::Mc => RadiusMode::Mc {
                samples: self.samples,
            },
            Mode::Exact => RadiusMode::Exact {
                grid_points: self.grid_points,
            },
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn grid_side(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if (1..=cornerlab::grid::MAX_SIDE).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [1, {}]", cornerlab::grid::MAX_SIDE))
    }
}

/// `auto` or a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DimArg(Option<usize>);

fn dimension(s: &str) -> Result<DimArg, String> {
    if s == "auto" {
        return Ok(DimArg(None));
    }
    match s.parse::<usize>() {
        Ok(d) if d >= 1 => Ok(DimArg(Some(d))),
        _ => Err(format!(
            "expected \"auto\" or a positive integer, got {s:?}"
        )),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a verified corner-free set and write it as JSON.
    Build {
        #[arg(long, value_parser = grid_side)]
        n: usize,
        /// Dimension D, or "auto".
        #[arg(long, value_parser = dimension, default_value = "auto")]
        d: DimArg,
        #[arg(long, value_parser = positive_f64, default_value_t = 0.1)]
        delta_coeff: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 8)]
        mu_trials: u64,
        #[command(flatten)]
        radius: RadiusArgs,
        /// Output path (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a set file for corners.
    Verify { path: PathBuf },
    /// Build one set per (n, seed) and print CSV.
    Sweep {
        /// Comma-separated grid sides.
        #[arg(long, value_delimiter = ',', required = true, value_parser = grid_side)]
        n_list: Vec<usize>,
        #[arg(long, value_parser = dimension, default_value = "auto")]
        d: DimArg,
        /// Seeds 0..count per grid side.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        no_verify: bool,
        /// Append Behrend baseline size and density columns.
        #[arg(long)]
        with_baseline: bool,
        #[arg(long, value_parser = positive_f64, default_value_t = 0.1)]
        delta_coeff: f64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 8)]
        mu_trials: u64,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pick an annulus radius and report its volume as JSON.
    Estimate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
        #[arg(long, value_parser = positive_f64, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long, value_enum, default_value = "mc")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the Behrend diagonal-lift baseline and write it as JSON.
    Baseline {
        #[arg(long, value_parser = grid_side)]
        n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    commands::init_threads()?;
    match cli.command {
        Command::Build {
            n,
            d,
            delta_coeff,
            seed,
            mu_trials,
            radius,
            output,
        } => {
            let opts = BuildOptions {
                n,
                d: d.0,
                delta_coeff,
                seed,
                mu_trials: mu_trials as usize,
                mode: radius.mode(),
            };
            let built = commands::build(&opts)?;
            let c = &built.construction;
            eprintln!(
                "n={} d={} r={} delta={} size={} expected={:.1} halvings={} verified=corner-free",
                c.params.n,
                c.params.d,
                c.spec.r,
                c.spec.delta,
                c.set.len(),
                c.expected_size(),
                c.halvings
            );
            write_out(output.as_deref(), built.file.to_json().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { path } => {
            let report = commands::verify_path(&path)?;
            match report.witness {
                None => {
                    println!("corner-free ({} points)", report.size);
                    Ok(ExitCode::SUCCESS)
                }
                Some(w) => {
                    println!("{w}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Sweep {
            n_list,
            d,
            seeds,
            no_verify,
            with_baseline,
            delta_coeff,
            mu_trials,
            radius,
            output,
        } => {
            let opts = SweepOptions {
                n_list,
                d: d.0,
                seeds,
                verify: !no_verify,
                delta_coeff,
                mu_trials: mu_trials as usize,
                mode: radius.mode(),
            };
            let rows = commands::sweep(&opts)?;
            let mut buf = Vec::new();
            let written = if with_baseline {
                write_rows(&mut buf, &commands::compare_with_baseline(&rows)?)
            } else {
                write_rows(&mut buf, &rows)
            };
            written.map_err(|e| CliError::Usage(e.to_string()))?;
            write_out(output.as_deref(), &buf)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate {
            d,
            delta,
            mode,
            samples,
            grid_points,
            seed,
        } => {
            let mode = RadiusArgs {
                mode,
                samples,
                grid_points,
            }
            .mode();
            let est = commands::estimate(d as usize, delta, mode, seed)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&est).expect("estimate serializes")
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Baseline { n, output } => {
            let file = commands::baseline_file(n)?;
            eprintln!("n={n} size={} verified=corner-free", file.points.len());
            write_out(output.as_deref(), file.to_json().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
