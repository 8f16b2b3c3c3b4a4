//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use foldsaddle_core::bifurcation::{sphere_witnesses, CLASSIFY_TOL};
use foldsaddle_core::{FamilyParams, FilippovSystem, TauKind, Window};

use crate::acceptance::{criteria, invariants, DEFAULT_SEED};
use crate::svg::{emit_portrait, PortraitOptions};
use crate::tables::{emit_tables, write_sphere_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "foldsaddle", version, about = "Fold-saddle Filippov systems: cases, portraits and diagrams")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ParamArgs {
    /// Upper fold type: inv or vis.
    #[arg(long, value_parser = parse_tau)]
    pub tau: TauKind,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Case label and topological class of one parameter point.
    Classify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = CLASSIFY_TOL)]
        tol: f64,
    },
    /// SVG phase portrait.
    Portrait {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, short)]
        out: PathBuf,
        /// Trajectory starts per row (three rows).
        #[arg(long, default_value_t = 9)]
        fan: usize,
        #[arg(long, default_value_t = 20.0)]
        max_time: f64,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
    },
    /// Case labels over a (lambda, beta) grid at fixed alpha.
    Diagram {
        #[arg(long, value_parser = parse_tau)]
        tau: TauKind,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -0.95)]
        lambda_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.95)]
        lambda_max: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = -0.85)]
        beta_min: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 0.85)]
        beta_max: f64,
        /// Cells per axis, or `NxM` for lambda x beta.
        #[arg(long, default_value = "200", value_parser = parse_resolution)]
        resolution: (usize, usize),
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        json: PathBuf,
    },
    /// Boundary values of the lambda row at (alpha, beta).
    Boundaries {
        #[arg(long, value_parser = parse_tau)]
        tau: TauKind,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Canard cycles, pseudo-equilibria and Sigma-graphs.
    Cycles {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Case labels on a sphere around the origin of (lambda, mu, beta).
    Sphere {
        #[arg(long, value_parser = parse_tau)]
        tau: TauKind,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        csv: PathBuf,
        /// Append constructed boundary-case points.
        #[arg(long)]
        witnesses: bool,
    },
    /// Runs the invariant suites and the acceptance criteria.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Skip the acceptance criteria.
        #[arg(long)]
        quick: bool,
    },
}

fn parse_tau(s: &str) -> Result<TauKind, String> {
    s.parse().map_err(|_| format!("expected inv or vis, got `{s}`"))
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected N or NxM, got `{s}`");
    let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(bad);
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

fn system(p: ParamArgs, half_width: f64) -> foldsaddle_core::Result<FilippovSystem> {
    let params = FamilyParams::new(p.tau, p.lambda, p.alpha, p.beta)?;
    let h = half_width;
    Ok(FilippovSystem::new(params, Window { xmin: -h, xmax: h, ymin: -h, ymax: h }))
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn check_params(tau: TauKind, alpha: f64, beta: f64) -> foldsaddle_core::Result<()> {
    FamilyParams::new(tau, 0.0, alpha, beta).map(|_| ())
}

/// Executes a parsed command, writing reports to `out`. Returns the exit code.
pub fn execute(cmd: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Classify { params: p, tol } => {
            print_json(out, &crate::report::classify(p.tau, p.lambda, p.alpha, p.beta, tol)?)?;
        }
        Command::Portrait { params, out: path, fan, max_time, half_width } => {
            let sys = system(params, half_width)?;
            emit_portrait(&sys, &path, &PortraitOptions { fan, max_time, ..Default::default() })?;
            writeln!(out, "{}", path.display())?;
        }
        Command::Diagram { tau, alpha, lambda_min, lambda_max, beta_min, beta_max, resolution, csv, json } => {
            check_params(tau, alpha, 0.5 * (beta_min + beta_max))?;
            check_params(tau, alpha, beta_min)?;
            check_params(tau, alpha, beta_max)?;
            let d = crate::sweep::sweep_grid(tau, alpha, (lambda_min, lambda_max), (beta_min, beta_max), resolution);
            emit_tables(&d, &csv, &json)?;
            writeln!(out, "{} cells -> {}, {}", d.cells.len(), csv.display(), json.display())?;
        }
        Command::Boundaries { tau, alpha, beta } => {
            check_params(tau, alpha, beta)?;
            print_json(out, &crate::report::boundaries_report(tau, alpha, beta)?)?;
        }
        Command::Cycles { params } => {
            let sys = system(params, 1.0)?;
            print_json(out, &crate::report::cycles_report(&sys))?;
        }
        Command::Sphere { tau, radius, samples, csv, witnesses } => {
            if !(radius > 0.0 && radius < 0.8) {
                anyhow::bail!("radius must lie in (0, 0.8)");
            }
            let mut s = crate::sweep::sweep_sphere(tau, radius, samples);
            if witnesses {
                s.extend(sphere_witnesses(tau, radius));
            }
            write_sphere_csv(&s, std::io::BufWriter::new(std::fs::File::create(&csv)?))?;
            writeln!(out, "{} samples -> {}", s.len(), csv.display())?;
        }
        Command::Verify { seed, quick } => {
            let mut all = invariants(seed);
            if !quick {
                all.extend(criteria(seed));
            }
            for c in &all {
                writeln!(out, "{c}")?;
            }
            let failed = all.iter().filter(|c| !c.pass).count();
            writeln!(out, "{} checks, {failed} failed", all.len())?;
            return Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED });
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (program name first), expands `--config`, and runs.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match crate::config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli.command, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<foldsaddle_core::Error>().is_some() {
                EXIT_USAGE
            } else {
                EXIT_FAILED
            }
        }
    }
}
