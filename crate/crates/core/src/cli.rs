//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::drivers::{
    bounds_report, bounds_table, convergence, decay_table, decay_report, eigen_table, field_table, field_vtk,
    solve_config, sweep, thread_count,
};
use crate::error::{Error, Result};
use crate::geometry::mesh_for;

#[derive(Debug, Parser)]
#[command(name = "brokenguide", version, about = "Bound states of broken quantum waveguides")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Options shared by every command. Later sources override earlier ones:
/// defaults, `--config`, `--set`, then the named flags.
#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set slices=30`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Half-opening angle, e.g. `0.5*pi/2`.
    #[arg(long, global = true)]
    pub theta: Option<String>,
    #[arg(long, global = true)]
    pub formulation: Option<String>,
    #[arg(long, global = true)]
    pub length: Option<String>,
    #[arg(long, global = true)]
    pub level: Option<String>,
    #[arg(long, global = true)]
    pub degree: Option<String>,
    #[arg(long = "quad-degree", global = true)]
    pub quad_degree: Option<String>,
    #[arg(long, global = true)]
    pub nval: Option<String>,
    #[arg(long, global = true)]
    pub nsub: Option<String>,
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of one configuration.
    Solve {
        /// Also write grid samples of the first mode.
        #[arg(long)]
        field: Option<PathBuf>,
        /// Also write the first mode as a legacy VTK file.
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Eigenvalues and asymptotic predictions over ascending angles.
    Sweep {
        /// Angles; defaults to the `thetas` key.
        thetas: Vec<String>,
    },
    /// Errors against the finest level and highest degree.
    Convergence {
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        degrees: Option<String>,
    },
    /// Counting bound, finite-element count and existence certificate per angle.
    Bounds {
        thetas: Vec<String>,
        /// Cutoff length of the certificate; chosen automatically by default.
        #[arg(long = "cert-n")]
        cert_n: Option<String>,
    },
    /// Exponential decay of one mode along the straight arm.
    Decay {
        #[arg(long)]
        mode: Option<String>,
    },
    /// Grid samples of one mode.
    Export {
        #[arg(long)]
        nx: Option<String>,
        #[arg(long)]
        ny: Option<String>,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// The triangulation as plain text.
    Mesh,
}

/// Resolves the configuration from every source.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_text(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    let mut flags = vec![
        ("theta", &c.theta),
        ("formulation", &c.formulation),
        ("length", &c.length),
        ("level", &c.level),
        ("degree", &c.degree),
        ("quad_degree", &c.quad_degree),
        ("nval", &c.nval),
        ("nsub", &c.nsub),
        ("eps", &c.eps),
        ("seed", &c.seed),
    ];
    match &cli.command {
        Command::Convergence { levels, degrees } => flags.extend([("levels", levels), ("degrees", degrees)]),
        Command::Bounds { cert_n, .. } => flags.push(("cert_n", cert_n)),
        Command::Decay { mode } => flags.push(("mode", mode)),
        Command::Export { nx, ny, mode, .. } => flags.extend([("grid_nx", nx), ("grid_ny", ny), ("mode", mode)]),
        _ => {}
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    let thetas = match &cli.command {
        Command::Sweep { thetas } | Command::Bounds { thetas, .. } => thetas,
        _ => return Ok(cfg),
    };
    if !thetas.is_empty() {
        cfg.set("thetas", &thetas.join(","))?;
    }
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    Ok(std::fs::write(path, text)?)
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let cfg = resolve_config(cli)?;
    let out = &cli.common.out;
    let threads = thread_count();
    match &cli.command {
        Command::Solve { field, vtk } => {
            let solved = solve_config(&cfg)?;
            emit(out, stdout, &eigen_table(&solved).to_csv())?;
            writeln!(
                stderr,
                "{} bound state(s) below 1 after {} iterations",
                solved.result.bound_state_count(),
                solved.result.iterations
            )?;
            if let Some(path) = field {
                write_file(path, &field_table(&solved, 1, cfg.grid_nx, cfg.grid_ny)?.to_csv())?;
            }
            if let Some(path) = vtk {
                write_file(path, &field_vtk(&solved, 1)?)?;
            }
        }
        Command::Sweep { .. } => {
            let report = sweep(&cfg, &cfg.thetas, threads)?;
            emit(out, stdout, &report.table().to_csv())?;
            for (theta, msg) in report.failures() {
                writeln!(stderr, "theta = {theta}: {msg}")?;
            }
            for v in &report.violations {
                writeln!(
                    stderr,
                    "monotonicity violation: lambda_{} drops by {:e} from theta = {} to {}",
                    v.j, v.drop, v.theta_from, v.theta_to
                )?;
            }
        }
        Command::Convergence { .. } => {
            let pairs: Vec<(usize, usize)> =
                cfg.levels.iter().flat_map(|&l| cfg.degrees.iter().map(move |&k| (l, k))).collect();
            let report = convergence(&cfg, &pairs, threads)?;
            emit(out, stdout, &report.table().to_csv())?;
            writeln!(stderr, "reference: level {} degree {}", report.reference_level, report.reference_degree)?;
            for (k, r) in &report.h_rates {
                writeln!(stderr, "rate in h at degree {k}: {r:.3}")?;
            }
            for (l, r) in &report.k_rates {
                writeln!(stderr, "rate in 1/k at level {l}: {r:.3}")?;
            }
        }
        Command::Bounds { .. } => {
            let entries = bounds_report(&cfg, &cfg.thetas, threads)?;
            emit(out, stdout, &bounds_table(&entries).to_csv())?;
        }
        Command::Decay { .. } => {
            emit(out, stdout, &decay_table(&decay_report(&cfg)?).to_csv())?;
        }
        Command::Export { vtk, .. } => {
            let solved = solve_config(&cfg)?;
            emit(out, stdout, &field_table(&solved, cfg.mode, cfg.grid_nx, cfg.grid_ny)?.to_csv())?;
            if let Some(path) = vtk {
                write_file(path, &field_vtk(&solved, cfg.mode)?)?;
            }
        }
        Command::Mesh => {
            let mesh = mesh_for(&cfg.domain()?, cfg.level)?;
            emit(out, stdout, &mesh.to_text())?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
