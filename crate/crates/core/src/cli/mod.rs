//! Command-line front end.
//!
//! ```text
//! superlens solve <scenario> [--csv PATH] [--pgm PATH]
//! superlens report <scenario>
//! superlens sweep <scenario> --deltas 1e-4,1e-6,...
//! superlens preset <name>
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or scenario error,
//! 3 solver failure.

pub mod output;
pub mod presets;
pub mod scenario;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use output::{
    calm_samples, format_number, max_normalized_field, render_field, report, sweep_table,
    write_csv, write_pgm, FieldSample,
};
pub use presets::{preset, PRESET_NAMES};
pub use scenario::{parse_scenario, GridSpec, OutputPaths, Scenario, ScenarioError, ScenarioSource};

pub const EXIT_IO: i32 = 1;
pub const EXIT_SCENARIO: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "superlens", version, about = "Quasistatic eccentric superlens solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario and write the potential map as CSV (and optionally PGM).
    Solve {
        scenario: PathBuf,
        /// CSV destination; overrides the scenario, `-` for stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Graymap destination; overrides the scenario.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Print region geometry, resonance verdicts and the dissipation energy.
    Report { scenario: PathBuf },
    /// Tabulate energy and calm-region field over several loss values.
    Sweep {
        scenario: PathBuf,
        /// Comma-separated loss values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        deltas: Vec<f64>,
    },
    /// Print the scenario text of a preset.
    Preset {
        /// One of fig4_left, fig4_right, fig5_left, fig5_right, fig6_left, fig6_right.
        name: String,
    },
}

enum Failure {
    Usage(String),
    Scenario(String),
    Solver(crate::Error),
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Scenario(_) => EXIT_SCENARIO,
            Self::Solver(_) => EXIT_SOLVER,
            Self::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            Self::Usage(m) => m.clone(),
            Self::Scenario(m) => format!("scenario error: {m}"),
            Self::Solver(e) => format!("solver error: {e}"),
            Self::Io(m) => format!("I/O error: {m}"),
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Self::Solver(e)
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    parse_scenario(&text).map_err(|e| Failure::Scenario(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

/// Paths in a scenario file are relative to the file.
fn scenario_relative(scenario: &Path, p: &Path) -> PathBuf {
    match scenario.parent() {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    let out_err = |e: io::Error| Failure::Io(format!("stdout: {e}"));
    match cmd {
        Command::Preset { name } => {
            let text = preset(&name).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown preset `{name}`; available: {}",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            stdout.write_all(text.as_bytes()).map_err(out_err)
        }
        Command::Report { scenario } => {
            let s = load(&scenario)?;
            let scene = s.scene()?;
            let sol = crate::eccentric::solve(&scene)?;
            stdout.write_all(report(&scene, &sol)?.as_bytes()).map_err(out_err)
        }
        Command::Sweep { scenario, deltas } => {
            let s = load(&scenario)?;
            if let Some(d) = deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
                return Err(Failure::Usage(format!("invalid loss value {d}")));
            }
            let table = sweep_table(&s.scene()?, &deltas)?;
            stdout.write_all(table.as_bytes()).map_err(out_err)
        }
        Command::Solve { scenario, csv, pgm } => {
            let s = load(&scenario)?;
            let sol = crate::eccentric::solve(&s.scene()?)?;
            let samples = render_field(&sol, &s);
            let csv = csv.or_else(|| s.output.csv.as_deref().map(|p| scenario_relative(&scenario, p)));
            let pgm = pgm.or_else(|| s.output.pgm.as_deref().map(|p| scenario_relative(&scenario, p)));
            let mut table = Vec::new();
            write_csv(&samples, &mut table).map_err(out_err)?;
            match csv {
                Some(p) if p.as_os_str() != "-" => write_file(&p, &table)?,
                _ => stdout.write_all(&table).map_err(out_err)?,
            }
            if let Some(p) = pgm {
                let mut image = Vec::new();
                write_pgm(&samples, &s.grid, &mut image).map_err(out_err)?;
                write_file(&p, &image)?;
            }
            Ok(())
        }
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCENARIO } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "superlens: {}", f.message());
            f.code()
        }
    }
}
