//! `cvqt`: figure data, protocol demos and Monte Carlo checks for
//! teleportation-based transduction.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 numerical failure.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use config::{CommonArgs, Fig4Mode, Format, RunConfig};
use output::{gnuplot_script, json_text, Body, Outputs, Table};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<cvqt_core::Error> for CliError {
    fn from(e: cvqt_core::Error) -> Self {
        use cvqt_core::Error as E;
        match e {
            E::NoRoot { .. } | E::NotSymplectic(_) | E::NotSymmetric(_) | E::Unphysical(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "cvqt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate bounds against device efficiency at 10 and 20 dB.
    Fig2a(CommonArgs),
    /// Rate bounds against gain at fixed efficiency (default 0.6).
    Fig2b(CommonArgs),
    /// Gain thresholds for positive rate and for advantage over direct
    /// transduction, against efficiency.
    Fig3(CommonArgs),
    /// Lower bound with losses at fixed efficiency (default 0.5).
    Fig4 {
        #[arg(long, value_enum)]
        mode: Option<Fig4Mode>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo channel estimate against the analytic channel.
    TeleportDemo(CommonArgs),
    /// GKP logical error probability: bound and sampled estimate.
    Gkp {
        /// Sweep the gain grid instead of a single point.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// EPR variances of the resource state.
    Epr(CommonArgs),
}

/// Adds `<out>.summary.json` next to `out`.
fn summary_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn emit(
    cfg: &RunConfig,
    body: Body,
    default_format: Format,
    summary: Option<Value>,
    surface: bool,
) -> Result<(), CliError> {
    let format = cfg.format_or(default_format);
    let text = body.render(format);
    let Some(out) = &cfg.out else {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        if let Some(s) = summary {
            eprintln!("{s}");
        }
        return Ok(());
    };
    let mut files = Outputs::default();
    files.add(out.clone(), text);
    if let Some(s) = summary {
        files.add(summary_path(out), json_text(&s));
    }
    if let Some(script) = &cfg.plot_script {
        let Body::Table(table) = &body else {
            return Err(CliError::Config("--plot-script needs a table output".into()));
        };
        if format != Format::Csv {
            return Err(CliError::Config("--plot-script needs --format csv".into()));
        }
        files.add(script.clone(), gnuplot_script(table, out, surface));
    }
    files.commit()
}

fn table(cfg: &RunConfig, t: Table, summary: Option<Value>, surface: bool) -> Result<(), CliError> {
    emit(cfg, Body::Table(t), Format::Csv, summary, surface)
}

fn report(cfg: &RunConfig, v: Value) -> Result<(), CliError> {
    emit(cfg, Body::Report(v), Format::Json, None, false)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fig2a(a) => {
            let cfg = RunConfig::load(a, None, false)?;
            table(&cfg, commands::fig2a(&cfg)?, None, false)
        }
        Command::Fig2b(a) => {
            let cfg = RunConfig::load(a, None, false)?;
            let (t, summary) = commands::fig2b(&cfg)?;
            table(&cfg, t, Some(summary), false)
        }
        Command::Fig3(a) => {
            let cfg = RunConfig::load(a, None, false)?;
            table(&cfg, commands::fig3(&cfg)?, None, false)
        }
        Command::Fig4 { mode, common } => {
            let cfg = RunConfig::load(common, mode, false)?;
            table(&cfg, commands::fig4(&cfg)?, None, true)
        }
        Command::TeleportDemo(a) => {
            let cfg = RunConfig::load(a, None, false)?;
            report(&cfg, commands::teleport_demo(&cfg)?)
        }
        Command::Gkp { sweep, common } => {
            let cfg = RunConfig::load(common, None, sweep)?;
            match commands::gkp(&cfg)? {
                commands::GkpOutput::Single(v) => report(&cfg, v),
                commands::GkpOutput::Sweep(t) => table(&cfg, t, None, false),
            }
        }
        Command::Epr(a) => {
            let cfg = RunConfig::load(a, None, false)?;
            report(&cfg, commands::epr(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("cvqt: config error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("cvqt: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let no_root = cvqt_core::Error::NoRoot {
            lo: 1.0,
            hi: 2.0,
            f_lo: 1.0,
            f_hi: 1.0,
        };
        assert_eq!(CliError::from(no_root).exit_code(), 3);
        assert_eq!(CliError::from(cvqt_core::Error::Unphysical(0.5)).exit_code(), 3);
        let bad = cvqt_core::Error::TooFewSamples { got: 1, min: 100 };
        assert_eq!(CliError::from(bad).exit_code(), 2);
    }

    #[test]
    fn summary_sits_next_to_output() {
        assert_eq!(
            summary_path(Path::new("out/fig.csv")),
            PathBuf::from("out/fig.csv.summary.json")
        );
    }
}
