//! Run configuration: a flat JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig4Mode {
    /// Gain against a common loss `κ_H = κ_S`.
    A,
    /// `κ_H` against `κ_S` at fixed gain.
    B,
}

/// Inclusive grid `min:max:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64, step: f64) -> Self {
        Range { min, max, step }
    }

    /// Grid points, rounded to 12 decimals so that `0.01:0.99:0.01` yields
    /// the literal values.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| ((self.min + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }

    fn check(&self, name: &str, lo: f64, hi: f64) -> Result<(), CliError> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.min <= self.max
            && self.min >= lo
            && self.max <= hi
            && (self.max - self.min) / self.step < 1e6;
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "invalid {name} {}:{}:{}: expected {lo} <= min <= max <= {hi}, step > 0, \
                 at most 1e6 points",
                self.min, self.max, self.step
            )))
        }
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts.as_slice() else {
            return Err(format!("expected MIN:MAX:STEP, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Range::new(num(min)?, num(max)?, num(step)?))
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Flags shared by every subcommand. Each one may also be set in the
/// `--config` file under the same name with `-` replaced by `_`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Device efficiency η in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Squeezing gain in dB (10·log10 G).
    #[arg(long, allow_negative_numbers = true)]
    pub gain_db: Option<f64>,
    /// Homodyne efficiency κ_H in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub kappa_h: Option<f64>,
    /// Squeezing efficiency κ_S in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub kappa_s: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// η grid as MIN:MAX:STEP.
    #[arg(long, value_name = "MIN:MAX:STEP")]
    pub eta_range: Option<Range>,
    /// Gain grid in dB as MIN:MAX:STEP.
    #[arg(long, value_name = "MIN:MAX:STEP")]
    pub gain_db_range: Option<Range>,
    /// κ grid as MIN:MAX:STEP.
    #[arg(long, value_name = "MIN:MAX:STEP")]
    pub kappa_range: Option<Range>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write a gnuplot script for the output file.
    #[arg(long, value_name = "PATH")]
    pub plot_script: Option<PathBuf>,
    /// Flat JSON file with default values for these flags.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    eta: Option<f64>,
    gain_db: Option<f64>,
    kappa_h: Option<f64>,
    kappa_s: Option<f64>,
    samples: Option<usize>,
    seed: Option<u64>,
    eta_range: Option<Range>,
    gain_db_range: Option<Range>,
    kappa_range: Option<Range>,
    out: Option<PathBuf>,
    format: Option<Format>,
    plot_script: Option<PathBuf>,
    mode: Option<Fig4Mode>,
    sweep: Option<bool>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
}

pub const ETA_DOMAIN: (f64, f64) = (0.01, 0.99);
pub const DEFAULT_ETA_RANGE: Range = Range::new(0.01, 0.99, 0.01);
pub const DEFAULT_GAIN_DB_RANGE: Range = Range::new(0.0, 25.0, 0.1);
pub const DEFAULT_KAPPA_RANGE: Range = Range::new(0.5, 1.0, 0.005);

/// Merged configuration. Unset values fall back to per-command defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub eta: Option<f64>,
    pub gain_db: Option<f64>,
    pub kappa_h: Option<f64>,
    pub kappa_s: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub eta_range: Range,
    pub gain_db_range: Range,
    pub kappa_range: Range,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub plot_script: Option<PathBuf>,
    pub mode: Option<Fig4Mode>,
    pub sweep: bool,
}

impl RunConfig {
    pub fn load(
        args: CommonArgs,
        mode: Option<Fig4Mode>,
        sweep: bool,
    ) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let cfg = RunConfig {
            eta: args.eta.or(file.eta),
            gain_db: args.gain_db.or(file.gain_db),
            kappa_h: args.kappa_h.or(file.kappa_h),
            kappa_s: args.kappa_s.or(file.kappa_s),
            samples: args.samples.or(file.samples),
            seed: args.seed.or(file.seed).unwrap_or(0),
            eta_range: args.eta_range.or(file.eta_range).unwrap_or(DEFAULT_ETA_RANGE),
            gain_db_range: args
                .gain_db_range
                .or(file.gain_db_range)
                .unwrap_or(DEFAULT_GAIN_DB_RANGE),
            kappa_range: args
                .kappa_range
                .or(file.kappa_range)
                .unwrap_or(DEFAULT_KAPPA_RANGE),
            out: args.out.or(file.out),
            format: args.format.or(file.format),
            plot_script: args.plot_script.or(file.plot_script),
            mode: mode.or(file.mode),
            sweep: sweep || file.sweep.unwrap_or(false),
        };
        cfg.eta_range.check("eta-range", ETA_DOMAIN.0, ETA_DOMAIN.1)?;
        cfg.gain_db_range.check("gain-db-range", 0.0, 200.0)?;
        cfg.kappa_range.check("kappa-range", f64::MIN_POSITIVE, 1.0)?;
        if cfg.plot_script.is_some() && cfg.out.is_none() {
            return Err(CliError::Config("--plot-script requires --out".into()));
        }
        Ok(cfg)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
