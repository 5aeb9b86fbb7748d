//! Argument parsing and subcommand dispatch for the `akm` binary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use akm_core::mutation::Mutation;
use akm_core::phase_space::{pointer_joint_density, sample_pointers, wigner_grid, wigner_system, WignerTime};
use akm_core::statistics::{oracle_statistics, uncertainty_products};
use akm_core::sweep::{run_sweep, SweepParam, SweepScale, SweepSpec};
use akm_core::{make_initial_state, MeasurementConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::grid::{discretize, propagate_grid, GridSpec};
use crate::io::{self as fio, ConfigFile, SampleMetadata};
use crate::verify::{self, Level};

#[derive(Debug, Parser)]
#[command(name = "akm", version, about = "Joint position-momentum measurement with free evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form accuracy report plus exact values at the configured time, as JSON.
    Report(ReportArgs),
    /// Closed-form report over a parameter range, as CSV.
    Sweep(SweepArgs),
    /// Pointer readings drawn from their joint density, as CSV.
    Sample(SampleArgs),
    /// System Wigner function on a square grid, as CSV.
    Wigner(WignerArgs),
    /// Cross-check every solver and closed form; exits 1 on any failure.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Coupling strength.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Initial position spread of the system (default 1).
    #[arg(long)]
    pub delta_q: Option<f64>,
    /// Pointer squeezing parameter (default 2 delta_q^2).
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long)]
    pub m3: Option<f64>,
    /// Evolution time (default 1/kappa).
    #[arg(long)]
    pub t: Option<f64>,
    /// Set b = 2 delta_q^2.
    #[arg(long, conflicts_with = "b")]
    pub balanced: bool,
    /// JSON file with any of the fields above; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also propagate on a spectral grid and write the field to FILE.
    #[arg(long, value_name = "FILE")]
    pub dump_field: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 16.0)]
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// One of kappa, b, delta_q, m1, m2, m3, t.
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub scale: ScaleArg,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 4000)]
    pub n: usize,
    #[arg(long, default_value_t = verify::MONTE_CARLO_SEED)]
    pub seed: u64,
    /// CSV destination; a `.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WhenArg {
    Initial,
    Post,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "initial")]
    pub when: WhenArg,
    #[arg(long, default_value_t = 101)]
    pub grid_n: usize,
    /// Half-width of the square `[-range, range]^2`.
    #[arg(long, default_value_t = 6.0)]
    pub range: f64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: Level,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Fault injection: `eta<j>` or `gamma<j>`.
    #[arg(long, hide = true, value_parser = parse_mutation)]
    pub inject: Option<Mutation>,
}

pub fn parse_mutation(s: &str) -> Result<Mutation, String> {
    let (kind, j) = s.split_at(s.find(|c: char| c.is_ascii_digit()).ok_or("expected eta<j> or gamma<j>")?);
    let j: usize = j.parse().map_err(|_| "bad index")?;
    match kind {
        "eta" if (1..=3).contains(&j) => Ok(Mutation::NegateEta(j)),
        "gamma" if (1..=6).contains(&j) => Ok(Mutation::NegateGamma(j)),
        _ => Err(format!("no such term: {s}")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<fio::IoError> for CliError {
    fn from(e: fio::IoError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<MeasurementConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            kappa: self.kappa,
            delta_q: self.delta_q,
            b: self.b,
            m1: self.m1,
            m2: self.m2,
            m3: self.m3,
            t: self.t,
        };
        let merged = file.overlay(&flags);
        let kappa = merged.kappa.ok_or_else(|| CliError::Usage("kappa required".into()))?;
        let mut b = MeasurementConfig::builder(kappa, merged.delta_q.unwrap_or(1.0)).b_opt(merged.b).t_opt(merged.t);
        if let Some(m) = merged.m1 {
            b = b.m1(m);
        }
        if let Some(m) = merged.m2 {
            b = b.m2(m);
        }
        if let Some(m) = merged.m3 {
            b = b.m3(m);
        }
        let c = b.build().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(if self.balanced { c.balanced() } else { c })
    }
}

fn sink<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Runs one subcommand, writing primary output to `stdout` unless `--out`
/// is given. Returns the process exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Report(a) => {
            let c = a.config.resolve()?;
            let report = uncertainty_products(&c, false);
            let json = fio::report_json(&report, &oracle_statistics(&c))?;
            let mut w = sink(&a.out, stdout)?;
            serde_json::to_writer_pretty(&mut w, &json).map_err(fio::IoError::from)?;
            writeln!(w)?;
            if let Some(path) = &a.dump_field {
                let grid = GridSpec::new(a.grid_n, a.half_width).map_err(|e| CliError::Usage(e.to_string()))?;
                let field = discretize(&make_initial_state(&c), &grid)
                    .and_then(|f| propagate_grid(&f, &c, c.t()))
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                fio::write_field(BufWriter::new(File::create(path)?), &field)?;
            }
            Ok(0)
        }
        Command::Sweep(a) => {
            let base = a.config.resolve()?;
            let param: SweepParam = a.param.parse().map_err(|e: akm_core::Error| CliError::Usage(e.to_string()))?;
            let scale = match a.scale {
                ScaleArg::Linear => SweepScale::Linear,
                ScaleArg::Log => SweepScale::Log,
            };
            let spec = SweepSpec::new(param, a.from, a.to, a.points, scale)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let rows = run_sweep(&spec, &base, a.config.balanced).map_err(|e| CliError::Usage(e.to_string()))?;
            fio::write_sweep_csv(sink(&a.out, stdout)?, &rows)?;
            Ok(0)
        }
        Command::Sample(a) => {
            let c = a.config.resolve()?;
            if a.n == 0 {
                return Err(CliError::Usage("n must be at least 1".into()));
            }
            let state = akm_core::staged::exact_state(&c).map_err(|e| CliError::Runtime(e.to_string()))?;
            let g = pointer_joint_density(&state).map_err(|e| CliError::Runtime(e.to_string()))?;
            let pts = sample_pointers(&g, a.n, a.seed).map_err(|e| CliError::Runtime(e.to_string()))?;
            fio::write_samples_csv(sink(&a.out, stdout)?, &pts)?;
            if let Some(p) = &a.out {
                let meta = SampleMetadata::new(&c, a.seed, a.n);
                serde_json::to_writer_pretty(File::create(sidecar(p))?, &meta).map_err(fio::IoError::from)?;
            }
            Ok(0)
        }
        Command::Wigner(a) => {
            let c = a.config.resolve()?;
            let when = match a.when {
                WhenArg::Initial => WignerTime::Initial,
                WhenArg::Post => WignerTime::Post,
            };
            let cells = wigner_grid(&wigner_system(&c, when), a.grid_n, a.range)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            fio::write_wigner_csv(sink(&a.out, stdout)?, &cells)?;
            Ok(0)
        }
        Command::Verify(a) => {
            let report = verify::run(a.level, a.inject.unwrap_or_default());
            let mut w = sink(&a.out, stdout)?;
            serde_json::to_writer_pretty(&mut w, &report).map_err(fio::IoError::from)?;
            writeln!(w)?;
            for k in report.checks.iter().filter(|k| !k.passed) {
                let cfg = k.config.as_ref().map(|c| serde_json::to_string(c).unwrap_or_default()).unwrap_or_default();
                writeln!(stderr, "FAIL {} residual {:e} (tolerance {:e}) at {cfg}", k.name, k.residual, k.tolerance)?;
            }
            Ok(if report.passed { 0 } else { 1 })
        }
    }
}
