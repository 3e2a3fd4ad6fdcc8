//! Command-line front end: argument parsing, run configuration, provenance
//! headers and dispatch to the modules.

mod commands;
mod repro;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::geometry::ReferenceTrap;
use crate::workflow::with_dim;

pub use repro::{repro_suite, ReproName};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FORGE_OUT";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "Surface-electrode trap and microwave meander design toolkit")]
pub struct Cli {
    /// Output directory [default: $FORGE_OUT or .]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print errors as plain text instead of records.
    #[arg(long, global = true)]
    pub human: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Layout inventory and export.
    #[command(subcommand)]
    Geometry(GeometryCmd),
    /// RF null, secular frequencies and trap depth.
    #[command(subcommand)]
    Trap(TrapCmd),
    /// Meander field maps, minimum and pocket study.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Quadrupole fits.
    #[command(subcommand)]
    Fit(FitCmd),
    /// Hyperfine levels, AC Zeeman maps and gate time.
    #[command(subcommand)]
    Atom(AtomCmd),
    /// Backreflection phase sweep.
    #[command(subcommand)]
    Coupling(CouplingCmd),
    /// DC Joule heating.
    #[command(subcommand)]
    Thermal(ThermalCmd),
    /// Three-stage design optimization.
    #[command(subcommand)]
    Design(DesignCmd),
    /// Touchstone comparison.
    #[command(subcommand)]
    Sparams(SparamsCmd),
    /// Regenerate a figure or table data set.
    Repro {
        #[arg(value_enum)]
        name: ReproName,
    },
}

#[derive(Debug, Subcommand)]
pub enum GeometryCmd {
    /// Electrode inventory of a layout file or the reference trap.
    Inventory {
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Write the reference layout as TOML.
    Export,
}

#[derive(Debug, Subcommand)]
pub enum TrapCmd {
    Analyze(TrapArgs),
}

#[derive(Debug, Args)]
pub struct TrapArgs {
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// DC voltages (TOML, electrode = volts); calibrated when absent.
    #[arg(long)]
    pub voltages: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0)]
    pub rf_amplitude: f64,
    #[arg(long, default_value_t = 176.5e6)]
    pub rf_freq: f64,
    #[arg(long, default_value_t = crate::electrostatics::DC_LIMIT_V)]
    pub max_voltage: f64,
}

/// `start:stop:count`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64, pub usize);

fn parse_span(s: &str) -> std::result::Result<Span, String> {
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        return Err(format!("expected start:stop:count, got `{s}`"));
    }
    let f = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let n = p[2].parse::<usize>().map_err(|e| format!("`{}`: {e}", p[2]))?;
    Ok(Span(f(p[0])?, f(p[1])?, n))
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let f = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((f(a)?, f(b)?))
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// x range (µm) relative to the field minimum.
    #[arg(long, value_parser = parse_span, default_value = "-3:3:25", allow_hyphen_values = true)]
    pub x: Span,
    #[arg(long, value_parser = parse_span, default_value = "-3:3:25", allow_hyphen_values = true)]
    pub z: Span,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub l_th: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum FieldCmd {
    Map(MapArgs),
    Minimum {
        #[arg(long)]
        power: Option<f64>,
        #[arg(long)]
        l_th: Option<f64>,
    },
    /// Residual field and gradient against pocket length.
    Pocket {
        #[arg(long, value_parser = parse_span, default_value = "0:300:7")]
        l_th: Span,
    },
}

#[derive(Debug, Subcommand)]
pub enum FitCmd {
    /// Fit a sample CSV; the header selects vector, magnitude or shift data.
    Quad {
        data: PathBuf,
        #[arg(long)]
        fix_b: bool,
        #[arg(long)]
        fix_alpha: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransitionArg {
    Qubit,
    Clock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Pi,
    TwoPi,
}

#[derive(Debug, Subcommand)]
pub enum AtomCmd {
    Levels {
        #[arg(long, default_value_t = 22.3e-3)]
        b0: f64,
    },
    ShiftMap {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, value_enum, default_value_t = TransitionArg::Qubit)]
        transition: TransitionArg,
        /// Drive offset from the qubit frequency (Hz).
        #[arg(long, default_value_t = 20e6)]
        detuning: f64,
        /// Raise the drive by the +3 dB step.
        #[arg(long)]
        step: bool,
    },
    GateTime {
        /// T/m
        #[arg(long, default_value_t = 54.8)]
        gradient: f64,
        /// Mode frequency (Hz).
        #[arg(long, default_value_t = 9.33e6)]
        mode_freq: f64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Pi)]
        convention: ConventionArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum CouplingCmd {
    Sweep {
        #[arg(long, default_value_t = -27.8, allow_hyphen_values = true)]
        s21_db: f64,
        #[arg(long, default_value_t = 1.0)]
        power: f64,
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Phase step (deg).
        #[arg(long, default_value_t = 5.0)]
        step: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ThermalCmd {
    Run {
        #[arg(long, default_value_t = 10.0)]
        power: f64,
        #[arg(long)]
        l_th: Option<f64>,
        #[arg(long, default_value_t = 2e-3)]
        duration: f64,
    },
    Sweep {
        #[arg(long, default_value_t = 10.0)]
        power: f64,
        #[arg(long, value_parser = parse_span, default_value = "0:250:6")]
        l_th: Span,
        #[arg(long, default_value_t = 2e-3)]
        duration: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum DesignCmd {
    /// Run the pipeline on a design file (bundled start when omitted).
    Run { spec: Option<PathBuf> },
}

#[derive(Debug, Subcommand)]
pub enum SparamsCmd {
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// lo:hi in Hz
        #[arg(long, value_parser = parse_band)]
        band: Option<(f64, f64)>,
    },
}

/// Run-wide settings read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Microwave drive power (W).
    pub power_w: Option<f64>,
    pub symmetric: Option<bool>,
    /// Overrides of reference-trap dimensions (µm).
    #[serde(default)]
    pub geometry: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn trap(&self) -> Result<ReferenceTrap> {
        let mut t = ReferenceTrap::default();
        if let Some(s) = self.symmetric {
            t.meander.symmetric = s;
        }
        for (k, v) in &self.geometry {
            t = with_dim(&t, k, *v)?;
        }
        t.meander.validate()?;
        Ok(t)
    }
}

/// Output directory plus the provenance header stamped on every file.
pub struct Output {
    pub dir: PathBuf,
    header: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf, command: &str, config_hash: &str, seed: u64) -> Self {
        let header = vec![
            format!("tool = forge {VERSION}"),
            format!("command = {command}"),
            format!("config_sha256 = {config_hash}"),
            format!("seed = {seed}"),
        ];
        Self { dir, header }
    }

    pub fn subdir(&self, name: &str) -> Self {
        Self { dir: self.dir.join(name), header: self.header.clone() }
    }

    /// Writes `# key = value` preamble lines and the body; returns the path.
    pub fn write(&self, name: &str, extra: &[String], body: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let mut s = String::new();
        for l in self.header.iter().chain(extra) {
            s.push_str("# ");
            s.push_str(l);
            s.push('\n');
        }
        s.push_str(body);
        let path = self.dir.join(name);
        std::fs::write(&path, s)?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolved settings shared by the command handlers.
pub struct Session {
    pub out: Output,
    pub seed: u64,
    /// Seed given on the command line or in the run configuration.
    pub explicit_seed: Option<u64>,
    pub trap: ReferenceTrap,
    pub power: f64,
}

/// Writes to stdout; a closed pipe is not an error.
pub(crate) fn say(text: impl AsRef<str>) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_ref().as_bytes());
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid("path", format!("{}: {e}", path.display())))
}

fn session(cli: &Cli) -> Result<Session> {
    let text = cli.config.as_deref().map(read_text).transpose()?;
    let cfg = text.as_deref().map(RunConfig::from_toml).transpose()?.unwrap_or_default();
    let explicit_seed = cli.seed.or(cfg.seed);
    let seed = explicit_seed.unwrap_or(1);
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(invalid("threads", "must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let dir = cli
        .out
        .clone()
        .or(cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let hash = sha256_hex(format!("{:?}\n{}\n{}", cli.command, seed, text.unwrap_or_default()).as_bytes());
    let power = cfg.power_w.unwrap_or(1.0);
    if !(power > 0.0) {
        return Err(invalid("power_w", "must be positive"));
    }
    let out = Output::new(dir, &format!("{:?}", cli.command), &hash, seed);
    Ok(Session { out, seed, explicit_seed, trap: cfg.trap()?, power })
}

fn error_record(e: &Error) -> String {
    let msg: String = e
        .to_string()
        .chars()
        .flat_map(|c| match c {
            '"' => vec!['\\', '"'],
            '\\' => vec!['\\', '\\'],
            '\n' => vec!['\\', 'n'],
            c => vec![c],
        })
        .collect();
    format!("{{\"error\":\"{}\",\"message\":\"{msg}\"}}", e.kind())
}

/// Parses `argv` and runs the command. Returns the process exit code: 0 on
/// success, 1 for a failed run, 2 for usage errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let human = cli.human;
    match session(&cli).and_then(|s| commands::dispatch(&cli.command, &s)) {
        Ok(()) => 0,
        Err(e) => {
            if human {
                eprintln!("error: {e}");
            } else {
                eprintln!("{}", error_record(&e));
            }
            1
        }
    }
}
