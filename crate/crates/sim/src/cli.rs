//! Command line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::{Result, SimError};
use crate::report::RunReport;
use crate::spec::{DenominatorMode, DetectorPolicy, PowerReference, RunSpec, Scheme};

#[derive(Debug, Parser)]
#[command(name = "ofdm-im", version, about = "Dithered OFDM-IM PAPR reduction: Monte-Carlo driver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PAPR CCDF of each scheme.
    Papr(RunArgs),
    /// BER over an Eb/N0 sweep.
    Ber(RunArgs),
    /// Transmitted super-constellation points as CSV.
    Constellation(RunArgs),
    /// Solver details for one block.
    SolveOne {
        #[command(flatten)]
        run: RunArgs,
        /// Index of the block in the seeded data stream.
        #[arg(long, default_value_t = 0)]
        block: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML file with run parameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated schemes.
    #[arg(long, value_delimiter = ',')]
    pub scheme: Option<Vec<Scheme>>,
    /// Single-level dither radius.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Multilevel radius of the lowest amplitude level.
    #[arg(long = "R1")]
    pub r1: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// SNR grid in dB: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    pub snr: Option<Grid>,
    /// CCDF thresholds in dB: `a,b,c` or `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    pub ccdf: Option<Grid>,
    /// Oversampling factor of the peak measurement.
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long, value_enum)]
    pub denominator: Option<DenominatorMode>,
    /// Mean power used by the ensemble denominator.
    #[arg(long, value_enum)]
    pub power_reference: Option<PowerReference>,
    /// Handling of illegal top-k activation sets.
    #[arg(long, value_enum)]
    pub detector: Option<DetectorPolicy>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub calibration_blocks: Option<usize>,
    #[arg(long)]
    pub max_bits: Option<u64>,
    #[arg(long)]
    pub target_errors: Option<u64>,
    /// Allow multilevel R1 at or above the smallest amplitude.
    #[arg(long)]
    pub allow_margin_violation: bool,
    /// Root directory for run outputs.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err("range needs start <= stop and a positive step".into());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok(Grid((0..=count).map(|i| start + step * i as f64).collect()))
        }
        [_] => s.split(',').map(num).collect::<std::result::Result<_, _>>().map(Grid),
        _ => Err("expected a comma list or start:stop:step".into()),
    }
}

impl RunArgs {
    pub fn spec(&self) -> Result<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => RunSpec::from_toml_file(path)?,
            None => RunSpec::default(),
        };
        if let Some(v) = &self.scheme {
            spec.schemes = v.clone();
        }
        if let Some(v) = self.radius {
            spec.radius = v;
        }
        if let Some(v) = self.r1 {
            spec.r1 = v;
        }
        if let Some(v) = self.trials {
            spec.trials = v;
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(Grid(v)) = &self.snr {
            spec.snr_grid = v.clone();
        }
        if let Some(Grid(v)) = &self.ccdf {
            spec.ccdf_grid = v.clone();
        }
        if let Some(v) = self.oversample {
            spec.oversample = v;
        }
        if let Some(v) = self.denominator {
            spec.denominator = v;
        }
        if let Some(v) = self.power_reference {
            spec.power_reference = v;
        }
        if let Some(v) = self.detector {
            spec.detector = v;
        }
        if let Some(v) = self.max_iterations {
            spec.solver.max_iterations = v;
        }
        if let Some(v) = self.restarts {
            spec.solver.restarts = v;
        }
        if let Some(v) = self.calibration_blocks {
            spec.calibration_blocks = v;
        }
        if let Some(v) = self.max_bits {
            spec.max_bits = v;
        }
        if let Some(v) = self.target_errors {
            spec.target_errors = v;
        }
        spec.allow_margin_violation |= self.allow_margin_violation;
        spec.validate()?;
        Ok(spec)
    }
}

fn print_summary(report: &RunReport) {
    for s in &report.schemes {
        print!("{:<13} Eb={:.4} ({:+.3} dB)  nu_min={:.4}", s.scheme, s.energy_per_bit, s.energy_shift_db, s.nu.min);
        if let Some(c) = &s.ccdf {
            match c.papr_db_at_1e_2 {
                Some(v) => print!("  PAPR@1e-2={v:.3} dB"),
                None => print!("  PAPR@1e-2=n/a"),
            }
        }
        if let Some(st) = &s.solver {
            print!("  iters={:.1} nonconv={:.4}", st.mean_iterations, st.non_converged_fraction);
        }
        println!();
        if let Some(points) = &s.ber {
            for p in points {
                println!("    {:>6.2} dB  ber={:.3e}  bits={}  errors={}", p.snr_db, p.ber, p.bits, p.errors);
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Papr(args) => {
            let report = crate::run_papr(&args.spec()?, args.workers)?;
            let dir = report.write(&args.out)?;
            print_summary(&report);
            println!("{}", dir.display());
        }
        Command::Ber(args) => {
            let report = crate::run_ber(&args.spec()?, args.workers)?;
            let dir = report.write(&args.out)?;
            print_summary(&report);
            println!("{}", dir.display());
        }
        Command::Constellation(args) => {
            let dump = crate::dump_super_constellation(&args.spec()?, args.workers)?;
            let dir = dump.write(&args.out)?;
            println!("{}", dir.display());
        }
        Command::SolveOne { run, block } => {
            let report = crate::solve_one(&run.spec()?, *block)?;
            let dir = report.write(&run.out)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| SimError::Serialize(e.to_string()))?;
            println!("{text}");
            eprintln!("{}", dir.display());
        }
    }
    Ok(())
}

/// Entry point used by the binary: 0 on success, 1 on bad arguments, 2 on I/O failure.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
