//! Run reports and their on-disk form.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::spec::{RunSpec, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Papr,
    Ber,
    Constellation,
    SolveOne,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Papr => "papr",
            RunKind::Ber => "ber",
            RunKind::Constellation => "constellation",
            RunKind::SolveOne => "solve-one",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub block_bits: usize,
    pub index_bits: usize,
    pub symbol_bits: usize,
    pub subblocks: usize,
    pub active_total: usize,
    pub amplitude_levels: Vec<f64>,
    /// Multilevel radii per amplitude level for the spec's `R1`.
    pub criterion_radii: Vec<f64>,
    /// Legal activation patterns, 0-based subcarrier indices, in bit-word order.
    pub legal_patterns: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverStats {
    pub solves: u64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub non_converged: u64,
    pub non_converged_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuStats {
    pub mean: f64,
    pub min: f64,
    pub bound: f64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcdfReport {
    pub thresholds_db: Vec<f64>,
    pub ccdf: Vec<f64>,
    /// Mean power per sample used as PAPR denominator (ensemble mode).
    pub denominator: Option<f64>,
    pub mean_papr_db: f64,
    pub max_papr_db: f64,
    pub papr_db_at_1e_2: Option<f64>,
    pub papr_db_at_1e_3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
    pub blocks: u64,
    pub index_errors: u64,
    pub symbol_errors: u64,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub scheme: Scheme,
    pub blocks: u64,
    /// Mean block energy divided by the bits per block.
    pub energy_per_bit: f64,
    pub mean_sample_power: f64,
    /// Energy per bit relative to the analytic undithered value.
    pub energy_shift_db: f64,
    pub nu: NuStats,
    pub solver: Option<SolverStats>,
    /// Bit errors when the block is detected without noise.
    pub noiseless_bit_errors: Option<u64>,
    /// Blocks whose dither left its radius or touched an active subcarrier.
    pub infeasible_blocks: Option<u64>,
    pub ccdf: Option<CcdfReport>,
    pub ber: Option<Vec<BerPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: RunKind,
    pub spec_digest: String,
    pub spec: RunSpec,
    pub rng: String,
    pub detector_fallback: String,
    pub system: SystemSummary,
    pub schemes: Vec<SchemeReport>,
    #[serde(skip)]
    pub timing: Timing,
}

/// Wall-clock figures, kept out of `report.json` so that reports of
/// identical specs are byte-identical.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub workers: usize,
    pub total_seconds: f64,
    pub per_scheme_seconds: Vec<(Scheme, f64)>,
}

impl RunReport {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeReport> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    pub fn run_dir(&self, root: &Path) -> PathBuf {
        run_dir(root, self.kind, &self.spec_digest)
    }

    /// Writes `report.json`, `timing.json` and the CSV tables; returns the directory.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let dir = self.run_dir(root);
        fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
        write_json(&dir.join("report.json"), self)?;
        write_json(&dir.join("timing.json"), &self.timing)?;
        for s in &self.schemes {
            if let Some(c) = &s.ccdf {
                let rows = c.thresholds_db.iter().zip(&c.ccdf).map(|(t, p)| vec![t.to_string(), p.to_string()]);
                write_csv(&dir.join(format!("ccdf_{}.csv", s.scheme)), &["threshold_db", "ccdf"], rows)?;
            }
            if let Some(points) = &s.ber {
                let rows = points.iter().map(|p| {
                    vec![p.snr_db.to_string(), p.ber.to_string(), p.bits.to_string(), p.errors.to_string()]
                });
                write_csv(&dir.join(format!("ber_{}.csv", s.scheme)), &["snr_db", "ber", "bits", "errors"], rows)?;
            }
        }
        Ok(dir)
    }
}

pub fn run_dir(root: &Path, kind: RunKind, digest: &str) -> PathBuf {
    root.join(format!("{}-{}", kind.name(), &digest[..16]))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| SimError::Serialize(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::io(path, io),
        other => SimError::Serialize(format!("{other:?}")),
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let mut inner = w.into_inner().map_err(|e| SimError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| SimError::io(path, e))
}
