//! Monte-Carlo runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ofdm_im::channel;
use ofdm_im::dither::criterion_radii;
use ofdm_im::metrics::{self, CcdfTally, Denominator};
use ofdm_im::{Complex, TimeSignal};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::report::{
    run_dir, write_csv, write_json, BerPoint, CcdfReport, NuStats, RunKind, RunReport, SchemeReport, SolverStats,
    SystemSummary, Timing,
};
use crate::rng::{self, Purpose};
use crate::scheme::{Engine, SolveStats, Transmitted};
use crate::spec::{DenominatorMode, DetectorPolicy, PowerReference, RunSpec, Scheme};

const NU_SLACK: f64 = 1e-9;
const BER_CHUNK: usize = 64;

pub fn pool(workers: Option<usize>) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))
}

/// Per-block measurements of a PAPR run.
#[derive(Debug, Clone)]
struct BlockRecord {
    peak: f64,
    energy: f64,
    base_energy: f64,
    nu: f64,
    solve: Option<SolveStats>,
    noiseless_errors: u64,
    feasible: bool,
}

fn measure(engine: &Engine, scheme: Scheme, index: usize) -> Result<BlockRecord> {
    let tx = engine.transmit(scheme, index)?;
    let noiseless = engine.trx.receive(&tx.signal, &tx.bits)?;
    Ok(BlockRecord {
        peak: engine.peak_power(&tx)?,
        energy: tx.signal.energy(),
        base_energy: tx.block.energy(),
        nu: engine.realized_nu(&tx)?,
        feasible: feasible(&tx),
        solve: tx.solve,
        noiseless_errors: noiseless.bit_errors as u64,
    })
}

const RADIUS_SLACK: f64 = 1e-12;

/// Active values untouched and every idle value inside its radius.
fn feasible(tx: &Transmitted) -> bool {
    tx.block.values().iter().zip(tx.dithered.values()).enumerate().all(|(i, (&x, &d))| {
        if tx.block.is_active(i) {
            x == d
        } else {
            let r = tx.plan.as_ref().map_or(0.0, |p| p.radius_at(i));
            d.norm() <= r + RADIUS_SLACK
        }
    })
}

fn system_summary(engine: &Engine) -> Result<SystemSummary> {
    let cfg = engine.trx.config();
    let cons = engine.trx.constellation();
    let r1 = engine.spec.r1;
    let criterion = if r1 < cons.levels()[0] || engine.spec.allow_margin_violation {
        criterion_radii(cons, r1)?
    } else {
        Vec::new()
    };
    Ok(SystemSummary {
        block_bits: cfg.block_bits(),
        index_bits: cfg.index_bits(),
        symbol_bits: cfg.symbol_bits(),
        subblocks: cfg.subblocks(),
        active_total: cfg.active_total(),
        amplitude_levels: cons.levels().to_vec(),
        criterion_radii: criterion,
        legal_patterns: engine.trx.legal_set().patterns().iter().map(|p| p.indices().to_vec()).collect(),
    })
}

fn detector_name(p: DetectorPolicy) -> String {
    match p {
        DetectorPolicy::MaxCapturedPower => {
            "top-k by power; illegal sets map to the legal pattern with the largest captured power".into()
        }
        DetectorPolicy::NearestByHamming => {
            "top-k by power; illegal sets map to the legal pattern nearest in Hamming distance".into()
        }
    }
}

fn new_report(engine: &Engine, kind: RunKind) -> Result<RunReport> {
    Ok(RunReport {
        kind,
        spec_digest: engine.spec.digest(),
        spec: engine.spec.clone(),
        rng: rng::ALGORITHM.into(),
        detector_fallback: detector_name(engine.spec.detector),
        system: system_summary(engine)?,
        schemes: Vec::new(),
        timing: Timing::default(),
    })
}

fn analytic_energy_per_bit(engine: &Engine) -> f64 {
    let cfg = engine.trx.config();
    cfg.active_total() as f64 * engine.trx.constellation().average_energy() / cfg.block_bits() as f64
}

fn solver_stats<'a>(solves: impl Iterator<Item = &'a SolveStats>) -> Option<SolverStats> {
    let mut n = 0u64;
    let mut total = 0usize;
    let mut max = 0usize;
    let mut non_converged = 0u64;
    for s in solves {
        n += 1;
        total += s.iterations;
        max = max.max(s.iterations);
        non_converged += u64::from(!s.converged);
    }
    (n > 0).then(|| SolverStats {
        solves: n,
        mean_iterations: total as f64 / n as f64,
        max_iterations: max,
        non_converged,
        non_converged_fraction: non_converged as f64 / n as f64,
    })
}

fn nu_stats(engine: &Engine, scheme: Scheme, nus: impl Iterator<Item = f64>) -> NuStats {
    let bound = engine.nu_bound(scheme);
    let (mut sum, mut min, mut count, mut violations) = (0.0, f64::INFINITY, 0u64, 0u64);
    for nu in nus {
        sum += nu;
        min = min.min(nu);
        count += 1;
        violations += u64::from(nu < bound - NU_SLACK);
    }
    NuStats { mean: sum / count.max(1) as f64, min, bound, violations }
}

fn base_report(engine: &Engine, scheme: Scheme, energies: &[f64]) -> SchemeReport {
    let cfg = engine.trx.config();
    let mean_energy = energies.iter().sum::<f64>() / energies.len() as f64;
    let eb = mean_energy / cfg.block_bits() as f64;
    SchemeReport {
        scheme,
        blocks: energies.len() as u64,
        energy_per_bit: eb,
        mean_sample_power: mean_energy / cfg.subcarriers() as f64,
        energy_shift_db: metrics::to_db(eb / analytic_energy_per_bit(engine)),
        nu: NuStats { mean: 0.0, min: 0.0, bound: 0.0, violations: 0 },
        solver: None,
        noiseless_bit_errors: None,
        infeasible_blocks: None,
        ccdf: None,
        ber: None,
    }
}

/// PAPR statistics and CCDF of every scheme in the spec.
pub fn run_papr(spec: &RunSpec, workers: Option<usize>) -> Result<RunReport> {
    let engine = Engine::new(spec)?;
    let pool = pool(workers)?;
    let started = Instant::now();
    let mut report = new_report(&engine, RunKind::Papr)?;
    report.timing.workers = pool.current_num_threads();
    let n = engine.trx.config().subcarriers() as f64;
    for &scheme in &spec.schemes {
        let t = Instant::now();
        let records = pool.install(|| {
            (0..spec.trials).into_par_iter().map(|b| measure(&engine, scheme, b)).collect::<Result<Vec<_>>>()
        })?;
        let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
        let mut s = base_report(&engine, scheme, &energies);
        let ensemble = match spec.power_reference {
            PowerReference::Scheme => s.mean_sample_power,
            PowerReference::Original => records.iter().map(|r| r.base_energy).sum::<f64>() / records.len() as f64 / n,
        };
        let mut tally = CcdfTally::new(spec.ccdf_grid.clone())?;
        let (mut sum_db, mut max_db) = (0.0, f64::NEG_INFINITY);
        for r in &records {
            let p = match spec.denominator {
                DenominatorMode::Ensemble => ensemble,
                DenominatorMode::PerBlock => r.energy / n,
            };
            let sample = metrics::PaprSample::from_parts(r.peak, p)?;
            tally.add(sample.papr_db);
            sum_db += sample.papr_db;
            max_db = max_db.max(sample.papr_db);
        }
        let table = tally.table()?;
        s.ccdf = Some(CcdfReport {
            papr_db_at_1e_2: table.threshold_at(1e-2),
            papr_db_at_1e_3: table.threshold_at(1e-3),
            thresholds_db: table.thresholds,
            ccdf: table.probabilities,
            denominator: (spec.denominator == DenominatorMode::Ensemble).then_some(ensemble),
            mean_papr_db: sum_db / records.len() as f64,
            max_papr_db: max_db,
        });
        s.nu = nu_stats(&engine, scheme, records.iter().map(|r| r.nu));
        s.solver = solver_stats(records.iter().filter_map(|r| r.solve.as_ref()));
        s.noiseless_bit_errors = Some(records.iter().map(|r| r.noiseless_errors).sum());
        s.infeasible_blocks = Some(records.iter().filter(|r| !r.feasible).count() as u64);
        report.schemes.push(s);
        report.timing.per_scheme_seconds.push((scheme, t.elapsed().as_secs_f64()));
    }
    report.timing.total_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

struct Cached {
    bits: Vec<u8>,
    signal: TimeSignal,
    nu: f64,
    solve: Option<SolveStats>,
}

struct BlockCache<'a> {
    engine: &'a Engine,
    scheme: Scheme,
    blocks: Vec<Cached>,
}

impl BlockCache<'_> {
    fn ensure(&mut self, pool: &ThreadPool, len: usize) -> Result<()> {
        if self.blocks.len() >= len {
            return Ok(());
        }
        let (engine, scheme) = (self.engine, self.scheme);
        let fresh = pool.install(|| {
            (self.blocks.len()..len)
                .into_par_iter()
                .map(|b| {
                    let tx = engine.transmit(scheme, b)?;
                    let nu = engine.realized_nu(&tx)?;
                    let Transmitted { bits, signal, solve, .. } = tx;
                    Ok(Cached { bits, signal, nu, solve })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        self.blocks.extend(fresh);
        Ok(())
    }
}

/// BER sweep over the SNR grid for every scheme in the spec.
///
/// Blocks are shared across SNR points; block `b` at point `p` always sees
/// the same noise draw regardless of scheme, and points stop at the first
/// block where either stopping threshold is reached.
pub fn run_ber(spec: &RunSpec, workers: Option<usize>) -> Result<RunReport> {
    let engine = Engine::new(spec)?;
    let pool = pool(workers)?;
    let started = Instant::now();
    let mut report = new_report(&engine, RunKind::Ber)?;
    report.timing.workers = pool.current_num_threads();
    let m = engine.trx.config().block_bits() as u64;
    for &scheme in &spec.schemes {
        let t = Instant::now();
        let mut cache = BlockCache { engine: &engine, scheme, blocks: Vec::new() };
        cache.ensure(&pool, spec.calibration_blocks)?;
        let energies: Vec<f64> =
            cache.blocks[..spec.calibration_blocks].iter().map(|c| c.signal.energy()).collect();
        let mut s = base_report(&engine, scheme, &energies);
        let eb = s.energy_per_bit;
        let mut points = Vec::with_capacity(spec.snr_grid.len());
        for (pi, &snr) in spec.snr_grid.iter().enumerate() {
            let mut p = BerPoint {
                snr_db: snr,
                ber: 0.0,
                bits: 0,
                errors: 0,
                blocks: 0,
                index_errors: 0,
                symbol_errors: 0,
                noise_variance: channel::noise_variance(eb, snr),
            };
            let mut start = 0;
            'point: loop {
                let end = start + BER_CHUNK;
                cache.ensure(&pool, end)?;
                let blocks = &cache.blocks[start..end];
                let results = pool.install(|| {
                    blocks
                        .par_iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let mut rng = rng::stream(spec.seed, Purpose::Noise, pi, start + i);
                            let y = channel::awgn(&c.signal, eb, snr, &mut rng)?;
                            Ok(engine.trx.receive(&y, &c.bits)?)
                        })
                        .collect::<Result<Vec<_>>>()
                })?;
                for r in results {
                    p.blocks += 1;
                    p.bits += m;
                    p.errors += r.bit_errors as u64;
                    p.index_errors += r.index_errors as u64;
                    p.symbol_errors += r.symbol_errors as u64;
                    if p.errors >= spec.target_errors || p.bits >= spec.max_bits {
                        break 'point;
                    }
                }
                start = end;
            }
            p.ber = p.errors as f64 / p.bits as f64;
            points.push(p);
        }
        s.nu = nu_stats(&engine, scheme, cache.blocks.iter().map(|c| c.nu));
        s.solver = solver_stats(cache.blocks.iter().filter_map(|c| c.solve.as_ref()));
        s.ber = Some(points);
        report.schemes.push(s);
        report.timing.per_scheme_seconds.push((scheme, t.elapsed().as_secs_f64()));
    }
    report.timing.total_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Active,
    Idle,
}

/// One frequency-domain point of the super constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub scheme: Scheme,
    pub block: usize,
    pub subcarrier: usize,
    pub role: Role,
    pub value: Complex,
    /// Dither radius bound of an idle subcarrier.
    pub radius: f64,
}

pub struct ConstellationDump {
    pub report: RunReport,
    pub points: Vec<ScatterPoint>,
}

impl ConstellationDump {
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let dir = self.report.write(root)?;
        let rows = self.points.iter().map(|p| {
            vec![
                p.scheme.to_string(),
                p.block.to_string(),
                p.subcarrier.to_string(),
                match p.role {
                    Role::Active => "active".into(),
                    Role::Idle => "idle".into(),
                },
                p.value.re.to_string(),
                p.value.im.to_string(),
                p.radius.to_string(),
            ]
        });
        write_csv(
            &dir.join("constellation.csv"),
            &["scheme", "block", "subcarrier", "role", "re", "im", "radius"],
            rows,
        )?;
        Ok(dir)
    }
}

/// Transmitted frequency-domain points of the first `trials` blocks.
pub fn dump_super_constellation(spec: &RunSpec, workers: Option<usize>) -> Result<ConstellationDump> {
    let engine = Engine::new(spec)?;
    let pool = pool(workers)?;
    let started = Instant::now();
    let mut report = new_report(&engine, RunKind::Constellation)?;
    report.timing.workers = pool.current_num_threads();
    let mut points = Vec::new();
    for &scheme in &spec.schemes {
        let t = Instant::now();
        let txs = pool.install(|| {
            (0..spec.trials).into_par_iter().map(|b| engine.transmit(scheme, b)).collect::<Result<Vec<_>>>()
        })?;
        let energies: Vec<f64> = txs.iter().map(|tx| tx.signal.energy()).collect();
        let mut s = base_report(&engine, scheme, &energies);
        let nus = txs.iter().map(|tx| engine.realized_nu(tx)).collect::<Result<Vec<_>>>()?;
        s.nu = nu_stats(&engine, scheme, nus.into_iter());
        s.solver = solver_stats(txs.iter().filter_map(|tx| tx.solve.as_ref()));
        for (b, tx) in txs.iter().enumerate() {
            for (i, &value) in tx.dithered.values().iter().enumerate() {
                let active = tx.dithered.is_active(i);
                let radius = match (&tx.plan, active) {
                    (_, true) | (None, _) => 0.0,
                    (Some(plan), false) => plan.radius_at(i),
                };
                let role = if active { Role::Active } else { Role::Idle };
                points.push(ScatterPoint { scheme, block: b, subcarrier: i, role, value, radius });
            }
        }
        report.schemes.push(s);
        report.timing.per_scheme_seconds.push((scheme, t.elapsed().as_secs_f64()));
    }
    report.timing.total_seconds = started.elapsed().as_secs_f64();
    Ok(ConstellationDump { report, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOneScheme {
    pub scheme: Scheme,
    /// Per-block PAPR before and after dithering.
    pub papr_db_before: f64,
    pub papr_db_after: f64,
    pub peak_power_before: f64,
    pub peak_power_after: f64,
    pub energy: f64,
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub nu: f64,
    pub nu_bound: f64,
    pub mu_per_subblock: Vec<f64>,
    pub lambda_per_subblock: Vec<f64>,
    /// Radius bound and subcarrier count per dither group.
    pub groups: Vec<(f64, usize)>,
    /// `(subcarrier, re, im)` of every nonzero idle value.
    pub dither: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOneReport {
    pub spec_digest: String,
    pub spec: RunSpec,
    pub rng: String,
    pub block: usize,
    pub bits: String,
    pub schemes: Vec<SolveOneScheme>,
}

impl SolveOneReport {
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let dir = run_dir(root, RunKind::SolveOne, &self.spec_digest);
        std::fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
        write_json(&dir.join(format!("block_{}.json", self.block)), self)?;
        Ok(dir)
    }
}

/// Detailed solver output for a single block of the run.
pub fn solve_one(spec: &RunSpec, block: usize) -> Result<SolveOneReport> {
    let engine = Engine::new(spec)?;
    let cfg = engine.trx.config();
    let mut schemes = Vec::new();
    let mut bits = String::new();
    for &scheme in &spec.schemes {
        let tx = engine.transmit(scheme, block)?;
        bits = tx.bits.iter().map(|b| char::from(b'0' + b)).collect();
        let before = engine.trx.transmit(&tx.block)?;
        let after = metrics::papr(&tx.signal, Denominator::PerBlock)?;
        let m = metrics::margins(&tx.dithered, cfg)?;
        let groups = tx
            .plan
            .as_ref()
            .map(|p| p.radii().iter().copied().zip(p.groups().iter().map(Vec::len)).collect())
            .unwrap_or_default();
        let dither = tx
            .dithered
            .values()
            .iter()
            .enumerate()
            .filter(|&(i, v)| !tx.dithered.is_active(i) && v.norm_sqr() > 0.0)
            .map(|(i, v)| (i, v.re, v.im))
            .collect();
        schemes.push(SolveOneScheme {
            scheme,
            papr_db_before: metrics::papr(&before, Denominator::PerBlock)?.papr_db,
            papr_db_after: after.papr_db,
            peak_power_before: before.peak_power(),
            peak_power_after: after.peak_power,
            energy: tx.signal.energy(),
            objective: tx.solve.as_ref().map(|s| s.objective),
            iterations: tx.solve.as_ref().map(|s| s.iterations),
            converged: tx.solve.as_ref().map(|s| s.converged),
            nu: m.nu(),
            nu_bound: engine.nu_bound(scheme),
            mu_per_subblock: m.mu,
            lambda_per_subblock: m.lambda,
            groups,
            dither,
        });
    }
    Ok(SolveOneReport {
        spec_digest: spec.digest(),
        spec: spec.clone(),
        rng: rng::ALGORITHM.into(),
        block,
        bits,
        schemes,
    })
}
