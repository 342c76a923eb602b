//! PAPR, CCDF, detection-margin and energy accounting.

use alloc::vec::Vec;

use crate::{math, Constellation, Error, FrequencyBlock, Result, SystemConfig, TimeSignal};

/// Denominator of the PAPR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Denominator {
    /// `‖x‖₂² / N` of the block itself.
    PerBlock,
    /// A run-level mean power per sample.
    Ensemble(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprSample {
    pub papr_linear: f64,
    pub papr_db: f64,
    pub peak_power: f64,
    pub denominator: f64,
}

impl PaprSample {
    pub fn from_parts(peak_power: f64, denominator: f64) -> Result<Self> {
        if !(peak_power > 0.0) || !(denominator > 0.0) {
            return Err(Error::ZeroSignal);
        }
        let papr_linear = peak_power / denominator;
        Ok(Self { papr_linear, papr_db: to_db(papr_linear), peak_power, denominator })
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * math::log10(linear)
}

pub fn from_db(db: f64) -> f64 {
    math::powf(10.0, db / 10.0)
}

/// `‖x‖∞² / P̄` with `P̄` chosen by `mode`.
pub fn papr(x: &TimeSignal, mode: Denominator) -> Result<PaprSample> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let denominator = match mode {
        Denominator::PerBlock => x.energy() / x.len() as f64,
        Denominator::Ensemble(p) => {
            if !(p > 0.0) {
                return Err(Error::Param { field: "denominator", reason: "ensemble power must be positive" });
            }
            p
        }
    };
    PaprSample::from_parts(x.peak_power(), denominator)
}

/// Per-subblock `μ_β` (smallest active modulus), `λ_β` (largest idle
/// modulus) and `δ_β = μ_β − λ_β`.
#[derive(Debug, Clone, PartialEq)]
pub struct Margins {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
}

impl Margins {
    /// `ν = min_β δ_β`
    pub fn nu(&self) -> f64 {
        self.delta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn margins(block: &FrequencyBlock, cfg: &SystemConfig) -> Result<Margins> {
    if block.len() != cfg.subcarriers() {
        return Err(Error::Length { expected: cfg.subcarriers(), actual: block.len() });
    }
    let n = cfg.subblock_len();
    let mut mu = Vec::with_capacity(cfg.subblocks());
    let mut lambda = Vec::with_capacity(cfg.subblocks());
    for beta in 0..cfg.subblocks() {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in beta * n..(beta + 1) * n {
            let a = block.values()[i].norm();
            if block.is_active(i) {
                lo = lo.min(a);
            } else {
                hi = hi.max(a);
            }
        }
        mu.push(lo);
        lambda.push(hi);
    }
    let delta = mu.iter().zip(&lambda).map(|(m, l)| m - l).collect();
    Ok(Margins { mu, lambda, delta })
}

/// `ν` of a (possibly dithered) block.
///
/// `cons` is used to check that active entries are constellation points
/// with a known amplitude level.
pub fn realized_nu(block: &FrequencyBlock, cfg: &SystemConfig, cons: &Constellation) -> Result<f64> {
    for (v, &a) in block.values().iter().zip(block.activation()) {
        if a && cons.level_of(*v).is_none() {
            return Err(Error::UnknownLevel(v.norm()));
        }
    }
    Ok(margins(block, cfg)?.nu())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfTable {
    pub thresholds: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub sample_count: u64,
}

/// Exceedance counts on a fixed threshold grid; tallies over disjoint
/// sample sets merge by addition.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfTally {
    thresholds: Vec<f64>,
    exceed: Vec<u64>,
    count: u64,
}

impl CcdfTally {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Empty);
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Param { field: "thresholds", reason: "must be strictly ascending" });
        }
        let exceed = alloc::vec![0; thresholds.len()];
        Ok(Self { thresholds, exceed, count: 0 })
    }

    pub fn add(&mut self, papr_db: f64) {
        self.count += 1;
        // thresholds ascending: exceeded ones form a prefix
        let k = self.thresholds.partition_point(|&t| papr_db > t);
        for e in &mut self.exceed[..k] {
            *e += 1;
        }
    }

    pub fn merge(&mut self, other: &CcdfTally) -> Result<()> {
        if other.thresholds != self.thresholds {
            return Err(Error::Param { field: "thresholds", reason: "cannot merge tallies over different grids" });
        }
        for (a, b) in self.exceed.iter_mut().zip(&other.exceed) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn table(&self) -> Result<CcdfTable> {
        if self.count == 0 {
            return Err(Error::Empty);
        }
        Ok(CcdfTable {
            thresholds: self.thresholds.clone(),
            probabilities: self.exceed.iter().map(|&e| e as f64 / self.count as f64).collect(),
            sample_count: self.count,
        })
    }
}

/// Empirical `P(PAPR > threshold)` on an ascending dB grid.
pub fn ccdf(samples: &[PaprSample], thresholds: &[f64]) -> Result<CcdfTable> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    let mut tally = CcdfTally::new(thresholds.to_vec())?;
    for s in samples {
        tally.add(s.papr_db);
    }
    tally.table()
}

impl CcdfTable {
    /// Smallest grid threshold whose exceedance probability is at most `p`
    /// (linearly interpolated between grid points in log-probability).
    pub fn threshold_at(&self, p: f64) -> Option<f64> {
        let j = self.probabilities.iter().position(|&q| q <= p)?;
        if j == 0 {
            return Some(self.thresholds[0]);
        }
        let (t0, t1) = (self.thresholds[j - 1], self.thresholds[j]);
        let (q0, q1) = (self.probabilities[j - 1], self.probabilities[j]);
        if q1 <= 0.0 {
            // no log interpolation towards zero probability
            let f = (q0 - p) / q0;
            return Some(t0 + f * (t1 - t0));
        }
        let f = (math::ln(q0) - math::ln(p)) / (math::ln(q0) - math::ln(q1));
        Some(t0 + f * (t1 - t0))
    }
}

/// Mergeable sum of block energies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTally {
    pub total: f64,
    pub blocks: u64,
}

impl EnergyTally {
    pub fn add(&mut self, x: &TimeSignal) {
        self.total += x.energy();
        self.blocks += 1;
    }

    pub fn merge(&mut self, other: &EnergyTally) {
        self.total += other.total;
        self.blocks += other.blocks;
    }

    pub fn mean_block_energy(&self) -> Option<f64> {
        (self.blocks > 0).then(|| self.total / self.blocks as f64)
    }

    /// Mean power per time sample for blocks of `n` samples.
    pub fn mean_sample_power(&self, n: usize) -> Option<f64> {
        self.mean_block_energy().map(|e| e / n as f64)
    }

    pub fn energy_per_bit(&self, bits_per_block: usize) -> Option<f64> {
        self.mean_block_energy().map(|e| e / bits_per_block as f64)
    }
}

/// Mean `‖x‖₂²` over `blocks`, divided by the bits per block.
pub fn energy_per_bit<'a, I>(blocks: I, bits_per_block: usize) -> Result<f64>
where
    I: IntoIterator<Item = &'a TimeSignal>,
{
    let mut tally = EnergyTally::default();
    for x in blocks {
        tally.add(x);
    }
    tally.energy_per_bit(bits_per_block).ok_or(Error::Empty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex;
    use approx::assert_abs_diff_eq;

    fn sample(db: f64) -> PaprSample {
        PaprSample::from_parts(from_db(db), 1.0).unwrap()
    }

    #[test]
    fn flat_and_impulse() {
        let flat = TimeSignal::new(vec![Complex::from_polar(1.0, 0.3); 16]);
        let s = papr(&flat, Denominator::PerBlock).unwrap();
        assert_abs_diff_eq!(s.papr_linear, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.papr_db, 0.0, epsilon = 1e-12);
        let mut imp = vec![Complex::new(0.0, 0.0); 16];
        imp[0] = Complex::new(4.0, 0.0);
        let s = papr(&TimeSignal::new(imp), Denominator::PerBlock).unwrap();
        assert_abs_diff_eq!(s.papr_linear, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn ensemble_denominator() {
        let flat = TimeSignal::new(vec![Complex::new(2.0, 0.0); 8]);
        let s = papr(&flat, Denominator::Ensemble(2.0)).unwrap();
        assert_abs_diff_eq!(s.papr_linear, 2.0, epsilon = 1e-12);
        assert!(papr(&flat, Denominator::Ensemble(0.0)).is_err());
    }

    #[test]
    fn zero_signal_rejected() {
        let z = TimeSignal::new(vec![Complex::new(0.0, 0.0); 8]);
        assert_eq!(papr(&z, Denominator::PerBlock), Err(Error::ZeroSignal));
        assert_eq!(papr(&TimeSignal::new(vec![]), Denominator::PerBlock), Err(Error::Empty));
    }

    #[test]
    fn ccdf_step() {
        let samples = vec![sample(6.0); 10];
        let t = ccdf(&samples, &[5.0, 7.0]).unwrap();
        assert_eq!(t.probabilities, vec![1.0, 0.0]);
        assert_eq!(t.sample_count, 10);
        assert_eq!(ccdf(&[], &[5.0]), Err(Error::Empty));
        assert!(ccdf(&samples, &[7.0, 5.0]).is_err());
    }

    #[test]
    fn tallies_merge() {
        let grid = vec![1.0, 2.0, 3.0];
        let mut a = CcdfTally::new(grid.clone()).unwrap();
        let mut b = CcdfTally::new(grid.clone()).unwrap();
        let mut all = CcdfTally::new(grid).unwrap();
        for (i, v) in [0.5, 1.5, 2.5, 3.5, 2.0].iter().enumerate() {
            if i % 2 == 0 { a.add(*v) } else { b.add(*v) }
            all.add(*v);
        }
        a.merge(&b).unwrap();
        assert_eq!(a, all);
        assert_eq!(all.table().unwrap().probabilities, vec![0.8, 0.4, 0.2]);
    }

    #[test]
    fn threshold_lookup() {
        let t = CcdfTable { thresholds: vec![1.0, 2.0, 3.0], probabilities: vec![1.0, 0.1, 0.001], sample_count: 1000 };
        assert_abs_diff_eq!(t.threshold_at(0.1).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.threshold_at(0.01).unwrap(), 2.5, epsilon = 1e-12);
        assert_eq!(t.threshold_at(1e-4), None);
    }

    #[test]
    fn nu_from_margins() {
        let cfg = SystemConfig::new(8, 4, 2, 16).unwrap();
        let cons = crate::constellation::make_qam(16).unwrap();
        let c = |re, im| Complex::new(re, im);
        // subblock 0: mu = sqrt 2, lambda = 0; subblock 1: mu = sqrt 10, lambda = 1.75
        let values = vec![c(1.0, 1.0), c(3.0, 3.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 1.0), c(1.0, 3.0), c(0.0, 1.75), c(1.0, 0.0)];
        let active = vec![true, true, false, false, true, true, false, false];
        let block = FrequencyBlock::new(values, active).unwrap();
        let m = margins(&block, &cfg).unwrap();
        assert_abs_diff_eq!(m.mu[0], 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.lambda[1], 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(realized_nu(&block, &cfg, &cons).unwrap(), 10f64.sqrt() - 1.75, epsilon = 1e-12);
    }

    #[test]
    fn energy_per_bit_of_blocks() {
        let a = TimeSignal::new(vec![Complex::new(1.0, 0.0); 4]);
        let b = TimeSignal::new(vec![Complex::new(0.0, 2.0); 4]);
        assert_abs_diff_eq!(energy_per_bit([&a, &b], 2).unwrap(), 5.0, epsilon = 1e-12);
        assert_eq!(energy_per_bit(core::iter::empty(), 2), Err(Error::Empty));
    }
}
