//! AWGN channel and the power-based OFDM-IM receiver.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::index::{ActivationPattern, LegalPatternSet};
use crate::{bits, math, Complex, Constellation, Dft, Error, Result, SystemConfig, TimeSignal};

/// Noise variance per complex sample for energy per bit `eb` at `snr_db`
/// (Eb/N0 in dB).
pub fn noise_variance(eb: f64, snr_db: f64) -> f64 {
    eb / crate::metrics::from_db(snr_db)
}

/// Adds circularly symmetric Gaussian noise of variance
/// `N0 = eb / 10^(snr_db/10)` per complex sample.
pub fn awgn<R: Rng + ?Sized>(x: &TimeSignal, eb: f64, snr_db: f64, rng: &mut R) -> Result<TimeSignal> {
    if !(eb > 0.0) {
        return Err(Error::Param { field: "eb", reason: "energy per bit must be positive" });
    }
    let sigma = math::sqrt(noise_variance(eb, snr_db) / 2.0);
    let samples = x
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex::new(re, im) * sigma
        })
        .collect();
    Ok(TimeSignal::new(samples))
}

/// What the detector does when the `k` strongest entries do not form a
/// legal pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum IllegalPatternPolicy {
    /// Legal pattern capturing the most received power.
    #[default]
    MaxCapturedPower,
    /// Legal pattern nearest in Hamming distance to the raw top-k set.
    NearestByHamming,
}

/// Power-based index detection on one received subblock.
///
/// Takes the `k` entries of largest `|Y|²` (ties toward the lower index).
/// If they form a legal pattern it is returned, otherwise `policy` picks a
/// legal one; remaining ties go to the earliest pattern in the table.
pub fn detect_indices<'a>(y_sub: &[Complex], set: &'a LegalPatternSet, policy: IllegalPatternPolicy) -> &'a ActivationPattern {
    let power: Vec<f64> = y_sub.iter().map(|v| v.norm_sqr()).collect();
    let mut order: Vec<usize> = (0..y_sub.len()).collect();
    order.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    let top = order[..set.active()].iter().fold(0u64, |m, &i| m | (1 << i));
    if let Some(rank) = set.rank_of_mask(top) {
        return &set.patterns()[rank];
    }
    let patterns = set.patterns();
    let best = match policy {
        IllegalPatternPolicy::MaxCapturedPower => {
            let captured = |p: &ActivationPattern| p.indices().iter().map(|&i| power[i]).sum::<f64>();
            let mut best = 0;
            let mut best_power = captured(&patterns[0]);
            for (j, p) in patterns.iter().enumerate().skip(1) {
                let c = captured(p);
                if c > best_power {
                    best = j;
                    best_power = c;
                }
            }
            best
        }
        IllegalPatternPolicy::NearestByHamming => {
            let mut best = 0;
            let mut best_dist = u32::MAX;
            for (j, p) in patterns.iter().enumerate() {
                let d = (p.mask() ^ top).count_ones();
                if d < best_dist {
                    best = j;
                    best_dist = d;
                }
            }
            best
        }
    };
    &patterns[best]
}

/// Minimum-distance symbol words on the active positions of `pattern`.
pub fn demod_symbols(y_sub: &[Complex], pattern: &ActivationPattern, cons: &Constellation) -> Vec<usize> {
    pattern.indices().iter().map(|&i| cons.demap(y_sub[i])).collect()
}

/// Decisions for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bits: Vec<u8>,
    /// Detected pattern rank per subblock.
    pub patterns: Vec<usize>,
    /// Detected symbol words, `k` per subblock.
    pub symbols: Vec<usize>,
}

/// Outcome of receiving one block against the transmitted bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveResult {
    pub detected_bits: Vec<u8>,
    pub bit_errors: usize,
    /// Subblocks whose activation pattern was wrong.
    pub index_errors: usize,
    /// Symbol slots whose decided word was wrong.
    pub symbol_errors: usize,
}

/// Forward transform, per-subblock detection and bit demapping.
pub fn detect_block(
    y: &TimeSignal,
    dft: &Dft,
    cfg: &SystemConfig,
    cons: &Constellation,
    set: &LegalPatternSet,
    policy: IllegalPatternPolicy,
) -> Result<Detection> {
    if y.len() != cfg.subcarriers() {
        return Err(Error::Length { expected: cfg.subcarriers(), actual: y.len() });
    }
    let spectrum = dft.dft(y)?;
    let mut out = Detection {
        bits: Vec::with_capacity(cfg.block_bits()),
        patterns: Vec::with_capacity(cfg.subblocks()),
        symbols: Vec::with_capacity(cfg.active_total()),
    };
    for sub in spectrum.chunks_exact(cfg.subblock_len()) {
        let pattern = detect_indices(sub, set, policy);
        let rank = set.pattern_to_bits(pattern).expect("detector returns legal patterns");
        bits::push_word(&mut out.bits, rank, cfg.index_bits());
        out.patterns.push(rank);
        for w in demod_symbols(sub, pattern, cons) {
            bits::push_word(&mut out.bits, w, cfg.bits_per_symbol());
            out.symbols.push(w);
        }
    }
    Ok(out)
}

/// [`detect_block`] scored against the transmitted `tx_bits`.
pub fn receive_block(
    y: &TimeSignal,
    tx_bits: &[u8],
    dft: &Dft,
    cfg: &SystemConfig,
    cons: &Constellation,
    set: &LegalPatternSet,
    policy: IllegalPatternPolicy,
) -> Result<ReceiveResult> {
    if tx_bits.len() != cfg.block_bits() {
        return Err(Error::Length { expected: cfg.block_bits(), actual: tx_bits.len() });
    }
    let det = detect_block(y, dft, cfg, cons, set, policy)?;
    let (p1, bps) = (cfg.index_bits(), cfg.bits_per_symbol());
    let mut index_errors = 0;
    let mut symbol_errors = 0;
    for (tx, rx) in tx_bits.chunks_exact(cfg.subblock_bits()).zip(det.bits.chunks_exact(cfg.subblock_bits())) {
        index_errors += usize::from(tx[..p1] != rx[..p1]);
        symbol_errors += tx[p1..].chunks_exact(bps).zip(rx[p1..].chunks_exact(bps)).filter(|(a, b)| a != b).count();
    }
    Ok(ReceiveResult {
        bit_errors: bits::hamming(tx_bits, &det.bits),
        detected_bits: det.bits,
        index_errors,
        symbol_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::make_qam;
    use crate::index::build_legal_set;

    fn from_powers(p: &[f64]) -> Vec<Complex> {
        p.iter().map(|&v| Complex::new(v.sqrt(), 0.0)).collect()
    }

    #[test]
    fn top_two_legal() {
        let set = build_legal_set(4, 2).unwrap();
        let policy = IllegalPatternPolicy::default();
        assert_eq!(detect_indices(&from_powers(&[9.6, 0.01, 8.4, 0.04]), &set, policy).indices(), &[0, 2]);
        assert_eq!(detect_indices(&from_powers(&[9.6, 0.01, 0.04, 8.4]), &set, policy).indices(), &[0, 3]);
    }

    #[test]
    fn illegal_top_two_falls_back_to_captured_power() {
        let set = build_legal_set(4, 2).unwrap();
        // top-2 = {1, 3} (0-based), not in the table
        let y = from_powers(&[1.0, 9.0, 2.0, 8.0]);
        let got = detect_indices(&y, &set, IllegalPatternPolicy::MaxCapturedPower);
        // exhaustive scoring: {0,1}=10, {0,2}=3, {0,3}=9, {1,2}=11
        assert_eq!(got.indices(), &[1, 2]);
        let by_hamming = detect_indices(&y, &set, IllegalPatternPolicy::NearestByHamming);
        // {0,1}, {0,3} and {1,2} are all at distance 2; the first wins
        assert_eq!(by_hamming.indices(), &[0, 1]);
    }

    #[test]
    fn power_ties_prefer_lower_index() {
        let set = build_legal_set(4, 2).unwrap();
        let y = from_powers(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(detect_indices(&y, &set, IllegalPatternPolicy::default()).indices(), &[0, 1]);
    }

    #[test]
    fn symbol_decisions() {
        let cons = make_qam(16).unwrap();
        let p = ActivationPattern::new(vec![0, 2], 4).unwrap();
        let y = [Complex::new(0.9, 0.9), Complex::new(0.0, 0.0), Complex::new(3.0, -1.0), Complex::new(0.0, 0.0)];
        let words = demod_symbols(&y, &p, &cons);
        assert_eq!(cons.map(words[0]).unwrap(), Complex::new(1.0, 1.0));
        assert_eq!(cons.map(words[1]).unwrap(), Complex::new(3.0, -1.0));
    }

    #[test]
    fn awgn_vanishes_at_high_snr() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x = TimeSignal::new((0..64).map(|i| Complex::new(i as f64, -1.0)).collect());
        let y = awgn(&x, 2.0, 300.0, &mut rng).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).norm() < 1e-9);
        }
        assert!(awgn(&x, 0.0, 10.0, &mut rng).is_err());
    }
}
