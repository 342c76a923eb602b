use ofdm_im::channel::{awgn, detect_indices, noise_variance, IllegalPatternPolicy};
use ofdm_im::constellation::make_qam;
use ofdm_im::index::build_legal_set;
use ofdm_im::{Complex, SystemConfig, TimeSignal, Transceiver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn noise_variance_and_isotropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x = TimeSignal::new(vec![Complex::new(0.0, 0.0); 1_000_000]);
    let (eb, snr_db) = (2.0, 6.0);
    let y = awgn(&x, eb, snr_db, &mut rng).unwrap();
    let n0 = noise_variance(eb, snr_db);
    let count = y.len() as f64;
    let var_re = y.samples().iter().map(|v| v.re * v.re).sum::<f64>() / count;
    let var_im = y.samples().iter().map(|v| v.im * v.im).sum::<f64>() / count;
    assert!(((var_re + var_im) / n0 - 1.0).abs() < 0.01);
    assert!((var_re / var_im - 1.0).abs() < 0.02);
}

#[test]
fn demapper_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for order in [4, 16, 64] {
        let c = make_qam(order).unwrap();
        for _ in 0..10_000 {
            let s = c.points()[rng.random_range(0..order)];
            let y = s + Complex::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let mut best = 0;
            for w in 1..order {
                if (y - c.points()[w]).norm_sqr() < (y - c.points()[best]).norm_sqr() {
                    best = w;
                }
            }
            assert_eq!(c.demap(y), best);
        }
    }
}

#[test]
fn detector_matches_exhaustive_scoring() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (n, k) in [(4, 2), (6, 3), (8, 2)] {
        let set = build_legal_set(n, k).unwrap();
        for _ in 0..2000 {
            let y: Vec<Complex> = (0..n).map(|_| Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
            let got = detect_indices(&y, &set, IllegalPatternPolicy::MaxCapturedPower);
            assert!(set.pattern_to_bits(got).is_some());
            // the legal pattern capturing the most power; the raw top-k set,
            // when legal, always captures the most
            let captured = |p: &ofdm_im::ActivationPattern| p.indices().iter().map(|&i| y[i].norm_sqr()).sum::<f64>();
            let best = set.patterns().iter().map(captured).fold(0.0, f64::max);
            assert_eq!(captured(got), best);
            let hamming = detect_indices(&y, &set, IllegalPatternPolicy::NearestByHamming);
            assert!(set.pattern_to_bits(hamming).is_some());
        }
    }
}

#[test]
fn receiver_counts_errors() {
    let cfg = SystemConfig::new(16, 4, 2, 16).unwrap();
    let trx = Transceiver::qam(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let bits: Vec<u8> = (0..cfg.block_bits()).map(|_| rng.random_range(0..2u8)).collect();
    let block = trx.modulate(&bits).unwrap();
    let x = trx.transmit(&block).unwrap();
    let clean = trx.receive(&x, &bits).unwrap();
    assert_eq!((clean.bit_errors, clean.index_errors, clean.symbol_errors), (0, 0, 0));
    let noisy = awgn(&x, 2.0, -5.0, &mut rng).unwrap();
    let r = trx.receive(&noisy, &bits).unwrap();
    assert!(r.bit_errors > 0);
    assert!(r.index_errors <= cfg.subblocks() && r.symbol_errors <= cfg.active_total());
    assert!(trx.receive(&x, &bits[1..]).is_err());
}
