use ofdm_im::constellation::make_qam;
use ofdm_im::index::build_legal_set;
use ofdm_im::transform::{dft, idft};
use ofdm_im::{bits, Complex, Dft, SystemConfig, TimeSignal, Transceiver};
use proptest::collection::vec;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex>> {
    vec((-4.0f64..4.0, -4.0f64..4.0).prop_map(|(re, im)| Complex::new(re, im)), len)
}

fn reference() -> Transceiver {
    Transceiver::qam(SystemConfig::new(128, 4, 2, 16).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parseval(x in complex_vec(128)) {
        let t = idft(&x).unwrap();
        let e: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((t.energy() - e).abs() <= 1e-9 * e);
        let back = dft(&TimeSignal::new(x.clone())).unwrap();
        let e2: f64 = back.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e2 - e).abs() <= 1e-9 * e);
    }

    #[test]
    fn transform_round_trip(x in complex_vec(128)) {
        let back = dft(&idft(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn block_round_trip(b in vec(0u8..2, 320)) {
        let trx = reference();
        let block = trx.modulate(&b).unwrap();
        prop_assert_eq!(block.active_count(), 64);
        for (v, &a) in block.values().iter().zip(block.activation()) {
            if a {
                prop_assert!(trx.constellation().points().contains(v));
            } else {
                prop_assert_eq!(*v, Complex::new(0.0, 0.0));
            }
        }
        // Parseval against the assembled block
        let x = trx.transmit(&block).unwrap();
        prop_assert!((x.energy() - block.energy()).abs() <= 1e-9 * block.energy());
        prop_assert_eq!(trx.disassemble(&block).unwrap(), b.clone());
        // noiseless receiver
        let rx = trx.receive(&x, &b).unwrap();
        prop_assert_eq!(rx.bit_errors, 0);
    }
}

proptest! {
    #[test]
    fn non_power_of_two_round_trip(x in complex_vec(12)) {
        let plan = Dft::new(12).unwrap();
        let back = plan.forward(&plan.inverse(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }
}

#[test]
fn constellation_bijective() {
    for order in [2, 4, 16, 64, 256, 1024] {
        let c = make_qam(order).unwrap();
        let mut seen = std::collections::HashSet::new();
        for w in 0..order {
            let p = c.map(w).unwrap();
            assert!(seen.insert((p.re.to_bits(), p.im.to_bits())));
            assert_eq!(c.demap(p), w);
        }
    }
}

#[test]
fn every_legal_pattern_appears() {
    let cfg = SystemConfig::new(16, 8, 3, 4).unwrap();
    let trx = Transceiver::qam(cfg).unwrap();
    let set = build_legal_set(8, 3).unwrap();
    assert_eq!(set.len(), 32);
    let mut masks = std::collections::BTreeSet::new();
    for w in 0..(1usize << cfg.index_bits()) {
        let mut b = bits::from_word(w, cfg.index_bits());
        b.resize(cfg.subblock_bits(), 0);
        b.extend(std::iter::repeat_n(0, cfg.subblock_bits()));
        let block = trx.modulate(&b).unwrap();
        let mask = block.activation()[..8].iter().enumerate().fold(0u64, |m, (i, &a)| m | (u64::from(a) << i));
        masks.insert(mask);
    }
    assert_eq!(masks.len(), 32);
    assert!(masks.iter().all(|m| set.rank_of_mask(*m).is_some()));
}
