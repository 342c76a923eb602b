//! Unnormalized square QAM with per-axis Gray mapping.
//!
//! Points sit on the odd-integer grid `{±1, ±3, …, ±(√M − 1)}` per axis, so
//! 16-QAM has the three amplitude levels `√2 < √10 < √18`. Bit words are
//! read most significant bit first; the first half selects the in-phase
//! coordinate, the second half the quadrature coordinate. Each half is a
//! reflected Gray code, e.g. `00 → −3, 01 → −1, 11 → +1, 10 → +3`.

use alloc::vec::Vec;

use crate::{math, Complex, Error, Result};

/// Tolerance used when grouping moduli into amplitude levels.
pub const LEVEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    /// `points[w]` is the point for bit word `w`.
    points: Vec<Complex>,
    bits_per_symbol: usize,
    /// Levels per axis; 1 for BPSK (no quadrature axis).
    axis_bits: (usize, usize),
    levels: Vec<f64>,
    point_level: Vec<usize>,
}

/// Builds the `order`-point QAM constellation.
///
/// `order` must be 2 (BPSK), 4 (QPSK) or a larger power of four.
pub fn make_qam(order: usize) -> Result<Constellation> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::Param { field: "M", reason: "must be a power of two, at least 2" });
    }
    let bits = order.trailing_zeros() as usize;
    let axis_bits = if order == 2 {
        (1, 0)
    } else if bits.is_multiple_of(2) {
        (bits / 2, bits / 2)
    } else {
        return Err(Error::Param { field: "M", reason: "only square QAM (power of four), BPSK and QPSK are supported" });
    };

    let points = (0..order)
        .map(|w| {
            let re = axis_coordinate(w >> axis_bits.1, axis_bits.0);
            let im = if axis_bits.1 == 0 {
                0.0
            } else {
                axis_coordinate(w & ((1 << axis_bits.1) - 1), axis_bits.1)
            };
            Complex::new(re, im)
        })
        .collect::<Vec<_>>();

    let mut levels: Vec<f64> = Vec::new();
    let mut moduli: Vec<f64> = points.iter().map(|p| p.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    for m in moduli {
        match levels.last() {
            Some(&last) if m - last <= LEVEL_TOLERANCE => {}
            _ => levels.push(m),
        }
    }
    let point_level = points
        .iter()
        .map(|p| level_lookup(&levels, p.norm()).expect("every point modulus is a level"))
        .collect();

    Ok(Constellation { points, bits_per_symbol: bits, axis_bits, levels, point_level })
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

/// Coordinate for a Gray-coded axis word of `bits` bits.
fn axis_coordinate(word: usize, bits: usize) -> f64 {
    let side = 1usize << bits;
    2.0 * gray_inverse(word) as f64 - (side as f64 - 1.0)
}

/// Nearest axis word to `v`; on an exact tie the smaller word wins.
fn slice_axis(v: f64, bits: usize) -> usize {
    let side = 1usize << bits;
    let t = (v + (side as f64 - 1.0)) / 2.0;
    let lo = (math::floor(t).max(0.0) as usize).min(side - 1);
    if lo + 1 >= side {
        return gray(lo);
    }
    let c_lo = 2.0 * lo as f64 - (side as f64 - 1.0);
    let (d_lo, d_hi) = (math::abs(v - c_lo), math::abs(v - c_lo - 2.0));
    if d_lo < d_hi {
        gray(lo)
    } else if d_hi < d_lo {
        gray(lo + 1)
    } else {
        gray(lo).min(gray(lo + 1))
    }
}

fn level_lookup(levels: &[f64], modulus: f64) -> Option<usize> {
    levels.iter().position(|&a| math::abs(a - modulus) <= LEVEL_TOLERANCE)
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    /// Distinct amplitudes `A_1 < … < A_L`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// L
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn map(&self, word: usize) -> Result<Complex> {
        self.points
            .get(word)
            .copied()
            .ok_or(Error::WordOutOfRange { word, len: self.points.len() })
    }

    /// Level index of the point for `word`.
    pub fn level_of_word(&self, word: usize) -> usize {
        self.point_level[word]
    }

    /// Level index whose amplitude equals `|z|` within [`LEVEL_TOLERANCE`].
    pub fn level_of(&self, z: Complex) -> Option<usize> {
        level_lookup(&self.levels, z.norm())
    }

    /// Minimum-distance decision. Ties go to the smaller bit word.
    pub fn demap(&self, y: Complex) -> usize {
        let (ib, qb) = self.axis_bits;
        let wi = slice_axis(y.re, ib);
        if qb == 0 {
            wi
        } else {
            (wi << qb) | slice_axis(y.im, qb)
        }
    }

    /// Mean of `|s|²` over equiprobable points.
    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sixteen_qam_levels() {
        let c = make_qam(16).unwrap();
        assert_eq!(c.level_count(), 3);
        let expected = [2f64.sqrt(), 10f64.sqrt(), 18f64.sqrt()];
        for (a, e) in c.levels().iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.average_energy(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn qpsk_is_constant_modulus() {
        let c = make_qam(4).unwrap();
        assert_eq!(c.level_count(), 1);
        assert_abs_diff_eq!(c.levels()[0], 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn bpsk() {
        let c = make_qam(2).unwrap();
        assert_eq!(c.points(), &[Complex::new(-1.0, 0.0), Complex::new(1.0, 0.0)]);
        assert_eq!(c.levels(), &[1.0]);
    }

    #[test]
    fn gray_table() {
        let c = make_qam(16).unwrap();
        assert_eq!(c.map(0b0000).unwrap(), Complex::new(-3.0, -3.0));
        // per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
        assert_eq!(c.map(0b0111).unwrap(), Complex::new(-1.0, 1.0));
        assert_eq!(c.map(0b1110).unwrap(), Complex::new(1.0, 3.0));
        assert_eq!(c.map(0b1000).unwrap(), Complex::new(3.0, -3.0));
        assert!(c.map(16).is_err());
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        let c = make_qam(64).unwrap();
        for a in 0..64 {
            for b in 0..64 {
                let d = (c.points()[a] - c.points()[b]).norm();
                if (d - 2.0).abs() < 1e-12 {
                    assert_eq!((a ^ b).count_ones(), 1, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(make_qam(8).is_err());
        assert!(make_qam(32).is_err());
        assert!(make_qam(6).is_err());
        assert!(make_qam(1).is_err());
    }

    #[test]
    fn round_trip_all_words() {
        for order in [2, 4, 16, 64, 256] {
            let c = make_qam(order).unwrap();
            for w in 0..order {
                assert_eq!(c.demap(c.map(w).unwrap()), w);
            }
        }
    }

    #[test]
    fn demap_nearest() {
        let c = make_qam(16).unwrap();
        assert_eq!(c.map(c.demap(Complex::new(0.9, 0.9))).unwrap(), Complex::new(1.0, 1.0));
        assert_eq!(c.map(c.demap(Complex::new(10.0, -7.5))).unwrap(), Complex::new(3.0, -3.0));
        // exact tie between +1 (word 11) and +3 (word 10) on the in-phase axis
        assert_eq!(c.demap(Complex::new(2.0, -3.0)) >> 2, 0b10);
    }

    #[test]
    fn every_point_has_one_level() {
        let c = make_qam(64).unwrap();
        for (w, p) in c.points().iter().enumerate() {
            let matches = c.levels().iter().filter(|a| (p.norm() - **a).abs() <= 1e-9).count();
            assert_eq!(matches, 1);
            assert_eq!(c.level_of(*p), Some(c.level_of_word(w)));
        }
        assert!(c.levels().windows(2).all(|w| w[0] < w[1]));
    }
}
