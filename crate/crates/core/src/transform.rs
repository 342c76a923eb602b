//! Unitary DFT/IDFT.
//!
//! Both directions are scaled by `1/√N`, so `‖F^H X‖₂ = ‖X‖₂`. Power-of-two
//! lengths use an iterative radix-2 transform; other lengths fall back to
//! the direct O(N²) sum over a precomputed twiddle table.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{math, Complex, Error, FrequencyBlock, Result, TimeSignal};

/// Precomputed transform of a fixed length.
#[derive(Debug, Clone)]
pub struct Dft {
    n: usize,
    /// `e^{-2πi j/n}` for `j < n`.
    twiddles: Vec<Complex>,
    bit_reverse: Option<Vec<usize>>,
    scale: f64,
}

impl Dft {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Param { field: "N", reason: "transform length must be positive" });
        }
        let twiddles = (0..n)
            .map(|j| {
                let (s, c) = math::sin_cos(-2.0 * PI * j as f64 / n as f64);
                Complex::new(c, s)
            })
            .collect();
        let bit_reverse = n.is_power_of_two().then(|| {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        });
        Ok(Self { n, twiddles, bit_reverse, scale: 1.0 / math::sqrt(n as f64) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::Length { expected: self.n, actual: len })
        }
    }

    /// In-place unitary forward transform, `X = F x`.
    pub fn forward_in_place(&self, buf: &mut [Complex]) -> Result<()> {
        self.check(buf.len())?;
        self.raw_forward(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
        Ok(())
    }

    /// In-place unitary inverse transform, `x = F^H X`.
    pub fn inverse_in_place(&self, buf: &mut [Complex]) -> Result<()> {
        self.check(buf.len())?;
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.raw_forward(buf);
        for v in buf.iter_mut() {
            *v = v.conj() * self.scale;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    pub fn inverse(&self, spectrum: &[Complex]) -> Result<Vec<Complex>> {
        let mut buf = spectrum.to_vec();
        self.inverse_in_place(&mut buf)?;
        Ok(buf)
    }

    /// `x = F^H X` for a raw length-N spectrum.
    pub fn idft(&self, spectrum: &[Complex]) -> Result<TimeSignal> {
        self.inverse(spectrum).map(TimeSignal::new)
    }

    /// Time-domain signal of an assembled block.
    pub fn idft_block(&self, block: &FrequencyBlock) -> Result<TimeSignal> {
        self.idft(block.values())
    }

    pub fn dft(&self, x: &TimeSignal) -> Result<Vec<Complex>> {
        self.forward(x.samples())
    }

    /// `F_{U'}^H c`: the time signal produced by `coeffs` placed on
    /// subcarriers `indices` (0-based, distinct) and zero elsewhere.
    pub fn synthesize(&self, indices: &[usize], coeffs: &[Complex]) -> Result<TimeSignal> {
        if indices.len() != coeffs.len() {
            return Err(Error::Length { expected: indices.len(), actual: coeffs.len() });
        }
        let mut buf = alloc::vec![Complex::new(0.0, 0.0); self.n];
        let mut seen = alloc::vec![false; self.n];
        for (&i, &c) in indices.iter().zip(coeffs) {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, len: self.n });
            }
            if core::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
            buf[i] = c;
        }
        self.inverse_in_place(&mut buf)?;
        Ok(TimeSignal::new(buf))
    }

    /// Unscaled `Σ x_j e^{-2πi jk/n}`.
    fn raw_forward(&self, buf: &mut [Complex]) {
        match &self.bit_reverse {
            Some(rev) => self.radix2(buf, rev),
            None => self.direct(buf),
        }
    }

    fn radix2(&self, buf: &mut [Complex], rev: &[usize]) {
        let n = self.n;
        for (i, &j) in rev.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn direct(&self, buf: &mut [Complex]) {
        let n = self.n;
        let input = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            *out = input
                .iter()
                .enumerate()
                .map(|(j, &x)| x * self.twiddles[(j * k) % n])
                .sum();
        }
    }
}

/// Unitary IDFT of a length-N spectrum.
pub fn idft(spectrum: &[Complex]) -> Result<TimeSignal> {
    Dft::new(spectrum.len())?.idft(spectrum)
}

/// Unitary DFT of a time signal.
pub fn dft(x: &TimeSignal) -> Result<Vec<Complex>> {
    Dft::new(x.len())?.dft(x)
}

/// Peak power of the `factor`-times oversampled time signal.
///
/// The spectrum is zero padded in the middle (negative frequencies stay at
/// the end) and scaled so that every `factor`-th output sample equals the
/// Nyquist-rate sample; `factor = 1` gives `‖F^H X‖∞²`.
pub fn oversampled_peak(spectrum: &[Complex], factor: usize) -> Result<f64> {
    if factor == 0 {
        return Err(Error::Param { field: "J", reason: "oversampling factor must be at least 1" });
    }
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let total = n * factor;
    let front = n.div_ceil(2);
    let mut padded = alloc::vec![Complex::new(0.0, 0.0); total];
    padded[..front].copy_from_slice(&spectrum[..front]);
    padded[total - (n - front)..].copy_from_slice(&spectrum[front..]);
    let plan = Dft::new(total)?;
    plan.inverse_in_place(&mut padded)?;
    let gain = factor as f64;
    Ok(crate::signal::peak_power(&padded) * gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense `F^H X` straight from the matrix definition.
    fn dense_idft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|t| {
                x.iter()
                    .enumerate()
                    .map(|(k, &v)| v * Complex::from_polar(1.0, 2.0 * PI * (k * t) as f64 / n as f64))
                    .sum::<Complex>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<Complex> {
        (0..n).map(|_| Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()
    }

    fn max_err(a: &[Complex], b: &[Complex]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 2, 3, 5, 8, 12, 16, 64, 128] {
            let plan = Dft::new(n).unwrap();
            for _ in 0..10 {
                let x = random_vec(&mut rng, n);
                assert!(max_err(&plan.inverse(&x).unwrap(), &dense_idft(&x)) < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn single_tone_and_impulse() {
        let n = 16;
        let plan = Dft::new(n).unwrap();
        let mut tone = vec![Complex::new(0.0, 0.0); n];
        tone[1] = Complex::new((n as f64).sqrt(), 0.0);
        for s in plan.idft(&tone).unwrap().samples() {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
        let ones = vec![Complex::new(1.0, 0.0); n];
        let x = plan.idft(&ones).unwrap();
        assert_abs_diff_eq!(x.samples()[0].re, 4.0, epsilon = 1e-12);
        assert!(x.samples()[1..].iter().all(|s| s.norm() < 1e-12));
        let back = plan.forward(&ones).unwrap();
        assert_abs_diff_eq!(back[0].re, 4.0, epsilon = 1e-12);
        assert!(back[1..].iter().all(|s| s.norm() < 1e-12));
    }

    #[test]
    fn length_mismatch() {
        let plan = Dft::new(8).unwrap();
        assert_eq!(plan.inverse(&[Complex::new(0.0, 0.0); 4]), Err(Error::Length { expected: 8, actual: 4 }));
        assert!(Dft::new(0).is_err());
    }

    #[test]
    fn synthesize_single_index() {
        let plan = Dft::new(32).unwrap();
        let c = Complex::new(3.0, -4.0);
        let x = plan.synthesize(&[5], &[c]).unwrap();
        for s in x.samples() {
            assert_abs_diff_eq!(s.norm(), 5.0 / 32f64.sqrt(), epsilon = 1e-12);
        }
        let zero = plan.synthesize(&[1, 2], &[Complex::new(0.0, 0.0); 2]).unwrap();
        assert!(zero.samples().iter().all(|s| *s == Complex::new(0.0, 0.0)));
    }

    #[test]
    fn synthesize_rejects_bad_indices() {
        let plan = Dft::new(8).unwrap();
        let c = [Complex::new(1.0, 0.0); 2];
        assert_eq!(plan.synthesize(&[1, 1], &c), Err(Error::DuplicateIndex(1)));
        assert_eq!(plan.synthesize(&[1, 8], &c), Err(Error::IndexOutOfRange { index: 8, len: 8 }));
    }

    #[test]
    fn synthesize_matches_padded_idft() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = Dft::new(64).unwrap();
        for _ in 0..100 {
            let count = rng.random_range(1..20);
            let mut idx: Vec<usize> = (0..64).collect();
            for i in 0..count {
                let j = rng.random_range(i..64);
                idx.swap(i, j);
            }
            idx.truncate(count);
            let coeffs = random_vec(&mut rng, count);
            let mut dense = vec![Complex::new(0.0, 0.0); 64];
            for (&i, &c) in idx.iter().zip(&coeffs) {
                dense[i] = c;
            }
            let a = plan.synthesize(&idx, &coeffs).unwrap();
            assert!(max_err(a.samples(), &dense_idft(&dense)) < 1e-12);
        }
    }

    #[test]
    fn oversampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 32;
        for _ in 0..100 {
            let x = random_vec(&mut rng, n);
            let p1 = oversampled_peak(&x, 1).unwrap();
            assert_abs_diff_eq!(p1, idft(&x).unwrap().peak_power(), epsilon = 1e-9);
            let p2 = oversampled_peak(&x, 2).unwrap();
            let p4 = oversampled_peak(&x, 4).unwrap();
            assert!(p2 >= p1 - 1e-9 && p4 >= p2 - 1e-9);
        }
        let mut tone = vec![Complex::new(0.0, 0.0); n];
        tone[3] = Complex::new(2.0, 1.0);
        let base = oversampled_peak(&tone, 1).unwrap();
        for j in [2, 3, 4, 8] {
            assert_abs_diff_eq!(oversampled_peak(&tone, j).unwrap(), base, epsilon = 1e-9);
        }
        assert!(oversampled_peak(&tone, 0).is_err());
    }
}
