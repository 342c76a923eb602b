//! Frequency-domain blocks and time-domain signals.

use alloc::vec::Vec;

use crate::{Complex, Error, Result};

/// A length-N frequency-domain OFDM-IM block and its activation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlock {
    values: Vec<Complex>,
    active: Vec<bool>,
}

impl FrequencyBlock {
    pub fn new(values: Vec<Complex>, active: Vec<bool>) -> Result<Self> {
        if values.len() != active.len() {
            return Err(Error::Length { expected: values.len(), actual: active.len() });
        }
        Ok(Self { values, active })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn activation(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Indices of the idle subcarriers, ascending.
    pub fn idle_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.active[i]).collect()
    }

    /// Block with `dither[i]` added on every idle subcarrier `i`.
    ///
    /// `dither` is indexed by subcarrier; entries on active subcarriers
    /// are ignored, so active values are carried over bit for bit.
    pub fn with_dither(&self, dither: &[Complex]) -> Result<Self> {
        if dither.len() != self.len() {
            return Err(Error::Length { expected: self.len(), actual: dither.len() });
        }
        let values = self
            .values
            .iter()
            .zip(&self.active)
            .zip(dither)
            .map(|((&v, &a), &d)| if a { v } else { v + d })
            .collect();
        Ok(Self { values, active: self.active.clone() })
    }

    pub fn energy(&self) -> f64 {
        energy(&self.values)
    }
}

/// Length-N time-domain samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    samples: Vec<Complex>,
}

impl TimeSignal {
    pub fn new(samples: Vec<Complex>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `‖x‖₂²`
    pub fn energy(&self) -> f64 {
        energy(&self.samples)
    }

    /// `‖x‖∞²`
    pub fn peak_power(&self) -> f64 {
        peak_power(&self.samples)
    }
}

impl From<Vec<Complex>> for TimeSignal {
    fn from(samples: Vec<Complex>) -> Self {
        Self { samples }
    }
}

pub(crate) fn energy(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn peak_power(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
}
