//! Float functions that work with and without `std`.

use num_traits::Float;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    Float::ln(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    Float::exp(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    Float::log10(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    Float::powf(x, y)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    Float::sin_cos(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    Float::abs(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    Float::floor(x)
}
