//! Helpers for bit vectors stored one bit per byte (`0` or `1`), most
//! significant bit first.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Reads `bits` as an unsigned integer, most significant bit first.
pub fn to_word(bits: &[u8]) -> Result<usize> {
    bits.iter().try_fold(0usize, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as usize),
        other => Err(Error::InvalidBit(other)),
    })
}

/// Appends the `width` low bits of `word`, most significant first.
pub fn push_word(out: &mut Vec<u8>, word: usize, width: usize) {
    for shift in (0..width).rev() {
        out.push(((word >> shift) & 1) as u8);
    }
}

pub fn from_word(word: usize, width: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(width);
    push_word(&mut out, word, width);
    out
}

/// Number of positions where the two slices differ.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
