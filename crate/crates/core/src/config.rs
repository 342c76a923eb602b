//! OFDM-IM system parameters.

use crate::{Error, Result};

/// Largest supported number of index bits per subblock. Keeps the legal
/// pattern table small enough to hold in memory.
pub const MAX_INDEX_BITS: usize = 20;

/// Parameters of an OFDM-IM system and the bit widths they imply.
///
/// `N = n·g` subcarriers are split into `g` subblocks of length `n`, of
/// which `k` are active and carry `M`-ary symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemConfig {
    subcarriers: usize,
    subblock_len: usize,
    active: usize,
    subblocks: usize,
    order: usize,
    index_bits: usize,
    symbol_bits: usize,
}

impl SystemConfig {
    /// Builds a configuration for `subcarriers` (N), `subblock_len` (n),
    /// `active` (k) and constellation `order` (M).
    pub fn new(subcarriers: usize, subblock_len: usize, active: usize, order: usize) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::Param { field: "N", reason: "must be positive" });
        }
        if subblock_len == 0 || !subcarriers.is_multiple_of(subblock_len) {
            return Err(Error::Param { field: "n", reason: "must divide N" });
        }
        if active == 0 || active >= subblock_len {
            return Err(Error::Param { field: "k", reason: "must satisfy 1 <= k < n" });
        }
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::Param { field: "M", reason: "must be a power of two, at least 2" });
        }
        let index_bits = floor_log2(binomial(subblock_len, active));
        if index_bits > MAX_INDEX_BITS {
            return Err(Error::Param { field: "n", reason: "too many activation patterns" });
        }
        Ok(Self {
            subcarriers,
            subblock_len,
            active,
            subblocks: subcarriers / subblock_len,
            order,
            index_bits,
            symbol_bits: active * order.trailing_zeros() as usize,
        })
    }

    /// N
    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    /// n
    pub fn subblock_len(&self) -> usize {
        self.subblock_len
    }

    /// k
    pub fn active_per_subblock(&self) -> usize {
        self.active
    }

    /// g
    pub fn subblocks(&self) -> usize {
        self.subblocks
    }

    /// M
    pub fn order(&self) -> usize {
        self.order
    }

    /// log2 M
    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// p1 = floor(log2 C(n, k))
    pub fn index_bits(&self) -> usize {
        self.index_bits
    }

    /// p2 = k log2 M
    pub fn symbol_bits(&self) -> usize {
        self.symbol_bits
    }

    /// p = p1 + p2
    pub fn subblock_bits(&self) -> usize {
        self.index_bits + self.symbol_bits
    }

    /// m = p g
    pub fn block_bits(&self) -> usize {
        self.subblock_bits() * self.subblocks
    }

    /// K = k g
    pub fn active_total(&self) -> usize {
        self.active * self.subblocks
    }

    /// N - K
    pub fn idle_total(&self) -> usize {
        self.subcarriers - self.active_total()
    }

    /// Subblock that owns subcarrier `index` (0-based).
    pub fn subblock_of(&self, index: usize) -> usize {
        index / self.subblock_len
    }
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn floor_log2(v: u128) -> usize {
    debug_assert!(v > 0);
    127 - v.leading_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_configuration() {
        let cfg = SystemConfig::new(128, 4, 2, 16).unwrap();
        assert_eq!(cfg.subblocks(), 32);
        assert_eq!(cfg.index_bits(), 2);
        assert_eq!(cfg.symbol_bits(), 8);
        assert_eq!(cfg.subblock_bits(), 10);
        assert_eq!(cfg.block_bits(), 320);
        assert_eq!(cfg.active_total(), 64);
        assert_eq!(cfg.idle_total(), 64);
    }

    #[test]
    fn small_configuration() {
        let cfg = SystemConfig::new(8, 4, 2, 4).unwrap();
        assert_eq!((cfg.subblocks(), cfg.index_bits(), cfg.symbol_bits(), cfg.block_bits()), (2, 2, 4, 12));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(SystemConfig::new(12, 5, 2, 4), Err(Error::Param { field: "n", .. })));
        assert!(matches!(SystemConfig::new(8, 4, 4, 4), Err(Error::Param { field: "k", .. })));
        assert!(matches!(SystemConfig::new(8, 4, 0, 4), Err(Error::Param { field: "k", .. })));
        assert!(matches!(SystemConfig::new(8, 4, 2, 12), Err(Error::Param { field: "M", .. })));
        assert!(matches!(SystemConfig::new(0, 4, 2, 4), Err(Error::Param { field: "N", .. })));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(2, 1), 2);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
    }
}
