//! Index mapping: activation-pattern tables and block assembly.
//!
//! Subcarrier indices are 0-based throughout the crate. The legal pattern
//! table for `(n, k)` is the first `2^p1` k-subsets of `{0, …, n−1}` in
//! lexicographic order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::{bits, Complex, Constellation, Error, FrequencyBlock, Result, SystemConfig};

/// Sorted set of the `k` active positions inside a subblock.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActivationPattern {
    indices: Vec<usize>,
}

impl ActivationPattern {
    /// Builds a pattern from strictly increasing positions below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::DuplicateIndex(w[1]));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, &i| m | (1 << i))
    }
}

/// Ordered table of the `2^p1` activation patterns usable for `(n, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegalPatternSet {
    n: usize,
    k: usize,
    patterns: Vec<ActivationPattern>,
    rank: BTreeMap<u64, usize>,
}

/// Builds the legal pattern table: the first `2^floor(log2 C(n,k))`
/// k-subsets of `{0, …, n−1}` in lexicographic order.
pub fn build_legal_set(n: usize, k: usize) -> Result<LegalPatternSet> {
    if k == 0 || k >= n {
        return Err(Error::Param { field: "k", reason: "must satisfy 1 <= k < n" });
    }
    if n > 64 {
        return Err(Error::Param { field: "n", reason: "subblocks longer than 64 are not supported" });
    }
    let count = crate::config::binomial(n, k);
    let p1 = 127 - count.leading_zeros() as usize;
    if p1 > crate::config::MAX_INDEX_BITS {
        return Err(Error::Param { field: "n", reason: "too many activation patterns" });
    }
    let wanted = 1usize << p1;

    let mut patterns = Vec::with_capacity(wanted);
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        patterns.push(ActivationPattern { indices: current.clone() });
        if patterns.len() == wanted {
            break;
        }
        // advance to the next combination in lexicographic order
        let mut i = k;
        while i > 0 && current[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        debug_assert!(i > 0, "ran out of combinations before 2^p1");
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
    let rank = patterns.iter().enumerate().map(|(j, p)| (p.mask(), j)).collect();
    Ok(LegalPatternSet { n, k, patterns, rank })
}

impl LegalPatternSet {
    pub fn subblock_len(&self) -> usize {
        self.n
    }

    pub fn active(&self) -> usize {
        self.k
    }

    pub fn patterns(&self) -> &[ActivationPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn bits_to_pattern(&self, word: usize) -> Result<&ActivationPattern> {
        self.patterns
            .get(word)
            .ok_or(Error::WordOutOfRange { word, len: self.patterns.len() })
    }

    /// Rank of `pattern` in the table, `None` when it is not legal.
    pub fn pattern_to_bits(&self, pattern: &ActivationPattern) -> Option<usize> {
        self.rank_of_mask(pattern.mask())
    }

    pub fn rank_of_mask(&self, mask: u64) -> Option<usize> {
        self.rank.get(&mask).copied()
    }
}

/// Assembles the frequency-domain block for `bits` (exactly `m` of them).
///
/// Per subblock the first `p1` bits pick the activation pattern and the
/// next `p2` bits fill the active positions with symbols in ascending
/// index order. Idle entries are exactly zero.
pub fn modulate_block(
    bits: &[u8],
    cfg: &SystemConfig,
    cons: &Constellation,
    set: &LegalPatternSet,
) -> Result<FrequencyBlock> {
    if bits.len() != cfg.block_bits() {
        return Err(Error::Length { expected: cfg.block_bits(), actual: bits.len() });
    }
    let n = cfg.subblock_len();
    let bps = cfg.bits_per_symbol();
    let mut values = alloc::vec![Complex::new(0.0, 0.0); cfg.subcarriers()];
    let mut active = alloc::vec![false; cfg.subcarriers()];

    for (beta, chunk) in bits.chunks_exact(cfg.subblock_bits()).enumerate() {
        let (index_bits, symbol_bits) = chunk.split_at(cfg.index_bits());
        let pattern = set.bits_to_pattern(bits::to_word(index_bits)?)?;
        for (&pos, sym) in pattern.indices().iter().zip(symbol_bits.chunks_exact(bps)) {
            let slot = beta * n + pos;
            values[slot] = cons.map(bits::to_word(sym)?)?;
            active[slot] = true;
        }
    }
    FrequencyBlock::new(values, active)
}

/// Recovers the bits of a block from its activation mask and exact symbol
/// values (genie disassembly, no noise).
pub fn disassemble_block(
    block: &FrequencyBlock,
    cfg: &SystemConfig,
    cons: &Constellation,
    set: &LegalPatternSet,
) -> Result<Vec<u8>> {
    if block.len() != cfg.subcarriers() {
        return Err(Error::Length { expected: cfg.subcarriers(), actual: block.len() });
    }
    let n = cfg.subblock_len();
    let mut out = Vec::with_capacity(cfg.block_bits());
    for beta in 0..cfg.subblocks() {
        let range = beta * n..(beta + 1) * n;
        let mask = block.activation()[range.clone()]
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &a)| if a { m | (1 << i) } else { m });
        let word = set
            .rank_of_mask(mask)
            .ok_or(Error::Param { field: "block", reason: "activation mask is not a legal pattern" })?;
        bits::push_word(&mut out, word, cfg.index_bits());
        for i in range.filter(|&i| block.is_active(i)) {
            bits::push_word(&mut out, cons.demap(block.values()[i]), cfg.bits_per_symbol());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::make_qam;

    /// All k-subsets of {0..n-1}, generated by filtering bitmasks and sorted
    /// lexicographically on their index lists.
    fn brute_force_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
            .collect();
        all.sort();
        all
    }

    fn table(set: &LegalPatternSet) -> Vec<Vec<usize>> {
        set.patterns().iter().map(|p| p.indices().to_vec()).collect()
    }

    #[test]
    fn four_choose_two() {
        let set = build_legal_set(4, 2).unwrap();
        assert_eq!(table(&set), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]]);
        assert_eq!(set.bits_to_pattern(0b00).unwrap().indices(), &[0, 1]);
        assert_eq!(set.bits_to_pattern(0b11).unwrap().indices(), &[1, 2]);
        assert!(set.bits_to_pattern(4).is_err());
    }

    #[test]
    fn small_tables() {
        assert_eq!(table(&build_legal_set(2, 1).unwrap()), vec![vec![0], vec![1]]);
        // C(4,3) = 4, so p1 = 2 and every 3-subset is legal
        assert_eq!(table(&build_legal_set(4, 3).unwrap()), vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
        assert_eq!(table(&build_legal_set(5, 3).unwrap()), vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4], vec![0, 2, 3], vec![0, 2, 4], vec![0, 3, 4], vec![1, 2, 3], vec![1, 2, 4]]);
    }

    #[test]
    fn matches_brute_force_prefix() {
        for n in 2..=10 {
            for k in 1..n {
                let set = build_legal_set(n, k).unwrap();
                let all = brute_force_subsets(n, k);
                assert!(set.len().is_power_of_two());
                assert!(set.len() <= all.len() && 2 * set.len() > all.len());
                assert_eq!(table(&set), all[..set.len()].to_vec());
                for (j, p) in set.patterns().iter().enumerate() {
                    assert_eq!(set.pattern_to_bits(p), Some(j));
                }
            }
        }
    }

    #[test]
    fn illegal_pattern_has_no_rank() {
        let set = build_legal_set(4, 2).unwrap();
        let p = ActivationPattern::new(vec![1, 3], 4).unwrap();
        assert_eq!(set.pattern_to_bits(&p), None);
        assert!(ActivationPattern::new(vec![3, 1], 4).is_err());
        assert!(ActivationPattern::new(vec![1, 4], 4).is_err());
    }

    #[test]
    fn all_zero_block() {
        let cfg = SystemConfig::new(8, 4, 2, 4).unwrap();
        let cons = make_qam(4).unwrap();
        let set = build_legal_set(4, 2).unwrap();
        let block = modulate_block(&[0; 12], &cfg, &cons, &set).unwrap();
        let s = cons.map(0).unwrap();
        let z = Complex::new(0.0, 0.0);
        assert_eq!(block.values(), &[s, s, z, z, s, s, z, z]);
        assert_eq!(block.activation(), &[true, true, false, false, true, true, false, false]);
    }

    #[test]
    fn wrong_length_rejected() {
        let cfg = SystemConfig::new(8, 4, 2, 4).unwrap();
        let cons = make_qam(4).unwrap();
        let set = build_legal_set(4, 2).unwrap();
        assert_eq!(
            modulate_block(&[0; 11], &cfg, &cons, &set),
            Err(Error::Length { expected: 12, actual: 11 })
        );
    }

    #[test]
    fn exhaustive_small_round_trip() {
        let cfg = SystemConfig::new(8, 4, 2, 4).unwrap();
        let cons = make_qam(4).unwrap();
        let set = build_legal_set(4, 2).unwrap();
        for w in 0..(1 << cfg.block_bits()) {
            let b = bits::from_word(w, cfg.block_bits());
            let block = modulate_block(&b, &cfg, &cons, &set).unwrap();
            assert_eq!(block.active_count(), cfg.active_total());
            assert_eq!(disassemble_block(&block, &cfg, &cons, &set).unwrap(), b);
        }
    }
}
