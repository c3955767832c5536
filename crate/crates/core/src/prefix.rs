//! Canonical Huffman codes.
//!
//! Code lengths come from a deterministic Huffman merge (ties go to the lower
//! symbol index, internal nodes rank after all leaves in creation order), and
//! codewords are then assigned canonically by `(length, symbol index)`. The
//! decoder only needs the lengths, so a codebook file that stores lengths and
//! bits can be checked for consistency on load.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::bitio::{BitError, BitReader, Codeword};

pub const MAX_CODE_LENGTH: u8 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("symbol {0} has zero frequency")]
    ZeroFrequency(usize),
    #[error("code length {0} exceeds {MAX_CODE_LENGTH} bits")]
    TooLong(usize),
    #[error("code lengths violate the Kraft inequality")]
    Oversubscribed,
    #[error("invalid code length 0 for symbol {0}")]
    ZeroLength(usize),
    #[error("bit sequence is not a codeword")]
    InvalidCode,
    #[error(transparent)]
    Bits(#[from] BitError),
}

/// Huffman code lengths for `freqs`. A single symbol gets one 1-bit code.
pub fn huffman_lengths(freqs: &[u64]) -> Result<Vec<u8>, PrefixError> {
    if let Some(i) = freqs.iter().position(|&f| f == 0) {
        return Err(PrefixError::ZeroFrequency(i));
    }
    let n = freqs.len();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![1]),
        _ => {}
    }

    // Node ids: 0..n are leaves, n.. are internal nodes in creation order.
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        freqs.iter().enumerate().map(|(i, &f)| Reverse((f, i))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().expect("len > 1");
        let Reverse((fb, b)) = heap.pop().expect("len > 1");
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((fa.saturating_add(fb), next)));
        next += 1;
    }

    // Parents always have larger ids, so walk ids downward from the root.
    let root = next - 1;
    let mut depth = vec![0usize; 2 * n - 1];
    for id in (0..root).rev() {
        depth[id] = depth[parent[id]] + 1;
    }
    depth[..n]
        .iter()
        .map(|&d| {
            if d > MAX_CODE_LENGTH as usize {
                Err(PrefixError::TooLong(d))
            } else {
                Ok(d as u8)
            }
        })
        .collect()
}

/// Assigns canonical codewords: shorter codes first, ties by symbol index.
pub fn canonical_codewords(lengths: &[u8]) -> Result<Vec<Codeword>, PrefixError> {
    for (i, &l) in lengths.iter().enumerate() {
        if l == 0 {
            return Err(PrefixError::ZeroLength(i));
        }
        if l > MAX_CODE_LENGTH {
            return Err(PrefixError::TooLong(l as usize));
        }
    }
    if kraft_sum(lengths) > 1.0 + 1e-12 {
        return Err(PrefixError::Oversubscribed);
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| (lengths[i], i));

    let mut out = vec![Codeword { bits: 0, length: 1 }; lengths.len()];
    let mut code: u128 = 0;
    let mut prev_len = 0u8;
    for (rank, &sym) in order.iter().enumerate() {
        let len = lengths[sym];
        if rank > 0 {
            code += 1;
        }
        code <<= len - prev_len;
        prev_len = len;
        if code >> len != 0 {
            return Err(PrefixError::Oversubscribed);
        }
        out[sym] = Codeword {
            bits: code as u64,
            length: len,
        };
    }
    Ok(out)
}

pub fn kraft_sum(lengths: &[u8]) -> f64 {
    lengths.iter().map(|&l| (-(l as f64)).exp2()).sum()
}

/// Sort-based prefix-freeness check: if any codeword prefixes another, it
/// prefixes its lexicographic successor.
pub fn is_prefix_free(codes: &[Codeword]) -> bool {
    let mut sorted: Vec<(u128, u8)> = codes
        .iter()
        .map(|c| ((c.bits as u128) << (128 - c.length as u32), c.length))
        .collect();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| {
        let (a, la) = w[0];
        let (b, _) = w[1];
        let mask = !0u128 << (128 - la as u32);
        a & mask != b & mask
    })
}

/// Table-driven decoder for a canonical code.
#[derive(Debug, Clone)]
pub struct PrefixDecoder {
    /// Per length `L` (index L): first canonical code of that length and the
    /// offset of its symbol within `symbols`.
    first: Vec<u64>,
    count: Vec<u64>,
    offset: Vec<usize>,
    symbols: Vec<usize>,
    max_len: u8,
}

impl PrefixDecoder {
    pub fn from_lengths(lengths: &[u8]) -> Result<Self, PrefixError> {
        let codes = canonical_codewords(lengths)?;
        let max_len = lengths.iter().copied().max().unwrap_or(0);
        let mut order: Vec<usize> = (0..lengths.len()).collect();
        order.sort_by_key(|&i| (lengths[i], i));

        let slots = max_len as usize + 1;
        let mut first = vec![0u64; slots];
        let mut count = vec![0u64; slots];
        let mut offset = vec![0usize; slots];
        for (pos, &sym) in order.iter().enumerate() {
            let l = lengths[sym] as usize;
            if count[l] == 0 {
                first[l] = codes[sym].bits;
                offset[l] = pos;
            }
            count[l] += 1;
        }
        Ok(PrefixDecoder {
            first,
            count,
            offset,
            symbols: order,
            max_len,
        })
    }

    pub fn decode(&self, reader: &mut BitReader<'_>) -> Result<usize, PrefixError> {
        let mut code = 0u64;
        for len in 1..=self.max_len as usize {
            code = (code << 1) | reader.read_bit()? as u64;
            let n = self.count[len];
            if n > 0 && code >= self.first[len] && code - self.first[len] < n {
                return Ok(self.symbols[self.offset[len] + (code - self.first[len]) as usize]);
            }
        }
        Err(PrefixError::InvalidCode)
    }
}

/// Shannon entropy (bits) of the empirical distribution given by `freqs`.
pub fn frequency_entropy(freqs: &[u64]) -> f64 {
    let total: f64 = freqs.iter().map(|&f| f as f64).sum();
    if total == 0.0 {
        return 0.0;
    }
    freqs
        .iter()
        .filter(|&&f| f > 0)
        .map(|&f| {
            let p = f as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Mean code length under `freqs`.
pub fn expected_length(freqs: &[u64], lengths: &[u8]) -> f64 {
    let total: f64 = freqs.iter().map(|&f| f as f64).sum();
    if total == 0.0 {
        return 0.0;
    }
    freqs
        .iter()
        .zip(lengths)
        .map(|(&f, &l)| f as f64 * l as f64)
        .sum::<f64>()
        / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitio::BitStream;
    use proptest::prelude::*;

    /// Reference Huffman: repeatedly merge the two lightest groups, adding one
    /// bit to every member. Cost is O(n^2) which is fine for tests.
    fn oracle_lengths(freqs: &[u64]) -> Vec<u8> {
        if freqs.len() == 1 {
            return vec![1];
        }
        let mut groups: Vec<(u64, Vec<usize>)> =
            freqs.iter().enumerate().map(|(i, &f)| (f, vec![i])).collect();
        let mut lens = vec![0u8; freqs.len()];
        while groups.len() > 1 {
            groups.sort_by_key(|g| g.0);
            let (fa, a) = groups.remove(0);
            let (fb, b) = groups.remove(0);
            for &s in a.iter().chain(&b) {
                lens[s] += 1;
            }
            groups.push((fa + fb, a.into_iter().chain(b).collect()));
        }
        lens
    }

    fn cost(freqs: &[u64], lens: &[u8]) -> u64 {
        freqs.iter().zip(lens).map(|(&f, &l)| f * l as u64).sum()
    }

    fn all_pairs_prefix_free(codes: &[Codeword]) -> bool {
        for (i, a) in codes.iter().enumerate() {
            for (j, b) in codes.iter().enumerate() {
                if i != j && a.is_prefix_of(b) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn dyadic_frequencies() {
        let lens = huffman_lengths(&[8, 4, 2, 2]).unwrap();
        assert_eq!(lens, vec![1, 2, 3, 3]);
        assert_eq!(lens, oracle_lengths(&[8, 4, 2, 2]));
        assert_eq!(kraft_sum(&lens), 1.0);
        let codes = canonical_codewords(&lens).unwrap();
        let strs: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        assert_eq!(strs, ["0", "10", "110", "111"]);
    }

    #[test]
    fn two_and_one_symbols() {
        assert_eq!(huffman_lengths(&[1000, 1]).unwrap(), vec![1, 1]);
        assert_eq!(huffman_lengths(&[7]).unwrap(), vec![1]);
        assert!(huffman_lengths(&[]).unwrap().is_empty());
        assert_eq!(huffman_lengths(&[3, 0]), Err(PrefixError::ZeroFrequency(1)));
    }

    #[test]
    fn uniform_power_of_two() {
        for m in 1..=6u32 {
            let freqs = vec![5u64; 1 << m];
            let lens = huffman_lengths(&freqs).unwrap();
            assert!(lens.iter().all(|&l| l as u32 == m));
            assert_eq!(lens, oracle_lengths(&freqs));
        }
    }

    #[test]
    fn oversubscribed_lengths_rejected() {
        assert_eq!(
            canonical_codewords(&[1, 1, 1]),
            Err(PrefixError::Oversubscribed)
        );
    }

    #[test]
    fn incomplete_code_reports_invalid() {
        let dec = PrefixDecoder::from_lengths(&[1]).unwrap();
        let mut s = BitStream::new();
        s.write_bits(0b01, 2).unwrap();
        let mut r = s.reader();
        assert_eq!(dec.decode(&mut r).unwrap(), 0);
        assert_eq!(dec.decode(&mut r), Err(PrefixError::InvalidCode));
    }

    proptest! {
        #[test]
        fn huffman_matches_oracle_cost(freqs in prop::collection::vec(1u64..1000, 1..60)) {
            let lens = huffman_lengths(&freqs).unwrap();
            let reference = oracle_lengths(&freqs);
            prop_assert_eq!(cost(&freqs, &lens), cost(&freqs, &reference));
            let k = kraft_sum(&lens);
            prop_assert!(k <= 1.0 + 1e-12);
            if freqs.len() >= 2 {
                prop_assert!((k - 1.0).abs() < 1e-12);
            }
            let h = frequency_entropy(&freqs);
            let el = expected_length(&freqs, &lens);
            prop_assert!(el <= h + 1.0 + 1e-9);
            if freqs.len() >= 2 {
                prop_assert!(el >= h - 1e-9);
            }
        }

        #[test]
        fn canonical_codes_decode(freqs in prop::collection::vec(1u64..500, 1..40),
                                  msg in prop::collection::vec(0usize..1000, 0..200)) {
            let lens = huffman_lengths(&freqs).unwrap();
            let codes = canonical_codewords(&lens).unwrap();
            prop_assert!(all_pairs_prefix_free(&codes));
            prop_assert!(is_prefix_free(&codes));
            let msg: Vec<usize> = msg.into_iter().map(|m| m % freqs.len()).collect();
            let mut s = BitStream::new();
            for &m in &msg {
                s.write_codeword(codes[m]);
            }
            let dec = PrefixDecoder::from_lengths(&lens).unwrap();
            let mut r = s.reader();
            for &m in &msg {
                prop_assert_eq!(dec.decode(&mut r).unwrap(), m);
            }
            prop_assert_eq!(r.remaining(), 0);
        }

        #[test]
        fn sorted_check_agrees_with_pairs(raw in prop::collection::vec((0u64..64, 1u8..7), 1..12)) {
            let codes: Vec<Codeword> = raw
                .into_iter()
                .map(|(b, l)| Codeword { bits: b & ((1 << l) - 1), length: l })
                .collect();
            prop_assert_eq!(is_prefix_free(&codes), all_pairs_prefix_free(&codes));
        }
    }
}
