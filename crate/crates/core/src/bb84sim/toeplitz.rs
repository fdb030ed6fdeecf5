//! Toeplitz hashing over GF(2) for privacy amplification.
//!
//! The matrix layout is fixed so outputs are bit-exact across
//! implementations: for an `s`-bit input, an `l`-bit output, and a seed of
//! exactly `s + l - 1` bits, `T[j][i] = seed[j - i + s - 1]`, and output
//! bit `j` is the GF(2) inner product of row `j` with the input.

use crate::{Error, Result};

/// Hash `input` down to `out_bits` bits. The seed length must be exactly
/// `input.len() + out_bits - 1`.
pub fn toeplitz_hash(input: &[bool], seed: &[bool], out_bits: u32) -> Result<Vec<bool>> {
    if out_bits == 0 {
        return Err(Error::Domain("zero-length hash output".into()));
    }
    let s = input.len();
    let expected = s + out_bits as usize - 1;
    if seed.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: seed.len(),
        });
    }
    let out = (0..out_bits as usize)
        .map(|j| {
            input
                .iter()
                .enumerate()
                .fold(false, |acc, (i, &bit)| acc ^ (bit & seed[j + s - 1 - i]))
        })
        .collect();
    Ok(out)
}

/// Row masks of the Toeplitz matrix for word-sized inputs: bit `i` of mask
/// `j` is `T[j][i]`.
pub(super) fn output_masks(seed: &[bool], s: usize, out_bits: u32) -> Vec<u64> {
    debug_assert!(s <= 64);
    (0..out_bits as usize)
        .map(|j| {
            (0..s).fold(0u64, |acc, i| {
                acc | ((seed[j + s - 1 - i] as u64) << i)
            })
        })
        .collect()
}

/// GF(2) rank of a set of rows, each a bit vector packed into words.
fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let mut rank = 0;
    let words = rows.first().map_or(0, Vec::len);
    for word in 0..words {
        for bit in 0..64 {
            let Some(pivot) = (rank..rows.len())
                .find(|&r| (rows[r][word] >> bit) & 1 == 1)
            else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && (row[word] >> bit) & 1 == 1 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Rank of the realized Toeplitz map as a GF(2) matrix.
pub fn toeplitz_rank(seed: &[bool], s: usize, out_bits: u32) -> usize {
    if s == 0 {
        return 0;
    }
    let words = s.div_ceil(64);
    let rows = (0..out_bits as usize)
        .map(|j| {
            let mut row = vec![0u64; words];
            for i in 0..s {
                if seed[j + s - 1 - i] {
                    row[i / 64] |= 1 << (i % 64);
                }
            }
            row
        })
        .collect();
    gf2_rank(rows)
}

/// A maximal linearly independent subset of word-sized masks, preserving
/// the original mask values.
pub(super) fn independent_subset(masks: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    let mut kept = Vec::new();
    for &mask in masks {
        let mut reduced = mask;
        for &b in &basis {
            let pivot = 1u64 << (63 - b.leading_zeros());
            if reduced & pivot != 0 {
                reduced ^= b;
            }
        }
        if reduced != 0 {
            basis.push(reduced);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            kept.push(mask);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn frozen_small_example() {
        // s = 3, l = 2, seed 1011, input 110. Expected output computed by
        // building T explicitly and multiplying over GF(2):
        //   T[0] = [seed[2], seed[1], seed[0]] = [1, 0, 1]
        //   T[1] = [seed[3], seed[2], seed[1]] = [1, 1, 0]
        // giving output bits [1, 0].
        let out = toeplitz_hash(&bits("110"), &bits("1011"), 2).unwrap();
        assert_eq!(out, bits("10"));
    }

    #[test]
    fn zero_input_hashes_to_zero() {
        let seed = bits("110101");
        let out = toeplitz_hash(&bits("0000"), &seed, 3).unwrap();
        assert_eq!(out, bits("000"));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(toeplitz_hash(&bits("101"), &bits("101"), 2).is_err());
        assert!(toeplitz_hash(&bits("101"), &bits("10110"), 0).is_err());
    }

    #[test]
    fn empty_input_is_allowed() {
        let out = toeplitz_hash(&[], &bits("1"), 2).unwrap();
        assert_eq!(out, bits("00"));
    }

    #[test]
    fn masks_agree_with_direct_hash() {
        let seed = bits("1011001");
        let input = bits("1101");
        let direct = toeplitz_hash(&input, &seed, 4).unwrap();
        let packed = input
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        for (j, mask) in output_masks(&seed, 4, 4).iter().enumerate() {
            assert_eq!((packed & mask).count_ones() % 2 == 1, direct[j]);
        }
    }

    #[test]
    fn rank_of_identity_like_seed() {
        // seed = e_{s-1} makes T the identity on the first l inputs.
        let s = 5;
        let l = 3;
        let mut seed = vec![false; s + l - 1];
        seed[s - 1] = true;
        assert_eq!(toeplitz_rank(&seed, s, l as u32), l);
        assert_eq!(toeplitz_rank(&vec![false; s + l - 1], s, l as u32), 0);
    }

    #[test]
    fn independent_subset_spans_the_same_space() {
        let masks = vec![0b101, 0b011, 0b110, 0b111];
        let indep = independent_subset(&masks);
        assert_eq!(indep.len(), 3);
        let full: Vec<Vec<u64>> = masks.iter().map(|&m| vec![m]).collect();
        let kept: Vec<Vec<u64>> = indep.iter().map(|&m| vec![m]).collect();
        assert_eq!(gf2_rank(full), gf2_rank(kept));
    }

    proptest! {
        #[test]
        fn hash_is_gf2_linear(
            a in proptest::collection::vec(any::<bool>(), 6),
            b in proptest::collection::vec(any::<bool>(), 6),
            seed in proptest::collection::vec(any::<bool>(), 6 + 4 - 1),
        ) {
            let xored: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ha = toeplitz_hash(&a, &seed, 4).unwrap();
            let hb = toeplitz_hash(&b, &seed, 4).unwrap();
            let hx = toeplitz_hash(&xored, &seed, 4).unwrap();
            let combined: Vec<bool> = ha.iter().zip(&hb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(hx, combined);
        }
    }
}
