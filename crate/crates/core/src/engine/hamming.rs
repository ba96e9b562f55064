// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Hamming ordering of N-spin nuclear basis states.
//!
//! States are bit patterns `s_1 s_2 ... s_N`, read as a binary number with
//! `s_1` the most significant digit. A set bit marks a spin in the `+1/2`
//! projection. Indices run `1..=2^N`: states are sorted by Hamming weight,
//! ties broken by ascending binary value, so `|00> -> 1`, `|01> -> 2`,
//! `|10> -> 3`, `|11> -> 4`.

use super::EngineError;

/// Largest spin count for which lookup tables are built.
pub const MAX_TABLE_SPINS: usize = 24;

/// Bidirectional lookup between binary codes and Hamming indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HammingOrder {
    n_spins: usize,
    /// `index_of[code]` is the 1-based Hamming index of `code`.
    index_of: Vec<usize>,
    /// `code_of[n - 1]` is the binary code of Hamming index `n`.
    code_of: Vec<u32>,
}

impl HammingOrder {
    pub fn new(n_spins: usize) -> Result<Self, EngineError> {
        if n_spins == 0 || n_spins > MAX_TABLE_SPINS {
            return Err(EngineError::TooManySpins(n_spins));
        }
        let size = 1usize << n_spins;
        let mut code_of: Vec<u32> = (0..size as u32).collect();
        code_of.sort_by_key(|&c| (c.count_ones(), c));
        let mut index_of = vec![0; size];
        for (i, &c) in code_of.iter().enumerate() {
            index_of[c as usize] = i + 1;
        }
        Ok(Self {
            n_spins,
            index_of,
            code_of,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn n_states(&self) -> usize {
        self.code_of.len()
    }

    /// 1-based Hamming index of a binary code.
    pub fn index(&self, code: u32) -> usize {
        self.index_of[code as usize]
    }

    /// Binary code of a 1-based Hamming index.
    pub fn code(&self, index: usize) -> u32 {
        self.code_of[index - 1]
    }
}

/// Pack a spin pattern (first element most significant) into a binary code.
pub fn pattern_code(pattern: &[bool]) -> u32 {
    pattern
        .iter()
        .fold(0u32, |acc, &bit| (acc << 1) | u32::from(bit))
}

/// Unpack a binary code into a spin pattern of length `n_spins`.
pub fn code_pattern(code: u32, n_spins: usize) -> Vec<bool> {
    (0..n_spins)
        .map(|j| (code >> (n_spins - 1 - j)) & 1 == 1)
        .collect()
}

/// Hamming index (1-based) of an explicit nuclear spin pattern.
pub fn hamming_index(pattern: &[bool], n_spins: usize) -> Result<usize, EngineError> {
    if pattern.len() != n_spins {
        return Err(EngineError::LengthMismatch {
            expected: n_spins,
            found: pattern.len(),
        });
    }
    if n_spins == 0 || n_spins > 31 {
        return Err(EngineError::TooManySpins(n_spins));
    }
    let code = pattern_code(pattern);
    let weight = code.count_ones() as usize;
    // states of lower weight come first
    let below: usize = (0..weight).map(|w| binomial_usize(n_spins, w)).sum();
    // rank among states of equal weight by ascending binary value
    let mut rank = 0usize;
    let mut ones_left = weight;
    for (j, &bit) in pattern.iter().enumerate() {
        if bit {
            let remaining = n_spins - j - 1;
            // patterns with a 0 here and all remaining ones placed later are smaller
            rank += binomial_usize(remaining, ones_left);
            ones_left -= 1;
        }
    }
    Ok(below + rank + 1)
}

/// Spin pattern of the state with the given 1-based Hamming index.
pub fn hamming_state(index: usize, n_spins: usize) -> Result<Vec<bool>, EngineError> {
    if n_spins == 0 || n_spins > 31 {
        return Err(EngineError::TooManySpins(n_spins));
    }
    let size = 1usize << n_spins;
    if index == 0 || index > size {
        return Err(EngineError::IndexOutOfRange { index, size });
    }
    let mut rest = index - 1;
    let mut weight = 0;
    while rest >= binomial_usize(n_spins, weight) {
        rest -= binomial_usize(n_spins, weight);
        weight += 1;
    }
    let mut pattern = vec![false; n_spins];
    let mut ones_left = weight;
    for (j, slot) in pattern.iter_mut().enumerate() {
        if ones_left == 0 {
            break;
        }
        let remaining = n_spins - j - 1;
        let with_zero = binomial_usize(remaining, ones_left);
        if rest >= with_zero {
            *slot = true;
            rest -= with_zero;
            ones_left -= 1;
        }
    }
    Ok(pattern)
}

fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
