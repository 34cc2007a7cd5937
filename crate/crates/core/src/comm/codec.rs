//! Rate-1/2 convolutional coding with generators (133, 171) octal and
//! constraint length 7, soft-decision Viterbi decoding, the seeded random
//! block interleaver, and max-log QPSK LLR demapping.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator polynomials in octal, constraint length 7.
pub const GENERATOR_POLYNOMIALS: (u32, u32) = (0o133, 0o171);
const MEMORY: usize = 6;
const STATES: usize = 64;

/// LLR magnitudes are clipped to this value.
pub const LLR_CLIP: f64 = 30.0;

#[inline]
fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Encode with zero termination: six tail bits flush the trellis, so the
/// output holds `2 * (bits.len() + 6)` coded bits.
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let (g0, g1) = GENERATOR_POLYNOMIALS;
    let mut out = Vec::with_capacity(2 * (bits.len() + MEMORY));
    let mut state: u32 = 0;
    for &b in bits.iter().chain([0u8; MEMORY].iter()) {
        let reg = ((b as u32) << MEMORY) | state;
        out.push(parity(reg & g0));
        out.push(parity(reg & g1));
        state = reg >> 1;
    }
    out
}

/// Payload length recoverable from a terminated coded stream of `coded`
/// bits.
pub fn payload_len(coded: usize) -> usize {
    coded / 2 - MEMORY
}

/// Soft-decision Viterbi decoding of a zero-terminated stream.
///
/// LLR sign convention: positive means bit 0. Returns the payload with the
/// six tail bits stripped.
pub fn viterbi_decode(llrs: &[f64]) -> Result<Vec<u8>> {
    if llrs.len() % 2 != 0 || llrs.len() < 2 * (MEMORY + 1) {
        return Err(Error::InvalidInput(format!(
            "LLR stream of {} values is not a terminated rate-1/2 codeword",
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let (g0, g1) = GENERATOR_POLYNOMIALS;

    // outputs[s][b]: coded pair (out0 << 1 | out1) for input b from state s.
    let mut outputs = [[0u8; 2]; STATES];
    for (s, row) in outputs.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let reg = ((b as u32) << MEMORY) | s as u32;
            *v = (parity(reg & g0) << 1) | parity(reg & g1);
        }
    }

    const NEG: f32 = -1e30;
    let mut metric = [NEG; STATES];
    metric[0] = 0.0;
    let mut next = [NEG; STATES];
    // Per step, bit s of decisions[t] holds the dropped (oldest) bit of the
    // surviving predecessor of state s.
    let mut decisions = vec![0u64; steps];

    for (t, dec) in decisions.iter_mut().enumerate() {
        let l0 = llrs[2 * t] as f32;
        let l1 = llrs[2 * t + 1] as f32;
        // Branch correlation metric per output pair 00, 01, 10, 11.
        let bm = [l0 + l1, l0 - l1, -l0 + l1, -l0 - l1];
        next.fill(NEG);
        let mut word = 0u64;
        for half in 0..STATES / 2 {
            for b in 0..2usize {
                let ns = (b << (MEMORY - 1)) | half;
                // Predecessors differ in the bit shifted out.
                let s0 = half << 1;
                let s1 = (half << 1) | 1;
                let m0 = metric[s0] + bm[outputs[s0][b] as usize];
                let m1 = metric[s1] + bm[outputs[s1][b] as usize];
                if m1 > m0 {
                    next[ns] = m1;
                    word |= 1 << ns;
                } else {
                    next[ns] = m0;
                }
            }
        }
        *dec = word;
        metric = next;
    }

    // Terminated trellis: trace back from state 0.
    let mut bits = vec![0u8; steps];
    let mut state = 0usize;
    for t in (0..steps).rev() {
        bits[t] = (state >> (MEMORY - 1)) as u8;
        let dropped = ((decisions[t] >> state) & 1) as usize;
        state = ((state << 1) & (STATES - 1)) | dropped;
    }
    bits.truncate(steps - MEMORY);
    Ok(bits)
}

/// Seeded uniform block permutation.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<u32>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<u32> = (0..len as u32).collect();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        perm.shuffle(&mut rng);
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, block: &[T]) -> Result<Vec<T>> {
        if block.len() != self.perm.len() {
            return Err(Error::DimensionMismatch(format!(
                "block length {} does not match interleaver length {}",
                block.len(),
                self.perm.len()
            )));
        }
        Ok(self.perm.iter().map(|&i| block[i as usize]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, block: &[T]) -> Result<Vec<T>> {
        if block.len() != self.perm.len() {
            return Err(Error::DimensionMismatch(format!(
                "block length {} does not match interleaver length {}",
                block.len(),
                self.perm.len()
            )));
        }
        let mut out = vec![T::default(); block.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p as usize] = block[i];
        }
        Ok(out)
    }
}

/// One-shot convenience wrappers around [`Interleaver`].
pub fn interleave<T: Copy>(block: &[T], seed: u64) -> Result<Vec<T>> {
    Interleaver::new(block.len(), seed).interleave(block)
}

pub fn deinterleave<T: Copy + Default>(block: &[T], seed: u64) -> Result<Vec<T>> {
    Interleaver::new(block.len(), seed).deinterleave(block)
}

/// Max-log LLRs for Gray QPSK under a Gaussian residual with per-symbol
/// error variance. Two LLRs per symbol, in-phase bit first; positive LLR
/// means bit 0; magnitudes clip at [`LLR_CLIP`].
pub fn demap_llr(estimates: &[Complex64], error_variances: &[f64]) -> Result<Vec<f64>> {
    if estimates.len() != error_variances.len() {
        return Err(Error::DimensionMismatch(
            "one error variance per symbol estimate required".into(),
        ));
    }
    let mut llrs = Vec::with_capacity(2 * estimates.len());
    let scale = 2.0 * std::f64::consts::SQRT_2;
    for (s, &var) in estimates.iter().zip(error_variances) {
        if var < 0.0 {
            return Err(Error::InvalidInput(
                "error variance must be non-negative".into(),
            ));
        }
        if var == 0.0 {
            llrs.push(LLR_CLIP * s.re.signum());
            llrs.push(LLR_CLIP * s.im.signum());
        } else {
            llrs.push((scale * s.re / var).clamp(-LLR_CLIP, LLR_CLIP));
            llrs.push((scale * s.im / var).clamp(-LLR_CLIP, LLR_CLIP));
        }
    }
    Ok(llrs)
}
