//! Burst layout: preamble symbols, pilot placement, and payload mapping.
//!
//! The subcarriers `k in {-Nc/2, 0}` always carry pilots since both
//! redundancy rules force them real-valued; the remaining pilots come in
//! `{-k, +k}` pairs so every column can satisfy the active rule.

use crate::comm::codec::{conv_encode, Interleaver};
use crate::grid::Grid;
use crate::params::{k_to_bin, SystemConfig};
use crate::waveform::{apply_design_rule, map_bits_qpsk, DesignRule, SymbolFrame};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::TAU;

/// Seeds for the receiver-known randomness of a burst.
#[derive(Debug, Clone, Copy)]
pub struct BurstSeeds {
    pub preamble: u64,
    pub pilots: u64,
    pub interleaver: u64,
}

impl BurstSeeds {
    pub fn new(preamble: u64, pilots: u64, interleaver: u64) -> Self {
        Self {
            preamble,
            pilots,
            interleaver,
        }
    }
}

/// Static burst structure for one waveform rule.
#[derive(Debug, Clone)]
pub struct BurstLayout {
    pub rule: DesignRule,
    /// Preamble symbols at the start of the burst.
    pub n_pr: usize,
    nc: usize,
    nsym: usize,
    /// Positive pilot indices (ascending), excluding the two edge pilots.
    pilot_pair_ks: Vec<i64>,
    /// All pilot bins in ascending-k order.
    pilot_bins: Vec<usize>,
    /// Positive data subcarriers (ascending k) carrying payload under the
    /// redundancy rules.
    data_pos_bins: Vec<usize>,
    data_pos_ks: Vec<i64>,
    /// Matching negative-k bins, aligned with `data_pos_bins`.
    data_neg_bins: Vec<usize>,
    /// All data bins in ascending-k order (standard-rule payload set).
    data_bins_all: Vec<usize>,
    /// Unit-magnitude pilot symbols at the positive pair indices.
    pilot_pair_values: Vec<Complex64>,
    /// Real edge pilots for k = -Nc/2 and k = 0.
    edge_values: [f64; 2],
    /// Preamble spectrum used on even symbol indices (and all indices for
    /// the single-preamble rules).
    preamble_even: Vec<Complex64>,
    /// Rule-II preamble spectrum for odd symbol indices.
    preamble_odd: Option<Vec<Complex64>>,
}

/// Default preamble/pilot counts: 16 for the redundancy rules, 8 for the
/// standard waveform (equal effective estimation SNR).
pub fn default_counts(rule: DesignRule) -> (usize, usize) {
    match rule {
        DesignRule::Standard => (8, 8),
        _ => (16, 16),
    }
}

impl BurstLayout {
    pub fn new(
        cfg: &SystemConfig,
        rule: DesignRule,
        n_pr: usize,
        n_p: usize,
        seeds: &BurstSeeds,
    ) -> Result<Self> {
        if n_pr == 0 || n_pr % 2 != 0 || n_pr >= cfg.nsym {
            return Err(Error::InvalidConfig(format!(
                "preamble count {n_pr} must be even, positive and below Nsym"
            )));
        }
        if n_p < 2 || n_p % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "pilot count {n_p} must be even and at least 2 (edge pilots)"
            )));
        }
        let pairs = n_p / 2 - 1;
        let half = cfg.nc as i64 / 2;
        let mut pilot_pair_ks = Vec::with_capacity(pairs);
        for i in 0..pairs {
            let k = ((i + 1) as f64 * half as f64 / (pairs + 1) as f64).round() as i64;
            if k <= 0 || k >= half || pilot_pair_ks.contains(&k) {
                return Err(Error::InvalidConfig(format!(
                    "cannot place {n_p} pilots on {} subcarriers",
                    cfg.nc
                )));
            }
            pilot_pair_ks.push(k);
        }

        let mut pilot_ks: Vec<i64> = vec![-half];
        pilot_ks.extend(pilot_pair_ks.iter().rev().map(|k| -k));
        pilot_ks.push(0);
        pilot_ks.extend(pilot_pair_ks.iter());
        let pilot_bins: Vec<usize> = pilot_ks
            .iter()
            .map(|&k| k_to_bin(k, cfg.nc))
            .collect::<Result<_>>()?;

        let mut data_pos_ks = Vec::new();
        for k in 1..half {
            if !pilot_pair_ks.contains(&k) {
                data_pos_ks.push(k);
            }
        }
        let data_pos_bins: Vec<usize> = data_pos_ks
            .iter()
            .map(|&k| k_to_bin(k, cfg.nc))
            .collect::<Result<_>>()?;
        let data_neg_bins: Vec<usize> = data_pos_ks
            .iter()
            .map(|&k| k_to_bin(-k, cfg.nc))
            .collect::<Result<_>>()?;

        let mut data_bins_all = Vec::new();
        for k in -half..half {
            if k != 0 && k != -half && !pilot_pair_ks.contains(&k.abs()) {
                data_bins_all.push(k_to_bin(k, cfg.nc)?);
            }
        }

        // Receiver-known unit-magnitude randomness.
        let mut prng = ChaCha12Rng::seed_from_u64(seeds.pilots);
        let pilot_pair_values: Vec<Complex64> = (0..pairs).map(|_| qpsk_point(&mut prng)).collect();
        let edge_values = [
            if prng.gen::<bool>() { 1.0 } else { -1.0 },
            if prng.gen::<bool>() { 1.0 } else { -1.0 },
        ];

        let mut layout = Self {
            rule,
            n_pr,
            nc: cfg.nc,
            nsym: cfg.nsym,
            pilot_pair_ks,
            pilot_bins,
            data_pos_bins,
            data_pos_ks,
            data_neg_bins,
            data_bins_all,
            pilot_pair_values,
            edge_values,
            preamble_even: Vec::new(),
            preamble_odd: None,
        };
        layout.build_preambles(cfg, seeds.preamble)?;
        Ok(layout)
    }

    pub fn with_defaults(cfg: &SystemConfig, rule: DesignRule, seeds: &BurstSeeds) -> Result<Self> {
        let (n_pr, n_p) = default_counts(rule);
        Self::new(cfg, rule, n_pr, n_p, seeds)
    }

    fn build_preambles(&mut self, cfg: &SystemConfig, seed: u64) -> Result<()> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        match self.rule {
            DesignRule::Standard => {
                self.preamble_even = (0..cfg.nc)
                    .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
                    .collect();
            }
            DesignRule::RuleI => {
                let upper: Vec<Complex64> = (0..cfg.nc / 2 - 1)
                    .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
                    .collect();
                let e0 = sign_of(&mut rng);
                let e1 = sign_of(&mut rng);
                self.preamble_even =
                    apply_design_rule(&upper, e0, e1, DesignRule::RuleI, 0, cfg.nc)?;
            }
            DesignRule::RuleII => {
                let upper: Vec<Complex64> = (0..cfg.nc / 2 - 1)
                    .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))
                    .collect();
                let e0 = sign_of(&mut rng);
                let e1 = sign_of(&mut rng);
                self.preamble_even =
                    apply_design_rule(&upper, e0, e1, DesignRule::RuleII, 0, cfg.nc)?;
                self.preamble_odd = Some(apply_design_rule(
                    &upper,
                    e0,
                    e1,
                    DesignRule::RuleII,
                    1,
                    cfg.nc,
                )?);
            }
        }
        Ok(())
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn nsym(&self) -> usize {
        self.nsym
    }

    pub fn n_p(&self) -> usize {
        self.pilot_bins.len()
    }

    pub fn n_d(&self) -> usize {
        self.nc - self.n_p()
    }

    pub fn data_symbols(&self) -> usize {
        self.nsym - self.n_pr
    }

    pub fn pilot_bins(&self) -> &[usize] {
        &self.pilot_bins
    }

    pub fn data_pos_bins(&self) -> &[usize] {
        &self.data_pos_bins
    }

    pub fn data_pos_ks(&self) -> &[i64] {
        &self.data_pos_ks
    }

    pub fn data_neg_bins(&self) -> &[usize] {
        &self.data_neg_bins
    }

    pub fn data_bins_all(&self) -> &[usize] {
        &self.data_bins_all
    }

    /// Known preamble spectrum transmitted at symbol `m < n_pr`.
    pub fn preamble_spectrum(&self, m: usize) -> &[Complex64] {
        match (&self.preamble_odd, m % 2) {
            (Some(odd), 1) => odd,
            _ => &self.preamble_even,
        }
    }

    /// Coded bits carried by one data OFDM symbol.
    pub fn coded_bits_per_symbol(&self) -> usize {
        match self.rule {
            DesignRule::Standard => 2 * self.data_bins_all.len(),
            _ => 2 * self.data_pos_bins.len(),
        }
    }

    /// Payload capacity of the burst in information bits (rate 1/2,
    /// terminated).
    pub fn payload_bits(&self) -> usize {
        self.data_symbols() * self.coded_bits_per_symbol() / 2 - 6
    }

    /// Known pilot values of symbol `m` in ascending-k order (matching
    /// [`Self::pilot_bins`]).
    pub fn pilot_vector(&self, m: usize) -> Vec<Complex64> {
        let pairs = self.pilot_pair_ks.len();
        let mut v = Vec::with_capacity(self.n_p());
        v.push(Complex64::new(self.edge_values[0], 0.0));
        for i in (0..pairs).rev() {
            v.push(self.mirrored_pilot(i, m));
        }
        v.push(Complex64::new(self.edge_values[1], 0.0));
        for i in 0..pairs {
            v.push(self.pilot_pair_values[i]);
        }
        v
    }

    fn mirrored_pilot(&self, pair: usize, m: usize) -> Complex64 {
        let s = self.pilot_pair_values[pair];
        match self.rule {
            // No structural constraint: reuse the conjugate for a fixed,
            // receiver-known value.
            DesignRule::Standard => s.conj(),
            DesignRule::RuleI => {
                let k = self.pilot_pair_ks[pair];
                s.conj() * if k % 2 == 0 { 1.0 } else { -1.0 }
            }
            DesignRule::RuleII => s.conj() * if m % 2 == 0 { 1.0 } else { -1.0 },
        }
    }

    /// Assemble a burst frame: preamble symbols, then data symbols with
    /// pilots inserted, the payload encoded, per-symbol interleaved and
    /// QPSK-mapped; the lower half follows the active rule.
    pub fn build_burst(
        &self,
        payload: &[u8],
        cfg: &SystemConfig,
        seeds: &BurstSeeds,
    ) -> Result<SymbolFrame> {
        if payload.len() != self.payload_bits() {
            return Err(Error::InvalidInput(format!(
                "payload of {} bits does not fill the burst capacity {}",
                payload.len(),
                self.payload_bits()
            )));
        }
        let coded = conv_encode(payload);
        let cbps = self.coded_bits_per_symbol();
        debug_assert_eq!(coded.len(), cbps * self.data_symbols());
        let interleaver = Interleaver::new(cbps, seeds.interleaver);

        let mut grid = Grid::zeros(self.nc, self.nsym);
        for m in 0..self.n_pr {
            grid.set_col(m, self.preamble_spectrum(m));
        }

        for (block, chunk) in coded.chunks_exact(cbps).enumerate() {
            let m = self.n_pr + block;
            let symbols = map_bits_qpsk(&interleaver.interleave(chunk)?)?;
            let col = self.data_column(&symbols, m, cfg)?;
            grid.set_col(m, &col);
        }
        Ok(SymbolFrame::new(grid, self.rule))
    }

    fn data_column(
        &self,
        symbols: &[Complex64],
        m: usize,
        cfg: &SystemConfig,
    ) -> Result<Vec<Complex64>> {
        match self.rule {
            DesignRule::Standard => {
                let mut col = vec![Complex64::new(0.0, 0.0); self.nc];
                let pilots = self.pilot_vector(m);
                for (bin, v) in self.pilot_bins.iter().zip(pilots) {
                    col[*bin] = v;
                }
                for (bin, s) in self.data_bins_all.iter().zip(symbols) {
                    col[*bin] = *s;
                }
                Ok(col)
            }
            rule => {
                // Fill the upper half (data and pilots) and let the rule
                // complete the column, which keeps the frame invariant by
                // construction.
                let mut upper = vec![Complex64::new(0.0, 0.0); self.nc / 2 - 1];
                for (i, &k) in self.pilot_pair_ks.iter().enumerate() {
                    upper[(k - 1) as usize] = self.pilot_pair_values[i];
                }
                for (&k, s) in self.data_pos_ks.iter().zip(symbols) {
                    upper[(k - 1) as usize] = *s;
                }
                apply_design_rule(
                    &upper,
                    Complex64::new(self.edge_values[0], 0.0),
                    Complex64::new(self.edge_values[1], 0.0),
                    rule,
                    m,
                    cfg.nc,
                )
            }
        }
    }

    /// Entry role at (bin, symbol): preamble, pilot or data.
    pub fn role(&self, bin: usize, m: usize) -> EntryRole {
        if m < self.n_pr {
            EntryRole::Preamble
        } else if self.pilot_bins.contains(&bin) {
            EntryRole::Pilot
        } else {
            EntryRole::Data
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryRole {
    Preamble,
    Pilot,
    Data,
}

fn qpsk_point(rng: &mut impl Rng) -> Complex64 {
    let re = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    let im = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn sign_of(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::bin_to_k;
    use rand::Rng;

    fn cfg() -> SystemConfig {
        SystemConfig::default_burst()
    }

    fn seeds() -> BurstSeeds {
        BurstSeeds::new(11, 22, 33)
    }

    fn random_payload(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(0..2u8)).collect()
    }

    #[test]
    fn default_pilot_sets() {
        let cfg = cfg();
        for (rule, n_p, n_pr) in [
            (DesignRule::Standard, 8, 8),
            (DesignRule::RuleI, 16, 16),
            (DesignRule::RuleII, 16, 16),
        ] {
            let l = BurstLayout::with_defaults(&cfg, rule, &seeds()).unwrap();
            assert_eq!(l.n_p(), n_p);
            assert_eq!(l.n_pr, n_pr);
            assert_eq!(l.n_d(), cfg.nc - n_p);
            // Pilot set closed under negation except the two edges.
            let ks: Vec<i64> = l
                .pilot_bins()
                .iter()
                .map(|&b| bin_to_k(b, cfg.nc).unwrap())
                .collect();
            for &k in &ks {
                if k != 0 && k != -(cfg.nc as i64) / 2 {
                    assert!(ks.contains(&-k), "pilot {k} lacks its mirror");
                }
            }
            assert!(ks.contains(&0));
            assert!(ks.contains(&(-(cfg.nc as i64) / 2)));
        }
    }

    #[test]
    fn rule_ii_preambles_alternate() {
        let cfg = cfg();
        let l = BurstLayout::with_defaults(&cfg, DesignRule::RuleII, &seeds()).unwrap();
        let even = l.preamble_spectrum(0);
        let odd = l.preamble_spectrum(1);
        assert_eq!(l.preamble_spectrum(2), even);
        assert_eq!(l.preamble_spectrum(3), odd);
        for bin in 0..cfg.nc {
            let k = bin_to_k(bin, cfg.nc).unwrap();
            assert!((even[bin].norm() - 1.0).abs() < 1e-12, "unit magnitude");
            if k < 0 && k != -(cfg.nc as i64) / 2 {
                assert_eq!(even[bin], -odd[bin]);
            } else {
                assert_eq!(even[bin], odd[bin]);
            }
        }
    }

    #[test]
    fn burst_columns_satisfy_their_rule() {
        let cfg = cfg();
        for rule in [DesignRule::RuleI, DesignRule::RuleII] {
            let l = BurstLayout::with_defaults(&cfg, rule, &seeds()).unwrap();
            let payload = random_payload(l.payload_bits(), 1);
            let frame = l.build_burst(&payload, &cfg, &seeds()).unwrap();
            for m in 0..cfg.nsym {
                for k in 1..(cfg.nc as i64) / 2 {
                    let pos = frame.grid.at(k_to_bin(k, cfg.nc).unwrap(), m);
                    let neg = frame.grid.at(k_to_bin(-k, cfg.nc).unwrap(), m);
                    let sign = match rule {
                        DesignRule::RuleI => {
                            if k % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                        _ => {
                            if m % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                    assert!(
                        (neg - pos.conj() * sign).norm() < 1e-12,
                        "rule {rule:?} violated at k={k}, m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn pilot_positions_static_across_symbols() {
        let cfg = cfg();
        let l = BurstLayout::with_defaults(&cfg, DesignRule::RuleII, &seeds()).unwrap();
        let payload = random_payload(l.payload_bits(), 2);
        let frame = l.build_burst(&payload, &cfg, &seeds()).unwrap();
        for m in l.n_pr..cfg.nsym {
            let pilots = l.pilot_vector(m);
            for (i, &bin) in l.pilot_bins().iter().enumerate() {
                assert!(
                    (frame.grid.at(bin, m) - pilots[i]).norm() < 1e-12,
                    "pilot mismatch at bin {bin}, m {m}"
                );
            }
        }
    }

    #[test]
    fn payload_round_trips_through_known_good_receiver_path() {
        // Unitary sanity: re-extract the payload from a clean frame.
        let cfg = cfg();
        let l = BurstLayout::with_defaults(&cfg, DesignRule::RuleI, &seeds()).unwrap();
        let payload = random_payload(l.payload_bits(), 3);
        let frame = l.build_burst(&payload, &cfg, &seeds()).unwrap();

        let cbps = l.coded_bits_per_symbol();
        let interleaver = Interleaver::new(cbps, seeds().interleaver);
        let mut llrs = Vec::new();
        for m in l.n_pr..cfg.nsym {
            let ests: Vec<Complex64> = l
                .data_pos_bins()
                .iter()
                .map(|&b| frame.grid.at(b, m))
                .collect();
            let block = crate::comm::codec::demap_llr(&ests, &vec![1e-3; ests.len()]).unwrap();
            llrs.extend(interleaver.deinterleave(&block).unwrap());
        }
        let decoded = crate::comm::codec::viterbi_decode(&llrs).unwrap();
        assert_eq!(decoded, payload);
    }

    #[test]
    fn payload_size_is_enforced() {
        let cfg = cfg();
        let l = BurstLayout::with_defaults(&cfg, DesignRule::RuleII, &seeds()).unwrap();
        assert!(l.build_burst(&[0, 1, 0], &cfg, &seeds()).is_err());
    }

    #[test]
    fn capacity_accounting() {
        let cfg = cfg();
        let l = BurstLayout::with_defaults(&cfg, DesignRule::RuleII, &seeds()).unwrap();
        // 496 data subcarriers in pairs: 248 payload symbols per column.
        assert_eq!(l.coded_bits_per_symbol(), 496);
        assert_eq!(l.payload_bits(), 240 * 496 / 2 - 6);

        let s = BurstLayout::with_defaults(&cfg, DesignRule::Standard, &seeds()).unwrap();
        assert_eq!(s.coded_bits_per_symbol(), 2 * 504);
        assert_eq!(s.payload_bits(), 248 * 504 - 6);
    }
}
