//! Subcarrier-symbol generation under the three waveform rules, OFDM
//! modulation with cyclic prefix, and PAPR statistics.
//!
//! The two redundancy rules tie each negative-frequency subcarrier to its
//! positive image:
//!
//! * rule I:  `s_{k,m} = s*_{-k,m} e^{j pi k}` — phase alternates across
//!   subcarriers, relocating imbalance ghosts along the range axis;
//! * rule II: `s_{k,m} = s*_{-k,m} e^{j pi m}` — phase alternates across
//!   OFDM symbols (an artificial Doppler shift), relocating ghosts along
//!   the velocity axis.
//!
//! Subcarriers `k in {-Nc/2, 0}` carry real values under both rules.

use crate::grid::Grid;
use crate::params::{k_to_bin, SystemConfig};
use crate::{fft, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignRule {
    /// Unconstrained subcarrier loading.
    #[serde(rename = "standard")]
    Standard,
    /// Conjugate redundancy with per-subcarrier phase alternation.
    #[serde(rename = "rule_i")]
    RuleI,
    /// Conjugate redundancy with per-symbol phase alternation.
    #[serde(rename = "rule_ii")]
    RuleII,
}

impl DesignRule {
    pub fn label(&self) -> &'static str {
        match self {
            DesignRule::Standard => "standard",
            DesignRule::RuleI => "rule_i",
            DesignRule::RuleII => "rule_ii",
        }
    }

    /// True for the two redundancy rules.
    pub fn is_redundant(&self) -> bool {
        !matches!(self, DesignRule::Standard)
    }
}

/// An Nc x Nsym grid of subcarrier symbols in DFT bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub grid: Grid,
    pub rule: DesignRule,
}

impl SymbolFrame {
    pub fn new(grid: Grid, rule: DesignRule) -> Self {
        Self { grid, rule }
    }

    pub fn nc(&self) -> usize {
        self.grid.rows()
    }

    pub fn nsym(&self) -> usize {
        self.grid.cols()
    }
}

/// Time-domain burst of `nsym` CP-extended OFDM symbols at rate B.
#[derive(Debug, Clone)]
pub struct TimeBurst {
    pub samples: Vec<Complex64>,
    pub nc: usize,
    pub ncp: usize,
    pub nsym: usize,
}

impl TimeBurst {
    pub fn symbol_len(&self) -> usize {
        self.nc + self.ncp
    }

    /// All samples of symbol `m`, CP included.
    pub fn symbol(&self, m: usize) -> &[Complex64] {
        let l = self.symbol_len();
        &self.samples[m * l..(m + 1) * l]
    }

    /// The Nc core samples of symbol `m` (CP stripped).
    pub fn symbol_core(&self, m: usize) -> &[Complex64] {
        let l = self.symbol_len();
        &self.samples[m * l + self.ncp..(m + 1) * l]
    }
}

/// Gray-mapped unit-energy QPSK: bit pair `(b1, b0)` maps to
/// `((1 - 2 b1) + j (1 - 2 b0)) / sqrt(2)`.
pub fn map_bits_qpsk(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "QPSK mapping requires an even number of bits, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            Complex64::new(
                (1.0 - 2.0 * p[0] as f64) * FRAC_1_SQRT_2,
                (1.0 - 2.0 * p[1] as f64) * FRAC_1_SQRT_2,
            )
        })
        .collect())
}

/// Complete one OFDM symbol column from its upper half.
///
/// `upper[i]` holds the symbol for subcarrier `k = i + 1`
/// (`0 < k < Nc/2`); `edge_most_negative` and `edge_dc` are the real-valued
/// entries for `k = -Nc/2` and `k = 0`. The lower half is generated from
/// the chosen rule; the output is in DFT bin order.
pub fn apply_design_rule(
    upper: &[Complex64],
    edge_most_negative: Complex64,
    edge_dc: Complex64,
    rule: DesignRule,
    m: usize,
    nc: usize,
) -> Result<Vec<Complex64>> {
    if rule == DesignRule::Standard {
        return Err(Error::InvalidInput(
            "apply_design_rule applies to the redundancy rules only".into(),
        ));
    }
    if upper.len() != nc / 2 - 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} upper-half symbols for Nc = {}, got {}",
            nc / 2 - 1,
            nc,
            upper.len()
        )));
    }
    for (name, v) in [("edge k=-Nc/2", edge_most_negative), ("edge k=0", edge_dc)] {
        if v.im.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "{name} must be real-valued, got {v}"
            )));
        }
    }

    let mut col = vec![Complex64::new(0.0, 0.0); nc];
    col[0] = edge_dc;
    col[nc / 2] = edge_most_negative;
    for (i, &s) in upper.iter().enumerate() {
        let k = (i + 1) as i64;
        col[k_to_bin(k, nc)?] = s;
        // e^{j pi k} and e^{j pi m} reduce to parity signs for integer k, m.
        let sign = match rule {
            DesignRule::RuleI => {
                if k % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            DesignRule::RuleII => {
                if m % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            DesignRule::Standard => unreachable!(),
        };
        col[k_to_bin(-k, nc)?] = s.conj() * sign;
    }
    Ok(col)
}

/// Full-data frame with random QPSK payload: every subcarrier is loaded
/// (upper half plus rule completion for the redundancy rules, all bins for
/// the standard waveform; edge subcarriers carry random BPSK).
pub fn random_frame(
    rule: DesignRule,
    cfg: &SystemConfig,
    rng: &mut impl rand::Rng,
) -> Result<SymbolFrame> {
    let qpsk = |rng: &mut dyn rand::RngCore| {
        Complex64::new(
            if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 },
            if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 },
        ) * FRAC_1_SQRT_2
    };
    let mut grid = Grid::zeros(cfg.nc, cfg.nsym);
    for m in 0..cfg.nsym {
        match rule {
            DesignRule::Standard => {
                for v in grid.col_mut(m) {
                    *v = qpsk(rng);
                }
            }
            _ => {
                let upper: Vec<Complex64> = (0..cfg.nc / 2 - 1).map(|_| qpsk(rng)).collect();
                let e0 = Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0);
                let e1 = Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0);
                let col = apply_design_rule(&upper, e0, e1, rule, m, cfg.nc)?;
                grid.set_col(m, &col);
            }
        }
    }
    Ok(SymbolFrame::new(grid, rule))
}

/// Per-column inverse DFT (scaled `1/Nc`) with CP prepended.
pub fn ofdm_modulate(frame: &SymbolFrame, cfg: &SystemConfig) -> Result<TimeBurst> {
    if frame.nc() != cfg.nc || frame.nsym() != cfg.nsym {
        return Err(Error::DimensionMismatch(format!(
            "frame is {}x{}, config expects {}x{}",
            frame.nc(),
            frame.nsym(),
            cfg.nc,
            cfg.nsym
        )));
    }
    let sym_len = cfg.symbol_len();
    let mut samples = vec![Complex64::new(0.0, 0.0); cfg.burst_len()];
    let mut scratch = vec![Complex64::new(0.0, 0.0); cfg.nc];
    for m in 0..cfg.nsym {
        scratch.copy_from_slice(frame.grid.col(m));
        fft::idft_in_place(&mut scratch);
        let out = &mut samples[m * sym_len..(m + 1) * sym_len];
        out[cfg.ncp..].copy_from_slice(&scratch);
        out[..cfg.ncp].copy_from_slice(&scratch[cfg.nc - cfg.ncp..]);
    }
    Ok(TimeBurst {
        samples,
        nc: cfg.nc,
        ncp: cfg.ncp,
        nsym: cfg.nsym,
    })
}

/// CP removal and forward DFT per symbol; inverse of [`ofdm_modulate`].
pub fn ofdm_demodulate(burst: &TimeBurst, cfg: &SystemConfig) -> Result<Grid> {
    if burst.nc != cfg.nc || burst.ncp != cfg.ncp || burst.nsym != cfg.nsym {
        return Err(Error::DimensionMismatch(
            "burst geometry does not match config".into(),
        ));
    }
    let mut grid = Grid::zeros(cfg.nc, cfg.nsym);
    for m in 0..cfg.nsym {
        let col = grid.col_mut(m);
        col.copy_from_slice(burst.symbol_core(m));
        fft::dft_in_place(col);
    }
    Ok(grid)
}

/// Per-symbol PAPR in dB (`max |x|^2 / mean |x|^2` over the CP-stripped
/// symbol at critical sampling).
pub fn symbol_paprs_db(burst: &TimeBurst) -> Result<Vec<f64>> {
    if burst.nsym == 0 {
        return Err(Error::InvalidInput("burst holds no OFDM symbols".into()));
    }
    Ok((0..burst.nsym)
        .map(|m| {
            let core = burst.symbol_core(m);
            let mean = core.iter().map(|v| v.norm_sqr()).sum::<f64>() / core.len() as f64;
            let peak = core.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
            10.0 * (peak / mean).log10()
        })
        .collect())
}

/// CCDF over a set of per-symbol PAPR values: fraction exceeding each
/// threshold.
pub fn ccdf_from_paprs(paprs_db: &[f64], thresholds_db: &[f64]) -> Vec<f64> {
    thresholds_db
        .iter()
        .map(|&t| paprs_db.iter().filter(|&&p| p > t).count() as f64 / paprs_db.len() as f64)
        .collect()
}

/// Per-symbol PAPR CCDF of a burst evaluated on `thresholds_db`.
pub fn papr_ccdf(burst: &TimeBurst, thresholds_db: &[f64]) -> Result<Vec<f64>> {
    let paprs = symbol_paprs_db(burst)?;
    Ok(ccdf_from_paprs(&paprs, thresholds_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{bin_to_k, WindowSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn small_cfg() -> SystemConfig {
        SystemConfig::new(16, 4, 16e6, 1e9, 0.25e-6, WindowSpec::rectangular()).unwrap()
    }

    fn random_upper(nc: usize, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
        (0..nc / 2 - 1)
            .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect()
    }

    #[test]
    fn qpsk_mapping_examples() {
        let s = map_bits_qpsk(&[0, 0, 1, 1, 0, 1, 1, 0]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex64::new(r, r));
        assert_eq!(s[1], Complex64::new(-r, -r));
        assert_eq!(s[2], Complex64::new(r, -r));
        assert_eq!(s[3], Complex64::new(-r, r));
        let avg_power = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!((avg_power - 1.0).abs() < 1e-15);
        assert!(map_bits_qpsk(&[1]).is_err());
    }

    #[test]
    fn rule_i_mirror_example() {
        // s_{2,m} = (1+j)/sqrt(2)  ->  s_{-2,m} = (1-j)/sqrt(2)
        let nc = 16;
        let mut upper = vec![Complex64::new(1.0, 0.0); nc / 2 - 1];
        upper[1] = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let col = apply_design_rule(
            &upper,
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            DesignRule::RuleI,
            0,
            nc,
        )
        .unwrap();
        let got = col[k_to_bin(-2, nc).unwrap()];
        assert!((got - Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn rule_ii_sign_alternation_example() {
        // s_{3,m} = j: m = 0 gives s_{-3,0} = -j, m = 1 gives s_{-3,1} = +j.
        let nc = 16;
        let mut upper = vec![Complex64::new(1.0, 0.0); nc / 2 - 1];
        upper[2] = Complex64::new(0.0, 1.0);
        for (m, want) in [
            (0usize, Complex64::new(0.0, -1.0)),
            (1, Complex64::new(0.0, 1.0)),
        ] {
            let col = apply_design_rule(
                &upper,
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                DesignRule::RuleII,
                m,
                nc,
            )
            .unwrap();
            assert!((col[k_to_bin(-3, nc).unwrap()] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn non_real_edge_rejected() {
        let nc = 16;
        let upper = vec![Complex64::new(1.0, 0.0); nc / 2 - 1];
        let bad = apply_design_rule(
            &upper,
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            DesignRule::RuleI,
            0,
            nc,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn dc_tone_modulates_to_constant() {
        let cfg = small_cfg();
        let mut grid = Grid::zeros(cfg.nc, cfg.nsym);
        grid.set(0, 0, Complex64::new(1.0, 0.0));
        let burst = ofdm_modulate(&SymbolFrame::new(grid, DesignRule::Standard), &cfg).unwrap();
        for &v in burst.symbol(0) {
            assert!((v - Complex64::new(1.0 / cfg.nc as f64, 0.0)).norm() < 1e-15);
        }
        // Remaining symbols are all zero.
        for m in 1..cfg.nsym {
            assert!(burst.symbol(m).iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn cp_copies_symbol_tail() {
        let cfg = small_cfg();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let grid = Grid::from_fn(cfg.nc, cfg.nsym, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let burst = ofdm_modulate(&SymbolFrame::new(grid, DesignRule::Standard), &cfg).unwrap();
        for m in 0..cfg.nsym {
            let sym = burst.symbol(m);
            for i in 0..cfg.ncp {
                assert_eq!(sym[i], sym[cfg.nc + i]);
            }
        }
    }

    #[test]
    fn modulate_demodulate_round_trip() {
        let cfg = small_cfg();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let grid = Grid::from_fn(cfg.nc, cfg.nsym, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let frame = SymbolFrame::new(grid.clone(), DesignRule::Standard);
        let burst = ofdm_modulate(&frame, &cfg).unwrap();
        let back = ofdm_demodulate(&burst, &cfg).unwrap();
        for m in 0..cfg.nsym {
            for b in 0..cfg.nc {
                let rel = (back.at(b, m) - grid.at(b, m)).norm() / grid.at(b, m).norm().max(1e-30);
                assert!(rel < 1e-10);
            }
        }
    }

    #[test]
    fn energy_relation_under_shared_scaling() {
        // With x = IDFT(X)/Nc, Parseval reads sum |x|^2 = sum |X|^2 / Nc.
        let cfg = small_cfg();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let grid = Grid::from_fn(cfg.nc, cfg.nsym, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let freq_energy: f64 = grid.as_slice().iter().map(|v| v.norm_sqr()).sum();
        let burst = ofdm_modulate(&SymbolFrame::new(grid, DesignRule::Standard), &cfg).unwrap();
        let time_energy: f64 = (0..cfg.nsym)
            .flat_map(|m| burst.symbol_core(m))
            .map(|v| v.norm_sqr())
            .sum();
        let expected = freq_energy / cfg.nc as f64;
        assert!((time_energy - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn pure_tone_has_zero_papr() {
        let cfg = small_cfg();
        let mut grid = Grid::zeros(cfg.nc, cfg.nsym);
        for m in 0..cfg.nsym {
            grid.set(3, m, Complex64::new(1.0, 0.0));
        }
        let burst = ofdm_modulate(&SymbolFrame::new(grid, DesignRule::Standard), &cfg).unwrap();
        for p in symbol_paprs_db(&burst).unwrap() {
            assert!(p.abs() < 1e-9, "tone PAPR should be 0 dB, got {p}");
        }
    }

    #[test]
    fn ccdf_limits() {
        let paprs = vec![3.0, 5.0, 7.0, 9.0];
        let probs = ccdf_from_paprs(&paprs, &[-1e9, 1e9]);
        assert_eq!(probs, vec![1.0, 0.0]);
    }

    #[test]
    fn rule_ii_columns_repeat_with_period_two() {
        let nc = 32;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let upper = random_upper(nc, &mut rng);
        let e = Complex64::new(1.0, 0.0);
        let cols: Vec<_> = (0..3)
            .map(|m| apply_design_rule(&upper, e, e, DesignRule::RuleII, m, nc).unwrap())
            .collect();
        for b in 0..nc {
            let k = bin_to_k(b, nc).unwrap();
            assert_eq!(cols[0][b], cols[2][b]);
            if k < 0 && k != -(nc as i64) / 2 {
                assert_eq!(cols[0][b], -cols[1][b], "lower half flips sign at k={k}");
            } else {
                assert_eq!(cols[0][b], cols[1][b]);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rule_i_invariant_ratio(seed in 0u64..1000) {
            let nc = 32usize;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let upper = random_upper(nc, &mut rng);
            let e = Complex64::new(-1.0, 0.0);
            let col = apply_design_rule(&upper, e, e, DesignRule::RuleI, 0, nc).unwrap();
            // s_{k,m} / s*_{-k,m} = e^{j pi k} wherever defined.
            for k in 1..(nc as i64 / 2) {
                let s_pos = col[k_to_bin(k, nc).unwrap()];
                let s_neg = col[k_to_bin(-k, nc).unwrap()];
                let want = if k % 2 == 0 { 1.0 } else { -1.0 };
                prop_assert!((s_pos / s_neg.conj() - want).norm() < 1e-12);
            }
            // Edge and DC entries are real.
            prop_assert!(col[0].im.abs() < 1e-12);
            prop_assert!(col[nc / 2].im.abs() < 1e-12);
        }
    }
}
