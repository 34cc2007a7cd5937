//! Communication transmitter and receiver chain: burst assembly, the
//! post-receiver Doppler model, and the condition-dependent receive path
//! (channel knowledge x CPE synchronization).

pub mod codec;
pub mod estimate;
pub mod layout;

use crate::grid::Grid;
use crate::params::SystemConfig;
use crate::waveform::DesignRule;
use crate::{fft, Error, Result};
use estimate::EffectiveChannel;
use layout::BurstLayout;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKnowledge {
    Perfect,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpeMode {
    Perfect,
    Pilot,
}

/// Receiver knowledge condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RxCondition {
    pub channel: ChannelKnowledge,
    pub cpe: CpeMode,
}

/// Common phase error of symbol `m` for Doppler `f_d`: the mean rotation
/// over the symbol's DFT window.
pub fn true_cpe(f_d: f64, cfg: &SystemConfig, m: usize) -> f64 {
    let step = TAU * f_d * cfg.sample_duration();
    step * (m as f64 * cfg.symbol_len() as f64 + cfg.ncp as f64 + (cfg.nc as f64 - 1.0) / 2.0)
}

/// Velocity-induced per-sample rotation applied to post-receiver spectra.
///
/// Each symbol is taken to time domain, rotated by `e^{j 2 pi f_d Ts n}`
/// with `n` the global sample index of its DFT window, and transformed
/// back, producing both the common phase error and ICI of the model
/// `Z = H S Lambda`.
pub fn doppler_rotate(grid: &Grid, f_d: f64, cfg: &SystemConfig) -> Grid {
    if f_d == 0.0 {
        return grid.clone();
    }
    let step = TAU * f_d * cfg.sample_duration();
    let mut out = Grid::zeros(grid.rows(), grid.cols());
    for m in 0..grid.cols() {
        let mut buf = grid.col(m).to_vec();
        fft::idft_in_place(&mut buf);
        let offset = (m * cfg.symbol_len() + cfg.ncp) as f64;
        for (n, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, step * (offset + n as f64));
        }
        fft::dft_in_place(&mut buf);
        out.set_col(m, &buf);
    }
    out
}

/// Decode the payload of a received burst grid under the given knowledge
/// condition.
///
/// `analytic_channel` backs the perfect-knowledge condition;
/// `true_cpes[m]` backs perfect CPE compensation. With an estimated
/// channel, CPE compensation is referenced to the preamble symbol the
/// estimate was aligned to.
#[allow(clippy::too_many_arguments)]
pub fn receive_burst(
    z: &Grid,
    layout: &BurstLayout,
    cfg: &SystemConfig,
    condition: RxCondition,
    analytic_channel: Option<&EffectiveChannel>,
    true_cpes: Option<&[f64]>,
    sigma2: f64,
    interleaver_seed: u64,
) -> Result<Vec<u8>> {
    let estimated;
    let channel: &EffectiveChannel = match condition.channel {
        ChannelKnowledge::Perfect => analytic_channel.ok_or_else(|| {
            Error::InvalidInput("perfect-knowledge condition needs the analytic channel".into())
        })?,
        ChannelKnowledge::Estimated => {
            estimated =
                estimate::estimate_channel(z, layout, cfg, Some(estimate::default_mask(cfg.nc)))?;
            &estimated
        }
    };

    let cpe_reference = |m: usize| -> f64 {
        match condition.channel {
            ChannelKnowledge::Perfect => 0.0,
            ChannelKnowledge::Estimated => {
                let cpes = true_cpes.unwrap_or(&[]);
                let reference = if layout.rule == DesignRule::RuleII && m % 2 == 1 {
                    1
                } else {
                    0
                };
                cpes.get(reference).copied().unwrap_or(0.0)
            }
        }
    };

    let interleaver = codec::Interleaver::new(layout.coded_bits_per_symbol(), interleaver_seed);
    let mut llrs = Vec::with_capacity(layout.data_symbols() * layout.coded_bits_per_symbol());
    let ones_p = vec![1.0; layout.pilot_bins().len()];

    for m in layout.n_pr..cfg.nsym {
        let h = channel.ecfr(m);
        let col = z.col(m);

        let phi = match condition.cpe {
            CpeMode::Perfect => {
                let cpes = true_cpes.ok_or_else(|| {
                    Error::InvalidInput("perfect CPE condition needs the true CPE values".into())
                })?;
                cpes[m] - cpe_reference(m)
            }
            CpeMode::Pilot => {
                let z_p: Vec<Complex64> = layout.pilot_bins().iter().map(|&b| col[b]).collect();
                let h_p: Vec<Complex64> = layout.pilot_bins().iter().map(|&b| h[b]).collect();
                let (x_hat, c_ee) = estimate::lmmse_pilots(&z_p, &h_p, &ones_p, sigma2, cfg.nc)?;
                estimate::estimate_cpe_pilots(&layout.pilot_vector(m), &x_hat, &c_ee)?
            }
        };
        let derot = Complex64::from_polar(1.0, -phi);

        let (estimates, c_ee) = match layout.rule {
            DesignRule::Standard => {
                let z_d: Vec<Complex64> = layout
                    .data_bins_all()
                    .iter()
                    .map(|&b| col[b] * derot)
                    .collect();
                let h_d: Vec<Complex64> = layout.data_bins_all().iter().map(|&b| h[b]).collect();
                let ones = vec![1.0; z_d.len()];
                estimate::lmmse_diagonal(&z_d, &h_d, &ones, sigma2, cfg.nc)?
            }
            rule => {
                let z_pos: Vec<Complex64> = layout
                    .data_pos_bins()
                    .iter()
                    .map(|&b| col[b] * derot)
                    .collect();
                let z_neg: Vec<Complex64> = layout
                    .data_neg_bins()
                    .iter()
                    .map(|&b| col[b] * derot)
                    .collect();
                let h_pos: Vec<Complex64> = layout.data_pos_bins().iter().map(|&b| h[b]).collect();
                let h_neg: Vec<Complex64> = layout.data_neg_bins().iter().map(|&b| h[b]).collect();
                let d = estimate::rule_phases(rule, layout.data_pos_ks(), m)?;
                let ones = vec![1.0; z_pos.len()];
                estimate::lmmse_data_stacked(
                    &z_pos, &z_neg, &h_pos, &h_neg, &d, &ones, sigma2, cfg.nc,
                )?
            }
        };

        let block = codec::demap_llr(&estimates, &c_ee)?;
        llrs.extend(interleaver.deinterleave(&block)?);
    }

    codec::viterbi_decode(&llrs)
}
