//! Effective-channel computation and estimation, CPE estimation, and the
//! diagonal/stacked LMMSE estimators.
//!
//! The effective channel combines the propagation channel with both IQ
//! imbalance stages as seen by a receiver dividing by known rule-conforming
//! symbols. Under rule II it alternates between two deterministic
//! responses for even and odd symbol indices.

use crate::channel::Cir;
use crate::comm::layout::BurstLayout;
use crate::grid::Grid;
use crate::impairments::{image_bin, IqProfile};
use crate::params::SystemConfig;
use crate::waveform::DesignRule;
use crate::{fft, Error, Result};
use num_complex::Complex64;
use std::ops::Range;

/// Effective channel impulse/frequency responses. `g_odd`/`h_odd` are
/// present only for rule II, where even and odd symbols see different
/// channels.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub g_even: Vec<Complex64>,
    pub g_odd: Option<Vec<Complex64>>,
    pub h_even: Vec<Complex64>,
    pub h_odd: Option<Vec<Complex64>>,
    /// ECIR indices zeroed by the estimation mask, when one was applied.
    pub mask: Option<Range<usize>>,
}

impl EffectiveChannel {
    /// ECFR applying to OFDM symbol `m`.
    pub fn ecfr(&self, m: usize) -> &[Complex64] {
        match (&self.h_odd, m % 2) {
            (Some(h), 1) => h,
            _ => &self.h_even,
        }
    }

    pub fn from_ecfr(h_even: Vec<Complex64>, h_odd: Option<Vec<Complex64>>) -> Self {
        let g_even = fft::idft(&h_even);
        let g_odd = h_odd.as_ref().map(|h| fft::idft(h));
        Self {
            g_even,
            g_odd,
            h_even,
            h_odd,
            mask: None,
        }
    }
}

/// Default ECIR mask: the index window holding no deterministic channel
/// content for the bundled parameterization (zero-based `[Nc/2, Nc/2 +
/// 156 Nc/512)`).
pub fn default_mask(nc: usize) -> Range<usize> {
    nc / 2..nc / 2 + 156 * nc / 512
}

/// Exact effective channel of `cir` under the given imbalance profiles and
/// waveform rule.
///
/// Per subcarrier the coefficient multiplying `s_{k,m}` after the rule is
/// substituted into the receive equation; edge subcarriers (real-valued
/// symbols) collapse onto their own closed forms.
pub fn effective_cfr(
    cir: &Cir,
    tx: &IqProfile,
    rx: &IqProfile,
    rule: DesignRule,
    cfg: &SystemConfig,
) -> Result<EffectiveChannel> {
    if tx.nc() != cfg.nc || rx.nc() != cfg.nc {
        return Err(Error::DimensionMismatch(
            "imbalance profiles must match Nc".into(),
        ));
    }
    let c = cir.cfr(cfg.nc);
    let nc = cfg.nc;
    let mut h_even = vec![Complex64::new(0.0, 0.0); nc];
    let mut h_odd = vec![Complex64::new(0.0, 0.0); nc];

    for bin in 0..nc {
        if bin == nc / 2 {
            // k = -Nc/2: the image does not exist; only the direct path
            // survives.
            let v = rx.alpha[bin] * c[bin] * tx.alpha[bin];
            h_even[bin] = v;
            h_odd[bin] = v;
            continue;
        }
        let img = image_bin(bin, nc);
        let direct = rx.alpha[bin] * c[bin] * tx.alpha[bin]
            + rx.beta[bin] * c[img].conj() * tx.beta[img].conj();
        let cross = rx.alpha[bin] * c[bin] * tx.beta[bin]
            + rx.beta[bin] * c[img].conj() * tx.alpha[img].conj();
        if bin == 0 {
            // k = 0 carries a real symbol: s* = s regardless of the rule.
            let v = direct + cross;
            h_even[bin] = v;
            h_odd[bin] = v;
            continue;
        }
        match rule {
            DesignRule::Standard => {
                // Image terms stay interference; the diagonal channel is
                // the direct part only.
                h_even[bin] = direct;
                h_odd[bin] = direct;
            }
            DesignRule::RuleI => {
                let k = crate::params::bin_to_k(bin, nc)?;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let v = direct + cross * sign;
                h_even[bin] = v;
                h_odd[bin] = v;
            }
            DesignRule::RuleII => {
                h_even[bin] = direct + cross;
                h_odd[bin] = direct - cross;
            }
        }
    }

    let h_odd = if rule == DesignRule::RuleII {
        Some(h_odd)
    } else {
        None
    };
    Ok(EffectiveChannel::from_ecfr(h_even, h_odd))
}

/// CPE of `z_m` relative to `z_ref`: `arg(z_ref^H z_m)`.
pub fn estimate_cpe_preamble(z_ref: &[Complex64], z_m: &[Complex64]) -> Result<f64> {
    if z_ref.len() != z_m.len() {
        return Err(Error::DimensionMismatch(
            "preamble symbols must share a length".into(),
        ));
    }
    let inner: Complex64 = z_ref.iter().zip(z_m).map(|(a, b)| a.conj() * b).sum();
    if inner.norm_sqr() == 0.0 {
        return Err(Error::Numerical(
            "zero inner product: preamble phase undefined".into(),
        ));
    }
    Ok(inner.arg())
}

/// BLUE effective-channel estimate from the received preamble symbols
/// (the first `layout.n_pr` columns of `z`).
///
/// Preambles are CPE-aligned to their reference symbol, averaged (jointly,
/// or split by symbol parity for rule II), divided by the known preamble,
/// transformed to the ECIR, masked, and transformed back.
pub fn estimate_channel(
    z: &Grid,
    layout: &BurstLayout,
    cfg: &SystemConfig,
    mask: Option<Range<usize>>,
) -> Result<EffectiveChannel> {
    if z.rows() != cfg.nc || z.cols() < layout.n_pr {
        return Err(Error::DimensionMismatch(
            "received grid does not hold the preamble".into(),
        ));
    }
    let n_pr = layout.n_pr;
    if layout.rule == DesignRule::RuleII && n_pr % 2 != 0 {
        return Err(Error::InvalidConfig(
            "rule II channel estimation needs an even preamble count".into(),
        ));
    }

    let average = |ms: &[usize], reference: usize| -> Result<Vec<Complex64>> {
        let z_ref = z.col(reference);
        let mut acc = vec![Complex64::new(0.0, 0.0); cfg.nc];
        for &m in ms {
            let phi = estimate_cpe_preamble(z_ref, z.col(m))?;
            let rot = Complex64::from_polar(1.0, -phi);
            for (a, v) in acc.iter_mut().zip(z.col(m)) {
                *a += v * rot;
            }
        }
        let scale = 1.0 / ms.len() as f64;
        for a in acc.iter_mut() {
            *a *= scale;
        }
        Ok(acc)
    };

    let to_masked_ecir = |avg: Vec<Complex64>,
                          s_pr: &[Complex64],
                          masked: bool|
     -> (Vec<Complex64>, Vec<Complex64>) {
        let mut g: Vec<Complex64> = avg.iter().zip(s_pr).map(|(z, s)| z / s).collect();
        fft::idft_in_place(&mut g);
        if masked {
            if let Some(range) = mask.clone() {
                for i in range {
                    g[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        let h = fft::dft(&g);
        (g, h)
    };

    match layout.rule {
        DesignRule::Standard | DesignRule::RuleI => {
            let ms: Vec<usize> = (0..n_pr).collect();
            let avg = average(&ms, 0)?;
            // Rule I ECIRs carry channel information everywhere; the mask
            // applies to the standard waveform only.
            let masked = layout.rule == DesignRule::Standard;
            let (g, h) = to_masked_ecir(avg, layout.preamble_spectrum(0), masked);
            Ok(EffectiveChannel {
                g_even: g,
                g_odd: None,
                h_even: h,
                h_odd: None,
                mask: if masked { mask } else { None },
            })
        }
        DesignRule::RuleII => {
            let even: Vec<usize> = (0..n_pr).step_by(2).collect();
            let odd: Vec<usize> = (1..n_pr).step_by(2).collect();
            let avg_even = average(&even, 0)?;
            let avg_odd = average(&odd, 1)?;
            let (g1, h1) = to_masked_ecir(avg_even, layout.preamble_spectrum(0), true);
            let (g2, h2) = to_masked_ecir(avg_odd, layout.preamble_spectrum(1), true);
            Ok(EffectiveChannel {
                g_even: g1,
                g_odd: Some(g2),
                h_even: h1,
                h_odd: Some(h2),
                mask,
            })
        }
    }
}

/// Element-wise LMMSE for a diagonal model `z = H x + n` with diagonal
/// prior `C_xx` and frequency-domain noise variance `Nc sigma^2`:
/// `x_hat = (H^H H + Nc sigma^2 C_xx^-1)^-1 H^H z`. Returns the estimate
/// and the diagonal error covariance.
pub fn lmmse_diagonal(
    z: &[Complex64],
    h: &[Complex64],
    c_xx: &[f64],
    sigma2: f64,
    nc: usize,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if z.len() != h.len() || z.len() != c_xx.len() {
        return Err(Error::DimensionMismatch(
            "z, H and C_xx must share a length".into(),
        ));
    }
    let noise = nc as f64 * sigma2;
    let mut x = Vec::with_capacity(z.len());
    let mut c_ee = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let denom = h[i].norm_sqr() + noise / c_xx[i];
        if denom == 0.0 {
            return Err(Error::Numerical(
                "all-zero channel with zero prior: LMMSE undefined".into(),
            ));
        }
        x.push(h[i].conj() * z[i] / denom);
        c_ee.push(noise / denom);
    }
    Ok((x, c_ee))
}

/// LMMSE pilot-symbol estimation (diagonal model).
pub fn lmmse_pilots(
    z_p: &[Complex64],
    h_p: &[Complex64],
    c_xx_p: &[f64],
    sigma2: f64,
    nc: usize,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    lmmse_diagonal(z_p, h_p, c_xx_p, sigma2, nc)
}

/// Pilot-based CPE estimate `arg(s_p^H C_ee^-1 x_hat_p)`.
pub fn estimate_cpe_pilots(s_p: &[Complex64], x_hat: &[Complex64], c_ee: &[f64]) -> Result<f64> {
    if s_p.len() != x_hat.len() || s_p.len() != c_ee.len() {
        return Err(Error::DimensionMismatch(
            "pilot vectors must share a length".into(),
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..s_p.len() {
        if c_ee[i] <= 0.0 {
            return Err(Error::Numerical(
                "non-positive error covariance in CPE weighting".into(),
            ));
        }
        acc += s_p[i].conj() * x_hat[i] / c_ee[i];
    }
    if acc.norm_sqr() == 0.0 {
        return Err(Error::Numerical("pilot CPE undefined".into()));
    }
    Ok(acc.arg())
}

/// Conjugate-stacked LMMSE over subcarrier pairs.
///
/// For each pair the positive-k observation `z_pos = h_pos s + n` is
/// stacked with the conjugated negative-k observation
/// `conj(z_neg) = (h_neg d)* s + n*`, where `d` is the rule phase tying
/// `s_{-k} = d s*_k` (`e^{j pi k}` for rule I, `e^{j pi m}` for rule II).
/// The overdetermined diagonal system solves element-wise.
#[allow(clippy::too_many_arguments)]
pub fn lmmse_data_stacked(
    z_pos: &[Complex64],
    z_neg: &[Complex64],
    h_pos: &[Complex64],
    h_neg: &[Complex64],
    d: &[Complex64],
    c_xx: &[f64],
    sigma2: f64,
    nc: usize,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let n = z_pos.len();
    if [z_neg.len(), h_pos.len(), h_neg.len(), d.len(), c_xx.len()] != [n; 5] {
        return Err(Error::DimensionMismatch(
            "stacked LMMSE inputs must share a length".into(),
        ));
    }
    let noise = nc as f64 * sigma2;
    let mut x = Vec::with_capacity(n);
    let mut c_ee = Vec::with_capacity(n);
    for i in 0..n {
        let a = h_pos[i];
        let b = (h_neg[i] * d[i]).conj();
        let denom = a.norm_sqr() + b.norm_sqr() + noise / c_xx[i];
        if denom == 0.0 {
            return Err(Error::Numerical(
                "all-zero stacked channel with zero prior: LMMSE undefined".into(),
            ));
        }
        x.push((a.conj() * z_pos[i] + b.conj() * z_neg[i].conj()) / denom);
        c_ee.push(noise / denom);
    }
    Ok((x, c_ee))
}

/// Rule phase `d` per positive data subcarrier for the stacked model.
pub fn rule_phases(rule: DesignRule, ks: &[i64], m: usize) -> Result<Vec<Complex64>> {
    match rule {
        DesignRule::Standard => Err(Error::InvalidInput(
            "the standard waveform has no conjugate pairing".into(),
        )),
        DesignRule::RuleI => Ok(ks
            .iter()
            .map(|&k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect()),
        DesignRule::RuleII => {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            Ok(vec![Complex64::new(sign, 0.0); ks.len()])
        }
    }
}
