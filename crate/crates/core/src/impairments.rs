//! Tx/Rx IQ-imbalance models.
//!
//! A single imbalance stage maps each subcarrier symbol and its image as
//! `out_k = alpha_k in_k + beta_k in*_{-k}`. Frequency-independent stages
//! come from amplitude/phase mismatch `(epsilon, phi)` or explicit complex
//! literals; frequency-selective stages come from mismatched branch
//! lowpass filters. Stages of either kind compose into a single profile.

use crate::grid::Grid;
use crate::params::{bin_to_k, SystemConfig};
use crate::waveform::SymbolFrame;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Tx,
    Rx,
}

/// Per-subcarrier imbalance coefficients for one stage, indexed by DFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct IqProfile {
    pub side: Side,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl IqProfile {
    /// Perfect balance: `alpha = 1`, `beta = 0`.
    pub fn identity(nc: usize, side: Side) -> Self {
        Self {
            side,
            alpha: vec![Complex64::new(1.0, 0.0); nc],
            beta: vec![Complex64::new(0.0, 0.0); nc],
        }
    }

    /// Frequency-independent profile from fixed coefficients.
    pub fn frequency_independent(alpha: Complex64, beta: Complex64, nc: usize, side: Side) -> Self {
        let mut beta = vec![beta; nc];
        // k = -Nc/2 has no image subcarrier; its beta is meaningless and
        // kept zero so profiles compare canonically.
        beta[nc / 2] = Complex64::new(0.0, 0.0);
        Self {
            side,
            alpha: vec![alpha; nc],
            beta,
        }
    }

    pub fn nc(&self) -> usize {
        self.alpha.len()
    }
}

/// FI coefficients from amplitude mismatch `epsilon` and phase mismatch
/// `phi` (radians): `alpha = cos(phi) + j eps sin(phi)`,
/// `beta = eps cos(phi) + j sin(phi)`.
pub fn fi_coefficients(epsilon: f64, phi: f64) -> (Complex64, Complex64) {
    (
        Complex64::new(phi.cos(), epsilon * phi.sin()),
        Complex64::new(epsilon * phi.cos(), phi.sin()),
    )
}

/// Reference FI imbalance values used by the bundled scenarios.
///
/// These are typical measured values kept as complex literals; evaluating [`fi_coefficients`]
/// at the quoted mismatch parameters reproduces the alpha values but flips
/// the sign of Im(beta), so the literals are kept authoritative here.
pub mod presets {
    use super::*;

    pub fn tx_fi() -> (Complex64, Complex64) {
        (Complex64::new(0.9848, 0.026), Complex64::new(0.148, -0.174))
    }

    pub fn rx_fi() -> (Complex64, Complex64) {
        (Complex64::new(0.966, 0.026), Complex64::new(-0.107, 0.265))
    }

    /// Branch lowpass mismatch: I branch 3 dB ripple / 0.8 edge, Q branch
    /// 2 dB ripple / 0.81 edge, both 6th-order at twice the sampling rate.
    pub fn rx_branch_filters() -> (BranchFilterSpec, BranchFilterSpec) {
        (
            BranchFilterSpec::new(6, 3.0, 0.8),
            BranchFilterSpec::new(6, 2.0, 0.81),
        )
    }
}

/// Chebyshev type-I branch lowpass specification.
///
/// The filter runs at `applied_rate_factor * B`; `passband_edge` is the
/// edge as a fraction of that doubled rate's Nyquist band (i.e. of B for
/// the default factor 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchFilterSpec {
    pub order: usize,
    pub ripple_db: f64,
    pub passband_edge: f64,
    #[serde(default = "default_rate_factor")]
    pub applied_rate_factor: f64,
}

fn default_rate_factor() -> f64 {
    2.0
}

impl BranchFilterSpec {
    pub fn new(order: usize, ripple_db: f64, passband_edge: f64) -> Self {
        Self {
            order,
            ripple_db,
            passband_edge,
            applied_rate_factor: 2.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidConfig("filter order must be >= 1".into()));
        }
        if !(self.ripple_db > 0.0) {
            return Err(Error::InvalidConfig("ripple must be positive".into()));
        }
        if !(self.passband_edge > 0.0 && self.passband_edge < 1.0) {
            return Err(Error::InvalidConfig(
                "passband edge must lie in (0, 1)".into(),
            ));
        }
        if !(self.applied_rate_factor >= 2.0 * self.passband_edge) {
            return Err(Error::InvalidConfig(
                "passband edge exceeds the Nyquist band of the applied rate".into(),
            ));
        }
        Ok(())
    }
}

/// Analog Chebyshev type-I lowpass prototype (unit passband edge).
fn cheby1_prototype(order: usize, ripple_db: f64) -> (Vec<Complex64>, f64) {
    let eps = (10f64.powf(ripple_db / 10.0) - 1.0).sqrt();
    let mu = (1.0 / eps).asinh() / order as f64;
    let poles: Vec<Complex64> = (1..=order)
        .map(|i| {
            let theta = PI * (2 * i - 1) as f64 / (2 * order) as f64;
            Complex64::new(-mu.sinh() * theta.sin(), mu.cosh() * theta.cos())
        })
        .collect();
    let mut gain = poles
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, p| acc * -p)
        .re;
    if order % 2 == 0 {
        gain /= (1.0 + eps * eps).sqrt();
    }
    (poles, gain)
}

/// Frequency response of the digital branch filter at every subcarrier.
///
/// The digital filter is the bilinear transform of the analog prototype
/// with pre-warped passband edge; its response is evaluated exactly as the
/// analog response at `Omega = 2 tan(omega/2)` for the normalized digital
/// frequency `omega = 2 pi f_k / (rate_factor * B)`, `f_k = k * delta_f`.
pub fn branch_filter_response(
    spec: &BranchFilterSpec,
    cfg: &SystemConfig,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let (poles, gain) = cheby1_prototype(spec.order, spec.ripple_db);
    // Edge frequency as a digital angle at the applied rate, pre-warped.
    let omega_edge = 2.0 * PI * spec.passband_edge / spec.applied_rate_factor;
    let warped_edge = 2.0 * (omega_edge / 2.0).tan();
    let scaled: Vec<Complex64> = poles.iter().map(|p| p * warped_edge).collect();
    let total_gain = gain * warped_edge.powi(spec.order as i32);

    let mut h = vec![Complex64::new(0.0, 0.0); cfg.nc];
    for (bin, out) in h.iter_mut().enumerate() {
        let k = bin_to_k(bin, cfg.nc)?;
        let omega = 2.0 * PI * k as f64 / (spec.applied_rate_factor * cfg.nc as f64);
        let s = Complex64::new(0.0, 2.0 * (omega / 2.0).tan());
        let denom = scaled
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, p| acc * (s - p));
        *out = total_gain / denom;
    }
    Ok(h)
}

/// Convert branch responses into imbalance coefficients:
/// `alpha_k = (H_I + H_Q)/2`, `beta_k = (H_I - H_Q)/2`.
pub fn fs_coefficients(h_i: &[Complex64], h_q: &[Complex64], side: Side) -> Result<IqProfile> {
    if h_i.len() != h_q.len() {
        return Err(Error::DimensionMismatch(format!(
            "branch responses differ in length: {} vs {}",
            h_i.len(),
            h_q.len()
        )));
    }
    let alpha = h_i.iter().zip(h_q).map(|(i, q)| (i + q) * 0.5).collect();
    let mut beta: Vec<Complex64> = h_i.iter().zip(h_q).map(|(i, q)| (i - q) * 0.5).collect();
    let nc = beta.len();
    beta[nc / 2] = Complex64::new(0.0, 0.0);
    Ok(IqProfile { side, alpha, beta })
}

/// Cascade two imbalance stages applied `first` then `second` into a single
/// profile: `alpha_k = a2_k a1_k + b2_k b1*_{-k}`,
/// `beta_k = a2_k b1_k + b2_k a1*_{-k}`.
pub fn compose(first: &IqProfile, second: &IqProfile) -> Result<IqProfile> {
    let nc = first.nc();
    if second.nc() != nc {
        return Err(Error::DimensionMismatch(
            "profiles must share the subcarrier count".into(),
        ));
    }
    if first.side != second.side {
        return Err(Error::SideMismatch {
            expected: side_name(first.side),
        });
    }
    let mut alpha = vec![Complex64::new(0.0, 0.0); nc];
    let mut beta = vec![Complex64::new(0.0, 0.0); nc];
    for bin in 0..nc {
        if bin == nc / 2 {
            // No image exists at k = -Nc/2, so the cascade reduces to a
            // scalar there.
            alpha[bin] = second.alpha[bin] * first.alpha[bin];
            continue;
        }
        let img = image_bin(bin, nc);
        alpha[bin] =
            second.alpha[bin] * first.alpha[bin] + second.beta[bin] * first.beta[img].conj();
        beta[bin] =
            second.alpha[bin] * first.beta[bin] + second.beta[bin] * first.alpha[img].conj();
    }
    Ok(IqProfile {
        side: first.side,
        alpha,
        beta,
    })
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Tx => "Tx",
        Side::Rx => "Rx",
    }
}

/// Bin of the image subcarrier `-k`. Bin `Nc/2` (`k = -Nc/2`) maps onto
/// itself; its image term is zeroed separately since `k = +Nc/2` does not
/// exist on the grid.
#[inline]
pub fn image_bin(bin: usize, nc: usize) -> usize {
    if bin == 0 {
        0
    } else {
        nc - bin
    }
}

fn apply_profile(grid: &Grid, p: &IqProfile) -> Result<Grid> {
    let nc = grid.rows();
    if p.nc() != nc {
        return Err(Error::DimensionMismatch(
            "profile length does not match the frame".into(),
        ));
    }
    let mut out = Grid::zeros(nc, grid.cols());
    for m in 0..grid.cols() {
        let src = grid.col(m);
        let dst = out.col_mut(m);
        for bin in 0..nc {
            let direct = p.alpha[bin] * src[bin];
            // The image of k = -Nc/2 falls outside the grid and is treated
            // as zero.
            let image = if bin == nc / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                p.beta[bin] * src[image_bin(bin, nc)].conj()
            };
            dst[bin] = direct + image;
        }
    }
    Ok(out)
}

/// Transmit-side distortion `x_k = alpha_k s_k + beta_k s*_{-k}`.
pub fn apply_tx_iq(frame: &SymbolFrame, p: &IqProfile) -> Result<SymbolFrame> {
    if p.side != Side::Tx {
        return Err(Error::SideMismatch { expected: "Tx" });
    }
    Ok(SymbolFrame::new(apply_profile(&frame.grid, p)?, frame.rule))
}

/// Receive-side distortion `y_k = alpha_k r_k + beta_k r*_{-k}` on a grid
/// of received spectra.
pub fn apply_rx_iq(received: &Grid, p: &IqProfile) -> Result<Grid> {
    if p.side != Side::Rx {
        return Err(Error::SideMismatch { expected: "Rx" });
    }
    apply_profile(received, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{k_to_bin, WindowSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn cfg512() -> SystemConfig {
        SystemConfig::default_burst()
    }

    fn random_grid(nc: usize, nsym: usize, seed: u64) -> Grid {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Grid::from_fn(nc, nsym, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn fi_coefficients_examples() {
        let (a, b) = fi_coefficients(0.0, 0.0);
        assert_eq!(a, Complex64::new(1.0, 0.0));
        assert_eq!(b, Complex64::new(0.0, 0.0));

        let (a, b) = fi_coefficients(0.1503, 10f64.to_radians());
        assert!((a.re - 0.9848).abs() < 5e-5);
        assert!((a.im - 0.0261).abs() < 5e-5);
        assert!((b.re - 0.1480).abs() < 5e-5);
        assert!((b.im - 0.1736).abs() < 5e-5);
    }

    #[test]
    fn preset_beta_sign_differs_from_formula() {
        // The quoted Tx literal has Im(beta) = -0.174 while the formula
        // at (eps = 0.1503, phi = 10 deg) yields +0.1736; the literal stays
        // authoritative and the discrepancy is pinned here.
        let (_, b_formula) = fi_coefficients(0.1503, 10f64.to_radians());
        let (_, b_preset) = presets::tx_fi();
        assert!((b_formula.re - b_preset.re).abs() < 5e-4);
        assert!((b_formula.im + b_preset.im).abs() < 5e-4);
        assert!((b_formula - b_preset).norm() > 0.3);
    }

    #[test]
    fn branch_filter_basic_properties() {
        let cfg = cfg512();
        let spec = BranchFilterSpec::new(6, 3.0, 0.8);
        let h = branch_filter_response(&spec, &cfg).unwrap();
        // |H(0)| within the ripple band of unity (even order puts DC at the
        // ripple trough).
        let dc = h[0].norm();
        let trough = 10f64.powf(-3.0 / 20.0);
        assert!(dc >= trough - 1e-9 && dc <= 1.0 + 1e-9, "dc gain {dc}");
        // Conjugate symmetry of a real-coefficient filter.
        for k in 1..cfg.nc as i64 / 2 {
            let pos = h[k_to_bin(k, cfg.nc).unwrap()];
            let neg = h[k_to_bin(-k, cfg.nc).unwrap()];
            assert!((pos - neg.conj()).norm() < 1e-12);
        }
        // All subcarriers sit inside the passband ripple corridor.
        for v in &h {
            assert!(v.norm() >= trough - 1e-6 && v.norm() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn fs_coefficients_special_cases() {
        let cfg = cfg512();
        let spec = BranchFilterSpec::new(6, 3.0, 0.8);
        let h = branch_filter_response(&spec, &cfg).unwrap();
        // Identical branches: beta vanishes, alpha equals the branch.
        let p = fs_coefficients(&h, &h, Side::Rx).unwrap();
        for bin in 0..cfg.nc {
            assert!((p.alpha[bin] - h[bin]).norm() < 1e-15);
            assert!(p.beta[bin].norm() < 1e-15);
        }
        // Opposite branches: pure image path (except the imageless bin
        // Nc/2, whose beta is canonically zero).
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let neg = vec![Complex64::new(-1.0, 0.0); 8];
        let p = fs_coefficients(&ones, &neg, Side::Rx).unwrap();
        assert!(p.alpha.iter().all(|v| v.norm() < 1e-15));
        for (bin, v) in p.beta.iter().enumerate() {
            if bin == 4 {
                assert_eq!(v.norm(), 0.0);
            } else {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn mismatched_branch_filters_yield_selective_beta() {
        let cfg = cfg512();
        let (spec_i, spec_q) = presets::rx_branch_filters();
        let h_i = branch_filter_response(&spec_i, &cfg).unwrap();
        let h_q = branch_filter_response(&spec_q, &cfg).unwrap();
        let p = fs_coefficients(&h_i, &h_q, Side::Rx).unwrap();
        let betas: Vec<f64> = p
            .beta
            .iter()
            .enumerate()
            .filter(|(bin, _)| *bin != cfg.nc / 2)
            .map(|(_, v)| v.norm())
            .collect();
        let min = betas.iter().cloned().fold(f64::MAX, f64::min);
        let max = betas.iter().cloned().fold(0.0f64, f64::max);
        assert!(min > 0.0, "beta must be nonzero everywhere");
        assert!(max / min > 2.0, "beta should vary noticeably over k");
    }

    #[test]
    fn compose_identity_laws() {
        let cfg = cfg512();
        let id = IqProfile::identity(cfg.nc, Side::Rx);
        let (a, b) = presets::rx_fi();
        let p = IqProfile::frequency_independent(a, b, cfg.nc, Side::Rx);
        assert_eq!(compose(&id, &p).unwrap(), p);
        assert_eq!(compose(&p, &id).unwrap(), p);
        // Identity composed with itself any number of times stays identity.
        let twice = compose(&id, &id).unwrap();
        assert_eq!(twice, id);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let cfg = cfg512();
        let (a, b) = presets::rx_fi();
        let fi = IqProfile::frequency_independent(a, b, cfg.nc, Side::Rx);
        let (si, sq) = presets::rx_branch_filters();
        let fs = fs_coefficients(
            &branch_filter_response(&si, &cfg).unwrap(),
            &branch_filter_response(&sq, &cfg).unwrap(),
            Side::Rx,
        )
        .unwrap();

        let grid = random_grid(cfg.nc, 4, 42);
        let sequential = apply_rx_iq(&apply_rx_iq(&grid, &fi).unwrap(), &fs).unwrap();
        let composed = apply_rx_iq(&grid, &compose(&fi, &fs).unwrap()).unwrap();
        for (x, y) in sequential.as_slice().iter().zip(composed.as_slice()) {
            let rel = (x - y).norm() / x.norm().max(1e-30);
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn single_tone_splits_into_direct_and_image() {
        let cfg = cfg512();
        let (a, b) = presets::tx_fi();
        let p = IqProfile::frequency_independent(a, b, cfg.nc, Side::Tx);
        let mut grid = Grid::zeros(cfg.nc, 1);
        let tone = Complex64::new(0.6, -0.8);
        grid.set(k_to_bin(5, cfg.nc).unwrap(), 0, tone);
        let out = apply_tx_iq(
            &SymbolFrame::new(grid, crate::waveform::DesignRule::Standard),
            &p,
        )
        .unwrap();
        for bin in 0..cfg.nc {
            let v = out.grid.at(bin, 0);
            if bin == k_to_bin(5, cfg.nc).unwrap() {
                assert!((v - a * tone).norm() < 1e-15);
            } else if bin == k_to_bin(-5, cfg.nc).unwrap() {
                assert!((v - b * tone.conj()).norm() < 1e-15);
            } else {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }

    #[test]
    fn identity_profiles_pass_through() {
        let cfg = cfg512();
        let grid = random_grid(cfg.nc, 3, 9);
        let rx = apply_rx_iq(&grid, &IqProfile::identity(cfg.nc, Side::Rx)).unwrap();
        assert_eq!(rx, grid);
    }

    #[test]
    fn side_mismatch_rejected() {
        let cfg = cfg512();
        let p = IqProfile::identity(cfg.nc, Side::Rx);
        let frame = SymbolFrame::new(
            Grid::zeros(cfg.nc, 1),
            crate::waveform::DesignRule::Standard,
        );
        assert!(apply_tx_iq(&frame, &p).is_err());
    }

    #[test]
    fn full_chain_matches_four_term_expansion() {
        // Tx IQ -> flat channel -> Rx IQ equals the four-term expansion of
        // the received-symbol equation.
        let cfg = cfg512();
        let (at, bt) = presets::tx_fi();
        let (ar, br) = presets::rx_fi();
        let tx = IqProfile::frequency_independent(at, bt, cfg.nc, Side::Tx);
        let rx = IqProfile::frequency_independent(ar, br, cfg.nc, Side::Rx);

        let s = random_grid(cfg.nc, 2, 1234);
        let frame = SymbolFrame::new(s.clone(), crate::waveform::DesignRule::Standard);
        let chained = apply_rx_iq(&apply_tx_iq(&frame, &tx).unwrap().grid, &rx).unwrap();

        for m in 0..2 {
            for bin in 0..cfg.nc {
                let s_k = s.at(bin, m);
                // At bin Nc/2 the image subcarrier +Nc/2 does not exist, so
                // every image path (Tx and Rx) vanishes.
                let expansion = if bin == cfg.nc / 2 {
                    ar * at * s_k
                } else {
                    let s_img = s.at(image_bin(bin, cfg.nc), m);
                    ar * at * s_k
                        + ar * bt * s_img.conj()
                        + br * at.conj() * s_img.conj()
                        + br * bt.conj() * s_k
                };
                let got = chained.at(bin, m);
                let rel = (got - expansion).norm() / expansion.norm().max(1e-30);
                assert!(rel < 1e-12, "bin {bin}: {got} vs {expansion}");
            }
        }
    }

    #[test]
    fn fi_imbalance_creates_predicted_pseudo_covariance() {
        // A proper (circular) input has zero pseudo-covariance; after an
        // FI stage the bin pair (k, -k) acquires E[y_k y_{-k}] = 2 alpha
        // beta in line with the cross term of the imbalance equation.
        let nc = 64;
        let (a, b) = presets::rx_fi();
        let p = IqProfile::frequency_independent(a, b, nc, Side::Rx);
        let mut rng = ChaCha12Rng::seed_from_u64(314);
        let trials = 60_000;
        let k = 5usize;
        let img = image_bin(k, nc);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut acc_self = Complex64::new(0.0, 0.0);
        for _ in 0..trials {
            let grid = Grid::from_fn(nc, 1, |_, _| {
                Complex64::new(
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                    rng.sample::<f64, _>(rand_distr::StandardNormal),
                ) * std::f64::consts::FRAC_1_SQRT_2
            });
            let y = apply_rx_iq(&grid, &p).unwrap();
            acc += y.at(k, 0) * y.at(img, 0);
            acc_self += y.at(k, 0) * y.at(k, 0);
        }
        let pseudo = acc / trials as f64;
        let want = 2.0 * a * b;
        assert!(
            (pseudo - want).norm() < 0.02 * want.norm().max(1.0),
            "pseudo-covariance {pseudo} vs predicted {want}"
        );
        // The per-bin pseudo-variance stays zero.
        assert!((acc_self / trials as f64).norm() < 0.02);
    }

    #[test]
    fn application_is_linear_in_the_frame() {
        let cfg = cfg512();
        let (a, b) = presets::tx_fi();
        let p = IqProfile::frequency_independent(a, b, cfg.nc, Side::Tx);
        let g1 = random_grid(cfg.nc, 2, 5);
        let g2 = random_grid(cfg.nc, 2, 6);
        let scale = Complex64::new(0.7, 0.0);

        let mut sum = Grid::zeros(cfg.nc, 2);
        for m in 0..2 {
            for bin in 0..cfg.nc {
                sum.set(bin, m, g1.at(bin, m) * scale + g2.at(bin, m));
            }
        }
        let rule = crate::waveform::DesignRule::Standard;
        let lhs = apply_tx_iq(&SymbolFrame::new(sum, rule), &p).unwrap();
        let r1 = apply_tx_iq(&SymbolFrame::new(g1, rule), &p).unwrap();
        let r2 = apply_tx_iq(&SymbolFrame::new(g2, rule), &p).unwrap();
        for m in 0..2 {
            for bin in 0..cfg.nc {
                // Linearity holds with real scaling; conjugation makes the
                // map widely linear, not complex-linear.
                let want = r1.grid.at(bin, m) * scale + r2.grid.at(bin, m);
                assert!((lhs.grid.at(bin, m) - want).norm() < 1e-12);
            }
        }
    }
}
