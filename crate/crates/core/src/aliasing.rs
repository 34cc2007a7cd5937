//! Relationship between a CIR and the effective CIR observed when only
//! every mu-th subcarrier of the CFR is sampled.
//!
//! Two independent evaluation routes are kept: the kernel sum
//! `g_n = (1/Na) sum_m f_m s(n,m)` with
//! `s(n,m) = sum_k exp(j2pi k (n/Na - mu m/Nc))`, and the decimate-then-IDFT
//! path. When `Nc/mu = Na` the kernel collapses to a scaled Dirac comb and
//! the ECIR is the CIR zero-padded (or folded modulo Na when it is longer).

use crate::{fft, Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliasingConfig {
    pub nc: usize,
    /// Subcarrier decimation factor.
    pub mu: usize,
    /// ECIR/ECFR length.
    pub na: usize,
    /// CIR length.
    pub n_f: usize,
}

impl AliasingConfig {
    pub fn new(nc: usize, mu: usize, na: usize, n_f: usize) -> Result<Self> {
        if mu == 0 || na == 0 || nc == 0 {
            return Err(Error::InvalidConfig("Nc, mu, Na must be positive".into()));
        }
        if mu * (na - 1) >= nc {
            return Err(Error::InvalidConfig(format!(
                "decimated index out of range: mu (Na-1) = {} >= Nc = {nc}",
                mu * (na - 1)
            )));
        }
        if n_f > nc {
            return Err(Error::InvalidConfig(format!(
                "CIR length {n_f} exceeds Nc = {nc}"
            )));
        }
        Ok(Self { nc, mu, na, n_f })
    }
}

/// Sample every mu-th CFR coefficient: `h_k = p_{mu k}`.
pub fn decimate_cfr(p: &[Complex64], cfg: &AliasingConfig) -> Result<Vec<Complex64>> {
    if p.len() != cfg.nc {
        return Err(Error::DimensionMismatch(format!(
            "CFR length {} does not match Nc = {}",
            p.len(),
            cfg.nc
        )));
    }
    Ok((0..cfg.na).map(|k| p[cfg.mu * k]).collect())
}

/// Aliasing kernel `s(n, m)`, evaluated in closed form with an exact
/// integer test for the Dirac case.
pub fn kernel_s(n: usize, m: usize, cfg: &AliasingConfig) -> Complex64 {
    debug_assert!(n < cfg.na);
    // theta / 2pi = n/Na - mu m / Nc = (n Nc - mu m Na) / (Na Nc)
    let numer = n as i128 * cfg.nc as i128 - (cfg.mu * m) as i128 * cfg.na as i128;
    let denom = (cfg.na * cfg.nc) as i128;
    if numer.rem_euclid(denom) == 0 {
        return Complex64::new(cfg.na as f64, 0.0);
    }
    let theta = TAU * numer as f64 / denom as f64;
    let num = Complex64::from_polar(1.0, theta * cfg.na as f64) - 1.0;
    let den = Complex64::from_polar(1.0, theta) - 1.0;
    num / den
}

/// ECIR via the kernel sum, `g_n = (1/Na) sum_{m < N_f} f_m s(n, m)`.
pub fn ecir_from_cir(f: &[Complex64], cfg: &AliasingConfig) -> Result<Vec<Complex64>> {
    if f.len() != cfg.n_f {
        return Err(Error::DimensionMismatch(format!(
            "CIR length {} does not match N_f = {}",
            f.len(),
            cfg.n_f
        )));
    }
    let scale = 1.0 / cfg.na as f64;
    Ok((0..cfg.na)
        .map(|n| {
            let acc: Complex64 = f
                .iter()
                .enumerate()
                .map(|(m, &fm)| fm * kernel_s(n, m, cfg))
                .sum();
            acc * scale
        })
        .collect())
}

/// ECIR via the independent route: zero-pad the CIR to Nc, DFT, decimate,
/// IDFT of length Na.
pub fn ecir_via_decimation(f: &[Complex64], cfg: &AliasingConfig) -> Result<Vec<Complex64>> {
    if f.len() != cfg.n_f {
        return Err(Error::DimensionMismatch(format!(
            "CIR length {} does not match N_f = {}",
            f.len(),
            cfg.n_f
        )));
    }
    let mut p = vec![Complex64::new(0.0, 0.0); cfg.nc];
    p[..f.len()].copy_from_slice(f);
    fft::dft_in_place(&mut p);
    let mut h = decimate_cfr(&p, cfg)?;
    fft::idft_in_place(&mut h);
    Ok(h)
}

/// Maximum relative deviation between the two ECIR routes.
pub fn dual_path_error(f: &[Complex64], cfg: &AliasingConfig) -> Result<f64> {
    let a = ecir_from_cir(f, cfg)?;
    let b = ecir_via_decimation(f, cfg)?;
    let scale = a
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm() / scale)
        .fold(0.0, f64::max))
}
