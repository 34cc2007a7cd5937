//! Channel synthesis: frequency-domain radar point targets, tap-delay-line
//! communication channels, time-domain channel application with Doppler,
//! and AWGN injection.

use crate::grid::Grid;
use crate::params::{bin_to_k, unambiguous_limits, SystemConfig, C0};
use crate::waveform::TimeBurst;
use crate::{fft, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A point scatterer in the radar scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarTarget {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub amplitude: Complex64,
}

impl RadarTarget {
    pub fn new(range_m: f64, velocity_mps: f64, amplitude: Complex64) -> Self {
        Self {
            range_m,
            velocity_mps,
            amplitude,
        }
    }

    pub fn from_db(range_m: f64, velocity_mps: f64, amplitude_db: f64) -> Self {
        Self::new(
            range_m,
            velocity_mps,
            Complex64::new(10f64.powf(amplitude_db / 20.0), 0.0),
        )
    }
}

/// Frequency-domain channel coefficients `c_{k,m}` of a point-target scene:
/// round-trip delay phase over subcarriers and two-way Doppler over
/// symbols,
/// `c_{k,m} = sum_i a_i e^{-j2pi k df 2 r_i / c0} e^{+j2pi (2 v_i fc/c0) m (T+Tcp)}`.
pub fn radar_channel(targets: &[RadarTarget], cfg: &SystemConfig) -> Grid {
    let mut c = Grid::zeros(cfg.nc, cfg.nsym);
    let df = cfg.delta_f();
    let t_ext = cfg.extended_symbol_duration();
    for target in targets {
        let delay = 2.0 * target.range_m / C0;
        let doppler = 2.0 * target.velocity_mps * cfg.carrier_hz / C0;
        let range_ramp: Vec<Complex64> = (0..cfg.nc)
            .map(|bin| {
                let k = bin_to_k(bin, cfg.nc).expect("bin in range") as f64;
                Complex64::from_polar(1.0, -TAU * k * df * delay)
            })
            .collect();
        for m in 0..cfg.nsym {
            let rot =
                target.amplitude * Complex64::from_polar(1.0, TAU * doppler * m as f64 * t_ext);
            let col = c.col_mut(m);
            for (bin, v) in col.iter_mut().enumerate() {
                *v += rot * range_ramp[bin];
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelProfile {
    Los,
    Nlos,
}

/// Channel impulse response of a communication link.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub taps: Vec<Complex64>,
    pub profile: ChannelProfile,
}

impl Cir {
    /// Zero-padded CFR of length `nc`.
    pub fn cfr(&self, nc: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); nc];
        buf[..self.taps.len()].copy_from_slice(&self.taps);
        fft::dft_in_place(&mut buf);
        buf
    }
}

/// Tap-delay-line generator with exponential power decay. NLOS taps are
/// circularly-symmetric Gaussian; the LOS first tap is Rician with the
/// configured K-factor. The power profile is normalized to unit average
/// energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirModel {
    pub profile: ChannelProfile,
    pub n_f: usize,
    /// Exponential decay constant in taps.
    pub decay_taps: f64,
    /// Rician K-factor in dB for the LOS first tap.
    pub k_factor_db: f64,
}

impl CirModel {
    pub fn new(profile: ChannelProfile, n_f: usize) -> Self {
        Self {
            profile,
            n_f,
            decay_taps: 50.0,
            k_factor_db: 10.0,
        }
    }

    pub fn generate(&self, nc: usize, seed: u64) -> Result<Cir> {
        if self.n_f == 0 || self.n_f > nc {
            return Err(Error::InvalidConfig(format!(
                "CIR length {} must satisfy 0 < N_f <= Nc = {}",
                self.n_f, nc
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..self.n_f)
            .map(|n| (-(n as f64) / self.decay_taps).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let power: Vec<f64> = raw.iter().map(|p| p / total).collect();

        let mut taps: Vec<Complex64> = power
            .iter()
            .map(|&p| (p / 2.0).sqrt() * standard_complex(&mut rng))
            .collect();
        if self.profile == ChannelProfile::Los {
            let k = 10f64.powf(self.k_factor_db / 10.0);
            let fixed = (power[0] * k / (k + 1.0)).sqrt();
            let diffuse = (power[0] / (k + 1.0) / 2.0).sqrt();
            taps[0] = Complex64::new(fixed, 0.0) + diffuse * standard_complex(&mut rng);
        }
        Ok(Cir {
            taps,
            profile: self.profile,
        })
    }
}

fn standard_complex(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Link realization for one burst.
#[derive(Debug, Clone)]
pub struct LinkState {
    pub cir: Cir,
    pub relative_velocity_mps: f64,
    /// Time-domain noise variance per complex sample.
    pub noise_variance: f64,
}

/// Causal linear convolution truncated to the input length.
pub fn convolve_same(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    if taps.len() <= 8 || x.len() < 64 {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for (n, out) in y.iter_mut().enumerate() {
            let t_max = taps.len().min(n + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &tap) in taps.iter().take(t_max).enumerate() {
                acc += tap * x[n - t];
            }
            *out = acc;
        }
        return y;
    }
    // FFT convolution for long signals.
    let full = x.len() + taps.len() - 1;
    let size = full.next_power_of_two();
    let mut fx = vec![Complex64::new(0.0, 0.0); size];
    fx[..x.len()].copy_from_slice(x);
    let mut ft = vec![Complex64::new(0.0, 0.0); size];
    ft[..taps.len()].copy_from_slice(taps);
    fft::dft_in_place(&mut fx);
    fft::dft_in_place(&mut ft);
    for (a, b) in fx.iter_mut().zip(ft.iter()) {
        *a *= b;
    }
    fft::idft_in_place(&mut fx);
    fx.truncate(x.len());
    fx
}

/// One-way communication Doppler shift `f_D = v fc / c0`.
pub fn comm_doppler_hz(velocity_mps: f64, cfg: &SystemConfig) -> f64 {
    velocity_mps * cfg.carrier_hz / C0
}

/// Convolve the burst with the CIR and rotate each sample by the one-way
/// Doppler, `e^{j 2 pi f_D n Ts}`. ICI and the common phase error arise
/// from the rotation.
pub fn apply_channel_time(burst: &TimeBurst, state: &LinkState, cfg: &SystemConfig) -> TimeBurst {
    let mut samples = convolve_same(&burst.samples, &state.cir.taps);
    let f_d = comm_doppler_hz(state.relative_velocity_mps, cfg);
    if f_d != 0.0 {
        let step = TAU * f_d * cfg.sample_duration();
        for (n, v) in samples.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, step * n as f64);
        }
    }
    TimeBurst {
        samples,
        nc: burst.nc,
        ncp: burst.ncp,
        nsym: burst.nsym,
    }
}

/// Add circularly-symmetric complex Gaussian noise of total variance
/// `sigma2` per sample.
pub fn add_awgn(samples: &mut [Complex64], sigma2: f64, rng: &mut impl Rng) -> Result<()> {
    if sigma2 < 0.0 {
        return Err(Error::InvalidInput("noise variance must be >= 0".into()));
    }
    if sigma2 == 0.0 {
        return Ok(());
    }
    let scale = (sigma2 / 2.0).sqrt();
    for v in samples.iter_mut() {
        *v += scale * standard_complex(rng);
    }
    Ok(())
}

/// Unit-variance circular Gaussian vector (for seeded noise reuse across
/// scaling factors).
pub fn unit_noise(len: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..len)
        .map(|_| standard_complex(rng) * std::f64::consts::FRAC_1_SQRT_2)
        .collect()
}

/// Velocity and range of the radar grid expressed in fractional bins.
pub fn target_bins(target: &RadarTarget, cfg: &SystemConfig) -> (f64, f64) {
    let (r_max, v_max) = unambiguous_limits(cfg);
    let rb = target.range_m / r_max * cfg.nc as f64;
    let vb = (target.velocity_mps / (2.0 * v_max) * cfg.nsym as f64).rem_euclid(cfg.nsym as f64);
    (rb, vb)
}
