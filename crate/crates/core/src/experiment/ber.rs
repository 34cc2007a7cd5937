//! Monte-Carlo BER experiment: per-channel bursts through the full
//! transmit/channel/receive chain under configurable knowledge conditions,
//! with counter-based seeding so parallel and sequential runs agree bit
//! for bit.

use crate::channel::{convolve_same, unit_noise};
use crate::comm::estimate::{effective_cfr, EffectiveChannel};
use crate::comm::layout::{default_counts, BurstLayout, BurstSeeds};
use crate::comm::{doppler_rotate, receive_burst, true_cpe, RxCondition};
use crate::experiment::config::{ConditionConfig, ExperimentConfig};
use crate::experiment::seeds::{stream_rng, stream_seed, streams};
use crate::grid::Grid;
use crate::impairments::{apply_rx_iq, apply_tx_iq, IqProfile, Side};
use crate::params::SystemConfig;
use crate::waveform::{ofdm_demodulate, ofdm_modulate, DesignRule, TimeBurst};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Time-domain noise variance for a target Eb/N0:
/// `sigma2 = P_s / (EbN0 * r * b * zeta * nu)` with `zeta = Nc/(Ncp+Nc)`
/// covering the CP overhead and `nu` the subcarrier redundancy (1/2 for
/// the redundancy rules, 1 otherwise).
pub fn noise_variance(
    ebn0_linear: f64,
    p_s: f64,
    code_rate: f64,
    bits_per_symbol: f64,
    zeta: f64,
    nu: f64,
) -> Result<f64> {
    for (name, v) in [
        ("EbN0", ebn0_linear),
        ("P_s", p_s),
        ("code rate", code_rate),
        ("bits per symbol", bits_per_symbol),
        ("zeta", zeta),
        ("nu", nu),
    ] {
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(p_s / (ebn0_linear * code_rate * bits_per_symbol * zeta * nu))
}

/// Redundancy factor of a waveform rule.
pub fn redundancy_nu(rule: DesignRule) -> f64 {
    if rule.is_redundant() {
        0.5
    } else {
        1.0
    }
}

/// Accumulated BER for one (rule, condition, Eb/N0) cell.
#[derive(Debug, Clone, Serialize)]
pub struct BerRecord {
    pub rule: String,
    pub condition: String,
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
}

struct TrialCounts {
    /// errors[rule][condition][ebn0]
    errors: Vec<Vec<Vec<u64>>>,
    bits: Vec<u64>,
}

/// Receiver front end shared by signal and noise: CP removal and DFT,
/// receive IQ imbalance, then the post-receiver Doppler rotation. Linear
/// (widely linear) in its input, so scaled noise can be added in the
/// frequency domain.
fn rx_front(
    samples: &[Complex64],
    rx: Option<&IqProfile>,
    f_d: f64,
    cfg: &SystemConfig,
) -> Result<Grid> {
    let burst = TimeBurst {
        samples: samples.to_vec(),
        nc: cfg.nc,
        ncp: cfg.ncp,
        nsym: cfg.nsym,
    };
    let mut grid = ofdm_demodulate(&burst, cfg)?;
    if let Some(p) = rx {
        grid = apply_rx_iq(&grid, p)?;
    }
    Ok(doppler_rotate(&grid, f_d, cfg))
}

fn add_scaled(signal: &Grid, noise: &Grid, sigma: f64) -> Grid {
    let mut out = signal.clone();
    for (o, n) in out.as_mut_slice().iter_mut().zip(noise.as_slice()) {
        *o += n * sigma;
    }
    out
}

fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialCounts> {
    let cfg = &config.system;
    let master = config.master_seed;
    let ber = &config.ber;
    let zeta = cfg.nc as f64 / (cfg.ncp + cfg.nc) as f64;

    let cir = config
        .cir_model(trial)
        .generate(cfg.nc, stream_seed(master, streams::CIR, trial))?;
    let velocity = {
        let mut rng = stream_rng(master, streams::VELOCITY, trial);
        let v = config.link.velocity_range_mps;
        rng.gen_range(-v..=v)
    };
    let f_d = crate::channel::comm_doppler_hz(velocity, cfg);
    let noise_time = {
        let mut rng = stream_rng(master, streams::NOISE, trial);
        unit_noise(cfg.burst_len(), &mut rng)
    };

    let tx_imb = config.impairments.build_tx(cfg)?;
    let rx_imb = config.impairments.build_rx(cfg)?;
    let id_tx = IqProfile::identity(cfg.nc, Side::Tx);
    let id_rx = IqProfile::identity(cfg.nc, Side::Rx);

    let need_balanced = ber.conditions.iter().any(|c| !c.imbalance);
    let need_imbalanced = ber.conditions.iter().any(|c| c.imbalance);
    let front_noise_bal = if need_balanced {
        Some(rx_front(&noise_time, None, f_d, cfg)?)
    } else {
        None
    };
    let front_noise_imb = if need_imbalanced {
        Some(rx_front(&noise_time, Some(&rx_imb), f_d, cfg)?)
    } else {
        None
    };

    let true_cpes: Vec<f64> = (0..cfg.nsym).map(|m| true_cpe(f_d, cfg, m)).collect();

    let mut counts = TrialCounts {
        errors: vec![vec![vec![0; ber.ebn0_db.len()]; ber.conditions.len()]; ber.rules.len()],
        bits: vec![0; ber.rules.len()],
    };

    for (ri, &rule) in ber.rules.iter().enumerate() {
        let rule_tag = trial * 8 + ri as u64;
        let seeds = BurstSeeds::new(
            stream_seed(master, streams::PREAMBLE, rule_tag),
            stream_seed(master, streams::PILOTS, rule_tag),
            stream_seed(master, streams::INTERLEAVER, rule_tag),
        );
        let (n_pr, n_p) = counts_for(ber, rule);
        let layout = BurstLayout::new(cfg, rule, n_pr, n_p, &seeds)?;
        let payload: Vec<u8> = {
            let mut rng = stream_rng(master, streams::PAYLOAD, rule_tag);
            (0..layout.payload_bits())
                .map(|_| rng.gen_range(0..2u8))
                .collect()
        };
        counts.bits[ri] = payload.len() as u64;
        let frame = layout.build_burst(&payload, cfg, &seeds)?;
        let nu = redundancy_nu(rule);

        for imbalance in [false, true] {
            if (imbalance && !need_imbalanced) || (!imbalance && !need_balanced) {
                continue;
            }
            let (tx_p, rx_p) = if imbalance {
                (&tx_imb, &rx_imb)
            } else {
                (&id_tx, &id_rx)
            };
            let distorted = apply_tx_iq(&frame, tx_p)?;
            let burst = ofdm_modulate(&distorted, cfg)?;
            let sig = convolve_same(&burst.samples, &cir.taps);
            let p_s = sig.iter().map(|v| v.norm_sqr()).sum::<f64>() / sig.len() as f64;
            let front_sig = rx_front(&sig, imbalance.then_some(&rx_imb), f_d, cfg)?;
            let front_noise = if imbalance {
                front_noise_imb.as_ref().unwrap()
            } else {
                front_noise_bal.as_ref().unwrap()
            };
            let analytic: EffectiveChannel = effective_cfr(&cir, tx_p, rx_p, rule, cfg)?;

            for (ci, cond) in ber.conditions.iter().enumerate() {
                if cond.imbalance != imbalance {
                    continue;
                }
                let rx_condition = RxCondition {
                    channel: cond.channel,
                    cpe: cond.cpe,
                };
                for (ei, &ebn0_db) in ber.ebn0_db.iter().enumerate() {
                    let sigma2 =
                        noise_variance(10f64.powf(ebn0_db / 10.0), p_s, 0.5, 2.0, zeta, nu)?;
                    let z = add_scaled(&front_sig, front_noise, sigma2.sqrt());
                    let decoded = receive_burst(
                        &z,
                        &layout,
                        cfg,
                        rx_condition,
                        Some(&analytic),
                        Some(&true_cpes),
                        sigma2,
                        seeds.interleaver,
                    )?;
                    let errors =
                        decoded.iter().zip(&payload).filter(|(a, b)| a != b).count() as u64;
                    counts.errors[ri][ci][ei] = errors;
                }
            }
        }
    }
    Ok(counts)
}

fn counts_for(ber: &crate::experiment::config::BerConfig, rule: DesignRule) -> (usize, usize) {
    let (n_pr, n_p) = default_counts(rule);
    (
        ber.n_pr_override.unwrap_or(n_pr),
        ber.n_p_override.unwrap_or(n_p),
    )
}

/// Run the BER experiment on `jobs` worker threads (0 uses the rayon
/// default). Records come back sorted by (rule, condition, Eb/N0) and are
/// independent of the thread count.
pub fn run_ber(config: &ExperimentConfig, jobs: usize) -> Result<Vec<BerRecord>> {
    config.validate()?;
    let ber = &config.ber;
    let trials: Vec<u64> = (0..ber.channels as u64).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let per_trial: Vec<Result<TrialCounts>> =
        pool.install(|| trials.par_iter().map(|&t| run_trial(config, t)).collect());

    let mut errors =
        vec![vec![vec![0u64; ber.ebn0_db.len()]; ber.conditions.len()]; ber.rules.len()];
    let mut bits = vec![0u64; ber.rules.len()];
    for counts in per_trial {
        let counts = counts?;
        for (ri, rule_counts) in counts.errors.iter().enumerate() {
            bits[ri] += counts.bits[ri];
            for (acc_cond, cond_counts) in errors[ri].iter_mut().zip(rule_counts) {
                for (acc, e) in acc_cond.iter_mut().zip(cond_counts) {
                    *acc += e;
                }
            }
        }
    }

    let mut records = Vec::new();
    for (ri, &rule) in ber.rules.iter().enumerate() {
        for (ci, cond) in ber.conditions.iter().enumerate() {
            for (ei, &ebn0_db) in ber.ebn0_db.iter().enumerate() {
                let e = errors[ri][ci][ei];
                records.push(BerRecord {
                    rule: rule.label().to_string(),
                    condition: cond.label(),
                    ebn0_db,
                    bits: bits[ri],
                    errors: e,
                    ber: e as f64 / bits[ri].max(1) as f64,
                });
            }
        }
    }
    Ok(records)
}

/// CSV schema: `rule,condition,ebn0_db,bits,errors,ber`.
pub fn write_ber_csv(mut w: impl Write, records: &[BerRecord]) -> Result<()> {
    writeln!(w, "rule,condition,ebn0_db,bits,errors,ber")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{:e}",
            r.rule, r.condition, r.ebn0_db, r.bits, r.errors, r.ber
        )?;
    }
    Ok(())
}

/// Extract the (ebn0, ber) curve of one rule/condition pair.
pub fn curve(
    records: &[BerRecord],
    rule: DesignRule,
    condition: &ConditionConfig,
) -> Vec<(f64, f64)> {
    let label = condition.label();
    records
        .iter()
        .filter(|r| r.rule == rule.label() && r.condition == label)
        .map(|r| (r.ebn0_db, r.ber))
        .collect()
}

/// Eb/N0 at which a monotone BER curve crosses `target`, by log-linear
/// interpolation. `None` when the curve never reaches the target (an
/// error floor).
pub fn ebn0_at_ber(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    if points[0].1 <= target {
        return Some(points[0].0);
    }
    for w in points.windows(2) {
        let (x0, b0) = w[0];
        let (x1, b1) = w[1];
        if b0 > target && b1 <= target {
            if b1 <= 0.0 {
                return Some(x1);
            }
            let t = (b0.log10() - target.log10()) / (b0.log10() - b1.log10());
            return Some(x0 + t * (x1 - x0));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_variance_examples() {
        let zeta = 512.0f64 / 1012.0;
        assert!((zeta - 0.506).abs() < 1e-3);
        // P_s = 1, EbN0 = 10 dB, standard waveform.
        let s = noise_variance(10.0, 1.0, 0.5, 2.0, zeta, 1.0).unwrap();
        assert!((s - 0.19765625).abs() < 1e-9, "{s}");
        // Halving nu doubles the variance.
        let half = noise_variance(10.0, 1.0, 0.5, 2.0, zeta, 0.5).unwrap();
        assert!((half / s - 2.0).abs() < 1e-12);
        assert!(noise_variance(0.0, 1.0, 0.5, 2.0, zeta, 1.0).is_err());
    }

    #[test]
    fn redundancy_factors() {
        assert_eq!(redundancy_nu(DesignRule::Standard), 1.0);
        assert_eq!(redundancy_nu(DesignRule::RuleI), 0.5);
        assert_eq!(redundancy_nu(DesignRule::RuleII), 0.5);
    }

    #[test]
    fn vanishing_noise_is_error_free_without_residual_interference() {
        // Eb/N0 = 90 dB drives sigma^2 to a negligible value. Balanced
        // chains decode perfectly for every rule, as do the redundancy
        // rules under imbalance (their stacked model is consistent). The
        // standard waveform keeps an image-interference floor instead.
        let mut config = crate::experiment::config::ExperimentConfig::default();
        config.ber.channels = 1;
        config.ber.ebn0_db = vec![90.0];
        config.ber.conditions = vec![
            crate::experiment::config::ConditionConfig {
                imbalance: false,
                channel: crate::comm::ChannelKnowledge::Perfect,
                cpe: crate::comm::CpeMode::Perfect,
            },
            crate::experiment::config::ConditionConfig {
                imbalance: true,
                channel: crate::comm::ChannelKnowledge::Perfect,
                cpe: crate::comm::CpeMode::Perfect,
            },
        ];
        let records = run_ber(&config, 1).unwrap();
        for r in &records {
            let interference_free = r.condition.starts_with("bal") || r.rule != "standard";
            if interference_free {
                assert_eq!(
                    r.errors, 0,
                    "{} {}: {} errors",
                    r.rule, r.condition, r.errors
                );
            } else {
                assert!(r.errors > 0, "standard imbalance floor should persist");
            }
        }
    }

    #[test]
    fn curve_crossing_interpolation() {
        let pts = vec![(0.0, 1e-2), (2.0, 1e-3), (4.0, 1e-5)];
        let x = ebn0_at_ber(&pts, 1e-4).unwrap();
        assert!((x - 3.0).abs() < 1e-9, "{x}");
        assert_eq!(ebn0_at_ber(&pts, 1e-7), None);
        assert_eq!(ebn0_at_ber(&pts, 1e-1), Some(0.0));
    }
}
