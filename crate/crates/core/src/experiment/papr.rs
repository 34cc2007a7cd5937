//! PAPR CCDF comparison across the waveforms on a shared threshold grid.

use crate::experiment::config::ExperimentConfig;
use crate::experiment::seeds::{stream_rng, streams};
use crate::waveform::{ccdf_from_paprs, ofdm_modulate, random_frame, symbol_paprs_db, DesignRule};
use crate::{Error, Result};
use std::io::Write;

#[derive(Debug, Clone)]
pub struct PaprResult {
    pub thresholds_db: Vec<f64>,
    /// CCDF per waveform, aligned with the threshold grid.
    pub ccdf: Vec<(DesignRule, Vec<f64>)>,
    pub symbols_per_rule: usize,
    /// Set when the symbol budget is too small for the requested CCDF
    /// depth at the usual 1e-3 reading point.
    pub depth_warning: bool,
}

pub fn run_papr(config: &ExperimentConfig) -> Result<PaprResult> {
    let cfg = &config.system;
    let papr = &config.papr;
    if papr.symbols == 0 {
        return Err(Error::InvalidInput("PAPR needs at least one symbol".into()));
    }
    let thresholds = papr.thresholds();
    let mut ccdf = Vec::new();
    for (ri, &rule) in papr.rules.iter().enumerate() {
        let mut paprs = Vec::with_capacity(papr.symbols);
        let mut burst_idx = 0u64;
        while paprs.len() < papr.symbols {
            let mut rng = stream_rng(
                config.master_seed,
                streams::PAPR_PAYLOAD,
                (ri as u64) << 32 | burst_idx,
            );
            let frame = random_frame(rule, cfg, &mut rng)?;
            let burst = ofdm_modulate(&frame, cfg)?;
            paprs.extend(symbol_paprs_db(&burst)?);
            burst_idx += 1;
        }
        paprs.truncate(papr.symbols);
        ccdf.push((rule, ccdf_from_paprs(&paprs, &thresholds)));
    }
    Ok(PaprResult {
        thresholds_db: thresholds,
        ccdf,
        symbols_per_rule: papr.symbols,
        depth_warning: papr.symbols < 10_000,
    })
}

/// CSV schema: `rule,threshold_db,ccdf`.
pub fn write_papr_csv(mut w: impl Write, result: &PaprResult) -> Result<()> {
    writeln!(w, "rule,threshold_db,ccdf")?;
    if result.depth_warning {
        writeln!(
            w,
            "# warning: symbol budget below 1e4, deep CCDF points unreliable"
        )?;
    }
    for (rule, probs) in &result.ccdf {
        for (t, p) in result.thresholds_db.iter().zip(probs) {
            writeln!(w, "{},{:.3},{:e}", rule.label(), t, p)?;
        }
    }
    Ok(())
}

/// Threshold (dB) where the CCDF crosses `level`, interpolated in
/// log-probability.
pub fn papr_at_ccdf(thresholds_db: &[f64], probs: &[f64], level: f64) -> Option<f64> {
    for i in 1..probs.len() {
        let (p0, p1) = (probs[i - 1], probs[i]);
        if p0 >= level && p1 < level {
            if p1 <= 0.0 {
                return Some(thresholds_db[i]);
            }
            let t = (p0.log10() - level.log10()) / (p0.log10() - p1.log10());
            return Some(thresholds_db[i - 1] + t * (thresholds_db[i] - thresholds_db[i - 1]));
        }
    }
    None
}

impl PaprResult {
    pub fn threshold_at(&self, rule: DesignRule, level: f64) -> Option<f64> {
        self.ccdf
            .iter()
            .find(|(r, _)| *r == rule)
            .and_then(|(_, probs)| papr_at_ccdf(&self.thresholds_db, probs, level))
    }
}
