//! Radar scene experiment: frequency-domain synthesis (no noise and no
//! Doppler-induced ICI, so ghost geometry is not masked), RDM computation,
//! detection and ghost classification.

use crate::channel::{radar_channel, RadarTarget};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::seeds::{stream_rng, streams};
use crate::grid::Grid;
use crate::impairments::{apply_rx_iq, apply_tx_iq};
use crate::radar::{
    classify_peaks, compute_rdm, detect_peaks_with, estimate_noise_floor, predict_ghosts,
    remove_median, GhostPrediction, PeakReport, RangeDopplerMap,
};
use crate::waveform::{random_frame, DesignRule};
use crate::Result;
use serde::Serialize;

/// Outcome of one waveform's radar run.
#[derive(Debug, Clone, Serialize)]
pub struct RadarRunReport {
    pub rule: String,
    pub imbalance: bool,
    pub median_removed: bool,
    pub noise_floor_db: f64,
    pub report: PeakReport,
}

pub struct RadarRun {
    pub rule: DesignRule,
    pub rdm: RangeDopplerMap,
    pub predictions: Vec<GhostPrediction>,
    pub report: RadarRunReport,
}

pub fn run_radar(config: &ExperimentConfig) -> Result<Vec<RadarRun>> {
    config.validate()?;
    let cfg = &config.system;
    let scenario = &config.scenario;
    let targets: Vec<RadarTarget> = scenario.targets.iter().map(|t| t.to_target()).collect();
    let c = radar_channel(&targets, cfg);

    let tx = config.impairments.build_tx(cfg)?;
    let rx = config.impairments.build_rx(cfg)?;

    let mut runs = Vec::new();
    for (ri, &rule) in scenario.rules.iter().enumerate() {
        let mut rng = stream_rng(config.master_seed, streams::RADAR_PAYLOAD, ri as u64);
        let frame = random_frame(rule, cfg, &mut rng)?;

        let transmitted = if scenario.imbalance {
            apply_tx_iq(&frame, &tx)?
        } else {
            frame.clone()
        };
        let faded = Grid::from_fn(cfg.nc, cfg.nsym, |b, m| {
            transmitted.grid.at(b, m) * c.at(b, m)
        });
        let received = if scenario.imbalance {
            apply_rx_iq(&faded, &rx)?
        } else {
            faded
        };

        let mut rdm = compute_rdm(&received, &frame.grid, cfg)?;
        // The edge-subcarrier ridges are a rule-II artifact; median removal
        // defaults to on for that waveform.
        let median_removed = scenario
            .median_removal
            .unwrap_or(rule == DesignRule::RuleII);
        if median_removed {
            rdm = remove_median(&rdm);
        }

        let mut report = detect_peaks_with(&rdm, scenario.threshold_db, scenario.dynamic_range_db)?;
        let predictions: Vec<GhostPrediction> = targets
            .iter()
            .map(|t| predict_ghosts(t, rule, cfg))
            .collect();
        classify_peaks(&mut report, &predictions, 1, cfg.nc, cfg.nsym);
        let floor = estimate_noise_floor(&rdm);

        runs.push(RadarRun {
            rule,
            rdm,
            predictions,
            report: RadarRunReport {
                rule: rule.label().to_string(),
                imbalance: scenario.imbalance,
                median_removed,
                noise_floor_db: floor.db,
                report,
            },
        });
    }
    Ok(runs)
}

/// Write `rdm_<rule>.bin`, `rdm_<rule>.csv` and `report_<rule>.json` into
/// `out_dir`.
pub fn write_radar_outputs(out_dir: &std::path::Path, runs: &[RadarRun]) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    for run in runs {
        let label = run.rule.label();
        let bin = std::fs::File::create(out_dir.join(format!("rdm_{label}.bin")))?;
        crate::radar::write_rdm_binary(std::io::BufWriter::new(bin), &run.rdm)?;
        let csv = std::fs::File::create(out_dir.join(format!("rdm_{label}.csv")))?;
        crate::radar::write_rdm_csv(std::io::BufWriter::new(csv), &run.rdm)?;
        let report = std::fs::File::create(out_dir.join(format!("report_{label}.json")))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(report), &run.report)?;
    }
    Ok(())
}
