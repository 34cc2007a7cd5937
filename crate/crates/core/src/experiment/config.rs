//! JSON-backed experiment configuration with bundled defaults matching
//! the reference simulation setup.

use crate::channel::{ChannelProfile, RadarTarget};
use crate::comm::{ChannelKnowledge, CpeMode};
use crate::impairments::{
    branch_filter_response, compose, fi_coefficients, fs_coefficients, presets, BranchFilterSpec,
    IqProfile, Side,
};
use crate::params::SystemConfig;
use crate::waveform::DesignRule;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One imbalance stage: explicit complex literals, an (epsilon, phi)
/// mismatch pair, or a branch-filter pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StageConfig {
    Literal {
        /// [re, im]
        alpha: [f64; 2],
        beta: [f64; 2],
    },
    Mismatch {
        epsilon: f64,
        phi_deg: f64,
    },
    Filters {
        filter_i: BranchFilterSpec,
        filter_q: BranchFilterSpec,
    },
}

impl StageConfig {
    pub fn build(&self, side: Side, cfg: &SystemConfig) -> Result<IqProfile> {
        match self {
            StageConfig::Literal { alpha, beta } => Ok(IqProfile::frequency_independent(
                Complex64::new(alpha[0], alpha[1]),
                Complex64::new(beta[0], beta[1]),
                cfg.nc,
                side,
            )),
            StageConfig::Mismatch { epsilon, phi_deg } => {
                let (a, b) = fi_coefficients(*epsilon, phi_deg.to_radians());
                Ok(IqProfile::frequency_independent(a, b, cfg.nc, side))
            }
            StageConfig::Filters { filter_i, filter_q } => {
                let h_i = branch_filter_response(filter_i, cfg)?;
                let h_q = branch_filter_response(filter_q, cfg)?;
                fs_coefficients(&h_i, &h_q, side)
            }
        }
    }
}

/// Imbalance stage lists, applied in order (the bundled receiver default
/// is FI first, then the frequency-selective filter stage).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImbalanceConfig {
    pub tx: Vec<StageConfig>,
    pub rx: Vec<StageConfig>,
}

impl Default for ImbalanceConfig {
    fn default() -> Self {
        let (at, bt) = presets::tx_fi();
        let (ar, br) = presets::rx_fi();
        let (fi, fq) = presets::rx_branch_filters();
        Self {
            tx: vec![StageConfig::Literal {
                alpha: [at.re, at.im],
                beta: [bt.re, bt.im],
            }],
            rx: vec![
                StageConfig::Literal {
                    alpha: [ar.re, ar.im],
                    beta: [br.re, br.im],
                },
                StageConfig::Filters {
                    filter_i: fi,
                    filter_q: fq,
                },
            ],
        }
    }
}

impl ImbalanceConfig {
    /// Frequency-independent stages only (drops filter stages).
    pub fn fi_only(&self) -> Self {
        let keep = |stages: &[StageConfig]| {
            stages
                .iter()
                .filter(|s| !matches!(s, StageConfig::Filters { .. }))
                .cloned()
                .collect()
        };
        Self {
            tx: keep(&self.tx),
            rx: keep(&self.rx),
        }
    }

    pub fn build_tx(&self, cfg: &SystemConfig) -> Result<IqProfile> {
        build_chain(&self.tx, Side::Tx, cfg)
    }

    pub fn build_rx(&self, cfg: &SystemConfig) -> Result<IqProfile> {
        build_chain(&self.rx, Side::Rx, cfg)
    }
}

fn build_chain(stages: &[StageConfig], side: Side, cfg: &SystemConfig) -> Result<IqProfile> {
    let mut profile = IqProfile::identity(cfg.nc, side);
    for stage in stages {
        profile = compose(&profile, &stage.build(side, cfg)?)?;
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TargetConfig {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub amplitude_db: f64,
}

impl TargetConfig {
    pub fn to_target(self) -> RadarTarget {
        RadarTarget::from_db(self.range_m, self.velocity_mps, self.amplitude_db)
    }
}

/// Radar scene and detection settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadarScenarioConfig {
    pub targets: Vec<TargetConfig>,
    #[serde(default = "all_rules")]
    pub rules: Vec<DesignRule>,
    #[serde(default = "default_true")]
    pub imbalance: bool,
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default = "default_dynamic_range")]
    pub dynamic_range_db: f64,
    /// Median ridge removal; defaults to on for rule II only.
    #[serde(default)]
    pub median_removal: Option<bool>,
}

fn all_rules() -> Vec<DesignRule> {
    vec![DesignRule::Standard, DesignRule::RuleI, DesignRule::RuleII]
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    crate::radar::DEFAULT_THRESHOLD_DB
}

fn default_dynamic_range() -> f64 {
    crate::radar::DEFAULT_DYNAMIC_RANGE_DB
}

impl Default for RadarScenarioConfig {
    fn default() -> Self {
        // Two objects plus a strong near-zero-range crosstalk.
        Self {
            targets: vec![
                TargetConfig {
                    range_m: 10.0,
                    velocity_mps: 50.0,
                    amplitude_db: 0.0,
                },
                TargetConfig {
                    range_m: 20.0,
                    velocity_mps: -20.0,
                    amplitude_db: 0.0,
                },
                TargetConfig {
                    range_m: 0.1,
                    velocity_mps: 0.0,
                    amplitude_db: 30.0,
                },
            ],
            rules: all_rules(),
            imbalance: true,
            threshold_db: default_threshold(),
            dynamic_range_db: default_dynamic_range(),
            median_removal: None,
        }
    }
}

/// Communication link model settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkConfig {
    pub n_f: usize,
    pub decay_taps: f64,
    pub k_factor_db: f64,
    /// Relative velocities are uniform in [-v, v].
    pub velocity_range_mps: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            n_f: 256,
            decay_taps: 50.0,
            k_factor_db: 10.0,
            velocity_range_mps: 60.0,
        }
    }
}

/// One BER curve: imbalance on/off and the receiver knowledge condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionConfig {
    pub imbalance: bool,
    pub channel: ChannelKnowledge,
    pub cpe: CpeMode,
}

impl ConditionConfig {
    pub fn label(&self) -> String {
        let bal = if self.imbalance { "imb" } else { "bal" };
        let ch = match self.channel {
            ChannelKnowledge::Perfect => "perfchan",
            ChannelKnowledge::Estimated => "estchan",
        };
        let cpe = match self.cpe {
            CpeMode::Perfect => "perfcpe",
            CpeMode::Pilot => "pilotcpe",
        };
        format!("{bal}-{ch}-{cpe}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BerConfig {
    pub ebn0_db: Vec<f64>,
    pub channels: usize,
    #[serde(default = "all_rules")]
    pub rules: Vec<DesignRule>,
    #[serde(default = "default_conditions")]
    pub conditions: Vec<ConditionConfig>,
    /// Override the per-rule preamble count (mainly for reduced test
    /// systems).
    #[serde(default)]
    pub n_pr_override: Option<usize>,
    /// Override the per-rule pilot count.
    #[serde(default)]
    pub n_p_override: Option<usize>,
}

fn default_conditions() -> Vec<ConditionConfig> {
    vec![
        ConditionConfig {
            imbalance: false,
            channel: ChannelKnowledge::Perfect,
            cpe: CpeMode::Perfect,
        },
        ConditionConfig {
            imbalance: true,
            channel: ChannelKnowledge::Perfect,
            cpe: CpeMode::Perfect,
        },
        ConditionConfig {
            imbalance: true,
            channel: ChannelKnowledge::Estimated,
            cpe: CpeMode::Perfect,
        },
    ]
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            ebn0_db: (0..=12).map(f64::from).collect(),
            channels: 200,
            rules: all_rules(),
            conditions: default_conditions(),
            n_pr_override: None,
            n_p_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PaprConfig {
    /// OFDM symbols per waveform.
    pub symbols: usize,
    #[serde(default = "all_rules")]
    pub rules: Vec<DesignRule>,
    pub threshold_min_db: f64,
    pub threshold_max_db: f64,
    pub threshold_step_db: f64,
}

impl Default for PaprConfig {
    fn default() -> Self {
        Self {
            symbols: 20_000,
            rules: all_rules(),
            threshold_min_db: 4.0,
            threshold_max_db: 16.0,
            threshold_step_db: 0.05,
        }
    }
}

impl PaprConfig {
    pub fn thresholds(&self) -> Vec<f64> {
        let n = ((self.threshold_max_db - self.threshold_min_db) / self.threshold_step_db).round()
            as usize;
        (0..=n)
            .map(|i| self.threshold_min_db + i as f64 * self.threshold_step_db)
            .collect()
    }
}

/// Top-level experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "SystemConfig::default_burst")]
    pub system: SystemConfig,
    #[serde(default)]
    pub impairments: ImbalanceConfig,
    #[serde(default)]
    pub scenario: RadarScenarioConfig,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub ber: BerConfig,
    #[serde(default)]
    pub papr: PaprConfig,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

fn default_seed() -> u64 {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default_burst(),
            impairments: ImbalanceConfig::default(),
            scenario: RadarScenarioConfig::default(),
            link: LinkConfig::default(),
            ber: BerConfig::default(),
            papr: PaprConfig::default(),
            master_seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// CIR model for trial `index`: LOS and NLOS channels alternate.
    pub fn cir_model(&self, index: u64) -> crate::channel::CirModel {
        crate::channel::CirModel {
            profile: if index % 2 == 0 {
                ChannelProfile::Los
            } else {
                ChannelProfile::Nlos
            },
            n_f: self.link.n_f,
            decay_taps: self.link.decay_taps,
            k_factor_db: self.link.k_factor_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.link.n_f > self.system.nc {
            return Err(Error::InvalidConfig(
                "link CIR length exceeds the subcarrier count".into(),
            ));
        }
        Ok(())
    }
}
