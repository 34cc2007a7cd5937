//! System parameterization, subcarrier indexing conventions, and the
//! derived unambiguous radar limits shared by every processing module.
//!
//! Subcarriers are indexed `-Nc/2 <= k < Nc/2` with DC at `k = 0`; storage
//! everywhere is DFT bin order via [`k_to_bin`] so that IDFT/DFT calls stay
//! conventional.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Speed of light in m/s.
pub const C0: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Chebyshev,
    Rectangular,
}

/// Window applied on the range (subcarrier) axis of the RDM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    /// Sidelobe suppression in dB (ignored for rectangular windows).
    #[serde(default = "default_sidelobe_db")]
    pub sidelobe_db: f64,
}

fn default_sidelobe_db() -> f64 {
    120.0
}

impl WindowSpec {
    pub fn chebyshev(sidelobe_db: f64) -> Self {
        Self {
            kind: WindowKind::Chebyshev,
            sidelobe_db,
        }
    }

    pub fn rectangular() -> Self {
        Self {
            kind: WindowKind::Rectangular,
            sidelobe_db: 0.0,
        }
    }
}

/// OFDM burst parameterization.
///
/// JSON field names follow the symbol names (`Nc`, `Nsym`, `B`, `fc`,
/// `Tcp`, `Ncp`); `Ncp` may be omitted and defaults to `round(Tcp * B)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Number of subcarriers (even).
    #[serde(rename = "Nc")]
    pub nc: usize,
    /// Number of OFDM symbols per burst (even).
    #[serde(rename = "Nsym")]
    pub nsym: usize,
    /// Bandwidth in Hz.
    #[serde(rename = "B")]
    pub bandwidth_hz: f64,
    /// Carrier frequency in Hz.
    #[serde(rename = "fc")]
    pub carrier_hz: f64,
    /// Cyclic prefix duration in seconds.
    #[serde(rename = "Tcp")]
    pub tcp_s: f64,
    /// Cyclic prefix length in samples.
    #[serde(rename = "Ncp")]
    pub ncp: usize,
    pub window: WindowSpec,
}

#[derive(Deserialize)]
struct RawSystemConfig {
    #[serde(rename = "Nc")]
    nc: usize,
    #[serde(rename = "Nsym")]
    nsym: usize,
    #[serde(rename = "B")]
    bandwidth_hz: f64,
    #[serde(rename = "fc")]
    carrier_hz: f64,
    #[serde(rename = "Tcp")]
    tcp_s: f64,
    #[serde(rename = "Ncp")]
    ncp: Option<usize>,
    window: Option<WindowSpec>,
}

impl<'de> Deserialize<'de> for SystemConfig {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawSystemConfig::deserialize(deserializer)?;
        let ncp = raw
            .ncp
            .unwrap_or_else(|| (raw.tcp_s * raw.bandwidth_hz).round() as usize);
        let cfg = SystemConfig {
            nc: raw.nc,
            nsym: raw.nsym,
            bandwidth_hz: raw.bandwidth_hz,
            carrier_hz: raw.carrier_hz,
            tcp_s: raw.tcp_s,
            ncp,
            window: raw.window.unwrap_or_else(|| WindowSpec::chebyshev(120.0)),
        };
        cfg.validate().map_err(serde::de::Error::custom)?;
        Ok(cfg)
    }
}

impl SystemConfig {
    pub fn new(
        nc: usize,
        nsym: usize,
        bandwidth_hz: f64,
        carrier_hz: f64,
        tcp_s: f64,
        window: WindowSpec,
    ) -> Result<Self> {
        let cfg = Self {
            nc,
            nsym,
            bandwidth_hz,
            carrier_hz,
            tcp_s,
            ncp: (tcp_s * bandwidth_hz).round() as usize,
            window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reference burst parameterization: Nc = 512, Nsym = 256, B = 1 GHz,
    /// fc = 77 GHz, Tcp = 0.5 us (Ncp = 500), Chebyshev 120 dB range window.
    pub fn default_burst() -> Self {
        Self::new(512, 256, 1e9, 77e9, 0.5e-6, WindowSpec::chebyshev(120.0))
            .expect("default configuration is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.nc == 0 || self.nc % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "Nc must be a positive even integer, got {}",
                self.nc
            )));
        }
        if self.nsym == 0 || self.nsym % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "Nsym must be a positive even integer, got {}",
                self.nsym
            )));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(Error::InvalidConfig(
                "bandwidth and carrier frequency must be positive".into(),
            ));
        }
        if self.tcp_s < 0.0 {
            return Err(Error::InvalidConfig("Tcp must be non-negative".into()));
        }
        let expected_ncp = (self.tcp_s * self.bandwidth_hz).round() as usize;
        if self.ncp != expected_ncp {
            return Err(Error::InvalidConfig(format!(
                "Ncp = {} inconsistent with round(Tcp*B) = {}",
                self.ncp, expected_ncp
            )));
        }
        Ok(())
    }

    /// Subcarrier spacing `delta_f = B / Nc` in Hz.
    pub fn delta_f(&self) -> f64 {
        self.bandwidth_hz / self.nc as f64
    }

    /// OFDM core symbol duration `T = 1 / delta_f`, so `delta_f * T == 1`
    /// holds exactly in the stored representation.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.delta_f()
    }

    /// Sample duration `Ts = 1 / B`.
    pub fn sample_duration(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    /// Samples per CP-extended OFDM symbol.
    pub fn symbol_len(&self) -> usize {
        self.nc + self.ncp
    }

    /// Samples per burst.
    pub fn burst_len(&self) -> usize {
        self.symbol_len() * self.nsym
    }

    /// CP-extended symbol duration `T + Tcp`.
    pub fn extended_symbol_duration(&self) -> f64 {
        self.symbol_duration() + self.tcp_s
    }
}

/// Validated subcarrier index with `-Nc/2 <= k < Nc/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubcarrierIndex(i64);

impl SubcarrierIndex {
    pub fn new(k: i64, nc: usize) -> Result<Self> {
        let half = nc as i64 / 2;
        if k < -half || k >= half {
            return Err(Error::SubcarrierOutOfRange { k, nc });
        }
        Ok(Self(k))
    }

    pub fn k(&self) -> i64 {
        self.0
    }

    pub fn bin(&self, nc: usize) -> usize {
        k_to_bin(self.0, nc).expect("validated index")
    }
}

/// Map a symmetric subcarrier index `k` to its DFT storage bin `k mod Nc`.
pub fn k_to_bin(k: i64, nc: usize) -> Result<usize> {
    let half = nc as i64 / 2;
    if k < -half || k >= half {
        return Err(Error::SubcarrierOutOfRange { k, nc });
    }
    Ok(k.rem_euclid(nc as i64) as usize)
}

/// Inverse of [`k_to_bin`].
pub fn bin_to_k(bin: usize, nc: usize) -> Result<i64> {
    if bin >= nc {
        return Err(Error::SubcarrierOutOfRange { k: bin as i64, nc });
    }
    let b = bin as i64;
    Ok(if b < nc as i64 / 2 { b } else { b - nc as i64 })
}

/// Maximum unambiguous range and velocity of the range-Doppler map:
/// `r_max = c0 Nc / (2B)` and `v_max = c0 / (4 fc (T + Tcp))`.
pub fn unambiguous_limits(cfg: &SystemConfig) -> (f64, f64) {
    let r_max = C0 * cfg.nc as f64 / (2.0 * cfg.bandwidth_hz);
    let v_max = C0 / (4.0 * cfg.carrier_hz * cfg.extended_symbol_duration());
    (r_max, v_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bin_mapping_examples() {
        assert_eq!(k_to_bin(0, 512).unwrap(), 0);
        assert_eq!(k_to_bin(-256, 512).unwrap(), 256);
        assert_eq!(k_to_bin(-1, 512).unwrap(), 511);
        assert_eq!(k_to_bin(255, 512).unwrap(), 255);
        assert!(k_to_bin(256, 512).is_err());
        assert!(k_to_bin(-257, 512).is_err());
    }

    #[test]
    fn spacing_times_duration_is_exactly_one() {
        for cfg in [
            SystemConfig::default_burst(),
            SystemConfig::new(1024, 256, 1e9, 76.6e9, 1e-6, WindowSpec::chebyshev(120.0)).unwrap(),
            SystemConfig::new(16, 4, 20e6, 5.9e9, 0.0, WindowSpec::rectangular()).unwrap(),
        ] {
            assert_eq!(cfg.delta_f() * cfg.symbol_duration(), 1.0);
        }
    }

    #[test]
    fn default_burst_matches_expected_parameters() {
        let cfg = SystemConfig::default_burst();
        assert_eq!(cfg.nc, 512);
        assert_eq!(cfg.nsym, 256);
        assert_eq!(cfg.ncp, 500);
        assert!((cfg.symbol_duration() - 0.512e-6).abs() < 1e-18);
    }

    #[test]
    fn unambiguous_limits_default_burst() {
        let cfg = SystemConfig::default_burst();
        let (r_max, v_max) = unambiguous_limits(&cfg);
        // Desk-scale references use c0 = 3e8; the exact constant differs by ~0.07%.
        assert!((r_max - 76.8).abs() / 76.8 < 1e-3, "r_max = {r_max}");
        assert!((v_max - 962.6).abs() / 962.6 < 1.5e-3, "v_max = {v_max}");
    }

    #[test]
    fn unambiguous_limits_wideband_1024() {
        let cfg =
            SystemConfig::new(1024, 256, 1e9, 76.6e9, 1e-6, WindowSpec::chebyshev(120.0)).unwrap();
        let (r_max, _) = unambiguous_limits(&cfg);
        assert!((r_max - 153.6).abs() / 153.6 < 1e-3, "r_max = {r_max}");
    }

    #[test]
    fn limits_scale_with_parameters() {
        let base = SystemConfig::default_burst();
        let doubled_nc = SystemConfig::new(1024, 256, 1e9, 77e9, 0.5e-6, base.window).unwrap();
        let (r1, _) = unambiguous_limits(&base);
        let (r2, _) = unambiguous_limits(&doubled_nc);
        assert!((r2 / r1 - 2.0).abs() < 1e-12);

        // Doubling (T + Tcp) halves v_max.
        let (_, v1) = unambiguous_limits(&base);
        let stretched = SystemConfig::new(
            512,
            256,
            1e9,
            77e9,
            base.extended_symbol_duration() + base.tcp_s,
            base.window,
        )
        .unwrap();
        let (_, v2) = unambiguous_limits(&stretched);
        assert!((v1 / v2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn config_json_round_trip_with_named_fields() {
        let json = r#"{"Nc":512,"Nsym":256,"B":1e9,"fc":77e9,"Tcp":5e-7,
                       "window":{"kind":"chebyshev","sidelobe_db":120.0}}"#;
        let cfg: SystemConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.ncp, 500);
        assert_eq!(cfg, SystemConfig::default_burst());
    }

    #[test]
    fn odd_nc_rejected() {
        assert!(SystemConfig::new(511, 256, 1e9, 77e9, 0.5e-6, WindowSpec::rectangular()).is_err());
        assert!(SystemConfig::new(512, 255, 1e9, 77e9, 0.5e-6, WindowSpec::rectangular()).is_err());
    }

    proptest! {
        #[test]
        fn bin_round_trip(nc_half in 1usize..1024, offset in 0usize..2048) {
            let nc = nc_half * 2;
            let k = (offset % nc) as i64 - nc as i64 / 2;
            let bin = k_to_bin(k, nc).unwrap();
            prop_assert_eq!(bin_to_k(bin, nc).unwrap(), k);
        }
    }
}
