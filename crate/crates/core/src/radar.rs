//! Range-Doppler map computation, ridge removal, noise-floor estimation,
//! peak detection, and ghost-location prediction per waveform rule.
//!
//! The processing chain divides the received grid element-wise by the
//! transmitted grid, windows the subcarrier axis, applies an IDFT over
//! subcarriers (range) and a DFT over symbols (velocity).

use crate::grid::Grid;
use crate::params::{bin_to_k, unambiguous_limits, SystemConfig, WindowKind, WindowSpec};
use crate::waveform::DesignRule;
use crate::window::window;
use crate::{fft, Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Default detection threshold above the estimated noise floor.
pub const DEFAULT_THRESHOLD_DB: f64 = 12.0;
/// Default reporting span below the strongest peak. Deterministic window
/// sidelobes of strong scatterers sit far below real responses, so the
/// guard separates them without a CFAR stage.
pub const DEFAULT_DYNAMIC_RANGE_DB: f64 = 60.0;

/// Nc x Nsym range-velocity matrix with axis metadata.
#[derive(Debug, Clone)]
pub struct RangeDopplerMap {
    /// Rows are range bins, columns velocity bins.
    pub values: Grid,
    /// Meters per range bin (`r_max / Nc`).
    pub range_bin_m: f64,
    /// Meters/second per velocity bin (`2 v_max / Nsym`).
    pub velocity_bin_mps: f64,
    /// True when a non-rectangular range window was applied.
    pub windowed: bool,
}

impl RangeDopplerMap {
    pub fn n_range(&self) -> usize {
        self.values.rows()
    }

    pub fn n_velocity(&self) -> usize {
        self.values.cols()
    }

    pub fn power(&self, range_bin: usize, velocity_bin: usize) -> f64 {
        self.values.at(range_bin, velocity_bin).norm_sqr()
    }
}

/// Optional Doppler-axis window (the range window comes from the system
/// config; the Doppler axis defaults to rectangular).
#[derive(Debug, Clone, Copy, Default)]
pub struct RdmOptions {
    pub doppler_window: Option<WindowSpec>,
}

/// `Z = Y ./ S`, range window, IDFT over subcarriers, DFT over symbols.
pub fn compute_rdm(
    received: &Grid,
    transmitted: &Grid,
    cfg: &SystemConfig,
) -> Result<RangeDopplerMap> {
    compute_rdm_with(received, transmitted, cfg, &RdmOptions::default())
}

pub fn compute_rdm_with(
    received: &Grid,
    transmitted: &Grid,
    cfg: &SystemConfig,
    opts: &RdmOptions,
) -> Result<RangeDopplerMap> {
    if received.rows() != cfg.nc
        || received.cols() != cfg.nsym
        || transmitted.rows() != cfg.nc
        || transmitted.cols() != cfg.nsym
    {
        return Err(Error::DimensionMismatch(
            "received/transmitted grids must be Nc x Nsym".into(),
        ));
    }
    for m in 0..cfg.nsym {
        for (bin, v) in transmitted.col(m).iter().enumerate() {
            if v.norm_sqr() == 0.0 {
                return Err(Error::ZeroTransmitSymbol { bin, symbol: m });
            }
        }
    }

    // Range window indexed by subcarrier k (peak at DC, taper at +-Nc/2).
    let w = window(&cfg.window, cfg.nc);
    let w_bin: Vec<f64> = (0..cfg.nc)
        .map(|bin| {
            let k = bin_to_k(bin, cfg.nc).expect("bin valid");
            w[(k + cfg.nc as i64 / 2) as usize]
        })
        .collect();
    let w_dopp = opts.doppler_window.map(|spec| window(&spec, cfg.nsym));

    let mut z = Grid::zeros(cfg.nc, cfg.nsym);
    for m in 0..cfg.nsym {
        let y = received.col(m);
        let s = transmitted.col(m);
        let dst = z.col_mut(m);
        let dop = w_dopp.as_ref().map_or(1.0, |wd| wd[m]);
        for bin in 0..cfg.nc {
            dst[bin] = y[bin] / s[bin] * (w_bin[bin] * dop);
        }
        fft::idft_in_place(dst);
    }
    let mut row = vec![Complex64::new(0.0, 0.0); cfg.nsym];
    for r in 0..cfg.nc {
        z.row_copy(r, &mut row);
        fft::dft_in_place(&mut row);
        z.set_row(r, &row);
    }

    let (r_max, v_max) = unambiguous_limits(cfg);
    Ok(RangeDopplerMap {
        values: z,
        range_bin_m: r_max / cfg.nc as f64,
        velocity_bin_mps: 2.0 * v_max / cfg.nsym as f64,
        windowed: cfg.window.kind != WindowKind::Rectangular,
    })
}

fn median_of(mut v: Vec<f64>) -> f64 {
    let n = v.len();
    let (_, mid, _) = v.select_nth_unstable_by(n / 2, |a, b| a.partial_cmp(b).unwrap());
    *mid
}

/// Subtract component-wise complex medians from each velocity bin's range
/// column, removing the edge-subcarrier ridges while leaving isolated
/// peaks essentially untouched.
///
/// Medians are taken separately over even- and odd-indexed range entries:
/// the DC-subcarrier ridge is range-constant, while the ridge of the
/// most-negative subcarrier survives the range window as a weak
/// range-alternating component that a single column median cannot reach.
pub fn remove_median(rdm: &RangeDopplerMap) -> RangeDopplerMap {
    let mut out = rdm.clone();
    for v in 0..rdm.n_velocity() {
        let col = rdm.values.col(v);
        for parity in 0..2usize {
            let entries: Vec<Complex64> = col.iter().skip(parity).step_by(2).copied().collect();
            let med = Complex64::new(
                median_of(entries.iter().map(|c| c.re).collect()),
                median_of(entries.iter().map(|c| c.im).collect()),
            );
            for c in out.values.col_mut(v).iter_mut().skip(parity).step_by(2) {
                *c -= med;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFloor {
    pub linear: f64,
    pub db: f64,
}

/// Median of `|Z|^2` over all bins, as linear power and dB.
pub fn estimate_noise_floor(rdm: &RangeDopplerMap) -> NoiseFloor {
    let linear = median_of(rdm.values.as_slice().iter().map(|v| v.norm_sqr()).collect());
    NoiseFloor {
        linear,
        db: 10.0 * linear.max(f64::MIN_POSITIVE).log10(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakClass {
    /// Consistent with a real object (or not yet classified).
    RealCandidate,
    /// Matches a predicted imbalance ghost location.
    GhostPredicted,
    /// Flat along range: an edge-subcarrier ridge artifact.
    Ridge,
    /// Above threshold but matching no prediction.
    Unexpected,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Peak {
    pub range_bin: usize,
    pub velocity_bin: usize,
    pub magnitude_db: f64,
    pub classification: PeakClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub noise_floor_db: f64,
    pub threshold_db: f64,
}

/// Local maxima (8-neighborhood, both axes cyclic) at least
/// `threshold_db` above the noise floor, reported within
/// `DEFAULT_DYNAMIC_RANGE_DB` of the strongest peak.
pub fn detect_peaks(rdm: &RangeDopplerMap, threshold_db: f64) -> Result<PeakReport> {
    detect_peaks_with(rdm, threshold_db, DEFAULT_DYNAMIC_RANGE_DB)
}

pub fn detect_peaks_with(
    rdm: &RangeDopplerMap,
    threshold_db: f64,
    dynamic_range_db: f64,
) -> Result<PeakReport> {
    if !(threshold_db > 0.0) {
        return Err(Error::InvalidInput("threshold must be positive dB".into()));
    }
    let floor = estimate_noise_floor(rdm);
    let nr = rdm.n_range();
    let nv = rdm.n_velocity();
    let gate = floor.linear * 10f64.powf(threshold_db / 10.0);

    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for r in 0..nr {
        for v in 0..nv {
            let p = rdm.power(r, v);
            if p < gate || p == 0.0 {
                continue;
            }
            let mut is_max = true;
            'nbr: for dr in [-1i64, 0, 1] {
                for dv in [-1i64, 0, 1] {
                    if dr == 0 && dv == 0 {
                        continue;
                    }
                    let rr = (r as i64 + dr).rem_euclid(nr as i64) as usize;
                    let vv = (v as i64 + dv).rem_euclid(nv as i64) as usize;
                    if rdm.power(rr, vv) >= p {
                        is_max = false;
                        break 'nbr;
                    }
                }
            }
            if is_max {
                candidates.push((r, v, p));
            }
        }
    }

    let max_p = candidates.iter().map(|c| c.2).fold(0.0f64, f64::max);
    let span_gate = max_p * 10f64.powf(-dynamic_range_db / 10.0);
    let mut peaks: Vec<Peak> = candidates
        .into_iter()
        .filter(|c| c.2 >= span_gate)
        .map(|(r, v, p)| {
            // A peak barely above its column median sits on a flat ridge.
            let col_med = median_of(rdm.values.col(v).iter().map(|c| c.norm_sqr()).collect());
            let class = if p <= col_med * 10f64.powf(6.0 / 10.0) {
                PeakClass::Ridge
            } else {
                PeakClass::RealCandidate
            };
            Peak {
                range_bin: r,
                velocity_bin: v,
                magnitude_db: 10.0 * p.log10(),
                classification: class,
            }
        })
        .collect();
    peaks.sort_by(|a, b| b.magnitude_db.partial_cmp(&a.magnitude_db).unwrap());
    Ok(PeakReport {
        peaks,
        noise_floor_db: floor.db,
        threshold_db,
    })
}

/// Expected RDM response locations for one target under a waveform rule,
/// assuming frequency-independent imbalance in both transmitter and
/// receiver (up to three ghosts per object).
#[derive(Debug, Clone, PartialEq)]
pub struct GhostPrediction {
    /// Bin of the real object (always `bins[0]`).
    pub real: (usize, usize),
    /// Deduplicated expected locations: real object first, ghosts after.
    pub bins: Vec<(usize, usize)>,
    /// True when image leakage raises the floor instead of forming ghosts.
    pub raised_floor: bool,
}

pub fn predict_ghosts(
    target: &crate::channel::RadarTarget,
    rule: DesignRule,
    cfg: &SystemConfig,
) -> GhostPrediction {
    let (rb_f, vb_f) = crate::channel::target_bins(target, cfg);
    let nc = cfg.nc as f64;
    let nsym = cfg.nsym as f64;
    let rb = |x: f64| (x.rem_euclid(nc).round() as usize) % cfg.nc;
    let vb = |x: f64| (x.rem_euclid(nsym).round() as usize) % cfg.nsym;
    let real = (rb(rb_f), vb(vb_f));

    let raw: Vec<(f64, f64)> = match rule {
        DesignRule::Standard => vec![(rb_f, vb_f), (rb_f, -vb_f)],
        DesignRule::RuleI => vec![
            (rb_f, vb_f),
            (rb_f + nc / 2.0, vb_f),
            (rb_f + nc / 2.0, -vb_f),
            (rb_f, -vb_f),
        ],
        DesignRule::RuleII => vec![
            (rb_f, vb_f),
            (rb_f, vb_f + nsym / 2.0),
            (rb_f, -vb_f + nsym / 2.0),
            (rb_f, -vb_f),
        ],
    };
    let mut bins = Vec::new();
    for (r, v) in raw {
        let b = (rb(r), vb(v));
        if !bins.contains(&b) {
            bins.push(b);
        }
    }
    GhostPrediction {
        real,
        bins,
        raised_floor: rule == DesignRule::Standard,
    }
}

/// Circular bin distance.
pub fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = (a as i64 - b as i64).rem_euclid(n as i64) as usize;
    d.min(n - d)
}

/// Classify detected peaks against ghost predictions: within `tol` bins of
/// a real-object bin they stay [`PeakClass::RealCandidate`], within `tol`
/// of a ghost they become [`PeakClass::GhostPredicted`]; ridge-flagged
/// peaks keep their flag; everything else is [`PeakClass::Unexpected`].
pub fn classify_peaks(
    report: &mut PeakReport,
    predictions: &[GhostPrediction],
    tol: usize,
    nc: usize,
    nsym: usize,
) {
    for peak in report.peaks.iter_mut() {
        if peak.classification == PeakClass::Ridge {
            continue;
        }
        let mut class = PeakClass::Unexpected;
        'outer: for pred in predictions {
            for (i, &(r, v)) in pred.bins.iter().enumerate() {
                if circular_distance(peak.range_bin, r, nc) <= tol
                    && circular_distance(peak.velocity_bin, v, nsym) <= tol
                {
                    class = if (r, v) == pred.real && i == 0 {
                        PeakClass::RealCandidate
                    } else {
                        PeakClass::GhostPredicted
                    };
                    break 'outer;
                }
            }
        }
        peak.classification = class;
    }
}

/// Binary RDM dump: 32-byte header (magic `RDM1`, u32 LE Nc, u32 LE Nsym,
/// 20 reserved zero bytes) followed by row-major complex64 samples
/// (f32 re, f32 im per bin).
pub fn write_rdm_binary(mut w: impl Write, rdm: &RangeDopplerMap) -> Result<()> {
    let mut header = [0u8; 32];
    header[..4].copy_from_slice(b"RDM1");
    header[4..8].copy_from_slice(&(rdm.n_range() as u32).to_le_bytes());
    header[8..12].copy_from_slice(&(rdm.n_velocity() as u32).to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(rdm.n_velocity() * 8);
    for r in 0..rdm.n_range() {
        buf.clear();
        for v in 0..rdm.n_velocity() {
            let z = rdm.values.at(r, v);
            buf.extend_from_slice(&(z.re as f32).to_le_bytes());
            buf.extend_from_slice(&(z.im as f32).to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// CSV dump: `range_bin,velocity_bin,magnitude_db`.
pub fn write_rdm_csv(mut w: impl Write, rdm: &RangeDopplerMap) -> Result<()> {
    writeln!(w, "range_bin,velocity_bin,magnitude_db")?;
    for r in 0..rdm.n_range() {
        for v in 0..rdm.n_velocity() {
            let p = rdm.power(r, v).max(f64::MIN_POSITIVE);
            writeln!(w, "{r},{v},{:.4}", 10.0 * p.log10())?;
        }
    }
    Ok(())
}
