//! Desk-scale sweep validating the two ECIR evaluation routes against
//! each other and the zero-padding identity of the matched-decimation
//! case.

use crate::aliasing::{dual_path_error, ecir_from_cir, AliasingConfig};
use crate::experiment::seeds::stream_rng;
use crate::Result;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

pub const ALIAS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct AliasCase {
    pub nc: usize,
    pub mu: usize,
    pub na: usize,
    pub n_f: usize,
    pub max_rel_err: f64,
    /// For matched decimation with a short CIR: largest deviation from
    /// the exact zero-padding identity.
    pub zero_pad_err: Option<f64>,
}

/// Sweep `Nc in {16, 64, 512}`, `mu in {1..4}` and `Na` around `Nc/mu`,
/// exercising both the Dirac-kernel and windowed-kernel regimes.
pub fn run_alias_check(master_seed: u64) -> Result<Vec<AliasCase>> {
    let mut cases = Vec::new();
    let mut counter = 0u64;
    for &nc in &[16usize, 64, 512] {
        for mu in 1usize..=4 {
            let matched = nc / mu;
            for na in [matched.saturating_sub(1), matched, matched + 1] {
                if na < 2 || mu * (na - 1) >= nc {
                    continue;
                }
                for n_f in [na / 2, na, (2 * na).min(nc)] {
                    if n_f == 0 || n_f > nc {
                        continue;
                    }
                    let Ok(cfg) = AliasingConfig::new(nc, mu, na, n_f) else {
                        continue;
                    };
                    let mut rng = stream_rng(master_seed, 0xA11A5, counter);
                    counter += 1;
                    let f: Vec<Complex64> = (0..n_f)
                        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                        .collect();
                    let max_rel_err = dual_path_error(&f, &cfg)?;
                    let zero_pad_err = if nc / mu == na && nc % mu == 0 && n_f <= na {
                        let g = ecir_from_cir(&f, &cfg)?;
                        let mut worst = 0.0f64;
                        for (n, gv) in g.iter().enumerate() {
                            let want = if n < n_f {
                                f[n]
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            worst = worst.max((gv - want).norm());
                        }
                        Some(worst)
                    } else {
                        None
                    };
                    cases.push(AliasCase {
                        nc,
                        mu,
                        na,
                        n_f,
                        max_rel_err,
                        zero_pad_err,
                    });
                }
            }
        }
    }
    Ok(cases)
}

/// Worst dual-path error over the sweep.
pub fn worst_error(cases: &[AliasCase]) -> f64 {
    cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max)
}

pub fn all_within_tolerance(cases: &[AliasCase]) -> bool {
    cases.iter().all(|c| {
        c.max_rel_err < ALIAS_TOLERANCE && c.zero_pad_err.map_or(true, |e| e < ALIAS_TOLERANCE)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_covers_both_kernel_regimes() {
        let cases = run_alias_check(1).unwrap();
        assert!(cases
            .iter()
            .any(|c| c.nc / c.mu == c.na && c.nc % c.mu == 0));
        assert!(cases
            .iter()
            .any(|c| c.nc / c.mu != c.na || c.nc % c.mu != 0));
        assert!(cases.iter().any(|c| c.zero_pad_err.is_some()));
        assert!(
            all_within_tolerance(&cases),
            "worst {}",
            worst_error(&cases)
        );
    }
}
