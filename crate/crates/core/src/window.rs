//! Window functions for the range DFT.

use crate::fft::dft_in_place;
use crate::params::{WindowKind, WindowSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Evaluate a window of length `n` (peak normalized to 1).
pub fn window(spec: &WindowSpec, n: usize) -> Vec<f64> {
    match spec.kind {
        WindowKind::Rectangular => vec![1.0; n],
        WindowKind::Chebyshev => chebyshev_window(n, spec.sidelobe_db),
    }
}

/// Dolph-Chebyshev window with equiripple sidelobes `sidelobe_db` below the
/// mainlobe, synthesized from its frequency-domain samples.
pub fn chebyshev_window(n: usize, sidelobe_db: f64) -> Vec<f64> {
    assert!(n >= 2, "window length must be at least 2");
    let order = (n - 1) as f64;
    let ratio = 10f64.powf(sidelobe_db.abs() / 20.0);
    let beta = (ratio.acosh() / order).cosh();

    // Chebyshev polynomial of degree `order` sampled at beta*cos(pi k / n).
    let mut p: Vec<Complex64> = (0..n)
        .map(|k| {
            let x = beta * (PI * k as f64 / n as f64).cos();
            let t = if x.abs() <= 1.0 {
                (order * x.acos()).cos()
            } else if x > 1.0 {
                (order * x.acosh()).cosh()
            } else {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                sign * (order * (-x).acosh()).cosh()
            };
            Complex64::new(t, 0.0)
        })
        .collect();

    let mut w: Vec<f64> = if n % 2 == 0 {
        // Half-sample phase shift keeps the even-length window symmetric.
        for (k, v) in p.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, PI * k as f64 / n as f64);
        }
        dft_in_place(&mut p);
        let fwd: Vec<f64> = p[1..n / 2 + 1].iter().map(|v| v.re).collect();
        fwd.iter().rev().chain(fwd.iter()).copied().collect()
    } else {
        dft_in_place(&mut p);
        let fwd: Vec<f64> = p[..n.div_ceil(2)].iter().map(|v| v.re).collect();
        fwd[1..].iter().rev().chain(fwd.iter()).copied().collect()
    };
    debug_assert_eq!(w.len(), n);

    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    for v in w.iter_mut() {
        *v /= peak;
    }
    w
}
