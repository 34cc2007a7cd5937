//! DFT helpers with the normalization convention shared by every module:
//! the forward DFT is unnormalized and the inverse DFT carries the `1/N`
//! factor.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT, `X_k = sum_n x_n e^{-j2pi kn/N}` (no scaling).
pub fn dft_in_place(buf: &mut [Complex64]) {
    if buf.len() < 2 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse DFT, `x_n = (1/N) sum_k X_k e^{+j2pi kn/N}`.
pub fn idft_in_place(buf: &mut [Complex64]) {
    if buf.len() < 2 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Forward DFT into a new vector.
pub fn dft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    dft_in_place(&mut buf);
    buf
}

/// Inverse DFT into a new vector.
pub fn idft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    idft_in_place(&mut buf);
    buf
}
