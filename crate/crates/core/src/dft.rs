//! Centered DFTs on top of rustfft.
//!
//! `centered_dft` computes `out[k] = sum_m in[m] exp(-+ 2 pi i s(m) s(k) / N)` with
//! `s(i) = i - N/2`. For even N this is a plain FFT wrapped in `(-1)^m` and
//! `(-1)^k (-1)^(N/2)` sign flips.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// Kernel `exp(-2 pi i ...)`.
    Forward,
    /// Kernel `exp(+2 pi i ...)`, unnormalized.
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

#[inline]
fn alt_sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place centered DFT of one even-length slice.
pub(crate) fn centered_dft(data: &mut [Complex64], dir: Direction) {
    let n = data.len();
    debug_assert!(n % 2 == 0);
    for (i, v) in data.iter_mut().enumerate() {
        *v *= alt_sign(i);
    }
    plan(n, dir).process(data);
    let global = alt_sign(n / 2);
    for (i, v) in data.iter_mut().enumerate() {
        *v *= alt_sign(i) * global;
    }
}

/// Centered DFT of every contiguous row of a row-major `rows x cols` array.
pub(crate) fn centered_dft_rows(data: &mut [Complex64], cols: usize, dir: Direction) {
    for row in data.chunks_exact_mut(cols) {
        centered_dft(row, dir);
    }
}

/// Centered DFT along the first axis of a row-major `rows x cols` array.
pub(crate) fn centered_dft_cols(data: &mut [Complex64], rows: usize, cols: usize, dir: Direction) {
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        centered_dft(&mut column, dir);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

/// Plain (uncentered) cyclic FFT, used for periodic convolutions.
pub(crate) fn cyclic_fft(data: &mut [Complex64], dir: Direction) {
    plan(data.len(), dir).process(data);
}
