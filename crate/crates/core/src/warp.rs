//! The change of variables that turns the partial inverse transform of a symbol
//! into an operator kernel.
//!
//! For a spatial field `G(p, q)` the warp builds `K(t, x) = G(t - tau q, q)` with
//! `q` the centered periodic representative of `t - x`. Away from wraparound this is
//! `G((1 - tau) t + tau x, t - x)`. Choosing the representative this way keeps the
//! second argument on the grid, so only the first argument needs trigonometric
//! interpolation, and makes the discrete quantization an exact inverse of the
//! discrete Wigner transform.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{centered_dft, Direction};
use crate::field::{cis2pi, KernelMatrix, SpatialField, ZERO};
use crate::grid::Tau;

/// Column `l` of `g` as trigonometric coefficients along the first axis, scaled so that
/// the inverse centered DFT reproduces the samples.
fn column_coeffs(g: &SpatialField, l: usize) -> Vec<Complex64> {
    let n = g.n();
    let mut c: Vec<Complex64> = (0..n).map(|i| g.get(i, l)).collect();
    centered_dft(&mut c, Direction::Forward);
    let s = 1.0 / n as f64;
    c.iter_mut().for_each(|v| *v *= s);
    c
}

/// Scatters per-lag columns `cols[l][j] = K(t_j, t_j - q_l)` into a kernel matrix.
fn scatter(grid: crate::grid::GridSpec, cols: Vec<Vec<Complex64>>) -> KernelMatrix {
    let n = grid.n();
    let mut out = vec![ZERO; n * n];
    for (l, col) in cols.into_iter().enumerate() {
        let d = grid.offset(l);
        for (j, v) in col.into_iter().enumerate() {
            let m = (j as i64 - d).rem_euclid(n as i64) as usize;
            out[j * n + m] = v;
        }
    }
    KernelMatrix::new(grid, out).expect("n * n entries")
}

/// Inverse of [`scatter`]: `cols[l][j] = K(t_j, t_j - q_l)`.
fn gather(k: &KernelMatrix) -> Vec<Vec<Complex64>> {
    let grid = k.grid();
    let n = grid.n();
    (0..n)
        .map(|l| {
            let d = grid.offset(l);
            (0..n).map(|j| k.get(j, (j as i64 - d).rem_euclid(n as i64) as usize)).collect()
        })
        .collect()
}

/// Inverse warp `G(p, q) = K(p + tau q, p - (1 - tau) q)`, interpolating along each
/// lag diagonal of the kernel.
pub fn unwarp_psi_tau(k: &KernelMatrix, tau: Tau) -> SpatialField {
    let grid = k.grid();
    let n = grid.n();
    let t = tau.value();
    let cols: Vec<Vec<Complex64>> = gather(k)
        .into_par_iter()
        .enumerate()
        .map(|(l, mut c)| {
            let d = grid.offset(l) as f64;
            centered_dft(&mut c, Direction::Forward);
            let s = 1.0 / n as f64;
            for (kk, v) in c.iter_mut().enumerate() {
                *v *= cis2pi(grid.offset(kk) as f64 * t * d / n as f64) * s;
            }
            centered_dft(&mut c, Direction::Inverse);
            c
        })
        .collect();
    SpatialField::from_index_fn(grid, |p, l| cols[l][p])
}

/// Generic path: exact trigonometric interpolation in the first argument for any tau.
pub fn warp_psi_tau(g: &SpatialField, tau: Tau) -> KernelMatrix {
    let grid = g.grid();
    let n = grid.n();
    let t = tau.value();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|l| {
            let d = grid.offset(l) as f64;
            let mut c = column_coeffs(g, l);
            for (k, v) in c.iter_mut().enumerate() {
                *v *= cis2pi(-(grid.offset(k) as f64) * t * d / n as f64);
            }
            centered_dft(&mut c, Direction::Inverse);
            c
        })
        .collect();
    scatter(grid, cols)
}

/// Grid-aligned path for tau = 0 and tau = 1, half-grid path for tau = 1/2.
/// Returns `None` for any other tau.
pub fn warp_psi_tau_aligned(g: &SpatialField, tau: Tau) -> Option<KernelMatrix> {
    let grid = g.grid();
    let n = grid.n();
    let t = tau.value();
    let cols: Vec<Vec<Complex64>> = if t == 0.0 {
        (0..n).map(|l| (0..n).map(|j| g.get(j, l)).collect()).collect()
    } else if t == 1.0 {
        (0..n)
            .map(|l| {
                let d = grid.offset(l);
                (0..n).map(|j| g.get(grid.index_of(grid.offset(j) - d), l)).collect()
            })
            .collect()
    } else if t == 0.5 {
        // refine each column to spacing dt/2 by zero-padding its spectrum
        (0..n)
            .into_par_iter()
            .map(|l| {
                let d = grid.offset(l);
                let c = column_coeffs(g, l);
                let mut fine = vec![ZERO; 2 * n];
                for (k, v) in c.into_iter().enumerate() {
                    fine[k + n / 2] = v;
                }
                centered_dft(&mut fine, Direction::Inverse);
                (0..n)
                    .map(|j| {
                        let half = 2 * grid.offset(j) - d;
                        fine[(half + n as i64).rem_euclid(2 * n as i64) as usize]
                    })
                    .collect()
            })
            .collect()
    } else {
        return None;
    };
    Some(scatter(grid, cols))
}

/// Dispatches to the aligned path when one exists.
pub fn warp(g: &SpatialField, tau: Tau) -> KernelMatrix {
    warp_psi_tau_aligned(g, tau).unwrap_or_else(|| warp_psi_tau(g, tau))
}
