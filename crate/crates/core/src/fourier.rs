//! Fourier conventions on the grid: the 1D transform, the symplectic transform
//! on phase space and the partial transform in the second variable.

use num_complex::Complex64;

use crate::dft::{centered_dft, centered_dft_cols, centered_dft_rows, Direction};
use crate::error::Result;
use crate::field::{PhaseSpaceFunction, Signal, SpatialField, Spectrum};

/// `fhat(omega_k) = dt * sum_j f(t_j) exp(-2 pi i t_j omega_k)`.
pub fn fourier(f: &Signal) -> Spectrum {
    let g = f.grid();
    let mut v = f.values().to_vec();
    centered_dft(&mut v, Direction::Forward);
    let dt = g.spacing();
    v.iter_mut().for_each(|c| *c *= dt);
    Spectrum::new(g, v).expect("length preserved")
}

/// `f(t_j) = (1/L) sum_k fhat(omega_k) exp(2 pi i t_j omega_k)`.
pub fn inverse_fourier(fhat: &Spectrum) -> Signal {
    let g = fhat.grid();
    let mut v = fhat.values().to_vec();
    centered_dft(&mut v, Direction::Inverse);
    let w = 1.0 / g.l();
    v.iter_mut().for_each(|c| *c *= w);
    Signal::new(g, v).expect("length preserved")
}

/// Sign of the symplectic form used by [`symplectic_fourier_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymplecticSign {
    /// Kernel `exp(-2 pi i (x' omega - x omega'))`.
    #[default]
    Standard,
    /// Kernel `exp(+2 pi i (x' omega - x omega'))`.
    Flipped,
}

/// `F_sigma F(x, omega) = sum F(x', omega') exp(-2 pi i (x' omega - x omega')) / N`.
///
/// On the lattice this is exactly involutive and unitary for the `1/N` weighted pairing.
pub fn symplectic_fourier(f: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    symplectic_fourier_with(f, SymplecticSign::Standard)
}

pub fn symplectic_fourier_with(f: &PhaseSpaceFunction, sign: SymplecticSign) -> PhaseSpaceFunction {
    let g = f.grid();
    let n = g.n();
    let (along_omega, along_x) = match sign {
        SymplecticSign::Standard => (Direction::Inverse, Direction::Forward),
        SymplecticSign::Flipped => (Direction::Forward, Direction::Inverse),
    };
    // rows: omega' -> x, then columns: x' -> omega; the result comes out as (omega, x)
    let mut v = f.values().to_vec();
    centered_dft_rows(&mut v, n, along_omega);
    centered_dft_cols(&mut v, n, n, along_x);
    let scale = g.cell();
    PhaseSpaceFunction::from_index_fn(g, |i, j| v[j * n + i] * scale)
}

/// Forward partial transform in the second slot:
/// `(F_2 b)(x, omega) = dt * sum_q b(x, q) exp(-2 pi i q omega)`.
pub fn partial_fourier2(b: &SpatialField) -> PhaseSpaceFunction {
    let g = b.grid();
    let mut v = b.values().to_vec();
    centered_dft_rows(&mut v, g.n(), Direction::Forward);
    let dt = g.spacing();
    v.iter_mut().for_each(|c| *c *= dt);
    PhaseSpaceFunction::new(g, v).expect("shape preserved")
}

/// Inverse partial transform in the second slot:
/// `(F_2^{-1} a)(x, q) = (1/L) sum_omega a(x, omega) exp(2 pi i q omega)`.
pub fn partial_fourier2_inv(a: &PhaseSpaceFunction) -> SpatialField {
    let g = a.grid();
    let mut v = a.values().to_vec();
    centered_dft_rows(&mut v, g.n(), Direction::Inverse);
    let w = 1.0 / g.l();
    v.iter_mut().for_each(|c| *c *= w);
    SpatialField::new(g, v).expect("shape preserved")
}

/// Direct double-sum evaluation of the symplectic transform at one lattice index pair.
pub fn symplectic_fourier_at(f: &PhaseSpaceFunction, i: usize, j: usize) -> Complex64 {
    let g = f.grid();
    let n = g.n() as i64;
    let (p, q) = (g.offset(i), g.offset(j));
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..g.n() {
        for b in 0..g.n() {
            let (pp, qq) = (g.offset(a), g.offset(b));
            let k = (pp * q - p * qq).rem_euclid(n);
            acc += f.get(a, b) * crate::field::cis2pi(-(k as f64) / n as f64);
        }
    }
    acc * g.cell()
}

/// Checks a pair of arrays for the involution `F_sigma F_sigma = id`; returns the max abs residual.
pub fn involution_residual(f: &PhaseSpaceFunction) -> Result<f64> {
    let back = symplectic_fourier(&symplectic_fourier(f));
    f.grid().ensure_same(&back.grid())?;
    Ok(back.max_abs_diff(f))
}
