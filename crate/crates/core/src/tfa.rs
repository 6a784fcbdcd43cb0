//! Time-frequency shifts, the tau-STFT and cross-tau-Wigner distributions of signal pairs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{centered_dft, Direction};
use crate::error::{QhaError, Result};
use crate::field::{cis2pi, PhaseSpaceFunction, Signal, ZERO};
use crate::fourier::symplectic_fourier;
use crate::grid::{GridSpec, LatticePoint, Tau};

/// The normalized Gaussian `2^(1/4) exp(-pi t^2)`.
pub fn gaussian(grid: GridSpec) -> Signal {
    let c = 2f64.powf(0.25);
    Signal::from_fn(grid, |t| Complex64::new(c * (-PI * t * t).exp(), 0.0))
}

/// The first `count` Hermite functions `h_n(t) = 2^(1/4) (2^n n!)^(-1/2) H_n(sqrt(2 pi) t) exp(-pi t^2)`,
/// orthonormal in `L^2(R)`.
pub fn hermite_functions(grid: GridSpec, count: usize) -> Vec<Signal> {
    let mut out: Vec<Signal> = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let times = grid.times();
    let y: Vec<f64> = times.iter().map(|t| (2.0 * PI).sqrt() * t).collect();
    let mut prev = vec![0.0; grid.n()];
    let mut cur: Vec<f64> = times.iter().map(|t| 2f64.powf(0.25) * (-PI * t * t).exp()).collect();
    for n in 0..count {
        out.push(Signal::new(grid, cur.iter().map(|&v| Complex64::new(v, 0.0)).collect()).expect("n samples"));
        let a = (2.0 / (n as f64 + 1.0)).sqrt();
        let b = (n as f64 / (n as f64 + 1.0)).sqrt();
        let next: Vec<f64> = (0..grid.n()).map(|j| a * y[j] * cur[j] - b * prev[j]).collect();
        prev = cur;
        cur = next;
    }
    out
}

/// `h_n` alone.
pub fn hermite(grid: GridSpec, n: usize) -> Signal {
    hermite_functions(grid, n + 1).pop().expect("n + 1 functions")
}

/// `pi_tau(z) f = exp(-2 pi i tau x omega) M_omega T_x f`, with periodic translation.
pub fn tfs_tau(f: &Signal, z: &LatticePoint, tau: Tau) -> Result<Signal> {
    f.grid().ensure_same(&z.grid())?;
    let phase = cis2pi(-tau.value() * z.x_omega());
    Ok(f.shift(z).scale(phase))
}

/// Adjoint `pi_tau(z)* = exp(2 pi i tau x omega) T_{-x} M_{-omega}`.
pub fn tfs_tau_adjoint(f: &Signal, z: &LatticePoint, tau: Tau) -> Result<Signal> {
    f.grid().ensure_same(&z.grid())?;
    let phase = cis2pi(tau.value() * z.x_omega());
    Ok(f.modulate(-z.q()).translate(-z.p()).scale(phase))
}

fn check_window(g: &Signal) -> Result<()> {
    if g.values().iter().all(|v| *v == ZERO) {
        Err(QhaError::ZeroWindow)
    } else {
        Ok(())
    }
}

/// `V^tau_g f(x, omega) = <f, pi_tau(x, omega) g>` on the full lattice, one FFT per x.
pub fn tau_stft(f: &Signal, g: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    check_window(g)?;
    Ok(tau_stft_unchecked(f, g, tau))
}

pub(crate) fn tau_stft_unchecked(f: &Signal, g: &Signal, tau: Tau) -> PhaseSpaceFunction {
    let grid = f.grid();
    let n = grid.n();
    let dt = grid.spacing();
    let t = tau.value();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let p = grid.offset(m);
            let mut h: Vec<Complex64> = (0..n)
                .map(|j| {
                    let src = (j as i64 - p).rem_euclid(n as i64) as usize;
                    f.values()[j] * g.values()[src].conj()
                })
                .collect();
            centered_dft(&mut h, Direction::Forward);
            for (k, v) in h.iter_mut().enumerate() {
                let xw = (p * grid.offset(k)) as f64 / n as f64;
                *v *= cis2pi(t * xw) * dt;
            }
            h
        })
        .collect();
    PhaseSpaceFunction::from_vec_unchecked(grid, rows.concat())
}

/// Oracle: one explicit inner product per lattice point.
pub fn tau_stft_direct(f: &Signal, g: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    check_window(g)?;
    let grid = f.grid();
    Ok(PhaseSpaceFunction::from_index_fn(grid, |i, j| {
        let z = LatticePoint::from_indices(grid, i, j);
        let shifted = tfs_tau(g, &z, tau).expect("same grid");
        f.inner_unchecked(&shifted)
    }))
}

/// Cross-ambiguity function, the `tau = 1/2` STFT.
pub fn ambiguity(f: &Signal, g: &Signal) -> Result<PhaseSpaceFunction> {
    tau_stft(f, g, Tau::WEYL)
}

/// `W_tau(f, g) = F_sigma V^tau_g f`.
pub fn cross_tau_wigner(f: &Signal, g: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    if g.values().iter().all(|v| *v == ZERO) {
        return Ok(PhaseSpaceFunction::zeros(f.grid()));
    }
    Ok(symplectic_fourier(&tau_stft_unchecked(f, g, tau)))
}

/// `W_tau f = W_tau(f, f)`.
pub fn tau_wigner(f: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    cross_tau_wigner(f, f, tau)
}

/// Oracle: the defining integral
/// `W_tau(f, g)(x, omega) = int exp(-2 pi i t omega) f(x + tau t) conj(g(x - (1 - tau) t)) dt`
/// as a Riemann sum over the grid, with off-grid values from the trigonometric interpolants.
pub fn cross_tau_wigner_oracle(f: &Signal, g: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    let grid = f.grid();
    let (fi, gi) = (f.interpolant(), g.interpolant());
    let t = tau.value();
    let dt = grid.spacing();
    let rows: Vec<Vec<Complex64>> = (0..grid.n())
        .into_par_iter()
        .map(|m| {
            let x = grid.time(m);
            let mut h: Vec<Complex64> = grid
                .times()
                .into_iter()
                .map(|s| fi.eval(x + t * s) * gi.eval(x - (1.0 - t) * s).conj())
                .collect();
            centered_dft(&mut h, Direction::Forward);
            h.iter_mut().for_each(|v| *v *= dt);
            h
        })
        .collect();
    Ok(PhaseSpaceFunction::from_vec_unchecked(grid, rows.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn tfs_identity_and_adjoint() {
        let g = make_grid(16, 8.0).unwrap();
        let f = hermite(g, 2);
        let tau = Tau::new(0.3).unwrap();
        assert_eq!(tfs_tau(&f, &LatticePoint::origin(g), tau).unwrap(), f);
        let z = LatticePoint::new(g, 3, -2).unwrap();
        let h = gaussian(g).modulate(1);
        let lhs = tfs_tau(&f, &z, tau).unwrap().inner(&h).unwrap();
        let rhs = f.inner(&tfs_tau_adjoint(&h, &z, tau).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn stft_fast_matches_direct() {
        let g = make_grid(16, 8.0).unwrap();
        let f = hermite(g, 1).add(&gaussian(g).translate(2)).unwrap();
        let w = gaussian(g).modulate(1);
        for t in crate::grid::TAU_SWEEP {
            let tau = Tau::new(t).unwrap();
            let a = tau_stft(&f, &w, tau).unwrap();
            let b = tau_stft_direct(&f, &w, tau).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-13);
        }
        assert_eq!(tau_stft(&f, &Signal::zeros(g), Tau::ZERO), Err(QhaError::ZeroWindow));
    }

    #[test]
    fn hermite_functions_orthonormal() {
        let g = make_grid(64, 8.0).unwrap();
        let hs = hermite_functions(g, 6);
        for (a, ha) in hs.iter().enumerate() {
            for (b, hb) in hs.iter().enumerate() {
                let ip = ha.inner(hb).unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - Complex64::new(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wigner_primary_matches_defining_integral() {
        let g = make_grid(64, 8.0).unwrap();
        let f = gaussian(g).translate(3).modulate(-2);
        let h = hermite(g, 1).modulate(1);
        for t in crate::grid::TAU_SWEEP {
            let tau = Tau::new(t).unwrap();
            let a = cross_tau_wigner(&f, &h, tau).unwrap();
            let b = cross_tau_wigner_oracle(&f, &h, tau).unwrap();
            assert!(a.rel_diff(&b) < 1e-6, "tau = {t}: {}", a.rel_diff(&b));
        }
    }

    #[test]
    fn weyl_wigner_of_gaussian() {
        let g = make_grid(64, 8.0).unwrap();
        let phi = gaussian(g);
        let amb = ambiguity(&phi, &phi).unwrap();
        let real = PhaseSpaceFunction::from_fn(g, |x, o| Complex64::new((-PI * (x * x + o * o) / 2.0).exp(), 0.0));
        assert!(amb.max_abs_diff(&real) < 1e-8);
        let w = tau_wigner(&phi, Tau::WEYL).unwrap();
        let expect = PhaseSpaceFunction::from_fn(g, |x, o| {
            Complex64::new(2.0 * (-2.0 * PI * (x * x + o * o)).exp(), 0.0)
        });
        assert!(w.max_abs_diff(&expect) < 1e-8, "{}", w.max_abs_diff(&expect));
        assert!((w.integral() - Complex64::new(1.0, 0.0)).norm() < 1e-8, "{}", w.integral());
    }

    #[test]
    fn rihaczek_at_tau_zero() {
        let g = make_grid(64, 8.0).unwrap();
        let f = gaussian(g).translate(2);
        let h = hermite(g, 2);
        let hh = crate::fourier::fourier(&h);
        let w = cross_tau_wigner(&f, &h, Tau::ZERO).unwrap();
        let expect = PhaseSpaceFunction::from_index_fn(g, |i, j| {
            let xw = (g.offset(i) * g.offset(j)) as f64 / g.n() as f64;
            f.values()[i] * hh.values()[j].conj() * cis2pi(-xw)
        });
        assert!(w.max_abs_diff(&expect) < 1e-8);
    }
}
