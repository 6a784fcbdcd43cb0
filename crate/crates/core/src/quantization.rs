//! Symbols and spreading functions of operators, and the maps back:
//! `W_tau`, `Op_tau`, `F_tau W` and `Int^tau`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{centered_dft, Direction};
use crate::error::{QhaError, Result};
use crate::field::{cis2pi, KernelMatrix, PhaseSpaceFunction, TrigInterpolant2, ZERO};
use crate::fourier::{partial_fourier2, partial_fourier2_inv, symplectic_fourier};
use crate::grid::{LatticePoint, Tau};
use crate::operator::{FiniteRankOperator, LinearOperator, OperatorAsKernel};
use crate::tfa::{tau_stft_unchecked, tfs_tau_adjoint};
use crate::warp::{unwarp_psi_tau, warp};

macro_rules! tagged {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            tau: Tau,
            values: PhaseSpaceFunction,
        }

        impl $name {
            pub fn new(values: PhaseSpaceFunction, tau: Tau) -> Self {
                Self { tau, values }
            }

            #[inline]
            pub fn tau(&self) -> Tau {
                self.tau
            }

            #[inline]
            pub fn values(&self) -> &PhaseSpaceFunction {
                &self.values
            }

            pub fn into_values(self) -> PhaseSpaceFunction {
                self.values
            }

            /// Errors unless the tag is `tau`.
            pub fn expect_tau(&self, tau: Tau) -> Result<()> {
                if self.tau == tau {
                    Ok(())
                } else {
                    Err(QhaError::TauMismatch { expected: tau.value(), found: self.tau.value() })
                }
            }
        }
    };
}

tagged!(TauSymbol);
tagged!(SpreadingFunction);

/// `exp(2 pi i c x omega)` on the lattice.
fn chirp(grid: crate::grid::GridSpec, c: f64) -> PhaseSpaceFunction {
    let n = grid.n() as f64;
    PhaseSpaceFunction::from_index_fn(grid, |i, j| {
        cis2pi(c * (grid.offset(i) * grid.offset(j)) as f64 / n)
    })
}

impl SpreadingFunction {
    /// `F_{tau'} W S = exp(2 pi i (tau' - tau) x omega) F_tau W S`.
    pub fn convert_to(&self, tau: Tau) -> SpreadingFunction {
        let c = chirp(self.values.grid(), tau.value() - self.tau.value());
        SpreadingFunction { tau, values: self.values.mul(&c).expect("same grid") }
    }
}

impl TauSymbol {
    /// The `tau'`-symbol of the same operator.
    pub fn convert_to(&self, tau: Tau) -> TauSymbol {
        let h = SpreadingFunction::new(symplectic_fourier(&self.values), self.tau).convert_to(tau);
        TauSymbol { tau, values: symplectic_fourier(&h.values) }
    }
}

/// `F_tau W S(z) = tr(pi_tau(z)* S) = sum_n V^tau_{g_n} f_n(z)`.
pub fn fourier_tau_wigner(s: &FiniteRankOperator, tau: Tau) -> SpreadingFunction {
    let grid = LinearOperator::grid(s);
    let mut acc = PhaseSpaceFunction::zeros(grid);
    for (f, g) in s.terms() {
        let v = tau_stft_unchecked(f, g, tau);
        for (a, b) in acc.values_mut().iter_mut().zip(v.values()) {
            *a += b;
        }
    }
    SpreadingFunction::new(acc, tau)
}

/// `F_tau W` of any kernel operator via the diagonals of its kernel:
/// `F(x, omega) = exp(2 pi i tau x omega) dt sum_j exp(-2 pi i omega t_j) K(t_j, t_j - x)`.
pub fn fourier_tau_wigner_kernel(k: &KernelMatrix, tau: Tau) -> SpreadingFunction {
    let grid = k.grid();
    let n = grid.n();
    let dt = grid.spacing();
    let t = tau.value();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let p = grid.offset(m);
            let mut d: Vec<Complex64> =
                (0..n).map(|j| k.get(j, (j as i64 - p).rem_euclid(n as i64) as usize)).collect();
            centered_dft(&mut d, Direction::Forward);
            for (kk, v) in d.iter_mut().enumerate() {
                *v *= cis2pi(t * (p * grid.offset(kk)) as f64 / n as f64) * dt;
            }
            d
        })
        .collect();
    SpreadingFunction::new(PhaseSpaceFunction::from_vec_unchecked(grid, rows.concat()), tau)
}

/// Oracle: `tr(pi_tau(z)* S)` as the trace of an explicit matrix product at each requested point.
pub fn fourier_tau_wigner_oracle(s: &dyn LinearOperator, tau: Tau, points: &[LatticePoint]) -> Result<Vec<Complex64>> {
    let grid = s.grid();
    let n = grid.n();
    let dt = grid.spacing();
    let k = s.kernel();
    let a = DMatrix::from_fn(n, n, |i, j| k.get(i, j) * dt);
    points
        .iter()
        .map(|z| {
            grid.ensure_same(&z.grid())?;
            let mut pm = DMatrix::from_element(n, n, ZERO);
            for c in 0..n {
                let mut e = crate::field::Signal::zeros(grid);
                e.values_mut()[c] = Complex64::new(1.0, 0.0);
                let col = tfs_tau_adjoint(&e, z, tau)?;
                for r in 0..n {
                    pm[(r, c)] = col.values()[r];
                }
            }
            Ok((pm * &a).trace())
        })
        .collect()
}

/// `W_tau S = F_sigma F_tau W S`.
pub fn tau_wigner_op(s: &FiniteRankOperator, tau: Tau) -> TauSymbol {
    TauSymbol::new(symplectic_fourier(fourier_tau_wigner(s, tau).values()), tau)
}

/// `W_tau` of a kernel operator.
pub fn tau_wigner_kernel(k: &KernelMatrix, tau: Tau) -> TauSymbol {
    TauSymbol::new(symplectic_fourier(fourier_tau_wigner_kernel(k, tau).values()), tau)
}

/// `W_tau S(x, omega) = int K_S(x + tau t, x - (1 - tau) t) exp(-2 pi i t omega) dt` on the
/// lattice: the inverse warp of the kernel followed by the partial transform in `t`.
/// Independent of the spreading-function route of [`tau_wigner_op`].
pub fn tau_wigner_lattice(k: &KernelMatrix, tau: Tau) -> TauSymbol {
    TauSymbol::new(partial_fourier2(&unwarp_psi_tau(k, tau)), tau)
}

/// The tau-symbol of a trace-class operator; identical to [`tau_wigner_op`].
pub fn tau_symbol(s: &FiniteRankOperator, tau: Tau) -> TauSymbol {
    tau_wigner_op(s, tau)
}

/// Oracle: `W_tau S(x, omega) = int K_S(x + tau t, x - (1 - tau) t) exp(-2 pi i t omega) dt`
/// with the kernel evaluated by 2D trigonometric interpolation.
pub fn tau_wigner_oracle(k: &KernelMatrix, tau: Tau) -> TauSymbol {
    let grid = k.grid();
    let it = TrigInterpolant2::spatial(k);
    let t = tau.value();
    let dt = grid.spacing();
    let rows: Vec<Vec<Complex64>> = (0..grid.n())
        .into_par_iter()
        .map(|m| {
            let x = grid.time(m);
            let mut h: Vec<Complex64> =
                grid.times().into_iter().map(|s| it.eval(x + t * s, x - (1.0 - t) * s)).collect();
            centered_dft(&mut h, Direction::Forward);
            h.iter_mut().for_each(|v| *v *= dt);
            h
        })
        .collect();
    TauSymbol::new(PhaseSpaceFunction::from_vec_unchecked(grid, rows.concat()), tau)
}

/// `Op_tau(a)` with kernel `int exp(2 pi i (t - x) omega) a((1 - tau) t + tau x, omega) d omega`.
/// The symbol's tag must equal `tau`.
pub fn op_tau(a: &TauSymbol, tau: Tau) -> Result<OperatorAsKernel> {
    a.expect_tau(tau)?;
    Ok(OperatorAsKernel::new(warp(&partial_fourier2_inv(&a.values), tau)))
}

/// Kernel formula used by [`spreading_op_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadingKernel {
    /// `K(y, y - x) = int h(x, omega) exp(2 pi i omega (y - tau x)) d omega`.
    #[default]
    Derived,
    /// `K(y, u) = int h(y - u, omega) exp(2 pi i y omega) d omega`, without the tau phase.
    /// Agrees with `Derived` only at tau = 0.
    AsPrinted,
}

/// `Int^tau(h) = int h(z) pi_tau(z) dz`.
pub fn spreading_op(h: &SpreadingFunction) -> OperatorAsKernel {
    spreading_op_with(h, SpreadingKernel::Derived)
}

pub fn spreading_op_with(h: &SpreadingFunction, formula: SpreadingKernel) -> OperatorAsKernel {
    let grid = h.values.grid();
    let n = grid.n();
    let t = match formula {
        SpreadingKernel::Derived => h.tau.value(),
        SpreadingKernel::AsPrinted => 0.0,
    };
    let inv_l = 1.0 / grid.l();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let p = grid.offset(m);
            let mut row: Vec<Complex64> = (0..n)
                .map(|k| h.values.get(m, k) * cis2pi(-t * (p * grid.offset(k)) as f64 / n as f64))
                .collect();
            centered_dft(&mut row, Direction::Inverse);
            row.iter_mut().for_each(|v| *v *= inv_l);
            row
        })
        .collect();
    let mut out = vec![ZERO; n * n];
    for (m, col) in cols.into_iter().enumerate() {
        let p = grid.offset(m);
        for (j, v) in col.into_iter().enumerate() {
            out[j * n + (j as i64 - p).rem_euclid(n as i64) as usize] = v;
        }
    }
    OperatorAsKernel::new(KernelMatrix::new(grid, out).expect("n * n"))
}

/// Oracle: the lattice Riemann sum `(1/N) sum_z h(z) pi_tau(z)`, accumulated shift by shift.
pub fn spreading_op_riemann(h: &SpreadingFunction) -> OperatorAsKernel {
    let grid = h.values.grid();
    let n = grid.n();
    let w = grid.cell() / grid.spacing();
    let tau = h.tau.value();
    let mut out = vec![ZERO; n * n];
    for m in 0..n {
        for k in 0..n {
            let z = LatticePoint::from_indices(grid, m, k);
            let c = h.values.get(m, k) * cis2pi(-tau * z.x_omega()) * w;
            // (pi_tau(z) psi)(t_j) = phase * exp(2 pi i omega t_j) psi(t_j - x)
            for j in 0..n {
                let col = (j as i64 - z.p()).rem_euclid(n as i64) as usize;
                let e = cis2pi((z.q() * grid.offset(j)) as f64 / n as f64);
                out[j * n + col] += c * e;
            }
        }
    }
    OperatorAsKernel::new(KernelMatrix::new(grid, out).expect("n * n"))
}

/// `tr(T S*) = sum_n <T g_n, f_n>`.
pub fn duality_pairing(t: &dyn LinearOperator, s: &FiniteRankOperator) -> Result<Complex64> {
    t.grid().ensure_same(&LinearOperator::grid(s))?;
    let mut acc = ZERO;
    for (f, g) in s.terms() {
        acc += t.apply(g)?.inner_unchecked(f);
    }
    Ok(acc)
}

/// `<K_T, K_S> = dt^2 sum K_T conj(K_S)`.
pub fn kernel_pairing(t: &dyn LinearOperator, s: &dyn LinearOperator) -> Result<Complex64> {
    t.kernel().inner(&s.kernel())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::operator::{kernel_of, random_state};
    use crate::tfa::{cross_tau_wigner, gaussian, hermite};

    #[test]
    fn rank_one_symbol_is_cross_wigner() {
        let g = make_grid(32, 8.0).unwrap();
        let f = gaussian(g).translate(3);
        let h = hermite(g, 1).modulate(2);
        let s = FiniteRankOperator::rank_one(&f, &h).unwrap();
        for t in crate::grid::TAU_SWEEP {
            let tau = Tau::new(t).unwrap();
            let a = tau_wigner_op(&s, tau);
            let b = cross_tau_wigner(&f, &h, tau).unwrap();
            assert!(a.values().max_abs_diff(&b) < 1e-12);
            let c = fourier_tau_wigner_kernel(&kernel_of(&s), tau);
            assert!(c.values().max_abs_diff(fourier_tau_wigner(&s, tau).values()) < 1e-12);
        }
    }

    #[test]
    fn round_trips() {
        let g = make_grid(32, 8.0).unwrap();
        let s = random_state(g, 2, 11).unwrap();
        let k = kernel_of(&s);
        for t in crate::grid::TAU_SWEEP {
            let tau = Tau::new(t).unwrap();
            let back = op_tau(&tau_wigner_op(&s, tau), tau).unwrap();
            assert!(back.kernel_ref().rel_diff(&k) < 1e-12, "tau = {t}");
            let back = spreading_op(&fourier_tau_wigner(&s, tau));
            assert!(back.kernel_ref().rel_diff(&k) < 1e-12);
            let riemann = spreading_op_riemann(&fourier_tau_wigner(&s, tau));
            assert!(riemann.kernel_ref().rel_diff(&k) < 1e-12);
        }
    }

    #[test]
    fn tag_mismatch_rejected() {
        let g = make_grid(16, 8.0).unwrap();
        let s = random_state(g, 1, 0).unwrap();
        let a = tau_symbol(&s, Tau::WEYL);
        assert!(matches!(op_tau(&a, Tau::ZERO), Err(QhaError::TauMismatch { .. })));
        let a0 = a.convert_to(Tau::ZERO);
        assert!(a0.values().max_abs_diff(tau_symbol(&s, Tau::ZERO).values()) < 1e-12);
    }

    #[test]
    fn printed_spreading_kernel_only_matches_at_tau_zero() {
        let g = make_grid(16, 8.0).unwrap();
        let s = random_state(g, 2, 3).unwrap();
        let k = kernel_of(&s);
        let h0 = fourier_tau_wigner(&s, Tau::ZERO);
        assert!(spreading_op_with(&h0, SpreadingKernel::AsPrinted).kernel_ref().rel_diff(&k) < 1e-12);
        let h = fourier_tau_wigner(&s, Tau::new(0.77).unwrap());
        assert!(spreading_op_with(&h, SpreadingKernel::AsPrinted).kernel_ref().rel_diff(&k) > 1e-3);
    }
}
