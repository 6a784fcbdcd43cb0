//! Phase-space convolutions of functions and operators, and Cohen-class distributions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{centered_dft, cyclic_fft, Direction};
use crate::error::Result;
use crate::field::{cis2pi, KernelMatrix, PhaseSpaceFunction, Signal, ZERO};
use crate::fourier::symplectic_fourier;
use crate::grid::{LatticePoint, Tau};
use crate::operator::{
    parity_kernel, translate_kernel, FiniteRankOperator, LinearOperator, OperatorAsKernel,
};
use crate::quantization::{fourier_tau_wigner, fourier_tau_wigner_kernel, tau_wigner_op};
use crate::tfa::tau_stft_unchecked;

/// Cohen kernel `a` of `Q_a^tau S = a * W_tau S`.
pub type CohenKernel = PhaseSpaceFunction;

fn fft2(v: &mut [Complex64], n: usize, dir: Direction) {
    for row in v.chunks_exact_mut(n) {
        cyclic_fft(row, dir);
    }
    let mut col = vec![ZERO; n];
    for c in 0..n {
        for r in 0..n {
            col[r] = v[r * n + c];
        }
        cyclic_fft(&mut col, dir);
        for r in 0..n {
            v[r * n + c] = col[r];
        }
    }
}

/// Periodic convolution `(F * G)(z) = (1/N) sum_w F(w) G(z - w)`.
pub fn ps_convolve(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    let grid = f.grid();
    let n = grid.n();
    let (mut a, mut b) = (f.values().to_vec(), g.values().to_vec());
    fft2(&mut a, n, Direction::Forward);
    fft2(&mut b, n, Direction::Forward);
    let mut c: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    fft2(&mut c, n, Direction::Inverse);
    // cyclic index r holds offset r - N; shift back to centered layout
    let scale = grid.cell() / (n * n) as f64;
    let h = grid.center();
    Ok(PhaseSpaceFunction::from_index_fn(grid, |i, j| c[((i + h) % n) * n + (j + h) % n] * scale))
}

/// Oracle: the double sum.
pub fn ps_convolve_direct(f: &PhaseSpaceFunction, g: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
    f.grid().ensure_same(&g.grid())?;
    let grid = f.grid();
    let n = grid.n();
    Ok(PhaseSpaceFunction::from_index_fn(grid, |i, j| {
        let mut acc = ZERO;
        for a in 0..n {
            for b in 0..n {
                let di = grid.index_of(grid.offset(i) - grid.offset(a));
                let dj = grid.index_of(grid.offset(j) - grid.offset(b));
                acc += f.get(a, b) * g.get(di, dj);
            }
        }
        acc * grid.cell()
    }))
}

/// `F*(z) = conj(F(-z))`.
pub fn reflect_conj(f: &PhaseSpaceFunction) -> PhaseSpaceFunction {
    f.reflect_conj()
}

/// `a * S = int a(z) alpha_z(S) dz` with kernel
/// `K(y, u) = (1/N) sum_{x, omega} a(x, omega) exp(2 pi i (y - u) omega) K_S(y - x, u - x)`,
/// evaluated one kernel diagonal `y - u` at a time as a cyclic convolution in `y`.
pub fn conv_fn_op(a: &PhaseSpaceFunction, s: &dyn LinearOperator) -> Result<OperatorAsKernel> {
    a.grid().ensure_same(&s.grid())?;
    let grid = a.grid();
    let n = grid.n();
    let ks = s.kernel();
    // A[p][d] = sum_q a(p, q) exp(2 pi i omega_q d dt), one inverse DFT per row
    let mut amod = a.values().to_vec();
    for row in amod.chunks_exact_mut(n) {
        centered_dft(row, Direction::Inverse);
    }
    let diags: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|dl| {
            let d = grid.offset(dl);
            // weights indexed by cyclic translation r, i.e. offset p = r mod N
            let mut w: Vec<Complex64> = (0..n).map(|r| amod[grid.index_of(r as i64) * n + dl]).collect();
            let mut diag: Vec<Complex64> =
                (0..n).map(|j| ks.get(j, (j as i64 - d).rem_euclid(n as i64) as usize)).collect();
            cyclic_fft(&mut w, Direction::Forward);
            cyclic_fft(&mut diag, Direction::Forward);
            let mut c: Vec<Complex64> = w.iter().zip(&diag).map(|(x, y)| x * y).collect();
            cyclic_fft(&mut c, Direction::Inverse);
            let scale = grid.cell() / n as f64;
            c.iter_mut().for_each(|v| *v *= scale);
            c
        })
        .collect();
    let mut out = vec![ZERO; n * n];
    for (dl, diag) in diags.into_iter().enumerate() {
        let d = grid.offset(dl);
        for (j, v) in diag.into_iter().enumerate() {
            out[j * n + (j as i64 - d).rem_euclid(n as i64) as usize] = v;
        }
    }
    Ok(OperatorAsKernel::new(KernelMatrix::new(grid, out)?))
}

/// Oracle: `(1/N) sum_z a(z) K_{alpha_z S}` with every translate built explicitly.
pub fn conv_fn_op_oracle(a: &PhaseSpaceFunction, s: &dyn LinearOperator) -> Result<OperatorAsKernel> {
    a.grid().ensure_same(&s.grid())?;
    let grid = a.grid();
    let n = grid.n();
    let ks = s.kernel();
    let mut out = KernelMatrix::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            let c = a.get(i, j) * grid.cell();
            if c == ZERO {
                continue;
            }
            let kz = translate_kernel(&ks, &LatticePoint::from_indices(grid, i, j))?;
            for (o, v) in out.values_mut().iter_mut().zip(kz.values()) {
                *o += c * v;
            }
        }
    }
    Ok(OperatorAsKernel::new(out))
}

/// `S * T (z) = tr(S alpha_z(P T P)) = F_sigma(F_tau W S . F_{1-tau} W T)`, using tau = 1/2.
pub fn conv_op_op(s: &FiniteRankOperator, t: &FiniteRankOperator) -> Result<PhaseSpaceFunction> {
    conv_op_op_tau(s, t, Tau::WEYL)
}

/// The same convolution through any tau; the result does not depend on tau.
pub fn conv_op_op_tau(s: &FiniteRankOperator, t: &FiniteRankOperator, tau: Tau) -> Result<PhaseSpaceFunction> {
    LinearOperator::grid(s).ensure_same(&LinearOperator::grid(t))?;
    let a = fourier_tau_wigner(s, tau);
    let b = fourier_tau_wigner(t, tau.complement());
    Ok(symplectic_fourier(&a.values().mul(b.values())?))
}

/// `S * T` for operators known only through their kernels.
pub fn conv_ops(s: &dyn LinearOperator, t: &dyn LinearOperator) -> Result<PhaseSpaceFunction> {
    s.grid().ensure_same(&t.grid())?;
    let a = fourier_tau_wigner_kernel(&s.kernel(), Tau::WEYL);
    let b = fourier_tau_wigner_kernel(&t.kernel(), Tau::WEYL);
    Ok(symplectic_fourier(&a.values().mul(b.values())?))
}

/// Oracle: one kernel trace `dt^2 sum K_S(y, u) K_{alpha_z T'}(u, y)` per lattice point.
pub fn conv_op_op_oracle(s: &dyn LinearOperator, t: &dyn LinearOperator) -> Result<PhaseSpaceFunction> {
    s.grid().ensure_same(&t.grid())?;
    let grid = s.grid();
    let n = grid.n();
    let ks = s.kernel();
    let kt = parity_kernel(&t.kernel());
    let dt2 = grid.spacing() * grid.spacing();
    let q = grid.n() as i64;
    let vals: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let z = LatticePoint::from_indices(grid, idx / n, idx % n);
            let mut acc = ZERO;
            for y in 0..n {
                for u in 0..n {
                    // alpha_z(T')(u, y) = exp(2 pi i (u - y) omega) T'(u - x, y - x)
                    let su = (u as i64 - z.p()).rem_euclid(q) as usize;
                    let sy = (y as i64 - z.p()).rem_euclid(q) as usize;
                    let ph = cis2pi(((grid.offset(u) - grid.offset(y)) * z.q()) as f64 / n as f64);
                    acc += ks.get(y, u) * kt.get(su, sy) * ph;
                }
            }
            acc * dt2
        })
        .collect();
    PhaseSpaceFunction::new(grid, vals)
}

/// STFT expansion `S * T (z) = sum_{n, m} V_{P l_m} f_n(z) conj(V_{P h_m} g_n(z))`
/// for `S = sum f_n (x) g_n`, `T = sum h_m (x) l_m`.
pub fn conv_op_op_stft(s: &FiniteRankOperator, t: &FiniteRankOperator) -> Result<PhaseSpaceFunction> {
    let grid = LinearOperator::grid(s);
    grid.ensure_same(&LinearOperator::grid(t))?;
    let mut acc = PhaseSpaceFunction::zeros(grid);
    for (f, g) in s.terms() {
        for (h, l) in t.terms() {
            let a = tau_stft_unchecked(f, &l.reflect(), Tau::ZERO);
            let b = tau_stft_unchecked(g, &h.reflect(), Tau::ZERO);
            for ((o, x), y) in acc.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
                *o += x * y.conj();
            }
        }
    }
    Ok(acc)
}

/// `Q_a^tau S = a * W_tau S`.
pub fn cohen_op(a: &CohenKernel, s: &FiniteRankOperator, tau: Tau) -> Result<PhaseSpaceFunction> {
    ps_convolve(a, tau_wigner_op(s, tau).values())
}

/// `Q_a^tau (f, g) = a * W_tau(f, g)`.
pub fn cohen_pair(a: &CohenKernel, f: &Signal, g: &Signal, tau: Tau) -> Result<PhaseSpaceFunction> {
    ps_convolve(a, &crate::tfa::cross_tau_wigner(f, g, tau)?)
}

/// `Q_S f(z) = <alpha_z(S) f, f> = sum_n V_{g_n} f(z) conj(V_{f_n} f(z))`.
pub fn cohen_fn(s: &FiniteRankOperator, f: &Signal) -> Result<PhaseSpaceFunction> {
    let grid = LinearOperator::grid(s);
    grid.ensure_same(&f.grid())?;
    let mut acc = PhaseSpaceFunction::zeros(grid);
    for (fn_, gn) in s.terms() {
        let a = tau_stft_unchecked(f, gn, Tau::ZERO);
        let b = tau_stft_unchecked(f, fn_, Tau::ZERO);
        for ((o, x), y) in acc.values_mut().iter_mut().zip(a.values()).zip(b.values()) {
            *o += x * y.conj();
        }
    }
    Ok(acc)
}

/// `Q_S f = (f (x) f) * P S P` through the operator convolution.
pub fn cohen_fn_conv(s: &FiniteRankOperator, f: &Signal) -> Result<PhaseSpaceFunction> {
    conv_op_op(&FiniteRankOperator::rank_one(f, f)?, &s.parity_conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::operator::{kernel_of, random_state};
    use crate::tfa::{gaussian, hermite};

    #[test]
    fn convolution_fast_matches_direct() {
        let g = make_grid(16, 4.0).unwrap();
        let f = PhaseSpaceFunction::from_fn(g, |x, w| Complex64::new((-x * x - w * w).exp(), x * (-w * w).exp() * 0.1));
        let h = PhaseSpaceFunction::from_fn(g, |x, w| Complex64::new((-(x - 0.5).powi(2) - 2.0 * w * w).exp(), 0.0));
        let a = ps_convolve(&f, &h).unwrap();
        assert!(a.max_abs_diff(&ps_convolve_direct(&f, &h).unwrap()) < 1e-12);
        assert!(a.max_abs_diff(&ps_convolve(&h, &f).unwrap()) < 1e-12);
        let d = ps_convolve(&f, &PhaseSpaceFunction::delta(g)).unwrap();
        assert!(d.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn function_operator_convolution() {
        let g = make_grid(16, 8.0).unwrap();
        let s = random_state(g, 2, 5).unwrap();
        let a = PhaseSpaceFunction::from_fn(g, |x, w| Complex64::new((-x * x - 3.0 * w * w).exp(), 0.2 * w));
        let fast = conv_fn_op(&a, &s).unwrap();
        let slow = conv_fn_op_oracle(&a, &s).unwrap();
        assert!(fast.kernel_ref().rel_diff(slow.kernel_ref()) < 1e-12);
        let id = conv_fn_op(&PhaseSpaceFunction::delta(g), &s).unwrap();
        assert!(id.kernel_ref().rel_diff(&kernel_of(&s)) < 1e-12);
    }

    #[test]
    fn operator_convolution_paths() {
        let g = make_grid(16, 8.0).unwrap();
        let s = random_state(g, 2, 1).unwrap();
        let t = FiniteRankOperator::rank_one(&hermite(g, 1).translate(2), &gaussian(g).modulate(1)).unwrap();
        let fast = conv_op_op(&s, &t).unwrap();
        let oracle = conv_op_op_oracle(&s, &t).unwrap();
        let stft = conv_op_op_stft(&s, &t).unwrap();
        assert!(fast.rel_diff(&oracle) < 1e-12);
        assert!(stft.rel_diff(&oracle) < 1e-12);
        for tau in [0.0, 0.3, 1.0] {
            let other = conv_op_op_tau(&s, &t, Tau::new(tau).unwrap()).unwrap();
            assert!(other.rel_diff(&fast) < 1e-12);
        }
    }

    #[test]
    fn cohen_fn_paths_agree() {
        let g = make_grid(16, 8.0).unwrap();
        let s = random_state(g, 2, 9).unwrap();
        let f = hermite(g, 2).modulate(1);
        let a = cohen_fn(&s, &f).unwrap();
        let b = cohen_fn_conv(&s, &f).unwrap();
        assert!(a.rel_diff(&b) < 1e-12);
    }
}
