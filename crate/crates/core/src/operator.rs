//! Finite-rank operators `S = sum f_n (x) g_n`, kernel operators, and the basic
//! operator calculus: trace, adjoint, composition, phase-space translation, parity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QhaError, Result};
use crate::field::{cis2pi, KernelMatrix, Signal, ZERO};
use crate::grid::{GridSpec, LatticePoint};
use crate::tfa::hermite_functions;

/// Anything with an integral kernel on a grid.
pub trait LinearOperator {
    fn grid(&self) -> GridSpec;

    /// Kernel `K(y, u)` with `(S psi)(y) = dt * sum_u K(y, u) psi(u)`.
    fn kernel(&self) -> KernelMatrix;

    fn apply(&self, psi: &Signal) -> Result<Signal>;

    fn trace(&self) -> Complex64 {
        kernel_trace(&self.kernel())
    }
}

/// `S = sum_n f_n (x) g_n` acting as `psi -> sum_n <psi, g_n> f_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRankOperator {
    grid: GridSpec,
    terms: Vec<(Signal, Signal)>,
}

impl FiniteRankOperator {
    pub fn zero(grid: GridSpec) -> Self {
        Self { grid, terms: Vec::new() }
    }

    pub fn new(grid: GridSpec, terms: Vec<(Signal, Signal)>) -> Result<Self> {
        for (f, g) in &terms {
            grid.ensure_same(&f.grid())?;
            grid.ensure_same(&g.grid())?;
        }
        Ok(Self { grid, terms })
    }

    /// The rank-one operator `f (x) g`.
    pub fn rank_one(f: &Signal, g: &Signal) -> Result<Self> {
        Self::new(f.grid(), vec![(f.clone(), g.clone())])
    }

    pub fn push(&mut self, f: Signal, g: Signal) -> Result<()> {
        self.grid.ensure_same(&f.grid())?;
        self.grid.ensure_same(&g.grid())?;
        self.terms.push((f, g));
        Ok(())
    }

    pub fn terms(&self) -> &[(Signal, Signal)] {
        &self.terms
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    /// Sum of the two term lists.
    pub fn add(&self, other: &FiniteRankOperator) -> Result<FiniteRankOperator> {
        self.grid.ensure_same(&other.grid)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { grid: self.grid, terms })
    }

    pub fn scale(&self, c: Complex64) -> FiniteRankOperator {
        Self { grid: self.grid, terms: self.terms.iter().map(|(f, g)| (f.scale(c), g.clone())).collect() }
    }

    /// `sum_n <f_n, g_n>`.
    pub fn trace_terms(&self) -> Complex64 {
        self.terms.iter().map(|(f, g)| f.inner_unchecked(g)).sum()
    }

    /// `sum_n ||f_n|| ||g_n||`, an upper bound for the trace norm.
    pub fn nuclear_bound(&self) -> f64 {
        self.terms.iter().map(|(f, g)| f.norm() * g.norm()).sum()
    }

    /// `S* = sum_n g_n (x) f_n`.
    pub fn adjoint(&self) -> FiniteRankOperator {
        Self { grid: self.grid, terms: self.terms.iter().map(|(f, g)| (g.clone(), f.clone())).collect() }
    }

    /// `alpha_z(S) = pi(z) S pi(z)*`.
    pub fn translate(&self, z: &LatticePoint) -> Result<FiniteRankOperator> {
        self.grid.ensure_same(&z.grid())?;
        Ok(Self { grid: self.grid, terms: self.terms.iter().map(|(f, g)| (f.shift(z), g.shift(z))).collect() })
    }

    /// `P S P`.
    pub fn parity_conj(&self) -> FiniteRankOperator {
        Self { grid: self.grid, terms: self.terms.iter().map(|(f, g)| (f.reflect(), g.reflect())).collect() }
    }

    pub fn to_kernel_operator(&self) -> OperatorAsKernel {
        OperatorAsKernel { kernel: kernel_of(self) }
    }
}

impl LinearOperator for FiniteRankOperator {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn kernel(&self) -> KernelMatrix {
        kernel_of(self)
    }

    fn apply(&self, psi: &Signal) -> Result<Signal> {
        self.grid.ensure_same(&psi.grid())?;
        let mut out = Signal::zeros(self.grid);
        for (f, g) in &self.terms {
            let c = psi.inner_unchecked(g);
            for (o, v) in out.values_mut().iter_mut().zip(f.values()) {
                *o += c * v;
            }
        }
        Ok(out)
    }

    fn trace(&self) -> Complex64 {
        self.trace_terms()
    }
}

/// An operator given by its kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorAsKernel {
    kernel: KernelMatrix,
}

impl OperatorAsKernel {
    pub fn new(kernel: KernelMatrix) -> Self {
        Self { kernel }
    }

    pub fn kernel_ref(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn into_kernel(self) -> KernelMatrix {
        self.kernel
    }

    pub fn adjoint(&self) -> OperatorAsKernel {
        Self { kernel: self.kernel.transpose().conj() }
    }

    /// Truncated SVD of the discrete matrix `dt * K`; singular values below
    /// `rel_tol * sigma_max` are dropped.
    pub fn to_finite_rank(&self, rel_tol: f64) -> FiniteRankOperator {
        let grid = self.kernel.grid();
        let n = grid.n();
        let dt = grid.spacing();
        let triplets = svd_triplets(&scaled_matrix(&self.kernel));
        let smax = triplets.first().map_or(0.0, |t| t.0);
        let mut out = FiniteRankOperator::zero(grid);
        for (s, u, v) in triplets {
            if smax == 0.0 || s <= rel_tol * smax {
                break;
            }
            // dt K = sum s u v^*, and K(y, u) = f(y) conj(g(u)) with f = s u / dt, g = v
            let f: Vec<Complex64> = u.iter().map(|x| x * (s / dt)).collect();
            out.terms.push((Signal::new(grid, f).expect("n"), Signal::new(grid, v).expect("n")));
        }
        debug_assert!(out.terms.iter().all(|(f, _)| f.values().len() == n));
        out
    }
}

fn scaled_matrix(k: &KernelMatrix) -> DMatrix<Complex64> {
    let n = k.n();
    let dt = k.grid().spacing();
    DMatrix::from_fn(n, n, |i, j| k.get(i, j) * dt)
}

/// Singular triplets `(s, u, v)` of `a`, descending in `s`, with `s > 0`, from the Hermitian
/// eigenproblem of `[[0, a], [a^*, 0]]`, whose eigenpairs are `(+-s, (u, +-v) / sqrt 2)`.
/// (The complex bidiagonal SVD in nalgebra 0.35 can return factors that do not recompose
/// the input; the Hermitian eigensolver is backward stable.)
fn svd_triplets(a: &DMatrix<Complex64>) -> Vec<(f64, Vec<Complex64>, Vec<Complex64>)> {
    let n = a.nrows();
    let mut h = DMatrix::from_element(2 * n, 2 * n, ZERO);
    h.view_mut((0, n), (n, n)).copy_from(a);
    h.view_mut((n, 0), (n, n)).copy_from(&a.adjoint());
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let r2 = std::f64::consts::SQRT_2;
    order
        .into_iter()
        .take(n)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            let u = (0..n).map(|i| col[i] * r2).collect();
            let v = (0..n).map(|i| col[n + i] * r2).collect();
            (eig.eigenvalues[k], u, v)
        })
        .collect()
}

impl LinearOperator for OperatorAsKernel {
    fn grid(&self) -> GridSpec {
        self.kernel.grid()
    }

    fn kernel(&self) -> KernelMatrix {
        self.kernel.clone()
    }

    fn apply(&self, psi: &Signal) -> Result<Signal> {
        let grid = self.kernel.grid();
        grid.ensure_same(&psi.grid())?;
        let n = grid.n();
        let dt = grid.spacing();
        let k = self.kernel.values();
        let values = (0..n)
            .map(|y| k[y * n..(y + 1) * n].iter().zip(psi.values()).map(|(a, b)| a * b).sum::<Complex64>() * dt)
            .collect();
        Signal::new(grid, values)
    }
}

/// `K_S(y, u) = sum_n f_n(y) conj(g_n(u))`.
pub fn kernel_of(s: &FiniteRankOperator) -> KernelMatrix {
    let grid = s.grid;
    let n = grid.n();
    let mut v = vec![ZERO; n * n];
    for (f, g) in &s.terms {
        for (y, fy) in f.values().iter().enumerate() {
            let row = &mut v[y * n..(y + 1) * n];
            for (o, gu) in row.iter_mut().zip(g.values()) {
                *o += fy * gu.conj();
            }
        }
    }
    KernelMatrix::new(grid, v).expect("n * n")
}

/// `dt * sum_j K(t_j, t_j)`.
pub fn kernel_trace(k: &KernelMatrix) -> Complex64 {
    (0..k.n()).map(|j| k.get(j, j)).sum::<Complex64>() * k.grid().spacing()
}

/// Applies any operator.
pub fn apply(s: &dyn LinearOperator, psi: &Signal) -> Result<Signal> {
    s.apply(psi)
}

/// Both trace formulas of a finite-rank operator: `(dt * sum K(t,t), sum <f_n, g_n>)`.
pub fn trace(s: &FiniteRankOperator) -> (Complex64, Complex64) {
    (kernel_trace(&kernel_of(s)), s.trace_terms())
}

pub fn adjoint(s: &FiniteRankOperator) -> FiniteRankOperator {
    s.adjoint()
}

/// `S o T` for `S = sum f_n (x) g_n`, `T = sum h_m (x) l_m`: terms `<h_m, g_n> f_n (x) l_m`.
pub fn compose(s: &FiniteRankOperator, t: &FiniteRankOperator) -> Result<FiniteRankOperator> {
    s.grid.ensure_same(&t.grid)?;
    let mut terms = Vec::with_capacity(s.rank() * t.rank());
    for (f, g) in &s.terms {
        for (h, l) in &t.terms {
            let c = h.inner_unchecked(g);
            terms.push((f.scale(c), l.clone()));
        }
    }
    Ok(FiniteRankOperator { grid: s.grid, terms })
}

/// Kernel of `S o T` in the operational order `(S o T) psi = S(T psi)`:
/// `K(y, u) = int K_S(y, t) K_T(t, u) dt`.
pub fn compose_kernels(ks: &KernelMatrix, kt: &KernelMatrix) -> Result<KernelMatrix> {
    ks.grid().ensure_same(&kt.grid())?;
    let grid = ks.grid();
    let n = grid.n();
    let dt = grid.spacing();
    let a = DMatrix::from_row_slice(n, n, ks.values());
    let b = DMatrix::from_row_slice(n, n, kt.values());
    let c = a * b;
    Ok(KernelMatrix::from_index_fn(grid, |i, j| c[(i, j)] * dt))
}

/// `alpha_z` on a kernel: `exp(2 pi i (y - u) omega) K(y - x, u - x)`.
pub fn translate_kernel(k: &KernelMatrix, z: &LatticePoint) -> Result<KernelMatrix> {
    let grid = k.grid();
    grid.ensure_same(&z.grid())?;
    let n = grid.n() as i64;
    let (p, q) = (z.p(), z.q());
    Ok(KernelMatrix::from_index_fn(grid, |i, j| {
        let si = (i as i64 - p).rem_euclid(n) as usize;
        let sj = (j as i64 - p).rem_euclid(n) as usize;
        let d = (grid.offset(i) - grid.offset(j)) * q;
        k.get(si, sj) * cis2pi(d as f64 / n as f64)
    }))
}

/// `K(-y, -u)`.
pub fn parity_kernel(k: &KernelMatrix) -> KernelMatrix {
    let n = k.n();
    KernelMatrix::from_index_fn(k.grid(), |i, j| k.get((n - i) % n, (n - j) % n))
}

pub fn translate_op(s: &FiniteRankOperator, z: &LatticePoint) -> Result<FiniteRankOperator> {
    s.translate(z)
}

pub fn parity_conj(s: &FiniteRankOperator) -> FiniteRankOperator {
    s.parity_conj()
}

/// Outcome of [`is_positive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    /// `max |A - A*|` for `A = dt * K`.
    pub hermitian_deviation: f64,
    /// Smallest eigenvalue of the Hermitian part of `A`.
    pub min_eigenvalue: f64,
    /// Spectral norm of `A`.
    pub norm: f64,
    pub tolerance: f64,
}

/// Positivity of the discrete operator `A = dt * K`. With `tol = None` the tolerance
/// is `1e-10 * ||A||_2`.
pub fn is_positive(s: &dyn LinearOperator, tol: Option<f64>) -> PositivityReport {
    let k = s.kernel();
    let n = k.n();
    let a = scaled_matrix(&k);
    let herm_dev = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (a[(i, j)] - a[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    let norm = svd_triplets(&a).first().map_or(0.0, |t| t.0);
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eig = h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    let tolerance = tol.unwrap_or(1e-10 * norm);
    PositivityReport {
        positive: herm_dev <= tolerance && min_eig >= -tolerance,
        hermitian_deviation: herm_dev,
        min_eigenvalue: if n == 0 { 0.0 } else { min_eig },
        norm,
        tolerance,
    }
}

/// Singular values of `dt * K`, descending.
pub fn singular_values(k: &KernelMatrix) -> Vec<f64> {
    let n = k.n();
    let mut s: Vec<f64> = svd_triplets(&scaled_matrix(k)).into_iter().map(|t| t.0).collect();
    s.resize(n, 0.0);
    s
}

/// Random density operator `sum lambda_n h_n (x) h_n`: lambda_n > 0 with unit sum, `h_n`
/// the first R Hermite functions shifted by a small random lattice point and
/// re-orthonormalized on the grid. Deterministic per seed.
pub fn random_state(grid: GridSpec, rank: usize, seed: u64) -> Result<FiniteRankOperator> {
    if rank > grid.n() {
        return Err(QhaError::RankTooLarge { rank, n: grid.n() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = (grid.n() / 16).max(1) as i64;
    let z = LatticePoint::new(grid, rng.random_range(-reach..=reach), rng.random_range(-reach..=reach))?;
    let hs = orthonormalize(hermite_functions(grid, rank).iter().map(|h| h.shift(&z)).collect());
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let terms = hs
        .into_iter()
        .zip(weights)
        .map(|(h, w)| (h.scale(Complex64::new(w / total, 0.0)), h))
        .collect();
    FiniteRankOperator::new(grid, terms)
}

/// Modified Gram-Schmidt in the grid inner product.
pub fn orthonormalize(signals: Vec<Signal>) -> Vec<Signal> {
    let mut out: Vec<Signal> = Vec::with_capacity(signals.len());
    for mut v in signals {
        for _ in 0..2 {
            for e in &out {
                let c = v.inner_unchecked(e);
                let proj = e.scale(c);
                v = v.sub(&proj).expect("same grid");
            }
        }
        let nv = v.norm();
        if nv > 0.0 {
            out.push(v.scale(Complex64::new(1.0 / nv, 0.0)));
        }
    }
    out
}

/// Random signal with independent uniform real and imaginary parts in `[-1, 1)`.
pub fn random_signal(grid: GridSpec, rng: &mut impl Rng) -> Signal {
    let values = (0..grid.n())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Signal::new(grid, values).expect("n samples")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::tfa::{gaussian, hermite};

    fn smooth_op(grid: GridSpec, seed: u64, rank: usize) -> FiniteRankOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..rank)
            .map(|_| {
                let mut pick = || {
                    let p = rng.random_range(-3..=3);
                    let q = rng.random_range(-3..=3);
                    let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    hermite(grid, rng.random_range(0..3usize)).translate(p).modulate(q).scale(c)
                };
                (pick(), pick())
            })
            .collect();
        FiniteRankOperator::new(grid, terms).unwrap()
    }

    #[test]
    fn rank_one_basics() {
        let g = make_grid(64, 8.0).unwrap();
        let phi = gaussian(g);
        let p = FiniteRankOperator::rank_one(&phi, &phi).unwrap();
        assert!(p.apply(&phi).unwrap().max_abs_diff(&phi) < 1e-14);
        let (a, b) = trace(&p);
        assert!((a - 1.0).norm() < 1e-12 && (b - 1.0).norm() < 1e-12);
        assert!(compose(&p, &p).unwrap().apply(&phi).unwrap().max_abs_diff(&phi) < 1e-13);
        assert!(kernel_of(&FiniteRankOperator::zero(g)).max_abs() == 0.0);
    }

    #[test]
    fn kernel_path_matches_terms() {
        let g = make_grid(32, 8.0).unwrap();
        let s = smooth_op(g, 1, 3);
        let psi = hermite(g, 1).modulate(2);
        let a = s.apply(&psi).unwrap();
        let b = s.to_kernel_operator().apply(&psi).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn composition_order_is_operational() {
        let g = make_grid(16, 8.0).unwrap();
        let s = smooth_op(g, 2, 2);
        let t = smooth_op(g, 3, 2);
        let psi = gaussian(g).translate(1);
        let direct = s.apply(&t.apply(&psi).unwrap()).unwrap();
        let st = compose(&s, &t).unwrap();
        assert!(st.apply(&psi).unwrap().max_abs_diff(&direct) < 1e-12);
        let ks = compose_kernels(&kernel_of(&s), &kernel_of(&t)).unwrap();
        assert!(ks.max_abs_diff(&kernel_of(&st)) < 1e-10);
        // the reversed integral is the kernel of T o S, which differs
        let rev = compose_kernels(&kernel_of(&t), &kernel_of(&s)).unwrap();
        assert!(rev.max_abs_diff(&kernel_of(&st)) > 1e-3);
    }

    #[test]
    fn translation_and_parity_kernels() {
        let g = make_grid(16, 8.0).unwrap();
        let s = smooth_op(g, 4, 2);
        let z = LatticePoint::new(g, 3, -5).unwrap();
        let kt = translate_kernel(&kernel_of(&s), &z).unwrap();
        assert!(kt.max_abs_diff(&kernel_of(&s.translate(&z).unwrap())) < 1e-12);
        let kp = parity_kernel(&kernel_of(&s));
        assert!(kp.max_abs_diff(&kernel_of(&s.parity_conj())) < 1e-14);
        assert_eq!(s.parity_conj().parity_conj(), s);
    }

    #[test]
    fn positivity() {
        let g = make_grid(32, 8.0).unwrap();
        let st = random_state(g, 3, 7).unwrap();
        let r = is_positive(&st, None);
        assert!(r.positive, "{r:?}");
        let f = hermite(g, 0);
        let h = hermite(g, 1);
        let r = is_positive(&FiniteRankOperator::rank_one(&f, &h).unwrap(), None);
        assert!(!r.positive && r.hermitian_deviation > 1e-3);
        assert!(matches!(random_state(g, 33, 0), Err(QhaError::RankTooLarge { .. })));
        assert_eq!(random_state(g, 3, 7).unwrap(), random_state(g, 3, 7).unwrap());
        assert!((random_state(g, 3, 7).unwrap().trace_terms() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn svd_truncation_recovers_operator() {
        let g = make_grid(16, 8.0).unwrap();
        let s = smooth_op(g, 5, 2);
        let k = s.to_kernel_operator();
        let fr = k.to_finite_rank(1e-12);
        assert!(fr.rank() <= 2);
        assert!(kernel_of(&fr).max_abs_diff(&kernel_of(&s)) < 1e-10);
    }
}
