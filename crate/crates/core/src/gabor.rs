//! Gabor matrices `M(T)(z, w) = <T pi(w) phi, pi(z) phi>` on a (sub)lattice, twisted
//! convolution of 4-index arrays, and point reconstruction of `W_tau T` from `M(T)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{QhaError, Result};
use crate::field::{cis2pi, PhaseSpaceFunction, Signal, ZERO};
use crate::grid::{GridSpec, LatticePoint, Tau};
use crate::operator::{FiniteRankOperator, LinearOperator};
use crate::tfa::{tau_stft_unchecked, tfs_tau};

/// Largest number of sublattice points per axis accepted without an explicit override.
pub const MAX_POINTS_PER_AXIS: usize = 16;

/// The centered sublattice of phase-space points whose offsets are multiples of `stride`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubLattice {
    grid: GridSpec,
    stride: usize,
    m: usize,
}

impl SubLattice {
    pub fn new(grid: GridSpec, stride: usize) -> Result<Self> {
        if stride == 0 || grid.n() % (2 * stride) != 0 {
            return Err(QhaError::InvalidArgument(format!(
                "stride {stride} must be positive with N / stride even (N = {})",
                grid.n()
            )));
        }
        Ok(Self { grid, stride, m: grid.n() / stride })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Points per axis.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Signed offset (in sublattice steps) of a sublattice index.
    #[inline]
    pub fn offset(&self, a: usize) -> i64 {
        a as i64 - (self.m / 2) as i64
    }

    /// Sublattice index of a signed offset, wrapped.
    #[inline]
    pub fn index_of(&self, off: i64) -> usize {
        (off + (self.m / 2) as i64).rem_euclid(self.m as i64) as usize
    }

    /// Full-grid index of a sublattice index.
    #[inline]
    pub fn grid_index(&self, a: usize) -> usize {
        self.grid.index_of(self.offset(a) * self.stride as i64)
    }

    pub fn point(&self, a: usize, b: usize) -> LatticePoint {
        LatticePoint::from_indices(self.grid, self.grid_index(a), self.grid_index(b))
    }

    /// Area of one sublattice cell, `stride^2 / N`.
    pub fn cell(&self) -> f64 {
        (self.stride * self.stride) as f64 / self.grid.n() as f64
    }

    /// Sublattice indices of a full-lattice point, if it lies on the sublattice.
    pub fn locate(&self, z: &LatticePoint) -> Option<(usize, usize)> {
        let s = self.stride as i64;
        if z.p() % s != 0 || z.q() % s != 0 {
            return None;
        }
        Some((self.index_of(z.p() / s), self.index_of(z.q() / s)))
    }
}

/// A complex function of `(z, w)` on a sublattice, stored as `[a][b][c][d]` for
/// `z = (a, b)`, `w = (c, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice4 {
    lattice: SubLattice,
    values: Vec<Complex64>,
}

impl Lattice4 {
    pub fn zeros(lattice: SubLattice) -> Self {
        let m = lattice.m;
        Self { lattice, values: vec![ZERO; m * m * m * m] }
    }

    pub fn from_fn(lattice: SubLattice, f: impl Fn(usize, usize, usize, usize) -> Complex64 + Sync) -> Self {
        let m = lattice.m;
        let values = (0..m * m * m * m)
            .into_par_iter()
            .map(|idx| {
                let (a, r) = (idx / (m * m * m), idx % (m * m * m));
                let (b, r) = (r / (m * m), r % (m * m));
                f(a, b, r / m, r % m)
            })
            .collect();
        Self { lattice, values }
    }

    #[inline]
    pub fn lattice(&self) -> SubLattice {
        self.lattice
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let m = self.lattice.m;
        self.values[((a * m + b) * m + c) * m + d]
    }

    /// Value at signed sublattice offsets, wrapped.
    #[inline]
    pub fn at(&self, z: (i64, i64), w: (i64, i64)) -> Complex64 {
        let l = &self.lattice;
        self.get(l.index_of(z.0), l.index_of(z.1), l.index_of(w.0), l.index_of(w.1))
    }

    /// `F*(z, w) = conj(F(-z, -w))`.
    pub fn star(&self) -> Lattice4 {
        let l = self.lattice;
        Self::from_fn(l, |a, b, c, d| {
            self.at((-l.offset(a), -l.offset(b)), (-l.offset(c), -l.offset(d))).conj()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Lattice4) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Lattice4) -> Result<Lattice4> {
        self.same_shape(other)?;
        Ok(Self { lattice: self.lattice, values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() })
    }

    pub fn scale(&self, c: Complex64) -> Lattice4 {
        Self { lattice: self.lattice, values: self.values.iter().map(|v| v * c).collect() }
    }

    fn same_shape(&self, other: &Lattice4) -> Result<()> {
        if self.lattice == other.lattice {
            Ok(())
        } else {
            Err(QhaError::ShapeMismatch(format!(
                "lattices differ: {:?} vs {:?}",
                self.lattice, other.lattice
            )))
        }
    }
}

/// Phase used by [`twisted_convolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistPhase {
    /// `exp(2 pi i (omega x' - u' v))`, i.e. `(z, w) Theta (z', w')`.
    Theta,
    /// `exp(-2 pi i (omega x' - u' v))`.
    NegTheta,
    /// No phase: a plain periodic 4D convolution.
    Off,
}

/// `(F # H)(z, w) = sum F(z', w') H(z - z', w - w') phase(z, w, z', w') dz' dw'`
/// over the sublattice, cell weight `(stride^2 / N)^2`. Direct sum, O(M^8) for M points per axis.
pub fn twisted_convolve(f: &Lattice4, h: &Lattice4, phase: TwistPhase) -> Result<Lattice4> {
    f.same_shape(h)?;
    let l = f.lattice;
    let m = l.m;
    let n = l.grid.n() as i64;
    let s2 = (l.stride * l.stride) as i64;
    let sign = match phase {
        TwistPhase::Theta => 1.0,
        TwistPhase::NegTheta => -1.0,
        TwistPhase::Off => 0.0,
    };
    // table of exp(2 pi i sign k / N)
    let table: Vec<Complex64> = (0..n).map(|k| cis2pi(sign * k as f64 / n as f64)).collect();
    let ph = |a: i64, b: i64| table[(a * b * s2).rem_euclid(n) as usize];
    let w = l.cell() * l.cell();
    Ok(Lattice4::from_fn(l, |a, b, c, d| {
        let (x, om, u, v) = (l.offset(a), l.offset(b), l.offset(c), l.offset(d));
        let mut acc = ZERO;
        for a2 in 0..m {
            let x2 = l.offset(a2);
            let p1 = ph(om, x2);
            let ia = l.index_of(x - x2);
            for b2 in 0..m {
                let ib = l.index_of(om - l.offset(b2));
                for c2 in 0..m {
                    let u2 = l.offset(c2);
                    let p = p1 * ph(-u2, v);
                    let ic = l.index_of(u - u2);
                    let fb = &f.values[((a2 * m + b2) * m + c2) * m..((a2 * m + b2) * m + c2 + 1) * m];
                    let hb = &h.values[((ia * m + ib) * m + ic) * m..((ia * m + ib) * m + ic + 1) * m];
                    let mut inner = ZERO;
                    for (d2, fv) in fb.iter().enumerate() {
                        inner += fv * hb[l.index_of(v - l.offset(d2))];
                    }
                    acc += inner * p;
                }
            }
        }
        acc * w
    }))
}

/// Gabor matrix of an operator with respect to a unit-norm window.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborMatrix {
    window: Signal,
    data: Lattice4,
}

/// Build options for [`gabor_matrix_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborOptions {
    pub stride: usize,
    /// Lifts the points-per-axis guardrail.
    pub allow_large: bool,
    /// `tau` of the shifts `pi_tau` used for both slots; `0` gives the plain matrix.
    pub tau: f64,
}

impl Default for GaborOptions {
    fn default() -> Self {
        Self { stride: 1, allow_large: false, tau: 0.0 }
    }
}

/// `M(T)(z, w) = sum_n V_phi f_n(z) conj(V_phi g_n(w))`.
pub fn gabor_matrix(t: &FiniteRankOperator, window: &Signal, stride: usize) -> Result<GaborMatrix> {
    gabor_matrix_with(t, window, GaborOptions { stride, ..GaborOptions::default() })
}

pub fn gabor_matrix_with(t: &FiniteRankOperator, window: &Signal, opts: GaborOptions) -> Result<GaborMatrix> {
    let grid = LinearOperator::grid(t);
    grid.ensure_same(&window.grid())?;
    let norm = window.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(QhaError::WindowNotNormalized(norm));
    }
    let l = SubLattice::new(grid, opts.stride)?;
    if l.m > MAX_POINTS_PER_AXIS && !opts.allow_large {
        return Err(QhaError::Guardrail(format!(
            "{} lattice points per axis exceeds {MAX_POINTS_PER_AXIS}; raise the stride or allow large arrays",
            l.m
        )));
    }
    let tau = Tau::new(opts.tau)?;
    let m = l.m;
    let sub = |f: &PhaseSpaceFunction| -> Vec<Complex64> {
        (0..m * m).map(|i| f.get(l.grid_index(i / m), l.grid_index(i % m))).collect()
    };
    let pairs: Vec<(Vec<Complex64>, Vec<Complex64>)> = t
        .terms()
        .iter()
        .map(|(f, g)| (sub(&tau_stft_unchecked(f, window, tau)), sub(&tau_stft_unchecked(g, window, tau))))
        .collect();
    let data = Lattice4::from_fn(l, |a, b, c, d| {
        pairs.iter().map(|(vf, vg)| vf[a * m + b] * vg[c * m + d].conj()).sum()
    });
    Ok(GaborMatrix { window: window.clone(), data })
}

impl GaborMatrix {
    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn data(&self) -> &Lattice4 {
        &self.data
    }

    pub fn lattice(&self) -> SubLattice {
        self.data.lattice
    }

    /// `M(T)(z, w)` for two sublattice points.
    pub fn entry(&self, z: &LatticePoint, w: &LatticePoint) -> Result<Complex64> {
        let l = self.data.lattice;
        let off = || QhaError::InvalidArgument("point is not on the Gabor sublattice".into());
        let (a, b) = l.locate(z).ok_or_else(off)?;
        let (c, d) = l.locate(w).ok_or_else(off)?;
        Ok(self.data.get(a, b, c, d))
    }

    /// `M(T)(z, z)` as a phase-space function on the sublattice (stride 1: the full lattice).
    pub fn diagonal(&self) -> Vec<Complex64> {
        let m = self.data.lattice.m;
        (0..m * m).map(|i| self.data.get(i / m, i % m, i / m, i % m)).collect()
    }

    /// `sum_z M(T)(z, z)` times the sublattice cell area.
    pub fn diagonal_integral(&self) -> Complex64 {
        self.diagonal().iter().sum::<Complex64>() * self.data.lattice.cell()
    }
}

/// Oracle: `<T pi_tau(w) phi, pi_tau(z) phi>` by applying the operator.
pub fn gabor_entry_direct(
    t: &dyn LinearOperator,
    window: &Signal,
    z: &LatticePoint,
    w: &LatticePoint,
    tau: Tau,
) -> Result<Complex64> {
    let tw = t.apply(&tfs_tau(window, w, tau)?)?;
    tw.inner(&tfs_tau(window, z, tau)?)
}

/// Phase constant `c(tau)` in the reconstruction formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConstant {
    /// `c = 1/2 - tau`, consistent with `F_tau W = exp(-2 pi i (1/2 - tau) x omega) F_{1/2} W`.
    #[default]
    Derived,
    /// `c = 1/2 - 3 tau / 4`.
    AsPrinted,
}

impl PhaseConstant {
    pub fn value(self, tau: Tau) -> f64 {
        match self {
            PhaseConstant::Derived => 0.5 - tau.value(),
            PhaseConstant::AsPrinted => 0.5 - 0.75 * tau.value(),
        }
    }
}

/// `W_tau T(z) = int int exp(-2 pi i [(omega x' - omega' x) + c x' omega' + x' v])
///                M(T)(z'/2 - w, -z'/2 - w) dw dz'`
/// at the requested points. `z'` runs over the centered sublattice box and, for each `z'`,
/// `w` over the coset `-w0 - z'/2` with `w0` on the sublattice, so both arguments of `M` are
/// sublattice points and no half-lattice values are needed.
pub fn reconstruct_wigner(
    gm: &GaborMatrix,
    tau: Tau,
    points: &[LatticePoint],
    constant: PhaseConstant,
) -> Result<Vec<Complex64>> {
    let l = gm.data.lattice;
    let m = l.m as i64;
    if points.len() > 8 {
        return Err(QhaError::Guardrail(format!("{} points requested, at most 8 allowed", points.len())));
    }
    let n = l.grid.n() as f64;
    let s = l.stride as i64;
    // with w = -w0 - z'/2 the printed phase becomes x' v0 + (1/2 - c) x' omega' (v0 on the lattice)
    let c2 = 0.5 - constant.value(tau);
    let weight = l.cell() * l.cell();
    points
        .iter()
        .map(|z| {
            l.grid.ensure_same(&z.grid())?;
            let (px, qw) = (z.p(), z.q());
            let terms: Vec<Complex64> = (-m / 2..m / 2)
                .into_par_iter()
                .map(|a| {
                    let mut row = ZERO;
                    for b in -m / 2..m / 2 {
                        let (xp, wp) = (a * s, b * s);
                        let base = -((qw * xp - wp * px) as f64) + c2 * (xp * wp) as f64;
                        let mut inner = ZERO;
                        for v in -m / 2..m / 2 {
                            let mut col = ZERO;
                            for u in -m / 2..m / 2 {
                                col += gm.data.at((a + u, b + v), (u, v));
                            }
                            inner += col * cis2pi((xp * v * s) as f64 / n);
                        }
                        row += inner * cis2pi(base / n);
                    }
                    row
                })
                .collect();
            Ok(terms.iter().sum::<Complex64>() * weight)
        })
        .collect()
}
