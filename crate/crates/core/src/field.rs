//! Sampled objects: signals on the line, their spectra, and complex functions
//! on the three N x N grids (phase space, kernel, spatial pair).

use std::f64::consts::PI;
use std::marker::PhantomData;

use num_complex::Complex64;

use crate::dft::{centered_dft, Direction};
use crate::error::{QhaError, Result};
use crate::grid::{GridSpec, LatticePoint};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `exp(2 pi i t)`.
#[inline]
pub(crate) fn cis2pi(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

fn check_len(grid: &GridSpec, len: usize, expected: usize) -> Result<()> {
    if len == expected {
        Ok(())
    } else {
        Err(QhaError::ShapeMismatch(format!(
            "expected {expected} samples for N = {}, got {len}",
            grid.n()
        )))
    }
}

fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A complex function sampled at the grid points `t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len(), grid.n())?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![ZERO; grid.n()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        Self { grid, values: grid.times().into_iter().map(f).collect() }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `<f, g> = dt * sum f_j conj(g_j)`: linear in `self`, conjugate-linear in `other`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Signal) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    pub fn normalized(&self) -> Result<Signal> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QhaError::ZeroWindow);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Signal {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn conj(&self) -> Signal {
        Signal { grid: self.grid, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// Periodic translation by `p` samples: `(T_x f)(t_j) = f(t_j - x)` with `x = p dt`.
    pub fn translate(&self, p: i64) -> Signal {
        let n = self.grid.n() as i64;
        let values =
            (0..n).map(|j| self.values[(j - p).rem_euclid(n) as usize]).collect();
        Signal { grid: self.grid, values }
    }

    /// Modulation by `omega = q / L`: `(M_omega f)(t_j) = exp(2 pi i omega t_j) f(t_j)`.
    pub fn modulate(&self, q: i64) -> Signal {
        let n = self.grid.n() as f64;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| v * cis2pi((q * self.grid.offset(j)) as f64 / n))
            .collect();
        Signal { grid: self.grid, values }
    }

    /// Parity `(P f)(t) = f(-t)`; on the grid index `j` maps to `(N - j) mod N`.
    pub fn reflect(&self) -> Signal {
        let n = self.grid.n();
        Signal { grid: self.grid, values: (0..n).map(|j| self.values[(n - j) % n]).collect() }
    }

    /// `pi(z) f = M_omega T_x f`.
    pub fn shift(&self, z: &LatticePoint) -> Signal {
        self.translate(z.p()).modulate(z.q())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    /// Trigonometric interpolant of the periodized samples.
    pub fn interpolant(&self) -> TrigInterpolant {
        TrigInterpolant::new(self)
    }
}

/// Samples of a transform at the centered frequencies `omega_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len(), grid.n())?;
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Discrete `L^2` norm with weight `1/L` per bin.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.grid.l()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }
}

/// Evaluates `f(p) = (1/L) sum_k fhat(omega_k) exp(2 pi i omega_k p)` at arbitrary `p`,
/// using the same centered frequency set as the grid (so it reproduces the samples).
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(signal: &Signal) -> Self {
        let grid = signal.grid();
        let mut coeffs = signal.values().to_vec();
        centered_dft(&mut coeffs, Direction::Forward);
        // dt from the forward transform, 1/L from the inverse: 1/N overall.
        let scale = 1.0 / grid.n() as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Self { grid, coeffs }
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * cis2pi(self.grid.freq(k) * p))
            .sum()
    }
}

/// Axis semantics of an N x N field.
pub trait Axes: Clone + std::fmt::Debug + PartialEq {
    /// Quadrature weight of one sample.
    fn weight(grid: &GridSpec) -> f64;
    /// Coordinate of the first-axis index.
    fn coord0(grid: &GridSpec, i: usize) -> f64;
    /// Coordinate of the second-axis index.
    fn coord1(grid: &GridSpec, j: usize) -> f64;
}

/// Axes `(x, omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceAxes;

/// Axes `(y, u)`: two spatial coordinates of an integral kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAxes;

/// Axes `(p, q)`: two spatial coordinates of an intermediate function that is
/// not an operator kernel (e.g. a partial inverse Fourier transform of a symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialAxes;

impl Axes for PhaseSpaceAxes {
    fn weight(grid: &GridSpec) -> f64 {
        grid.cell()
    }
    fn coord0(grid: &GridSpec, i: usize) -> f64 {
        grid.time(i)
    }
    fn coord1(grid: &GridSpec, j: usize) -> f64 {
        grid.freq(j)
    }
}

impl Axes for KernelAxes {
    fn weight(grid: &GridSpec) -> f64 {
        grid.spacing() * grid.spacing()
    }
    fn coord0(grid: &GridSpec, i: usize) -> f64 {
        grid.time(i)
    }
    fn coord1(grid: &GridSpec, j: usize) -> f64 {
        grid.time(j)
    }
}

impl Axes for SpatialAxes {
    fn weight(grid: &GridSpec) -> f64 {
        grid.spacing() * grid.spacing()
    }
    fn coord0(grid: &GridSpec, i: usize) -> f64 {
        grid.time(i)
    }
    fn coord1(grid: &GridSpec, j: usize) -> f64 {
        grid.time(j)
    }
}

/// Complex N x N array on a grid, row-major, centered layout on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2<A: Axes> {
    grid: GridSpec,
    values: Vec<Complex64>,
    _axes: PhantomData<A>,
}

/// Function of `(x, omega)`: Wigner distributions, STFTs, symbols, spreading functions.
pub type PhaseSpaceFunction = Field2<PhaseSpaceAxes>;
/// Integral kernel `K(y, u)` of an operator.
pub type KernelMatrix = Field2<KernelAxes>;
/// Function of two spatial variables that is not a kernel.
pub type SpatialField = Field2<SpatialAxes>;

impl<A: Axes> Field2<A> {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len(), grid.n() * grid.n())?;
        Ok(Self { grid, values, _axes: PhantomData })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n() * grid.n());
        Self { grid, values, _axes: PhantomData }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_vec_unchecked(grid, vec![ZERO; grid.n() * grid.n()])
    }

    /// Fills the array from index pairs.
    pub fn from_index_fn(grid: GridSpec, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        Self::from_vec_unchecked(grid, values)
    }

    /// Samples a function of the two axis coordinates.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Self {
        Self::from_index_fn(grid, |i, j| f(A::coord0(&grid, i), A::coord1(&grid, j)))
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.n() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let n = self.grid.n();
        self.values[i * n + j] = v;
    }

    /// Value at signed offsets, wrapped periodically.
    #[inline]
    pub fn at_offsets(&self, p: i64, q: i64) -> Complex64 {
        self.get(self.grid.index_of(p), self.grid.index_of(q))
    }

    pub fn weight(&self) -> f64 {
        A::weight(&self.grid)
    }

    /// Weighted sum of all samples (the Riemann sum of the integral).
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.weight()
    }

    /// Weighted inner product, conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.weight())
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Largest pointwise difference; grids are assumed equal.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    /// `max |self - other| / max |other|`, or the absolute difference when `other` vanishes.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        let scale = other.max_abs();
        let d = self.max_abs_diff(other);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_vec_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_vec_unchecked(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_vec_unchecked(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self::from_vec_unchecked(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        ))
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        Self::from_index_fn(self.grid, |i, j| self.values[j * n + i])
    }
}

impl PhaseSpaceFunction {
    pub fn at(&self, z: &LatticePoint) -> Complex64 {
        let (i, j) = z.indices();
        self.get(i, j)
    }

    /// `F*(z) = conj(F(-z))` with periodic negation on the lattice.
    pub fn reflect_conj(&self) -> PhaseSpaceFunction {
        let g = self.grid;
        Self::from_index_fn(g, |i, j| {
            self.get(g.index_of(-g.offset(i)), g.index_of(-g.offset(j))).conj()
        })
    }

    /// A lattice delta with unit integral: `N` at the origin, zero elsewhere.
    pub fn delta(grid: GridSpec) -> PhaseSpaceFunction {
        let mut f = Self::zeros(grid);
        let c = grid.center();
        f.set(c, c, Complex64::new(1.0 / grid.cell(), 0.0));
        f
    }
}

/// Periodic 2D trigonometric interpolant of an N x N field.
#[derive(Debug, Clone)]
pub struct TrigInterpolant2 {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    freq0: Vec<f64>,
    freq1: Vec<f64>,
}

impl TrigInterpolant2 {
    /// For kernel or spatial fields both axes have period `L`.
    pub fn spatial<A: Axes>(field: &Field2<A>) -> Self {
        let g = field.grid();
        let n = g.n();
        let mut coeffs = field.values().to_vec();
        crate::dft::centered_dft_rows(&mut coeffs, n, Direction::Forward);
        crate::dft::centered_dft_cols(&mut coeffs, n, n, Direction::Forward);
        let scale = 1.0 / (n * n) as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Self { grid: g, coeffs, freq0: g.freqs(), freq1: g.freqs() }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn eval(&self, a: f64, b: f64) -> Complex64 {
        let n = self.grid.n();
        let eb: Vec<Complex64> = self.freq1.iter().map(|&w| cis2pi(w * b)).collect();
        let mut acc = ZERO;
        for (i, &w) in self.freq0.iter().enumerate() {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let inner: Complex64 = row.iter().zip(&eb).map(|(c, e)| c * e).sum();
            acc += inner * cis2pi(w * a);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn shifts_and_reflection() {
        let g = make_grid(8, 8.0).unwrap();
        let f = Signal::from_fn(g, |t| Complex64::new(t, 0.0));
        let tf = f.translate(1);
        assert_eq!(tf.values()[5].re, 0.0); // f(1 - 1)
        assert_eq!(tf.values()[0].re, 3.0); // wraps: f(-4 - 1) = f(3)
        let pf = f.reflect();
        assert_eq!(pf.values()[5].re, -1.0);
        assert_eq!(pf.values()[0].re, -4.0); // -(-4) = 4 wraps to -4
        assert_eq!(pf.reflect(), f);
    }

    #[test]
    fn interpolant_reproduces_samples() {
        let g = make_grid(16, 8.0).unwrap();
        let f = Signal::from_fn(g, |t| Complex64::new((-t * t).exp(), (0.3 * t).sin()));
        let it = f.interpolant();
        for (j, t) in g.times().into_iter().enumerate() {
            assert!((it.eval(t) - f.values()[j]).norm() < 1e-12);
            assert!((it.eval(t + g.l()) - f.values()[j]).norm() < 1e-12);
        }
        let field = SpatialField::from_fn(g, |a, b| Complex64::new((-a * a - b * b).exp(), a * 0.0));
        let it2 = TrigInterpolant2::spatial(&field);
        for &(i, j) in &[(0usize, 0usize), (3, 9), (8, 8), (15, 2)] {
            assert!((it2.eval(g.time(i), g.time(j)) - field.get(i, j)).norm() < 1e-12);
        }
    }

    #[test]
    fn inner_product_conventions() {
        let g = make_grid(8, 4.0).unwrap();
        let f = Signal::from_fn(g, |t| Complex64::new(1.0, t));
        let h = Signal::from_fn(g, |t| Complex64::new(t, 2.0));
        let i = Complex64::i();
        let lhs = f.scale(i).inner(&h).unwrap();
        assert!((lhs - i * f.inner(&h).unwrap()).norm() < 1e-14);
        let rhs = f.inner(&h.scale(i)).unwrap();
        assert!((rhs + i * f.inner(&h).unwrap()).norm() < 1e-14);
        let other = make_grid(8, 8.0).unwrap();
        assert!(f.inner(&Signal::zeros(other)).is_err());
    }

    #[test]
    fn delta_has_unit_integral() {
        let g = make_grid(16, 4.0).unwrap();
        let d = PhaseSpaceFunction::delta(g);
        assert!((d.integral() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
