//! Discretization contract: the periodized sample grid on the line, the
//! centered frequency grid, and the N x N phase-space lattice built from them.
//!
//! Sample points are `t_j = -L/2 + j * L/N` and frequencies `omega_k = (k - N/2) / L`
//! for `j, k = 0..N`. Index `N/2` is the origin on both axes. One phase-space cell
//! has area `(L/N) * (1/L) = 1/N`.

use crate::error::{QhaError, Result};

/// Periodized sampling of the line with `n` points over an extent `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    l: f64,
}

/// Builds a grid, rejecting odd or tiny `n` and non-positive `l`.
pub fn make_grid(n: usize, l: f64) -> Result<GridSpec> {
    GridSpec::new(n, l)
}

impl GridSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 4 {
            return Err(QhaError::InvalidGrid(format!("N = {n} is below the minimum of 4")));
        }
        if n % 2 != 0 {
            return Err(QhaError::InvalidGrid(format!("N = {n} must be even")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(QhaError::InvalidGrid(format!("L = {l} must be positive and finite")));
        }
        Ok(Self { n, l })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Sample spacing `L/N`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Frequency spacing `1/L`.
    #[inline]
    pub fn freq_spacing(&self) -> f64 {
        1.0 / self.l
    }

    /// Area of one phase-space lattice cell, `1/N`.
    #[inline]
    pub fn cell(&self) -> f64 {
        self.spacing() * self.freq_spacing()
    }

    /// Index of the origin on either axis.
    #[inline]
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Signed offset of an index from the origin.
    #[inline]
    pub fn offset(&self, idx: usize) -> i64 {
        idx as i64 - self.center() as i64
    }

    /// Index of a signed offset, wrapped periodically into `0..N`.
    #[inline]
    pub fn index_of(&self, offset: i64) -> usize {
        (offset + self.center() as i64).rem_euclid(self.n as i64) as usize
    }

    /// Centered representative of an offset, in `-N/2..N/2`.
    #[inline]
    pub fn wrap_offset(&self, offset: i64) -> i64 {
        self.offset(self.index_of(offset))
    }

    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        self.offset(j) as f64 * self.spacing()
    }

    #[inline]
    pub fn freq(&self, k: usize) -> f64 {
        self.offset(k) as f64 / self.l
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.time(j)).collect()
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.freq(k)).collect()
    }

    /// Largest frequency magnitude on the centered grid, `N / (2L)`.
    pub fn freq_extent(&self) -> f64 {
        self.n as f64 / (2.0 * self.l)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(QhaError::GridMismatch(format!(
                "(N = {}, L = {}) vs (N = {}, L = {})",
                self.n, self.l, other.n, other.l
            )))
        }
    }
}

/// The interpolation parameter of the tau-calculus, always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tau(f64);

impl Tau {
    pub const ZERO: Tau = Tau(0.0);
    pub const WEYL: Tau = Tau(0.5);
    pub const ONE: Tau = Tau(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Tau(value))
        } else {
            Err(QhaError::TauOutOfRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - tau`.
    #[inline]
    pub fn complement(self) -> Tau {
        Tau(1.0 - self.0)
    }
}

impl std::fmt::Display for Tau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The tau sweep used by the identity suites: endpoints, midpoint and two generic values.
pub const TAU_SWEEP: [f64; 5] = [0.0, 0.3, 0.5, 0.77, 1.0];

/// A point `z = (x, omega)` of the phase-space lattice, stored as signed offsets
/// `x = p * L/N`, `omega = q / L` with `-N/2 <= p, q < N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    grid: GridSpec,
    p: i64,
    q: i64,
}

impl LatticePoint {
    pub fn new(grid: GridSpec, p: i64, q: i64) -> Result<Self> {
        let half = grid.center() as i64;
        if p < -half || p >= half || q < -half || q >= half {
            return Err(QhaError::OffLattice {
                x: p as f64 * grid.spacing(),
                omega: q as f64 / grid.l(),
            });
        }
        Ok(Self { grid, p, q })
    }

    pub fn origin(grid: GridSpec) -> Self {
        Self { grid, p: 0, q: 0 }
    }

    /// Locates `(x, omega)` on the lattice; coordinates must be integer multiples
    /// of the spacings (to within 1e-9 of a cell) and inside the centered ranges.
    pub fn from_coords(grid: GridSpec, x: f64, omega: f64) -> Result<Self> {
        let off = || QhaError::OffLattice { x, omega };
        let px = x / grid.spacing();
        let qw = omega * grid.l();
        if !px.is_finite() || !qw.is_finite() {
            return Err(off());
        }
        let (p, q) = (px.round(), qw.round());
        if (px - p).abs() > 1e-9 || (qw - q).abs() > 1e-9 {
            return Err(off());
        }
        Self::new(grid, p as i64, q as i64).map_err(|_| off())
    }

    /// Builds the point sitting at array indices `(xi, wi)`.
    pub fn from_indices(grid: GridSpec, xi: usize, wi: usize) -> Self {
        Self { grid, p: grid.offset(xi % grid.n()), q: grid.offset(wi % grid.n()) }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn p(&self) -> i64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> i64 {
        self.q
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.p as f64 * self.grid.spacing()
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        self.q as f64 / self.grid.l()
    }

    /// Array indices `(xi, wi)` of this point.
    #[inline]
    pub fn indices(&self) -> (usize, usize) {
        (self.grid.index_of(self.p), self.grid.index_of(self.q))
    }

    /// The product `x * omega`, computed exactly as `p q / N`.
    #[inline]
    pub fn x_omega(&self) -> f64 {
        (self.p * self.q) as f64 / self.grid.n() as f64
    }

    /// Sum without wraparound; `None` when it leaves the centered ranges.
    pub fn checked_add(&self, other: &LatticePoint) -> Option<LatticePoint> {
        LatticePoint::new(self.grid, self.p + other.p, self.q + other.q).ok()
    }

    /// Periodic sum. Time-frequency shifts with `tau = 0` are periodic on the
    /// lattice; tau-phases are not, so prefer `checked_add` for tau identities.
    pub fn wrapping_add(&self, other: &LatticePoint) -> LatticePoint {
        Self {
            grid: self.grid,
            p: self.grid.wrap_offset(self.p + other.p),
            q: self.grid.wrap_offset(self.q + other.q),
        }
    }

    pub fn wrapping_neg(&self) -> LatticePoint {
        Self { grid: self.grid, p: self.grid.wrap_offset(-self.p), q: self.grid.wrap_offset(-self.q) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_n8_l8_points() {
        let g = make_grid(8, 8.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.times(), vec![-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let expected: Vec<f64> = (-4..4).map(|k| k as f64 / 8.0).collect();
        assert_eq!(g.freqs(), expected);
        assert_eq!(g.cell(), 1.0 / 8.0);
    }

    #[test]
    fn grid_n64_l8_ranges() {
        let g = make_grid(64, 8.0).unwrap();
        assert_eq!(g.spacing(), 0.125);
        assert_eq!(g.freq(0), -4.0);
        assert_eq!(g.freq(63), 3.875);
        // critical sampling: spacing * (1/L) * N = 1
        assert!((g.spacing() * g.freq_spacing() * g.n() as f64 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(5, 8.0), Err(QhaError::InvalidGrid(_))));
        assert!(make_grid(2, 8.0).is_err());
        assert!(make_grid(0, 8.0).is_err());
        assert!(make_grid(8, 0.0).is_err());
        assert!(make_grid(8, -1.0).is_err());
        assert!(make_grid(8, f64::NAN).is_err());
    }

    #[test]
    fn tau_range() {
        assert!(Tau::new(0.0).is_ok());
        assert!(Tau::new(1.0).is_ok());
        assert_eq!(Tau::new(1.5), Err(QhaError::TauOutOfRange(1.5)));
        assert!(Tau::new(-0.1).is_err());
        assert_eq!(Tau::new(0.3).unwrap().complement().value(), 0.7);
    }

    #[test]
    fn lattice_points() {
        let g = make_grid(8, 8.0).unwrap();
        let z = LatticePoint::from_coords(g, 1.0, 0.25).unwrap();
        assert_eq!((z.p(), z.q()), (1, 2));
        assert_eq!(z.indices(), (5, 6));
        assert!(LatticePoint::from_coords(g, 0.5, 0.0).is_err());
        assert!(LatticePoint::from_coords(g, 4.0, 0.0).is_err());
        let edge = LatticePoint::new(g, -4, -4).unwrap();
        assert_eq!(edge.wrapping_neg(), edge);
        assert!(edge.checked_add(&edge).is_none());
        let w = LatticePoint::new(g, 3, 3).unwrap();
        assert_eq!(w.wrapping_add(&LatticePoint::new(g, 1, 0).unwrap()).p(), -4);
    }
}
