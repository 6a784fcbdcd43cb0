//! Weighted modulation norms of `W_tau S`, moment suprema of its STFT and a graded
//! Schwartz-class verdict at finite resolution.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dft::{centered_dft_cols, centered_dft_rows, Direction};
use crate::error::{QhaError, Result};
use crate::field::{cis2pi, PhaseSpaceFunction, ZERO};
use crate::grid::{GridSpec, Tau};
use crate::operator::FiniteRankOperator;
use crate::quantization::tau_wigner_op;

/// Largest grid accepted by the 4D transforms.
pub const MAX_N: usize = 32;

/// Highest moment order accepted per variable.
pub const MAX_ORDER: u32 = 4;

/// Two grids agree on a moment supremum when their ratio stays below this factor.
pub const PLATEAU_FACTOR: f64 = 1.5;

/// Default slope threshold of the log-linear fit of `ln ||S||_s` against `s`, as a
/// fraction of the largest slope the grid can produce.
pub const DEFAULT_SLOPE_FRACTION: f64 = 0.55;

/// Exponent `s >= 0` of `v_s(z) = (1 + |z|^2)^(s/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WeightParam(f64);

impl WeightParam {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s >= 0.0 {
            Ok(Self(s))
        } else {
            Err(QhaError::InvalidArgument(format!("weight exponent must be finite and >= 0, got {s}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `v_s` at a point of squared length `r2`.
    #[inline]
    pub fn weight(self, r2: f64) -> f64 {
        if self.0 == 0.0 {
            1.0
        } else {
            (1.0 + r2).powf(self.0 / 2.0)
        }
    }

    pub fn at(self, x: f64, omega: f64) -> f64 {
        self.weight(x * x + omega * omega)
    }
}

/// The tensor Gaussian `sqrt 2 exp(-pi (x^2 + omega^2))`, unit norm on the plane.
pub fn default_window(grid: GridSpec) -> PhaseSpaceFunction {
    PhaseSpaceFunction::from_fn(grid, |x, w| Complex64::new(2f64.sqrt() * (-PI * (x * x + w * w)).exp(), 0.0))
}

fn check_size(grid: GridSpec) -> Result<()> {
    if grid.n() > MAX_N {
        Err(QhaError::Guardrail(format!("4D transforms are limited to N <= {MAX_N}, got {}", grid.n())))
    } else {
        Ok(())
    }
}

/// Squared lengths of the dual variable `zeta = (zeta_1, zeta_2)` on the slice layout:
/// `zeta_1` is dual to `x` (spacing `1/L`), `zeta_2` dual to `omega` (spacing `L/N`).
fn dual_r2(grid: GridSpec) -> Vec<f64> {
    let n = grid.n();
    (0..n * n)
        .map(|idx| {
            let a = grid.freq(idx / n);
            let b = grid.time(idx % n);
            a * a + b * b
        })
        .collect()
}

/// For every translation `z` (row-major over the lattice), the slice
/// `zeta -> V_G F(z, zeta) = int F(z') conj(G(z' - z)) exp(-2 pi i zeta . z') dz'`,
/// handed to `visit` and reduced to one value per `z`. `G` is sampled at centered offsets and
/// translated periodically.
fn fold_stft4<A: Send>(
    f: &PhaseSpaceFunction,
    g: &PhaseSpaceFunction,
    visit: impl Fn(usize, usize, &[Complex64]) -> A + Sync,
) -> Result<Vec<A>> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    check_size(grid)?;
    let n = grid.n();
    let cell = grid.cell();
    Ok((0..n * n)
        .into_par_iter()
        .map(|zi| {
            let (p, q) = (grid.offset(zi / n), grid.offset(zi % n));
            let mut buf: Vec<Complex64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let gi = grid.index_of(grid.offset(i) - p);
                    let gj = grid.index_of(grid.offset(j) - q);
                    f.get(i, j) * g.get(gi, gj).conj() * cell
                })
                .collect();
            centered_dft_rows(&mut buf, n, Direction::Forward);
            centered_dft_cols(&mut buf, n, n, Direction::Forward);
            visit(zi / n, zi % n, &buf)
        })
        .collect())
}

/// Oracle: one explicit 2D sum for `V_G F(z, zeta)` at lattice indices.
pub fn stft4_direct(
    f: &PhaseSpaceFunction,
    g: &PhaseSpaceFunction,
    z: (usize, usize),
    zeta: (usize, usize),
) -> Result<Complex64> {
    let grid = f.grid();
    grid.ensure_same(&g.grid())?;
    let n = grid.n();
    let (p, q) = (grid.offset(z.0), grid.offset(z.1));
    let (k1, k2) = (grid.offset(zeta.0), grid.offset(zeta.1));
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (grid.offset(i), grid.offset(j));
            let gv = g.get(grid.index_of(a - p), grid.index_of(b - q)).conj();
            acc += f.get(i, j) * gv * cis2pi(-((k1 * a + k2 * b) as f64) / n as f64);
        }
    }
    Ok(acc * grid.cell())
}

/// `V_G F(z, zeta)` through the FFT path, at lattice indices.
pub fn stft4_at(
    f: &PhaseSpaceFunction,
    g: &PhaseSpaceFunction,
    z: (usize, usize),
    zeta: (usize, usize),
) -> Result<Complex64> {
    let n = f.grid().n();
    let vals = fold_stft4(f, g, |i, j, slice| if (i, j) == z { Some(slice[zeta.0 * n + zeta.1]) } else { None })?;
    Ok(vals.into_iter().flatten().next().unwrap_or(ZERO))
}

/// `int int |V_G F(z, zeta)| v_s(z) v_s(zeta) dz dzeta` for each `s`, in one pass.
pub fn weighted_norms_of(f: &PhaseSpaceFunction, s_list: &[WeightParam], g: &PhaseSpaceFunction) -> Result<Vec<f64>> {
    let grid = f.grid();
    let r2 = dual_r2(grid);
    let cell = grid.cell();
    let rows = fold_stft4(f, g, |i, j, slice| {
        let (x, w) = (grid.time(i), grid.freq(j));
        let vz: Vec<f64> = s_list.iter().map(|s| s.at(x, w)).collect();
        s_list
            .iter()
            .zip(&vz)
            .map(|(s, vzs)| slice.iter().zip(&r2).map(|(v, r)| v.norm() * s.weight(*r)).sum::<f64>() * vzs)
            .collect::<Vec<f64>>()
    })?;
    // fixed reduction order, independent of the thread count
    let mut out = vec![0.0; s_list.len()];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    Ok(out.into_iter().map(|v| v * cell * cell).collect())
}

/// `||W_tau S||_{M^1_{v_s (x) v_s}}` with window `g` (default: [`default_window`]).
pub fn weighted_m1_norm(
    s_op: &FiniteRankOperator,
    s: WeightParam,
    tau: Tau,
    g: Option<&PhaseSpaceFunction>,
) -> Result<f64> {
    Ok(weighted_m1_norms(s_op, &[s], tau, g)?[0])
}

pub fn weighted_m1_norms(
    s_op: &FiniteRankOperator,
    s_list: &[WeightParam],
    tau: Tau,
    g: Option<&PhaseSpaceFunction>,
) -> Result<Vec<f64>> {
    let grid = crate::operator::LinearOperator::grid(s_op);
    check_size(grid)?;
    let w = tau_wigner_op(s_op, tau);
    let default;
    let g = match g {
        Some(g) => g,
        None => {
            default = default_window(grid);
            &default
        }
    };
    weighted_norms_of(w.values(), s_list, g)
}

/// Moment order `(alpha, beta)`: the monomial `|z|^alpha |zeta|^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentOrder {
    pub alpha: u32,
    pub beta: u32,
}

impl MomentOrder {
    pub fn new(alpha: u32, beta: u32) -> Result<Self> {
        if alpha > MAX_ORDER || beta > MAX_ORDER {
            return Err(QhaError::InvalidArgument(format!("moment orders are limited to {MAX_ORDER}")));
        }
        Ok(Self { alpha, beta })
    }

    /// All orders with `alpha, beta <= max`.
    pub fn all_up_to(max: u32) -> Result<Vec<Self>> {
        (0..=max).flat_map(|a| (0..=max).map(move |b| Self::new(a, b))).collect()
    }
}

/// `sup |z|^alpha |zeta|^beta |V_G F(z, zeta)|` over the lattice for each order.
pub fn moment_suprema(f: &PhaseSpaceFunction, orders: &[MomentOrder], g: &PhaseSpaceFunction) -> Result<Vec<f64>> {
    let grid = f.grid();
    let r2 = dual_r2(grid);
    let rows = fold_stft4(f, g, |i, j, slice| {
        let rz = (grid.time(i).powi(2) + grid.freq(j).powi(2)).sqrt();
        orders
            .iter()
            .map(|o| {
                let pz = rz.powi(o.alpha as i32);
                slice
                    .iter()
                    .zip(&r2)
                    .map(|(v, r)| v.norm() * pz * r.sqrt().powi(o.beta as i32))
                    .fold(0.0, f64::max)
            })
            .collect::<Vec<f64>>()
    })?;
    let mut out = vec![0.0f64; orders.len()];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SchwartzConsistent,
    NotSchwartzConsistent,
    Decaying,
    NotDecaying,
    /// Single-grid report: no comparison was made.
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::SchwartzConsistent => "schwartz-consistent",
            Verdict::NotSchwartzConsistent => "not-schwartz-consistent",
            Verdict::Decaying => "decaying",
            Verdict::NotDecaying => "not-decaying",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// Graded decay diagnostics. Thresholds are finite-resolution conventions and the text
/// form says so.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub n: usize,
    pub l: f64,
    pub tau: Option<f64>,
    pub s_values: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: Option<f64>,
    pub slope_threshold: Option<f64>,
    pub orders: Vec<MomentOrder>,
    pub suprema: Vec<f64>,
    /// Suprema on the refined grid, when a two-grid comparison was run.
    pub refined_suprema: Vec<f64>,
    pub verdict: Verdict,
}

impl DecayReport {
    fn empty(grid: GridSpec) -> Self {
        Self {
            n: grid.n(),
            l: grid.l(),
            tau: None,
            s_values: Vec::new(),
            norms: Vec::new(),
            slope: None,
            slope_threshold: None,
            orders: Vec::new(),
            suprema: Vec::new(),
            refined_suprema: Vec::new(),
            verdict: Verdict::Undetermined,
        }
    }

    /// Norms are non-decreasing in `s` (the `s` list is taken in the given order).
    pub fn norms_monotone(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.s_values.len()).collect();
        idx.sort_by(|a, b| self.s_values[*a].total_cmp(&self.s_values[*b]));
        idx.windows(2).all(|w| self.norms[w[1]] >= self.norms[w[0]] * (1.0 - 1e-12))
    }

    /// Flat `key = value` text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "l = {:.16e}", self.l);
        if let Some(t) = self.tau {
            let _ = writeln!(out, "tau = {t}");
        }
        for (s, v) in self.s_values.iter().zip(&self.norms) {
            let _ = writeln!(out, "norm.s{s} = {v:.16e}");
        }
        if let Some(sl) = self.slope {
            let _ = writeln!(out, "slope = {sl:.16e}");
        }
        if let Some(th) = self.slope_threshold {
            let _ = writeln!(out, "slope_threshold = {th:.16e}");
            let _ = writeln!(
                out,
                "rule.slope = least-squares slope of ln(norm) against s below {DEFAULT_SLOPE_FRACTION} x 2 ln(max v_1 on the grid) (finite-resolution convention)"
            );
        }
        for (i, o) in self.orders.iter().enumerate() {
            let _ = writeln!(out, "sup.a{}b{} = {:.16e}", o.alpha, o.beta, self.suprema[i]);
            if let Some(r) = self.refined_suprema.get(i) {
                let _ = writeln!(out, "sup_refined.a{}b{} = {:.16e}", o.alpha, o.beta, r);
            }
        }
        if !self.refined_suprema.is_empty() {
            let _ = writeln!(
                out,
                "rule.plateau = every refined supremum within a factor {PLATEAU_FACTOR} of the coarse one (finite-resolution convention)"
            );
        }
        let _ = writeln!(out, "verdict = {}", self.verdict.as_str());
        out
    }
}

/// Moment suprema of `V_G F` on `F`'s own grid. The verdict is left undetermined; use
/// [`rapid_decay_two_grid`] for a plateau comparison.
pub fn rapid_decay_check(
    f: &PhaseSpaceFunction,
    orders: &[MomentOrder],
    g: Option<&PhaseSpaceFunction>,
) -> Result<DecayReport> {
    let grid = f.grid();
    let default;
    let g = match g {
        Some(g) => g,
        None => {
            default = default_window(grid);
            &default
        }
    };
    let mut rep = DecayReport::empty(grid);
    rep.orders = orders.to_vec();
    rep.suprema = moment_suprema(f, orders, g)?;
    Ok(rep)
}

/// The refinement of `(N, L)` used for plateau checks: `(2N, sqrt 2 L)`, which shrinks both
/// lattice spacings by `sqrt 2` and widens both extents by `sqrt 2`.
pub fn refine(grid: GridSpec) -> Result<GridSpec> {
    GridSpec::new(2 * grid.n(), 2f64.sqrt() * grid.l())
}

/// Samples `make` on `coarse` and on [`refine`]`(coarse)` and compares moment suprema.
/// Verdict: decaying iff every refined supremum is within [`PLATEAU_FACTOR`] of the coarse one.
pub fn rapid_decay_two_grid(
    make: impl Fn(GridSpec) -> Result<PhaseSpaceFunction>,
    coarse: GridSpec,
    orders: &[MomentOrder],
) -> Result<DecayReport> {
    let fine = refine(coarse)?;
    check_size(fine)?;
    let mut rep = rapid_decay_check(&make(coarse)?, orders, None)?;
    rep.refined_suprema = moment_suprema(&make(fine)?, orders, &default_window(fine))?;
    let plateau = rep
        .suprema
        .iter()
        .zip(&rep.refined_suprema)
        .all(|(c, f)| *f <= PLATEAU_FACTOR * c.max(f64::MIN_POSITIVE));
    rep.verdict = if plateau { Verdict::Decaying } else { Verdict::NotDecaying };
    Ok(rep)
}

/// Largest slope of `ln ||F||_s` in `s` that the grid admits: `2 ln max v_1`, since
/// `v_s(z) v_s(zeta) <= (max v_1)^(2 s)`.
pub fn max_slope(grid: GridSpec) -> f64 {
    let half_x = grid.l() / 2.0;
    let half_w = grid.freq_extent() / 2.0;
    // both z and zeta range over boxes with these half sides (zeta_1 ~ omega, zeta_2 ~ x)
    (1.0 + half_x * half_x + half_w * half_w).ln()
}

/// Least-squares slope of `ln y` against `x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Weighted norms of `W_tau S` over `s_list` with a log-linear fit. Schwartz-consistent iff
/// the slope is below `slope_fraction` (default [`DEFAULT_SLOPE_FRACTION`]) of [`max_slope`].
pub fn schwartz_score(
    s_op: &FiniteRankOperator,
    s_list: &[WeightParam],
    tau: Tau,
    slope_fraction: Option<f64>,
) -> Result<DecayReport> {
    if s_list.is_empty() {
        return Err(QhaError::InvalidArgument("empty s list".into()));
    }
    let grid = crate::operator::LinearOperator::grid(s_op);
    let norms = weighted_m1_norms(s_op, s_list, tau, None)?;
    let s_values: Vec<f64> = s_list.iter().map(|s| s.value()).collect();
    let slope = log_slope(&s_values, &norms);
    let threshold = slope_fraction.unwrap_or(DEFAULT_SLOPE_FRACTION) * max_slope(grid);
    let mut rep = DecayReport::empty(grid);
    rep.tau = Some(tau.value());
    rep.s_values = s_values;
    rep.norms = norms;
    rep.slope = Some(slope);
    rep.slope_threshold = Some(threshold);
    rep.verdict = if slope < threshold { Verdict::SchwartzConsistent } else { Verdict::NotSchwartzConsistent };
    Ok(rep)
}

/// Rank-3 mixture of the first Hermite functions with weights 1/2, 1/3, 1/6.
pub fn hermite_fixture(grid: GridSpec) -> FiniteRankOperator {
    let hs = crate::tfa::hermite_functions(grid, 3);
    let mut s = FiniteRankOperator::zero(grid);
    for (h, w) in hs.iter().zip([0.5, 1.0 / 3.0, 1.0 / 6.0]) {
        s.push(h.scale(Complex64::new(w, 0.0)), h.clone()).expect("same grid");
    }
    s
}

/// Rank-one projection onto the normalized indicator of `[-1, 1)`.
pub fn step_fixture(grid: GridSpec) -> FiniteRankOperator {
    let f = crate::field::Signal::from_fn(grid, |t| Complex64::new(if (-1.0..1.0).contains(&t) { 1.0 } else { 0.0 }, 0.0))
        .normalized()
        .expect("nonzero indicator");
    FiniteRankOperator::rank_one(&f, &f).expect("same grid")
}
