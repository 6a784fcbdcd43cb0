//! Text file formats, PGM heatmaps and `key=value` configuration.
//!
//! Every numeric value is written with 17 significant digits, so parsing an emitted file
//! gives back the same `f64` values and re-emitting gives the same bytes.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{QhaError, Result};
use crate::field::{PhaseSpaceFunction, Signal};
use crate::gabor::GaborMatrix;
use crate::grid::GridSpec;
use crate::operator::FiniteRankOperator;

const MAGIC: &str = "QHA1";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_value(out: &mut String, v: Complex64) {
    let _ = writeln!(out, "{} {}", fmt_f64(v.re), fmt_f64(v.im));
}

fn header(kind: &str, grid: GridSpec, extra: &[usize]) -> String {
    let mut h = format!("{MAGIC} {kind} {} {}", grid.n(), fmt_f64(grid.l()));
    for e in extra {
        let _ = write!(h, " {e}");
    }
    h.push('\n');
    h
}

pub fn emit_signal(f: &Signal) -> String {
    let mut out = header("signal", f.grid(), &[]);
    f.values().iter().for_each(|v| push_value(&mut out, *v));
    out
}

pub fn emit_operator(s: &FiniteRankOperator) -> String {
    let grid = crate::operator::LinearOperator::grid(s);
    let mut out = header("op", grid, &[s.rank()]);
    for (f, g) in s.terms() {
        f.values().iter().chain(g.values()).for_each(|v| push_value(&mut out, *v));
    }
    out
}

/// Row-major over `(x index, omega index)`.
pub fn emit_psf(f: &PhaseSpaceFunction) -> String {
    let mut out = header("psf", f.grid(), &[]);
    f.values().iter().for_each(|v| push_value(&mut out, *v));
    out
}

/// Header `QHA1 gabor N L stride`, then `M^4` values in `[z_x][z_omega][w_x][w_omega]` order
/// over the centered sublattice.
pub fn emit_gabor(m: &GaborMatrix) -> String {
    let l = m.lattice();
    let mut out = header("gabor", l.grid(), &[l.stride()]);
    m.data().values().iter().for_each(|v| push_value(&mut out, *v));
    out
}

/// A parsed file of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum QhaFile {
    Signal(Signal),
    Operator(FiniteRankOperator),
    Psf(PhaseSpaceFunction),
}

impl QhaFile {
    pub fn kind(&self) -> &'static str {
        match self {
            QhaFile::Signal(_) => "signal",
            QhaFile::Operator(_) => "op",
            QhaFile::Psf(_) => "psf",
        }
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate() }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() {
                return Ok((i + 1, t));
            }
        }
        Err(QhaError::Parse { line: 0, msg: "unexpected end of file".into() })
    }

    fn value(&mut self) -> Result<Complex64> {
        let (ln, t) = self.next_line()?;
        let mut it = t.split_whitespace();
        let re = parse_num::<f64>(it.next(), ln, "real part")?;
        let im = parse_num::<f64>(it.next(), ln, "imaginary part")?;
        if it.next().is_some() {
            return Err(QhaError::Parse { line: ln, msg: "expected two numbers".into() });
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(QhaError::Parse { line: ln, msg: "non-finite value".into() });
        }
        Ok(Complex64::new(re, im))
    }

    fn values(&mut self, count: usize) -> Result<Vec<Complex64>> {
        (0..count).map(|_| self.value()).collect()
    }

    fn finish(&mut self) -> Result<()> {
        match self.next_line() {
            Ok((ln, _)) => Err(QhaError::Parse { line: ln, msg: "trailing data".into() }),
            Err(_) => Ok(()),
        }
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| QhaError::Parse { line, msg: format!("missing or malformed {what}") })
}

pub fn parse(text: &str) -> Result<QhaFile> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next_line()?;
    let mut tok = head.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(QhaError::Parse { line: ln, msg: format!("expected {MAGIC} header") });
    }
    let kind = tok.next().unwrap_or("");
    let n: usize = parse_num(tok.next(), ln, "N")?;
    let l: f64 = parse_num(tok.next(), ln, "L")?;
    let grid = GridSpec::new(n, l)?;
    let file = match kind {
        "signal" => QhaFile::Signal(Signal::new(grid, lines.values(n)?)?),
        "psf" => QhaFile::Psf(PhaseSpaceFunction::new(grid, lines.values(n * n)?)?),
        "op" => {
            let r: usize = parse_num(tok.next(), ln, "rank")?;
            if r > n {
                return Err(QhaError::RankTooLarge { rank: r, n });
            }
            let mut terms = Vec::with_capacity(r);
            for _ in 0..r {
                let f = Signal::new(grid, lines.values(n)?)?;
                let g = Signal::new(grid, lines.values(n)?)?;
                terms.push((f, g));
            }
            QhaFile::Operator(FiniteRankOperator::new(grid, terms)?)
        }
        other => return Err(QhaError::Parse { line: ln, msg: format!("unknown file kind '{other}'") }),
    };
    if tok.next().is_some() {
        return Err(QhaError::Parse { line: ln, msg: "extra header fields".into() });
    }
    lines.finish()?;
    Ok(file)
}

pub fn parse_signal(text: &str) -> Result<Signal> {
    match parse(text)? {
        QhaFile::Signal(s) => Ok(s),
        other => Err(QhaError::Parse { line: 1, msg: format!("expected a signal file, found {}", other.kind()) }),
    }
}

pub fn parse_operator(text: &str) -> Result<FiniteRankOperator> {
    match parse(text)? {
        QhaFile::Operator(s) => Ok(s),
        other => Err(QhaError::Parse { line: 1, msg: format!("expected an op file, found {}", other.kind()) }),
    }
}

pub fn parse_psf(text: &str) -> Result<PhaseSpaceFunction> {
    match parse(text)? {
        QhaFile::Psf(s) => Ok(s),
        other => Err(QhaError::Parse { line: 1, msg: format!("expected a psf file, found {}", other.kind()) }),
    }
}

/// Binary PGM (P5, maxval 255) of `|F|`: row `r` is omega index `r`, column `c` is x index `c`.
/// `|F|` is mapped linearly with its minimum to 0 and maximum to 255; both are recorded in
/// the comment line.
pub fn heatmap_pgm(f: &PhaseSpaceFunction) -> Vec<u8> {
    let n = f.n();
    let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    let span = hi - lo;
    let mut out = format!("P5\n# qha |value| linear min={} max={}\n{n} {n}\n255\n", fmt_f64(lo), fmt_f64(hi)).into_bytes();
    for r in 0..n {
        for c in 0..n {
            let v = mags[c * n + r];
            let px = if span > 0.0 { (255.0 * (v - lo) / span).round() } else { 0.0 };
            out.push(px.clamp(0.0, 255.0) as u8);
        }
    }
    out
}

/// Defaults overridable by a `key=value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: usize,
    pub l: f64,
    pub tau: f64,
    pub check_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self { n: 64, l: 8.0, tau: 0.5, check_tol: 1e-8 }
    }
}

impl Config {
    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| QhaError::Parse { line: i + 1, msg: "expected key=value".into() })?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                QhaError::Parse { msg, .. } => QhaError::Parse { line: i + 1, msg },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || QhaError::Parse { line: 0, msg: format!("bad value '{value}' for {key}") };
        match key {
            "N" | "n" => self.n = value.parse().map_err(|_| bad())?,
            "L" | "l" => self.l = value.parse().map_err(|_| bad())?,
            "tau" => self.tau = value.parse().map_err(|_| bad())?,
            "check-tol" | "check_tol" => self.check_tol = value.parse().map_err(|_| bad())?,
            other => return Err(QhaError::Parse { line: 0, msg: format!("unknown key '{other}'") }),
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::operator::random_state;
    use crate::tfa::gaussian;

    #[test]
    fn round_trips_are_byte_exact() {
        let g = make_grid(8, 2.5).unwrap();
        let s = random_state(g, 2, 9).unwrap();
        let text = emit_operator(&s);
        let back = parse_operator(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(emit_operator(&back), text);
        let f = gaussian(g).modulate(1);
        assert_eq!(parse_signal(&emit_signal(&f)).unwrap(), f);
        let p = crate::tfa::tau_wigner(&f, crate::grid::Tau::new(0.3).unwrap()).unwrap();
        let t = emit_psf(&p);
        assert_eq!(emit_psf(&parse_psf(&t).unwrap()), t);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse("QHA2 signal 4 1\n"), Err(QhaError::Parse { .. })));
        assert!(matches!(parse("QHA1 signal 4 1\n1 0\n"), Err(QhaError::Parse { .. })));
        assert!(matches!(parse("QHA1 signal 3 1\n"), Err(QhaError::InvalidGrid(_))));
        let four = "QHA1 signal 4 1\n1 0\n0 0\n0 0\n0 0\n";
        assert!(parse_signal(four).is_ok());
        assert!(matches!(parse(&four.replace("0 0\n0 0\n0 0\n", "0 x\n0 0\n0 0\n")), Err(QhaError::Parse { line: 3, .. })));
        assert!(matches!(parse(&format!("{four}5 5\n")), Err(QhaError::Parse { .. })));
        assert!(parse_psf(four).is_err());
    }

    #[test]
    fn pgm_layout_and_scaling() {
        let g = make_grid(4, 2.0).unwrap();
        let f = PhaseSpaceFunction::from_index_fn(g, |i, j| Complex64::new((i * 4 + j) as f64, 0.0));
        let img = heatmap_pgm(&f);
        let text = String::from_utf8_lossy(&img[..img.len() - 16]).to_string();
        assert!(text.starts_with("P5\n# qha |value| linear min=0.0000000000000000e0 max=1.5000000000000000e1\n4 4\n255\n"));
        let px = &img[img.len() - 16..];
        assert_eq!(px[0], 0);
        assert_eq!(px[15], 255);
        // row 0, column 1 is x index 1, omega index 0: value 4
        assert_eq!(px[1], 68);
    }

    #[test]
    fn config_overrides() {
        let mut c = Config::default();
        c.apply_text("# comment\nN = 32\ntau=0.25\n\ncheck-tol=1e-6\n").unwrap();
        assert_eq!((c.n, c.l, c.tau, c.check_tol), (32, 8.0, 0.25, 1e-6));
        assert!(c.apply_text("bogus=1").is_err());
        assert!(matches!(c.apply_text("N=1\nL"), Err(QhaError::Parse { line: 2, .. })));
    }
}
