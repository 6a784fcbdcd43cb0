//! The `qha` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 guardrail, 4 `--check` residual above the
//! tolerance. `QHA_THREADS` caps the worker count.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use crate::conv;
use crate::error::{QhaError, Result};
use crate::field::PhaseSpaceFunction;
use crate::gabor::{gabor_entry_direct, gabor_matrix_with, GaborOptions};
use crate::grid::Tau;
use crate::io::{self, Config};
use crate::operator::{kernel_of, random_state, FiniteRankOperator, LinearOperator};
use crate::quantization::{
    fourier_tau_wigner, op_tau, spreading_op, tau_wigner_op, tau_wigner_oracle, SpreadingFunction,
    TauSymbol,
};
use crate::schwartz::{self, WeightParam};
use crate::tfa::{cross_tau_wigner, cross_tau_wigner_oracle, gaussian};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GUARDRAIL: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qha", version, about = "Discrete tau-quantization and phase-space analysis on a periodized line")]
pub struct Cli {
    /// File of key=value lines (N, L, tau, check-tol) overriding the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also run the oracle path and print the max relative residual to stderr.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true)]
    check_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// tau-Wigner distribution of an operator or of a signal pair.
    Wigner {
        #[arg(long, conflicts_with = "signal")]
        op: Option<PathBuf>,
        #[arg(long)]
        signal: Option<PathBuf>,
        /// Second signal of a cross distribution (defaults to the first).
        #[arg(long, requires = "signal")]
        signal2: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// tau-quantization of a symbol, written as a finite-rank operator.
    Quantize {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        /// Singular values below this fraction of the largest are dropped.
        #[arg(long, default_value_t = 1e-12)]
        svd_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator with a given tau-spreading function.
    Spread {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1e-12)]
        svd_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convolution of a function with an operator, or of two operators.
    Conv {
        /// Phase-space function (function x operator).
        #[arg(long = "fn", conflicts_with = "op2")]
        function: Option<PathBuf>,
        #[arg(long)]
        op: PathBuf,
        /// Second operator (operator x operator).
        #[arg(long)]
        op2: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        svd_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Cohen-class distribution `a * W_tau S`.
    Cohen {
        #[arg(long)]
        kernel: PathBuf,
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Gabor matrix of an operator on a sublattice.
    Gabor {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        window: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        allow_large: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted-norm decay report of `W_tau S`.
    Schwartz {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
        s_list: Vec<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        slope_fraction: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic input files.
    Fixture {
        #[arg(value_enum)]
        kind: FixtureKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FixtureKind {
    /// Normalized Gaussian signal.
    GaussianSignal,
    /// Projection onto the normalized Gaussian.
    GaussianState,
    /// Mixture of the first three Hermite functions.
    HermiteState,
    /// Projection onto a normalized indicator function.
    StepState,
    /// Seeded random positive state.
    RandomState,
    /// `W_tau` of the Gaussian state.
    GaussianSymbol,
}

enum Failure {
    Qha(QhaError),
    Check { residual: f64, tol: f64 },
}

impl From<QhaError> for Failure {
    fn from(e: QhaError) -> Self {
        Failure::Qha(e)
    }
}

fn exit_code(e: &QhaError) -> i32 {
    match e {
        QhaError::Guardrail(_) | QhaError::RankTooLarge { .. } => EXIT_GUARDRAIL,
        _ => EXIT_USAGE,
    }
}

struct Ctx<'a> {
    cfg: Config,
    check: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn tau(&self, flag: Option<f64>) -> Result<Tau> {
        Tau::new(flag.unwrap_or(self.cfg.tau))
    }

    fn emit(&mut self, path: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, bytes).map_err(|e| QhaError::Io(format!("{}: {e}", p.display()))),
            None => self.out.write_all(bytes).map_err(QhaError::from),
        }
    }

    fn pgm(&mut self, path: &Option<PathBuf>, f: &PhaseSpaceFunction) -> Result<()> {
        if let Some(p) = path {
            std::fs::write(p, io::heatmap_pgm(f)).map_err(|e| QhaError::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }

    /// Runs `oracle` only under `--check`; reports and compares the residual.
    fn verify(&mut self, what: &str, oracle: impl FnOnce() -> Result<f64>) -> std::result::Result<(), Failure> {
        if !self.check {
            return Ok(());
        }
        let residual = oracle()?;
        let tol = self.cfg.check_tol;
        let _ = writeln!(self.err, "check {what}: residual = {residual:.3e} (tol {tol:.1e})");
        if residual.is_finite() && residual <= tol {
            Ok(())
        } else {
            Err(Failure::Check { residual, tol })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| QhaError::Io(format!("{}: {e}", path.display())))
}

fn rel(a: &PhaseSpaceFunction, b: &PhaseSpaceFunction) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Runs the CLI on `args` (including the program name), writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run_with(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let threads = match std::env::var("QHA_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                let _ = writeln!(err, "error: QHA_THREADS must be a positive integer, got '{v}'");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    let body = |out: &mut dyn Write, err: &mut dyn Write| -> i32 {
        match execute(cli, out, err) {
            Ok(()) => 0,
            Err(Failure::Qha(e)) => {
                let _ = writeln!(err, "error: {e}");
                exit_code(&e)
            }
            Err(Failure::Check { residual, tol }) => {
                let _ = writeln!(err, "error: oracle residual {residual:.3e} exceeds {tol:.1e}");
                EXIT_CHECK
            }
        }
    };
    // results are buffered so the pool's worker threads never touch the caller's writers
    let (mut obuf, mut ebuf) = (Vec::new(), Vec::new());
    let code = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| body(&mut obuf, &mut ebuf)),
            Err(e) => {
                let _ = writeln!(ebuf, "error: thread pool: {e}");
                EXIT_USAGE
            }
        },
        None => body(&mut obuf, &mut ebuf),
    };
    let _ = out.write_all(&obuf);
    let _ = err.write_all(&ebuf);
    code
}

/// Runs the CLI on the process arguments and standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os().collect(), &mut stdout.lock(), &mut stderr.lock())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    let mut cfg = Config::default();
    if let Some(p) = &cli.config {
        cfg.apply_text(&read(p)?)?;
    }
    if let Some(t) = cli.check_tol {
        cfg.check_tol = t;
    }
    let mut ctx = Ctx { cfg, check: cli.check, out, err };
    match cli.command {
        Command::Wigner { op, signal, signal2, tau, out, pgm } => {
            let tau = ctx.tau(tau)?;
            let w = match (op, signal) {
                (Some(op), None) => {
                    let s = io::parse_operator(&read(&op)?)?;
                    let w = tau_wigner_op(&s, tau).into_values();
                    ctx.verify("wigner (kernel quadrature)", || {
                        Ok(rel(tau_wigner_oracle(&kernel_of(&s), tau).values(), &w))
                    })?;
                    w
                }
                (None, Some(sig)) => {
                    let f = io::parse_signal(&read(&sig)?)?;
                    let g = match signal2 {
                        Some(p) => io::parse_signal(&read(&p)?)?,
                        None => f.clone(),
                    };
                    let w = cross_tau_wigner(&f, &g, tau)?;
                    ctx.verify("wigner (defining integral)", || Ok(rel(&cross_tau_wigner_oracle(&f, &g, tau)?, &w)))?;
                    w
                }
                _ => return Err(QhaError::InvalidArgument("give exactly one of --op or --signal".into()).into()),
            };
            ctx.emit(&out, io::emit_psf(&w).as_bytes())?;
            ctx.pgm(&pgm, &w)?;
        }
        Command::Quantize { symbol, tau, svd_tol, out } => {
            let tau = ctx.tau(tau)?;
            let a = io::parse_psf(&read(&symbol)?)?;
            let k = op_tau(&TauSymbol::new(a.clone(), tau), tau)?;
            let s = k.to_finite_rank(svd_tol);
            ctx.verify("quantize (symbol round trip)", || Ok(rel(tau_wigner_op(&s, tau).values(), &a)))?;
            ctx.emit(&out, io::emit_operator(&s).as_bytes())?;
        }
        Command::Spread { input, tau, svd_tol, out } => {
            let tau = ctx.tau(tau)?;
            let h = io::parse_psf(&read(&input)?)?;
            let s = spreading_op(&SpreadingFunction::new(h.clone(), tau)).to_finite_rank(svd_tol);
            ctx.verify("spread (spreading round trip)", || Ok(rel(fourier_tau_wigner(&s, tau).values(), &h)))?;
            ctx.emit(&out, io::emit_operator(&s).as_bytes())?;
        }
        Command::Conv { function, op, op2, svd_tol, out, pgm } => {
            let s = io::parse_operator(&read(&op)?)?;
            match (function, op2) {
                (Some(fp), None) => {
                    let a = io::parse_psf(&read(&fp)?)?;
                    let k = conv::conv_fn_op(&a, &s)?;
                    ctx.verify("conv fn x op (lattice sum)", || {
                        let o = conv::conv_fn_op_oracle(&a, &s)?;
                        Ok(k.kernel_ref().max_abs_diff(o.kernel_ref()) / o.kernel_ref().max_abs().max(f64::MIN_POSITIVE))
                    })?;
                    ctx.emit(&out, io::emit_operator(&k.to_finite_rank(svd_tol)).as_bytes())?;
                }
                (None, Some(tp)) => {
                    let t = io::parse_operator(&read(&tp)?)?;
                    let c = conv::conv_op_op(&s, &t)?;
                    ctx.verify("conv op x op (trace)", || Ok(rel(&conv::conv_op_op_oracle(&s, &t)?, &c)))?;
                    ctx.emit(&out, io::emit_psf(&c).as_bytes())?;
                    ctx.pgm(&pgm, &c)?;
                }
                _ => return Err(QhaError::InvalidArgument("give exactly one of --fn or --op2".into()).into()),
            }
        }
        Command::Cohen { kernel, op, tau, out, pgm } => {
            let tau = ctx.tau(tau)?;
            let a = io::parse_psf(&read(&kernel)?)?;
            let s = io::parse_operator(&read(&op)?)?;
            let q = conv::cohen_op(&a, &s, tau)?;
            ctx.verify("cohen (direct convolution)", || {
                Ok(rel(&conv::ps_convolve_direct(&a, tau_wigner_op(&s, tau).values())?, &q))
            })?;
            ctx.emit(&out, io::emit_psf(&q).as_bytes())?;
            ctx.pgm(&pgm, &q)?;
        }
        Command::Gabor { op, window, stride, allow_large, out } => {
            let s = io::parse_operator(&read(&op)?)?;
            let phi = io::parse_signal(&read(&window)?)?;
            let gm = gabor_matrix_with(&s, &phi, GaborOptions { stride, allow_large, tau: 0.0 })?;
            ctx.verify("gabor (direct inner products)", || {
                let l = gm.lattice();
                let m = l.m();
                let mut worst = 0.0f64;
                for k in 0..16usize {
                    let z = l.point((k * 5) % m, (k * 3 + 1) % m);
                    let w = l.point((k * 7 + 2) % m, (k * 11 + 3) % m);
                    let d = gabor_entry_direct(&s, &phi, &z, &w, Tau::ZERO)?;
                    worst = worst.max((gm.entry(&z, &w)? - d).norm());
                }
                Ok(worst / gm.data().max_abs().max(f64::MIN_POSITIVE))
            })?;
            ctx.emit(&out, io::emit_gabor(&gm).as_bytes())?;
        }
        Command::Schwartz { op, s_list, tau, slope_fraction, out } => {
            let tau = ctx.tau(tau)?;
            let s = io::parse_operator(&read(&op)?)?;
            let ws = s_list.iter().map(|v| WeightParam::new(*v)).collect::<Result<Vec<_>>>()?;
            let rep = schwartz::schwartz_score(&s, &ws, tau, slope_fraction)?;
            ctx.verify("schwartz (direct 4D sum)", || {
                let w = tau_wigner_op(&s, tau);
                let g = schwartz::default_window(s.grid());
                let n = s.grid().n();
                let mut worst = 0.0f64;
                let mut scale = 0.0f64;
                for (z, zeta) in [((n / 2, n / 2), (n / 2, n / 2)), ((n / 4, n / 2 + 1), (n / 2 - 1, n / 2)), ((1, 2), (3, n - 1))] {
                    let a = schwartz::stft4_at(w.values(), &g, z, zeta)?;
                    let b = schwartz::stft4_direct(w.values(), &g, z, zeta)?;
                    worst = worst.max((a - b).norm());
                    scale = scale.max(b.norm());
                }
                Ok(worst / scale.max(f64::MIN_POSITIVE))
            })?;
            ctx.emit(&out, rep.to_text().as_bytes())?;
        }
        Command::Fixture { kind, n, l, tau, seed, rank, out } => {
            let mut cfg = ctx.cfg.clone();
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(l) = l {
                cfg.l = l;
            }
            let grid = cfg.grid()?;
            let phi = gaussian(grid).normalized()?;
            let text = match kind {
                FixtureKind::GaussianSignal => io::emit_signal(&phi),
                FixtureKind::GaussianState => io::emit_operator(&FiniteRankOperator::rank_one(&phi, &phi)?),
                FixtureKind::HermiteState => io::emit_operator(&schwartz::hermite_fixture(grid)),
                FixtureKind::StepState => io::emit_operator(&schwartz::step_fixture(grid)),
                FixtureKind::RandomState => io::emit_operator(&random_state(grid, rank, seed)?),
                FixtureKind::GaussianSymbol => {
                    let tau = ctx.tau(tau)?;
                    io::emit_psf(tau_wigner_op(&FiniteRankOperator::rank_one(&phi, &phi)?, tau).values())
                }
            };
            ctx.emit(&out, text.as_bytes())?;
        }
    }
    Ok(())
}
