#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn qha() -> &'static str {
    env!("CARGO_BIN_EXE_qha")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs `qha` in `dir` with the given thread count.
pub fn run_in(dir: &Path, threads: Option<usize>, args: &[&str]) -> Output {
    let mut cmd = Command::new(qha());
    cmd.current_dir(dir).args(args);
    match threads {
        Some(t) => cmd.env("QHA_THREADS", t.to_string()),
        None => cmd.env_remove("QHA_THREADS"),
    };
    cmd.output().expect("qha runs")
}

/// The golden script: fixture generation followed by every analysis subcommand.
/// Each entry is (output file name, arguments); later steps read earlier outputs.
pub const GOLDEN_SCRIPT: &[(&str, &[&str])] = &[
    ("gauss.op", &["fixture", "gaussian-state", "--n", "16", "--l", "4", "--out", "gauss.op"]),
    ("herm.op", &["fixture", "hermite-state", "--n", "16", "--l", "4", "--out", "herm.op"]),
    ("rand.op", &["fixture", "random-state", "--n", "16", "--l", "4", "--seed", "7", "--rank", "3", "--out", "rand.op"]),
    ("phi.sig", &["fixture", "gaussian-signal", "--n", "16", "--l", "4", "--out", "phi.sig"]),
    ("sym.psf", &["fixture", "gaussian-symbol", "--n", "16", "--l", "4", "--tau", "0.3", "--out", "sym.psf"]),
    ("w.psf", &["wigner", "--op", "rand.op", "--tau", "0.3", "--out", "w.psf"]),
    ("ws.psf", &["wigner", "--signal", "phi.sig", "--tau", "0.77", "--out", "ws.psf"]),
    ("q.op", &["quantize", "--symbol", "w.psf", "--tau", "0.3", "--out", "q.op"]),
    ("sp.op", &["spread", "--input", "w.psf", "--tau", "0.5", "--out", "sp.op"]),
    ("c.psf", &["conv", "--op", "rand.op", "--op2", "herm.op", "--out", "c.psf"]),
    ("cf.op", &["conv", "--fn", "w.psf", "--op", "gauss.op", "--out", "cf.op"]),
    ("co.psf", &["cohen", "--kernel", "sym.psf", "--op", "herm.op", "--tau", "0.5", "--out", "co.psf"]),
    ("gm.txt", &["gabor", "--op", "herm.op", "--window", "phi.sig", "--stride", "2", "--out", "gm.txt"]),
    ("sz.txt", &["schwartz", "--op", "herm.op", "--tau", "0.5", "--out", "sz.txt"]),
];

/// Runs the golden script in a fresh directory; returns (name, bytes) pairs or the first failure.
pub fn run_golden(threads: Option<usize>) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (name, args) in GOLDEN_SCRIPT {
        let o = run_in(dir.path(), threads, args);
        if !o.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)));
        }
        let bytes = std::fs::read(dir.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        out.push((name.to_string(), bytes));
    }
    Ok(out)
}

/// Compares a run against the stored golden files; `QHA_BLESS=1` rewrites them.
pub fn compare_golden(run: &[(String, Vec<u8>)]) -> Result<(), String> {
    let dir = golden_dir();
    if std::env::var_os("QHA_BLESS").is_some() {
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        for (name, bytes) in run {
            std::fs::write(dir.join(name), bytes).map_err(|e| e.to_string())?;
        }
        return Ok(());
    }
    for (name, bytes) in run {
        let stored = std::fs::read(dir.join(name)).map_err(|e| format!("golden {name}: {e}"))?;
        if &stored != bytes {
            return Err(format!("{name} differs from the golden file"));
        }
    }
    Ok(())
}
