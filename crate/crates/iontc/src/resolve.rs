//! Turning command-line and config text into library values.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use iontc_core::golden::{self, load_registry, GoldenSequence};
use iontc_core::qops::check_qubits;
use iontc_core::targets::NamedTarget;
use iontc_core::{
    parse_sequence, Error, Matrix, ObjectiveSpec, PulseSequence, StateVector, Unitary, C64,
};

use crate::config::is_path_like;

/// A named target, or a matrix file of `re,im` entries, one row per line.
pub fn target(text: &str, qubits: usize) -> Result<ObjectiveSpec> {
    check_qubits(qubits)?;
    if is_path_like(text) {
        let u = matrix_file(Path::new(text), qubits)?;
        return Ok(ObjectiveSpec::full_unitary(u));
    }
    Ok(NamedTarget::parse(text)?.build(qubits)?)
}

fn complex(entry: &str) -> Result<C64> {
    let (re, im) = entry.split_once(',').unwrap_or((entry, "0"));
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| anyhow!("bad number '{}'", s.trim()))
    };
    Ok(C64::new(num(re)?, num(im)?))
}

pub fn parse_matrix(text: &str, qubits: usize) -> Result<Unitary> {
    let dim = 1usize << qubits;
    let mut data = Vec::with_capacity(dim * dim);
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(complex)
            .collect::<Result<Vec<_>>>()
            .with_context(|| format!("line {}", i + 1))?;
        if row.len() != dim {
            bail!(
                "line {}: expected {dim} entries, found {}",
                i + 1,
                row.len()
            );
        }
        data.extend(row);
        rows += 1;
    }
    if rows != dim {
        bail!("expected {dim} rows for {qubits} qubits, found {rows}");
    }
    let m = Matrix::from_rows(dim, dim, data)?;
    // File entries are typically rounded to a dozen digits.
    Ok(Unitary::with_tolerance(m, 1e-9)?)
}

pub fn matrix_file(path: &Path, qubits: usize) -> Result<Unitary> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_matrix(&text, qubits).with_context(|| format!("in {}", path.display()))
}

pub fn sequence_file(path: &Path, qubits: usize) -> Result<PulseSequence> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_sequence(&text, qubits).map_err(|e| match e {
        Error::Parse(p) => anyhow!("{}:{p}", path.display()),
        other => anyhow!("{}: {other}", path.display()),
    })
}

/// A basis state as a bit string (`101`) or `;`-separated `re,im` amplitudes.
pub fn state(text: &str, qubits: usize) -> Result<StateVector> {
    check_qubits(qubits)?;
    let text = text.trim();
    if !text.is_empty() && text.chars().all(|c| c == '0' || c == '1') {
        if text.len() != qubits {
            bail!("state '{text}' has {} bits, expected {qubits}", text.len());
        }
        return StateVector::from_bits(text).ok_or_else(|| anyhow!("bad bit string '{text}'"));
    }
    let amps = text
        .split(';')
        .map(complex)
        .collect::<Result<Vec<_>>>()
        .with_context(|| format!("in state '{text}'"))?;
    if amps.len() != 1 << qubits {
        bail!(
            "expected {} amplitudes, found {}",
            1usize << qubits,
            amps.len()
        );
    }
    let s = StateVector::new(amps)?;
    if (s.norm() - 1.0).abs() > 1e-9 {
        bail!("state '{text}' has norm {}, expected 1", s.norm());
    }
    Ok(s)
}

/// The registry in `dir`: `manifest.txt` plus the `.seq` files it names.
pub fn registry(dir: Option<&Path>) -> Result<Vec<GoldenSequence>> {
    let Some(dir) = dir else {
        return Ok(golden::builtin());
    };
    let manifest_path = dir.join("manifest.txt");
    let manifest = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("cannot read {}", manifest_path.display()))?;
    let mut failure = None;
    let entries = load_registry(&manifest, |name| {
        std::fs::read_to_string(dir.join(name)).map_err(|e| {
            failure = Some(format!("{}: {e}", dir.join(name).display()));
            Error::InvalidParameter(format!("cannot read '{name}'"))
        })
    });
    match (entries, failure) {
        (Ok(v), _) => Ok(v),
        (Err(_), Some(io)) => bail!(io),
        (Err(e), None) => Err(e).with_context(|| format!("in {}", manifest_path.display())),
    }
}
