//! Registry of reference pulse sequences and their conformance check.
//!
//! The manifest is a block file (see [`crate::keyvalue`]) with keys `name`,
//! `qubits`, `target`, `sequence` (a `.seq` file name), `expected` and an
//! optional `repeat` count.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::keyvalue::{parse_blocks, Block};
use crate::objective::value;
use crate::sequence::{parse_sequence, PulseSequence};
use crate::targets::NamedTarget;

/// Verification slack below the expected value.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenSequence {
    pub name: String,
    pub n_qubits: usize,
    /// Full sequence, already repeated `repeat` times.
    pub sequence: PulseSequence,
    pub target: NamedTarget,
    pub expected_value: f64,
    pub source: String,
    pub repeat: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub passed: bool,
}

/// Compiles the entry and scores it against its target.
pub fn verify_golden(entry: &GoldenSequence) -> Result<GoldenOutcome> {
    let spec = entry.target.build(entry.n_qubits)?;
    let measured = value(&spec, &entry.sequence)?;
    Ok(GoldenOutcome {
        name: entry.name.clone(),
        measured,
        expected: entry.expected_value,
        passed: measured >= entry.expected_value - GOLDEN_TOLERANCE,
    })
}

fn parse_number<T: core::str::FromStr>(block: &Block, key: &str) -> Result<T> {
    let raw = block.require(key)?;
    raw.parse().map_err(|_| {
        Error::InvalidParameter(format!(
            "line {}: bad value '{raw}' for '{key}'",
            block.first_line()
        ))
    })
}

/// Parses `manifest`, fetching each referenced `.seq` text through `load`.
pub fn load_registry(
    manifest: &str,
    mut load: impl FnMut(&str) -> Result<String>,
) -> Result<Vec<GoldenSequence>> {
    let mut entries: Vec<GoldenSequence> = Vec::new();
    for block in parse_blocks(manifest)? {
        let name = String::from(block.require("name")?);
        if entries.iter().any(|e| e.name == name) {
            return Err(Error::InvalidParameter(format!(
                "duplicate registry entry '{name}'"
            )));
        }
        let n_qubits: usize = parse_number(&block, "qubits")?;
        let target = NamedTarget::parse(block.require("target")?)?;
        let expected_value: f64 = parse_number(&block, "expected")?;
        let repeat: usize = if block.get("repeat").is_some() {
            parse_number(&block, "repeat")?
        } else {
            1
        };
        if repeat == 0 {
            return Err(Error::InvalidParameter(format!(
                "entry '{name}': repeat must be at least 1"
            )));
        }
        let source = String::from(block.require("sequence")?);
        let text = load(&source)?;
        let sequence = parse_sequence(&text, n_qubits)?.repeated(repeat);
        entries.push(GoldenSequence {
            name,
            n_qubits,
            sequence,
            target,
            expected_value,
            source,
            repeat,
        });
    }
    Ok(entries)
}

pub const MANIFEST: &str = include_str!("../golden/manifest.txt");

/// The `.seq` files shipped with the library, by file name.
pub const FILES: &[(&str, &str)] = &[
    ("cnot_3q.seq", include_str!("../golden/cnot_3q.seq")),
    ("double_cnot.seq", include_str!("../golden/double_cnot.seq")),
    (
        "double_cnot_algebraic.seq",
        include_str!("../golden/double_cnot_algebraic.seq"),
    ),
    ("cnot_n4.seq", include_str!("../golden/cnot_n4.seq")),
    ("toffoli.seq", include_str!("../golden/toffoli.seq")),
    ("bell_map_4.seq", include_str!("../golden/bell_map_4.seq")),
    ("bell_map_6.seq", include_str!("../golden/bell_map_6.seq")),
    ("qec_34.seq", include_str!("../golden/qec_34.seq")),
];

pub fn builtin_file(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// The built-in registry.
pub fn builtin() -> Vec<GoldenSequence> {
    load_registry(MANIFEST, |name| {
        builtin_file(name)
            .map(String::from)
            .ok_or_else(|| Error::InvalidParameter(format!("no built-in sequence '{name}'")))
    })
    .expect("built-in registry is well formed")
}

pub fn find(name: &str) -> Option<GoldenSequence> {
    builtin().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_verifies() {
        let all = builtin();
        assert_eq!(all.len(), 9);
        for e in &all {
            let out = verify_golden(e).unwrap();
            assert!(out.passed, "{}: {}", e.name, out.measured);
        }
    }

    #[test]
    fn perturbed_entry_fails() {
        let mut e = find("toffoli").unwrap();
        let a = e.sequence.pulses()[4].angle;
        e.sequence = e.sequence.clone().with_angle(4, a + 0.01).unwrap();
        let out = verify_golden(&e).unwrap();
        assert!(!out.passed && out.measured < 1.0);
    }

    #[test]
    fn single_bell_pass_is_not_enough() {
        let mut e = find("bell-map-6x2").unwrap();
        let once = e.sequence.pulses()[..e.sequence.len() / 2].to_vec();
        e.sequence = PulseSequence::new(6, once).unwrap();
        assert!(!verify_golden(&e).unwrap().passed);
    }

    #[test]
    fn manifest_errors() {
        let load = |_: &str| Ok(String::from("[pi]_X"));
        assert!(load_registry(
            "name = a\nqubits = 2\ntarget = identity\nsequence = s\n",
            load
        )
        .is_err());
        assert!(load_registry(
            "name = a\nqubits = x\ntarget = identity\nsequence = s\nexpected = 1\n",
            load
        )
        .is_err());
        let ok = load_registry(
            "name = a\nqubits = 2\ntarget = identity\nsequence = s\nexpected = 1\nrepeat = 3\n",
            load,
        )
        .unwrap();
        assert_eq!(ok[0].sequence.len(), 3);
        let dup = "name = a\nqubits = 1\ntarget = identity\nsequence = s\nexpected = 1\n\n\
                   name = a\nqubits = 1\ntarget = identity\nsequence = s\nexpected = 1\n";
        assert!(load_registry(dup, load).is_err());
    }
}
