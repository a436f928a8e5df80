//! The subcommands. Each returns whether the quality target was met; any
//! error is a usage or input problem.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use iontc_core::golden::verify_golden;
use iontc_core::optimizer::{best_index, optimize, Init, OptimizationReport};
use iontc_core::targets::NamedTarget;
use iontc_core::{compile, format_sequence, value, ObjectiveSpec, QecSubspace, C64};

use crate::config::{InitSpec, RunConfig};
use crate::{report, resolve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Met,
    Missed,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Met
        } else {
            Outcome::Missed
        }
    }
}

/// Scores one sequence file against a target and prints the value.
pub fn verify(
    out: &mut impl Write,
    seq_path: &Path,
    target: &str,
    qubits: usize,
    tolerance: f64,
) -> Result<Outcome> {
    let spec = resolve::target(target, qubits)?;
    let seq = resolve::sequence_file(seq_path, qubits)?;
    let v = value(&spec, &seq)?;
    writeln!(out, "{v:.12}")?;
    Ok(Outcome::from_bool(spec.max_value() - v <= tolerance))
}

/// Checks every entry of a registry, one line each.
pub fn verify_registry(
    out: &mut impl Write,
    dir: Option<&Path>,
    tolerance: f64,
) -> Result<Outcome> {
    let mut all = true;
    for entry in resolve::registry(dir)? {
        let o = verify_golden(&entry)?;
        let ok = o.expected - o.measured <= tolerance;
        all &= ok;
        let verdict = if ok { "pass" } else { "FAIL" };
        writeln!(
            out,
            "{verdict} {} {:.12} (expected {})",
            o.name, o.measured, o.expected
        )?;
    }
    Ok(Outcome::from_bool(all))
}

pub struct OptimizeArgs<'a> {
    pub config: &'a Path,
    pub seed: Option<u64>,
    pub restarts: usize,
    pub target: Option<&'a str>,
    pub qubits: Option<usize>,
}

fn run_restarts(
    spec: &ObjectiveSpec,
    init: &Init,
    cfg: &RunConfig,
    restarts: usize,
) -> Result<(u64, OptimizationReport)> {
    let reports: Vec<Result<OptimizationReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..restarts as u64)
            .map(|i| {
                let mut o = cfg.optimizer.clone();
                o.seed = o.seed.wrapping_add(i);
                scope.spawn(move || optimize(spec, init, &o).map_err(Into::into))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("optimizer thread panicked"))
            .collect()
    });
    let mut reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let i = best_index(&reports).expect("at least one restart");
    Ok((
        cfg.optimizer.seed.wrapping_add(i as u64),
        reports.swap_remove(i),
    ))
}

/// Runs the configured optimization, writes the report and the best
/// sequence, and prints a one-line summary.
pub fn optimize_cmd(out: &mut impl Write, args: OptimizeArgs<'_>) -> Result<Outcome> {
    let mut cfg = RunConfig::load(args.config)?;
    if let Some(seed) = args.seed {
        cfg.optimizer.seed = seed;
    }
    if let Some(t) = args.target {
        cfg.target = t.to_string();
    }
    if let Some(q) = args.qubits {
        cfg.qubits = q;
    }
    if args.restarts == 0 {
        bail!("--restarts must be at least 1");
    }
    let spec = resolve::target(&cfg.target, cfg.qubits)?;
    let init = match &cfg.init {
        InitSpec::Random(m) => Init::Random(*m),
        InitSpec::File(p) => Init::Sequence(resolve::sequence_file(p, cfg.qubits)?),
    };
    let (seed, best) = run_restarts(&spec, &init, &cfg, args.restarts)?;

    // Echo the winning seed so the report alone reproduces the run.
    let mut echoed = cfg.clone();
    echoed.optimizer.seed = seed;
    let report_path = cfg
        .report
        .clone()
        .unwrap_or_else(|| PathBuf::from("run.report"));
    let seq_path = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("run.seq"));
    std::fs::write(&report_path, report::render(&echoed, args.restarts, &best))
        .with_context(|| format!("cannot write {}", report_path.display()))?;
    let mut text = format_sequence(&best.best_sequence);
    if !text.is_empty() {
        text.push('\n');
    }
    std::fs::write(&seq_path, text)
        .with_context(|| format!("cannot write {}", seq_path.display()))?;

    writeln!(
        out,
        "{} value {:.12} normalized {:.12} pulses {} sweeps {}",
        best.terminated_by,
        best.best_value,
        best.best_normalized,
        best.pulse_count,
        best.sweeps_used
    )?;
    writeln!(out, "report {}", report_path.display())?;
    writeln!(out, "sequence {}", seq_path.display())?;
    let goal = cfg.optimizer.target_fidelity;
    Ok(Outcome::from_bool(best.best_normalized >= goal))
}

fn format_complex(z: C64) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    format!("{re:+.12} {im:+.12}i")
}

/// Applies a sequence to an input state and prints the non-zero amplitudes.
pub fn simulate(
    out: &mut impl Write,
    seq_path: &Path,
    qubits: usize,
    input: &str,
) -> Result<Outcome> {
    let seq = resolve::sequence_file(seq_path, qubits)?;
    let state = resolve::state(input, qubits)?;
    let result = compile(&seq).apply(&state)?;
    for (i, a) in result.amplitudes().iter().enumerate() {
        if a.norm() < 5e-13 {
            continue;
        }
        writeln!(
            out,
            "|{:0width$b}> {}",
            i,
            format_complex(*a),
            width = qubits
        )?;
    }
    Ok(Outcome::Met)
}

pub fn targets_list(out: &mut impl Write) -> Result<Outcome> {
    for (name, about) in NamedTarget::CATALOG {
        writeln!(out, "{name:<18} {about}")?;
    }
    Ok(Outcome::Met)
}

fn describe_qec(out: &mut impl Write, q: &QecSubspace) -> Result<()> {
    let (nd, na) = (q.data_qubits(), q.ancilla_qubits());
    writeln!(out, "error-correction subspace target")?;
    writeln!(
        out,
        "data qubits 1-{nd}, ancilla qubits {}-{}",
        nd + 1,
        nd + na
    )?;
    for (i, s) in q.code_states().iter().enumerate() {
        let terms: Vec<String> = s
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 1e-12)
            .map(|(b, a)| format!("({}) |{b:0nd$b}>", format_complex(*a)))
            .collect();
        writeln!(out, "code word {i}: {}", terms.join(" + "))?;
    }
    let errors: Vec<String> = q
        .error_set()
        .iter()
        .map(|e| {
            // Errors are bit flips: read them off the image of |0...0>.
            let image = (0..e.rows())
                .find(|&r| e.row(r)[0].norm() > 0.5)
                .unwrap_or(0);
            let flipped: Vec<String> = (1..=nd)
                .filter(|k| image & (1 << (nd - k)) != 0)
                .map(|k| format!("X{k}"))
                .collect();
            if flipped.is_empty() {
                "I".to_string()
            } else {
                flipped.join(" ")
            }
        })
        .collect();
    writeln!(out, "errors: {}", errors.join(", "))?;
    let anc: Vec<String> = q
        .ancilla_init()
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 1e-12)
        .map(|(b, _)| format!("|{b:0na$b}>"))
        .collect();
    writeln!(out, "ancillas start in {}", anc.join(" + "))?;
    writeln!(out, "maximum objective {}", q.error_set().len())?;
    Ok(())
}

pub fn targets_show(out: &mut impl Write, name: &str, qubits: usize) -> Result<Outcome> {
    match resolve::target(name, qubits)? {
        ObjectiveSpec::FullUnitary { target } => {
            let m = target.matrix();
            for r in 0..m.rows() {
                let row: Vec<String> = m
                    .row(r)
                    .iter()
                    .map(|z| {
                        let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
                        format!("{},{}", clean(z.re), clean(z.im))
                    })
                    .collect();
                writeln!(out, "{}", row.join(" "))?;
            }
        }
        ObjectiveSpec::QecSubspace(q) => describe_qec(out, &q)?,
    }
    Ok(Outcome::Met)
}
