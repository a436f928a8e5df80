//! End-to-end acceptance run: one pass/fail line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use common::{collective, expm, pulse_expm, random_sequence, single};
use iontc::commands::{optimize_cmd, OptimizeArgs};
use iontc_core::golden::{self, builtin_file, verify_golden};
use iontc_core::optimizer::{optimize, Init, OptimizerConfig};
use iontc_core::targets::{cnot, encode_logical, qec_spec, simulate_qec_round};
use iontc_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn golden_conformance() -> Verdict {
    let start = Instant::now();
    let entries = golden::builtin();
    let mut worst = f64::INFINITY;
    for e in &entries {
        let out = verify_golden(e).map_err(|x| x.to_string())?;
        let normalized = out.measured / e.expected_value;
        ensure(
            normalized >= 1.0 - 1e-9,
            format!("{} scored {normalized}", e.name),
        )?;
        worst = worst.min(normalized);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, format!("took {secs:.3} s"))?;
    Ok(format!(
        "{} entries, worst normalized {worst:.15}, {secs:.3} s",
        entries.len()
    ))
}

fn algebraic_angles() -> Verdict {
    let b2 = 3.0 * PI / 8.0 - libm::asin(5f64.sqrt() - 2.0) / 4.0;
    let derived = [b2, 2.0 * b2, PI - 4.0 * b2, PI / 2.0 - 2.0 * b2];
    let reference = [0.3560, 0.7121, -0.4241, -0.2121];
    for (d, p) in derived.iter().zip(reference) {
        let rounded = (d / PI * 1e4).round() / 1e4;
        ensure(
            rounded == p,
            format!("{:.6}π rounds to {rounded}, not {p}", d / PI),
        )?;
    }
    let entry = golden::find("double-cnot-algebraic").ok_or("missing entry")?;
    let out = verify_golden(&entry).map_err(|x| x.to_string())?;
    ensure(
        out.measured >= 1.0 - 1e-9,
        format!("fidelity {}", out.measured),
    )?;
    Ok(format!(
        "b2 = {:.6}π, sequence fidelity {:.15}",
        b2 / PI,
        out.measured
    ))
}

fn qec_behaviour() -> Verdict {
    let spec = qec_spec();
    let seq = golden::find("qec-34").ok_or("missing entry")?.sequence;
    let score = value(&spec, &seq).map_err(|x| x.to_string())?;
    ensure((score - 4.0).abs() < 1e-9, format!("score {score}"))?;
    let idle = value(&spec, &PulseSequence::empty(5).unwrap()).unwrap();
    ensure(
        (idle - 1.0).abs() < 1e-12,
        format!("identity scores {idle}"),
    )?;
    let u = compile(&seq);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 1.0f64;
    for _ in 0..20 {
        let a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / n, b / n);
        for error in 0..4 {
            let round =
                simulate_qec_round(&u, (a, b), error, &mut rng).map_err(|x| x.to_string())?;
            worst = worst.min(round.data.overlap_fidelity(&encode_logical(a, b)));
        }
    }
    ensure(worst >= 1.0 - 1e-9, format!("worst restoration {worst}"))?;
    Ok(format!(
        "score {score:.12}, identity {idle:.12}, worst of 80 branches {worst:.15}"
    ))
}

fn gradient_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(1..=30);
        let seq = random_sequence(n, len, &mut rng);
        let near = random_sequence(n, 3, &mut rng);
        let spec = ObjectiveSpec::full_unitary(compile(&seq.then(&near).unwrap()));
        let m = rng.random_range(0..len);
        let (d1, d2) = pulse_derivatives(&spec, &seq, m).unwrap();
        let at = |d: f64| {
            let s = seq
                .clone()
                .with_angle(m, seq.pulses()[m].angle + d)
                .unwrap();
            value(&spec, &s).unwrap()
        };
        // Five-point stencils keep the oracle's own error far below the bounds.
        let h = 1e-3;
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        let f1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        let f2 = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * at(0.0)) / (12.0 * h * h);
        worst1 = worst1.max((d1 - f1).abs() / d1.abs().max(1e-3));
        worst2 = worst2.max((d2 - f2).abs() / d2.abs().max(1e-3));
    }
    ensure(worst1 < 1e-6, format!("first derivative error {worst1:e}"))?;
    ensure(worst2 < 1e-4, format!("second derivative error {worst2:e}"))?;
    let mut steepest = 0.0f64;
    for e in golden::builtin() {
        let spec = e.target.build(e.n_qubits).unwrap();
        let g = build_cache(&spec, &e.sequence).unwrap().gradient();
        steepest = g.iter().fold(steepest, |a, x| a.max(x.abs()));
    }
    ensure(steepest < 1e-9, format!("golden gradient {steepest:e}"))?;
    Ok(format!(
        "relative errors {worst1:.1e} / {worst2:.1e}, largest golden gradient {steepest:.1e}"
    ))
}

fn identity_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 1.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let k = rng.random_range(1..=n);
        let theta = rng.random_range(-2.0 * PI..2.0 * PI);
        let echo = compile(&build_spin_echo_x(k, theta, n).unwrap());
        let want = expm(&single('x', k, n).scaled(C64::new(0.0, -theta / 2.0)));
        worst = worst.min(fidelity(echo.matrix(), &want).unwrap());

        let ms = compile(&build_refocused_ms(k, theta, n).unwrap());
        let rest = Matrix::from_fn(1 << n, 1 << n, |i, j| {
            collective('x', n).row(i)[j] - single('x', k, n).row(i)[j]
        });
        let want = expm(&rest.matmul(&rest).scaled(C64::new(0.0, -theta / 4.0)));
        worst = worst.min(fidelity(ms.matrix(), &want).unwrap());
    }
    ensure(worst >= 1.0 - 1e-10, format!("worst fidelity {worst}"))?;
    let mut err = 0.0f64;
    for n in 1..=5 {
        for g in Generator::all(n, true) {
            let theta = rng.random_range(-2.0 * PI..2.0 * PI);
            let fast = pulse_unitary(g, theta, n).unwrap();
            err = err.max(fast.matrix().max_abs_diff(&pulse_expm(g, theta, n)));
        }
    }
    ensure(err < 1e-10, format!("exponential mismatch {err:e}"))?;
    Ok(format!(
        "worst construction fidelity {worst:.15}, exponential error {err:.1e}"
    ))
}

/// Documented in the README.
const CNOT_SEED: u64 = 0;
const IDENTITY_SEED: u64 = 0;

fn rediscovery() -> Verdict {
    let spec = ObjectiveSpec::full_unitary(cnot(1, 2, 3).unwrap());
    let cfg = OptimizerConfig {
        seed: CNOT_SEED,
        ..Default::default()
    };
    let start = Instant::now();
    let r = optimize(&spec, &Init::Random(40), &cfg).map_err(|x| x.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        r.best_normalized >= 0.9999,
        format!("CNOT reached {}", r.best_normalized),
    )?;
    ensure(
        r.sweeps_used <= 5000 && secs < 60.0,
        format!("{} sweeps, {secs:.1} s", r.sweeps_used),
    )?;

    let id = ObjectiveSpec::full_unitary(Unitary::identity(3));
    let cfg = OptimizerConfig {
        seed: IDENTITY_SEED,
        ..Default::default()
    };
    let e = optimize(&id, &Init::Random(40), &cfg).map_err(|x| x.to_string())?;
    ensure(
        e.best_sequence.is_empty(),
        format!("identity left {} pulses", e.pulse_count),
    )?;
    Ok(format!(
        "CNOT {:.12} with {} pulses after {} sweeps in {secs:.2} s; identity emptied after {} sweeps",
        r.best_normalized, r.pulse_count, r.sweeps_used, e.sweeps_used
    ))
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("iontc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let cfg = "qubits = 3\ntarget = cnot:1,2\ninit = random:40\nseed = 0\n";
    let run = |name: &str| -> std::result::Result<Vec<u8>, String> {
        let path = dir.join(format!("{name}.cfg"));
        std::fs::write(&path, cfg).map_err(|e| e.to_string())?;
        let args = OptimizeArgs {
            config: Path::new(&path),
            seed: None,
            restarts: 1,
            target: None,
            qubits: None,
        };
        optimize_cmd(&mut std::io::sink(), args).map_err(|e| e.to_string())?;
        std::fs::read(dir.join(format!("{name}.report"))).map_err(|e| e.to_string())
    };
    let (a, b) = (run("first")?, run("second")?);
    let _ = std::fs::remove_dir_all(&dir);
    ensure(a == b, "reports differ")?;
    Ok(format!("two reports of {} bytes are identical", a.len()))
}

fn parser() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let n = rng.random_range(1..=6);
        let len = rng.random_range(0..=15);
        let seq = random_sequence(n, len, &mut rng);
        let back = parse_sequence(&format_sequence(&seq), n).map_err(|e| e.to_string())?;
        let same = back.len() == seq.len()
            && back
                .pulses()
                .iter()
                .zip(seq.pulses())
                .all(|(a, b)| a.generator == b.generator && (a.angle - b.angle).abs() <= 1e-12);
        ensure(same, format!("sequence {i} did not survive a round trip"))?;
    }
    let reference: &[(&str, usize, &[f64])] = &[
        (
            "cnot_3q.seq",
            3,
            &[0.5, 0.5, 0.25, 0.25, 1.0, 0.25, 0.25, 0.5, 0.5, 1.0],
        ),
        (
            "double_cnot.seq",
            3,
            &[0.5, -0.5, 0.25, -0.25, 1.0, -0.25, -0.25, 0.5, 0.5],
        ),
        (
            "toffoli.seq",
            3,
            &[0.5, 0.25, 0.5, -0.5, -0.5, -0.25, 0.25, 0.5, 0.5, 0.5, -0.5],
        ),
        ("bell_map_4.seq", 4, &[0.25, 1.0, 1.0, 0.25, 1.0, 1.0]),
    ];
    let mut files = 0;
    for (file, n, want) in reference {
        let seq = parse_sequence(builtin_file(file).unwrap(), *n).map_err(|e| e.to_string())?;
        let got: Vec<f64> = seq.angles().map(|a| a / PI).collect();
        ensure(got.len() == want.len(), format!("{file} length"))?;
        for (g, w) in got.iter().zip(*want) {
            ensure((g - w).abs() < 1e-15, format!("{file}: {g}π vs {w}π"))?;
        }
        files += 1;
    }
    for (file, _) in golden::FILES {
        let n = if file.starts_with("bell_map_6") { 6 } else { 5 };
        parse_sequence(builtin_file(file).unwrap(), n).map_err(|e| format!("{file}: {e}"))?;
    }
    Ok(format!(
        "1000 round trips, {files} files checked angle by angle, all {} files parse",
        golden::FILES.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden-sequence conformance", golden_conformance),
        ("algebraic-angle consistency", algebraic_angles),
        ("qec behavioral reproduction", qec_behaviour),
        ("gradient oracle", gradient_oracle),
        ("identity suite", identity_suite),
        ("optimizer rediscovery", rediscovery),
        ("determinism", determinism),
        ("parser", parser),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
