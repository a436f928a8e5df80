use iontc_core::optimizer::*;
use iontc_core::targets::*;
use iontc_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Seeds documented in the README for the rediscovery runs.
const CNOT_SEED: u64 = 0;
const IDENTITY_SEED: u64 = 0;

fn config(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..Default::default()
    }
}

#[test]
fn rediscovers_cnot_from_random_start() {
    let spec = ObjectiveSpec::full_unitary(cnot(1, 2, 3).unwrap());
    let start = Instant::now();
    let report = optimize(&spec, &Init::Random(40), &config(CNOT_SEED)).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert_eq!(report.initial_sequence.len(), 40);
    assert!(
        report.best_normalized >= 0.9999,
        "{}",
        report.best_normalized
    );
    assert!(report.sweeps_used <= 5000);
    assert_eq!(report.terminated_by, Termination::TargetReached);
    let recomputed = value(&spec, &report.best_sequence).unwrap();
    assert!((recomputed - report.best_value).abs() < 1e-12);
    assert_eq!(report.pulse_count, report.best_sequence.len());
}

#[test]
fn identity_target_prunes_everything() {
    let spec = ObjectiveSpec::full_unitary(Unitary::identity(3));
    let report = optimize(&spec, &Init::Random(40), &config(IDENTITY_SEED)).unwrap();
    assert!(
        report.best_sequence.is_empty(),
        "{}",
        format_sequence(&report.best_sequence)
    );
    assert!((report.best_value - 1.0).abs() < 1e-12);
}

#[test]
fn equal_seeds_give_equal_reports() {
    let spec = ObjectiveSpec::full_unitary(double_cnot(3).unwrap());
    let cfg = OptimizerConfig {
        seed: 9,
        max_sweeps: 300,
        ..Default::default()
    };
    let a = optimize(&spec, &Init::Random(20), &cfg).unwrap();
    let b = optimize(&spec, &Init::Random(20), &cfg).unwrap();
    assert_eq!(a, b);
    let other = optimize(&spec, &Init::Random(20), &config(10)).unwrap();
    assert_ne!(a.initial_sequence, other.initial_sequence);
}

#[test]
fn zero_temperature_sweeps_rarely_lose_ground() {
    let spec = ObjectiveSpec::full_unitary(cnot(1, 2, 3).unwrap());
    let cfg = OptimizerConfig::default();
    let mut kept = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_sequence(3, 40, false, &mut rng).unwrap();
        let before = penalized_value(&spec, &seq, cfg.gamma, cfg.alpha).unwrap();
        let (_, after) = sweep(&spec, &seq, &cfg, 0.0, &mut rng).unwrap();
        if after >= before - 1e-12 {
            kept += 1;
        }
    }
    assert!(kept >= 95, "{kept}/100");
}

#[test]
fn insertion_escapes_a_short_plateau() {
    let spec = ObjectiveSpec::full_unitary(double_cnot(3).unwrap());
    let cfg = OptimizerConfig {
        seed: 4,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seq = random_sequence(3, 6, false, &mut rng).unwrap();
    let mut v = f64::NEG_INFINITY;
    for _ in 0..500 {
        let (next, nv) = sweep(&spec, &seq, &cfg, 0.0, &mut rng).unwrap();
        seq = next;
        if nv - v < 1e-14 {
            break;
        }
        v = nv;
    }
    assert_eq!(seq.len(), 6);
    assert!(value(&spec, &seq).unwrap() < 0.99, "not a plateau");

    let mut annealer = Annealer::new(cfg).unwrap();
    let accepted = (1..=200).find(|_| annealer.try_insert(&spec, &seq).unwrap().1);
    assert!(accepted.is_some(), "no insertion accepted in 200 attempts");
}

#[test]
fn temperature_follows_the_schedule() {
    let cfg = OptimizerConfig {
        t_init: 0.3,
        cool_factor: 0.9,
        ..Default::default()
    };
    let spec = ObjectiveSpec::full_unitary(Unitary::identity(2));
    let mut annealer = Annealer::new(cfg.clone()).unwrap();
    let mut seq = PulseSequence::new(2, vec![Pulse::new(Generator::X, 0.4)]).unwrap();
    for k in 0..30 {
        assert_eq!(annealer.temperature(), 0.3 * libm::pow(0.9, k as f64));
        seq = annealer.sweep(&spec, &seq).unwrap().0;
    }
    assert_eq!(annealer.sweeps(), 30);
}

#[test]
fn reported_sequence_survives_pruning() {
    let spec = ObjectiveSpec::full_unitary(cnot(1, 2, 3).unwrap());
    let cfg = OptimizerConfig {
        seed: 2,
        ..Default::default()
    };
    let report = optimize(&spec, &Init::Random(40), &cfg).unwrap();
    let pruned = canonicalize(&report.best_sequence, cfg.prune_eps);
    let v = value(&spec, &pruned).unwrap();
    assert!(v >= report.best_value - 1e-9);
}

#[test]
fn warm_start_shrinks_the_qec_circuit() {
    let spec = qec_spec();
    let warm = qec_circuit_pulses();
    let cfg = OptimizerConfig {
        seed: 0,
        t_init: 5e-3,
        alpha: 1e-3,
        max_sweeps: 200,
        polish_gap: 1e-2,
        refine_iters: 100,
        ..Default::default()
    };
    let report = optimize(&spec, &Init::Sequence(warm.clone()), &cfg).unwrap();
    assert!(report.pulse_count < warm.len(), "{}", report.pulse_count);
    assert!(report.best_value > 3.99, "{}", report.best_value);
}
