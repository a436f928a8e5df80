mod common;

use common::*;
use iontc_core::golden;
use iontc_core::targets::qec_spec;
use iontc_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_pulses_match_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=5 {
        for g in Generator::all(n, true) {
            for _ in 0..4 {
                let theta = rng.random_range(-7.0..7.0);
                let fast = pulse_unitary(g, theta, n).unwrap();
                let slow = pulse_expm(g, theta, n);
                let err = fast.matrix().max_abs_diff(&slow);
                assert!(err < 1e-10, "{g:?} θ={theta} n={n}: {err:e}");
            }
        }
    }
}

#[test]
fn dense_generators_match_tensor_products() {
    for n in 1..=4 {
        for g in Generator::all(n, true) {
            let (h, _) = hamiltonian(g, n);
            let err = generator_matrix(g, n).unwrap().max_abs_diff(&h);
            assert!(err < 1e-14, "{g:?} n={n}");
        }
    }
}

#[test]
fn compile_matches_naive_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(0..=25);
        let seq = random_sequence(n, len, &mut rng);
        let err = compile(&seq).matrix().max_abs_diff(&naive_compile(&seq));
        assert!(err < 1e-10, "n={n} len={len}: {err:e}");
    }
}

#[test]
fn fidelity_matches_naive_trace_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let a = random_sequence(n, 8, &mut rng);
        let b = random_sequence(n, 8, &mut rng);
        let spec = ObjectiveSpec::full_unitary(compile(&b));
        let fast = value(&spec, &a).unwrap();
        let slow = naive_fidelity(&naive_compile(&a), &naive_compile(&b));
        assert!((fast - slow).abs() < 1e-12);
    }
}

#[test]
fn cached_partial_products_match_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10 {
        let n = rng.random_range(1..=4);
        let seq = random_sequence(n, 12, &mut rng);
        let target = compile(&random_sequence(n, 6, &mut rng));
        let spec = ObjectiveSpec::full_unitary(target.clone());
        let cache = build_cache(&spec, &seq).unwrap();
        for m in 0..=seq.len() {
            let head = PulseSequence::new(n, seq.pulses()[..m].to_vec()).unwrap();
            let tail = PulseSequence::new(n, seq.pulses()[m..].to_vec()).unwrap();
            let fwd = naive_compile(&head);
            let bwd = target.matrix().adjoint().matmul(&naive_compile(&tail));
            assert!(cache.forward()[m].max_abs_diff(&fwd) < 1e-10);
            assert!(cache.backward()[m].max_abs_diff(&bwd) < 1e-10);
        }
        assert!((cache.value() - value(&spec, &seq).unwrap()).abs() < 1e-12);
    }
}

fn relative(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(1e-3)
}

fn finite_differences(spec: &ObjectiveSpec, seq: &PulseSequence, m: usize) -> (f64, f64) {
    let at = |d: f64| {
        let theta = seq.pulses()[m].angle + d;
        value(spec, &seq.clone().with_angle(m, theta).unwrap()).unwrap()
    };
    // Five-point stencils: truncation O(h⁴), rounding O(ε/h²).
    let h = 1e-3;
    let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
    let first = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let second = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * at(0.0)) / (12.0 * h * h);
    (first, second)
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let len = rng.random_range(1..=30);
        let seq = random_sequence(n, len, &mut rng);
        // A target close to the sequence keeps Φ away from zero.
        let near = random_sequence(n, 3, &mut rng);
        let spec = ObjectiveSpec::full_unitary(compile(&seq.then(&near).unwrap()));
        let m = rng.random_range(0..len);
        let (d1, d2) = pulse_derivatives(&spec, &seq, m).unwrap();
        let (f1, f2) = finite_differences(&spec, &seq, m);
        worst1 = worst1.max(relative(d1, f1));
        worst2 = worst2.max(relative(d2, f2));
    }
    assert!(worst1 < 1e-6, "first derivative: {worst1:e}");
    assert!(worst2 < 1e-4, "second derivative: {worst2:e}");
}

#[test]
fn qec_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let spec = qec_spec();
    for _ in 0..20 {
        let seq = random_sequence(5, 12, &mut rng);
        let m = rng.random_range(0..12);
        let (d1, d2) = pulse_derivatives(&spec, &seq, m).unwrap();
        let (f1, f2) = finite_differences(&spec, &seq, m);
        assert!(relative(d1, f1) < 1e-6, "{d1} vs {f1}");
        assert!(relative(d2, f2) < 1e-4, "{d2} vs {f2}");
    }
}

#[test]
fn golden_solutions_are_stationary() {
    for entry in golden::builtin() {
        let spec = entry.target.build(entry.n_qubits).unwrap();
        let cache = build_cache(&spec, &entry.sequence).unwrap();
        for (m, g) in cache.gradient().into_iter().enumerate() {
            assert!(g.abs() < 1e-9, "{} pulse {m}: {g:e}", entry.name);
        }
    }
}
