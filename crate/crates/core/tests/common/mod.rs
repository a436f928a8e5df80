//! Reference implementations the library is checked against. They are
//! deliberately slow and share no code with the library's fast paths.
#![allow(dead_code)]

use iontc_core::{Generator, Matrix, Pulse, PulseSequence, C64};
use rand::Rng;

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| a.row(i)[j] + b.row(i)[j])
}

fn norm1(a: &Matrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a.row(i)[j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring around a truncated Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm1(a) * scale > 0.25 {
        scale /= 2.0;
        squarings += 1;
    }
    let x = a.scaled(C64::new(scale, 0.0));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=20 {
        term = term.matmul(&x).scaled(C64::new(1.0 / k as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

pub fn pauli(axis: char) -> Matrix {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    let data = match axis {
        'x' => vec![z, o, o, z],
        'y' => vec![z, -i, i, z],
        'z' => vec![o, z, z, -o],
        _ => vec![o, z, z, o],
    };
    Matrix::from_rows(2, 2, data).unwrap()
}

/// `σ_axis` on qubit `k` (1-based, qubit 1 leftmost in the tensor product).
pub fn single(axis: char, k: usize, n: usize) -> Matrix {
    (1..=n).fold(Matrix::identity(1), |acc, q| {
        acc.kron(&pauli(if q == k { axis } else { 'i' }))
    })
}

pub fn collective(axis: char, n: usize) -> Matrix {
    (1..=n).fold(Matrix::zeros(1 << n, 1 << n), |acc, k| {
        add(&acc, &single(axis, k, n))
    })
}

/// The Hermitian generator of a pulse together with its angle factor.
pub fn hamiltonian(g: Generator, n: usize) -> (Matrix, f64) {
    match g {
        Generator::X => (collective('x', n), 0.5),
        Generator::Y => (collective('y', n), 0.5),
        Generator::XX => {
            let s = collective('x', n);
            (s.matmul(&s), 0.25)
        }
        Generator::YY => {
            let s = collective('y', n);
            (s.matmul(&s), 0.25)
        }
        Generator::Z(k) => (single('z', k, n), 0.5),
    }
}

pub fn pulse_expm(g: Generator, theta: f64, n: usize) -> Matrix {
    let (h, c) = hamiltonian(g, n);
    expm(&h.scaled(C64::new(0.0, -c * theta)))
}

/// `U_M ··· U_1` with every pulse exponentiated from scratch.
pub fn naive_compile(seq: &PulseSequence) -> Matrix {
    let n = seq.n_qubits();
    seq.pulses()
        .iter()
        .fold(Matrix::identity(1 << n), |acc, p| {
            pulse_expm(p.generator, p.angle, n).matmul(&acc)
        })
}

/// `|tr(V† U)|² / d²`.
pub fn naive_fidelity(u: &Matrix, v: &Matrix) -> f64 {
    let d = u.rows() as f64;
    v.adjoint().matmul(u).trace().norm_sqr() / (d * d)
}

pub fn random_generator<R: Rng>(n: usize, use_y: bool, rng: &mut R) -> Generator {
    let fixed = if use_y { 4 } else { 2 };
    let pick = rng.random_range(0..fixed + n);
    match pick {
        0 => Generator::X,
        1 => Generator::XX,
        2 => Generator::Y,
        3 if use_y => Generator::YY,
        _ => Generator::Z(pick - fixed + 1),
    }
}

pub fn random_sequence<R: Rng>(n: usize, len: usize, rng: &mut R) -> PulseSequence {
    let pulses = (0..len)
        .map(|_| {
            let g = random_generator(n, true, rng);
            Pulse::new(g, rng.random_range(-4.0..4.0))
        })
        .collect();
    PulseSequence::new(n, pulses).unwrap()
}
