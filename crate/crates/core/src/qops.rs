//! Generators of the pulse set and their closed-form exponentials.
//!
//! Every generator is diagonal in a product basis: `S_x` and `S_x²` in the
//! tensor power of the `σ_x` eigenbasis, `S_y` and `S_y²` in that of `σ_y`,
//! and `σ_z^(k)` in the computational basis. Pulses are therefore applied as
//! `F · D(θ) · F†` with `F` a tensor power of a 2x2 matrix and `D` a diagonal
//! phase, which costs `O(N·4^N)` per application instead of a dense product.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;

use crate::error::{Error, Result};
use crate::matrix::{adjoint2, qubit_mask, Mat2, Matrix, Unitary, C64, I, ONE, ZERO};

/// Largest supported register size.
pub const MAX_QUBITS: usize = 10;

pub fn check_qubits(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::QubitCount(n_qubits))
    }
}

pub fn check_qubit(index: usize, n_qubits: usize) -> Result<()> {
    if (1..=n_qubits).contains(&index) {
        Ok(())
    } else {
        Err(Error::QubitOutOfRange { index, n_qubits })
    }
}

/// Pulse generators: collective spin flips, collective entanglers and
/// addressed light shifts on qubit `k` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    X,
    Y,
    XX,
    YY,
    Z(usize),
}

const SX_FRAME: Mat2 = [
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0)],
];

const SY_FRAME: Mat2 = [
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
    [C64::new(0.0, FRAC_1_SQRT_2), C64::new(0.0, -FRAC_1_SQRT_2)],
];

impl Generator {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        check_qubits(n_qubits)?;
        match *self {
            Generator::Z(k) => check_qubit(k, n_qubits),
            _ => Ok(()),
        }
    }

    /// The factor `c` in `exp(-i c θ H)`: 1/2 for spin flips and light
    /// shifts, 1/4 for the entanglers.
    pub fn scale(&self) -> f64 {
        match self {
            Generator::XX | Generator::YY => 0.25,
            _ => 0.5,
        }
    }

    /// Single-qubit basis change whose tensor power diagonalizes the
    /// generator; `None` means the computational basis.
    pub fn frame(&self) -> Option<&'static Mat2> {
        match self {
            Generator::X | Generator::XX => Some(&SX_FRAME),
            Generator::Y | Generator::YY => Some(&SY_FRAME),
            Generator::Z(_) => None,
        }
    }

    /// Eigenvalues of `H_g`, indexed by basis state of the generator's frame.
    pub fn eigenvalues(&self, n_qubits: usize) -> Vec<f64> {
        let dim = 1usize << n_qubits;
        (0..dim)
            .map(|j| {
                let m = n_qubits as f64 - 2.0 * j.count_ones() as f64;
                match *self {
                    Generator::X | Generator::Y => m,
                    Generator::XX | Generator::YY => m * m,
                    Generator::Z(k) => {
                        if j & qubit_mask(k, n_qubits) == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                }
            })
            .collect()
    }

    /// Phase rates `c·λ_j`, so that the pulse is `F · diag(e^{-i rate_j θ}) · F†`.
    pub fn rates(&self, n_qubits: usize) -> Vec<f64> {
        let c = self.scale();
        self.eigenvalues(n_qubits)
            .into_iter()
            .map(|l| c * l)
            .collect()
    }

    /// Every generator available on `n_qubits`, optionally including the
    /// `S_y` family.
    pub fn all(n_qubits: usize, include_y: bool) -> Vec<Generator> {
        let mut out = vec![Generator::X, Generator::XX];
        if include_y {
            out.extend([Generator::Y, Generator::YY]);
        }
        out.extend((1..=n_qubits).map(Generator::Z));
        out
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::X => f.write_str("X"),
            Generator::Y => f.write_str("Y"),
            Generator::XX => f.write_str("XX"),
            Generator::YY => f.write_str("YY"),
            Generator::Z(k) => write!(f, "Z{k}"),
        }
    }
}

pub(crate) fn phases(rates: &[f64], theta: f64) -> Vec<C64> {
    rates
        .iter()
        .map(|&r| {
            let (s, c) = libm::sincos(r * theta);
            C64::new(c, -s)
        })
        .collect()
}

/// Precomputed diagonal form of one generator on a fixed register size.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenframe {
    pub generator: Generator,
    pub n_qubits: usize,
    pub frame: Option<Mat2>,
    pub rates: Vec<f64>,
    /// Distinct values of `rates`, and for each eigenvector the index of
    /// its rate in this list.
    pub distinct_rates: Vec<f64>,
    pub rate_index: Vec<usize>,
}

impl Eigenframe {
    pub fn new(generator: Generator, n_qubits: usize) -> Result<Self> {
        generator.validate(n_qubits)?;
        let rates = generator.rates(n_qubits);
        let mut distinct_rates: Vec<f64> = Vec::new();
        let rate_index = rates
            .iter()
            .map(|&r| match distinct_rates.iter().position(|&d| d == r) {
                Some(i) => i,
                None => {
                    distinct_rates.push(r);
                    distinct_rates.len() - 1
                }
            })
            .collect();
        Ok(Self {
            generator,
            n_qubits,
            frame: generator.frame().copied(),
            rates,
            distinct_rates,
            rate_index,
        })
    }

    /// `m <- exp(-i c θ H) · m`.
    pub fn apply_left(&self, theta: f64, m: &mut Matrix) {
        let d = phases(&self.rates, theta);
        match &self.frame {
            Some(f) => {
                m.apply_local_left(&adjoint2(f));
                m.scale_rows(&d);
                m.apply_local_left(f);
            }
            None => m.scale_rows(&d),
        }
    }

    /// `m <- m · exp(-i c θ H)`.
    pub fn apply_right(&self, theta: f64, m: &mut Matrix) {
        let d = phases(&self.rates, theta);
        match &self.frame {
            Some(f) => {
                m.apply_local_right(f);
                m.scale_cols(&d);
                m.apply_local_right(&adjoint2(f));
            }
            None => m.scale_cols(&d),
        }
    }

    /// `m <- F† · m`, moving row space into the eigenbasis.
    pub fn to_frame_left(&self, m: &mut Matrix) {
        if let Some(f) = &self.frame {
            m.apply_local_left(&adjoint2(f));
        }
    }

    /// `m <- m · F`.
    pub fn to_frame_right(&self, m: &mut Matrix) {
        if let Some(f) = &self.frame {
            m.apply_local_right(f);
        }
    }
}

/// Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn matrix(self) -> Mat2 {
        match self {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -I], [I, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

/// `coefficient · Π σ_axis^(qubit)`; an empty factor list is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: C64,
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: impl Into<C64>, factors: &[(usize, Axis)]) -> Self {
        Self {
            coefficient: coefficient.into(),
            factors: factors.to_vec(),
        }
    }
}

/// Sum of Pauli strings embedded in `2^n` dimensions.
pub fn pauli_string_operator(terms: &[PauliTerm], n_qubits: usize) -> Result<Matrix> {
    check_qubits(n_qubits)?;
    for term in terms {
        for &(q, _) in &term.factors {
            check_qubit(q, n_qubits)?;
        }
    }
    let dim = 1usize << n_qubits;
    let mut out = Matrix::zeros(dim, dim);
    for term in terms {
        for col in 0..dim {
            let mut index = col;
            let mut amp = term.coefficient;
            // The rightmost factor acts on the ket first.
            for &(q, axis) in term.factors.iter().rev() {
                let mask = qubit_mask(q, n_qubits);
                let bit_set = index & mask != 0;
                match axis {
                    Axis::X => index ^= mask,
                    Axis::Y => {
                        amp *= if bit_set { -I } else { I };
                        index ^= mask;
                    }
                    Axis::Z => {
                        if bit_set {
                            amp = -amp;
                        }
                    }
                }
            }
            out[(index, col)] += amp;
        }
    }
    Ok(out)
}

/// Dense Hermitian matrix of a generator: `S_x`, `S_y`, `S_x²`, `S_y²` or `σ_z^(k)`.
pub fn generator_matrix(g: Generator, n_qubits: usize) -> Result<Matrix> {
    g.validate(n_qubits)?;
    let collective = |axis: Axis| -> Result<Matrix> {
        let terms: Vec<_> = (1..=n_qubits)
            .map(|k| PauliTerm::new(ONE, &[(k, axis)]))
            .collect();
        pauli_string_operator(&terms, n_qubits)
    };
    match g {
        Generator::X => collective(Axis::X),
        Generator::Y => collective(Axis::Y),
        Generator::XX => {
            let s = collective(Axis::X)?;
            Ok(s.matmul(&s))
        }
        Generator::YY => {
            let s = collective(Axis::Y)?;
            Ok(s.matmul(&s))
        }
        Generator::Z(k) => pauli_string_operator(&[PauliTerm::new(ONE, &[(k, Axis::Z)])], n_qubits),
    }
}

fn kron_power(u: &Mat2, n: usize) -> Matrix {
    let mut m = Matrix::identity(1 << n);
    m.apply_local_left(u);
    m
}

/// `exp(-i c_g θ H_g)` in closed form.
pub fn pulse_unitary(g: Generator, theta: f64, n_qubits: usize) -> Result<Unitary> {
    g.validate(n_qubits)?;
    let m = match g {
        Generator::Z(_) => Matrix::from_diag(&phases(&g.rates(n_qubits), theta)),
        Generator::X | Generator::Y => {
            let axis = if g == Generator::X { Axis::X } else { Axis::Y };
            let (s, c) = libm::sincos(theta / 2.0);
            let p = axis.matrix();
            // exp(-iθ/2 σ) = cos(θ/2) I - i sin(θ/2) σ
            let r: Mat2 = core::array::from_fn(|i| {
                core::array::from_fn(|j| {
                    let id = if i == j { ONE } else { ZERO };
                    id * c - I * p[i][j] * s
                })
            });
            kron_power(&r, n_qubits)
        }
        Generator::XX | Generator::YY => {
            let f = g.frame().expect("entanglers have a frame");
            let mut m = kron_power(&adjoint2(f), n_qubits);
            m.scale_rows(&phases(&g.rates(n_qubits), theta));
            m.apply_local_left(f);
            m
        }
    };
    Ok(Unitary::from_matrix_unchecked(m))
}

/// `|Tr(u† v)| / dim`: 1 iff equal up to global phase.
pub fn fidelity(u: &Matrix, v: &Matrix) -> Result<f64> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch(u.rows(), v.rows()));
    }
    let overlap: C64 = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((overlap.norm() / u.rows() as f64).min(1.0))
}
