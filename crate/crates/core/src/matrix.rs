//! Dense complex matrices and state vectors.
//!
//! Basis index convention: qubit 1 is the most significant tensor factor, so
//! qubit `k` of an `n`-qubit register lives in bit `n - k` of a basis index.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Entrywise tolerance used when validating unitaries and normalized states.
pub const UNITARY_TOL: f64 = 1e-12;

/// A single-qubit operator as a row-major 2x2 array.
pub type Mat2 = [[C64; 2]; 2];

pub(crate) fn adjoint2(u: &Mat2) -> Mat2 {
    [
        [u[0][0].conj(), u[1][0].conj()],
        [u[0][1].conj(), u[1][1].conj()],
    ]
}

/// Bit mask selecting qubit `k` (1-based) within an `n`-qubit basis index.
#[inline]
pub fn qubit_mask(k: usize, n_qubits: usize) -> usize {
    1 << (n_qubits - k)
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(data.len(), rows * cols));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `self† self` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Matrix::identity(self.rows))
    }

    /// `self <- (u ⊗ u ⊗ ... ⊗ u) · self` for a row count of `2^n`.
    pub fn apply_local_left(&mut self, u: &Mat2) {
        let n = self.rows.trailing_zeros() as usize;
        let cols = self.cols;
        for k in 1..=n {
            let mask = qubit_mask(k, n);
            for r0 in (0..self.rows).filter(|r| r & mask == 0) {
                let r1 = r0 | mask;
                for c in 0..cols {
                    let a = self.data[r0 * cols + c];
                    let b = self.data[r1 * cols + c];
                    self.data[r0 * cols + c] = u[0][0] * a + u[0][1] * b;
                    self.data[r1 * cols + c] = u[1][0] * a + u[1][1] * b;
                }
            }
        }
    }

    /// `self <- self · (u ⊗ u ⊗ ... ⊗ u)` for a column count of `2^n`.
    pub fn apply_local_right(&mut self, u: &Mat2) {
        let n = self.cols.trailing_zeros() as usize;
        let cols = self.cols;
        for k in 1..=n {
            let mask = qubit_mask(k, n);
            for row in self.data.chunks_exact_mut(cols) {
                for c0 in (0..cols).filter(|c| c & mask == 0) {
                    let c1 = c0 | mask;
                    let a = row[c0];
                    let b = row[c1];
                    row[c0] = a * u[0][0] + b * u[1][0];
                    row[c1] = a * u[0][1] + b * u[1][1];
                }
            }
        }
    }

    /// `self <- diag(d) · self`.
    pub fn scale_rows(&mut self, d: &[C64]) {
        assert_eq!(d.len(), self.rows);
        for (row, &s) in self.data.chunks_exact_mut(self.cols).zip(d) {
            row.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// `self <- self · diag(d)`.
    pub fn scale_cols(&mut self, d: &[C64]) {
        assert_eq!(d.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols) {
            row.iter_mut().zip(d).for_each(|(x, &s)| *x *= s);
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// A square matrix known to be unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(Matrix);

impl Unitary {
    /// Validates `U†U = I` entrywise within [`UNITARY_TOL`].
    pub fn new(m: Matrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: Matrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(m.rows, m.cols));
        }
        if !m.rows.is_power_of_two() {
            return Err(Error::InvalidParameter(alloc::format!(
                "unitary dimension {} is not a power of two",
                m.rows
            )));
        }
        let err = m.unitarity_error();
        if err > tol {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by a construction that is unitary by design.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        debug_assert!(m.unitarity_error() < 1e-9);
        Self(m)
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self(Matrix::identity(1 << n_qubits))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn n_qubits(&self) -> usize {
        self.0.rows.trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · rhs`; applying `rhs` first.
    pub fn compose(&self, rhs: &Unitary) -> Self {
        Self(self.0.matmul(&rhs.0))
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), state.dim()));
        }
        Ok(StateVector(self.0.mul_vec(&state.0)))
    }
}

impl Deref for Unitary {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Complex amplitude vector over `2^n` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::InvalidParameter(alloc::format!(
                "state dimension {} is not a power of two",
                amplitudes.len()
            )));
        }
        Ok(Self(amplitudes))
    }

    /// Like [`StateVector::new`] but also requires unit norm within [`UNITARY_TOL`].
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let s = Self::new(amplitudes)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn basis(index: usize, n_qubits: usize) -> Self {
        let mut v = vec![ZERO; 1 << n_qubits];
        v[index] = ONE;
        Self(v)
    }

    /// Basis state from a bit string such as `"101"`; the first character is qubit 1.
    pub fn from_bits(bits: &str) -> Option<Self> {
        let n = bits.len();
        if n == 0 || n > 10 {
            return None;
        }
        let mut index = 0;
        for ch in bits.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return None,
                };
        }
        Some(Self::basis(index, n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|a| a.norm_sqr()).sum())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn overlap_fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.0 {
            out.extend(other.0.iter().map(|&b| a * b));
        }
        StateVector(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hadamard() -> Mat2 {
        let h = C64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }

    fn dense(u: &Mat2) -> Matrix {
        Matrix::from_rows(2, 2, alloc::vec![u[0][0], u[0][1], u[1][0], u[1][1]]).unwrap()
    }

    #[test]
    fn local_application_matches_kron() {
        let u: Mat2 = [
            [C64::new(0.3, 0.1), C64::new(-0.2, 0.7)],
            [C64::new(1.1, 0.0), C64::new(0.0, -0.4)],
        ];
        let full = dense(&u).kron(&dense(&u)).kron(&dense(&u));
        let m = Matrix::from_fn(8, 8, |i, j| {
            C64::new(i as f64 - 0.5 * j as f64, (i * j) as f64 * 0.1)
        });

        let mut left = m.clone();
        left.apply_local_left(&u);
        assert!(left.max_abs_diff(&full.matmul(&m)) < 1e-12);

        let mut right = m.clone();
        right.apply_local_right(&u);
        assert!(right.max_abs_diff(&m.matmul(&full)) < 1e-12);
    }

    #[test]
    fn rectangular_local_application() {
        let h = hadamard();
        let m = Matrix::from_fn(4, 3, |i, j| C64::new((i + j) as f64, 0.0));
        let mut left = m.clone();
        left.apply_local_left(&h);
        let full = dense(&h).kron(&dense(&h));
        assert!(left.max_abs_diff(&full.matmul(&m)) < 1e-12);
    }

    #[test]
    fn unitary_validation() {
        assert!(Unitary::new(dense(&hadamard())).is_ok());
        let bad = Matrix::from_diag(&[ONE, C64::new(2.0, 0.0)]);
        assert!(matches!(Unitary::new(bad), Err(Error::NotUnitary(_))));
        assert!(matches!(
            Unitary::new(Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn bit_string_states() {
        let s = StateVector::from_bits("10").unwrap();
        assert_eq!(s.amplitudes()[2], ONE);
        assert!(StateVector::from_bits("1x").is_none());
        assert!(StateVector::normalized(alloc::vec![ONE, ONE]).is_err());
    }
}
