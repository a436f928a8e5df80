//! Performance functions and their exact per-pulse derivatives.
//!
//! Both objectives read a handful of entries of `B · U · K`, where `K`
//! stacks input kets as columns and `B` stacks output bras as rows:
//!
//! * full unitary: `K = I`, `B = U_target†`, and `Φ = |Tr(B U)|² / 4^N`;
//! * QEC subspace: the kets are `E_m(|c_0⟩⊗|a⟩)` and `E_m(|c_1⟩⊗|a⟩)` for
//!   every error `E_m`, the bras are `⟨c_0, j|` and `⟨c_1, j|` for every
//!   ancilla basis state `j`, and `Φ = Re Σ_m ⟨ψ_{A,0}^(m)|ψ_{A,1}^(m)⟩`.
//!
//! Holding `U = L · U_m(θ) · R` fixed except for one pulse, each entry is a
//! trigonometric sum `Σ_j κ_j e^{-i r_j θ}` in the eigenframe of that
//! pulse's generator, so value, slope and curvature along `θ` are exact.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, StateVector, Unitary, C64, UNITARY_TOL, ZERO};
use crate::qops::phases;
use crate::sequence::{FrameCache, PulseSequence};

/// Smoothing width of the penalty slope at `θ = 0`.
pub const PENALTY_SMOOTHING: f64 = 1e-8;

/// Error-correction target: map every erred code word to the code word
/// times an ancilla state that does not depend on which code word it was.
#[derive(Debug, Clone, PartialEq)]
pub struct QecSubspace {
    code_states: [StateVector; 2],
    error_set: Vec<Matrix>,
    ancilla_init: StateVector,
}

impl QecSubspace {
    pub fn new(
        code_states: [StateVector; 2],
        error_set: Vec<Matrix>,
        ancilla_init: StateVector,
    ) -> Result<Self> {
        let dim = code_states[0].dim();
        if code_states[1].dim() != dim {
            return Err(Error::DimensionMismatch(dim, code_states[1].dim()));
        }
        for (i, s) in code_states.iter().enumerate() {
            if (s.norm() - 1.0).abs() > UNITARY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "code state {i} is not normalized"
                )));
            }
        }
        if code_states[0].inner(&code_states[1]).norm() > UNITARY_TOL {
            return Err(Error::InvalidParameter(
                "code states are not orthogonal".into(),
            ));
        }
        if (ancilla_init.norm() - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotNormalized(ancilla_init.norm()));
        }
        if error_set.is_empty() {
            return Err(Error::InvalidParameter("error set is empty".into()));
        }
        for e in &error_set {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch(dim, e.rows()));
            }
            let dev = e.unitarity_error();
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
        }
        crate::qops::check_qubits(code_states[0].n_qubits() + ancilla_init.n_qubits())?;
        Ok(Self {
            code_states,
            error_set,
            ancilla_init,
        })
    }

    pub fn code_states(&self) -> &[StateVector; 2] {
        &self.code_states
    }

    pub fn error_set(&self) -> &[Matrix] {
        &self.error_set
    }

    pub fn ancilla_init(&self) -> &StateVector {
        &self.ancilla_init
    }

    pub fn data_qubits(&self) -> usize {
        self.code_states[0].n_qubits()
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_init.n_qubits()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    FullUnitary { target: Unitary },
    QecSubspace(QecSubspace),
}

impl ObjectiveSpec {
    pub fn full_unitary(target: Unitary) -> Self {
        ObjectiveSpec::FullUnitary { target }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            ObjectiveSpec::FullUnitary { target } => target.n_qubits(),
            ObjectiveSpec::QecSubspace(q) => q.data_qubits() + q.ancilla_qubits(),
        }
    }

    /// Value attained by a perfect solution: 1, or the number of errors.
    pub fn max_value(&self) -> f64 {
        match self {
            ObjectiveSpec::FullUnitary { .. } => 1.0,
            ObjectiveSpec::QecSubspace(q) => q.error_set.len() as f64,
        }
    }

    fn check(&self, seq: &PulseSequence) -> Result<()> {
        if seq.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch(self.n_qubits(), seq.n_qubits()));
        }
        Ok(())
    }

    pub(crate) fn boundary(&self) -> Boundary {
        match self {
            ObjectiveSpec::FullUnitary { target } => {
                let dim = target.dim();
                Boundary {
                    kets: Matrix::identity(dim),
                    bras: target.adjoint().into_matrix(),
                    readout: Readout::Trace {
                        entries: (0..dim).map(|i| (i, i)).collect(),
                        dim,
                    },
                }
            }
            ObjectiveSpec::QecSubspace(q) => {
                let k = q.error_set.len();
                let da = q.ancilla_init.dim();
                let dim = q.code_states[0].dim() * da;
                let mut kets = Matrix::zeros(dim, 2 * k);
                for (half, code) in q.code_states.iter().enumerate() {
                    for (m, e) in q.error_set.iter().enumerate() {
                        let erred = StateVector::new(e.mul_vec(code.amplitudes()))
                            .expect("power-of-two dim");
                        let ket = erred.tensor(&q.ancilla_init);
                        for (i, &a) in ket.amplitudes().iter().enumerate() {
                            kets[(i, half * k + m)] = a;
                        }
                    }
                }
                let mut bras = Matrix::zeros(2 * da, dim);
                for (half, code) in q.code_states.iter().enumerate() {
                    for j in 0..da {
                        for (d, &c) in code.amplitudes().iter().enumerate() {
                            bras[(half * da + j, d * da + j)] = c.conj();
                        }
                    }
                }
                let mut entries = Vec::with_capacity(2 * k * da);
                for m in 0..k {
                    for j in 0..da {
                        entries.push((j, m));
                        entries.push((da + j, k + m));
                    }
                }
                Boundary {
                    kets,
                    bras,
                    readout: Readout::Overlap { entries },
                }
            }
        }
    }
}

/// The entries of `B · U · K` an objective reads, and how it combines them.
#[derive(Debug, Clone)]
pub(crate) enum Readout {
    /// `|Σ entries|² / dim²`.
    Trace {
        entries: Vec<(usize, usize)>,
        dim: usize,
    },
    /// `Re Σ conj(f) g` over consecutive `(f, g)` entry pairs.
    Overlap { entries: Vec<(usize, usize)> },
}

impl Readout {
    pub(crate) fn entries(&self) -> &[(usize, usize)] {
        match self {
            Readout::Trace { entries, .. } | Readout::Overlap { entries } => entries,
        }
    }

    fn value(&self, o: &[C64]) -> f64 {
        match self {
            Readout::Trace { dim, .. } => {
                let t: C64 = o.iter().sum();
                t.norm_sqr() / (*dim as f64 * *dim as f64)
            }
            Readout::Overlap { .. } => o.chunks_exact(2).map(|p| (p[0].conj() * p[1]).re).sum(),
        }
    }

    /// `(Φ, Φ', Φ'')` from entry values and their first two derivatives.
    fn jet(&self, o: &[C64], d1: &[C64], d2: &[C64]) -> (f64, f64, f64) {
        match self {
            Readout::Trace { dim, .. } => {
                let norm = *dim as f64 * *dim as f64;
                let t: C64 = o.iter().sum();
                let t1: C64 = d1.iter().sum();
                let t2: C64 = d2.iter().sum();
                (
                    t.norm_sqr() / norm,
                    2.0 * (t1 * t.conj()).re / norm,
                    2.0 * (t1.norm_sqr() + (t2 * t.conj()).re) / norm,
                )
            }
            Readout::Overlap { .. } => {
                let mut v = (0.0, 0.0, 0.0);
                for i in (0..o.len()).step_by(2) {
                    let (f, g) = (o[i], o[i + 1]);
                    let (f1, g1) = (d1[i], d1[i + 1]);
                    let (f2, g2) = (d2[i], d2[i + 1]);
                    v.0 += (f.conj() * g).re;
                    v.1 += (f1.conj() * g + f.conj() * g1).re;
                    v.2 += (f2.conj() * g + 2.0 * f1.conj() * g1 + f.conj() * g2).re;
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Boundary {
    pub kets: Matrix,
    pub bras: Matrix,
    pub readout: Readout,
}

impl Boundary {
    /// Objective value of a fully propagated ket block `U · K`.
    fn value_of_propagated(&self, propagated: &Matrix) -> f64 {
        let o: Vec<C64> = self
            .readout
            .entries()
            .iter()
            .map(|&(r, c)| {
                self.bras
                    .row(r)
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| b * propagated[(j, c)])
                    .sum()
            })
            .collect();
        self.readout.value(&o)
    }
}

/// Objective value of an explicit unitary.
pub fn value_of_unitary(spec: &ObjectiveSpec, u: &Unitary) -> Result<f64> {
    if u.n_qubits() != spec.n_qubits() {
        return Err(Error::DimensionMismatch(spec.n_qubits(), u.n_qubits()));
    }
    let b = spec.boundary();
    Ok(b.value_of_propagated(&u.matmul(&b.kets)))
}

/// `Φ_norm ∈ [0, 1]` for a full target, `Φ_qec ∈ [-K, K]` for a QEC spec.
pub fn value(spec: &ObjectiveSpec, seq: &PulseSequence) -> Result<f64> {
    spec.check(seq)?;
    let frames = FrameCache::new(seq.n_qubits())?;
    let b = spec.boundary();
    let mut propagated = b.kets.clone();
    for p in seq.pulses() {
        frames
            .frame(p.generator)
            .apply_left(p.angle, &mut propagated);
    }
    Ok(b.value_of_propagated(&propagated))
}

/// `value / max_value`, so 1 means a perfect solution for either variant.
pub fn normalized_value(spec: &ObjectiveSpec, seq: &PulseSequence) -> Result<f64> {
    Ok(value(spec, seq)? / spec.max_value())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "penalty exponent {gamma} outside (0, 1)"
        )))
    }
}

/// `Φ_p = Σ |θ_m|^γ`.
pub fn penalty(seq: &PulseSequence, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(seq.angles().map(|a| libm::pow(libm::fabs(a), gamma)).sum())
}

/// `Φ - α Φ_p`.
pub fn penalized_value(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    gamma: f64,
    alpha: f64,
) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "penalty weight {alpha} is negative"
        )));
    }
    Ok(value(spec, seq)? - alpha * penalty(seq, gamma)?)
}

/// Slope and curvature of `|θ|^γ`, smoothed over [`PENALTY_SMOOTHING`]:
/// `sign(θ) γ (θ² + ε²)^((γ-1)/2)` and its derivative.
pub fn penalty_derivatives(theta: f64, gamma: f64) -> (f64, f64) {
    let s = theta * theta + PENALTY_SMOOTHING * PENALTY_SMOOTHING;
    let sign = if theta > 0.0 {
        1.0
    } else if theta < 0.0 {
        -1.0
    } else {
        0.0
    };
    let d1 = sign * gamma * libm::pow(s, (gamma - 1.0) / 2.0);
    let d2 = gamma * (gamma - 1.0) * libm::fabs(theta) * libm::pow(s, (gamma - 3.0) / 2.0);
    (d1, d2)
}

/// The objective restricted to one pulse angle, all other pulses fixed.
#[derive(Debug, Clone)]
pub struct CoordinateProfile {
    readout: Readout,
    rates: Vec<f64>,
    /// One coefficient vector per readout entry.
    coefficients: Vec<Vec<C64>>,
}

impl CoordinateProfile {
    /// `(Φ, dΦ/dθ, d²Φ/dθ²)` at angle `theta` of the profiled pulse.
    pub fn jet(&self, theta: f64) -> (f64, f64, f64) {
        let ph = phases(&self.rates, theta);
        let n = self.coefficients.len();
        let (mut o, mut d1, mut d2) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for kappa in &self.coefficients {
            let (mut v, mut v1, mut v2) = (ZERO, ZERO, ZERO);
            for ((&k, &p), &r) in kappa.iter().zip(&ph).zip(&self.rates) {
                let t = k * p;
                v += t;
                v1 += C64::new(0.0, -r) * t;
                v2 += t * (-r * r);
            }
            o.push(v);
            d1.push(v1);
            d2.push(v2);
        }
        self.readout.jet(&o, &d1, &d2)
    }

    pub fn value(&self, theta: f64) -> f64 {
        let ph = phases(&self.rates, theta);
        let o: Vec<C64> = self
            .coefficients
            .iter()
            .map(|kappa| kappa.iter().zip(&ph).map(|(&k, &p)| k * p).sum())
            .collect();
        self.readout.value(&o)
    }
}

/// Forward and backward partial products of a sequence against an
/// objective's boundary vectors.
///
/// `forward[m] = U_m ··· U_1 · K` and `backward[m] = B · U_M ··· U_{m+1}`
/// for `m = 0..=M`; for a full target `forward[M]` is the compiled unitary
/// and `backward[m] = U_target† U_M ··· U_{m+1}`.
#[derive(Debug, Clone)]
pub struct PropagatorCache {
    seq: PulseSequence,
    frames: FrameCache,
    boundary: Boundary,
    forward: Vec<Matrix>,
    backward: Vec<Matrix>,
}

/// Builds all partial products with `2M` pulse applications.
pub fn build_cache(spec: &ObjectiveSpec, seq: &PulseSequence) -> Result<PropagatorCache> {
    spec.check(seq)?;
    let frames = FrameCache::new(seq.n_qubits())?;
    let mut cache = PropagatorCache {
        seq: seq.clone(),
        frames,
        boundary: spec.boundary(),
        forward: Vec::new(),
        backward: Vec::new(),
    };
    cache.rebuild();
    Ok(cache)
}

/// Cache with only `forward[0]` and the backward list filled, for a sweep
/// that refreshes `forward[m + 1]` as it goes.
pub(crate) fn build_sweep_cache(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
) -> Result<PropagatorCache> {
    spec.check(seq)?;
    let boundary = spec.boundary();
    let mut forward = alloc::vec![Matrix::zeros(0, 0); seq.len() + 1];
    forward[0] = boundary.kets.clone();
    let mut cache = PropagatorCache {
        seq: seq.clone(),
        frames: FrameCache::new(seq.n_qubits())?,
        boundary,
        forward,
        backward: Vec::new(),
    };
    cache.rebuild_backward();
    Ok(cache)
}

impl PropagatorCache {
    pub(crate) fn rebuild(&mut self) {
        let pulses = self.seq.pulses();
        let mut forward = Vec::with_capacity(pulses.len() + 1);
        let mut cur = self.boundary.kets.clone();
        forward.push(cur.clone());
        for p in pulses {
            self.frames.frame(p.generator).apply_left(p.angle, &mut cur);
            forward.push(cur.clone());
        }
        self.forward = forward;
        self.rebuild_backward();
    }

    pub(crate) fn rebuild_backward(&mut self) {
        let pulses = self.seq.pulses();
        let mut backward = alloc::vec![Matrix::zeros(0, 0); pulses.len() + 1];
        let mut cur = self.boundary.bras.clone();
        backward[pulses.len()] = cur.clone();
        for (m, p) in pulses.iter().enumerate().rev() {
            self.frames
                .frame(p.generator)
                .apply_right(p.angle, &mut cur);
            backward[m] = cur.clone();
        }
        self.backward = backward;
    }

    pub fn sequence(&self) -> &PulseSequence {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// `U_m ··· U_1 · K` for `m = 0..=M`.
    pub fn forward(&self) -> &[Matrix] {
        &self.forward
    }

    /// `B · U_M ··· U_{m+1}` for `m = 0..=M`.
    pub fn backward(&self) -> &[Matrix] {
        &self.backward
    }

    /// Objective value from the final forward product.
    pub fn value(&self) -> f64 {
        self.boundary
            .value_of_propagated(&self.forward[self.seq.len()])
    }

    /// Profile of pulse `m` (0-based); needs `forward[m]` and `backward[m + 1]`.
    pub fn profile(&self, m: usize) -> Result<CoordinateProfile> {
        if m >= self.seq.len() {
            return Err(Error::PulseIndex {
                index: m,
                len: self.seq.len(),
            });
        }
        let frame = self.frames.frame(self.seq.pulses()[m].generator);
        let mut left = self.backward[m + 1].clone();
        frame.to_frame_right(&mut left);
        let mut right = self.forward[m].clone();
        frame.to_frame_left(&mut right);
        // Terms sharing an eigenvalue share a phase, so sum them up front.
        let groups = frame.distinct_rates.len();
        let coefficients = self
            .boundary
            .readout
            .entries()
            .iter()
            .map(|&(r, c)| {
                let mut kappa = alloc::vec![ZERO; groups];
                for (j, &g) in frame.rate_index.iter().enumerate() {
                    kappa[g] += left[(r, j)] * right[(j, c)];
                }
                kappa
            })
            .collect();
        Ok(CoordinateProfile {
            readout: self.boundary.readout.clone(),
            rates: frame.distinct_rates.clone(),
            coefficients,
        })
    }

    /// `dΦ/dθ_m` for every pulse.
    pub fn gradient(&self) -> Vec<f64> {
        (0..self.seq.len())
            .map(|m| {
                let profile = self.profile(m).expect("index in range");
                profile.jet(self.seq.pulses()[m].angle).1
            })
            .collect()
    }

    /// Exact `(dΦ/dθ_m, d²Φ/dθ_m²)` of the unpenalized objective.
    pub fn pulse_derivatives(&self, m: usize) -> Result<(f64, f64)> {
        let profile = self.profile(m)?;
        let (_, d1, d2) = profile.jet(self.seq.pulses()[m].angle);
        Ok((d1, d2))
    }

    /// Sets pulse `m` to `angle` and refreshes `forward[m + 1]` only; the
    /// rest of the forward list and `backward[..=m]` become stale.
    pub(crate) fn set_angle_forward(&mut self, m: usize, angle: f64) {
        self.seq.set_angle(m, angle);
        let mut next = self.forward[m].clone();
        self.frames
            .frame(self.seq.pulses()[m].generator)
            .apply_left(angle, &mut next);
        self.forward[m + 1] = next;
    }

    pub(crate) fn into_sequence(self) -> PulseSequence {
        self.seq
    }
}

/// Exact `(dΦ/dθ_m, d²Φ/dθ_m²)` for pulse `m` (0-based).
pub fn pulse_derivatives(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    m: usize,
) -> Result<(f64, f64)> {
    build_cache(spec, seq)?.pulse_derivatives(m)
}
