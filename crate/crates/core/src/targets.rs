//! Target operations, the bit-flip QEC specification and its round
//! simulator, and gate-level pulse constructions.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, StateVector, Unitary, C64, I, ONE};
use crate::objective::{ObjectiveSpec, QecSubspace};
use crate::qops::{check_qubit, check_qubits, pauli_string_operator, Axis, Generator, PauliTerm};
use crate::sequence::{build_spin_echo_x, Pulse, PulseSequence};

fn distinct(indices: &[usize], n_qubits: usize) -> Result<()> {
    check_qubits(n_qubits)?;
    for (i, &a) in indices.iter().enumerate() {
        check_qubit(a, n_qubits)?;
        if indices[..i].contains(&a) {
            return Err(Error::InvalidParameter(format!("qubit {a} used twice")));
        }
    }
    Ok(())
}

fn pauli_unitary(terms: &[PauliTerm], n_qubits: usize) -> Result<Unitary> {
    Unitary::new(pauli_string_operator(terms, n_qubits)?)
}

/// `(I + σ_z^(c) + σ_x^(t) - σ_z^(c) σ_x^(t)) / 2`.
pub fn cnot(control: usize, target: usize, n_qubits: usize) -> Result<Unitary> {
    distinct(&[control, target], n_qubits)?;
    pauli_unitary(
        &[
            PauliTerm::new(0.5, &[]),
            PauliTerm::new(0.5, &[(control, Axis::Z)]),
            PauliTerm::new(0.5, &[(target, Axis::X)]),
            PauliTerm::new(-0.5, &[(control, Axis::Z), (target, Axis::X)]),
        ],
        n_qubits,
    )
}

/// Qubit 1 controlling NOTs on qubits 2 and 3:
/// `(I + σ_z^(1) + σ_x^(2)σ_x^(3) - σ_z^(1)σ_x^(2)σ_x^(3)) / 2`.
pub fn double_cnot(n_qubits: usize) -> Result<Unitary> {
    distinct(&[1, 2, 3], n_qubits)?;
    pauli_unitary(
        &[
            PauliTerm::new(0.5, &[]),
            PauliTerm::new(0.5, &[(1, Axis::Z)]),
            PauliTerm::new(0.5, &[(2, Axis::X), (3, Axis::X)]),
            PauliTerm::new(-0.5, &[(1, Axis::Z), (2, Axis::X), (3, Axis::X)]),
        ],
        n_qubits,
    )
}

/// Doubly controlled NOT:
/// `(3I + σ_x^(t) + (σ_z^(a) + σ_z^(b) - σ_z^(a)σ_z^(b))(I - σ_x^(t))) / 4`.
pub fn toffoli(
    control_a: usize,
    control_b: usize,
    target: usize,
    n_qubits: usize,
) -> Result<Unitary> {
    distinct(&[control_a, control_b, target], n_qubits)?;
    let (a, b, t) = (control_a, control_b, target);
    pauli_unitary(
        &[
            PauliTerm::new(0.75, &[]),
            PauliTerm::new(0.25, &[(t, Axis::X)]),
            PauliTerm::new(0.25, &[(a, Axis::Z)]),
            PauliTerm::new(0.25, &[(b, Axis::Z)]),
            PauliTerm::new(-0.25, &[(a, Axis::Z), (b, Axis::Z)]),
            PauliTerm::new(-0.25, &[(a, Axis::Z), (t, Axis::X)]),
            PauliTerm::new(-0.25, &[(b, Axis::Z), (t, Axis::X)]),
            PauliTerm::new(0.25, &[(a, Axis::Z), (b, Axis::Z), (t, Axis::X)]),
        ],
        n_qubits,
    )
}

/// `exp(-i θ Σ_pairs σ_x^(a) σ_x^(b))` over disjoint pairs.
pub fn xx_pairs(pairs: &[(usize, usize)], theta: f64, n_qubits: usize) -> Result<Unitary> {
    let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    distinct(&flat, n_qubits)?;
    let (s, c) = libm::sincos(theta);
    let mut u = Matrix::identity(1 << n_qubits);
    // The pair terms commute, and each exponential is cos θ I - i sin θ σσ.
    for &(a, b) in pairs {
        let factor = pauli_string_operator(
            &[
                PauliTerm::new(c, &[]),
                PauliTerm::new(-I * s, &[(a, Axis::X), (b, Axis::X)]),
            ],
            n_qubits,
        )?;
        u = factor.matmul(&u);
    }
    Unitary::new(u)
}

/// Bell-basis mapper `exp(-iπ/4 Σ_m σ_x^(2m-1) σ_x^(2m))` for even `n`.
pub fn bell_map(n_qubits: usize) -> Result<Unitary> {
    if !n_qubits.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "bell map needs an even qubit count, got {n_qubits}"
        )));
    }
    let pairs: Vec<_> = (1..=n_qubits / 2).map(|m| (2 * m - 1, 2 * m)).collect();
    xx_pairs(&pairs, FRAC_PI_4, n_qubits)
}

/// The offset mapper `exp(-iπ/4 Σ σ_x^(2m) σ_x^(2m+1))` on pairs (2,3), (4,5), ...
pub fn bell_map_shifted(n_qubits: usize) -> Result<Unitary> {
    check_qubits(n_qubits)?;
    let pairs: Vec<_> = (1..=(n_qubits - 1) / 2)
        .map(|m| (2 * m, 2 * m + 1))
        .collect();
    xx_pairs(&pairs, FRAC_PI_4, n_qubits)
}

pub const QEC_DATA_QUBITS: usize = 3;
pub const QEC_ANCILLA_QUBITS: usize = 2;

/// Three-qubit bit-flip code with two syndrome ancillas: data qubits 1-3,
/// ancillas 4-5, code words `|000⟩`, `|111⟩`, errors `{I, σ_x^(1), σ_x^(2), σ_x^(3)}`.
pub fn qec_spec() -> ObjectiveSpec {
    let d = QEC_DATA_QUBITS;
    let errors = (0..=d)
        .map(|m| {
            let terms = if m == 0 {
                vec![PauliTerm::new(ONE, &[])]
            } else {
                vec![PauliTerm::new(ONE, &[(m, Axis::X)])]
            };
            pauli_string_operator(&terms, d).expect("in range")
        })
        .collect();
    let code = [
        StateVector::basis(0, d),
        StateVector::basis((1 << d) - 1, d),
    ];
    let ancilla = StateVector::basis(0, QEC_ANCILLA_QUBITS);
    ObjectiveSpec::QecSubspace(
        QecSubspace::new(code, errors, ancilla).expect("valid bit-flip code"),
    )
}

/// Syndrome extraction and coherent correction as a circuit: parity of
/// qubits (1,2) into ancilla 4, parity of (2,3) into ancilla 5, then the
/// ancilla-controlled flips that undo each single error.
pub fn qec_circuit_unitary() -> Unitary {
    let n = QEC_DATA_QUBITS + QEC_ANCILLA_QUBITS;
    qec_circuit_gates()
        .iter()
        .fold(Unitary::identity(n), |u, g| {
            g.unitary(n).expect("valid gate").compose(&u)
        })
}

/// Gate list of [`qec_circuit_unitary`], in application order.
pub fn qec_circuit_gates() -> Vec<Gate> {
    vec![
        Gate::Cnot(1, 4),
        Gate::Cnot(2, 4),
        Gate::Cnot(2, 5),
        Gate::Cnot(3, 5),
        Gate::Cnot(4, 1),
        Gate::Toffoli(4, 5, 1),
        Gate::Cnot(5, 3),
        Gate::Toffoli(4, 5, 3),
        Gate::Toffoli(4, 5, 2),
    ]
}

/// Result of one simulated correction round.
#[derive(Debug, Clone, PartialEq)]
pub struct QecRound {
    /// Data-qubit state after measuring and resetting the ancillas.
    pub data: StateVector,
    /// Observed ancilla basis state; bit 1 is ancilla 4.
    pub syndrome: usize,
}

/// Encodes `α|000⟩ + β|111⟩`, applies error `error_index` (0 for none) and
/// one correction round.
pub fn simulate_qec_round<R: Rng + ?Sized>(
    correction: &Unitary,
    logical: (C64, C64),
    error_index: usize,
    rng: &mut R,
) -> Result<QecRound> {
    let (alpha, beta) = logical;
    let norm = libm::sqrt(alpha.norm_sqr() + beta.norm_sqr());
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(norm));
    }
    qec_round(correction, &encode_logical(alpha, beta), error_index, rng)
}

pub fn encode_logical(alpha: C64, beta: C64) -> StateVector {
    let d = QEC_DATA_QUBITS;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << d];
    amps[0] = alpha;
    amps[(1 << d) - 1] = beta;
    StateVector::new(amps).expect("power of two")
}

/// One round on an arbitrary data state: flip data qubit `error_index`
/// (0 for none), attach fresh ancillas, apply `correction`, measure the
/// ancillas in the computational basis and discard them.
pub fn qec_round<R: Rng + ?Sized>(
    correction: &Unitary,
    data: &StateVector,
    error_index: usize,
    rng: &mut R,
) -> Result<QecRound> {
    let (nd, na) = (QEC_DATA_QUBITS, QEC_ANCILLA_QUBITS);
    if correction.n_qubits() != nd + na {
        return Err(Error::DimensionMismatch(nd + na, correction.n_qubits()));
    }
    if data.n_qubits() != nd {
        return Err(Error::DimensionMismatch(nd, data.n_qubits()));
    }
    if error_index > nd {
        return Err(Error::QubitOutOfRange {
            index: error_index,
            n_qubits: nd,
        });
    }
    let mut amps = data.amplitudes().to_vec();
    if error_index > 0 {
        let mask = 1 << (nd - error_index);
        amps = (0..amps.len()).map(|i| amps[i ^ mask]).collect();
    }
    let erred = StateVector::new(amps)?;
    let full = correction.apply(&erred.tensor(&StateVector::basis(0, na)))?;
    let da = 1usize << na;
    let probs: Vec<f64> = (0..da)
        .map(|s| {
            (0..1usize << nd)
                .map(|d| full.amplitudes()[d * da + s].norm_sqr())
                .sum()
        })
        .collect();
    let total: f64 = probs.iter().sum();
    let draw = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut syndrome = da - 1;
    for (s, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc && p > 0.0 {
            syndrome = s;
            break;
        }
    }
    let scale = 1.0 / libm::sqrt(probs[syndrome]);
    let post = (0..1usize << nd)
        .map(|d| full.amplitudes()[d * da + syndrome] * scale)
        .collect();
    Ok(QecRound {
        data: StateVector::new(post)?,
        syndrome,
    })
}

/// Named targets accepted wherever a target is given as text, e.g.
/// `cnot:1,2`, `toffoli`, `bell-map` or `qec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamedTarget {
    Identity,
    Cnot {
        control: usize,
        target: usize,
    },
    DoubleCnot,
    Toffoli {
        controls: (usize, usize),
        target: usize,
    },
    BellMap,
    BellMapShifted,
    Qec,
}

impl NamedTarget {
    /// Every target family with its argument syntax.
    pub const CATALOG: &'static [(&'static str, &'static str)] = &[
        ("identity", "identity on any register"),
        ("cnot:C,T", "CNOT with control C and target T"),
        ("double-cnot", "qubit 1 controlling NOTs on qubits 2 and 3"),
        (
            "toffoli[:A,B,T]",
            "doubly controlled NOT, default controls 1,2 and target 3",
        ),
        (
            "bell-map",
            "Bell-basis mapper on pairs (1,2), (3,4), ...; even qubit counts",
        ),
        (
            "bell-map-shifted",
            "the same mapper on pairs (2,3), (4,5), ...",
        ),
        (
            "qec",
            "bit-flip correction subspace spec on 5 qubits (3 data, 2 ancillas)",
        ),
    ];

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (text, None),
        };
        let numbers = |want: usize| -> Result<Vec<usize>> {
            let args = args.ok_or_else(|| {
                Error::InvalidParameter(format!("target '{name}' needs {want} qubit indices"))
            })?;
            let v = args
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<core::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidParameter(format!("malformed qubit list '{args}'")))?;
            if v.len() != want {
                return Err(Error::InvalidParameter(format!(
                    "target '{name}' needs {want} qubit indices"
                )));
            }
            Ok(v)
        };
        let no_args = |t: NamedTarget| match args {
            None => Ok(t),
            Some(_) => Err(Error::InvalidParameter(format!(
                "target '{name}' takes no arguments"
            ))),
        };
        match name {
            "identity" => no_args(NamedTarget::Identity),
            "cnot" => {
                let v = numbers(2)?;
                Ok(NamedTarget::Cnot {
                    control: v[0],
                    target: v[1],
                })
            }
            "double-cnot" => no_args(NamedTarget::DoubleCnot),
            "toffoli" if args.is_none() => Ok(NamedTarget::Toffoli {
                controls: (1, 2),
                target: 3,
            }),
            "toffoli" => {
                let v = numbers(3)?;
                Ok(NamedTarget::Toffoli {
                    controls: (v[0], v[1]),
                    target: v[2],
                })
            }
            "bell-map" => no_args(NamedTarget::BellMap),
            "bell-map-shifted" => no_args(NamedTarget::BellMapShifted),
            "qec" => no_args(NamedTarget::Qec),
            _ => Err(Error::InvalidParameter(format!("unknown target '{text}'"))),
        }
    }

    pub fn build(&self, n_qubits: usize) -> Result<ObjectiveSpec> {
        let full = |u: Result<Unitary>| u.map(ObjectiveSpec::full_unitary);
        match *self {
            NamedTarget::Identity => {
                check_qubits(n_qubits)?;
                Ok(ObjectiveSpec::full_unitary(Unitary::identity(n_qubits)))
            }
            NamedTarget::Cnot { control, target } => full(cnot(control, target, n_qubits)),
            NamedTarget::DoubleCnot => full(double_cnot(n_qubits)),
            NamedTarget::Toffoli { controls, target } => {
                full(toffoli(controls.0, controls.1, target, n_qubits))
            }
            NamedTarget::BellMap => full(bell_map(n_qubits)),
            NamedTarget::BellMapShifted => full(bell_map_shifted(n_qubits)),
            NamedTarget::Qec => {
                let n = QEC_DATA_QUBITS + QEC_ANCILLA_QUBITS;
                if n_qubits != n {
                    return Err(Error::DimensionMismatch(n, n_qubits));
                }
                Ok(qec_spec())
            }
        }
    }
}

impl fmt::Display for NamedTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedTarget::Identity => f.write_str("identity"),
            NamedTarget::Cnot { control, target } => write!(f, "cnot:{control},{target}"),
            NamedTarget::DoubleCnot => f.write_str("double-cnot"),
            NamedTarget::Toffoli { controls, target } => {
                write!(f, "toffoli:{},{},{target}", controls.0, controls.1)
            }
            NamedTarget::BellMap => f.write_str("bell-map"),
            NamedTarget::BellMapShifted => f.write_str("bell-map-shifted"),
            NamedTarget::Qec => f.write_str("qec"),
        }
    }
}

/// Gates with pulse-level constructions, used to turn circuits into
/// starting sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rz(usize, f64),
    Rx(usize, f64),
    H(usize),
    Cnot(usize, usize),
    Toffoli(usize, usize, usize),
}

const CNOT_3Q: &str = "[pi/2]_X - [pi/2]_Z1 - [pi/4]_XX - [pi/4]_X - [pi]_Z3 - [pi/4]_X - \
                       [pi/4]_XX - [pi/2]_Z1 - [pi/2]_X - [pi]_Z3";
const CNOT_NQ: &str = "[pi/2]_X - [-pi/2]_Z1 - [-pi/8]_XX - [pi]_Z2 - [pi/8]_XX - \
                       [pi/4]_X - [pi]_Z1 - [-pi/8]_XX - [pi]_Z2 - [pi/8]_XX - \
                       [-pi/4]_X - [-pi/2]_Z1 - [-pi/2]_X";

impl Gate {
    /// Exact unitary of the gate.
    pub fn unitary(&self, n_qubits: usize) -> Result<Unitary> {
        match *self {
            Gate::Rz(k, theta) => crate::qops::pulse_unitary(Generator::Z(k), theta, n_qubits),
            Gate::Rx(k, theta) => {
                check_qubit(k, n_qubits)?;
                let (s, c) = libm::sincos(theta / 2.0);
                pauli_unitary(
                    &[
                        PauliTerm::new(c, &[]),
                        PauliTerm::new(-I * s, &[(k, Axis::X)]),
                    ],
                    n_qubits,
                )
            }
            Gate::H(k) => {
                check_qubit(k, n_qubits)?;
                pauli_unitary(
                    &[
                        PauliTerm::new(FRAC_1_SQRT_2, &[(k, Axis::X)]),
                        PauliTerm::new(FRAC_1_SQRT_2, &[(k, Axis::Z)]),
                    ],
                    n_qubits,
                )
            }
            Gate::Cnot(c, t) => cnot(c, t, n_qubits),
            Gate::Toffoli(a, b, t) => toffoli(a, b, t, n_qubits),
        }
    }

    /// Pulse sequence equal to [`Gate::unitary`] up to global phase.
    ///
    /// CNOT reuses the golden three-qubit sequence for `n = 3` and the
    /// spectator-free sequence for `n ≥ 4`, relabeled onto `(c, t)`; the
    /// Toffoli is the standard six-CNOT circuit.
    pub fn pulses(&self, n_qubits: usize) -> Result<PulseSequence> {
        match *self {
            Gate::Rz(k, theta) => {
                PulseSequence::new(n_qubits, vec![Pulse::new(Generator::Z(k), theta)])
            }
            Gate::Rx(k, theta) => build_spin_echo_x(k, theta, n_qubits),
            Gate::H(k) => {
                let rz = Gate::Rz(k, FRAC_PI_2).pulses(n_qubits)?;
                rz.then(&build_spin_echo_x(k, FRAC_PI_2, n_qubits)?)?
                    .then(&rz)
            }
            Gate::Cnot(c, t) => {
                distinct(&[c, t], n_qubits)?;
                match n_qubits {
                    3 => {
                        let spectator = (1..=3).find(|q| *q != c && *q != t).expect("three qubits");
                        let base = crate::sequence::parse_sequence(CNOT_3Q, 3)?;
                        base.relabeled(3, |k| [c, t, spectator][k - 1])
                    }
                    n if n >= 4 => {
                        let base = crate::sequence::parse_sequence(CNOT_NQ, 4)?;
                        base.relabeled(n, |k| if k == 1 { c } else { t })
                    }
                    _ => Err(Error::InvalidParameter(
                        "pulse-level CNOT needs at least 3 qubits".to_string(),
                    )),
                }
            }
            Gate::Toffoli(a, b, t) => {
                distinct(&[a, b, t], n_qubits)?;
                let quarter = FRAC_PI_4;
                let gates = [
                    Gate::H(t),
                    Gate::Cnot(b, t),
                    Gate::Rz(t, -quarter),
                    Gate::Cnot(a, t),
                    Gate::Rz(t, quarter),
                    Gate::Cnot(b, t),
                    Gate::Rz(t, -quarter),
                    Gate::Cnot(a, t),
                    Gate::Rz(b, quarter),
                    Gate::Rz(t, quarter),
                    Gate::H(t),
                    Gate::Cnot(a, b),
                    Gate::Rz(a, quarter),
                    Gate::Rz(b, -quarter),
                    Gate::Cnot(a, b),
                ];
                circuit_pulses(&gates, n_qubits)
            }
        }
    }
}

/// Concatenated pulse constructions of `gates`, first gate first.
pub fn circuit_pulses(gates: &[Gate], n_qubits: usize) -> Result<PulseSequence> {
    gates
        .iter()
        .try_fold(PulseSequence::empty(n_qubits)?, |acc, g| {
            acc.then(&g.pulses(n_qubits)?)
        })
}

/// Pulse-level version of [`qec_circuit_unitary`], built from the CNOT and
/// Toffoli constructions; a valid but long starting point for the search.
pub fn qec_circuit_pulses() -> PulseSequence {
    circuit_pulses(&qec_circuit_gates(), QEC_DATA_QUBITS + QEC_ANCILLA_QUBITS)
        .expect("valid circuit")
}
