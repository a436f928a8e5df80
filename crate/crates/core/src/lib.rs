#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod golden;
pub mod keyvalue;
pub mod matrix;
pub mod objective;
pub mod optimizer;
pub mod qops;
pub mod sequence;
pub mod targets;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use matrix::{Matrix, StateVector, Unitary, C64};
pub use objective::{
    build_cache, normalized_value, penalized_value, penalty, pulse_derivatives, value,
    value_of_unitary, ObjectiveSpec, PropagatorCache, QecSubspace,
};
pub use qops::{
    fidelity, generator_matrix, pauli_string_operator, pulse_unitary, Axis, Generator, PauliTerm,
};
pub use sequence::{
    build_refocused_ms, build_spin_echo_x, canonicalize, compile, format_sequence, parse_sequence,
    Pulse, PulseSequence,
};
