//! Pulse sequences: data model, text format, compilation and the spin-echo
//! constructions.
//!
//! Text form: `[pi/2]_X - [pi/2]_Z1 - [pi/4]_XX`. Pulses are listed in the
//! order they are applied, so the compiled unitary is `U_M ··· U_2 U_1`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::matrix::{Matrix, Unitary};
use crate::qops::{check_qubit, check_qubits, Eigenframe, Generator};

/// One application of `exp(-i c θ H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub generator: Generator,
    pub angle: f64,
}

impl Pulse {
    pub fn new(generator: Generator, angle: f64) -> Self {
        Self { generator, angle }
    }
}

impl fmt::Display for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", format_angle(self.angle), self.generator)
    }
}

/// Ordered pulses on a fixed register; the first pulse acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    n_qubits: usize,
    pulses: Vec<Pulse>,
}

impl PulseSequence {
    pub fn empty(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        Ok(Self {
            n_qubits,
            pulses: Vec::new(),
        })
    }

    pub fn new(n_qubits: usize, pulses: Vec<Pulse>) -> Result<Self> {
        check_qubits(n_qubits)?;
        for p in &pulses {
            p.generator.validate(n_qubits)?;
            if !p.angle.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite angle in pulse {p:?}"
                )));
            }
        }
        Ok(Self { n_qubits, pulses })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.pulses.iter().map(|p| p.angle)
    }

    pub(crate) fn set_angle(&mut self, index: usize, angle: f64) {
        self.pulses[index].angle = angle;
    }

    pub fn with_angle(mut self, index: usize, angle: f64) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::PulseIndex {
                index,
                len: self.len(),
            });
        }
        if !angle.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite angle {angle}")));
        }
        self.pulses[index].angle = angle;
        Ok(self)
    }

    pub fn insert(&mut self, index: usize, pulse: Pulse) -> Result<()> {
        pulse.generator.validate(self.n_qubits)?;
        if index > self.len() {
            return Err(Error::PulseIndex {
                index,
                len: self.len(),
            });
        }
        self.pulses.insert(index, pulse);
        Ok(())
    }

    /// This sequence followed by `next`.
    pub fn then(&self, next: &PulseSequence) -> Result<Self> {
        if next.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(self.n_qubits, next.n_qubits));
        }
        let mut pulses = self.pulses.clone();
        pulses.extend_from_slice(&next.pulses);
        Ok(Self {
            n_qubits: self.n_qubits,
            pulses,
        })
    }

    pub fn repeated(&self, times: usize) -> Self {
        let mut pulses = Vec::with_capacity(self.len() * times);
        for _ in 0..times {
            pulses.extend_from_slice(&self.pulses);
        }
        Self {
            n_qubits: self.n_qubits,
            pulses,
        }
    }

    /// The sequence realizing the inverse unitary.
    pub fn inverse(&self) -> Self {
        let pulses = self
            .pulses
            .iter()
            .rev()
            .map(|p| Pulse::new(p.generator, -p.angle))
            .collect();
        Self {
            n_qubits: self.n_qubits,
            pulses,
        }
    }

    /// Re-targets addressed pulses through `map` (old 1-based index to new)
    /// onto a register of `n_qubits`. Global pulses are unchanged, which is
    /// exact because the collective generators are permutation symmetric.
    pub fn relabeled(&self, n_qubits: usize, map: impl Fn(usize) -> usize) -> Result<Self> {
        let pulses = self
            .pulses
            .iter()
            .map(|p| match p.generator {
                Generator::Z(k) => Pulse::new(Generator::Z(map(k)), p.angle),
                _ => *p,
            })
            .collect();
        Self::new(n_qubits, pulses)
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pulses.iter().enumerate() {
            if i > 0 {
                f.write_str(" - ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Diagonal forms for every generator on one register size.
#[derive(Debug, Clone)]
pub struct FrameCache {
    n_qubits: usize,
    global: [Eigenframe; 4],
    addressed: Vec<Eigenframe>,
}

impl FrameCache {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let make = |g| Eigenframe::new(g, n_qubits);
        Ok(Self {
            n_qubits,
            global: [
                make(Generator::X)?,
                make(Generator::Y)?,
                make(Generator::XX)?,
                make(Generator::YY)?,
            ],
            addressed: (1..=n_qubits)
                .map(|k| make(Generator::Z(k)))
                .collect::<Result<_>>()?,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn frame(&self, g: Generator) -> &Eigenframe {
        match g {
            Generator::X => &self.global[0],
            Generator::Y => &self.global[1],
            Generator::XX => &self.global[2],
            Generator::YY => &self.global[3],
            Generator::Z(k) => &self.addressed[k - 1],
        }
    }
}

/// Compiles to `U_M ··· U_1`; the empty sequence gives the identity.
pub fn compile(seq: &PulseSequence) -> Unitary {
    let frames = FrameCache::new(seq.n_qubits).expect("sequence register size is validated");
    compile_with(seq, &frames)
}

pub fn compile_with(seq: &PulseSequence, frames: &FrameCache) -> Unitary {
    let mut u = Matrix::identity(1 << seq.n_qubits);
    for p in &seq.pulses {
        frames.frame(p.generator).apply_left(p.angle, &mut u);
    }
    Unitary::from_matrix_unchecked(u)
}

/// Merges equal neighbours, wraps angles into `(-2π, 2π]` and drops pulses
/// shorter than `prune_eps`, repeating until nothing changes.
///
/// Merging is exact and a 2π shift changes every generator's exponential by
/// a global phase only, so only pruning can lower the fidelity.
pub fn canonicalize(seq: &PulseSequence, prune_eps: f64) -> PulseSequence {
    let mut pulses = seq.pulses.clone();
    loop {
        let before = pulses.len();
        let mut merged: Vec<Pulse> = Vec::with_capacity(pulses.len());
        for p in pulses {
            match merged.last_mut() {
                Some(last) if last.generator == p.generator => last.angle += p.angle,
                _ => merged.push(p),
            }
        }
        for p in merged.iter_mut() {
            p.angle = wrap_angle(p.angle);
        }
        merged.retain(|p| libm::fabs(p.angle) >= prune_eps && p.angle != 0.0);
        pulses = merged;
        if pulses.len() == before {
            break;
        }
    }
    PulseSequence {
        n_qubits: seq.n_qubits,
        pulses,
    }
}

/// Reduces modulo 2π toward zero, landing in `(-2π, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    if theta.abs() > TAU {
        libm::fmod(theta, TAU)
    } else if theta == -TAU {
        0.0
    } else {
        theta
    }
}

/// `U_x^(k)(θ) = exp(-iθ/2 σ_x^(k))` from collective flips and a refocusing
/// light shift: `[θ/2]_X - [π]_Zk - [-θ/2]_X - [-π]_Zk`.
pub fn build_spin_echo_x(k: usize, theta: f64, n_qubits: usize) -> Result<PulseSequence> {
    check_qubits(n_qubits)?;
    check_qubit(k, n_qubits)?;
    PulseSequence::new(
        n_qubits,
        alloc::vec![
            Pulse::new(Generator::X, theta / 2.0),
            Pulse::new(Generator::Z(k), PI),
            Pulse::new(Generator::X, -theta / 2.0),
            Pulse::new(Generator::Z(k), -PI),
        ],
    )
}

/// Entangler acting on every qubit but `k`, equal up to global phase to
/// `exp(-iθ/4 (S_x - σ_x^(k))²)`: `[θ/2]_XX - [π]_Zk - [θ/2]_XX - [-π]_Zk`.
pub fn build_refocused_ms(k: usize, theta: f64, n_qubits: usize) -> Result<PulseSequence> {
    check_qubits(n_qubits)?;
    if n_qubits < 2 {
        return Err(Error::QubitCount(n_qubits));
    }
    check_qubit(k, n_qubits)?;
    PulseSequence::new(
        n_qubits,
        alloc::vec![
            Pulse::new(Generator::XX, theta / 2.0),
            Pulse::new(Generator::Z(k), PI),
            Pulse::new(Generator::XX, theta / 2.0),
            Pulse::new(Generator::Z(k), -PI),
        ],
    )
}

// Angle text.

const SNAP_TOL: f64 = 1e-12;

/// Rational multiples `pπ/q` with `|p| ≤ 16`, `1 ≤ q ≤ 16` print symbolically,
/// everything else as a 17-significant-digit decimal.
pub fn format_angle(theta: f64) -> String {
    if theta == 0.0 {
        return "0".to_string();
    }
    for q in 1..=16i64 {
        let p = libm::round(theta * q as f64 / PI) as i64;
        if p == 0 || p.abs() > 16 {
            continue;
        }
        if libm::fabs(theta - p as f64 * PI / q as f64) <= SNAP_TOL {
            let mut s = match p {
                1 => "pi".to_string(),
                -1 => "-pi".to_string(),
                _ => format!("{p}pi"),
            };
            if q > 1 {
                s.push_str(&format!("/{q}"));
            }
            return s;
        }
    }
    plain_decimal(theta)
}

fn plain_decimal(x: f64) -> String {
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = 1 + exp;
    let body = if point <= 0 {
        let mut s = String::from("0.");
        s.extend(core::iter::repeat_n('0', (-point) as usize));
        s.push_str(&digits);
        s
    } else if point as usize >= digits.len() {
        let mut s = digits.clone();
        s.extend(core::iter::repeat_n('0', point as usize - digits.len()));
        s
    } else {
        format!(
            "{}.{}",
            &digits[..point as usize],
            &digits[point as usize..]
        )
    };
    format!("{sign}{body}")
}

pub fn format_sequence(seq: &PulseSequence) -> String {
    seq.to_string()
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn error(&self, kind: ParseErrorKind, message: impl Into<String>) -> Error {
        Error::Parse(ParseError {
            kind,
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }

    fn syntax(&self, message: impl Into<String>) -> Error {
        self.error(ParseErrorKind::Syntax, message)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_trivia();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.syntax(format!("expected '{want}', found '{c}'"))),
            None => Err(self.syntax(format!("expected '{want}', found end of input"))),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_trivia();
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(self.syntax("expected an integer"));
        }
        digits
            .parse()
            .map_err(|_| self.syntax(format!("integer '{digits}' too large")))
    }

    fn angle(&mut self) -> Result<f64> {
        self.skip_trivia();
        let negative = if self.peek() == Some('-') {
            self.bump();
            self.skip_trivia();
            true
        } else {
            false
        };
        let number =
            self.take_while(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        self.skip_trivia();
        let magnitude = if self.peek() == Some('p') {
            let multiplier = if number.is_empty() {
                1
            } else {
                number.parse::<i64>().map_err(|_| {
                    self.syntax(format!(
                        "expected an integer multiple of pi, found '{number}'"
                    ))
                })?
            };
            let word = self.take_while(|c| c.is_ascii_alphabetic());
            if word != "pi" {
                return Err(self.syntax(format!("expected 'pi', found '{word}'")));
            }
            self.skip_trivia();
            let divisor = if self.peek() == Some('/') {
                self.bump();
                let q = self.integer()?;
                if q == 0 {
                    return Err(self.syntax("division by zero"));
                }
                q
            } else {
                1
            };
            multiplier as f64 * PI / divisor as f64
        } else {
            if number.is_empty() {
                return Err(match self.peek() {
                    Some(c) => self.syntax(format!("expected an angle, found '{c}'")),
                    None => self.syntax("expected an angle, found end of input"),
                });
            }
            number
                .parse::<f64>()
                .map_err(|_| self.syntax(format!("malformed number '{number}'")))?
        };
        if !magnitude.is_finite() {
            return Err(self.syntax("angle is not finite"));
        }
        Ok(if negative { -magnitude } else { magnitude })
    }

    fn generator(&mut self, n_qubits: usize) -> Result<Generator> {
        let after_underscore = (self.line, self.column);
        self.skip_trivia();
        let (line, column) = (self.line, self.column);
        let word = self.take_while(|c| c.is_ascii_alphanumeric());
        let at = |kind, message: String| {
            Error::Parse(ParseError {
                kind,
                line,
                column,
                message,
            })
        };
        let g = match word.as_str() {
            "X" => Generator::X,
            "Y" => Generator::Y,
            "XX" => Generator::XX,
            "YY" => Generator::YY,
            w if w.starts_with('Z')
                && w.len() > 1
                && w[1..].bytes().all(|b| b.is_ascii_digit()) =>
            {
                let k: usize = w[1..].parse().map_err(|_| {
                    at(
                        ParseErrorKind::QubitOutOfRange,
                        format!("qubit index in '{w}' too large"),
                    )
                })?;
                if k == 0 || k > n_qubits {
                    return Err(at(
                        ParseErrorKind::QubitOutOfRange,
                        format!("qubit index {k} out of range for {n_qubits} qubits"),
                    ));
                }
                Generator::Z(k)
            }
            "" => {
                return Err(Error::Parse(ParseError {
                    kind: ParseErrorKind::Syntax,
                    line: after_underscore.0,
                    column: after_underscore.1,
                    message: "expected a generator".into(),
                }))
            }
            w => {
                return Err(at(
                    ParseErrorKind::UnknownGenerator,
                    format!("unknown generator '{w}'"),
                ))
            }
        };
        Ok(g)
    }
}

/// Parses the bracket notation; see the module docs.
pub fn parse_sequence(text: &str, n_qubits: usize) -> Result<PulseSequence> {
    check_qubits(n_qubits)?;
    let mut cur = Cursor::new(text);
    let mut pulses = Vec::new();
    cur.skip_trivia();
    if cur.peek().is_none() {
        return PulseSequence::new(n_qubits, pulses);
    }
    loop {
        cur.expect('[')?;
        let angle = cur.angle()?;
        cur.expect(']')?;
        cur.expect('_')?;
        let generator = cur.generator(n_qubits)?;
        pulses.push(Pulse::new(generator, angle));
        cur.skip_trivia();
        match cur.peek() {
            None => break,
            Some('-') => {
                cur.bump();
            }
            Some(c) => return Err(cur.syntax(format!("expected '-' between pulses, found '{c}'"))),
        }
    }
    PulseSequence::new(n_qubits, pulses)
}
