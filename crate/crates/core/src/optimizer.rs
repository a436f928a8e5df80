//! Coordinate ascent over pulse angles with curvature-adaptive steps,
//! annealing noise, pruning and pulse insertion.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::objective::{
    build_cache, build_sweep_cache, penalty, penalty_derivatives, value, CoordinateProfile,
    ObjectiveSpec, PropagatorCache,
};
use crate::qops::Generator;
use crate::sequence::{canonicalize, Pulse, PulseSequence};

/// Curvature below `-CONCAVITY_MIN` counts as concave.
pub const CONCAVITY_MIN: f64 = 1e-9;
/// Largest parabola-vertex move in one update.
pub const MAX_VERTEX_STEP: f64 = PI;
/// Cap on the annealing variance.
pub const MAX_NOISE_VARIANCE: f64 = (PI / 2.0) * (PI / 2.0);
/// Halvings of a vertex step that overshoots before giving up on the move.
pub const BACKTRACK_LIMIT: usize = 40;
/// Standard deviation of the angle of an inserted pulse.
pub const INSERT_ANGLE_SD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Penalty exponent, in (0, 1).
    pub gamma: f64,
    /// Penalty weight.
    pub alpha: f64,
    /// Initial effective temperature.
    pub t_init: f64,
    /// Temperature factor applied after every sweep.
    pub cool_factor: f64,
    /// Step taken where the coordinate profile is not concave.
    pub fixed_step: f64,
    /// Pulses shorter than this are dropped when the sequence is tidied.
    pub prune_eps: f64,
    /// Sweeps between insertion attempts.
    pub insert_period: usize,
    pub max_sweeps: usize,
    /// Stop once `value / max_value` reaches this.
    pub target_fidelity: f64,
    pub seed: u64,
    /// Include the Y and YY generators in random starts and insertions.
    pub use_y: bool,
    /// Penalty-free sweeps tried once the normalized value is within
    /// `polish_gap` of 1.
    pub polish_sweeps: usize,
    pub polish_gap: f64,
    /// Quasi-Newton iterations run after the polish sweeps if those fall
    /// short of the target.
    pub refine_iters: usize,
    /// The penalized value counts as settled once it gains less than this
    /// (relative to the maximum) between two tidying points; polishing and
    /// stopping wait for it.
    pub settle_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.6,
            alpha: 5e-3,
            t_init: 5e-2,
            cool_factor: 0.95,
            fixed_step: 0.1,
            prune_eps: 1e-3,
            insert_period: 25,
            max_sweeps: 5000,
            target_fidelity: 1.0 - 1e-9,
            seed: 0,
            use_y: false,
            polish_sweeps: 200,
            polish_gap: 1e-3,
            refine_iters: 500,
            settle_tol: 1e-6,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be finite and non-negative");
        }
        if !(self.t_init >= 0.0 && self.t_init.is_finite()) {
            return bad("t_init must be finite and non-negative");
        }
        if !(self.cool_factor > 0.0 && self.cool_factor < 1.0) {
            return bad("cool_factor must lie in (0, 1)");
        }
        if !(self.fixed_step > 0.0 && self.fixed_step.is_finite()) {
            return bad("fixed_step must be positive");
        }
        if !(self.prune_eps >= 0.0 && self.prune_eps.is_finite()) {
            return bad("prune_eps must be finite and non-negative");
        }
        if self.insert_period == 0 {
            return bad("insert_period must be at least 1");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1");
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return bad("target_fidelity must lie in (0, 1]");
        }
        if !(self.polish_gap >= 0.0 && self.polish_gap < 1.0) {
            return bad("polish_gap must lie in [0, 1)");
        }
        if !(self.settle_tol >= 0.0 && self.settle_tol.is_finite()) {
            return bad("settle_tol must be finite and non-negative");
        }
        Ok(())
    }

    /// Temperature in force during sweep `k` (0-based).
    pub fn temperature(&self, k: usize) -> f64 {
        self.t_init * libm::pow(self.cool_factor, k as f64)
    }
}

/// Where a run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Sequence(PulseSequence),
    /// `M` pulses with uniform generators and angles uniform in `(-π, π)`.
    Random(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    MaxSweeps,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TargetReached => "target-reached",
            Termination::MaxSweeps => "max-sweeps",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub sweep: usize,
    /// Unpenalized objective.
    pub value: f64,
    pub penalty: f64,
    pub pulses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub initial_sequence: PulseSequence,
    pub best_sequence: PulseSequence,
    /// Unpenalized objective of `best_sequence`.
    pub best_value: f64,
    /// `best_value / max_value`.
    pub best_normalized: f64,
    pub trace: Vec<TracePoint>,
    pub pulse_count: usize,
    pub sweeps_used: usize,
    pub insertions_accepted: usize,
    pub terminated_by: Termination,
}

/// Step rule shared by sweeps: penalty weight, exponent and fixed step.
#[derive(Debug, Clone, Copy)]
struct StepRule {
    alpha: f64,
    gamma: f64,
    fixed_step: f64,
}

impl StepRule {
    fn from(config: &OptimizerConfig) -> Self {
        Self {
            alpha: config.alpha,
            gamma: config.gamma,
            fixed_step: config.fixed_step,
        }
    }

    fn penalty_free(config: &OptimizerConfig) -> Self {
        Self {
            alpha: 0.0,
            ..Self::from(config)
        }
    }

    fn penalized_profile(&self, profile: &CoordinateProfile, theta: f64) -> f64 {
        let p = if self.alpha > 0.0 {
            libm::pow(libm::fabs(theta), self.gamma)
        } else {
            0.0
        };
        profile.value(theta) - self.alpha * p
    }

    /// Parabola vertex where the penalized profile is concave, halved until
    /// it does not score below the current angle; a fixed step uphill where
    /// the profile is not concave. Annealing noise rides on vertex moves only.
    fn next_angle<R: Rng + ?Sized>(
        &self,
        profile: &CoordinateProfile,
        theta: f64,
        temperature: f64,
        rng: &mut R,
    ) -> f64 {
        let (_, d1, d2) = profile.jet(theta);
        let (p1, p2) = if self.alpha > 0.0 {
            penalty_derivatives(theta, self.gamma)
        } else {
            (0.0, 0.0)
        };
        let g = d1 - self.alpha * p1;
        let h = d2 - self.alpha * p2;
        if h >= -CONCAVITY_MIN {
            return self.fixed_step(theta, g);
        }
        let here = self.penalized_profile(profile, theta);
        let mut step = (-g / h).clamp(-MAX_VERTEX_STEP, MAX_VERTEX_STEP);
        let mut next = theta;
        for _ in 0..BACKTRACK_LIMIT {
            if self.penalized_profile(profile, theta + step) >= here {
                next = theta + step;
                break;
            }
            step *= 0.5;
        }
        if temperature > 0.0 {
            let variance = (temperature / (2.0 * -h)).min(MAX_NOISE_VARIANCE);
            let z: f64 = StandardNormal.sample(rng);
            next += libm::sqrt(variance) * z;
        }
        next
    }

    fn fixed_step(&self, theta: f64, g: f64) -> f64 {
        let step = if g > 0.0 {
            self.fixed_step
        } else if g < 0.0 {
            -self.fixed_step
        } else {
            0.0
        };
        let next = theta + step;
        // Stop at zero rather than jump across it, so the pulse can be pruned.
        if theta != 0.0 && next != 0.0 && (next > 0.0) != (theta > 0.0) {
            0.0
        } else {
            next
        }
    }
}

/// New angle for pulse `m` (0-based) of `seq` at effective temperature
/// `temperature`.
///
/// Where the penalized profile is concave this is the parabola vertex plus
/// a normal draw of variance `T/(2|h|)`; elsewhere a fixed step uphill.
pub fn coordinate_update<R: Rng + ?Sized>(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    m: usize,
    config: &OptimizerConfig,
    temperature: f64,
    rng: &mut R,
) -> Result<f64> {
    config.validate()?;
    let profile = build_cache(spec, seq)?.profile(m)?;
    Ok(StepRule::from(config).next_angle(&profile, seq.pulses()[m].angle, temperature, rng))
}

fn sweep_cache<R: Rng + ?Sized>(
    cache: &mut PropagatorCache,
    rule: &StepRule,
    temperature: f64,
    rng: &mut R,
) {
    for m in 0..cache.len() {
        let theta = cache.sequence().pulses()[m].angle;
        let profile = cache.profile(m).expect("index in range");
        let next = rule.next_angle(&profile, theta, temperature, rng);
        cache.set_angle_forward(m, next);
    }
    // The forward list is now current; the backward list is stale and the
    // cache is only good for `value()` and `into_sequence()`.
}

fn penalized(cache: &PropagatorCache, rule: &StepRule) -> f64 {
    let p = if rule.alpha > 0.0 {
        penalty(cache.sequence(), rule.gamma).expect("gamma checked")
    } else {
        0.0
    };
    cache.value() - rule.alpha * p
}

/// Mutable state of one run: the temperature and the random stream.
#[derive(Debug, Clone)]
pub struct Annealer {
    config: OptimizerConfig,
    sweeps: usize,
    rng: ChaCha8Rng,
}

impl Annealer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self {
            config,
            sweeps: 0,
            rng,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    /// Current effective temperature, `t_init · cool_factor^sweeps`.
    pub fn temperature(&self) -> f64 {
        self.config.temperature(self.sweeps)
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One pass over all pulses in order, then one cooling step. Returns the
    /// new sequence and its penalized value.
    pub fn sweep(
        &mut self,
        spec: &ObjectiveSpec,
        seq: &PulseSequence,
    ) -> Result<(PulseSequence, f64)> {
        let mut cache = build_sweep_cache(spec, seq)?;
        let rule = StepRule::from(&self.config);
        sweep_cache(&mut cache, &rule, self.temperature(), &mut self.rng);
        self.sweeps += 1;
        let v = penalized(&cache, &rule);
        Ok((cache.into_sequence(), v))
    }

    /// Proposes one random pulse and keeps it if a zero-temperature sweep
    /// of the proposal beats a zero-temperature sweep of `seq`.
    pub fn try_insert(
        &mut self,
        spec: &ObjectiveSpec,
        seq: &PulseSequence,
    ) -> Result<(PulseSequence, bool)> {
        let n = seq.n_qubits();
        let generators = Generator::all(n, self.config.use_y);
        let g = generators[self.rng.random_range(0..generators.len())];
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let position = self.rng.random_range(0..=seq.len());
        let mut proposal = seq.clone();
        proposal.insert(position, Pulse::new(g, INSERT_ANGLE_SD * z))?;

        let rule = StepRule::from(&self.config);
        let mut base = build_sweep_cache(spec, seq)?;
        sweep_cache(&mut base, &rule, 0.0, &mut self.rng);
        let mut trial = build_sweep_cache(spec, &proposal)?;
        sweep_cache(&mut trial, &rule, 0.0, &mut self.rng);
        if penalized(&trial, &rule) > penalized(&base, &rule) {
            Ok((trial.into_sequence(), true))
        } else {
            Ok((seq.clone(), false))
        }
    }
}

/// One sweep at the given temperature; the caller owns the cooling.
pub fn sweep<R: Rng + ?Sized>(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    config: &OptimizerConfig,
    temperature: f64,
    rng: &mut R,
) -> Result<(PulseSequence, f64)> {
    config.validate()?;
    let mut cache = build_sweep_cache(spec, seq)?;
    let rule = StepRule::from(config);
    sweep_cache(&mut cache, &rule, temperature, rng);
    let v = penalized(&cache, &rule);
    Ok((cache.into_sequence(), v))
}

/// Random sequence of `len` pulses drawn from `rng`.
pub fn random_sequence<R: Rng + ?Sized>(
    n_qubits: usize,
    len: usize,
    use_y: bool,
    rng: &mut R,
) -> Result<PulseSequence> {
    let generators = Generator::all(n_qubits, use_y);
    let pulses = (0..len)
        .map(|_| {
            let g = generators[rng.random_range(0..generators.len())];
            Pulse::new(g, rng.random_range(-PI..PI))
        })
        .collect();
    PulseSequence::new(n_qubits, pulses)
}

/// Shortest representative of `theta` modulo 2π, in `(-π, π]`. A 2π shift
/// is a global phase for every generator, so this never changes fidelity.
pub fn shortest_angle(theta: f64) -> f64 {
    let r = libm::remainder(theta, TAU);
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Angles reduced to `(-π, π]`, then merged and pruned below `prune_eps`.
pub fn tidy(seq: &PulseSequence, prune_eps: f64) -> PulseSequence {
    let pulses = seq
        .pulses()
        .iter()
        .map(|p| Pulse::new(p.generator, shortest_angle(p.angle)))
        .collect();
    let reduced =
        PulseSequence::new(seq.n_qubits(), pulses).expect("same generators, finite angles");
    canonicalize(&reduced, prune_eps)
}

/// Penalty-free zero-temperature sweeps from `tidy(seq, prune_eps)` until
/// the target is met, progress stalls or the budget is spent.
fn polish_from(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    config: &OptimizerConfig,
    prune_eps: f64,
) -> Result<(PulseSequence, f64)> {
    let goal = config.target_fidelity * spec.max_value();
    let rule = StepRule::penalty_free(config);
    let start = tidy(seq, prune_eps);
    let start_value = value(spec, &start)?;
    let mut cache = build_sweep_cache(spec, &start)?;
    // No noise at zero temperature, so this stream is never drawn from.
    let mut idle = ChaCha8Rng::seed_from_u64(0);
    let mut best = (start, start_value);
    for _ in 0..config.polish_sweeps {
        if best.1 >= goal {
            break;
        }
        sweep_cache(&mut cache, &rule, 0.0, &mut idle);
        let v = cache.value();
        if v < best.1 + 1e-15 {
            break;
        }
        best = (cache.sequence().clone(), v);
        cache.rebuild_backward();
    }
    if best.1 < goal && config.refine_iters > 0 {
        best = refine(spec, &best.0, config.refine_iters, goal)?;
    }
    let out = tidy(&best.0, prune_eps);
    let v = value(spec, &out)?;
    Ok((out, v))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS ascent on all angles at once, penalty-free, with a
/// backtracking line search. Returns the best sequence seen.
pub fn refine(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    max_iters: usize,
    goal: f64,
) -> Result<(PulseSequence, f64)> {
    const MEMORY: usize = 10;
    let with = |x: &[f64]| -> Result<PulseSequence> {
        let pulses = seq
            .pulses()
            .iter()
            .zip(x)
            .map(|(p, &a)| Pulse::new(p.generator, a))
            .collect();
        PulseSequence::new(seq.n_qubits(), pulses)
    };
    let mut x: Vec<f64> = seq.angles().collect();
    let mut v = value(spec, seq)?;
    if x.is_empty() {
        return Ok((seq.clone(), v));
    }
    // Minimize -Φ.
    let neg = |g: Vec<f64>| -> Vec<f64> { g.into_iter().map(|d| -d).collect() };
    let mut g = neg(build_cache(spec, seq)?.gradient());
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for _ in 0..max_iters {
        if v >= goal {
            break;
        }
        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let scale = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= scale);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.into_iter().map(|d| -d).collect();
        let mut slope = dot(&g, &dir);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            dir = g.iter().map(|d| -d).collect();
            slope = -dot(&g, &g);
            if slope == 0.0 {
                break;
            }
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let tv = value(spec, &with(&trial)?)?;
            if -tv <= -v + 1e-4 * step * slope {
                accepted = Some((trial, tv));
                break;
            }
            step *= 0.5;
        }
        let Some((next, nv)) = accepted else { break };
        let next_seq = with(&next)?;
        let ng = neg(build_cache(spec, &next_seq)?.gradient());
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = ng.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-18 {
            if history.len() == MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        let gained = nv - v;
        x = next;
        v = nv;
        g = ng;
        if gained <= 0.0 {
            break;
        }
    }
    Ok((with(&x)?, v))
}

/// Polishes with pruning first and falls back to merge-only tidying.
fn polish(
    spec: &ObjectiveSpec,
    seq: &PulseSequence,
    config: &OptimizerConfig,
) -> Result<(PulseSequence, f64)> {
    let goal = config.target_fidelity * spec.max_value();
    let pruned = polish_from(spec, seq, config, config.prune_eps)?;
    if pruned.1 >= goal || config.prune_eps == 0.0 {
        return Ok(pruned);
    }
    let kept = polish_from(spec, seq, config, 0.0)?;
    Ok(if kept.1 > pruned.1 { kept } else { pruned })
}

/// Full search loop: sweeps with cooling, periodic tidying and insertion,
/// and a penalty-free polish once close to the target.
pub fn optimize(
    spec: &ObjectiveSpec,
    init: &Init,
    config: &OptimizerConfig,
) -> Result<OptimizationReport> {
    let mut annealer = Annealer::new(config.clone())?;
    let n = spec.n_qubits();
    let initial = match init {
        Init::Sequence(s) => {
            if s.n_qubits() != n {
                return Err(Error::DimensionMismatch(n, s.n_qubits()));
            }
            s.clone()
        }
        Init::Random(0) => {
            return Err(Error::InvalidParameter(
                "random start needs at least one pulse".into(),
            ))
        }
        Init::Random(len) => random_sequence(n, *len, config.use_y, annealer.rng())?,
    };
    let max = spec.max_value();
    let goal = config.target_fidelity * max;

    let mut seq = initial.clone();
    let mut trace = Vec::new();
    let mut best = (seq.clone(), f64::NEG_INFINITY);
    let mut accepted = 0;
    let mut finished = None;
    let mut sweeps_used = 0;
    let mut last_hat = f64::NEG_INFINITY;

    for k in 1..=config.max_sweeps {
        let (next, _) = annealer.sweep(spec, &seq)?;
        seq = next;
        sweeps_used = k;
        let v = value(spec, &seq)?;
        trace.push(TracePoint {
            sweep: k,
            value: v,
            penalty: penalty(&seq, config.gamma)?,
            pulses: seq.len(),
        });
        if v > best.1 {
            best = (seq.clone(), v);
        }
        if k % config.insert_period != 0 {
            continue;
        }
        seq = tidy(&seq, config.prune_eps);
        let hat = value(spec, &seq)? - config.alpha * penalty(&seq, config.gamma)?;
        let settled = hat - last_hat < config.settle_tol * max;
        last_hat = hat;
        if settled && v >= (1.0 - config.polish_gap) * max {
            let (polished, pv) = polish(spec, &seq, config)?;
            if pv >= goal {
                finished = Some((polished, pv));
                break;
            }
        }
        let (next, kept) = annealer.try_insert(spec, &seq)?;
        seq = next;
        accepted += usize::from(kept);
    }

    let (best_sequence, best_value, terminated_by) = match finished {
        Some((s, v)) => (s, v, Termination::TargetReached),
        None => {
            let (s, v) = polish(spec, &best.0, config)?;
            let (s, v) = if v >= best.1 { (s, v) } else { best };
            let t = if v >= goal {
                Termination::TargetReached
            } else {
                Termination::MaxSweeps
            };
            (s, v, t)
        }
    };
    Ok(OptimizationReport {
        initial_sequence: initial,
        pulse_count: best_sequence.len(),
        best_normalized: best_value / max,
        best_sequence,
        best_value,
        trace,
        sweeps_used,
        insertions_accepted: accepted,
        terminated_by,
    })
}

/// Index of the report with the highest value, ties going to fewer
/// pulses, then to the earlier report.
pub fn best_index(reports: &[OptimizationReport]) -> Option<usize> {
    (0..reports.len()).reduce(|i, j| {
        let (a, b) = (&reports[i], &reports[j]);
        let better = b.best_value > a.best_value + 1e-12
            || ((b.best_value - a.best_value).abs() <= 1e-12 && b.pulse_count < a.pulse_count);
        if better {
            j
        } else {
            i
        }
    })
}
