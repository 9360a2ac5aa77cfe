//! Core domain types and payoff evaluation.
//!
//! A decision problem is a finite action set with nonnegative basic payoffs
//! and a fatigue factor `gamma` in (0, 1]. Choosing action `a` at period `t`
//! pays `(1 - gamma * phi(a | h^{t-1})) * u(a)`, where `phi(a | h^{t-1})` is
//! the empirical frequency of `a` among the first `t - 1` periods. This module
//! owns histories (with exact integer count bookkeeping), frequency vectors,
//! stage/average payoff evaluation, and streaming average-utility traces with
//! running-extrema diagnostics.

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("action set must not be empty")]
    EmptyActionSet,
    #[error("payoff for action `{action}` must be finite and nonnegative, got {payoff}")]
    InvalidPayoff { action: String, payoff: f64 },
    #[error("gamma must be strictly positive and at most 1, got {gamma}")]
    GammaOutOfRange { gamma: f64 },
    #[error("duplicate action name `{name}`")]
    DuplicateAction { name: String },
    #[error("unknown action name `{name}`")]
    UnknownAction { name: String },
    #[error("action index {index} out of range for {n_actions} actions")]
    ActionOutOfRange { index: usize, n_actions: usize },
    #[error("time index {index} out of range for history of length {len}")]
    IndexOutOfRange { index: u64, len: u64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("burn-in {burn_in} must be smaller than trace length {len}")]
    BurnInOutOfRange { burn_in: u64, len: u64 },
    #[error("weights sum to {sum}, expected 1 (or an all-zero vector)")]
    OffSimplex { sum: f64 },
    #[error("frequency vector is all-zero where a distribution is required")]
    ZeroFrequencies,
    #[error("expected {expected} weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step generator ended after {got} steps, needed {needed}")]
    GeneratorExhausted { needed: u64, got: u64 },
    #[error(
        "trace is decimated (keep_every={keep_every}); exact extrema are only \
         available at the burn-in it was built with ({burn_in})"
    )]
    DecimatedTrace { keep_every: u64, burn_in: u64 },
}

/// A validated decision problem: named actions, basic payoffs, fatigue factor.
///
/// Action order is the input order and is the canonical index order used by
/// every frequency vector and history in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<R: Real = f64> {
    actions: Vec<String>,
    payoffs: Vec<R>,
    gamma: R,
}

impl<R: Real> ProblemSpec<R> {
    /// Validates and normalizes a raw action/payoff/gamma description.
    ///
    /// Rejects empty action sets, non-finite or negative payoffs, duplicate
    /// action names, and `gamma` outside (0, 1]. `gamma = 0` is rejected: it
    /// would make the problem a trivial repeated argmax.
    pub fn new<S: Into<String>>(actions: Vec<(S, R)>, gamma: R) -> Result<Self, ModelError> {
        if actions.is_empty() {
            return Err(ModelError::EmptyActionSet);
        }
        if !(gamma > R::zero() && gamma <= R::one()) {
            return Err(ModelError::GammaOutOfRange {
                gamma: gamma.as_f64(),
            });
        }
        let mut names = Vec::with_capacity(actions.len());
        let mut payoffs = Vec::with_capacity(actions.len());
        for (name, payoff) in actions {
            let name = name.into();
            if !(payoff.is_finite() && payoff >= R::zero()) {
                return Err(ModelError::InvalidPayoff {
                    action: name,
                    payoff: payoff.as_f64(),
                });
            }
            if names.contains(&name) {
                return Err(ModelError::DuplicateAction { name });
            }
            names.push(name);
            payoffs.push(payoff);
        }
        Ok(Self {
            actions: names,
            payoffs,
            gamma,
        })
    }

    /// Same problem with a different fatigue factor.
    pub fn with_gamma(&self, gamma: R) -> Result<Self, ModelError> {
        if !(gamma > R::zero() && gamma <= R::one()) {
            return Err(ModelError::GammaOutOfRange {
                gamma: gamma.as_f64(),
            });
        }
        Ok(Self {
            actions: self.actions.clone(),
            payoffs: self.payoffs.clone(),
            gamma,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn gamma(&self) -> R {
        self.gamma
    }

    pub fn payoff(&self, action: usize) -> R {
        self.payoffs[action]
    }

    pub fn payoffs(&self) -> &[R] {
        &self.payoffs
    }

    pub fn action_name(&self, action: usize) -> &str {
        &self.actions[action]
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn index_of(&self, name: &str) -> Result<usize, ModelError> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| ModelError::UnknownAction {
                name: name.to_string(),
            })
    }

    pub fn max_payoff(&self) -> R {
        self.payoffs
            .iter()
            .copied()
            .fold(R::zero(), |m, u| if u > m { u } else { m })
    }

    pub fn payoff_sum(&self) -> R {
        self.payoffs.iter().copied().sum()
    }
}

/// A finite history of action choices, indexed from 1, with running counts
/// maintained incrementally on push.
///
/// Counts are exact integers; frequencies are derived on demand as
/// `count / t` so that long traces accumulate no float drift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    steps: Vec<u32>,
    counts: Vec<u64>,
}

impl History {
    pub fn new(n_actions: usize) -> Self {
        Self {
            steps: Vec::new(),
            counts: vec![0; n_actions],
        }
    }

    pub fn with_capacity(n_actions: usize, capacity: usize) -> Self {
        Self {
            steps: Vec::with_capacity(capacity),
            counts: vec![0; n_actions],
        }
    }

    pub fn from_steps<I>(n_actions: usize, steps: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = usize>,
    {
        let iter = steps.into_iter();
        let mut h = Self::with_capacity(n_actions, iter.size_hint().0);
        for a in iter {
            h.push(a)?;
        }
        Ok(h)
    }

    pub fn push(&mut self, action: usize) -> Result<(), ModelError> {
        if action >= self.counts.len() {
            return Err(ModelError::ActionOutOfRange {
                index: action,
                n_actions: self.counts.len(),
            });
        }
        self.steps.push(action as u32);
        self.counts[action] += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn n_actions(&self) -> usize {
        self.counts.len()
    }

    /// Action chosen at period `t` (1-indexed).
    pub fn step(&self, t: usize) -> Result<usize, ModelError> {
        if t == 0 || t > self.steps.len() {
            return Err(ModelError::IndexOutOfRange {
                index: t as u64,
                len: self.steps.len() as u64,
            });
        }
        Ok(self.steps[t - 1] as usize)
    }

    pub fn steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&a| a as usize)
    }

    /// Running counts over the whole history.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Occurrence counts among the first `t` periods (fresh scan).
    pub fn counts_at(&self, t: usize) -> Result<Vec<u64>, ModelError> {
        if t > self.steps.len() {
            return Err(ModelError::IndexOutOfRange {
                index: t as u64,
                len: self.steps.len() as u64,
            });
        }
        let mut counts = vec![0u64; self.counts.len()];
        for &a in &self.steps[..t] {
            counts[a as usize] += 1;
        }
        Ok(counts)
    }

    /// Recount from the raw steps; equals `counts()` by construction.
    pub fn recount(&self) -> Vec<u64> {
        self.counts_at(self.steps.len()).expect("full prefix")
    }

    /// Swaps the actions at periods `t` and `s` (1-indexed). Counts are
    /// unchanged because the multiset of steps is.
    pub(crate) fn swap_steps(&mut self, t: usize, s: usize) {
        self.steps.swap(t - 1, s - 1);
    }
}

/// A point of the simplex over actions, or the all-zero vector that the
/// frequency map assigns to the empty history.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector<R: Real = f64> {
    weights: Vec<R>,
}

impl<R: Real> FrequencyVector<R> {
    /// Validates that the weights lie on the simplex (sum 1 within the
    /// simplex tolerance, entries in [0, 1]) or are all zero.
    pub fn from_weights(weights: Vec<R>) -> Result<Self, ModelError> {
        let sum: R = weights.iter().copied().sum();
        let all_zero = weights.iter().all(|&w| w == R::zero());
        let on_simplex = (sum - R::one()).abs() <= R::tol_simplex()
            && weights.iter().all(|&w| w >= R::zero() && w <= R::one() + R::tol_simplex());
        if !(all_zero || on_simplex) {
            return Err(ModelError::OffSimplex { sum: sum.as_f64() });
        }
        Ok(Self { weights })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            weights: vec![R::zero(); n],
        }
    }

    pub fn uniform(n: usize) -> Self {
        let w = R::one() / R::from_count(n as u64);
        Self {
            weights: vec![w; n],
        }
    }

    pub fn point_mass(n: usize, action: usize) -> Self {
        let mut weights = vec![R::zero(); n];
        weights[action] = R::one();
        Self { weights }
    }

    /// Empirical frequencies `count / total`; the all-zero vector for
    /// `total = 0`.
    pub fn from_counts(counts: &[u64], total: u64) -> Self {
        if total == 0 {
            return Self::zero(counts.len());
        }
        let t = R::from_count(total);
        Self {
            weights: counts.iter().map(|&c| R::from_count(c) / t).collect(),
        }
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn get(&self, action: usize) -> R {
        self.weights[action]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == R::zero())
    }

    pub fn sum(&self) -> R {
        self.weights.iter().copied().sum()
    }

    /// Support in index order: actions with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&a| self.weights[a] > R::zero())
            .collect()
    }
}

/// Frequencies `phi(. | h^t)` of the length-`t` prefix; all-zero for `t = 0`.
pub fn frequency<R: Real>(h: &History, t: usize) -> Result<FrequencyVector<R>, ModelError> {
    let counts = h.counts_at(t)?;
    Ok(FrequencyVector::from_counts(&counts, t as u64))
}

#[inline]
pub(crate) fn stage_payoff_from_counts<R: Real>(gamma: R, payoff: R, count: u64, t_prev: u64) -> R {
    if t_prev == 0 {
        payoff
    } else {
        (R::one() - gamma * (R::from_count(count) / R::from_count(t_prev))) * payoff
    }
}

/// Stage payoff at period `t` (1-indexed): `(1 - gamma * phi(h_t | h^{t-1})) * u(h_t)`.
pub fn stage_payoff<R: Real>(
    spec: &ProblemSpec<R>,
    h: &History,
    t: usize,
) -> Result<R, ModelError> {
    let action = h.step(t)?;
    let counts = h.counts_at(t - 1)?;
    Ok(stage_payoff_from_counts(
        spec.gamma(),
        spec.payoff(action),
        counts[action],
        (t - 1) as u64,
    ))
}

/// Average utility `U^T`: the mean of the first `T` stage payoffs, computed
/// from scratch in a single left-to-right pass.
pub fn average_utility<R: Real>(
    spec: &ProblemSpec<R>,
    h: &History,
    horizon: usize,
) -> Result<R, ModelError> {
    if horizon == 0 {
        return Err(ModelError::EmptyHorizon);
    }
    if horizon > h.len() {
        return Err(ModelError::IndexOutOfRange {
            index: horizon as u64,
            len: h.len() as u64,
        });
    }
    let gamma = spec.gamma();
    let mut counts = vec![0u64; h.n_actions()];
    let mut total = R::zero();
    for (t_prev, a) in h.steps().take(horizon).enumerate() {
        total = total
            + stage_payoff_from_counts(gamma, spec.payoff(a), counts[a], t_prev as u64);
        counts[a] += 1;
    }
    Ok(total / R::from_count(horizon as u64))
}

/// Options for [`utility_trace`].
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Periods excluded from the running extrema. `None` means `t_max / 10`.
    pub burn_in: Option<u64>,
    /// Retain every k-th trace point (the last point is always kept).
    /// 1 keeps everything.
    pub keep_every: u64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            burn_in: None,
            keep_every: 1,
        }
    }
}

/// The sequence of average utilities `(U^T)_{T <= t_max}` of a history,
/// with exact running extrema past a burn-in window.
///
/// Retained points may be decimated for plotting; the extrema are tracked
/// over every period regardless of decimation.
#[derive(Debug, Clone)]
pub struct UtilityTrace<R: Real = f64> {
    points: Vec<(u64, R)>,
    keep_every: u64,
    len: u64,
    burn_in: u64,
    min_after_burn_in: Option<R>,
    max_after_burn_in: Option<R>,
}

impl<R: Real> UtilityTrace<R> {
    /// Retained `(T, U^T)` points.
    pub fn points(&self) -> &[(u64, R)] {
        &self.points
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn keep_every(&self) -> u64 {
        self.keep_every
    }

    /// Exact minimum of `U^T` over `T > burn_in`.
    pub fn running_min(&self) -> Option<R> {
        self.min_after_burn_in
    }

    /// Exact maximum of `U^T` over `T > burn_in`.
    pub fn running_max(&self) -> Option<R> {
        self.max_after_burn_in
    }

    /// Final `U^{t_max}`.
    pub fn last(&self) -> Option<R> {
        self.points.last().map(|&(_, u)| u)
    }
}

/// Streams the average-utility sequence of a step generator in O(1) extra
/// work per step.
///
/// `U^T` is maintained by the running-mean recurrence
/// `U_T = U_{T-1} + (stage_T - U_{T-1}) / T`, which must agree with the
/// from-scratch [`average_utility`] to the agreement tolerance.
pub fn utility_trace<R, I>(
    spec: &ProblemSpec<R>,
    steps: I,
    t_max: u64,
    opts: TraceOptions,
) -> Result<UtilityTrace<R>, ModelError>
where
    R: Real,
    I: IntoIterator<Item = usize>,
{
    if t_max == 0 {
        return Err(ModelError::EmptyHorizon);
    }
    let keep_every = opts.keep_every.max(1);
    let burn_in = opts.burn_in.unwrap_or(t_max / 10);
    let gamma = spec.gamma();
    let mut counts = vec![0u64; spec.n_actions()];
    let mut mean = R::zero();
    let mut points = Vec::with_capacity((t_max / keep_every + 2) as usize);
    let mut min_after: Option<R> = None;
    let mut max_after: Option<R> = None;
    let mut iter = steps.into_iter();
    for t in 1..=t_max {
        let a = iter
            .next()
            .ok_or(ModelError::GeneratorExhausted {
                needed: t_max,
                got: t - 1,
            })?;
        if a >= counts.len() {
            return Err(ModelError::ActionOutOfRange {
                index: a,
                n_actions: counts.len(),
            });
        }
        let stage = stage_payoff_from_counts(gamma, spec.payoff(a), counts[a], t - 1);
        counts[a] += 1;
        mean += (stage - mean) / R::from_count(t);
        if t > burn_in {
            min_after = Some(match min_after {
                Some(m) if m <= mean => m,
                _ => mean,
            });
            max_after = Some(match max_after {
                Some(m) if m >= mean => m,
                _ => mean,
            });
        }
        if t % keep_every == 0 || t == t_max {
            points.push((t, mean));
        }
    }
    Ok(UtilityTrace {
        points,
        keep_every,
        len: t_max,
        burn_in,
        min_after_burn_in: min_after,
        max_after_burn_in: max_after,
    })
}

/// Post-burn-in extrema of a trace: `(liminf_estimate, limsup_estimate)`.
///
/// These are finite-horizon estimates of the lowest and highest accumulation
/// points of the average-utility sequence. They are exact only in the limit;
/// for a finite trace they are heuristic and may over- or undershoot the true
/// accumulation points.
pub fn empirical_limits<R: Real>(
    trace: &UtilityTrace<R>,
    burn_in: u64,
) -> Result<(R, R), ModelError> {
    if burn_in >= trace.len {
        return Err(ModelError::BurnInOutOfRange {
            burn_in,
            len: trace.len,
        });
    }
    if burn_in == trace.burn_in {
        // Tracked exactly during streaming, valid for any decimation.
        return Ok((
            trace.min_after_burn_in.expect("burn_in < len"),
            trace.max_after_burn_in.expect("burn_in < len"),
        ));
    }
    if trace.keep_every != 1 {
        return Err(ModelError::DecimatedTrace {
            keep_every: trace.keep_every,
            burn_in: trace.burn_in,
        });
    }
    let mut min = None;
    let mut max = None;
    for &(t, u) in &trace.points {
        if t > burn_in {
            min = Some(match min {
                Some(m) if m <= u => m,
                _ => u,
            });
            max = Some(match max {
                Some(m) if m >= u => m,
                _ => u,
            });
        }
    }
    Ok((min.expect("burn_in < len"), max.expect("burn_in < len")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_action_spec(gamma: f64) -> ProblemSpec {
        ProblemSpec::new(vec![("a", 1.0), ("b", 10.0)], gamma).unwrap()
    }

    #[test]
    fn validates_example_spec() {
        let spec = two_action_spec(1.0);
        assert_eq!(spec.n_actions(), 2);
        assert_eq!(spec.payoff(1), 10.0);
        assert_eq!(spec.action_name(0), "a");
    }

    #[test]
    fn rejects_gamma_zero() {
        let err = ProblemSpec::new(vec![("a", 1.0)], 0.0).unwrap_err();
        assert_eq!(err, ModelError::GammaOutOfRange { gamma: 0.0 });
        assert!(err.to_string().contains("strictly positive"));
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            ProblemSpec::<f64>::new(Vec::<(&str, f64)>::new(), 0.5).unwrap_err(),
            ModelError::EmptyActionSet
        );
        assert!(matches!(
            ProblemSpec::new(vec![("a", -1.0)], 0.5).unwrap_err(),
            ModelError::InvalidPayoff { .. }
        ));
        assert!(matches!(
            ProblemSpec::new(vec![("a", f64::NAN)], 0.5).unwrap_err(),
            ModelError::InvalidPayoff { .. }
        ));
        assert!(matches!(
            ProblemSpec::new(vec![("a", 1.0), ("a", 2.0)], 0.5).unwrap_err(),
            ModelError::DuplicateAction { .. }
        ));
        assert!(matches!(
            ProblemSpec::new(vec![("a", 1.0)], 1.5).unwrap_err(),
            ModelError::GammaOutOfRange { .. }
        ));
    }

    #[test]
    fn accepts_single_action_spec() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("c", 5.0)], 0.5).unwrap();
        assert_eq!(spec.n_actions(), 1);
    }

    #[test]
    fn frequency_counts_directly() {
        // h = (a, b, a)
        let h = History::from_steps(2, vec![0, 1, 0]).unwrap();
        let f: FrequencyVector = frequency(&h, 3).unwrap();
        assert_eq!(f.weights(), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn frequency_empty_prefix_is_zero() {
        let h = History::from_steps(2, vec![0, 1]).unwrap();
        let f: FrequencyVector = frequency(&h, 0).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn frequency_constant_history() {
        let h = History::from_steps(2, std::iter::repeat(1).take(100)).unwrap();
        let f: FrequencyVector = frequency(&h, 100).unwrap();
        assert_eq!(f.weights(), &[0.0, 1.0]);
    }

    #[test]
    fn frequency_rejects_out_of_range() {
        let h = History::from_steps(2, vec![0]).unwrap();
        assert!(frequency::<f64>(&h, 2).is_err());
    }

    #[test]
    fn counts_match_recount() {
        let h = History::from_steps(3, vec![0, 2, 2, 1, 0, 2]).unwrap();
        assert_eq!(h.counts(), h.recount().as_slice());
        assert_eq!(h.counts().iter().sum::<u64>(), h.len() as u64);
    }

    #[test]
    fn stage_payoff_examples() {
        // (b, b) at gamma = 0.9: second stage pays (1 - 0.9) * 10 = 1.
        let spec = two_action_spec(0.9);
        let h = History::from_steps(2, vec![1, 1]).unwrap();
        assert!((stage_payoff(&spec, &h, 2).unwrap() - 1.0).abs() < 1e-15);
        // First stage always pays the basic payoff.
        assert_eq!(stage_payoff(&spec, &h, 1).unwrap(), 10.0);
        // Full fatigue at frequency 1.
        let spec = two_action_spec(1.0);
        assert_eq!(stage_payoff(&spec, &h, 2).unwrap(), 0.0);
        assert!(stage_payoff(&spec, &h, 3).is_err());
    }

    #[test]
    fn average_utility_constant_b() {
        // Constant-b history at gamma = 0.9: U^T = 1 + 9/T.
        let spec = two_action_spec(0.9);
        let h = History::from_steps(2, std::iter::repeat(1).take(50)).unwrap();
        for t in [1usize, 2, 10, 50] {
            let u = average_utility(&spec, &h, t).unwrap();
            assert!((u - (1.0 + 9.0 / t as f64)).abs() < 1e-12, "T={t}: {u}");
        }
    }

    #[test]
    fn average_utility_hand_example() {
        // (b, a) at gamma = 1: (10 + 1) / 2.
        let spec = two_action_spec(1.0);
        let h = History::from_steps(2, vec![1, 0]).unwrap();
        assert_eq!(average_utility(&spec, &h, 2).unwrap(), 5.5);
        assert_eq!(average_utility(&spec, &h, 1).unwrap(), 10.0);
    }

    #[test]
    fn trace_matches_from_scratch() {
        let spec = two_action_spec(0.7);
        let steps: Vec<usize> = (0..400).map(|i| (i * 7 % 13) % 2).collect();
        let h = History::from_steps(2, steps.iter().copied()).unwrap();
        let trace = utility_trace(&spec, steps.iter().copied(), 400, TraceOptions::default())
            .unwrap();
        for &(t, u) in trace.points() {
            let direct = average_utility(&spec, &h, t as usize).unwrap();
            assert!((u - direct).abs() < 1e-9, "T={t}");
        }
    }

    #[test]
    fn trace_constant_history_converges() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("c", 4.0)], 0.25).unwrap();
        let trace = utility_trace(
            &spec,
            std::iter::repeat(0),
            100_000,
            TraceOptions::default(),
        )
        .unwrap();
        // (1 - gamma) * u = 3.
        assert!((trace.last().unwrap() - 3.0).abs() < 1e-3);
        let (lo, hi) = empirical_limits(&trace, 50_000).unwrap();
        assert!((lo - 3.0).abs() < 1e-4 && (hi - 3.0).abs() < 1e-4);
        assert!(lo <= hi);
    }

    #[test]
    fn trace_generator_exhaustion() {
        let spec = two_action_spec(0.5);
        let err =
            utility_trace(&spec, vec![0, 1], 3, TraceOptions::default()).unwrap_err();
        assert_eq!(err, ModelError::GeneratorExhausted { needed: 3, got: 2 });
    }

    #[test]
    fn empirical_limits_burn_in_bounds() {
        let spec = two_action_spec(0.5);
        let trace =
            utility_trace(&spec, vec![0, 1, 0, 1], 4, TraceOptions::default()).unwrap();
        assert!(empirical_limits(&trace, 4).is_err());
        assert!(empirical_limits(&trace, 0).is_ok());
    }

    #[test]
    fn decimated_trace_keeps_exact_extrema_at_built_burn_in() {
        let spec = two_action_spec(1.0);
        let steps: Vec<usize> = (0..1000).map(|i| usize::from(i % 3 == 0)).collect();
        let full = utility_trace(&spec, steps.iter().copied(), 1000, TraceOptions::default())
            .unwrap();
        let decimated = utility_trace(
            &spec,
            steps.iter().copied(),
            1000,
            TraceOptions {
                burn_in: Some(100),
                keep_every: 7,
            },
        )
        .unwrap();
        let exact = empirical_limits(&full, 100).unwrap();
        let tracked = empirical_limits(&decimated, 100).unwrap();
        assert_eq!(exact, tracked);
        // Other burn-ins are unavailable on a decimated trace.
        assert!(matches!(
            empirical_limits(&decimated, 200).unwrap_err(),
            ModelError::DecimatedTrace { .. }
        ));
    }

    #[test]
    fn frequency_vector_validation() {
        assert!(FrequencyVector::from_weights(vec![0.5, 0.5]).is_ok());
        assert!(FrequencyVector::from_weights(vec![0.0, 0.0]).is_ok());
        assert!(FrequencyVector::from_weights(vec![0.6, 0.5]).is_err());
        assert!(FrequencyVector::from_weights(vec![-0.1, 1.1]).is_err());
        let f = FrequencyVector::<f64>::from_counts(&[1, 3], 4);
        assert_eq!(f.weights(), &[0.25, 0.75]);
        assert_eq!(f.support(), vec![0, 1]);
    }
}
