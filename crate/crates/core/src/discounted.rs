//! Dual-discounted evaluation: recency-weighted frequencies and discounted
//! payoff streams.
//!
//! The discounted frequency of `a` before period `t` weights past
//! occurrences by `lambda^(t-s-1)` and normalizes to a distribution; the
//! dual-discount utility is the `delta`-discounted sum of stage payoffs
//! computed with those frequencies. Its maximum over all infinite histories,
//! `V^(lambda,delta)`, has no closed form and is approached here with
//! certified-by-truncation brackets: every stage payoff lies in
//! `[0, max_u]`, so truncating after `H` periods leaves a tail of at most
//! `delta^H * max_u`.
//!
//! The bracket's lower end is a real achievable value (the best of a
//! stationary-tracking rollout, a greedy rollout, and a beam search over
//! discounted states). The upper end adds the truncation tail plus the
//! unexplored-depth slack if the search ran out of budget. Near-duplicate
//! beam states are merged on weights rounded to 1e-6; the discounted state
//! contracts under identical continuations, which makes merging sound in
//! practice, but no proof is claimed and reports carry the merge count.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{FrequencyVector, History, ModelError, ProblemSpec};
use crate::real::Real;
use crate::stationary::optimal_stationary;
use crate::trajectories::{generate_greedy, generate_tracking};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscountError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("lambda must lie strictly inside (0, 1), got {lambda}")]
    LambdaOutOfRange { lambda: f64 },
    #[error("delta must lie strictly inside (0, 1), got {delta}")]
    DeltaOutOfRange { delta: f64 },
    #[error("truncation depth must be at least 1")]
    DepthTooSmall,
    #[error("beam width must be at least 1")]
    BadBeamWidth,
    #[error("lambda grid must be non-empty, strictly ascending, and inside (0, 1)")]
    BadGrid,
}

/// Past-use discount `lambda` and future discount `delta`, both strictly
/// inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountParams<R: Real = f64> {
    lambda: R,
    delta: R,
}

impl<R: Real> DiscountParams<R> {
    pub fn new(lambda: R, delta: R) -> Result<Self, DiscountError> {
        if !(lambda > R::zero() && lambda < R::one()) {
            return Err(DiscountError::LambdaOutOfRange {
                lambda: lambda.as_f64(),
            });
        }
        if !(delta > R::zero() && delta < R::one()) {
            return Err(DiscountError::DeltaOutOfRange {
                delta: delta.as_f64(),
            });
        }
        Ok(Self { lambda, delta })
    }

    pub fn lambda(&self) -> R {
        self.lambda
    }

    pub fn delta(&self) -> R {
        self.delta
    }
}

/// Incrementally maintained discounted-frequency state.
///
/// At period `t`, `raw_weights(a) = sum_{s <= t-1} lambda^(t-s-1) 1{h_s = a}`;
/// the update after choosing `a` is `raw <- lambda * raw + e_a`. Normalized
/// weights sum to 1 for `t >= 2`; the state at `t = 1` is the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedState<R: Real = f64> {
    lambda: R,
    raw: Vec<R>,
    /// `lambda^(t-1)`, maintained alongside `t`.
    lambda_pow: R,
    t: u64,
}

impl<R: Real> DiscountedState<R> {
    pub fn new(n_actions: usize, lambda: R) -> Result<Self, DiscountError> {
        if !(lambda > R::zero() && lambda < R::one()) {
            return Err(DiscountError::LambdaOutOfRange {
                lambda: lambda.as_f64(),
            });
        }
        Ok(Self {
            lambda,
            raw: vec![R::zero(); n_actions],
            lambda_pow: R::one(),
            t: 1,
        })
    }

    /// Current period (the one about to be played).
    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn raw_weights(&self) -> &[R] {
        &self.raw
    }

    /// `(1 - lambda) / (1 - lambda^(t-1))`; zero at `t = 1` where the
    /// definition's base clause applies.
    pub fn normalizer(&self) -> R {
        if self.t == 1 {
            R::zero()
        } else {
            (R::one() - self.lambda) / (R::one() - self.lambda_pow)
        }
    }

    /// Discounted frequency of a single action at the current period.
    pub fn weight(&self, action: usize) -> R {
        self.raw[action] * self.normalizer()
    }

    /// Full discounted-frequency vector at the current period.
    pub fn weights(&self) -> FrequencyVector<R> {
        if self.t == 1 {
            return FrequencyVector::zero(self.raw.len());
        }
        let norm = self.normalizer();
        FrequencyVector::from_weights(self.raw.iter().map(|&w| w * norm).collect())
            .expect("discounted weights normalize to a distribution")
    }

    /// Records the action chosen at the current period.
    pub fn advance(&mut self, action: usize) {
        for w in &mut self.raw {
            *w *= self.lambda;
        }
        self.raw[action] += R::one();
        self.lambda_pow *= self.lambda;
        self.t += 1;
    }
}

/// Discounted frequencies `phi^lambda(. | h^(t-1))` computed from scratch;
/// the zero vector for `t = 1`. Valid for `1 <= t <= len + 1`.
pub fn discounted_frequency<R: Real>(
    h: &History,
    t: usize,
    lambda: R,
) -> Result<FrequencyVector<R>, DiscountError> {
    if !(lambda > R::zero() && lambda < R::one()) {
        return Err(DiscountError::LambdaOutOfRange {
            lambda: lambda.as_f64(),
        });
    }
    if t == 0 || t > h.len() + 1 {
        return Err(ModelError::IndexOutOfRange {
            index: t as u64,
            len: h.len() as u64,
        }
        .into());
    }
    if t == 1 {
        return Ok(FrequencyVector::zero(h.n_actions()));
    }
    let mut raw = vec![R::zero(); h.n_actions()];
    let steps: Vec<usize> = h.steps().take(t - 1).collect();
    let mut weight = R::one();
    let mut total = R::zero();
    for &a in steps.iter().rev() {
        raw[a] += weight;
        total += weight;
        weight *= lambda;
    }
    Ok(
        FrequencyVector::from_weights(raw.into_iter().map(|w| w / total).collect())
            .expect("discounted weights normalize to a distribution"),
    )
}

/// A certified bracket for a value known only through truncation: the tail
/// past the truncation depth contributes at most `tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueInterval<R: Real = f64> {
    pub lower: R,
    pub upper: R,
    /// Truncation horizon H.
    pub depth: u64,
    /// `delta^H * max_u`.
    pub tail_bound: R,
}

/// Truncated dual-discount utility of a step stream:
/// `(1-delta) * sum_{t<=H} delta^(t-1) (1 - gamma phi^lambda(a_t|h^(t-1))) u(a_t)`,
/// bracketed by the nonnegative tail.
pub fn discounted_utility<R, I>(
    spec: &ProblemSpec<R>,
    steps: I,
    params: DiscountParams<R>,
    depth: u64,
) -> Result<ValueInterval<R>, DiscountError>
where
    R: Real,
    I: IntoIterator<Item = usize>,
{
    if depth == 0 {
        return Err(DiscountError::DepthTooSmall);
    }
    let gamma = spec.gamma();
    let delta = params.delta();
    let mut state = DiscountedState::new(spec.n_actions(), params.lambda())?;
    let mut sum = R::zero();
    let mut coef = R::one() - delta;
    let mut delta_pow = R::one();
    let mut iter = steps.into_iter();
    for t in 1..=depth {
        let a = iter.next().ok_or(ModelError::GeneratorExhausted {
            needed: depth,
            got: t - 1,
        })?;
        if a >= spec.n_actions() {
            return Err(ModelError::ActionOutOfRange {
                index: a,
                n_actions: spec.n_actions(),
            }
            .into());
        }
        let stage = (R::one() - gamma * state.weight(a)) * spec.payoff(a);
        sum += coef * stage;
        coef *= delta;
        delta_pow *= delta;
        state.advance(a);
    }
    let tail_bound = delta_pow * spec.max_payoff();
    Ok(ValueInterval {
        lower: sum,
        upper: sum + tail_bound,
        depth,
        tail_bound,
    })
}

/// Search limits for [`discounted_value`].
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Beam width for the discounted-state search.
    pub beam_width: usize,
    /// Explicit truncation depth; `None` derives it from `tail_epsilon`.
    pub depth: Option<u64>,
    /// Absolute tail target; `None` means `1e-3 * max_u`. The derived depth
    /// is `ceil(ln(tail_epsilon / max_u) / ln(delta))`.
    pub tail_epsilon: Option<f64>,
    /// Hard cap on the truncation depth.
    pub depth_cap: u64,
    /// Node-expansion budget for the beam; exhausting it stops the search
    /// early and widens the certified interval accordingly.
    pub max_expansions: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            beam_width: 256,
            depth: None,
            tail_epsilon: None,
            depth_cap: 1_000_000,
            max_expansions: 50_000_000,
        }
    }
}

/// Which candidate family produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// Tracking rollout of the optimal stationary frequencies.
    TrackingOptimal,
    /// Greedy stage-payoff-maximizing rollout.
    Greedy,
    /// Beam search over discounted states.
    BeamSearch,
}

impl CandidateKind {
    pub fn name(&self) -> &'static str {
        match self {
            CandidateKind::TrackingOptimal => "tracking",
            CandidateKind::Greedy => "greedy",
            CandidateKind::BeamSearch => "beam",
        }
    }
}

/// Outcome of the bounded search for the dual-discount optimum.
#[derive(Debug, Clone)]
pub struct DiscountedValue<R: Real = f64> {
    pub interval: ValueInterval<R>,
    /// Truncated utilities of every candidate family evaluated; the best one
    /// is the interval's lower end.
    pub candidates: Vec<(CandidateKind, R)>,
    pub best: CandidateKind,
    /// Extra interval width from stopping the beam before the truncation
    /// depth: `(delta^reached - delta^H) * max_u`. Zero on a full run.
    pub search_slack: R,
    /// Depth the beam actually reached.
    pub depth_reached: u64,
    pub budget_exhausted: bool,
    /// Number of near-duplicate states merged away (merge soundness is
    /// heuristic; treat large counts as a caveat on the upper end).
    pub merged_states: u64,
}

fn quantize<R: Real>(raw: &[R], norm: R) -> Vec<i64> {
    let scale = R::of(1e6);
    raw.iter()
        .map(|&w| (w * norm * scale).round().as_f64() as i64)
        .collect()
}

/// Brackets `V^(lambda,delta)` = max over histories of the dual-discount
/// utility.
///
/// Lower bound: best of {tracking at the optimal stationary frequencies,
/// greedy, beam search over discounted states}, each evaluated by truncated
/// rollout — a real achievable value. Upper bound: lower + truncation tail
/// + unexplored-depth slack. The interval contains the truncated utility of
/// every candidate evaluated.
pub fn discounted_value<R: Real>(
    spec: &ProblemSpec<R>,
    params: DiscountParams<R>,
    budget: &SearchBudget,
) -> Result<DiscountedValue<R>, DiscountError> {
    if budget.beam_width == 0 {
        return Err(DiscountError::BadBeamWidth);
    }
    let k = spec.n_actions();
    let gamma = spec.gamma();
    let delta = params.delta();
    let lambda = params.lambda();
    let max_u = spec.max_payoff();

    if max_u == R::zero() {
        // Every history pays zero.
        return Ok(DiscountedValue {
            interval: ValueInterval {
                lower: R::zero(),
                upper: R::zero(),
                depth: 1,
                tail_bound: R::zero(),
            },
            candidates: vec![(CandidateKind::TrackingOptimal, R::zero())],
            best: CandidateKind::TrackingOptimal,
            search_slack: R::zero(),
            depth_reached: 1,
            budget_exhausted: false,
            merged_states: 0,
        });
    }

    let depth = match budget.depth {
        Some(d) => {
            if d == 0 {
                return Err(DiscountError::DepthTooSmall);
            }
            d.min(budget.depth_cap)
        }
        None => {
            let eps = budget.tail_epsilon.unwrap_or(1e-3 * max_u.as_f64());
            let h = (eps / max_u.as_f64()).ln() / delta.as_f64().ln();
            (h.ceil().max(1.0) as u64).min(budget.depth_cap)
        }
    };

    // Rollout candidates.
    let x_star = optimal_stationary(spec).x;
    let tracking = generate_tracking(spec, &x_star, depth as usize)
        .expect("optimal frequencies are a valid target");
    let tracking_value = discounted_utility(spec, tracking.steps(), params, depth)?.lower;
    let greedy = generate_greedy(spec, depth as usize);
    let greedy_value = discounted_utility(spec, greedy.steps(), params, depth)?.lower;

    // Beam over discounted states. All nodes at a layer share the period, so
    // the normalizer is common and keys quantize normalized weights.
    struct Node<R> {
        raw: Vec<R>,
        value: R,
    }
    let mut nodes = vec![Node {
        raw: vec![R::zero(); k],
        value: R::zero(),
    }];
    let mut coef = R::one() - delta;
    let mut lambda_pow = R::one(); // lambda^(t-1)
    let mut delta_pow = R::one(); // delta^t after stage t
    let mut expansions: u64 = 0;
    let mut merged: u64 = 0;
    let mut depth_reached = 0u64;
    let mut budget_exhausted = false;

    for t in 1..=depth {
        if expansions.saturating_add(nodes.len() as u64 * k as u64) > budget.max_expansions {
            budget_exhausted = true;
            break;
        }
        let norm = if t == 1 {
            R::zero()
        } else {
            (R::one() - lambda) / (R::one() - lambda_pow)
        };
        let mut children: Vec<(Vec<i64>, Node<R>)> =
            Vec::with_capacity(nodes.len() * k);
        for node in &nodes {
            for a in 0..k {
                let phi = node.raw[a] * norm;
                let stage = (R::one() - gamma * phi) * spec.payoff(a);
                let mut raw: Vec<R> = node.raw.iter().map(|&w| w * lambda).collect();
                raw[a] += R::one();
                let value = node.value + coef * stage;
                let next_norm = (R::one() - lambda) / (R::one() - lambda_pow * lambda);
                children.push((quantize(&raw, next_norm), Node { raw, value }));
                expansions += 1;
            }
        }
        // Merge equal keys keeping the best value; deterministic because the
        // sort is total on (value desc, key asc) and the set is only used
        // for membership.
        children.sort_by(|a, b| {
            b.1.value
                .partial_cmp(&a.1.value)
                .unwrap()
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(children.len());
        let mut kept: Vec<Node<R>> = Vec::with_capacity(budget.beam_width);
        for (key, node) in children {
            if kept.len() >= budget.beam_width {
                break;
            }
            if seen.insert(key) {
                kept.push(node);
            } else {
                merged += 1;
            }
        }
        nodes = kept;
        coef *= delta;
        lambda_pow *= lambda;
        delta_pow *= delta;
        depth_reached = t;
    }

    let beam_value = nodes
        .iter()
        .map(|n| n.value)
        .fold(R::neg_infinity(), |m, v| if v > m { v } else { m });

    let candidates = vec![
        (CandidateKind::TrackingOptimal, tracking_value),
        (CandidateKind::Greedy, greedy_value),
        (CandidateKind::BeamSearch, beam_value),
    ];
    let (best, lower) = candidates
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("three candidates");

    let tail_bound = delta.powi(depth as i32) * max_u;
    let search_slack = if budget_exhausted {
        (delta.powi(depth_reached as i32) - delta.powi(depth as i32)) * max_u
    } else {
        R::zero()
    };
    Ok(DiscountedValue {
        interval: ValueInterval {
            lower,
            upper: lower + tail_bound + search_slack,
            depth,
            tail_bound,
        },
        candidates,
        best,
        search_slack,
        depth_reached,
        budget_exhausted,
        merged_states: merged,
    })
}

/// The default patience rule mapping a past-use discount to a future
/// discount: `delta = max(0.99, 1 - (1 - lambda) / 4)`.
pub fn default_delta_rule<R: Real>(lambda: R) -> R {
    let candidate = R::one() - (R::one() - lambda) / R::of(4.0);
    if candidate > R::of(0.99) {
        candidate
    } else {
        R::of(0.99)
    }
}

/// One `(lambda, delta)` grid entry of [`patience_sweep`].
#[derive(Debug, Clone)]
pub struct PatienceRow<R: Real = f64> {
    pub lambda: R,
    pub delta: R,
    pub stationary_value: R,
    pub outcome: DiscountedValue<R>,
    /// `lower - V*` and `upper - V*`.
    pub excess_lower: R,
    pub excess_upper: R,
}

/// Discounted-value brackets across a patience grid, with the excess over
/// the stationary optimum per entry.
#[derive(Debug, Clone)]
pub struct PatienceSweep<R: Real = f64> {
    pub rows: Vec<PatienceRow<R>>,
    /// Whether `upper - V*` never increases along the grid — the pattern the
    /// patient-limit theory predicts.
    pub excess_upper_nonincreasing: bool,
}

/// Runs [`discounted_value`] for every `(lambda, delta)` pair produced by
/// the rule, in grid order (grid points evaluated in parallel).
pub fn patience_sweep<R, F>(
    spec: &ProblemSpec<R>,
    lambda_grid: &[R],
    delta_rule: F,
    budget: &SearchBudget,
) -> Result<PatienceSweep<R>, DiscountError>
where
    R: Real,
    F: Fn(R) -> Vec<R>,
{
    if lambda_grid.is_empty()
        || lambda_grid
            .iter()
            .any(|&l| !(l > R::zero() && l < R::one()))
        || lambda_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(DiscountError::BadGrid);
    }
    let mut pairs = Vec::new();
    for &lambda in lambda_grid {
        for delta in delta_rule(lambda) {
            pairs.push(DiscountParams::new(lambda, delta)?);
        }
    }
    let v_star = optimal_stationary(spec).value;
    let rows: Vec<PatienceRow<R>> = pairs
        .par_iter()
        .map(|&params| {
            discounted_value(spec, params, budget).map(|outcome| PatienceRow {
                lambda: params.lambda(),
                delta: params.delta(),
                stationary_value: v_star,
                excess_lower: outcome.interval.lower - v_star,
                excess_upper: outcome.interval.upper - v_star,
                outcome,
            })
        })
        .collect::<Result<_, _>>()?;
    let excess_upper_nonincreasing = rows
        .windows(2)
        .all(|w| w[1].excess_upper <= w[0].excess_upper + R::tol_simplex());
    Ok(PatienceSweep {
        rows,
        excess_upper_nonincreasing,
    })
}
