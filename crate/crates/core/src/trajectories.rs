//! History generators, block statistics, and pairwise-swap improvement.
//!
//! Generators: the greedy stage-payoff maximizer, a frequency-tracking rule
//! that realizes a target distribution (deviation at most `|A| / t` at every
//! prefix), the two-action doubling-block sequence whose average utility
//! oscillates forever, and cyclic realizations of rational frequency targets.
//!
//! Block statistics compare the realized average payoff of a history block
//! against the frequency-weighted prediction from the block-start
//! frequencies; the two differ by at most `2 ((t2-t1)/t1) gamma sum_a u(a)`.
//!
//! Swapping an early occurrence of one action with a later occurrence of
//! another (neither occurring in between) changes the average utility by at
//! least `gamma (s-t) / ((s-1) T) * (phi(a|h^{t-1}) u(a) - phi(b|h^{t-1}) u(b))`.
//! The swap pass applies such exchanges between the best- and worst-paying
//! actions until no further exchange clears a threshold margin, which pushes
//! cheap actions early and expensive actions late.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{
    average_utility, stage_payoff_from_counts, FrequencyVector, History, ModelError, ProblemSpec,
};
use crate::real::Real;
use crate::stationary::optimal_stationary;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("block bounds must satisfy 1 <= t1 < t2 <= length; got t1={t1}, t2={t2}, len={len}")]
    BlockOrder { t1: u64, t2: u64, len: u64 },
    #[error("swap positions must satisfy 1 <= t < s <= length; got t={t}, s={s}, len={len}")]
    SwapOrder { t: u64, s: u64, len: u64 },
    #[error("swap positions {t} and {s} hold the same action")]
    SwapSameAction { t: u64, s: u64 },
    #[error("the action at position {t} occurs again at {at}, inside the swap window")]
    EarlyActionRecurs { t: u64, at: u64 },
    #[error("the action at position {s} already occurs at {at}, inside the swap window")]
    LateActionRecurs { s: u64, at: u64 },
    #[error("evaluation horizon must satisfy s <= horizon <= length; got s={s}, horizon={horizon}, len={len}")]
    SwapHorizon { s: u64, horizon: u64, len: u64 },
    #[error("swap window must satisfy 1 <= prefix < horizon <= length; got prefix={prefix}, horizon={horizon}, len={len}")]
    SwapWindow { prefix: u64, horizon: u64, len: u64 },
    #[error("swap threshold must be strictly positive, got {threshold}")]
    BadThreshold { threshold: f64 },
    #[error("cycle denominator bound must be at least 1")]
    BadDenominator,
    #[error("run-length text line {line}: expected `action:count`")]
    RleSyntax { line: usize },
    #[error("run-length text line {line}: count must be a positive integer")]
    RleCount { line: usize },
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// History that maximizes the stage payoff at every period; ties go to the
/// earliest action in input order.
pub fn generate_greedy<R: Real>(spec: &ProblemSpec<R>, t_max: usize) -> History {
    let n = spec.n_actions();
    let gamma = spec.gamma();
    let mut h = History::with_capacity(n, t_max);
    let mut counts = vec![0u64; n];
    for t_prev in 0..t_max as u64 {
        let mut best = 0usize;
        let mut best_value = R::neg_infinity();
        for a in 0..n {
            let value = stage_payoff_from_counts(gamma, spec.payoff(a), counts[a], t_prev);
            if value > best_value {
                best = a;
                best_value = value;
            }
        }
        counts[best] += 1;
        h.push(best).expect("action index in range");
    }
    h
}

/// History that tracks a target distribution by always choosing the most
/// under-represented action (ties toward higher payoff, then input order).
///
/// The realized frequencies satisfy `|phi(a|h^t) - target(a)| <= |A| / t`
/// for every prefix.
pub fn generate_tracking<R: Real>(
    spec: &ProblemSpec<R>,
    target: &FrequencyVector<R>,
    t_max: usize,
) -> Result<History, TrajectoryError> {
    if target.len() != spec.n_actions() {
        return Err(ModelError::DimensionMismatch {
            expected: spec.n_actions(),
            got: target.len(),
        }
        .into());
    }
    if target.is_zero() {
        return Err(ModelError::ZeroFrequencies.into());
    }
    let n = spec.n_actions();
    let mut h = History::with_capacity(n, t_max);
    let mut counts = vec![0u64; n];
    for t_prev in 0..t_max as u64 {
        let tp = R::from_count(t_prev);
        let mut best = 0usize;
        let mut best_deficit = R::infinity();
        for a in 0..n {
            // Actions outside the target support would deviate permanently.
            if target.get(a) == R::zero() {
                continue;
            }
            // Same ordering as phi(a) - target(a); scaling by t_prev would
            // collapse the empty prefix, where phi is zero.
            let deficit = if t_prev == 0 {
                -target.get(a)
            } else {
                R::from_count(counts[a]) - tp * target.get(a)
            };
            if deficit < best_deficit
                || (deficit == best_deficit && spec.payoff(a) > spec.payoff(best))
            {
                best = a;
                best_deficit = deficit;
            }
        }
        counts[best] += 1;
        h.push(best).expect("action index in range");
    }
    Ok(h)
}

/// The two-action sequence `a, b, a` followed by blocks spanning
/// `(3*2^m, 3*2^(m+1)]` that alternate `b` (even `m`) and `a` (odd `m`):
/// `a, b, a, b, b, b, a, a, a, a, a, a, b, ...`, truncated at `t_max`.
///
/// Each block is as long as the whole history before it, so the frequency of
/// the block's action climbs from 1/3 to 2/3 within the block and the
/// average-utility sequence oscillates forever. Action indices: `a = 0`,
/// `b = 1`.
pub fn generate_doubling_blocks(t_max: usize) -> History {
    let mut h = History::with_capacity(2, t_max);
    for a in [0usize, 1, 0] {
        if h.len() < t_max {
            h.push(a).expect("two actions");
        }
    }
    let mut block_len = 3usize;
    let mut action = 1usize;
    while h.len() < t_max {
        for _ in 0..block_len {
            if h.len() >= t_max {
                break;
            }
            h.push(action).expect("two actions");
        }
        block_len *= 2;
        action = 1 - action;
    }
    h
}

/// Rounds a frequency target to `k_a / m` with the smallest denominator
/// `m <= max_denominator` (largest-remainder apportionment) and lays out one
/// cycle of length `m` by the tracking rule restricted to remaining quotas.
///
/// Repeating the returned pattern realizes the rounded frequencies exactly at
/// every multiple of `m`.
pub fn stationary_cycle<R: Real>(
    spec: &ProblemSpec<R>,
    target: &FrequencyVector<R>,
    max_denominator: usize,
) -> Result<Vec<usize>, TrajectoryError> {
    if max_denominator == 0 {
        return Err(TrajectoryError::BadDenominator);
    }
    if target.len() != spec.n_actions() {
        return Err(ModelError::DimensionMismatch {
            expected: spec.n_actions(),
            got: target.len(),
        }
        .into());
    }
    if target.is_zero() {
        return Err(ModelError::ZeroFrequencies.into());
    }
    let n = spec.n_actions();

    let apportion = |m: usize| -> Vec<u64> {
        let mut counts: Vec<u64> = (0..n)
            .map(|a| (target.get(a) * R::from_count(m as u64)).floor().as_f64() as u64)
            .collect();
        let assigned: u64 = counts.iter().sum();
        let mut rest: Vec<usize> = (0..n).collect();
        rest.sort_by(|&a, &b| {
            let fa = target.get(a) * R::from_count(m as u64) - R::from_count(counts[a]);
            let fb = target.get(b) * R::from_count(m as u64) - R::from_count(counts[b]);
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        for &a in rest.iter().take((m as u64 - assigned) as usize) {
            counts[a] += 1;
        }
        counts
    };

    let mut best_m = 1usize;
    let mut best_err = R::infinity();
    for m in 1..=max_denominator {
        let counts = apportion(m);
        let err = (0..n)
            .map(|a| (R::from_count(counts[a]) / R::from_count(m as u64) - target.get(a)).abs())
            .fold(R::zero(), |acc, e| if e > acc { e } else { acc });
        if err < best_err {
            best_err = err;
            best_m = m;
        }
        if best_err <= R::tol_agree() {
            break;
        }
    }
    let quotas = apportion(best_m);

    // Quota-capped tracking layout: exact integer arithmetic, deterministic.
    let mut pattern = Vec::with_capacity(best_m);
    let mut placed = vec![0u64; n];
    for j in 0..best_m as u64 {
        let mut best: Option<usize> = None;
        let mut best_deficit = i128::MAX;
        for a in 0..n {
            if placed[a] >= quotas[a] {
                continue;
            }
            // placed[a]/j - quotas[a]/m, scaled by j*m; the empty prefix
            // orders by quota alone.
            let deficit = if j == 0 {
                -(quotas[a] as i128)
            } else {
                placed[a] as i128 * best_m as i128 - j as i128 * quotas[a] as i128
            };
            let better = match best {
                None => true,
                Some(b) => {
                    deficit < best_deficit
                        || (deficit == best_deficit && spec.payoff(a) > spec.payoff(b))
                }
            };
            if better {
                best = Some(a);
                best_deficit = deficit;
            }
        }
        let a = best.expect("quotas sum to the cycle length");
        placed[a] += 1;
        pattern.push(a);
    }
    Ok(pattern)
}

/// Infinite repetition of a cycle pattern, truncated at `t_max`.
pub fn generate_cyclic(n_actions: usize, pattern: &[usize], t_max: usize) -> Result<History, TrajectoryError> {
    let mut h = History::with_capacity(n_actions, t_max);
    for t in 0..t_max {
        h.push(pattern[t % pattern.len()])?;
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Block statistics
// ---------------------------------------------------------------------------

/// Statistics of the block `(t1, t2]` of a history: realized average payoff,
/// within-block frequencies, the frequency-weighted prediction from the
/// block-start frequencies, and the bound on their gap.
#[derive(Debug, Clone)]
pub struct BlockStats<R: Real = f64> {
    pub t1: u64,
    pub t2: u64,
    /// Realized average payoff of the block (W).
    pub average_payoff: R,
    /// Within-block action frequencies (p).
    pub block_frequencies: FrequencyVector<R>,
    /// Prediction from block-start frequencies:
    /// `sum_a p(a) (1 - gamma phi(a|h^t1)) u(a)`.
    pub approximation: R,
    /// `2 ((t2-t1)/t1) gamma sum_a u(a)`; always >= |W - approximation|.
    pub error_bound: R,
}

/// Computes block statistics and asserts the approximation bound.
///
/// Panics if `|W - approximation|` exceeds the bound: that inequality is a
/// theorem, so a violation is an implementation bug.
pub fn block_stats<R: Real>(
    spec: &ProblemSpec<R>,
    h: &History,
    t1: usize,
    t2: usize,
) -> Result<BlockStats<R>, TrajectoryError> {
    if !(1 <= t1 && t1 < t2 && t2 <= h.len()) {
        return Err(TrajectoryError::BlockOrder {
            t1: t1 as u64,
            t2: t2 as u64,
            len: h.len() as u64,
        });
    }
    let n = spec.n_actions();
    let gamma = spec.gamma();
    let start_counts = h.counts_at(t1)?;
    let mut counts = start_counts.clone();
    let mut block_counts = vec![0u64; n];
    let mut total = R::zero();
    for (idx, a) in h.steps().enumerate().take(t2).skip(t1) {
        total += stage_payoff_from_counts(gamma, spec.payoff(a), counts[a], idx as u64);
        counts[a] += 1;
        block_counts[a] += 1;
    }
    let width = R::from_count((t2 - t1) as u64);
    let average_payoff = total / width;
    let block_frequencies = FrequencyVector::from_counts(&block_counts, (t2 - t1) as u64);
    let t1_r = R::from_count(t1 as u64);
    let approximation = (0..n)
        .map(|a| {
            block_frequencies.get(a)
                * (R::one() - gamma * (R::from_count(start_counts[a]) / t1_r))
                * spec.payoff(a)
        })
        .sum();
    let error_bound = R::two() * (width / t1_r) * gamma * spec.payoff_sum();
    let stats = BlockStats {
        t1: t1 as u64,
        t2: t2 as u64,
        average_payoff,
        block_frequencies,
        approximation,
        error_bound,
    };
    assert!(
        (stats.average_payoff - stats.approximation).abs() <= stats.error_bound,
        "block approximation bound violated on ({t1}, {t2}]: |{} - {}| > {}",
        stats.average_payoff,
        stats.approximation,
        stats.error_bound,
    );
    Ok(stats)
}

// ---------------------------------------------------------------------------
// Pairwise swaps
// ---------------------------------------------------------------------------

/// A performed exchange of positions `t < s` and its certified gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapRecord<R: Real = f64> {
    /// Earlier position (1-indexed); held `action_early` before the swap.
    pub t: u64,
    /// Later position; held `action_late` before the swap.
    pub s: u64,
    pub action_early: usize,
    pub action_late: usize,
    /// Lower bound on the average-utility gain at the evaluation horizon:
    /// `gamma (s-t) / ((s-1) T) * (phi(early|h^{t-1}) u(early) - phi(late|h^{t-1}) u(late))`,
    /// computed from exact integer counts.
    pub guaranteed_gain: R,
}

fn swap_gain<R: Real>(
    spec: &ProblemSpec<R>,
    counts_before_t: &[u64],
    early: usize,
    late: usize,
    t: u64,
    s: u64,
    horizon: u64,
) -> R {
    if t == 1 {
        // Empty-prefix frequencies are zero on both sides.
        return R::zero();
    }
    let weighted = R::from_count(counts_before_t[early]) * spec.payoff(early)
        - R::from_count(counts_before_t[late]) * spec.payoff(late);
    spec.gamma() * R::from_count(s - t) * weighted
        / (R::from_count(t - 1) * R::from_count(s - 1) * R::from_count(horizon))
}

/// Swaps the actions at positions `t < s` and returns the new history with a
/// certified lower bound on the average-utility change at `horizon`.
///
/// Neither the action at `t` nor the action at `s` may occur strictly
/// between them; without that the certified gain does not hold (an
/// intermediate occurrence of the late action would see its frequency rise).
/// Asserts `U^T(new) - U^T(old) >= guaranteed_gain` by from-scratch
/// recomputation, so each call costs O(horizon).
pub fn apply_swap<R: Real>(
    spec: &ProblemSpec<R>,
    h: &History,
    t: usize,
    s: usize,
    horizon: usize,
) -> Result<(History, SwapRecord<R>), TrajectoryError> {
    if !(1 <= t && t < s && s <= h.len()) {
        return Err(TrajectoryError::SwapOrder {
            t: t as u64,
            s: s as u64,
            len: h.len() as u64,
        });
    }
    if !(s <= horizon && horizon <= h.len()) {
        return Err(TrajectoryError::SwapHorizon {
            s: s as u64,
            horizon: horizon as u64,
            len: h.len() as u64,
        });
    }
    let early = h.step(t)?;
    let late = h.step(s)?;
    if early == late {
        return Err(TrajectoryError::SwapSameAction {
            t: t as u64,
            s: s as u64,
        });
    }
    for p in t + 1..s {
        let a = h.step(p)?;
        if a == early {
            return Err(TrajectoryError::EarlyActionRecurs {
                t: t as u64,
                at: p as u64,
            });
        }
        if a == late {
            return Err(TrajectoryError::LateActionRecurs {
                s: s as u64,
                at: p as u64,
            });
        }
    }
    let counts_before_t = h.counts_at(t - 1)?;
    let guaranteed_gain = swap_gain(
        spec,
        &counts_before_t,
        early,
        late,
        t as u64,
        s as u64,
        horizon as u64,
    );
    let mut swapped = h.clone();
    swapped.swap_steps(t, s);
    let before = average_utility(spec, h, horizon)?;
    let after = average_utility(spec, &swapped, horizon)?;
    assert!(
        after - before >= guaranteed_gain - R::tol_simplex(),
        "swap gain bound violated at (t={t}, s={s}): {} < {}",
        after - before,
        guaranteed_gain,
    );
    Ok((
        swapped,
        SwapRecord {
            t: t as u64,
            s: s as u64,
            action_early: early,
            action_late: late,
            guaranteed_gain,
        },
    ))
}

/// Window and margin for [`beneficial_swap_pass`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapPassConfig<R: Real = f64> {
    /// End of the protected prefix (T1); positions <= this are never touched.
    pub protected_prefix: u64,
    /// Evaluation horizon (T); swaps happen in (protected_prefix, horizon].
    pub horizon: u64,
    /// Margin a candidate exchange must clear. `None` uses
    /// `(u(best) - u(worst)) / (4 gamma)` over the actions occurring in the
    /// window's history.
    pub threshold: Option<R>,
}

impl<R: Real> SwapPassConfig<R> {
    pub fn new(protected_prefix: u64, horizon: u64) -> Self {
        Self {
            protected_prefix,
            horizon,
            threshold: None,
        }
    }

    pub fn with_threshold(mut self, threshold: R) -> Self {
        self.threshold = Some(threshold);
        self
    }

    /// Default protected prefix: the smallest multiple of `cycle_len` at
    /// which the realized frequencies are within 1e-3 of the optimal
    /// stationary frequencies, capped at `horizon / 2`.
    pub fn auto(
        spec: &ProblemSpec<R>,
        h: &History,
        horizon: u64,
        cycle_len: usize,
    ) -> Result<Self, TrajectoryError> {
        if horizon < 2 || horizon > h.len() as u64 {
            return Err(TrajectoryError::SwapWindow {
                prefix: 0,
                horizon,
                len: h.len() as u64,
            });
        }
        let x = optimal_stationary(spec).x;
        let cap = ((horizon / 2).max(1)) as usize;
        let tol = R::of(1e-3);
        let mut counts = vec![0u64; spec.n_actions()];
        let mut found = cap as u64;
        for (idx, a) in h.steps().take(cap).enumerate() {
            counts[a] += 1;
            let t = idx + 1;
            if t % cycle_len != 0 {
                continue;
            }
            let deviation = (0..spec.n_actions())
                .map(|b| (R::from_count(counts[b]) / R::from_count(t as u64) - x.get(b)).abs())
                .fold(R::zero(), |m, d| if d > m { d } else { m });
            if deviation <= tol {
                found = t as u64;
                break;
            }
        }
        Ok(Self::new(found, horizon))
    }
}

/// Result of a swap pass: the improved history, the ordered swap log, and the
/// cumulative certified gain.
#[derive(Debug, Clone)]
pub struct SwapPass<R: Real = f64> {
    pub history: History,
    pub records: Vec<SwapRecord<R>>,
    pub guaranteed_gain: R,
}

/// One-based Fenwick tree over occurrence indicators.
struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn with_len(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, mut i: usize, delta: i64) {
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> u64 {
        let mut sum = 0i64;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum as u64
    }
}

/// Repeatedly exchanges the first occurrence of the worst-paying action in
/// the window with the last preceding occurrence of the best-paying action,
/// whenever the frequency-weighted payoff gap at the earlier position clears
/// the threshold; iterates to a fixpoint.
///
/// Every swap moves the cheap action strictly earlier and the expensive
/// action strictly later, so the pass terminates after at most
/// `(#cheap in window) * (#expensive in window)` swaps. If all payoffs among
/// the occurring actions are equal there is nothing to exchange and the
/// input is returned unchanged.
pub fn beneficial_swap_pass<R: Real>(
    spec: &ProblemSpec<R>,
    h: &History,
    config: &SwapPassConfig<R>,
) -> Result<SwapPass<R>, TrajectoryError> {
    let prefix = config.protected_prefix;
    let horizon = config.horizon;
    if !(1 <= prefix && prefix < horizon && horizon <= h.len() as u64) {
        return Err(TrajectoryError::SwapWindow {
            prefix,
            horizon,
            len: h.len() as u64,
        });
    }
    let t_max = horizon as usize;

    // Best and worst payoff among actions that actually occur up to the
    // horizon; ties resolve to the earliest action in input order.
    let mut present = vec![false; spec.n_actions()];
    for a in h.steps().take(t_max) {
        present[a] = true;
    }
    let occurring: Vec<usize> = (0..spec.n_actions()).filter(|&a| present[a]).collect();
    let hi = *occurring
        .iter()
        .max_by(|&&a, &&b| spec.payoff(a).partial_cmp(&spec.payoff(b)).unwrap())
        .expect("history is nonempty");
    let lo = *occurring
        .iter()
        .min_by(|&&a, &&b| spec.payoff(a).partial_cmp(&spec.payoff(b)).unwrap())
        .expect("history is nonempty");
    if spec.payoff(hi) == spec.payoff(lo) {
        return Ok(SwapPass {
            history: h.clone(),
            records: Vec::new(),
            guaranteed_gain: R::zero(),
        });
    }
    let threshold = match config.threshold {
        Some(th) => {
            if th <= R::zero() {
                return Err(TrajectoryError::BadThreshold {
                    threshold: th.as_f64(),
                });
            }
            th
        }
        None => (spec.payoff(hi) - spec.payoff(lo)) / (R::of(4.0) * spec.gamma()),
    };

    let mut fen_hi = Fenwick::with_len(t_max);
    let mut fen_lo = Fenwick::with_len(t_max);
    let mut pos_hi: BTreeSet<u64> = BTreeSet::new();
    let mut pos_lo: BTreeSet<u64> = BTreeSet::new();
    for (idx, a) in h.steps().take(t_max).enumerate() {
        let pos = (idx + 1) as u64;
        if a == hi {
            fen_hi.add(pos as usize, 1);
            if pos > prefix {
                pos_hi.insert(pos);
            }
        } else if a == lo {
            fen_lo.add(pos as usize, 1);
            if pos > prefix {
                pos_lo.insert(pos);
            }
        }
    }

    let u_hi = spec.payoff(hi);
    let u_lo = spec.payoff(lo);
    let gamma = spec.gamma();
    let before = average_utility(spec, h, t_max)?;
    let swap_cap = pos_hi.len() as u64 * pos_lo.len() as u64 + 1;

    let mut out = h.clone();
    let mut records: Vec<SwapRecord<R>> = Vec::new();
    let mut guaranteed = R::zero();

    // Scan cursor over occurrences of the cheap action. Skipped occurrences
    // stay skipped: their test depends only on prefix counts strictly before
    // their preceding expensive occurrence, and later swaps never alter
    // those counts. After a swap the moved occurrence may cascade further
    // left, so the cursor jumps back to it.
    let mut cursor = prefix + 1;
    loop {
        let s = match pos_lo.range(cursor..).next() {
            Some(&s) => s,
            None => break,
        };
        let t = match pos_hi.range(..s).next_back() {
            Some(&t) => t,
            None => {
                cursor = s + 1;
                continue;
            }
        };
        // t > prefix >= 1, so the frequency prefix t-1 is nonempty.
        let cnt_hi = fen_hi.prefix((t - 1) as usize);
        let cnt_lo = fen_lo.prefix((t - 1) as usize);
        let weighted = R::from_count(cnt_hi) * u_hi - R::from_count(cnt_lo) * u_lo;
        let margin = weighted / R::from_count(t - 1);
        if margin >= threshold {
            out.swap_steps(t as usize, s as usize);
            fen_hi.add(t as usize, -1);
            fen_hi.add(s as usize, 1);
            fen_lo.add(t as usize, 1);
            fen_lo.add(s as usize, -1);
            pos_hi.remove(&t);
            pos_hi.insert(s);
            pos_lo.remove(&s);
            pos_lo.insert(t);
            let gain = gamma * R::from_count(s - t) * margin
                / (R::from_count(s - 1) * R::from_count(horizon));
            guaranteed += gain;
            records.push(SwapRecord {
                t,
                s,
                action_early: hi,
                action_late: lo,
                guaranteed_gain: gain,
            });
            assert!(
                records.len() as u64 <= swap_cap,
                "swap pass exceeded its termination bound"
            );
            cursor = t;
        } else {
            cursor = s + 1;
        }
    }

    let after = average_utility(spec, &out, t_max)?;
    assert!(
        after - before >= guaranteed - R::tol_agree(),
        "cumulative swap gain bound violated: {} < {}",
        after - before,
        guaranteed,
    );
    Ok(SwapPass {
        history: out,
        records,
        guaranteed_gain: guaranteed,
    })
}

// ---------------------------------------------------------------------------
// Run-length history interchange
// ---------------------------------------------------------------------------

/// Encodes a history as run-length text, one `action:count` pair per line.
pub fn encode_rle(h: &History, names: &[String]) -> Result<String, TrajectoryError> {
    if names.len() != h.n_actions() {
        return Err(ModelError::DimensionMismatch {
            expected: h.n_actions(),
            got: names.len(),
        }
        .into());
    }
    let mut text = String::new();
    let mut run: Option<(usize, u64)> = None;
    for a in h.steps() {
        match run {
            Some((current, count)) if current == a => run = Some((current, count + 1)),
            Some((current, count)) => {
                text.push_str(&format!("{}:{}\n", names[current], count));
                run = Some((a, 1));
            }
            None => run = Some((a, 1)),
        }
    }
    if let Some((current, count)) = run {
        text.push_str(&format!("{}:{}\n", names[current], count));
    }
    Ok(text)
}

/// Parses run-length text back into a history. `#` starts a comment; blank
/// lines are ignored. Must round-trip [`encode_rle`] exactly.
pub fn decode_rle(text: &str, names: &[String]) -> Result<History, TrajectoryError> {
    let mut h = History::new(names.len());
    for (idx, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (name, count) = line
            .rsplit_once(':')
            .ok_or(TrajectoryError::RleSyntax { line: idx + 1 })?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| TrajectoryError::RleCount { line: idx + 1 })?;
        if count == 0 {
            return Err(TrajectoryError::RleCount { line: idx + 1 });
        }
        let name = name.trim();
        let action = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownAction {
                name: name.to_string(),
            })?;
        for _ in 0..count {
            h.push(action)?;
        }
    }
    Ok(h)
}
