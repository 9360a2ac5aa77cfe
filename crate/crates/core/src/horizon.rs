//! Exact finite-horizon optima by dynamic programming on the count lattice.
//!
//! The stage payoff of choosing `a` after `t` periods depends only on the
//! occurrence count of `a` so far, not on the order of past choices. The
//! maximal total payoff over all orderings reaching a given count vector is
//! therefore well-defined, and the optimum over `A^T` is a dynamic program
//! over count vectors `n` with `sum n = t` — `O(T^(|A|-1))` states per layer
//! instead of `|A|^T` histories. `v^T` is the best full-count state divided
//! by `T`.
//!
//! Totals are accumulated left-to-right with plain additions so the DP and
//! the exhaustive oracle [`v_enumerate`] produce bit-identical values.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{stage_payoff_from_counts, History, ModelError, ProblemSpec};
use crate::real::Real;
use crate::stationary::optimal_stationary;

/// Default cap on the total number of lattice states.
pub const DEFAULT_STATE_CAP: u64 = 200_000_000;

/// Guard on the exhaustive oracle's search space.
pub const ENUMERATION_CAP: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HorizonError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("count lattice needs {states} states, exceeding the cap of {cap}; reduce the horizon or the action count")]
    LatticeTooLarge { states: u64, cap: u64 },
    #[error("enumeration space |A|^T = {histories:e} exceeds the guard of {cap:e}")]
    EnumerationTooLarge { histories: f64, cap: f64 },
    #[error("witness reconstruction supports at most 255 actions, got {n_actions}")]
    TooManyActions { n_actions: usize },
    #[error("horizon grid must be non-empty and strictly ascending")]
    BadGrid,
}

/// An exact finite-horizon optimum: the value `v^T`, a history achieving it,
/// and the number of lattice states expanded.
#[derive(Debug, Clone)]
pub struct HorizonResult<R: Real = f64> {
    pub horizon: u64,
    pub value: R,
    pub witness: History,
    pub states_expanded: u64,
}

fn binom_checked(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 1..=r {
        // acc stays C(n - r + i, i) exactly at each step.
        let wide = acc as u128 * (n - r + i) as u128 / i as u128;
        if wide > u64::MAX as u128 {
            return None;
        }
        acc = wide as u64;
    }
    Some(acc)
}

/// `comb[i][j] = C(i, j)` for `i <= max_n`, `j <= max_k`. All entries used by
/// the rank computation are bounded by the (already guarded) total state
/// count, so plain u64 arithmetic is safe.
fn binomial_table(max_n: usize, max_k: usize) -> Vec<Vec<u64>> {
    let mut comb = vec![vec![0u64; max_k + 1]; max_n + 1];
    for i in 0..=max_n {
        comb[i][0] = 1;
        for j in 1..=max_k.min(i) {
            comb[i][j] = comb[i - 1][j - 1] + if j <= i - 1 { comb[i - 1][j] } else { 0 };
        }
    }
    comb
}

/// Rank of a count vector among all compositions of `t` into `k` parts in
/// ascending lexicographic order.
#[inline]
fn rank(state: &[u32], t: usize, comb: &[Vec<u64>]) -> usize {
    let k = state.len();
    let mut rank = 0u64;
    let mut remaining = t;
    for i in 0..k - 1 {
        let parts = k - 1 - i;
        let c = state[i] as usize;
        if c > 0 {
            // Compositions with a smaller value at coordinate i, prefix fixed:
            // sum_{v < c} C(remaining - v + parts - 1, parts - 1).
            rank += comb[remaining + parts][parts] - comb[remaining - c + parts][parts];
        }
        remaining -= c;
    }
    rank as usize
}

/// Visits all compositions of `t` into `state.len()` parts in ascending
/// lexicographic order (the same order as [`rank`]).
fn for_each_state(state: &mut [u32], coord: usize, left: u32, f: &mut impl FnMut(&[u32])) {
    if coord == state.len() - 1 {
        state[coord] = left;
        f(state);
        return;
    }
    for v in 0..=left {
        state[coord] = v;
        for_each_state(state, coord + 1, left - v, f);
    }
    state[coord] = 0;
}

/// Exact `v^T` with the default state cap.
pub fn v_exact<R: Real>(spec: &ProblemSpec<R>, horizon: usize) -> Result<HorizonResult<R>, HorizonError> {
    v_exact_capped(spec, horizon, DEFAULT_STATE_CAP)
}

/// Exact `v^T` by layered DP over count vectors.
///
/// The DP value at a state is the maximal total payoff of any ordering
/// reaching those counts; the transition from counts `n` (with `sum n = t`)
/// to `n + e_a` adds `(1 - gamma * n_a / t) * u(a)` (and `u(a)` alone at
/// `t = 0`). Witnesses are reconstructed from stored predecessor actions;
/// value ties prefer the higher-payoff action, then input order.
pub fn v_exact_capped<R: Real>(
    spec: &ProblemSpec<R>,
    horizon: usize,
    state_cap: u64,
) -> Result<HorizonResult<R>, HorizonError> {
    if horizon == 0 {
        return Err(ModelError::EmptyHorizon.into());
    }
    let k = spec.n_actions();
    if k > 255 {
        return Err(HorizonError::TooManyActions { n_actions: k });
    }
    let total_states = binom_checked((horizon + k) as u64, k as u64)
        .ok_or(HorizonError::LatticeTooLarge {
            states: u64::MAX,
            cap: state_cap,
        })?;
    if total_states > state_cap {
        return Err(HorizonError::LatticeTooLarge {
            states: total_states,
            cap: state_cap,
        });
    }
    let comb = binomial_table(horizon + k, k);
    let layer_size = |t: usize| comb[t + k - 1][k - 1] as usize;
    let gamma = spec.gamma();

    let mut prev_vals: Vec<R> = vec![R::zero()];
    // preds[t - 1][state_rank] = action taken into that layer-t state.
    let mut preds: Vec<Vec<u8>> = Vec::with_capacity(horizon);

    let mut state_buf = vec![0u32; k];
    let mut pred_buf = vec![0u32; k];
    for t_next in 1..=horizon {
        let size = layer_size(t_next);
        let mut vals = vec![R::neg_infinity(); size];
        let mut pred = vec![0u8; size];
        let mut index = 0usize;
        // Iterating targets in rank order makes `index` the target's rank.
        for_each_state(&mut state_buf, 0, t_next as u32, &mut |target| {
            let mut best = R::neg_infinity();
            let mut best_action = 0usize;
            for a in 0..k {
                if target[a] == 0 {
                    continue;
                }
                pred_buf.copy_from_slice(target);
                pred_buf[a] -= 1;
                let r = rank(&pred_buf, t_next - 1, &comb);
                let stage = stage_payoff_from_counts(
                    gamma,
                    spec.payoff(a),
                    (target[a] - 1) as u64,
                    (t_next - 1) as u64,
                );
                let cand = prev_vals[r] + stage;
                if cand > best || (cand == best && spec.payoff(a) > spec.payoff(best_action)) {
                    best = cand;
                    best_action = a;
                }
            }
            vals[index] = best;
            pred[index] = best_action as u8;
            index += 1;
        });
        preds.push(pred);
        prev_vals = vals;
    }

    // Best full-count state; ties keep the lexicographically first.
    let mut best_val = R::neg_infinity();
    let mut best_state = vec![0u32; k];
    let mut index = 0usize;
    for_each_state(&mut state_buf, 0, horizon as u32, &mut |state| {
        if prev_vals[index] > best_val {
            best_val = prev_vals[index];
            best_state.copy_from_slice(state);
        }
        index += 1;
    });

    let mut actions_rev = Vec::with_capacity(horizon);
    let mut state = best_state;
    for t in (1..=horizon).rev() {
        let a = preds[t - 1][rank(&state, t, &comb)] as usize;
        actions_rev.push(a);
        state[a] -= 1;
    }
    let witness = History::from_steps(k, actions_rev.into_iter().rev())
        .expect("witness actions are in range");

    Ok(HorizonResult {
        horizon: horizon as u64,
        value: best_val / R::from_count(horizon as u64),
        witness,
        states_expanded: total_states - 1,
    })
}

/// Exhaustive maximization of the average utility over all `|A|^T`
/// histories. Oracle for [`v_exact`]; identical stage arithmetic, so the two
/// agree bit-exactly.
pub fn v_enumerate<R: Real>(
    spec: &ProblemSpec<R>,
    horizon: usize,
) -> Result<HorizonResult<R>, HorizonError> {
    if horizon == 0 {
        return Err(ModelError::EmptyHorizon.into());
    }
    let k = spec.n_actions();
    let space = (k as f64).powi(horizon as i32);
    if space > ENUMERATION_CAP {
        return Err(HorizonError::EnumerationTooLarge {
            histories: space,
            cap: ENUMERATION_CAP,
        });
    }
    let gamma = spec.gamma();

    if k == 1 {
        // The single constant history, accumulated like any DFS path.
        let mut total = R::zero();
        for t_prev in 0..horizon as u64 {
            total = total + stage_payoff_from_counts(gamma, spec.payoff(0), t_prev, t_prev);
        }
        return Ok(HorizonResult {
            horizon: horizon as u64,
            value: total / R::from_count(horizon as u64),
            witness: History::from_steps(1, std::iter::repeat(0).take(horizon)).unwrap(),
            states_expanded: horizon as u64,
        });
    }

    struct Dfs<'a, R: Real> {
        spec: &'a ProblemSpec<R>,
        horizon: usize,
        counts: Vec<u64>,
        steps: Vec<u8>,
        best: R,
        best_steps: Vec<u8>,
        visited: u64,
    }
    impl<R: Real> Dfs<'_, R> {
        fn go(&mut self, depth: usize, total: R) {
            if depth == self.horizon {
                self.visited += 1;
                if total > self.best {
                    self.best = total;
                    self.best_steps = self.steps.clone();
                }
                return;
            }
            for a in 0..self.spec.n_actions() {
                let stage = stage_payoff_from_counts(
                    self.spec.gamma(),
                    self.spec.payoff(a),
                    self.counts[a],
                    depth as u64,
                );
                self.counts[a] += 1;
                self.steps.push(a as u8);
                self.go(depth + 1, total + stage);
                self.steps.pop();
                self.counts[a] -= 1;
            }
        }
    }

    let mut dfs = Dfs {
        spec,
        horizon,
        counts: vec![0; k],
        steps: Vec::with_capacity(horizon),
        best: R::neg_infinity(),
        best_steps: Vec::new(),
        visited: 0,
    };
    dfs.go(0, R::zero());
    let witness = History::from_steps(k, dfs.best_steps.iter().map(|&a| a as usize))
        .expect("witness actions are in range");
    Ok(HorizonResult {
        horizon: horizon as u64,
        value: dfs.best / R::from_count(horizon as u64),
        witness,
        states_expanded: dfs.visited,
    })
}

/// One grid entry of [`v_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<R: Real = f64> {
    pub horizon: u64,
    pub value: R,
    /// Difference to the previous grid value; `None` on the first row.
    pub delta: Option<R>,
}

/// `v^T` over a horizon grid with a Cauchy-style tail diagnostic and a flag
/// for values exceeding the best stationary limit.
#[derive(Debug, Clone)]
pub struct ConvergenceTable<R: Real = f64> {
    pub rows: Vec<ConvergenceRow<R>>,
    /// Spread `max - min` of the values in the tail (last quarter of the
    /// grid, at least two rows). A heuristic stopping diagnostic: the
    /// underlying sequence converges, but no rate is known.
    pub cauchy_window: R,
    /// Best stationary limit value `V*` of the same problem.
    pub stationary_value: R,
    /// Margin used for the strictness flag.
    pub margin: R,
    /// Tail horizons whose value exceeds `stationary_value + margin` —
    /// evidence that the optimal limsup is strictly above the stationary
    /// optimum. Only tail rows are flagged: every finite-horizon optimum
    /// carries an O(1/T) excess over its limit, so small horizons would flag
    /// even when the limit equals `V*`.
    pub strict_rows: Vec<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOptions {
    pub state_cap: u64,
    /// Strictness margin over the stationary value. `None` uses the
    /// finite-size heuristic `2 * gamma * sum_u / T` at the first tail
    /// horizon, which absorbs the O(1/T) excess of stationary-achievable
    /// problems at moderate grids.
    pub margin: Option<f64>,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            margin: None,
        }
    }
}

/// Runs [`v_exact`] on every grid horizon (in parallel) and assembles the
/// convergence diagnostics.
pub fn v_convergence<R: Real>(
    spec: &ProblemSpec<R>,
    grid: &[usize],
    opts: ConvergenceOptions,
) -> Result<ConvergenceTable<R>, HorizonError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HorizonError::BadGrid);
    }
    let results: Vec<HorizonResult<R>> = grid
        .par_iter()
        .map(|&t| v_exact_capped(spec, t, opts.state_cap))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        rows.push(ConvergenceRow {
            horizon: r.horizon,
            value: r.value,
            delta: if i == 0 {
                None
            } else {
                Some(r.value - results[i - 1].value)
            },
        });
    }
    let tail_len = (rows.len() / 4).max(2).min(rows.len());
    let tail = &rows[rows.len() - tail_len..];
    let tail_max = tail
        .iter()
        .map(|r| r.value)
        .fold(R::neg_infinity(), |m, v| if v > m { v } else { m });
    let tail_min = tail
        .iter()
        .map(|r| r.value)
        .fold(R::infinity(), |m, v| if v < m { v } else { m });
    let cauchy_window = if rows.len() == 1 {
        R::zero()
    } else {
        tail_max - tail_min
    };
    let stationary_value = optimal_stationary(spec).value;
    let margin = match opts.margin {
        Some(m) => R::of(m),
        None => {
            R::two() * spec.gamma() * spec.payoff_sum() / R::from_count(tail[0].horizon)
        }
    };
    let strict_rows = tail
        .iter()
        .filter(|r| r.value > stationary_value + margin)
        .map(|r| r.horizon)
        .collect();
    Ok(ConvergenceTable {
        rows,
        cauchy_window,
        stationary_value,
        margin,
        strict_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::average_utility;

    fn two_action_spec(gamma: f64) -> ProblemSpec {
        ProblemSpec::new(vec![("a", 1.0), ("b", 10.0)], gamma).unwrap()
    }

    #[test]
    fn horizon_one_is_best_basic_payoff() {
        let r = v_exact(&two_action_spec(1.0), 1).unwrap();
        assert_eq!(r.value, 10.0);
        assert_eq!(r.witness.steps().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn horizon_two_mixes() {
        let r = v_exact(&two_action_spec(1.0), 2).unwrap();
        assert_eq!(r.value, 5.5);
        let e = v_enumerate(&two_action_spec(1.0), 2).unwrap();
        assert_eq!(e.value, 5.5);
    }

    #[test]
    fn dp_matches_oracle_bit_exact() {
        let specs: [ProblemSpec; 3] = [
            ProblemSpec::new(vec![("a", 1.0), ("b", 10.0)], 1.0).unwrap(),
            ProblemSpec::new(vec![("a", 3.3), ("b", 2.2), ("c", 7.9)], 0.65).unwrap(),
            ProblemSpec::new(vec![("a", 0.0), ("b", 4.0)], 0.8).unwrap(),
        ];
        for spec in &specs {
            for t in 1..=9 {
                let dp = v_exact(spec, t).unwrap();
                let oracle = v_enumerate(spec, t).unwrap();
                assert_eq!(dp.value, oracle.value, "spec={spec:?}, T={t}");
            }
        }
    }

    #[test]
    fn witness_reproduces_value() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("a", 2.0), ("b", 5.0), ("c", 9.0)], 0.9).unwrap();
        for t in [1usize, 5, 12, 30] {
            let r = v_exact(&spec, t).unwrap();
            let u = average_utility(&spec, &r.witness, t).unwrap();
            assert!((u - r.value).abs() < 1e-9, "T={t}");
        }
    }

    #[test]
    fn single_action_closed_form() {
        // v^T = u (1 + (T-1)(1-gamma)) / T for the only history.
        let spec: ProblemSpec = ProblemSpec::new(vec![("c", 6.0)], 0.7).unwrap();
        for t in [1usize, 2, 10, 50] {
            let r = v_exact(&spec, t).unwrap();
            let expected = 6.0 * (1.0 + (t as f64 - 1.0) * 0.3) / t as f64;
            assert!((r.value - expected).abs() < 1e-12, "T={t}");
            let e = v_enumerate(&spec, t).unwrap();
            assert_eq!(r.value, e.value);
        }
    }

    #[test]
    fn lattice_guard_trips() {
        let spec = two_action_spec(1.0);
        assert!(matches!(
            v_exact_capped(&spec, 1000, 100).unwrap_err(),
            HorizonError::LatticeTooLarge { .. }
        ));
        assert!(matches!(
            v_enumerate(&spec, 100).unwrap_err(),
            HorizonError::EnumerationTooLarge { .. }
        ));
    }

    #[test]
    fn convergence_table_two_actions() {
        let spec = two_action_spec(1.0);
        let grid: Vec<usize> = (1..=10).map(|i| i * 10).collect();
        let table = v_convergence(&spec, &grid, ConvergenceOptions::default()).unwrap();
        assert_eq!(table.rows.len(), 10);
        assert!(table.rows[0].delta.is_none());
        assert!(table.rows[1].delta.is_some());
        // Every v^T dominates the stationary optimum here.
        assert!((table.stationary_value - 2.75).abs() < 1e-12);
        for row in &table.rows {
            assert!(row.value > 2.75);
        }
        assert!(!table.strict_rows.is_empty());
        assert!(table.cauchy_window >= 0.0);
    }

    #[test]
    fn convergence_single_action_monotone() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("c", 4.0)], 0.5).unwrap();
        let grid: Vec<usize> = vec![1, 2, 4, 8, 16, 32];
        let table = v_convergence(&spec, &grid, ConvergenceOptions::default()).unwrap();
        // v^T decreases toward (1 - gamma) u = 2 and never dips below it.
        for pair in table.rows.windows(2) {
            assert!(pair[1].value <= pair[0].value);
            assert!(pair[1].value >= 2.0);
        }
        assert!(table.strict_rows.is_empty());
    }

    #[test]
    fn convergence_rejects_bad_grids() {
        let spec = two_action_spec(1.0);
        assert!(matches!(
            v_convergence(&spec, &[], ConvergenceOptions::default()).unwrap_err(),
            HorizonError::BadGrid
        ));
        assert!(matches!(
            v_convergence(&spec, &[10, 10], ConvergenceOptions::default()).unwrap_err(),
            HorizonError::BadGrid
        ));
    }
}
