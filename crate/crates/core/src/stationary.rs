//! Optimal stationary frequencies, greedy fixed points, and fatigue
//! comparative statics.
//!
//! A stationary history with limit frequencies `x` achieves the limit average
//! utility `sum_a x(a) (1 - gamma x(a)) u(a)`. The best such limit, `V*`, is
//! the maximum of that quadratic over the simplex. The maximizer is found by
//! KKT water-filling: for a trial multiplier `mu`, positive-payoff actions
//! take mass `max(0, (1 - mu / u(a)) / (2 gamma))`; `mu` is located by
//! monotone bisection so the masses sum to 1, then polished by the closed form
//! on the identified support. Zero-payoff actions absorb residual mass only
//! when `mu` reaches 0.
//!
//! The greedy stage-payoff maximizer converges to the analogous indifference
//! fixed point with factor `gamma` instead of `2 gamma`.

use thiserror::Error;

use crate::model::{FrequencyVector, ModelError, ProblemSpec};
use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("gamma grid must be sorted ascending")]
    GridNotAscending,
    #[error("gamma grid must not be empty")]
    EmptyGrid,
}

/// Maximizer of the stationary limit value over the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution<R: Real = f64> {
    /// The optimal frequencies `x*`.
    pub x: FrequencyVector<R>,
    /// `V*`: the value of `x*`.
    pub value: R,
    /// Actions with `x*(a) > 0`, in input order.
    pub support: Vec<usize>,
    /// KKT level: `u(a) (1 - 2 gamma x*(a))` for every support action with
    /// positive payoff; excluded actions satisfy `u(a) <= multiplier`.
    pub multiplier: R,
}

/// Limit frequencies and limit average utility of the greedy strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySolution<R: Real = f64> {
    pub x: FrequencyVector<R>,
    /// Limit of the greedy average utilities.
    pub value: R,
    /// Actions chosen infinitely often.
    pub support: Vec<usize>,
}

/// Water-filling over the positive-payoff actions with mass rule
/// `x(a) = max(0, (1 - mu / u(a)) / scale)`.
///
/// `scale` is `2 gamma` for the stationary optimum and `gamma` for the greedy
/// fixed point. Returns the full weight vector, the multiplier, and whether
/// residual mass was spread over zero-payoff actions.
fn water_fill<R: Real>(payoffs: &[R], scale: R) -> (Vec<R>, R) {
    let n = payoffs.len();
    let positive: Vec<usize> = (0..n).filter(|&a| payoffs[a] > R::zero()).collect();
    let zero: Vec<usize> = (0..n).filter(|&a| payoffs[a] == R::zero()).collect();
    debug_assert!(!positive.is_empty(), "caller handles all-zero payoffs");

    let mass = |mu: R| -> R {
        positive
            .iter()
            .map(|&a| ((R::one() - mu / payoffs[a]) / scale).max(R::zero()))
            .sum()
    };
    let max_u = payoffs
        .iter()
        .copied()
        .fold(R::zero(), |m, u| if u > m { u } else { m });

    let mut x = vec![R::zero(); n];

    // With zero-payoff actions present the multiplier cannot go below zero:
    // complementarity lets them hold mass only at mu = 0.
    let mass0 = mass(R::zero());
    if !zero.is_empty() && mass0 < R::one() {
        let share = R::one() / scale;
        for &a in &positive {
            x[a] = share;
        }
        let residual = (R::one() - mass0) / R::from_count(zero.len() as u64);
        for &a in &zero {
            x[a] = residual;
        }
        return (x, R::zero());
    }

    // Bracket the multiplier. mass is continuous and non-increasing in mu,
    // zero at max_u. When mass(0) < 1 (and no zero-payoff slack exists) the
    // root is negative; the chosen lower end forces mass > 1.
    let mut lo = if mass0 >= R::one() {
        R::zero()
    } else {
        -(R::one() + scale) * max_u
    };
    let mut hi = max_u;
    for _ in 0..200 {
        if hi - lo <= R::tol_bisect() {
            break;
        }
        let mid = (lo + hi) / R::two();
        if mass(mid) > R::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu_hat = (lo + hi) / R::two();

    // Polish on the identified support with the closed form
    // mu = (|S| - scale) / sum_S 1/u, x(a) = (1 - mu/u(a)) / scale,
    // which makes the masses sum to 1 exactly and reproduces the
    // indifference conditions. Drop boundary actions the bisection kept,
    // re-admit any it lost.
    let mut support: Vec<usize> = positive
        .iter()
        .copied()
        .filter(|&a| payoffs[a] > mu_hat)
        .collect();
    if support.is_empty() {
        // mu_hat landed on max_u from above; the top action is always in.
        support = vec![positive
            .iter()
            .copied()
            .max_by(|&a, &b| payoffs[a].partial_cmp(&payoffs[b]).unwrap())
            .unwrap()];
    }
    let mut mu = mu_hat;
    for _ in 0..=n {
        let inv_sum: R = support.iter().map(|&a| R::one() / payoffs[a]).sum();
        mu = (R::from_count(support.len() as u64) - scale) / inv_sum;
        let dropped: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&a| payoffs[a] <= mu)
            .collect();
        if !dropped.is_empty() && dropped.len() < support.len() {
            support.retain(|a| !dropped.contains(a));
            continue;
        }
        let admitted: Vec<usize> = positive
            .iter()
            .copied()
            .filter(|&a| !support.contains(&a) && payoffs[a] > mu)
            .collect();
        if !admitted.is_empty() {
            support.extend(admitted);
            support.sort_unstable();
            continue;
        }
        break;
    }
    for &a in &support {
        x[a] = (R::one() - mu / payoffs[a]) / scale;
    }
    (x, mu)
}

/// Stationary limit value of frequencies `x`:
/// `sum_a x(a) (1 - gamma x(a)) u(a)`.
pub fn stationary_value<R: Real>(
    spec: &ProblemSpec<R>,
    x: &FrequencyVector<R>,
) -> Result<R, StationaryError> {
    if x.len() != spec.n_actions() {
        return Err(ModelError::DimensionMismatch {
            expected: spec.n_actions(),
            got: x.len(),
        }
        .into());
    }
    let sum = x.sum();
    if (sum - R::one()).abs() > R::tol_agree() {
        if x.is_zero() {
            return Err(ModelError::ZeroFrequencies.into());
        }
        return Err(ModelError::OffSimplex { sum: sum.as_f64() }.into());
    }
    let gamma = spec.gamma();
    Ok((0..spec.n_actions())
        .map(|a| x.get(a) * (R::one() - gamma * x.get(a)) * spec.payoff(a))
        .sum())
}

/// The unique maximizer of the stationary limit value over the simplex,
/// together with `V*` and the KKT multiplier.
///
/// Degenerate all-zero-payoff problems have value 0 everywhere; the uniform
/// point is returned as the canonical representative.
pub fn optimal_stationary<R: Real>(spec: &ProblemSpec<R>) -> StationarySolution<R> {
    let n = spec.n_actions();
    if spec.payoffs().iter().all(|&u| u == R::zero()) {
        let x = FrequencyVector::uniform(n);
        return StationarySolution {
            support: x.support(),
            x,
            value: R::zero(),
            multiplier: R::zero(),
        };
    }
    let (weights, multiplier) = water_fill(spec.payoffs(), R::two() * spec.gamma());
    let x = FrequencyVector::from_weights(weights).expect("water-filling output is a simplex point");
    let value = stationary_value(spec, &x).expect("solution is on the simplex");
    StationarySolution {
        support: x.support(),
        x,
        value,
        multiplier,
    }
}

/// Limit frequencies of the greedy stage-payoff maximizer and the limit of
/// its average utilities.
///
/// All-zero payoffs degenerate to a constant history on the first action,
/// matching the greedy simulation's input-order tie-breaking.
pub fn greedy_fixed_point<R: Real>(spec: &ProblemSpec<R>) -> GreedySolution<R> {
    let n = spec.n_actions();
    if spec.payoffs().iter().all(|&u| u == R::zero()) {
        let x = FrequencyVector::point_mass(n, 0);
        return GreedySolution {
            support: x.support(),
            x,
            value: R::zero(),
        };
    }
    let (weights, _) = water_fill(spec.payoffs(), spec.gamma());
    let x = FrequencyVector::from_weights(weights).expect("water-filling output is a simplex point");
    let value = stationary_value(spec, &x).expect("solution is on the simplex");
    GreedySolution {
        support: x.support(),
        x,
        value,
    }
}

/// One stationary solution per fatigue level, plus the dominance check.
#[derive(Debug, Clone)]
pub struct FatigueSweep<R: Real = f64> {
    pub rows: Vec<(R, StationarySolution<R>)>,
    pub fosd: FosdReport<R>,
}

/// First-order stochastic dominance check across a fatigue grid: with actions
/// sorted by payoff descending, cumulative optimal weights must be
/// non-increasing in gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct FosdReport<R: Real = f64> {
    pub ok: bool,
    /// Largest observed increase of a cumulative weight between adjacent
    /// grid points (0 when the ordering holds exactly).
    pub max_violation: R,
}

/// Solves the stationary problem on an ascending gamma grid and checks that
/// weight shifts away from top-payoff actions as fatigue grows.
pub fn fatigue_sweep<R: Real>(
    spec: &ProblemSpec<R>,
    gamma_grid: &[R],
) -> Result<FatigueSweep<R>, StationaryError> {
    if gamma_grid.is_empty() {
        return Err(StationaryError::EmptyGrid);
    }
    if gamma_grid.windows(2).any(|w| w[0] >= w[1]) && gamma_grid.len() > 1 {
        return Err(StationaryError::GridNotAscending);
    }
    let mut rows = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        let s = spec.with_gamma(gamma)?;
        rows.push((gamma, optimal_stationary(&s)));
    }

    // Actions by payoff descending, ties stable in input order.
    let mut order: Vec<usize> = (0..spec.n_actions()).collect();
    order.sort_by(|&a, &b| spec.payoff(b).partial_cmp(&spec.payoff(a)).unwrap());

    let mut max_violation = R::zero();
    for pair in rows.windows(2) {
        let (ref low, ref high) = (&pair[0].1, &pair[1].1);
        let mut cum_low = R::zero();
        let mut cum_high = R::zero();
        for &a in &order {
            cum_low += low.x.get(a);
            cum_high += high.x.get(a);
            let violation = cum_high - cum_low;
            if violation > max_violation {
                max_violation = violation;
            }
        }
    }
    let fosd = FosdReport {
        ok: max_violation <= R::tol_agree(),
        max_violation,
    };
    Ok(FatigueSweep { rows, fosd })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_action_spec(gamma: f64) -> ProblemSpec {
        ProblemSpec::new(vec![("a", 1.0), ("b", 10.0)], gamma).unwrap()
    }

    /// Closed form for the optimal frequencies on a known support with all
    /// payoffs positive (test-side reference, independent of the solver path).
    fn closed_form_x(payoffs: &[f64], support: &[usize], scale: f64) -> Vec<f64> {
        let inv_sum: f64 = support.iter().map(|&a| 1.0 / payoffs[a]).sum();
        let mut x = vec![0.0; payoffs.len()];
        for &a in support {
            let ratio_sum = payoffs[a] * inv_sum;
            x[a] = (scale - support.len() as f64 + ratio_sum) / (scale * ratio_sum);
        }
        x
    }

    #[test]
    fn optimal_two_actions_gamma_one() {
        let sol = optimal_stationary(&two_action_spec(1.0));
        assert!((sol.x.get(0) - 0.5).abs() < 1e-12);
        assert!((sol.x.get(1) - 0.5).abs() < 1e-12);
        assert!((sol.value - 2.75).abs() < 1e-12);
        assert_eq!(sol.support, vec![0, 1]);
    }

    #[test]
    fn optimal_two_actions_below_threshold() {
        // For gamma <= 9/20 the poor action is not played.
        let sol = optimal_stationary(&two_action_spec(0.4));
        assert_eq!(sol.x.weights(), &[0.0, 1.0]);
        assert!((sol.value - 6.0).abs() < 1e-12);
        assert_eq!(sol.support, vec![1]);
    }

    #[test]
    fn optimal_two_actions_gamma_half() {
        let sol = optimal_stationary(&two_action_spec(0.5));
        assert!((sol.x.get(0) - 1.0 / 11.0).abs() < 1e-12);
        assert!((sol.x.get(1) - 10.0 / 11.0).abs() < 1e-12);
        assert!((sol.value - 111.0 / 22.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_matches_closed_form_on_support() {
        let spec =
            ProblemSpec::new(vec![("a", 3.0), ("b", 7.0), ("c", 1.5), ("d", 9.0)], 0.8)
                .unwrap();
        let sol = optimal_stationary(&spec);
        let reference = closed_form_x(spec.payoffs(), &sol.support, 2.0 * 0.8);
        for a in 0..spec.n_actions() {
            assert!(
                (sol.x.get(a) - reference[a]).abs() < 1e-9,
                "action {a}: {} vs {}",
                sol.x.get(a),
                reference[a]
            );
        }
    }

    #[test]
    fn optimal_single_action() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("c", 4.0)], 0.75).unwrap();
        let sol = optimal_stationary(&spec);
        assert_eq!(sol.x.weights(), &[1.0]);
        assert!((sol.value - (1.0 - 0.75) * 4.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_with_zero_payoff_action() {
        // gamma = 1, one productive action: it takes 1/(2 gamma) = 1/2 and the
        // zero-payoff action absorbs the residual at mu = 0.
        let spec: ProblemSpec = ProblemSpec::new(vec![("z", 0.0), ("p", 10.0)], 1.0).unwrap();
        let sol = optimal_stationary(&spec);
        assert!((sol.x.get(1) - 0.5).abs() < 1e-12);
        assert!((sol.x.get(0) - 0.5).abs() < 1e-12);
        assert_eq!(sol.multiplier, 0.0);
        assert!((sol.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn optimal_all_zero_payoffs() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("x", 0.0), ("y", 0.0)], 0.5).unwrap();
        let sol = optimal_stationary(&spec);
        assert_eq!(sol.x.weights(), &[0.5, 0.5]);
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn kkt_conditions_hold() {
        let spec: ProblemSpec = ProblemSpec::new(
            vec![("a", 2.0), ("b", 5.0), ("c", 0.4), ("d", 5.0)],
            0.9,
        )
        .unwrap();
        let sol = optimal_stationary(&spec);
        let gamma = spec.gamma();
        for &a in &sol.support {
            if spec.payoff(a) > 0.0 {
                let level = spec.payoff(a) * (1.0 - 2.0 * gamma * sol.x.get(a));
                assert!((level - sol.multiplier).abs() < 1e-9, "action {a}");
            }
        }
        for a in 0..spec.n_actions() {
            if !sol.support.contains(&a) {
                assert!(spec.payoff(a) <= sol.multiplier + 1e-9);
            }
        }
        // Equal payoffs split equally.
        assert!((sol.x.get(1) - sol.x.get(3)).abs() < 1e-12);
    }

    #[test]
    fn greedy_two_actions_gamma_one() {
        let sol = greedy_fixed_point(&two_action_spec(1.0));
        assert!((sol.x.get(0) - 1.0 / 11.0).abs() < 1e-12);
        assert!((sol.x.get(1) - 10.0 / 11.0).abs() < 1e-12);
        assert!((sol.value - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_boundary_gamma() {
        // At gamma = 0.9 the closed form puts exactly zero on the poor action:
        // only b is chosen.
        let sol = greedy_fixed_point(&two_action_spec(0.9));
        assert_eq!(sol.x.weights(), &[0.0, 1.0]);
        assert_eq!(sol.support, vec![1]);
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_below_boundary() {
        let sol = greedy_fixed_point(&two_action_spec(0.5));
        assert_eq!(sol.x.weights(), &[0.0, 1.0]);
        assert!((sol.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_never_beats_optimal() {
        for (payoffs, gamma) in [
            (vec![1.0, 10.0], 1.0),
            (vec![2.0, 3.0, 4.0], 0.6),
            (vec![5.0, 5.0], 0.3),
        ] {
            let actions: Vec<(String, f64)> = payoffs
                .iter()
                .enumerate()
                .map(|(i, &u)| (format!("a{i}"), u))
                .collect();
            let spec: ProblemSpec = ProblemSpec::new(actions, gamma).unwrap();
            let g = greedy_fixed_point(&spec);
            let s = optimal_stationary(&spec);
            assert!(g.value <= s.value + 1e-9);
        }
    }

    #[test]
    fn stationary_value_examples() {
        let spec = two_action_spec(1.0);
        let half = FrequencyVector::from_weights(vec![0.5, 0.5]).unwrap();
        assert!((stationary_value(&spec, &half).unwrap() - 2.75).abs() < 1e-12);
        let mass = FrequencyVector::point_mass(2, 1);
        assert!((stationary_value(&spec, &mass).unwrap() - 0.0).abs() < 1e-12);
        let greedy = FrequencyVector::from_weights(vec![1.0 / 11.0, 10.0 / 11.0]).unwrap();
        assert!((stationary_value(&spec, &greedy).unwrap() - 10.0 / 11.0).abs() < 1e-12);
        // Off-simplex and zero vectors are rejected.
        assert!(stationary_value(&spec, &FrequencyVector::zero(2)).is_err());
        assert!(stationary_value(&spec, &FrequencyVector::uniform(3)).is_err());
    }

    #[test]
    fn fatigue_sweep_two_actions() {
        let spec = two_action_spec(1.0);
        let sweep = fatigue_sweep(&spec, &[0.5, 0.75, 1.0]).unwrap();
        let xb: Vec<f64> = sweep.rows.iter().map(|(_, s)| s.x.get(1)).collect();
        assert!((xb[0] - 10.0 / 11.0).abs() < 1e-12);
        assert!((xb[1] - 10.5 / 16.5).abs() < 1e-12);
        assert!((xb[2] - 0.5).abs() < 1e-12);
        assert!(sweep.fosd.ok);
    }

    #[test]
    fn fatigue_sweep_equal_payoffs_uniform() {
        let spec: ProblemSpec = ProblemSpec::new(vec![("a", 3.0), ("b", 3.0), ("c", 3.0)], 1.0).unwrap();
        let sweep = fatigue_sweep(&spec, &[0.2, 0.5, 0.8]).unwrap();
        for (_, sol) in &sweep.rows {
            for a in 0..3 {
                assert!((sol.x.get(a) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        assert!(sweep.fosd.ok);
    }

    #[test]
    fn fatigue_sweep_rejects_bad_grids() {
        let spec = two_action_spec(1.0);
        assert!(matches!(
            fatigue_sweep(&spec, &[]).unwrap_err(),
            StationaryError::EmptyGrid
        ));
        assert!(matches!(
            fatigue_sweep(&spec, &[0.5, 0.4]).unwrap_err(),
            StationaryError::GridNotAscending
        ));
        assert!(matches!(
            fatigue_sweep(&spec, &[0.5, 1.5]).unwrap_err(),
            StationaryError::Model(ModelError::GammaOutOfRange { .. })
        ));
    }
}
