use fatigue_core::discounted::{
    default_delta_rule, discounted_value, DiscountParams, SearchBudget,
};
use fatigue_core::horizon::v_exact;
use fatigue_core::model::{
    average_utility, empirical_limits, utility_trace, ProblemSpec, TraceOptions,
};
use fatigue_core::stationary::optimal_stationary;
use fatigue_core::trajectories::{
    beneficial_swap_pass, generate_cyclic, generate_doubling_blocks, stationary_cycle,
    SwapPassConfig,
};

fn main() {
    let spec: ProblemSpec = ProblemSpec::new(vec![("a", 1.0), ("b", 10.0)], 1.0).unwrap();

    println!("== v^T for T in 100..=200 step 10 ==");
    let mut min_margin = f64::INFINITY;
    for t in (100..=200).step_by(10) {
        let r = v_exact(&spec, t).unwrap();
        let margin = r.value - 2.75;
        min_margin = min_margin.min(margin);
        println!("T={t}: v = {:.12}, margin over V* = {:.12}", r.value, margin);
    }
    println!("min margin = {min_margin:.12}");

    println!("\n== doubling trace at T = 3 * 2^20 ==");
    let t_max = 3usize * (1 << 20);
    let h = generate_doubling_blocks(t_max);
    let trace = utility_trace(
        &spec,
        h.steps(),
        t_max as u64,
        TraceOptions::default(),
    )
    .unwrap();
    let (lo, hi) = empirical_limits(&trace, (t_max / 10) as u64).unwrap();
    let ln2 = std::f64::consts::LN_2;
    println!(
        "running min = {lo:.6} (target {:.6}, err {:.2e})",
        8.0 / 3.0 * ln2,
        (lo - 8.0 / 3.0 * ln2).abs()
    );
    println!(
        "running max = {hi:.6} (target {:.6}, err {:.2e})",
        14.0 / 3.0 * ln2,
        (hi - 14.0 / 3.0 * ln2).abs()
    );

    println!("\n== swap pass with paper-style window ==");
    let x = optimal_stationary(&spec).x;
    let pattern = stationary_cycle(&spec, &x, 1000).unwrap();
    println!("cycle pattern: {pattern:?}");
    for (t1, t) in [(228u64, 456u64), (228, 912), (456, 2000), (100, 1000)] {
        let h = generate_cyclic(2, &pattern, t as usize).unwrap();
        let cfg = SwapPassConfig::new(t1, t);
        let before = average_utility(&spec, &h, t as usize).unwrap();
        let pass = beneficial_swap_pass(&spec, &h, &cfg).unwrap();
        let after = average_utility(&spec, &pass.history, t as usize).unwrap();
        // eta = (1-q)/64 * phi(lo) * gamma * delta with q = 3/4, phi = 1/2, delta = 2.25
        let eta = 0.25 / 64.0 * 0.5 * 2.25;
        println!(
            "T1={t1}, T={t}: swaps={}, gain={:.6}, actual={:.6}, 2*eta={:.6}, ok={}",
            pass.records.len(),
            pass.guaranteed_gain,
            after - before,
            2.0 * eta,
            after - before >= 2.0 * eta
        );
    }

    println!("\n== discounted grid ==");
    let v_star = optimal_stationary(&spec).value;
    for lambda in [0.9, 0.99, 0.995] {
        let delta = default_delta_rule(lambda);
        let params = DiscountParams::new(lambda, delta).unwrap();
        let budget = SearchBudget::default();
        let start = std::time::Instant::now();
        let out = discounted_value(&spec, params, &budget).unwrap();
        println!(
            "lambda={lambda}, delta={delta}: H={}, lower={:.6}, upper={:.6}, excess_upper={:.6}, best={:?}, merged={}, {:?}",
            out.interval.depth,
            out.interval.lower,
            out.interval.upper,
            out.interval.upper - v_star,
            out.best,
            out.merged_states,
            start.elapsed()
        );
        for (k, v) in &out.candidates {
            println!("    {}: {v:.6}", k.name());
        }
    }
}
