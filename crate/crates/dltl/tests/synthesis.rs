//! Policy synthesis end to end: compile (on the fly), product, value
//! iteration, policy extraction, evaluation and simulation, checked against
//! independent closed-form oracles.

use dltl::machine::{compile, Compiler, LazyMachine};
use dltl::mdp::{
    best_block_search, extract_policy, policy_value, policy_value_on_the_fly, product,
    product_on_the_fly, simulate, value_iteration, FinitePolicy, LabeledMdp,
};
use dltl::rational::{pow, rat, to_f64, Rational};
use dltl::trace::{letter, Alphabet, Letter};
use dltl::{parse, Prop};

/// The two-state stay-or-move MDP: staying keeps the proposition `p`,
/// moving gives it up for good.
fn stay_move_mdp() -> LabeledMdp {
    LabeledMdp::builder()
        .action("a1")
        .action("a2")
        .state("s0", letter(&["p"]), None)
        .state("s1", Letter::empty(), None)
        .transition("s0", "a1", "s0", rat(1, 1))
        .transition("s0", "a2", "s1", rat(1, 1))
        .transition("s1", "a1", "s1", rat(1, 1))
        .transition("s1", "a2", "s1", rat(1, 1))
        .initial("s0")
        .build()
        .unwrap()
}

/// The two-scenario safety MDP: action `a_i` risks falling into sink `i`
/// with probability `p_i`, staying safe otherwise.
fn safety_mdp(p1: Rational, p2: Rational) -> LabeledMdp {
    let stay1 = rat(1, 1) - &p1;
    let stay2 = rat(1, 1) - &p2;
    LabeledMdp::builder()
        .action("a1")
        .action("a2")
        .state("s0", letter(&["safe"]), None)
        .state("s1", Letter::empty(), None)
        .state("s2", Letter::empty(), None)
        .transition("s0", "a1", "s0", stay1)
        .transition("s0", "a1", "s1", p1)
        .transition("s0", "a2", "s0", stay2)
        .transition("s0", "a2", "s2", p2)
        .transition("s1", "a1", "s1", rat(1, 1))
        .transition("s1", "a2", "s1", rat(1, 1))
        .transition("s2", "a1", "s2", rat(1, 1))
        .transition("s2", "a2", "s2", rat(1, 1))
        .initial("s0")
        .build()
        .unwrap()
}

/// Independent oracle for the stay-or-move example: staying for exactly `k`
/// steps is worth `1 - max(lambda^k, 1 - lambda^k)`; brute-force the best k.
fn best_switch(lambda: &Rational, k_max: usize) -> (usize, Rational) {
    let mut best = (0usize, rat(-1, 1));
    for k in 0..=k_max {
        let decay = pow(lambda, k);
        let v = rat(1, 1) - decay.clone().max(rat(1, 1) - decay);
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Steps the greedy policy through the deterministic chain and counts how
/// many letters carry `p`.
fn switch_time(mdp: &LabeledMdp, policy: &FinitePolicy, cap: usize) -> usize {
    let run = simulate(mdp, policy, cap, 0).unwrap();
    run.word.iter().take_while(|l| !l.is_empty()).count()
}

#[test]
fn example_one_synthesis_recovers_the_brute_force_switch() {
    let lambda = rat(99, 100);
    let (k_star, v_star) = best_switch(&lambda, 200);
    assert_eq!(k_star, 69);

    let mdp = stay_move_mdp();
    let f = parse("G[0.99] p & F[0.99] !p").unwrap();
    let ab = Alphabet::new([Prop::new("p").unwrap()]).unwrap();
    let mut machine = LazyMachine::new(&f, &lambda, &ab, &Compiler::default()).unwrap();
    let prod = product_on_the_fly(&mdp, &mut machine).unwrap();
    let vf = value_iteration(&prod, 1e-8);
    let optimal = vf.at_initial(&prod);
    assert!(
        (optimal - to_f64(&v_star)).abs() <= 1e-6,
        "value {optimal} vs oracle {}",
        to_f64(&v_star)
    );

    let policy = extract_policy(&prod, &vf);
    assert_eq!(switch_time(&mdp, &policy, 400), k_star);

    // evaluating the extracted policy agrees with the value function
    let pv = policy_value_on_the_fly(&mdp, &mut machine, &policy, 1e-8).unwrap();
    assert!((pv - optimal).abs() <= 2e-8, "{pv} vs {optimal}");

    // the always-move policy gives up p after the forced first letter
    let mut table = std::collections::BTreeMap::new();
    for ((q, s), (_, q_next)) in &policy.table {
        table.insert((*q, *s), (1usize, *q_next));
    }
    let always_move = FinitePolicy {
        memory_states: policy.memory_states,
        initial_memory: policy.initial_memory,
        table,
    };
    let pv = policy_value_on_the_fly(&mdp, &mut machine, &always_move, 1e-9).unwrap();
    let expected = to_f64(&(rat(1, 1) - lambda.clone()));
    assert!((pv - expected).abs() <= 1e-8, "{pv} vs {expected}");
}

/// Same pipeline at lambda = 1/2 where the machine is small enough to
/// tabulate: eager and on-the-fly products must agree exactly, and a Monte
/// Carlo estimate of the policy value must land within the statistical and
/// truncation error.
#[test]
fn small_lambda_pipeline_against_monte_carlo() {
    let lambda = rat(1, 2);
    let (k_star, v_star) = best_switch(&lambda, 50);
    assert_eq!(k_star, 1);
    assert_eq!(v_star, rat(1, 2));

    let mdp = stay_move_mdp();
    let f = parse("G[1/2] p & F[1/2] !p").unwrap();
    let machine = compile(&f, &lambda).unwrap();
    let prod = product(&mdp, &machine).unwrap();
    let vf = value_iteration(&prod, 1e-10);
    assert!((vf.at_initial(&prod) - 0.5).abs() <= 1e-9);
    let policy = extract_policy(&prod, &vf);
    assert_eq!(switch_time(&mdp, &policy, 50), 1);

    let pv = policy_value(&mdp, &machine, &policy, 1e-10).unwrap();

    // Monte Carlo: mean of the machine's partial sums over simulated words
    let steps = 40usize;
    let runs = 10_000usize;
    let mut total = 0.0f64;
    let mut total_sq = 0.0f64;
    for seed in 0..runs {
        let run = simulate(&mdp, &policy, steps, seed as u64).unwrap();
        let v = to_f64(&machine.eval_finite(&run.word).unwrap());
        total += v;
        total_sq += v * v;
    }
    let mean = total / runs as f64;
    let var = (total_sq / runs as f64 - mean * mean).max(0.0);
    let sigma = (var / runs as f64).sqrt();
    let truncation = to_f64(&pow(&lambda, steps));
    assert!(
        (mean - pv).abs() <= 3.0 * sigma + truncation + 1e-9,
        "mean {mean} vs policy value {pv} (sigma {sigma})"
    );
}

/// Deterministic safety: with no failure probability on action one, always
/// staying safe is optimal and worth exactly one.
#[test]
fn deterministic_safety_is_worth_one() {
    let mdp = safety_mdp(rat(0, 1), rat(1, 20));
    let f = parse("G[0.9] safe").unwrap();
    let machine = compile(&f, &rat(9, 10)).unwrap();
    let prod = product(&mdp, &machine).unwrap();
    let vf = value_iteration(&prod, 1e-9);
    assert!((vf.at_initial(&prod) - 1.0).abs() <= 1e-8);
    let policy = extract_policy(&prod, &vf);
    // greedy picks the safe action at the initial state
    let (action, _) = policy.act(policy.initial_memory, mdp.initial()).unwrap();
    assert_eq!(mdp.action_name(action), "a1");
    // and its simulated run never leaves the safe state
    let run = simulate(&mdp, &policy, 100, 3).unwrap();
    assert!(run.states.iter().all(|&s| s == mdp.initial()));

    // swapped scenario: a2 becomes the safe action
    let mdp = safety_mdp(rat(1, 20), rat(0, 1));
    let prod = product(&mdp, &machine).unwrap();
    let vf = value_iteration(&prod, 1e-9);
    let policy = extract_policy(&prod, &vf);
    let (action, _) = policy.act(policy.initial_memory, mdp.initial()).unwrap();
    assert_eq!(mdp.action_name(action), "a2");
}

/// All values stay inside [0, 1]: step rewards are at most 1 - lambda.
#[test]
fn values_bounded_by_one() {
    let mdp = safety_mdp(rat(1, 10), rat(1, 4));
    for (src, lambda) in [("G[0.9] safe", rat(9, 10)), ("F[1/2] !safe", rat(1, 2))] {
        let machine = compile(&parse(src).unwrap(), &lambda).unwrap();
        let prod = product(&mdp, &machine).unwrap();
        let vf = value_iteration(&prod, 1e-9);
        assert!(vf.values.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }
}

/// Exhaustive policy enumeration on a tiny product: the extracted policy is
/// optimal among all deterministic memoryless product policies.
#[test]
fn extracted_policy_beats_enumeration() {
    let mdp = stay_move_mdp();
    let f = parse("F[1/2] !p").unwrap();
    let machine = compile(&f, &rat(1, 2)).unwrap();
    let prod = product(&mdp, &machine).unwrap();
    assert!(prod.num_states() <= 4, "{}", prod.num_states());
    let vf = value_iteration(&prod, 1e-10);
    let best = extract_policy(&prod, &vf);
    let tol = 1e-10;
    let best_value = policy_value(&mdp, &machine, &best, tol).unwrap();

    // enumerate all action assignments over product states
    let n = prod.num_states();
    let mut assignments = vec![0usize; n];
    loop {
        let mut table = std::collections::BTreeMap::new();
        for idx in 0..n {
            let (s, q) = prod.state(idx);
            let a = prod.enabled(idx)[assignments[idx] % prod.enabled(idx).len()];
            table.insert((q, s), (a, prod.machine_successor(idx)));
        }
        let candidate = FinitePolicy {
            memory_states: best.memory_states,
            initial_memory: best.initial_memory,
            table,
        };
        let value = policy_value(&mdp, &machine, &candidate, tol).unwrap();
        assert!(best_value >= value - 2.0 * tol, "{best_value} < {value}");

        // odometer over assignments
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            assignments[i] += 1;
            if assignments[i] < prod.enabled(i).len() {
                break;
            }
            assignments[i] = 0;
            i += 1;
        }
    }
}

/// Theorem-style monotonicity of the block search: the best block length is
/// nondecreasing in the start delay and strictly grows somewhere.
#[test]
fn block_search_monotone_in_delay() {
    for (l1, l2) in [(rat(3, 5), rat(9, 10)), (rat(1, 2), rat(4, 5))] {
        let mut previous = 0usize;
        let mut strictly_grew = false;
        for k0 in 0..=20 {
            let k1 = best_block_search(&l1, &l2, k0, 400).unwrap();
            assert!(k1 >= previous, "k1*({k0}) = {k1} dropped below {previous}");
            strictly_grew |= k1 > previous && k0 > 0;
            previous = k1;
        }
        assert!(strictly_grew);
    }

    // local optimality at the returned argmax
    let value = |k0: usize, k1: usize| {
        let head = pow(&rat(3, 5), k0) * (rat(1, 1) - pow(&rat(9, 10), k1));
        let tail = pow(&rat(9, 10), k0 + k1);
        head.min(tail)
    };
    let k1 = best_block_search(&rat(3, 5), &rat(9, 10), 5, 400).unwrap();
    assert!(value(5, k1) >= value(5, k1 + 1));
    assert!(k1 == 0 || value(5, k1) >= value(5, k1 - 1));

    // equal factors rejected
    assert!(best_block_search(&rat(1, 2), &rat(1, 2), 0, 10).is_err());
    // boundary argmax rejected
    assert!(best_block_search(&rat(3, 5), &rat(9, 10), 0, 2).is_err());
}
