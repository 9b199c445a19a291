//! Learning with unknown transitions, checked against known-model optima.

use dltl::learning::{
    pac_learn, rl_product, unroll, unroll_with_horizon, Environment, MdpEnvironment, PacOptions,
    QHyper, DEFAULT_UNROLL_BUDGET,
};
use dltl::machine::{Compiler, LazyMachine};
use dltl::mdp::{product_on_the_fly, simulate, value_iteration, LabeledMdp};
use dltl::rational::{rat, to_f64, Rational};
use dltl::semantics::eval_finite;
use dltl::trace::{letter, Alphabet, Letter};
use dltl::{parse, Formula, Prop};

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

/// Leaf rewards of the unrolled MDP equal the finite-word semantics of
/// their history, exhaustively at small scale.
#[test]
fn unroll_leaves_match_finite_semantics() {
    let mdp = safety_mdp(rat(1, 10), rat(1, 5));
    let f = parse("G[1/2] safe").unwrap();
    let u = unroll(&mdp, &f, &rat(1, 16), DEFAULT_UNROLL_BUDGET).unwrap();
    assert_eq!(u.horizon(), 4);
    let mut checked = 0;
    for (node, reward) in u.leaves() {
        let word = u.word(node);
        assert_eq!(word.len(), u.horizon() + 1);
        assert_eq!(reward, to_f64(&eval_finite(&f, &word)));
        checked += 1;
    }
    assert!(checked > 0);

    // propositional formula: horizon 0, single leaf worth the first label
    let prop = parse("safe").unwrap();
    let u = unroll(&mdp, &prop, &rat(1, 100), DEFAULT_UNROLL_BUDGET).unwrap();
    assert_eq!(u.horizon(), 0);
    assert_eq!(u.num_nodes(), 1);
    assert_eq!(u.optimal_value(), 1.0);
}

/// Two independent pipelines agree: backward induction on the unrolled tree
/// lands within the truncation window of product value iteration.
#[test]
fn unroll_agrees_with_product_value_iteration() {
    let mdp = stay_move_mdp();
    let f = parse("G[0.99] p & F[0.99] !p").unwrap();
    let lambda = rat(99, 100);
    let ab = Alphabet::new([Prop::new("p").unwrap()]).unwrap();
    let mut machine = LazyMachine::new(&f, &lambda, &ab, &Compiler::default()).unwrap();
    let prod = product_on_the_fly(&mdp, &mut machine).unwrap();
    let exact = value_iteration(&prod, 1e-9).at_initial(&prod);

    for epsilon in [rat(1, 10), rat(1, 20)] {
        let u = unroll(&mdp, &f, &epsilon, DEFAULT_UNROLL_BUDGET).unwrap();
        let approx = u.optimal_value();
        let window = 2.0 * to_f64(&epsilon);
        assert!(
            (approx - exact).abs() <= window,
            "epsilon {epsilon}: {approx} vs {exact}"
        );
    }
}

/// Exact finite-horizon value of a learned history policy under the true
/// model; missing entries fall back to the first enabled action.
fn policy_value_exact(
    mdp: &LabeledMdp,
    formula: &Formula,
    policy: &dltl::learning::HistoryPolicy,
) -> f64 {
    let u = unroll_with_horizon(mdp, formula, policy.horizon(), DEFAULT_UNROLL_BUDGET).unwrap();
    u.policy_value(|word, state, enabled| {
        policy
            .act(word, state)
            .filter(|a| enabled.contains(a))
            .unwrap_or(enabled[0])
    })
}

/// The two-scenario safety pair: the learner must pick the safe action in
/// both scenarios and end up epsilon-optimal in most seeds.
#[test]
fn pac_learns_both_safety_scenarios() {
    let f = parse("G[0.9] safe").unwrap();
    let epsilon = rat(1, 20);
    let confidence = rat(1, 10);
    let scenarios = [
        (safety_mdp(rat(0, 1), rat(1, 20)), "a1"),
        (safety_mdp(rat(1, 20), rat(0, 1)), "a2"),
    ];
    for (mdp, safe_action) in scenarios {
        // known-model optimum for reference
        let machine = dltl::machine::compile(&f, &rat(9, 10)).unwrap();
        let prod = dltl::mdp::product(&mdp, &machine).unwrap();
        let optimum = value_iteration(&prod, 1e-9).at_initial(&prod);
        assert!((optimum - 1.0).abs() < 1e-8);

        let mut hits = 0;
        for seed in 0..20u64 {
            let mut env = MdpEnvironment::new(&mdp, seed);
            let (policy, report) =
                pac_learn(&mut env, &f, &epsilon, &confidence, seed, &PacOptions::default())
                    .unwrap();
            assert!(report.episodes < PacOptions::default().max_episodes, "did not settle");

            // picks the safe action at the root
            let first = policy.act(&[letter(&["safe"])], mdp.initial()).unwrap();
            assert_eq!(mdp.action_name(first), safe_action, "seed {seed}");

            let value = policy_value_exact(&mdp, &f, &policy);
            if value >= optimum - to_f64(&epsilon) {
                hits += 1;
            }
        }
        assert!(hits >= 18, "only {hits}/20 seeds were epsilon-optimal");
    }
}

/// Deterministic chain: the exact optimum is attainable and attained.
#[test]
fn pac_exact_on_deterministic_chain() {
    let mdp = LabeledMdp::builder()
        .action("go")
        .action("wait")
        .state("s0", Letter::empty(), None)
        .state("s1", Letter::empty(), None)
        .state("s2", letter(&["p"]), None)
        .transition("s0", "go", "s1", rat(1, 1))
        .transition("s0", "wait", "s0", rat(1, 1))
        .transition("s1", "go", "s2", rat(1, 1))
        .transition("s1", "wait", "s1", rat(1, 1))
        .transition("s2", "go", "s2", rat(1, 1))
        .transition("s2", "wait", "s2", rat(1, 1))
        .initial("s0")
        .build()
        .unwrap();
    let f = parse("F[1/2] p").unwrap();
    let mut env = MdpEnvironment::new(&mdp, 0);
    let (policy, report) =
        pac_learn(&mut env, &f, &rat(1, 10), &rat(1, 10), 0, &PacOptions::default()).unwrap();
    let value = policy_value_exact(&mdp, &f, &policy);
    assert_eq!(value, 0.25, "first p at step 2 is worth exactly lambda^2");
    assert_eq!(report.value_estimate, 0.25);
}

/// Q-learning on the on-the-fly product recovers the brute-force switch
/// time within +-2 in at least 8 of 10 seeds under default hyperparameters.
#[test]
fn q_learning_recovers_switch_time() {
    let mdp = stay_move_mdp();
    let f = parse("G[0.99] p & F[0.99] !p").unwrap();
    let lambda = rat(99, 100);
    let ab = Alphabet::new([Prop::new("p").unwrap()]).unwrap();
    let hyper = QHyper::default();

    let mut hits = 0;
    for seed in 0..10u64 {
        let mut machine = LazyMachine::new(&f, &lambda, &ab, &Compiler::default()).unwrap();
        let mut env = MdpEnvironment::new(&mdp, seed ^ 0x9e37_79b9);
        let (policy, report) = rl_product(&mut env, &mut machine, &hyper, seed).unwrap();
        assert!(report.trace.iter().all(|v| (0.0..=1.0 + 1e-9).contains(v)));
        assert!((0.0..=1.0 + 1e-9).contains(&report.value_estimate));

        let run = simulate(&mdp, &policy, 200, 0).unwrap();
        let switch = run.word.iter().take_while(|l| !l.is_empty()).count();
        if (67..=71).contains(&switch) {
            hits += 1;
        }
    }
    assert!(hits >= 8, "only {hits}/10 seeds landed within 69 +- 2");
}

/// Deterministic safety through the product learner: the learned value
/// estimate approaches one and the greedy policy stays safe.
#[test]
fn q_learning_deterministic_safety() {
    let mdp = safety_mdp(rat(0, 1), rat(1, 20));
    let f = parse("G[0.9] safe").unwrap();
    let ab = Alphabet::new([Prop::new("safe").unwrap()]).unwrap();
    let mut machine = LazyMachine::new(&f, &rat(9, 10), &ab, &Compiler::default()).unwrap();
    let mut env = MdpEnvironment::new(&mdp, 7);
    let hyper = QHyper { episodes: 800, max_steps: 250, ..QHyper::default() };
    let (policy, report) = rl_product(&mut env, &mut machine, &hyper, 7).unwrap();
    assert!(report.value_estimate > 0.99, "{}", report.value_estimate);
    let run = simulate(&mdp, &policy, 200, 1).unwrap();
    assert!(run.states.iter().all(|&s| s == mdp.initial()));
}
