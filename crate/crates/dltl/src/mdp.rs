//! Labeled MDPs, the product with a reward machine, exact-model solving and
//! simulation.
//!
//! Transition probabilities are exact rationals and are validated to sum to
//! one. Value vectors are `f64`: value iteration is a contraction, so float
//! rounding stays bounded while exactness remains reserved for machine
//! construction.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand_core::{RngCore, SeedableRng};

use crate::machine::{MachineView, RewardMachine};
use crate::rational::{pow, Rational};
use crate::trace::{FiniteWord, Letter};

pub type StateId = usize;
pub type ActionId = usize;

/// Finite MDP with a labeling of states by proposition valuations.
#[derive(Clone, Debug)]
pub struct LabeledMdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    labels: Vec<Letter>,
    enabled: Vec<Vec<ActionId>>,
    // transitions[s][slot] parallels enabled[s]
    transitions: Vec<Vec<Vec<(StateId, Rational)>>>,
    initial: StateId,
}

impl LabeledMdp {
    pub fn builder() -> MdpBuilder {
        MdpBuilder::default()
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a]
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn label(&self, s: StateId) -> &Letter {
        &self.labels[s]
    }

    pub fn enabled(&self, s: StateId) -> &[ActionId] {
        &self.enabled[s]
    }

    /// Outcome distribution of an enabled action.
    pub fn outcomes(&self, s: StateId, a: ActionId) -> Option<&[(StateId, Rational)]> {
        let slot = self.enabled[s].iter().position(|&e| e == a)?;
        Some(&self.transitions[s][slot])
    }

    /// Samples a successor using 64 fresh random bits, compared exactly
    /// against the cumulative rational distribution.
    pub(crate) fn sample(&self, s: StateId, a: ActionId, rng: &mut impl RngCore) -> StateId {
        let outcomes = self.outcomes(s, a).expect("action enabled");
        let draw = Rational::new(rng.next_u64().into(), (u128::from(u64::MAX) + 1).into());
        let mut acc = Rational::zero();
        for (t, p) in outcomes {
            acc += p;
            if draw < acc {
                return *t;
            }
        }
        outcomes.last().expect("distribution nonempty").0
    }
}

/// Incremental construction with validation at `build`.
#[derive(Default)]
pub struct MdpBuilder {
    states: Vec<(String, Letter, Option<Vec<String>>)>,
    actions: Vec<String>,
    transitions: Vec<(String, String, String, Rational)>,
    initial: Option<String>,
}

impl MdpBuilder {
    pub fn action(mut self, name: &str) -> Self {
        self.actions.push(String::from(name));
        self
    }

    /// Adds a state; `enabled: None` enables every action.
    pub fn state(mut self, name: &str, label: Letter, enabled: Option<&[&str]>) -> Self {
        self.states.push((
            String::from(name),
            label,
            enabled.map(|list| list.iter().map(|s| String::from(*s)).collect()),
        ));
        self
    }

    pub fn transition(mut self, from: &str, action: &str, to: &str, prob: Rational) -> Self {
        self.transitions.push((
            String::from(from),
            String::from(action),
            String::from(to),
            prob,
        ));
        self
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.initial = Some(String::from(name));
        self
    }

    pub fn build(self) -> Result<LabeledMdp, MdpError> {
        if self.states.is_empty() {
            return Err(MdpError::new("at least one state required"));
        }
        if self.actions.is_empty() {
            return Err(MdpError::new("at least one action required"));
        }
        let state_names: Vec<String> = self.states.iter().map(|(n, _, _)| n.clone()).collect();
        let mut sorted_names = state_names.clone();
        sorted_names.sort();
        sorted_names.dedup();
        if sorted_names.len() != state_names.len() {
            return Err(MdpError::new("duplicate state name"));
        }
        let action_names = self.actions;
        let find_state = |name: &str| {
            state_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| MdpError(alloc::format!("unknown state {name:?}")))
        };
        let find_action = |name: &str| {
            action_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| MdpError(alloc::format!("unknown action {name:?}")))
        };

        let labels: Vec<Letter> = self.states.iter().map(|(_, l, _)| l.clone()).collect();
        let mut enabled: Vec<Vec<ActionId>> = Vec::with_capacity(self.states.len());
        for (_, _, en) in &self.states {
            let ids = match en {
                None => (0..action_names.len()).collect(),
                Some(list) => {
                    let mut ids = Vec::with_capacity(list.len());
                    for name in list {
                        ids.push(find_action(name)?);
                    }
                    ids.sort_unstable();
                    ids.dedup();
                    if ids.is_empty() {
                        return Err(MdpError::new("state with no enabled action"));
                    }
                    ids
                }
            };
            enabled.push(ids);
        }

        let mut transitions: Vec<Vec<Vec<(StateId, Rational)>>> = enabled
            .iter()
            .map(|en| alloc::vec![Vec::new(); en.len()])
            .collect();
        for (from, action, to, prob) in self.transitions {
            let s = find_state(&from)?;
            let a = find_action(&action)?;
            let t = find_state(&to)?;
            if prob.is_negative() {
                return Err(MdpError(alloc::format!(
                    "negative probability on ({from}, {action})"
                )));
            }
            let slot = enabled[s]
                .iter()
                .position(|&e| e == a)
                .ok_or_else(|| MdpError(alloc::format!("action {action:?} disabled in {from:?}")))?;
            transitions[s][slot].push((t, prob));
        }

        // merge duplicate targets, check each distribution sums to one
        for (s, rows) in transitions.iter_mut().enumerate() {
            for (slot, row) in rows.iter_mut().enumerate() {
                let mut merged: BTreeMap<StateId, Rational> = BTreeMap::new();
                for (t, p) in row.drain(..) {
                    *merged.entry(t).or_insert_with(Rational::zero) += p;
                }
                *row = merged.into_iter().filter(|(_, p)| !p.is_zero()).collect();
                let total: Rational = row.iter().map(|(_, p)| p.clone()).sum();
                if !total.is_one() {
                    return Err(MdpError(alloc::format!(
                        "distribution for ({}, {}) sums to {} instead of 1",
                        state_names[s], action_names[enabled[s][slot]], total
                    )));
                }
            }
        }

        let initial = match self.initial {
            Some(name) => find_state(&name)?,
            None => 0,
        };
        Ok(LabeledMdp {
            state_names,
            action_names,
            labels,
            enabled,
            transitions,
            initial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpError(pub String);

impl MdpError {
    fn new(msg: &str) -> Self {
        MdpError(String::from(msg))
    }
}

impl core::fmt::Display for MdpError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for MdpError {}

/// Reachable synchronous product of an MDP with a reward machine.
///
/// The machine reads the label of the state being left, so the discounted
/// return of a product run equals the machine value of the run's label word.
/// The step reward depends on the product state only.
#[derive(Clone, Debug)]
pub struct ProductMdp {
    // product state: (mdp state, machine state)
    states: Vec<(StateId, StateId)>,
    index: BTreeMap<(StateId, StateId), usize>,
    // per product state: machine successor, reward, per-action outcomes
    machine_next: Vec<StateId>,
    rewards: Vec<f64>,
    enabled: Vec<Vec<ActionId>>,
    outcomes: Vec<Vec<Vec<(usize, f64)>>>,
    initial: usize,
    lambda: f64,
}

/// A state label used a proposition outside the machine alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelOutsideAlphabet {
    pub state: String,
    pub label: Letter,
}

impl core::fmt::Display for LabelOutsideAlphabet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "label {} of state {:?} is outside the machine alphabet",
            self.label, self.state
        )
    }
}

impl core::error::Error for LabelOutsideAlphabet {}

/// Builds the reachable product of an MDP with a tabulated machine.
pub fn product(
    mdp: &LabeledMdp,
    machine: &RewardMachine,
) -> Result<ProductMdp, ProductError> {
    product_on_the_fly(mdp, &mut &*machine)
}

/// Builds the reachable product, materializing machine states on demand.
///
/// This is the route for discount factors close to one, where tabulating the
/// machine is hopeless but the label words the MDP can produce only touch a
/// sliver of it. The machine alphabet must cover every label.
pub fn product_on_the_fly<M: MachineView>(
    mdp: &LabeledMdp,
    machine: &mut M,
) -> Result<ProductMdp, ProductError> {
    let mut letter_of_state = Vec::with_capacity(mdp.num_states());
    for s in 0..mdp.num_states() {
        let li = machine.alphabet().index_of(mdp.label(s)).ok_or_else(|| {
            ProductError::LabelOutsideAlphabet(LabelOutsideAlphabet {
                state: String::from(mdp.state_name(s)),
                label: mdp.label(s).clone(),
            })
        })?;
        letter_of_state.push(li);
    }
    let lambda = crate::rational::to_f64(machine.lambda());

    let mut states = Vec::new();
    let mut index = BTreeMap::new();
    let intern = |pair: (StateId, StateId),
                      states: &mut Vec<(StateId, StateId)>,
                      index: &mut BTreeMap<(StateId, StateId), usize>| {
        *index.entry(pair).or_insert_with(|| {
            states.push(pair);
            states.len() - 1
        })
    };

    let start = intern((mdp.initial(), machine.initial_state()), &mut states, &mut index);
    let mut machine_next = Vec::new();
    let mut rewards = Vec::new();
    let mut enabled = Vec::new();
    let mut outcomes = Vec::new();
    let mut next = 0usize;
    while next < states.len() {
        let (s, q) = states[next];
        let li = letter_of_state[s];
        let (q_next, reward) = machine.step(q, li).map_err(ProductError::Machine)?;
        machine_next.push(q_next);
        rewards.push(crate::rational::to_f64(&reward));
        enabled.push(mdp.enabled(s).to_vec());
        let mut per_action = Vec::with_capacity(mdp.enabled(s).len());
        for &a in mdp.enabled(s) {
            let row = mdp
                .outcomes(s, a)
                .expect("enabled action has a distribution")
                .iter()
                .map(|(t, p)| {
                    let target = intern((*t, q_next), &mut states, &mut index);
                    (target, crate::rational::to_f64(p))
                })
                .collect();
            per_action.push(row);
        }
        outcomes.push(per_action);
        next += 1;
    }

    Ok(ProductMdp {
        states,
        index,
        machine_next,
        rewards,
        enabled,
        outcomes,
        initial: start,
        lambda,
    })
}

/// Why the product could not be formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductError {
    LabelOutsideAlphabet(LabelOutsideAlphabet),
    /// On-the-fly machine exploration failed, e.g. over budget.
    Machine(crate::machine::CompileError),
}

impl core::fmt::Display for ProductError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProductError::LabelOutsideAlphabet(e) => write!(f, "{e}"),
            ProductError::Machine(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ProductError {}

impl ProductMdp {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn state(&self, idx: usize) -> (StateId, StateId) {
        self.states[idx]
    }

    pub fn index_of(&self, mdp_state: StateId, machine_state: StateId) -> Option<usize> {
        self.index.get(&(mdp_state, machine_state)).copied()
    }

    pub fn step_reward(&self, idx: usize) -> f64 {
        self.rewards[idx]
    }

    pub fn enabled(&self, idx: usize) -> &[ActionId] {
        &self.enabled[idx]
    }

    /// Machine state after leaving this product state.
    pub fn machine_successor(&self, idx: usize) -> StateId {
        self.machine_next[idx]
    }

    pub fn action_outcomes(&self, idx: usize, slot: usize) -> &[(usize, f64)] {
        &self.outcomes[idx][slot]
    }
}

/// Optimal discounted values over product states.
#[derive(Clone, Debug)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub iterations: usize,
}

impl ValueFunction {
    pub fn at_initial(&self, product: &ProductMdp) -> f64 {
        self.values[product.initial()]
    }
}

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Sweep threshold that certifies a sup-norm distance of at most `tol` to
/// the fixed point.
fn sweep_threshold(lambda: f64, tol: f64) -> f64 {
    if lambda <= 0.0 {
        tol
    } else {
        tol * (1.0 - lambda) / (2.0 * lambda)
    }
}

/// Value iteration to sup-norm accuracy `tol`, deterministic sweep order.
pub fn value_iteration(product: &ProductMdp, tol: f64) -> ValueFunction {
    assert!(tol > 0.0, "tolerance must be positive");
    let threshold = sweep_threshold(product.lambda(), tol);
    let n = product.num_states();
    let mut values = alloc::vec![0.0f64; n];
    let mut fresh = alloc::vec![0.0f64; n];
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let mut residual = 0.0f64;
        for idx in 0..n {
            let mut best = f64::NEG_INFINITY;
            for slot in 0..product.enabled(idx).len() {
                let mut acc = 0.0;
                for &(t, p) in product.action_outcomes(idx, slot) {
                    acc += p * values[t];
                }
                if acc > best {
                    best = acc;
                }
            }
            fresh[idx] = product.step_reward(idx) + product.lambda() * best;
            residual = residual.max(fabs(fresh[idx] - values[idx]));
        }
        core::mem::swap(&mut values, &mut fresh);
        if residual <= threshold || product.lambda() == 0.0 {
            break;
        }
    }
    ValueFunction { values, iterations }
}

/// Deterministic finite-memory policy: reward-machine states as memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePolicy {
    pub memory_states: usize,
    pub initial_memory: StateId,
    /// `(memory, mdp state) -> (action, next memory)`.
    pub table: BTreeMap<(StateId, StateId), (ActionId, StateId)>,
}

impl FinitePolicy {
    pub fn act(&self, memory: StateId, state: StateId) -> Option<(ActionId, StateId)> {
        self.table.get(&(memory, state)).copied()
    }
}

/// Greedy policy from a value function; ties break toward the smallest
/// action index.
pub fn extract_policy(product: &ProductMdp, values: &ValueFunction) -> FinitePolicy {
    let mut table = BTreeMap::new();
    for idx in 0..product.num_states() {
        let (s, q) = product.state(idx);
        let mut best_action = product.enabled(idx)[0];
        let mut best_value = f64::NEG_INFINITY;
        for (slot, &a) in product.enabled(idx).iter().enumerate() {
            let mut acc = 0.0;
            for &(t, p) in product.action_outcomes(idx, slot) {
                acc += p * values.values[t];
            }
            if acc > best_value {
                best_value = acc;
                best_action = a;
            }
        }
        table.insert((q, s), (best_action, product.machine_successor(idx)));
    }
    let memory_states = table
        .keys()
        .map(|(q, _)| q + 1)
        .max()
        .unwrap_or(1)
        .max(product.state(product.initial()).1 + 1);
    FinitePolicy {
        memory_states,
        initial_memory: product.state(product.initial()).1,
        table,
    }
}

/// The policy visited a pair its table does not cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyIncomplete {
    pub memory: StateId,
    pub state: StateId,
}

impl core::fmt::Display for PolicyIncomplete {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "policy undefined at memory {} in state {}",
            self.memory, self.state
        )
    }
}

impl core::error::Error for PolicyIncomplete {}

/// Iterative policy evaluation of the induced chain, to accuracy `tol`.
pub fn policy_value(
    mdp: &LabeledMdp,
    machine: &RewardMachine,
    policy: &FinitePolicy,
    tol: f64,
) -> Result<f64, PolicyValueError> {
    policy_value_on_the_fly(mdp, &mut &*machine, policy, tol)
}

/// Policy evaluation against an on-the-fly machine.
pub fn policy_value_on_the_fly<M: MachineView>(
    mdp: &LabeledMdp,
    machine: &mut M,
    policy: &FinitePolicy,
    tol: f64,
) -> Result<f64, PolicyValueError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let lambda = crate::rational::to_f64(machine.lambda());

    // reachable closure under the policy
    let mut states: Vec<(StateId, StateId)> = Vec::new();
    let mut index: BTreeMap<(StateId, StateId), usize> = BTreeMap::new();
    let start = (mdp.initial(), policy.initial_memory);
    states.push(start);
    index.insert(start, 0);
    let mut rows: Vec<(f64, ActionId, Vec<(usize, f64)>)> = Vec::new();
    let mut next = 0usize;
    while next < states.len() {
        let (s, q) = states[next];
        let li = machine
            .alphabet()
            .index_of(mdp.label(s))
            .ok_or_else(|| PolicyValueError::Label(mdp.label(s).clone()))?;
        let (action, q_next) =
            policy.act(q, s).ok_or(PolicyValueError::Incomplete(PolicyIncomplete {
                memory: q,
                state: s,
            }))?;
        let (machine_next, step_reward) =
            machine.step(q, li).map_err(PolicyValueError::Machine)?;
        debug_assert_eq!(machine_next, q_next, "policy memory tracks the machine");
        let reward = crate::rational::to_f64(&step_reward);
        let outcomes = mdp
            .outcomes(s, action)
            .ok_or(PolicyValueError::DisabledAction { state: s, action })?;
        let mut row = Vec::with_capacity(outcomes.len());
        for (t, p) in outcomes {
            let pair = (*t, q_next);
            let target = *index.entry(pair).or_insert_with(|| {
                states.push(pair);
                states.len() - 1
            });
            row.push((target, crate::rational::to_f64(p)));
        }
        rows.push((reward, action, row));
        next += 1;
    }

    let threshold = sweep_threshold(lambda, tol);
    let n = states.len();
    let mut values = alloc::vec![0.0f64; n];
    let mut fresh = alloc::vec![0.0f64; n];
    loop {
        let mut residual = 0.0f64;
        for idx in 0..n {
            let (reward, _, ref row) = rows[idx];
            let mut acc = 0.0;
            for &(t, p) in row {
                acc += p * values[t];
            }
            fresh[idx] = reward + lambda * acc;
            residual = residual.max(fabs(fresh[idx] - values[idx]));
        }
        core::mem::swap(&mut values, &mut fresh);
        if residual <= threshold || lambda == 0.0 {
            break;
        }
    }
    Ok(values[0])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyValueError {
    Incomplete(PolicyIncomplete),
    DisabledAction { state: StateId, action: ActionId },
    Label(Letter),
    Machine(crate::machine::CompileError),
}

impl core::fmt::Display for PolicyValueError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PolicyValueError::Incomplete(e) => write!(f, "{e}"),
            PolicyValueError::DisabledAction { state, action } => {
                write!(f, "policy picked disabled action {action} in state {state}")
            }
            PolicyValueError::Label(l) => {
                write!(f, "label {l} outside the machine alphabet")
            }
            PolicyValueError::Machine(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PolicyValueError {}

/// A simulated run: states, actions taken, and the label word.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
    pub word: FiniteWord,
}

/// Simulates the policy for `steps` steps; deterministic given the seed.
pub fn simulate(
    mdp: &LabeledMdp,
    policy: &FinitePolicy,
    steps: usize,
    seed: u64,
) -> Result<SimRun, PolicyIncomplete> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut state = mdp.initial();
    let mut memory = policy.initial_memory;
    let mut run = SimRun {
        states: alloc::vec![state],
        actions: Vec::with_capacity(steps),
        word: alloc::vec![mdp.label(state).clone()],
    };
    for _ in 0..steps {
        let (action, next_memory) =
            policy.act(memory, state).ok_or(PolicyIncomplete { memory, state })?;
        let next_state = mdp.sample(state, action, &mut rng);
        run.actions.push(action);
        state = next_state;
        memory = next_memory;
        run.states.push(state);
        run.word.push(mdp.label(state).clone());
    }
    Ok(run)
}

/// Exact brute-force argmax of `min(l1^k0 (1 - l2^k1), l2^(k0+k1))` over
/// `k1 in [0, k_max]`; the smallest maximizer is returned.
///
/// The argmax must be interior: if it lands on `k_max` the search window was
/// too small and an error is returned.
pub fn best_block_search(
    lambda1: &Rational,
    lambda2: &Rational,
    k0: usize,
    k_max: usize,
) -> Result<usize, BlockSearchError> {
    if !(lambda1 > &Rational::zero()
        && lambda1 < lambda2
        && lambda2 < &Rational::one())
    {
        return Err(BlockSearchError::InvalidFactors);
    }
    let head = pow(lambda1, k0);
    let mut tail = pow(lambda2, k0);
    let mut grow = Rational::one();
    let mut best_k = 0usize;
    let mut best_value: Option<Rational> = None;
    for k1 in 0..=k_max {
        // grow = l2^k1, tail = l2^(k0+k1)
        let value = (&head * (Rational::one() - &grow)).min(tail.clone());
        if best_value.as_ref().map(|b| &value > b).unwrap_or(true) {
            best_value = Some(value);
            best_k = k1;
        }
        grow *= lambda2;
        tail *= lambda2;
    }
    if best_k == k_max {
        Err(BlockSearchError::ArgmaxAtBoundary { k_max })
    } else {
        Ok(best_k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockSearchError {
    /// Requires `0 < lambda1 < lambda2 < 1`.
    InvalidFactors,
    /// Increase `k_max`: the maximizer was not interior.
    ArgmaxAtBoundary { k_max: usize },
}

impl core::fmt::Display for BlockSearchError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BlockSearchError::InvalidFactors => {
                f.write_str("block search requires 0 < lambda1 < lambda2 < 1")
            }
            BlockSearchError::ArgmaxAtBoundary { k_max } => {
                write!(f, "argmax at k_max = {k_max}; enlarge the search window")
            }
        }
    }
}

impl core::error::Error for BlockSearchError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::compile;
    use crate::rational::rat;
    use crate::trace::letter;

    fn two_state_mdp() -> LabeledMdp {
        LabeledMdp::builder()
            .action("stay")
            .action("move")
            .state("s0", letter(&["p"]), None)
            .state("s1", Letter::empty(), None)
            .transition("s0", "stay", "s0", rat(1, 1))
            .transition("s0", "move", "s1", rat(1, 1))
            .transition("s1", "stay", "s1", rat(1, 1))
            .transition("s1", "move", "s1", rat(1, 1))
            .initial("s0")
            .build()
            .unwrap()
    }

    #[test]
    fn builder_validates_distributions() {
        let err = LabeledMdp::builder()
            .action("a")
            .state("s", Letter::empty(), None)
            .transition("s", "a", "s", rat(9, 10))
            .build()
            .unwrap_err();
        assert!(err.0.contains("sums to 9/10"), "{err}");
    }

    #[test]
    fn product_projects_and_rewards() {
        let mdp = two_state_mdp();
        let m = compile(&crate::parse("G[1/2] p").unwrap(), &rat(1, 2)).unwrap();
        let p = product(&mdp, &m).unwrap();
        assert!(p.num_states() <= mdp.num_states() * m.num_states());
        // reward at the initial product state is r(q0, {p})
        let li = m.letter_index(&letter(&["p"])).unwrap();
        assert_eq!(
            p.step_reward(p.initial()),
            crate::rational::to_f64(m.reward(m.initial(), li))
        );
    }

    /// Scaling all step rewards by a positive constant scales values but
    /// leaves the greedy policy unchanged.
    #[test]
    fn greedy_argmax_scale_invariant() {
        let mdp = two_state_mdp();
        let f = crate::parse("G[1/2] p & F[1/2] !p").unwrap();
        let m = compile(&f, &rat(1, 2)).unwrap();
        let prod = product(&mdp, &m).unwrap();
        let values = value_iteration(&prod, 1e-10);
        let policy = extract_policy(&prod, &values);

        let mut scaled = prod.clone();
        for r in &mut scaled.rewards {
            *r *= 3.5;
        }
        let scaled_values = value_iteration(&scaled, 1e-10);
        let scaled_policy = extract_policy(&scaled, &scaled_values);
        assert_eq!(policy.table, scaled_policy.table);
    }

    #[test]
    fn simulate_is_deterministic() {
        let mdp = two_state_mdp();
        let f = crate::parse("G[1/2] p & F[1/2] !p").unwrap();
        let m = compile(&f, &rat(1, 2)).unwrap();
        let prod = product(&mdp, &m).unwrap();
        let values = value_iteration(&prod, 1e-9);
        let policy = extract_policy(&prod, &values);
        let a = simulate(&mdp, &policy, 30, 42).unwrap();
        let b = simulate(&mdp, &policy, 30, 42).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.word, b.word);
    }
}
