//! Episodic optimistic model-based learning on the implicit history tree.
//!
//! The learner never sees transition probabilities. It plans by backward
//! induction over the nodes it has discovered, treating state-action pairs
//! visited fewer than `known_threshold` times as paying the maximum value;
//! optimism steers episodes into whatever is still unknown, and learning
//! settles once the greedy optimistic policy stops meeting unknown pairs.
//! Rewards need no estimation: the leaf value of an observed history is
//! computed from the formula directly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::formula::Formula;
use crate::rational::{to_f64, Rational};
use crate::semantics::{eval_finite, horizon};
use crate::mdp::{ActionId, StateId};
use crate::trace::{FiniteWord, Letter};

use super::{Environment, LearnError, LearnReport};

/// Tuning knobs for [`pac_learn`].
#[derive(Clone, Debug)]
pub struct PacOptions {
    /// Visits before a state-action pair counts as known. `None` derives a
    /// threshold from the confidence parameter.
    pub known_threshold: Option<usize>,
    /// Hard cap on episodes.
    pub max_episodes: usize,
    /// Consecutive episodes without any unknown visit before stopping.
    pub patience: usize,
}

impl Default for PacOptions {
    fn default() -> Self {
        PacOptions { known_threshold: None, max_episodes: 20_000, patience: 25 }
    }
}

/// Policy over label histories, total on whatever the learner explored.
pub struct HistoryPolicy {
    horizon: usize,
    hist_index: BTreeMap<(usize, Letter), usize>,
    root_label: Letter,
    // (mdp state, hist id) -> action
    choice: BTreeMap<(StateId, usize), ActionId>,
}

const ROOT_PARENT: usize = usize::MAX;

impl HistoryPolicy {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Action for the observed history (including the current label) in the
    /// given state; `None` on histories the learner never saw.
    pub fn act(&self, history: &[Letter], state: StateId) -> Option<ActionId> {
        let mut hist = 0usize;
        if history.first() != Some(&self.root_label) {
            return None;
        }
        for letter in &history[1..] {
            hist = *self.hist_index.get(&(hist, letter.clone()))?;
        }
        self.choice.get(&(state, hist)).copied()
    }
}

struct NodeStats {
    state: StateId,
    depth: usize,
    hist: usize,
    enabled: Vec<ActionId>,
    // per enabled slot: visit count and successor counts
    visits: Vec<u64>,
    successors: Vec<BTreeMap<usize, u64>>,
    leaf_value: Option<f64>,
}

/// Learns a near-optimal finite-horizon policy for the formula with unknown
/// transitions. The horizon is chosen so truncation costs at most half of
/// `epsilon`; the returned policy is greedy in the learned empirical model.
pub fn pac_learn<E: Environment>(
    env: &mut E,
    formula: &Formula,
    epsilon: &Rational,
    confidence: &Rational,
    seed: u64,
    options: &PacOptions,
) -> Result<(HistoryPolicy, LearnReport), LearnError> {
    if epsilon <= &Rational::zero() || epsilon >= &Rational::one() {
        return Err(LearnError::InvalidParameter(alloc::format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    if confidence <= &Rational::zero() || confidence >= &Rational::one() {
        return Err(LearnError::InvalidParameter(alloc::format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let half = epsilon / Rational::from_integer(2.into());
    let depth_cap = horizon(formula, &half);
    let known_threshold = options.known_threshold.unwrap_or_else(|| {
        // crude confidence scaling: more certainty, more visits
        let inv = to_f64(&(Rational::one() / confidence));
        let scaled = 6.0 * libm_ln(inv.max(1.0));
        // ceil without std
        let mut visits = scaled as usize;
        if (visits as f64) < scaled {
            visits += 1;
        }
        visits + 10
    }) as u64;

    // history interning shared with the returned policy
    let mut hist_index: BTreeMap<(usize, Letter), usize> = BTreeMap::new();
    let mut hist_parents: Vec<(usize, Letter)> = Vec::new();
    let (_, root_label) = env.reset();
    hist_parents.push((ROOT_PARENT, root_label.clone()));

    let mut nodes: Vec<NodeStats> = Vec::new();
    let mut node_index: BTreeMap<(StateId, usize), usize> = BTreeMap::new();

    let word_of = |hist_parents: &[(usize, Letter)], mut hist: usize| -> FiniteWord {
        let mut rev = Vec::new();
        loop {
            let (parent, letter) = &hist_parents[hist];
            rev.push(letter.clone());
            if *parent == ROOT_PARENT {
                break;
            }
            hist = *parent;
        }
        rev.reverse();
        rev
    };

    let mut trace = Vec::new();
    let mut episodes = 0usize;
    let mut quiet_streak = 0usize;
    let mut optimistic_root = 1.0f64;

    while episodes < options.max_episodes && quiet_streak < options.patience {
        episodes += 1;
        // plan optimistically over everything discovered so far
        let plan = plan_values(&nodes, known_threshold, true);
        if let Some(v) = plan.first() {
            optimistic_root = *v;
        }

        let (root_state, _) = env.reset();
        let mut hist = 0usize;
        let mut depth = 0usize;
        let mut node = intern_node(
            &mut nodes,
            &mut node_index,
            root_state,
            hist,
            depth,
            depth_cap,
            env,
            formula,
            &word_of(&hist_parents, hist),
        );
        let mut saw_unknown = false;
        while depth < depth_cap {
            // greedy on the optimistic plan; fresh nodes explore in slot order
            let slot = best_slot(&nodes, &plan, node, known_threshold);
            if nodes[node].visits[slot] < known_threshold {
                saw_unknown = true;
            }
            let action = nodes[node].enabled[slot];
            let (next_state, letter) = env.step(action);
            let child_hist = *hist_index.entry((hist, letter.clone())).or_insert_with(|| {
                hist_parents.push((hist, letter.clone()));
                hist_parents.len() - 1
            });
            depth += 1;
            let child = intern_node(
                &mut nodes,
                &mut node_index,
                next_state,
                child_hist,
                depth,
                depth_cap,
                env,
                formula,
                &word_of(&hist_parents, child_hist),
            );
            nodes[node].visits[slot] += 1;
            *nodes[node].successors[slot].entry(child).or_insert(0) += 1;
            node = child;
            hist = child_hist;
        }
        trace.push(nodes[node].leaf_value.unwrap_or(0.0));
        quiet_streak = if saw_unknown { 0 } else { quiet_streak + 1 };
    }

    // commit to the empirical model: unvisited pairs are worthless
    let committed = plan_values(&nodes, known_threshold, false);
    let mut choice = BTreeMap::new();
    for (idx, stats) in nodes.iter().enumerate() {
        if stats.leaf_value.is_some() {
            continue;
        }
        let slot = best_committed_slot(&nodes, &committed, idx);
        choice.insert((stats.state, stats.hist), stats.enabled[slot]);
    }
    let value_estimate = committed.first().copied().unwrap_or(0.0);

    let policy = HistoryPolicy { horizon: depth_cap, hist_index, root_label, choice };
    let report = LearnReport {
        seed,
        episodes,
        value_estimate,
        suboptimality_estimate: Some((optimistic_root - value_estimate).max(0.0)),
        trace,
    };
    Ok((policy, report))
}

#[allow(clippy::too_many_arguments)]
fn intern_node<E: Environment>(
    nodes: &mut Vec<NodeStats>,
    node_index: &mut BTreeMap<(StateId, usize), usize>,
    state: StateId,
    hist: usize,
    depth: usize,
    depth_cap: usize,
    env: &E,
    formula: &Formula,
    word: &FiniteWord,
) -> usize {
    if let Some(&idx) = node_index.get(&(state, hist)) {
        return idx;
    }
    let leaf_value =
        (depth == depth_cap).then(|| to_f64(&eval_finite(formula, word)));
    let enabled = if leaf_value.is_some() { Vec::new() } else { env.enabled_actions() };
    let slots = enabled.len();
    nodes.push(NodeStats {
        state,
        depth,
        hist,
        enabled,
        visits: alloc::vec![0; slots],
        successors: alloc::vec![BTreeMap::new(); slots],
        leaf_value,
    });
    node_index.insert((state, hist), nodes.len() - 1);
    nodes.len() - 1
}

/// Backward induction over discovered nodes. Optimistic planning values
/// under-known pairs at 1; committed planning scores them by the empirical
/// estimate, or 0 when untried.
fn plan_values(nodes: &[NodeStats], known_threshold: u64, optimistic: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_unstable_by_key(|&i| core::cmp::Reverse(nodes[i].depth));
    let mut values = alloc::vec![0.0f64; nodes.len()];
    for &idx in &order {
        let stats = &nodes[idx];
        if let Some(v) = stats.leaf_value {
            values[idx] = v;
            continue;
        }
        let mut best = 0.0f64;
        for slot in 0..stats.enabled.len() {
            let v = slot_value(stats, slot, &values, known_threshold, optimistic);
            if v > best {
                best = v;
            }
        }
        values[idx] = best;
    }
    values
}

fn slot_value(
    stats: &NodeStats,
    slot: usize,
    values: &[f64],
    known_threshold: u64,
    optimistic: bool,
) -> f64 {
    let visits = stats.visits[slot];
    if optimistic && visits < known_threshold {
        return 1.0;
    }
    if visits == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (&child, &count) in &stats.successors[slot] {
        acc += (count as f64 / visits as f64) * values[child];
    }
    acc
}

fn best_slot(nodes: &[NodeStats], plan: &[f64], node: usize, known_threshold: u64) -> usize {
    let stats = &nodes[node];
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for slot in 0..stats.enabled.len() {
        let v = slot_value(stats, slot, plan, known_threshold, true);
        if v > best_value {
            best_value = v;
            best = slot;
        }
    }
    best
}

fn best_committed_slot(nodes: &[NodeStats], committed: &[f64], node: usize) -> usize {
    let stats = &nodes[node];
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for slot in 0..stats.enabled.len() {
        let v = slot_value(stats, slot, committed, u64::MAX, false);
        if v > best_value {
            best_value = v;
            best = slot;
        }
    }
    best
}

/// Natural log without std; enough precision for a visit threshold.
fn libm_ln(x: f64) -> f64 {
    // ln(x) via atanh series on the mantissa after range reduction by e
    let mut v = x;
    let mut k = 0i32;
    const E: f64 = core::f64::consts::E;
    while v > E {
        v /= E;
        k += 1;
    }
    while v < 1.0 {
        v *= E;
        k -= 1;
    }
    let t = (v - 1.0) / (v + 1.0);
    let t2 = t * t;
    let mut term = t;
    let mut sum = 0.0;
    for n in 0..30 {
        sum += term / (2 * n + 1) as f64;
        term *= t2;
    }
    k as f64 + 2.0 * sum
}
