//! Finite-horizon unrolling of a labeled MDP.
//!
//! States carry the full label history since the start; leaves at the
//! horizon pay the finite-word value of the formula on their history and
//! everything else pays nothing. Strict discounting guarantees the leaf
//! value is within `lambda_max^T` of the value of any infinite extension,
//! which is what makes the reduction sound.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::formula::Formula;
use crate::rational::{to_f64, Rational};
use crate::semantics::{eval_finite, horizon};
use crate::mdp::{ActionId, LabeledMdp, StateId};
use crate::trace::{FiniteWord, Letter};

/// Default cap on unrolled tree nodes.
pub const DEFAULT_UNROLL_BUDGET: usize = 1_000_000;

/// Horizon-`T` tree MDP over `(mdp state, label history)` nodes.
pub struct UnrolledMdp {
    horizon: usize,
    // history tree: (parent id or MAX for the root, appended letter)
    hist_nodes: Vec<(usize, Letter)>,
    // per tree node: mdp state, history id, depth
    nodes: Vec<(StateId, usize, usize)>,
    // for non-leaf nodes, per enabled action: outcome distribution
    enabled: Vec<Vec<ActionId>>,
    outcomes: Vec<Vec<Vec<(usize, f64)>>>,
    leaf_reward: Vec<Option<f64>>,
}

const ROOT: usize = usize::MAX;

/// Unrolls to the horizon needed so the truncation error is at most
/// `epsilon`.
pub fn unroll(
    mdp: &LabeledMdp,
    formula: &Formula,
    epsilon: &Rational,
    budget: usize,
) -> Result<UnrolledMdp, UnrollError> {
    unroll_with_horizon(mdp, formula, horizon(formula, epsilon), budget)
}

/// Unrolls to an explicit horizon.
pub fn unroll_with_horizon(
    mdp: &LabeledMdp,
    formula: &Formula,
    horizon: usize,
    budget: usize,
) -> Result<UnrolledMdp, UnrollError> {
    let mut hist_nodes: Vec<(usize, Letter)> = Vec::new();
    let mut hist_index: BTreeMap<(usize, Letter), usize> = BTreeMap::new();
    let root_hist = 0usize;
    hist_nodes.push((ROOT, mdp.label(mdp.initial()).clone()));

    let mut nodes: Vec<(StateId, usize, usize)> = Vec::new();
    let mut node_index: BTreeMap<(StateId, usize), usize> = BTreeMap::new();
    nodes.push((mdp.initial(), root_hist, 0));
    node_index.insert((mdp.initial(), root_hist), 0);

    let mut enabled: Vec<Vec<ActionId>> = Vec::new();
    let mut outcomes: Vec<Vec<Vec<(usize, f64)>>> = Vec::new();
    let mut leaf_reward: Vec<Option<f64>> = Vec::new();

    let mut next = 0usize;
    while next < nodes.len() {
        let (s, hist, depth) = nodes[next];
        if depth == horizon {
            let word = word_of(&hist_nodes, hist);
            leaf_reward.push(Some(to_f64(&eval_finite(formula, &word))));
            enabled.push(Vec::new());
            outcomes.push(Vec::new());
            next += 1;
            continue;
        }
        leaf_reward.push(None);
        enabled.push(mdp.enabled(s).to_vec());
        let mut per_action = Vec::with_capacity(mdp.enabled(s).len());
        for &a in mdp.enabled(s) {
            let mut row = Vec::new();
            for (t, p) in mdp.outcomes(s, a).expect("enabled action") {
                let letter = mdp.label(*t).clone();
                let child_hist = *hist_index.entry((hist, letter.clone())).or_insert_with(|| {
                    hist_nodes.push((hist, letter));
                    hist_nodes.len() - 1
                });
                let key = (*t, child_hist);
                let child = match node_index.get(&key) {
                    Some(&idx) => idx,
                    None => {
                        if nodes.len() >= budget {
                            return Err(UnrollError::Budget { budget, horizon });
                        }
                        nodes.push((*t, child_hist, depth + 1));
                        node_index.insert(key, nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                row.push((child, to_f64(p)));
            }
            per_action.push(row);
        }
        outcomes.push(per_action);
        next += 1;
    }

    Ok(UnrolledMdp { horizon, hist_nodes, nodes, enabled, outcomes, leaf_reward })
}

fn word_of(hist_nodes: &[(usize, Letter)], mut hist: usize) -> FiniteWord {
    let mut rev = Vec::new();
    loop {
        let (parent, letter) = &hist_nodes[hist];
        rev.push(letter.clone());
        if *parent == ROOT {
            break;
        }
        hist = *parent;
    }
    rev.reverse();
    rev
}

impl UnrolledMdp {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// The label word of a node, including the initial state's label; length
    /// is `depth + 1`.
    pub fn word(&self, node: usize) -> FiniteWord {
        word_of(&self.hist_nodes, self.nodes[node].1)
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.leaf_reward[node].is_some()
    }

    pub fn leaf_reward(&self, node: usize) -> Option<f64> {
        self.leaf_reward[node]
    }

    /// Leaves and their rewards.
    pub fn leaves(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.leaf_reward
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
    }

    /// Optimal finite-horizon value at the root, by backward induction.
    pub fn optimal_value(&self) -> f64 {
        self.values(|node, action_values| {
            let _ = node;
            action_values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }

    /// Root value when actions are chosen by the given selector: it sees the
    /// node's label word and MDP state and picks one of the enabled actions.
    pub fn policy_value<F>(&self, mut pick: F) -> f64
    where
        F: FnMut(&FiniteWord, StateId, &[ActionId]) -> ActionId,
    {
        self.values(|node, action_values| {
            let (s, _, _) = self.nodes[node];
            let word = self.word(node);
            let chosen = pick(&word, s, &self.enabled[node]);
            let slot = self.enabled[node]
                .iter()
                .position(|&a| a == chosen)
                .expect("selector picks an enabled action");
            action_values[slot]
        })
    }

    /// Backward induction; `combine` reduces a node's per-action values.
    fn values<F>(&self, mut combine: F) -> f64
    where
        F: FnMut(usize, &[f64]) -> f64,
    {
        let mut value = alloc::vec![0.0f64; self.nodes.len()];
        // nodes were created in nondecreasing depth order
        for node in (0..self.nodes.len()).rev() {
            if let Some(r) = self.leaf_reward[node] {
                value[node] = r;
                continue;
            }
            let action_values: Vec<f64> = self.outcomes[node]
                .iter()
                .map(|row| row.iter().map(|&(t, p)| p * value[t]).sum())
                .collect();
            value[node] = combine(node, &action_values);
        }
        value[0]
    }
}

/// Unrolling exceeded its node budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnrollError {
    /// Shrink the horizon (larger epsilon) or the proposition set.
    Budget { budget: usize, horizon: usize },
}

impl core::fmt::Display for UnrollError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            UnrollError::Budget { budget, horizon } => write!(
                f,
                "unrolling to horizon {horizon} exceeded {budget} nodes; try a larger epsilon or fewer propositions"
            ),
        }
    }
}

impl core::error::Error for UnrollError {}
