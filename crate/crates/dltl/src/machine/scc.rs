//! Strongly connected components of the transition graph.
//!
//! Compiled machines satisfy a structural invariant: within any SCC, every
//! transition that stays inside the component pays the same reward, either
//! `0` or `1 - lambda`. The decomposition orders components so transitions
//! only go from a component to one with the same or a later index.

use alloc::vec;
use alloc::vec::Vec;

use crate::rational::Rational;

use super::{RewardMachine, StateId};

/// SCC partition of a machine.
#[derive(Clone, Debug)]
pub struct SccReport {
    /// Components ordered so that every transition goes from its component
    /// to one with an equal or greater index. States within a component are
    /// sorted.
    pub components: Vec<Vec<StateId>>,
    /// Component index per state.
    pub component_of: Vec<usize>,
    /// For components with at least one internal transition, the unique
    /// internal reward.
    pub internal_reward: Vec<Option<Rational>>,
}

/// Two internal transitions of one SCC pay different rewards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedSccReward {
    pub state_a: StateId,
    pub letter_a: usize,
    pub reward_a: Rational,
    pub state_b: StateId,
    pub letter_b: usize,
    pub reward_b: Rational,
}

impl core::fmt::Display for MixedSccReward {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "SCC pays two internal rewards: {} at (q{}, letter {}) vs {} at (q{}, letter {})",
            self.reward_a, self.state_a, self.letter_a, self.reward_b, self.state_b, self.letter_b
        )
    }
}

impl core::error::Error for MixedSccReward {}

pub(super) fn decompose(machine: &RewardMachine) -> Result<SccReport, MixedSccReward> {
    let components = tarjan(machine);
    let mut component_of = vec![usize::MAX; machine.num_states()];
    for (idx, comp) in components.iter().enumerate() {
        for &q in comp {
            component_of[q] = idx;
        }
    }

    let mut internal_reward: Vec<Option<(StateId, usize, Rational)>> = vec![None; components.len()];
    for q in 0..machine.num_states() {
        for li in 0..machine.alphabet().len() {
            let t = machine.successor(q, li);
            if component_of[q] != component_of[t] {
                continue;
            }
            let r = machine.reward(q, li);
            match &internal_reward[component_of[q]] {
                None => internal_reward[component_of[q]] = Some((q, li, r.clone())),
                Some((q0, l0, r0)) if r0 != r => {
                    return Err(MixedSccReward {
                        state_a: *q0,
                        letter_a: *l0,
                        reward_a: r0.clone(),
                        state_b: q,
                        letter_b: li,
                        reward_b: r.clone(),
                    })
                }
                Some(_) => {}
            }
        }
    }

    Ok(SccReport {
        components,
        component_of,
        internal_reward: internal_reward.into_iter().map(|w| w.map(|(_, _, r)| r)).collect(),
    })
}

/// Iterative Tarjan. Components come out with successors first, so the list
/// is reversed to match the transition-ordering convention above.
fn tarjan(machine: &RewardMachine) -> Vec<Vec<StateId>> {
    let n = machine.num_states();
    let letters = machine.alphabet().len();
    const UNSEEN: usize = usize::MAX;

    let mut index = vec![UNSEEN; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<StateId> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<StateId>> = Vec::new();
    // work stack of (state, next letter to scan)
    let mut work: Vec<(StateId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        work.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut li)) = work.last_mut() {
            if *li < letters {
                let l = *li;
                *li += 1;
                let w = machine.successor(v, l);
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack nonempty");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }

    components.reverse();
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::trace::Alphabet;

    #[test]
    fn order_follows_transitions() {
        // two-state chain: 0 -> 1, 1 -> 1
        let alphabet = Alphabet::new([]).unwrap();
        let m = RewardMachine::from_parts(
            alphabet,
            rat(1, 2),
            alloc::vec![super::super::StatePayload::Start, super::super::StatePayload::Top],
            alloc::vec![alloc::vec![1], alloc::vec![1]],
            alloc::vec![alloc::vec![rat(0, 1)], alloc::vec![rat(1, 2)]],
            0,
        )
        .unwrap();
        let report = m.scc_decompose().unwrap();
        assert_eq!(report.components, alloc::vec![alloc::vec![0], alloc::vec![1]]);
        assert_eq!(report.internal_reward[0], None);
        assert_eq!(report.internal_reward[1], Some(rat(1, 2)));
        for q in 0..2 {
            for li in 0..1 {
                let t = m.successor(q, li);
                assert!(report.component_of[q] <= report.component_of[t]);
            }
        }
    }
}
