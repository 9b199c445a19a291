//! Tabular Q-learning on the on-the-fly product with a reward machine.
//!
//! The learner keeps the machine state as memory, collects the machine's
//! reward for the label being left, and treats `(env state, machine state)`
//! as the Q-table key. Rewards stay in `[0, 1 - lambda]`, so with the
//! optimistic unit initialization every Q-value stays in `[0, 1]`.
//!
//! Episodes select actions online with epsilon-greedy exploration; the
//! backups run over the recorded trajectory in reverse at the end of each
//! episode, which propagates value along the whole path instead of one step
//! per episode. Discount factors near one need that to converge in any
//! reasonable number of episodes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::machine::MachineView;
use crate::mdp::{ActionId, FinitePolicy, StateId};
use crate::rational::to_f64;

use super::{Environment, LearnError, LearnReport};

/// Q-learning hyperparameters.
///
/// The defaults target the deterministic benchmark models in this
/// repository: a constant unit learning rate makes each backup exact on
/// deterministic transitions, the optimistic initialization drives
/// exploration deep into the product, and the epsilon schedule keeps a
/// trickle of random moves. Stochastic environments want `alpha < 1`.
#[derive(Clone, Debug)]
pub struct QHyper {
    pub episodes: usize,
    pub max_steps: usize,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub optimistic_init: f64,
}

impl Default for QHyper {
    fn default() -> Self {
        QHyper {
            episodes: 3000,
            max_steps: 700,
            alpha: 1.0,
            epsilon_start: 0.25,
            epsilon_decay: 0.999,
            epsilon_min: 0.02,
            optimistic_init: 1.0,
        }
    }
}

/// Runs Q-learning against the environment with the machine as the reward
/// and memory structure; returns the greedy policy over everything visited.
pub fn rl_product<E: Environment, M: MachineView>(
    env: &mut E,
    machine: &mut M,
    hyper: &QHyper,
    seed: u64,
) -> Result<(FinitePolicy, LearnReport), LearnError> {
    let lambda = to_f64(machine.lambda());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    // caches keyed by env state id: letter index and enabled actions
    let mut letter_of: BTreeMap<StateId, usize> = BTreeMap::new();
    let mut enabled_of: BTreeMap<StateId, Vec<ActionId>> = BTreeMap::new();
    // machine transition cache in f64 form
    let mut machine_step: BTreeMap<(StateId, usize), (StateId, f64)> = BTreeMap::new();
    let mut q_table: BTreeMap<(StateId, StateId), Vec<f64>> = BTreeMap::new();

    let observe =
        |state: StateId, letter: &crate::trace::Letter,
         letter_of: &mut BTreeMap<StateId, usize>,
         machine: &M| {
            if !letter_of.contains_key(&state) {
                let li = machine
                    .alphabet()
                    .index_of(letter)
                    .ok_or_else(|| LearnError::UnknownLabel(letter.clone()))?;
                letter_of.insert(state, li);
            }
            Ok::<(), LearnError>(())
        };

    let mut epsilon = hyper.epsilon_start;
    let mut trace = Vec::with_capacity(hyper.episodes);
    // (s, q, slot, reward, s_next, q_next) per step of the current episode
    let mut trajectory: Vec<(StateId, StateId, usize, f64, StateId, StateId)> =
        Vec::with_capacity(hyper.max_steps);

    for _ in 0..hyper.episodes {
        let (mut s, letter) = env.reset();
        observe(s, &letter, &mut letter_of, machine)?;
        let mut q = machine.initial_state();
        let mut episode_return = 0.0f64;
        let mut discount = 1.0f64;
        trajectory.clear();

        for _ in 0..hyper.max_steps {
            let li = letter_of[&s];
            let (q_next, reward) = match machine_step.get(&(q, li)) {
                Some(&hit) => hit,
                None => {
                    let (succ, r) = machine
                        .step(q, li)
                        .map_err(|e| LearnError::Budget(alloc::format!("{e}")))?;
                    let entry = (succ, to_f64(&r));
                    machine_step.insert((q, li), entry);
                    entry
                }
            };

            let enabled = enabled_of
                .entry(s)
                .or_insert_with(|| env.enabled_actions())
                .clone();
            let row = q_table
                .entry((s, q))
                .or_insert_with(|| alloc::vec![hyper.optimistic_init; enabled.len()]);
            let slot = if random_unit(&mut rng) < epsilon {
                (rng.next_u64() % enabled.len() as u64) as usize
            } else {
                argmax(row)
            };
            let action = enabled[slot];

            let (s_next, letter) = env.step(action);
            observe(s_next, &letter, &mut letter_of, machine)?;

            trajectory.push((s, q, slot, reward, s_next, q_next));
            episode_return += discount * reward;
            discount *= lambda;
            s = s_next;
            q = q_next;
        }

        // backup in reverse so values flow the whole episode at once;
        // each update is an ordinary Q-learning backup
        for &(s, q, slot, reward, s_next, q_next) in trajectory.iter().rev() {
            let next_best = q_table
                .get(&(s_next, q_next))
                .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .unwrap_or(hyper.optimistic_init);
            let target = reward + lambda * next_best;
            let row = q_table.get_mut(&(s, q)).expect("row interned during the episode");
            row[slot] += hyper.alpha * (target - row[slot]);
        }

        trace.push(episode_return);
        epsilon = (epsilon * hyper.epsilon_decay).max(hyper.epsilon_min);
    }

    // greedy policy over every visited pair, memory advanced by the machine
    let mut table = BTreeMap::new();
    for (&(s, q), row) in &q_table {
        let li = letter_of[&s];
        let (q_next, _) = machine_step[&(q, li)];
        let enabled = &enabled_of[&s];
        table.insert((q, s), (enabled[argmax(row)], q_next));
    }
    let initial_memory = machine.initial_state();
    let value_estimate = q_table
        .get(&(env_initial(env), initial_memory))
        .map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .unwrap_or(0.0);
    let memory_states = table.keys().map(|(q, _)| q + 1).max().unwrap_or(1);

    let policy = FinitePolicy { memory_states, initial_memory, table };
    let report = LearnReport {
        seed,
        episodes: hyper.episodes,
        value_estimate,
        suboptimality_estimate: None,
        trace,
    };
    Ok((policy, report))
}

fn env_initial<E: Environment>(env: &mut E) -> StateId {
    env.reset().0
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Uniform draw in `[0, 1)` from 53 random bits.
fn random_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
