//! Learning with unknown transition probabilities.
//!
//! Two routes. For arbitrary (possibly non-uniformly discounted) formulas,
//! strict discounting bounds how far the future matters, so an episodic
//! finite-horizon learner on the label-history tree is probably
//! approximately correct; see [`pac_learn`]. For uniformly discounted
//! formulas the reward machine turns the problem into plain discounted
//! reward on the on-the-fly product, and tabular Q-learning applies; see
//! [`rl_product`]. Learners interact through [`Environment`] only and never
//! read transition probabilities.

mod pac;
mod qlearn;
mod unroll;

use alloc::string::String;
use alloc::vec::Vec;

use rand_core::SeedableRng;

use crate::mdp::{ActionId, LabeledMdp, StateId};
use crate::trace::Letter;

pub use pac::{pac_learn, HistoryPolicy, PacOptions};
pub use qlearn::{rl_product, QHyper};
pub use unroll::{unroll, unroll_with_horizon, UnrollError, UnrolledMdp, DEFAULT_UNROLL_BUDGET};

/// Interaction interface of a learner: observe state ids and labels, take
/// steps, reset to the initial state.
pub trait Environment {
    fn num_actions(&self) -> usize;
    /// Actions enabled in the current state.
    fn enabled_actions(&self) -> Vec<ActionId>;
    /// Resets to the initial state, returning its id and label.
    fn reset(&mut self) -> (StateId, Letter);
    /// Takes a step; the action must be enabled in the current state.
    fn step(&mut self, action: ActionId) -> (StateId, Letter);
}

/// Simulator-backed environment over a labeled MDP. Learners built against
/// [`Environment`] cannot observe the transition function.
pub struct MdpEnvironment<'a> {
    mdp: &'a LabeledMdp,
    current: StateId,
    rng: rand_chacha::ChaCha8Rng,
}

impl<'a> MdpEnvironment<'a> {
    pub fn new(mdp: &'a LabeledMdp, seed: u64) -> Self {
        MdpEnvironment { mdp, current: mdp.initial(), rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Environment for MdpEnvironment<'_> {
    fn num_actions(&self) -> usize {
        self.mdp.num_actions()
    }

    fn enabled_actions(&self) -> Vec<ActionId> {
        self.mdp.enabled(self.current).to_vec()
    }

    fn reset(&mut self) -> (StateId, Letter) {
        self.current = self.mdp.initial();
        (self.current, self.mdp.label(self.current).clone())
    }

    fn step(&mut self, action: ActionId) -> (StateId, Letter) {
        self.current = self.mdp.sample(self.current, action, &mut self.rng);
        (self.current, self.mdp.label(self.current).clone())
    }
}

/// What a learning run did, reproducible from the seed.
#[derive(Clone, Debug)]
pub struct LearnReport {
    pub seed: u64,
    pub episodes: usize,
    /// The learner's own estimate of the value it achieves.
    pub value_estimate: f64,
    /// Learner-side gap estimate (optimistic minus committed value), when
    /// the algorithm maintains one.
    pub suboptimality_estimate: Option<f64>,
    /// Per-episode observed value trace.
    pub trace: Vec<f64>,
}

/// Learner failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnError {
    /// Epsilon or confidence outside `(0, 1)`.
    InvalidParameter(String),
    /// Unrolling or machine exploration exhausted its budget.
    Budget(String),
    /// An observed label was outside the machine alphabet.
    UnknownLabel(Letter),
}

impl core::fmt::Display for LearnError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LearnError::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            LearnError::Budget(m) => write!(f, "budget exhausted: {m}"),
            LearnError::UnknownLabel(l) => write!(f, "label {l} outside the machine alphabet"),
        }
    }
}

impl core::error::Error for LearnError {}
