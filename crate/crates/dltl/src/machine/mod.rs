//! Reward machines: finite transducers that pay a discounted reward stream.
//!
//! A machine reads letters over an enumerated alphabet and emits a rational
//! reward in `[0, 1 - lambda]` per step; the value of an infinite word is
//! `sum_t lambda^t c_t`. Machines compiled from uniformly discounted formulas
//! reproduce the formula semantics exactly, state payloads record the
//! construction bookkeeping, and every strongly connected component pays a
//! single internal reward.

mod build;
mod check;
mod dot;
mod lazy;
mod scc;
mod steps;

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rational::{is_valid_discount, pow, Rational};
use crate::semantics::Interval;
use crate::trace::{Alphabet, Letter};

pub use build::{compile, CompileError, Compiler, DEFAULT_STATE_BUDGET};
pub use lazy::{LazyMachine, MachineView};
pub use check::{CheckReport, Violation};
pub use scc::{MixedSccReward, SccReport};

pub type StateId = usize;

/// Which operand of a binary construction an element tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OperandSide {
    First,
    Second,
}

/// Structured description of how a state arose.
///
/// Payload equality is structural, and all rationals are exact, so the
/// reachable-set explorations terminate precisely when the constructions do.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatePayload {
    /// Initial probe state of an atomic machine, or the delay state that the
    /// next construction prepends.
    Start,
    /// Absorbing state that keeps paying `1 - lambda`.
    Top,
    /// Absorbing state that pays nothing.
    Bot,
    /// Operand state carried through a reward-reshaping construction
    /// (negation, next).
    Wrapped(StateId),
    /// Disjunction product state: operand states plus the scaled reward
    /// deficit between them.
    Pair(StateId, StateId, Rational),
    /// Committed copy of the first or second disjunction operand.
    Left(StateId),
    Right(StateId),
    /// Eventually construction: bookkeeping value and the set of live
    /// operand threads with their scaled deficits.
    Ev(Rational, Vec<(StateId, Rational)>),
    /// Until construction: bookkeeping value, the pending left-operand
    /// conjunction threads, and the candidate sets still in play.
    Un(
        Rational,
        Vec<(StateId, Rational)>,
        Vec<Vec<(OperandSide, StateId, Rational)>>,
    ),
}

impl StatePayload {
    /// Deficit of a disjunction pair state, if this is one.
    pub fn pair_deficit(&self) -> Option<&Rational> {
        match self {
            StatePayload::Pair(_, _, z) => Some(z),
            _ => None,
        }
    }
}

/// Deterministic finite-state reward transducer `(Q, delta, r, q0, lambda)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewardMachine {
    alphabet: Alphabet,
    lambda: Rational,
    payloads: Vec<StatePayload>,
    delta: Vec<Vec<StateId>>,
    rewards: Vec<Vec<Rational>>,
    initial: StateId,
}

impl RewardMachine {
    /// Builds a machine from explicit tables.
    ///
    /// Checks shape only: total transition and reward tables, in-range
    /// targets, a valid discount, and reachability of every state. Reward
    /// range and SCC structure are the business of
    /// [`check_invariants`](RewardMachine::check_invariants), so deliberately
    /// broken machines can be constructed for testing.
    pub fn from_parts(
        alphabet: Alphabet,
        lambda: Rational,
        payloads: Vec<StatePayload>,
        delta: Vec<Vec<StateId>>,
        rewards: Vec<Vec<Rational>>,
        initial: StateId,
    ) -> Result<Self, MachineFormatError> {
        let n = payloads.len();
        let letters = alphabet.len();
        if n == 0 {
            return Err(MachineFormatError::new("machine must have at least one state"));
        }
        if !is_valid_discount(&lambda) {
            return Err(MachineFormatError::new("lambda must lie in [0, 1)"));
        }
        if delta.len() != n || rewards.len() != n {
            return Err(MachineFormatError::new("transition tables must cover every state"));
        }
        for (q, (row_d, row_r)) in delta.iter().zip(&rewards).enumerate() {
            if row_d.len() != letters || row_r.len() != letters {
                return Err(MachineFormatError(alloc::format!(
                    "state {q} must have one transition and reward per letter"
                )));
            }
            if let Some(t) = row_d.iter().find(|t| **t >= n) {
                return Err(MachineFormatError(alloc::format!(
                    "state {q} has transition target {t} out of range"
                )));
            }
        }
        if initial >= n {
            return Err(MachineFormatError::new("initial state out of range"));
        }
        let machine = RewardMachine { alphabet, lambda, payloads, delta, rewards, initial };
        if let Some(q) = machine.first_unreachable() {
            return Err(MachineFormatError(alloc::format!(
                "state {q} is unreachable; machines are stored trimmed"
            )));
        }
        Ok(machine)
    }

    fn first_unreachable(&self) -> Option<StateId> {
        let mut seen = alloc::vec![false; self.payloads.len()];
        let mut stack = alloc::vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for &t in &self.delta[q] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn num_states(&self) -> usize {
        self.payloads.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn payload(&self, q: StateId) -> &StatePayload {
        &self.payloads[q]
    }

    pub fn payloads(&self) -> &[StatePayload] {
        &self.payloads
    }

    /// Successor under the letter with the given alphabet index.
    pub fn successor(&self, q: StateId, letter_index: usize) -> StateId {
        self.delta[q][letter_index]
    }

    pub fn reward(&self, q: StateId, letter_index: usize) -> &Rational {
        &self.rewards[q][letter_index]
    }

    /// Alphabet index of a letter; errors on propositions the machine does
    /// not know.
    pub fn letter_index(&self, letter: &Letter) -> Result<usize, UnknownLetter> {
        self.alphabet
            .index_of(letter)
            .ok_or_else(|| UnknownLetter(letter.clone()))
    }

    /// The state reached after reading `word`.
    pub fn run(&self, word: &[Letter]) -> Result<StateId, UnknownLetter> {
        let mut q = self.initial;
        for l in word {
            q = self.successor(q, self.letter_index(l)?);
        }
        Ok(q)
    }

    /// Exact partial discounted reward `sum_{t<|w|} lambda^t c_t`.
    pub fn eval_finite(&self, word: &[Letter]) -> Result<Rational, UnknownLetter> {
        let mut total = Rational::zero();
        let mut discount = Rational::one();
        let mut q = self.initial;
        for l in word {
            let li = self.letter_index(l)?;
            total += &discount * self.reward(q, li);
            discount *= &self.lambda;
            q = self.successor(q, li);
        }
        Ok(total)
    }

    /// `[R(w), R(w) + lambda^|w|]`, which contains `R(w rho)` for every
    /// infinite continuation `rho` as long as rewards stay in
    /// `[0, 1 - lambda]`.
    pub fn eval_bounds(&self, word: &[Letter]) -> Result<Interval, UnknownLetter> {
        let base = self.eval_finite(word)?;
        let tail = pow(&self.lambda, word.len());
        Ok(Interval::new(base.clone(), base + tail))
    }

    /// SCC partition with per-component internal rewards. Errors when some
    /// component carries two distinct internal rewards.
    pub fn scc_decompose(&self) -> Result<SccReport, MixedSccReward> {
        scc::decompose(self)
    }

    /// Graphviz rendering with `guard, reward` edge labels.
    pub fn to_dot(&self) -> String {
        dot::to_dot(self)
    }

    /// Structural and statistical invariant checks against the formula the
    /// machine was compiled from.
    pub fn check_invariants(
        &self,
        formula: &crate::formula::Formula,
        trials: usize,
        max_len: usize,
        seed: u64,
    ) -> CheckReport {
        check::check_invariants(self, formula, trials, max_len, seed)
    }
}

/// A letter mentioned a proposition outside the machine's alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownLetter(pub Letter);

impl core::fmt::Display for UnknownLetter {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "letter {} is outside the machine alphabet", self.0)
    }
}

impl core::error::Error for UnknownLetter {}

/// Structural problem in explicit machine tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineFormatError(pub String);

impl MachineFormatError {
    fn new(msg: &str) -> Self {
        MachineFormatError(String::from(msg))
    }
}

impl core::fmt::Display for MachineFormatError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for MachineFormatError {}
