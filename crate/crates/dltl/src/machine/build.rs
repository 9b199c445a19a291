//! Eagerly tabulated reward-machine constructions.
//!
//! Machines for atoms, constants, negation and next are direct table edits.
//! Disjunction, eventually and until explore their reachable state spaces
//! breadth first over the shared step rules in [`steps`](super::steps);
//! exact rational state identity is what makes these explorations terminate,
//! so no floating point is allowed anywhere here.
//!
//! Tabulating a whole machine is the right tool for small discount factors
//! and for inspecting state graphs. Close to `lambda = 1` the reachable
//! space can be astronomically large even though it is finite; policy
//! synthesis then uses [`LazyMachine`](super::LazyMachine), which walks the
//! same rules on demand.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::formula::{Formula, Prop, Uniformity};
use crate::rational::Rational;
use crate::trace::{Alphabet, Letter};

use super::steps::{self, EagerView};
use super::{OperandSide, RewardMachine, StateId, StatePayload};

/// Default cap on the number of states a single construction may create.
/// The constructions are proven to terminate, so hitting the cap means an
/// implementation bug or a state space too large to tabulate; either way we
/// fail loudly instead of spinning.
pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Construction options.
#[derive(Clone, Debug)]
pub struct Compiler {
    /// Maximum states per construction before giving up.
    pub state_budget: usize,
    /// Drop dominated threads `(q, z)` when `(q, z')` with `z' > z` is
    /// present in an eventually state. Off by default so state payloads
    /// match the unoptimized construction.
    pub ev_dedup: bool,
}

impl Default for Compiler {
    fn default() -> Self {
        Compiler { state_budget: DEFAULT_STATE_BUDGET, ev_dedup: false }
    }
}

/// Compiles a uniformly discounted formula over the alphabet of its own
/// propositions. See [`Compiler::compile_with_alphabet`] to enlarge the
/// alphabet, e.g. to cover every label of an MDP.
pub fn compile(formula: &Formula, lambda: &Rational) -> Result<RewardMachine, CompileError> {
    Compiler::default().compile(formula, lambda)
}

/// Shared validation for eager and on-the-fly compilation.
pub(super) fn validate_compile(
    formula: &Formula,
    lambda: &Rational,
    alphabet: &Alphabet,
) -> Result<(), CompileError> {
    if !formula.discounts_valid() {
        return Err(CompileError::InvalidDiscount);
    }
    if lambda.is_negative() || lambda >= &Rational::one() {
        return Err(CompileError::InvalidDiscount);
    }
    match formula.is_uniform() {
        Uniformity::NonUniform => return Err(CompileError::NonUniform),
        Uniformity::Factor(l) if &l != lambda => {
            return Err(CompileError::FactorMismatch { formula: l, requested: lambda.clone() })
        }
        _ => {}
    }
    for p in formula.props() {
        if alphabet.index_of(&Letter::from_props([p.clone()])).is_none() {
            return Err(CompileError::PropOutsideAlphabet(p));
        }
    }
    Ok(())
}

impl Compiler {
    pub fn compile(&self, formula: &Formula, lambda: &Rational) -> Result<RewardMachine, CompileError> {
        let alphabet = Alphabet::new(formula.props()).map_err(|_| CompileError::AlphabetTooLarge)?;
        self.compile_with_alphabet(formula, lambda, &alphabet)
    }

    pub fn compile_with_alphabet(
        &self,
        formula: &Formula,
        lambda: &Rational,
        alphabet: &Alphabet,
    ) -> Result<RewardMachine, CompileError> {
        validate_compile(formula, lambda, alphabet)?;
        if lambda.is_zero() {
            return Ok(lambda_zero_machine(formula, alphabet));
        }
        self.build(formula, lambda, alphabet)
    }

    fn build(
        &self,
        formula: &Formula,
        lambda: &Rational,
        alphabet: &Alphabet,
    ) -> Result<RewardMachine, CompileError> {
        match formula {
            Formula::True => Ok(self.constant(true, lambda, alphabet)),
            Formula::False => Ok(self.constant(false, lambda, alphabet)),
            Formula::Atom(p) => self.atomic(p, lambda, alphabet),
            Formula::Not(a) => Ok(self.negation(&self.build(a, lambda, alphabet)?)),
            Formula::Or(a, b) => {
                self.disjunction(&self.build(a, lambda, alphabet)?, &self.build(b, lambda, alphabet)?)
            }
            Formula::And(a, b) => {
                let left = self.negation(&self.build(a, lambda, alphabet)?);
                let right = self.negation(&self.build(b, lambda, alphabet)?);
                Ok(self.negation(&self.disjunction(&left, &right)?))
            }
            Formula::Next(_, a) => Ok(self.next(&self.build(a, lambda, alphabet)?)),
            Formula::Until(_, a, b) => {
                self.until(&self.build(a, lambda, alphabet)?, &self.build(b, lambda, alphabet)?)
            }
            Formula::Finally(_, a) => self.eventually(&self.build(a, lambda, alphabet)?),
            Formula::Globally(_, a) => {
                let inner = self.negation(&self.build(a, lambda, alphabet)?);
                Ok(self.negation(&self.eventually(&inner)?))
            }
        }
    }

    /// One absorbing state paying `1 - lambda` (true) or `0` (false).
    pub fn constant(&self, value: bool, lambda: &Rational, alphabet: &Alphabet) -> RewardMachine {
        let (payload, reward) = if value {
            (StatePayload::Top, Rational::one() - lambda)
        } else {
            (StatePayload::Bot, Rational::zero())
        };
        RewardMachine {
            alphabet: alphabet.clone(),
            lambda: lambda.clone(),
            payloads: alloc::vec![payload],
            delta: alloc::vec![alloc::vec![0; alphabet.len()]],
            rewards: alloc::vec![alloc::vec![reward; alphabet.len()]],
            initial: 0,
        }
    }

    /// Three states: the probe reads the first letter, then commits to the
    /// paying or the silent sink.
    pub fn atomic(
        &self,
        prop: &Prop,
        lambda: &Rational,
        alphabet: &Alphabet,
    ) -> Result<RewardMachine, CompileError> {
        if alphabet.index_of(&Letter::from_props([prop.clone()])).is_none() {
            return Err(CompileError::PropOutsideAlphabet(prop.clone()));
        }
        let step = Rational::one() - lambda;
        let letters = alphabet.len();
        let mut delta0 = Vec::with_capacity(letters);
        let mut reward0 = Vec::with_capacity(letters);
        for letter in alphabet.letters() {
            if letter.contains(prop) {
                delta0.push(1);
                reward0.push(step.clone());
            } else {
                delta0.push(2);
                reward0.push(Rational::zero());
            }
        }
        Ok(RewardMachine {
            alphabet: alphabet.clone(),
            lambda: lambda.clone(),
            payloads: alloc::vec![StatePayload::Start, StatePayload::Top, StatePayload::Bot],
            delta: alloc::vec![delta0, alloc::vec![1; letters], alloc::vec![2; letters]],
            rewards: alloc::vec![
                reward0,
                alloc::vec![step.clone(); letters],
                alloc::vec![Rational::zero(); letters]
            ],
            initial: 0,
        })
    }

    /// Same automaton, every reward `c` replaced by `(1 - lambda) - c`.
    pub fn negation(&self, m: &RewardMachine) -> RewardMachine {
        let step = Rational::one() - &m.lambda;
        RewardMachine {
            alphabet: m.alphabet.clone(),
            lambda: m.lambda.clone(),
            payloads: (0..m.num_states()).map(StatePayload::Wrapped).collect(),
            delta: m.delta.clone(),
            rewards: m
                .rewards
                .iter()
                .map(|row| row.iter().map(|c| &step - c).collect())
                .collect(),
            initial: m.initial,
        }
    }

    /// Prepends a delay state that pays nothing and hands over to the
    /// operand, scaling its value by lambda.
    pub fn next(&self, m: &RewardMachine) -> RewardMachine {
        let letters = m.alphabet.len();
        let mut payloads = Vec::with_capacity(m.num_states() + 1);
        payloads.push(StatePayload::Start);
        payloads.extend((0..m.num_states()).map(StatePayload::Wrapped));
        let mut delta = Vec::with_capacity(m.num_states() + 1);
        delta.push(alloc::vec![m.initial + 1; letters]);
        delta.extend(m.delta.iter().map(|row| row.iter().map(|t| t + 1).collect()));
        let mut rewards = Vec::with_capacity(m.num_states() + 1);
        rewards.push(alloc::vec![Rational::zero(); letters]);
        rewards.extend(m.rewards.iter().cloned());
        RewardMachine {
            alphabet: m.alphabet.clone(),
            lambda: m.lambda.clone(),
            payloads,
            delta,
            rewards,
            initial: 0,
        }
    }

    /// Product exploration that tracks the scaled difference between the
    /// operands' accumulated rewards.
    pub fn disjunction(
        &self,
        m1: &RewardMachine,
        m2: &RewardMachine,
    ) -> Result<RewardMachine, CompileError> {
        check_compatible(m1, m2)?;
        let lambda = m1.lambda.clone();
        let mut a = EagerView(m1);
        let mut b = EagerView(m2);
        Explorer::new(&m1.alphabet, lambda.clone(), self.state_budget).explore(
            StatePayload::Pair(m1.initial, m2.initial, Rational::zero()),
            |payload, li| steps::disjunction(&mut a, &mut b, &lambda, payload, li),
        )
    }

    /// Subset construction over operand threads, one per start position that
    /// could still realize the maximum.
    pub fn eventually(&self, m: &RewardMachine) -> Result<RewardMachine, CompileError> {
        let lambda = m.lambda.clone();
        let mut a = EagerView(m);
        Explorer::new(&m.alphabet, lambda.clone(), self.state_budget).explore(
            StatePayload::Ev(Rational::zero(), alloc::vec![(m.initial, Rational::zero())]),
            |payload, li| {
                steps::eventually(&mut a, m.initial, &lambda, self.ev_dedup, payload, li)
            },
        )
    }

    /// Nested subset construction: each candidate set conjoins one
    /// second-operand thread with the first-operand threads started earlier.
    pub fn until(
        &self,
        m1: &RewardMachine,
        m2: &RewardMachine,
    ) -> Result<RewardMachine, CompileError> {
        check_compatible(m1, m2)?;
        let lambda = m1.lambda.clone();
        let mut a = EagerView(m1);
        let mut b = EagerView(m2);
        Explorer::new(&m1.alphabet, lambda.clone(), self.state_budget).explore(
            StatePayload::Un(
                Rational::zero(),
                Vec::new(),
                alloc::vec![alloc::vec![(OperandSide::Second, m2.initial, Rational::zero())]],
            ),
            |payload, li| steps::until(&mut a, m1.initial, &mut b, m2.initial, &lambda, payload, li),
        )
    }
}

fn check_compatible(m1: &RewardMachine, m2: &RewardMachine) -> Result<(), CompileError> {
    if m1.lambda != m2.lambda {
        return Err(CompileError::FactorMismatch {
            formula: m1.lambda.clone(),
            requested: m2.lambda.clone(),
        });
    }
    if m1.alphabet != m2.alphabet {
        return Err(CompileError::AlphabetMismatch);
    }
    Ok(())
}

/// With a zero discount only the first letter matters: the machine pays the
/// whole value up front and then stays silent. The formula value collapses
/// because every next operand contributes nothing and an until reduces to
/// its right operand at the first position.
pub(super) fn lambda_zero_machine(formula: &Formula, alphabet: &Alphabet) -> RewardMachine {
    fn first_letter_value(f: &Formula, letter: &Letter) -> Rational {
        match f {
            Formula::True => Rational::one(),
            Formula::False => Rational::zero(),
            Formula::Atom(p) => {
                if letter.contains(p) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Formula::Not(a) => Rational::one() - first_letter_value(a, letter),
            Formula::Or(a, b) => first_letter_value(a, letter).max(first_letter_value(b, letter)),
            Formula::And(a, b) => first_letter_value(a, letter).min(first_letter_value(b, letter)),
            Formula::Next(..) => Rational::zero(),
            Formula::Until(_, _, b) | Formula::Finally(_, b) => first_letter_value(b, letter),
            Formula::Globally(_, a) => first_letter_value(a, letter),
        }
    }
    let letters = alphabet.len();
    let rewards0 = alphabet.letters().map(|l| first_letter_value(formula, &l)).collect();
    RewardMachine {
        alphabet: alphabet.clone(),
        lambda: Rational::zero(),
        payloads: alloc::vec![StatePayload::Start, StatePayload::Bot],
        delta: alloc::vec![alloc::vec![1; letters], alloc::vec![1; letters]],
        rewards: alloc::vec![rewards0, alloc::vec![Rational::zero(); letters]],
        initial: 0,
    }
}

/// Breadth-first reachable-set exploration with memoized payload identity.
struct Explorer<'a> {
    alphabet: &'a Alphabet,
    lambda: Rational,
    budget: usize,
    index: BTreeMap<StatePayload, StateId>,
    payloads: Vec<StatePayload>,
    delta: Vec<Vec<StateId>>,
    rewards: Vec<Vec<Rational>>,
}

impl<'a> Explorer<'a> {
    fn new(alphabet: &'a Alphabet, lambda: Rational, budget: usize) -> Self {
        Explorer {
            alphabet,
            lambda,
            budget,
            index: BTreeMap::new(),
            payloads: Vec::new(),
            delta: Vec::new(),
            rewards: Vec::new(),
        }
    }

    fn intern(&mut self, payload: StatePayload) -> Result<StateId, CompileError> {
        if let Some(&id) = self.index.get(&payload) {
            return Ok(id);
        }
        if self.payloads.len() >= self.budget {
            return Err(CompileError::StateBudgetExceeded { budget: self.budget });
        }
        let id = self.payloads.len();
        self.index.insert(payload.clone(), id);
        self.payloads.push(payload);
        Ok(id)
    }

    fn explore<F>(mut self, initial: StatePayload, mut step: F) -> Result<RewardMachine, CompileError>
    where
        F: FnMut(&StatePayload, usize) -> Result<(StatePayload, Rational), CompileError>,
    {
        let letters = self.alphabet.len();
        let start = self.intern(initial)?;
        let mut next = 0usize;
        while next < self.payloads.len() {
            let payload = self.payloads[next].clone();
            let mut row_delta = Vec::with_capacity(letters);
            let mut row_reward = Vec::with_capacity(letters);
            for li in 0..letters {
                let (succ, reward) = step(&payload, li)?;
                row_delta.push(self.intern(succ)?);
                row_reward.push(reward);
            }
            self.delta.push(row_delta);
            self.rewards.push(row_reward);
            next += 1;
        }
        Ok(RewardMachine {
            alphabet: self.alphabet.clone(),
            lambda: self.lambda,
            payloads: self.payloads,
            delta: self.delta,
            rewards: self.rewards,
            initial: start,
        })
    }
}

/// Why compilation failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompileError {
    /// Some temporal operators carry different discount factors.
    NonUniform,
    /// The formula's shared factor differs from the requested one, or two
    /// operand machines disagree.
    FactorMismatch { formula: Rational, requested: Rational },
    /// A discount factor lies outside `[0, 1)`.
    InvalidDiscount,
    /// Operand machines were built over different alphabets.
    AlphabetMismatch,
    /// A proposition of the formula is missing from the target alphabet.
    PropOutsideAlphabet(Prop),
    /// More than [`MAX_ALPHABET_PROPS`](crate::trace::MAX_ALPHABET_PROPS)
    /// propositions.
    AlphabetTooLarge,
    /// Reachable-set exploration exceeded the configured cap.
    StateBudgetExceeded { budget: usize },
}

impl core::fmt::Display for CompileError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CompileError::NonUniform => {
                f.write_str("formula mixes discount factors; only uniform discounting compiles")
            }
            CompileError::FactorMismatch { formula, requested } => write!(
                f,
                "discount factor mismatch: formula uses {formula}, requested {requested}"
            ),
            CompileError::InvalidDiscount => f.write_str("discount factor must lie in [0, 1)"),
            CompileError::AlphabetMismatch => f.write_str("operand machines use different alphabets"),
            CompileError::PropOutsideAlphabet(p) => {
                write!(f, "proposition {p} is not part of the alphabet")
            }
            CompileError::AlphabetTooLarge => f.write_str("too many propositions to enumerate"),
            CompileError::StateBudgetExceeded { budget } => {
                write!(f, "construction exceeded the {budget}-state budget")
            }
        }
    }
}

impl core::error::Error for CompileError {}
