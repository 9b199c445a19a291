//! On-the-fly reward machines.
//!
//! Close to `lambda = 1` a compiled machine can be finite yet far too large
//! to tabulate: the subset constructions remember roughly one thread per
//! position inside a window of about `log 2 / log(1/lambda)` letters. Policy
//! synthesis never needs all of that; the product with an MDP only ever
//! reaches machine states along label words the MDP can actually produce.
//! `LazyMachine` therefore walks the same step rules as the eager builders,
//! interning states on demand: state ids are dense, assigned in discovery
//! order, and stable for the lifetime of the machine.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::formula::Formula;
use crate::rational::Rational;
use crate::trace::{Alphabet, Letter};

use super::build::{lambda_zero_machine, validate_compile, Compiler};
use super::steps::{self, StepView};
use super::{CompileError, OperandSide, RewardMachine, StateId, StatePayload, UnknownLetter};

/// Uniform interface over tabulated and on-the-fly machines, as used by the
/// product construction and the tabular learners.
pub trait MachineView {
    fn alphabet(&self) -> &Alphabet;
    fn lambda(&self) -> &Rational;
    fn initial_state(&self) -> StateId;
    /// Successor state and reward paid for reading the letter with the given
    /// alphabet index. May intern fresh states, hence `&mut`.
    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError>;
}

impl MachineView for &RewardMachine {
    fn alphabet(&self) -> &Alphabet {
        RewardMachine::alphabet(self)
    }

    fn lambda(&self) -> &Rational {
        RewardMachine::lambda(self)
    }

    fn initial_state(&self) -> StateId {
        self.initial()
    }

    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError> {
        Ok((self.successor(state, letter), self.reward(state, letter).clone()))
    }
}

/// Demand-driven reward machine for a uniformly discounted formula.
pub struct LazyMachine {
    alphabet: Alphabet,
    lambda: Rational,
    root: Node,
    ev_dedup: bool,
}

impl LazyMachine {
    /// Budget and thread-dedup options come from the same [`Compiler`] used
    /// for eager compilation; the budget here caps each construction node's
    /// interner separately.
    pub fn new(
        formula: &Formula,
        lambda: &Rational,
        alphabet: &Alphabet,
        options: &Compiler,
    ) -> Result<Self, CompileError> {
        validate_compile(formula, lambda, alphabet)?;
        let root = if lambda.is_zero() {
            Node::Leaf(lambda_zero_machine(formula, alphabet))
        } else {
            Node::build(formula, lambda, alphabet, options)?
        };
        Ok(LazyMachine {
            alphabet: alphabet.clone(),
            lambda: lambda.clone(),
            root,
            ev_dedup: options.ev_dedup,
        })
    }

    /// States interned so far at the root construction.
    pub fn num_discovered(&self) -> usize {
        self.root.num_states()
    }

    pub fn letter_index(&self, letter: &Letter) -> Result<usize, UnknownLetter> {
        self.alphabet.index_of(letter).ok_or_else(|| UnknownLetter(letter.clone()))
    }

    /// Exact partial discounted reward along a word, interning as needed.
    pub fn eval_finite(&mut self, word: &[Letter]) -> Result<Rational, CompileError> {
        let mut total = Rational::zero();
        let mut discount = Rational::from_integer(1.into());
        let mut q = self.initial_state();
        for l in word {
            let li = self
                .alphabet
                .index_of(l)
                .ok_or_else(|| CompileError::PropOutsideAlphabet(
                    l.props().next().cloned().expect("unknown letter has a prop"),
                ))?;
            let (succ, reward) = self.step(q, li)?;
            total += discount.clone() * reward;
            discount *= &self.lambda;
            q = succ;
        }
        Ok(total)
    }
}

impl MachineView for LazyMachine {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn lambda(&self) -> &Rational {
        &self.lambda
    }

    fn initial_state(&self) -> StateId {
        self.root.initial()
    }

    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError> {
        self.root.step(&self.lambda, self.ev_dedup, state, letter)
    }
}

/// One construction layer. Leaves are tiny tabulated machines; negation and
/// next alias their operand's state space; the subset constructions own an
/// interner that grows on demand.
enum Node {
    Leaf(RewardMachine),
    Negation(Box<Node>),
    Next(Box<Node>),
    Disjunction(Box<Node>, Box<Node>, Interner),
    Eventually(Box<Node>, Interner),
    Until(Box<Node>, Box<Node>, Interner),
}

impl Node {
    fn build(
        formula: &Formula,
        lambda: &Rational,
        alphabet: &Alphabet,
        options: &Compiler,
    ) -> Result<Node, CompileError> {
        let compiler = Compiler { state_budget: options.state_budget, ev_dedup: options.ev_dedup };
        let letters = alphabet.len();
        Ok(match formula {
            Formula::True => Node::Leaf(compiler.constant(true, lambda, alphabet)),
            Formula::False => Node::Leaf(compiler.constant(false, lambda, alphabet)),
            Formula::Atom(p) => Node::Leaf(compiler.atomic(p, lambda, alphabet)?),
            Formula::Not(a) => Node::Negation(Box::new(Node::build(a, lambda, alphabet, options)?)),
            Formula::Or(a, b) => {
                let left = Node::build(a, lambda, alphabet, options)?;
                let right = Node::build(b, lambda, alphabet, options)?;
                let seed = StatePayload::Pair(left.initial(), right.initial(), Rational::zero());
                Node::Disjunction(
                    Box::new(left),
                    Box::new(right),
                    Interner::new(seed, letters, options.state_budget),
                )
            }
            Formula::And(a, b) => {
                // de Morgan, mirroring the eager route
                let left = Node::Negation(Box::new(Node::build(a, lambda, alphabet, options)?));
                let right = Node::Negation(Box::new(Node::build(b, lambda, alphabet, options)?));
                let seed = StatePayload::Pair(left.initial(), right.initial(), Rational::zero());
                let or = Node::Disjunction(
                    Box::new(left),
                    Box::new(right),
                    Interner::new(seed, letters, options.state_budget),
                );
                Node::Negation(Box::new(or))
            }
            Formula::Next(_, a) => Node::Next(Box::new(Node::build(a, lambda, alphabet, options)?)),
            Formula::Until(_, a, b) => {
                let left = Node::build(a, lambda, alphabet, options)?;
                let right = Node::build(b, lambda, alphabet, options)?;
                let seed = StatePayload::Un(
                    Rational::zero(),
                    Vec::new(),
                    alloc::vec![alloc::vec![(
                        OperandSide::Second,
                        right.initial(),
                        Rational::zero()
                    )]],
                );
                Node::Until(
                    Box::new(left),
                    Box::new(right),
                    Interner::new(seed, letters, options.state_budget),
                )
            }
            Formula::Finally(_, a) => {
                let inner = Node::build(a, lambda, alphabet, options)?;
                let seed =
                    StatePayload::Ev(Rational::zero(), alloc::vec![(inner.initial(), Rational::zero())]);
                Node::Eventually(Box::new(inner), Interner::new(seed, letters, options.state_budget))
            }
            Formula::Globally(_, a) => {
                let inner = Node::Negation(Box::new(Node::build(a, lambda, alphabet, options)?));
                let seed =
                    StatePayload::Ev(Rational::zero(), alloc::vec![(inner.initial(), Rational::zero())]);
                let ev = Node::Eventually(
                    Box::new(inner),
                    Interner::new(seed, letters, options.state_budget),
                );
                Node::Negation(Box::new(ev))
            }
        })
    }

    fn initial(&self) -> StateId {
        match self {
            Node::Leaf(m) => m.initial(),
            Node::Negation(c) => c.initial(),
            Node::Next(_) => 0,
            // interners seed their initial payload at id 0
            Node::Disjunction(..) | Node::Eventually(..) | Node::Until(..) => 0,
        }
    }

    fn num_states(&self) -> usize {
        match self {
            Node::Leaf(m) => m.num_states(),
            Node::Negation(c) => c.num_states(),
            Node::Next(c) => c.num_states() + 1,
            Node::Disjunction(_, _, i) | Node::Eventually(_, i) | Node::Until(_, _, i) => {
                i.payloads.len()
            }
        }
    }

    fn step(
        &mut self,
        lambda: &Rational,
        ev_dedup: bool,
        state: StateId,
        letter: usize,
    ) -> Result<(StateId, Rational), CompileError> {
        match self {
            Node::Leaf(m) => Ok((m.successor(state, letter), m.reward(state, letter).clone())),
            Node::Negation(c) => {
                let (succ, reward) = c.step(lambda, ev_dedup, state, letter)?;
                Ok((succ, (Rational::from_integer(1.into()) - lambda) - reward))
            }
            Node::Next(c) => {
                if state == 0 {
                    Ok((c.initial() + 1, Rational::zero()))
                } else {
                    let (succ, reward) = c.step(lambda, ev_dedup, state - 1, letter)?;
                    Ok((succ + 1, reward))
                }
            }
            Node::Disjunction(a, b, interner) => {
                if let Some(hit) = interner.lookup(state, letter) {
                    return Ok(hit);
                }
                let payload = interner.payloads[state].clone();
                let (succ, reward) = steps::disjunction(
                    &mut ChildView { node: a, lambda, ev_dedup },
                    &mut ChildView { node: b, lambda, ev_dedup },
                    lambda,
                    &payload,
                    letter,
                )?;
                interner.record(state, letter, succ, reward)
            }
            Node::Eventually(a, interner) => {
                if let Some(hit) = interner.lookup(state, letter) {
                    return Ok(hit);
                }
                let payload = interner.payloads[state].clone();
                let initial = a.initial();
                let (succ, reward) = steps::eventually(
                    &mut ChildView { node: a, lambda, ev_dedup },
                    initial,
                    lambda,
                    ev_dedup,
                    &payload,
                    letter,
                )?;
                interner.record(state, letter, succ, reward)
            }
            Node::Until(a, b, interner) => {
                if let Some(hit) = interner.lookup(state, letter) {
                    return Ok(hit);
                }
                let payload = interner.payloads[state].clone();
                let (a_init, b_init) = (a.initial(), b.initial());
                let (succ, reward) = steps::until(
                    &mut ChildView { node: a, lambda, ev_dedup },
                    a_init,
                    &mut ChildView { node: b, lambda, ev_dedup },
                    b_init,
                    lambda,
                    &payload,
                    letter,
                )?;
                interner.record(state, letter, succ, reward)
            }
        }
    }
}

/// Adapter that threads the shared context into child nodes.
struct ChildView<'a> {
    node: &'a mut Node,
    lambda: &'a Rational,
    ev_dedup: bool,
}

impl StepView for ChildView<'_> {
    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError> {
        self.node.step(self.lambda, self.ev_dedup, state, letter)
    }
}

/// Payload identity plus a transition memo, grown on demand.
struct Interner {
    payloads: Vec<StatePayload>,
    ids: BTreeMap<StatePayload, StateId>,
    memo: Vec<Vec<Option<(StateId, Rational)>>>,
    letters: usize,
    budget: usize,
}

impl Interner {
    fn new(seed: StatePayload, letters: usize, budget: usize) -> Self {
        let mut interner = Interner {
            payloads: Vec::new(),
            ids: BTreeMap::new(),
            memo: Vec::new(),
            letters,
            budget,
        };
        interner.intern(seed).expect("budget allows the seed state");
        interner
    }

    fn intern(&mut self, payload: StatePayload) -> Result<StateId, CompileError> {
        if let Some(&id) = self.ids.get(&payload) {
            return Ok(id);
        }
        if self.payloads.len() >= self.budget {
            return Err(CompileError::StateBudgetExceeded { budget: self.budget });
        }
        let id = self.payloads.len();
        self.ids.insert(payload.clone(), id);
        self.payloads.push(payload);
        self.memo.push(alloc::vec![None; self.letters]);
        Ok(id)
    }

    fn lookup(&self, state: StateId, letter: usize) -> Option<(StateId, Rational)> {
        self.memo[state][letter].clone()
    }

    fn record(
        &mut self,
        state: StateId,
        letter: usize,
        succ: StatePayload,
        reward: Rational,
    ) -> Result<(StateId, Rational), CompileError> {
        let id = self.intern(succ)?;
        self.memo[state][letter] = Some((id, reward.clone()));
        Ok((id, reward))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::compile;
    use crate::rational::rat;
    use crate::trace::Alphabet;
    use crate::Prop;
    use rand_core::{RngCore, SeedableRng};

    /// Lazy stepping and the eager tabulation agree reward for reward.
    #[test]
    fn lazy_matches_eager_values() {
        let sources = [
            ("G[1/2] p & F[1/2] !p", rat(1, 2)),
            ("p U[2/3] q", rat(2, 3)),
            ("F[1/2] (p | X[1/2] q)", rat(1, 2)),
            ("X[0] p | q", rat(0, 1)),
        ];
        let ab = Alphabet::new([Prop::new("p").unwrap(), Prop::new("q").unwrap()]).unwrap();
        let compiler = Compiler::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (src, lambda) in sources {
            let f = crate::parse(src).unwrap();
            let eager = compiler.compile_with_alphabet(&f, &lambda, &ab).unwrap();
            let mut lazy = LazyMachine::new(&f, &lambda, &ab, &compiler).unwrap();
            for _ in 0..50 {
                let len = (rng.next_u64() % 12) as usize;
                let w: Vec<crate::Letter> =
                    (0..len).map(|_| ab.letter(rng.next_u64() as usize % ab.len())).collect();
                assert_eq!(
                    lazy.eval_finite(&w).unwrap(),
                    eager.eval_finite(&w).unwrap(),
                    "{src} on {w:?}"
                );
            }
            assert!(lazy.num_discovered() <= eager.num_states());
        }
    }

    /// compile() would explode here; the lazy machine explores only what the
    /// words demand.
    #[test]
    fn lazy_stays_small_on_narrow_words() {
        let f = crate::parse("G[0.99] p & F[0.99] !p").unwrap();
        let ab = Alphabet::new([Prop::new("p").unwrap()]).unwrap();
        let mut lazy = LazyMachine::new(&f, &rat(99, 100), &ab, &Compiler::default()).unwrap();
        // p^200 followed by 400 empties
        let mut w = vec![crate::trace::letter(&["p"]); 200];
        w.extend(vec![crate::Letter::empty(); 400]);
        let value = lazy.eval_finite(&w).unwrap();
        assert!(value > rat(0, 1) && value < rat(1, 1));
        assert!(lazy.num_discovered() < 5_000, "{}", lazy.num_discovered());
    }
}
