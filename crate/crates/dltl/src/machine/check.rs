//! Machine invariant checking.
//!
//! Reward range and SCC structure are checked exhaustively; agreement with
//! the formula semantics is checked statistically on seeded random words,
//! which is the practical handle on an invariant quantified over all
//! infinite words.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand_core::{RngCore, SeedableRng};

use crate::formula::Formula;
use crate::rational::{pow, rat, Rational};
use crate::semantics::{eval_interval, width_bound, Interval};
use crate::trace::FiniteWord;

use super::{MixedSccReward, RewardMachine, StateId};

/// One observed invariant violation, with enough context to reproduce it.
#[derive(Clone, Debug)]
pub enum Violation {
    /// A reward lies outside `[0, 1 - lambda]`.
    RewardOutOfRange { state: StateId, letter: usize, reward: Rational },
    /// An SCC pays two different internal rewards.
    MixedSccReward(MixedSccReward),
    /// An SCC's internal reward is constant but not `0` or `1 - lambda`.
    SccRewardNotBoundary { component: usize, reward: Rational },
    /// Machine bounds and semantic interval are disjoint on a word.
    OracleDisjoint { word: FiniteWord, machine: Interval, oracle: Interval },
    /// The machine's partial sum strayed more than `2 lambda^|w|` from the
    /// oracle interval midpoint.
    ValueDrift { word: FiniteWord, machine: Rational, midpoint: Rational },
    /// The oracle interval is wider than the geometric bound.
    WidthExceeded { word: FiniteWord, width: Rational, bound: Rational },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::RewardOutOfRange { state, letter, reward } => {
                write!(f, "reward {reward} at (q{state}, letter {letter}) outside [0, 1-lambda]")
            }
            Violation::MixedSccReward(e) => write!(f, "{e}"),
            Violation::SccRewardNotBoundary { component, reward } => {
                write!(f, "SCC {component} pays internal reward {reward}, expected 0 or 1-lambda")
            }
            Violation::OracleDisjoint { machine, oracle, .. } => {
                write!(f, "machine bounds {machine} disjoint from oracle interval {oracle}")
            }
            Violation::ValueDrift { machine, midpoint, .. } => {
                write!(f, "machine value {machine} drifted from oracle midpoint {midpoint}")
            }
            Violation::WidthExceeded { width, bound, .. } => {
                write!(f, "oracle interval width {width} exceeds bound {bound}")
            }
        }
    }
}

/// Outcome of [`check_invariants`].
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub trials: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(super) fn check_invariants(
    machine: &RewardMachine,
    formula: &Formula,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> CheckReport {
    let mut violations = Vec::new();
    let step = Rational::one() - machine.lambda();

    // reward range, exhaustive
    for q in 0..machine.num_states() {
        for li in 0..machine.alphabet().len() {
            let r = machine.reward(q, li);
            if r.is_negative() || r > &step {
                violations.push(Violation::RewardOutOfRange {
                    state: q,
                    letter: li,
                    reward: r.clone(),
                });
            }
        }
    }

    // SCC structure, exhaustive
    match machine.scc_decompose() {
        Err(e) => violations.push(Violation::MixedSccReward(e)),
        Ok(report) => {
            for (component, reward) in report.internal_reward.iter().enumerate() {
                if let Some(r) = reward {
                    if !r.is_zero() && r != &step {
                        violations.push(Violation::SccRewardNotBoundary {
                            component,
                            reward: r.clone(),
                        });
                    }
                }
            }
        }
    }

    // oracle agreement, statistical
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let two = rat(2, 1);
    for _ in 0..trials {
        let len = (rng.next_u64() as usize) % (max_len + 1);
        let word: FiniteWord = (0..len)
            .map(|_| machine.alphabet().letter(rng.next_u64() as usize % machine.alphabet().len()))
            .collect();
        let oracle = eval_interval(formula, &word);
        let bounds = machine.eval_bounds(&word).expect("word over machine alphabet");
        if !bounds.intersects(&oracle) {
            violations.push(Violation::OracleDisjoint { word: word.clone(), machine: bounds, oracle });
            continue;
        }
        let value = machine.eval_finite(&word).expect("word over machine alphabet");
        let midpoint = oracle.midpoint();
        let drift =
            if value >= midpoint { &value - &midpoint } else { &midpoint - &value };
        if drift > &two * pow(machine.lambda(), word.len()) {
            violations.push(Violation::ValueDrift { word: word.clone(), machine: value, midpoint });
            continue;
        }
        let bound = width_bound(formula, word.len());
        if oracle.width() > bound {
            violations.push(Violation::WidthExceeded { word, width: oracle.width(), bound });
        }
    }

    CheckReport { trials, violations }
}

