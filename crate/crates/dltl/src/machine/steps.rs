//! Single-step transition math for the subset constructions.
//!
//! These functions are the one home of the disjunction, eventually and until
//! bookkeeping rules. The eager builders in [`build`](super::build) tabulate
//! whole machines by iterating them, and the on-the-fly machines in
//! [`lazy`](super::lazy) call them one state at a time; both paths therefore
//! agree by construction.

use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

use super::{CompileError, OperandSide, StateId, StatePayload};

/// Minimal view of an operand machine: advance a state by a letter and learn
/// the reward paid. Mutable because on-the-fly operands intern fresh states.
pub(super) trait StepView {
    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError>;
}

/// Read-only adapter over a tabulated machine.
pub(super) struct EagerView<'a>(pub &'a super::RewardMachine);

impl StepView for EagerView<'_> {
    fn step(&mut self, state: StateId, letter: usize) -> Result<(StateId, Rational), CompileError> {
        Ok((self.0.successor(state, letter), self.0.reward(state, letter).clone()))
    }
}

/// Disjunction: advance both operands and the scaled reward deficit; commit
/// to the leader once the deficit leaves `(-1, 1)`.
pub(super) fn disjunction<A: StepView, B: StepView>(
    a: &mut A,
    b: &mut B,
    lambda: &Rational,
    payload: &StatePayload,
    letter: usize,
) -> Result<(StatePayload, Rational), CompileError> {
    let one = Rational::one();
    match payload {
        StatePayload::Pair(q1, q2, z) => {
            if z >= &one {
                let (s, r) = a.step(*q1, letter)?;
                Ok((StatePayload::Left(s), r))
            } else if -z >= one {
                let (s, r) = b.step(*q2, letter)?;
                Ok((StatePayload::Right(s), r))
            } else {
                let (s1, r1) = a.step(*q1, letter)?;
                let (s2, r2) = b.step(*q2, letter)?;
                let shifted = &r1 - &r2 + z;
                let reward = if !shifted.is_negative() {
                    r1 + z.clone().min(Rational::zero())
                } else {
                    r2 - z.clone().max(Rational::zero())
                };
                Ok((StatePayload::Pair(s1, s2, shifted / lambda), reward))
            }
        }
        StatePayload::Left(q) => {
            let (s, r) = a.step(*q, letter)?;
            Ok((StatePayload::Left(s), r))
        }
        StatePayload::Right(q) => {
            let (s, r) = b.step(*q, letter)?;
            Ok((StatePayload::Right(s), r))
        }
        other => unreachable!("disjunction payload: {other:?}"),
    }
}

/// Eventually: pay the best thread's increment, rescale survivors, spawn a
/// fresh thread while the bookkeeping value stays above -1.
pub(super) fn eventually<A: StepView>(
    a: &mut A,
    a_initial: StateId,
    lambda: &Rational,
    drop_dominated: bool,
    payload: &StatePayload,
    letter: usize,
) -> Result<(StatePayload, Rational), CompileError> {
    let StatePayload::Ev(v, set) = payload else {
        unreachable!("eventually payload: {payload:?}")
    };
    let neg_one = -Rational::one();
    let mut advanced = Vec::with_capacity(set.len() + 1);
    let mut best: Option<Rational> = None;
    for (q, z) in set {
        let (succ, reward) = a.step(*q, letter)?;
        let total = reward + z;
        if best.as_ref().map(|b| &total > b).unwrap_or(true) {
            best = Some(total.clone());
        }
        advanced.push((succ, total));
    }
    let best = best.expect("eventually thread set never empties");
    let mut next: Vec<(StateId, Rational)> = Vec::with_capacity(advanced.len() + 1);
    for (succ, total) in advanced {
        let z_next = (total - &best) / lambda;
        if z_next > neg_one {
            next.push((succ, z_next));
        }
    }
    let v_next = (v - &best) / lambda;
    let v_clamped = if v_next > neg_one {
        next.push((a_initial, v_next.clone()));
        v_next
    } else {
        neg_one
    };
    next.sort_unstable();
    next.dedup();
    if drop_dominated {
        dedup_dominated(&mut next);
    }
    Ok((StatePayload::Ev(v_clamped, next), best))
}

/// Keeping only the largest deficit per operand state preserves every
/// future maximum.
fn dedup_dominated(set: &mut Vec<(StateId, Rational)>) {
    let mut out: Vec<(StateId, Rational)> = Vec::with_capacity(set.len());
    for entry in set.drain(..) {
        match out.last_mut() {
            Some((q, z)) if *q == entry.0 => *z = entry.1,
            _ => out.push(entry),
        }
    }
    *set = out;
}

/// Until: candidate sets chase the best worst-case increment; sets whose
/// minimum falls too low are discarded, threads whose value grows too high
/// can never be the minimum again and are dropped, and while the bookkeeping
/// value allows it a new candidate (fresh second-operand thread plus the
/// pending first-operand conjunction) is spawned.
pub(super) fn until<A: StepView, B: StepView>(
    a: &mut A,
    a_initial: StateId,
    b: &mut B,
    b_initial: StateId,
    lambda: &Rational,
    payload: &StatePayload,
    letter: usize,
) -> Result<(StatePayload, Rational), CompileError> {
    let StatePayload::Un(v, pending, sets) = payload else {
        unreachable!("until payload: {payload:?}")
    };
    let one = Rational::one();
    let neg_one = -Rational::one();

    // advance every element once, tracking each set's minimum total
    let mut advanced: Vec<(Rational, Vec<(OperandSide, StateId, Rational)>)> =
        Vec::with_capacity(sets.len());
    for set in sets {
        let mut row = Vec::with_capacity(set.len());
        let mut min_total: Option<Rational> = None;
        for (side, q, z) in set {
            let (succ, reward) = match side {
                OperandSide::First => a.step(*q, letter)?,
                OperandSide::Second => b.step(*q, letter)?,
            };
            let total = reward + z;
            if min_total.as_ref().map(|m| &total < m).unwrap_or(true) {
                min_total = Some(total.clone());
            }
            row.push((*side, succ, total));
        }
        advanced.push((min_total.expect("until candidate sets are nonempty"), row));
    }
    let best = advanced
        .iter()
        .map(|(min_total, _)| min_total.clone())
        .max()
        .expect("until state has candidates");

    let finish_set = |row: &[(OperandSide, StateId, Rational)]| {
        let mut out: Vec<(OperandSide, StateId, Rational)> = Vec::with_capacity(row.len());
        for (side, succ, total) in row {
            let z_next = (total - &best) / lambda;
            if z_next < one {
                out.push((*side, *succ, z_next));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    };

    let mut next_sets: Vec<Vec<(OperandSide, StateId, Rational)>> = advanced
        .iter()
        .filter(|(min_total, _)| min_total > &neg_one)
        .map(|(_, row)| finish_set(row))
        .collect();

    let v_next = (v - &best) / lambda;
    let succ = if v_next > neg_one {
        // the fresh first-operand thread enters with the pre-step value and
        // advances together with the pending conjunction
        let mut seeded: Vec<(OperandSide, StateId, Rational)> = Vec::with_capacity(pending.len() + 1);
        for (q, z) in pending {
            seeded.push((OperandSide::First, *q, z.clone()));
        }
        seeded.push((OperandSide::First, a_initial, v.clone()));
        seeded.sort_unstable();
        seeded.dedup();
        let mut advanced_pending = Vec::with_capacity(seeded.len());
        for (side, q, z) in &seeded {
            let (succ, reward) = a.step(*q, letter)?;
            debug_assert_eq!(*side, OperandSide::First);
            advanced_pending.push((*side, succ, reward + z));
        }
        let pending_next = finish_set(&advanced_pending);
        let mut fresh = pending_next.clone();
        fresh.push((OperandSide::Second, b_initial, v_next.clone()));
        fresh.sort_unstable();
        fresh.dedup();
        next_sets.push(fresh);
        next_sets.sort_unstable();
        next_sets.dedup();
        StatePayload::Un(
            v_next,
            pending_next.into_iter().map(|(_, q, z)| (q, z)).collect(),
            next_sets,
        )
    } else {
        next_sets.sort_unstable();
        next_sets.dedup();
        StatePayload::Un(neg_one, Vec::new(), next_sets)
    };
    Ok((succ, best))
}
