//! Graphviz export.
//!
//! Transitions with the same source, target and reward collapse into one
//! edge whose guard is printed the way automata figures usually do: `⊤` for
//! all letters, a bare literal when the letter set is exactly "p holds" or
//! "p fails", and otherwise a disjunction of minterms. Output is canonical,
//! byte for byte, for a given machine.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use core::fmt::Write;

use crate::rational::Rational;

use super::{RewardMachine, StateId};

pub(super) fn to_dot(m: &RewardMachine) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph reward_machine {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  __start [shape=point, label=\"\"];");
    for q in 0..m.num_states() {
        let _ = writeln!(out, "  q{q} [shape=circle, label=\"q{q}\"];");
    }
    let _ = writeln!(out, "  __start -> q{};", m.initial());
    for q in 0..m.num_states() {
        // group letters by (target, reward)
        let mut groups: BTreeMap<(StateId, Rational), Vec<usize>> = BTreeMap::new();
        for li in 0..m.alphabet().len() {
            groups
                .entry((m.successor(q, li), m.reward(q, li).clone()))
                .or_default()
                .push(li);
        }
        for ((target, reward), letters) in groups {
            let _ = writeln!(
                out,
                "  q{q} -> q{target} [label=\"{}, {}\"];",
                guard_text(m, &letters),
                reward
            );
        }
    }
    let _ = writeln!(out, "}}");
    out
}

fn guard_text(m: &RewardMachine, letters: &[usize]) -> String {
    let total = m.alphabet().len();
    if letters.len() == total {
        return String::from("⊤");
    }
    // a single positive or negative literal, when the set is exactly that
    for (bit, p) in m.alphabet().props().iter().enumerate() {
        let holds: Vec<usize> = (0..total).filter(|li| li >> bit & 1 == 1).collect();
        if letters == holds.as_slice() {
            return alloc::format!("{p}");
        }
        let fails: Vec<usize> = (0..total).filter(|li| li >> bit & 1 == 0).collect();
        if letters == fails.as_slice() {
            return alloc::format!("!{p}");
        }
    }
    // fall back to a disjunction of full minterms
    let mut parts = Vec::with_capacity(letters.len());
    for &li in letters {
        let mut lits = Vec::new();
        for (bit, p) in m.alphabet().props().iter().enumerate() {
            if li >> bit & 1 == 1 {
                lits.push(alloc::format!("{p}"));
            } else {
                lits.push(alloc::format!("!{p}"));
            }
        }
        if lits.is_empty() {
            parts.push(String::from("⊤"));
        } else {
            parts.push(lits.join("&"));
        }
    }
    parts.join("|")
}
