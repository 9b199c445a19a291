//! Discounted linear temporal logic: parsing, quantitative semantics,
//! compilation of uniformly discounted formulas into finite reward machines,
//! optimal policy synthesis on labeled MDPs, and tabular learning when the
//! transition probabilities are unknown.
//!
//! The crate is `no_std` (with `alloc`); file formats and the command-line
//! front end live in the companion `dltl-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod formula;
pub mod learning;
pub mod machine;
pub mod mdp;
pub mod rational;
pub mod semantics;
pub mod trace;

pub use formula::{parse, Formula, ParseError, Prop, Uniformity};
pub use machine::{compile, Compiler, RewardMachine, StatePayload};
pub use mdp::{LabeledMdp, ProductMdp};
pub use rational::{parse_rational, rat, Rational};
pub use semantics::Interval;
pub use trace::{Alphabet, FiniteWord, LassoWord, Letter};
