//! Abstract syntax and structural analyses for discounted LTL.
//!
//! Every temporal operator carries its own discount factor in `[0, 1)`. The
//! core grammar is atoms, negation, disjunction, next and until; conjunction,
//! eventually and globally are sugar that [`Formula::desugar`] removes.

mod parser;

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::rational::{is_valid_discount, Rational};

pub use parser::{parse, ParseError};

/// Atomic proposition name. Nonempty, `[A-Za-z_][A-Za-z0-9_]*`, and not one
/// of the reserved words of the concrete syntax.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop(String);

const RESERVED: &[&str] = &["true", "false", "U", "X", "F", "G"];

impl Prop {
    pub fn new(name: &str) -> Result<Self, InvalidProp> {
        let mut chars = name.chars();
        let head_ok = chars
            .next()
            .map(|c| c.is_ascii_alphabetic() || c == '_')
            .unwrap_or(false);
        let tail_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if head_ok && tail_ok && !RESERVED.contains(&name) {
            Ok(Prop(name.to_owned()))
        } else {
            Err(InvalidProp(name.to_owned()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl core::fmt::Display for Prop {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidProp(pub String);

impl core::fmt::Display for InvalidProp {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "invalid proposition name: {:?}", self.0)
    }
}

impl core::error::Error for InvalidProp {}

/// Discounted LTL formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    Atom(Prop),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Next(Rational, Box<Formula>),
    Until(Rational, Box<Formula>, Box<Formula>),
    Finally(Rational, Box<Formula>),
    Globally(Rational, Box<Formula>),
}

/// Result of the uniformity analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniformity {
    /// All temporal operators share this factor.
    Factor(Rational),
    /// No temporal operator occurs; the formula is uniform for every factor.
    Any,
    /// At least two distinct factors occur.
    NonUniform,
}

impl Uniformity {
    /// The shared factor, or `fallback` for a purely propositional formula.
    /// `None` when the formula is not uniformly discounted.
    pub fn factor_or(&self, fallback: &Rational) -> Option<Rational> {
        match self {
            Uniformity::Factor(l) => Some(l.clone()),
            Uniformity::Any => Some(fallback.clone()),
            Uniformity::NonUniform => None,
        }
    }
}

impl Formula {
    pub fn atom(p: Prop) -> Self {
        Formula::Atom(p)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn next(lambda: Rational, f: Formula) -> Self {
        Formula::Next(lambda, Box::new(f))
    }

    pub fn until(lambda: Rational, a: Formula, b: Formula) -> Self {
        Formula::Until(lambda, Box::new(a), Box::new(b))
    }

    pub fn finally(lambda: Rational, f: Formula) -> Self {
        Formula::Finally(lambda, Box::new(f))
    }

    pub fn globally(lambda: Rational, f: Formula) -> Self {
        Formula::Globally(lambda, Box::new(f))
    }

    /// All propositions occurring in the formula, sorted by name.
    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Prop>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(f) | Formula::Next(_, f) | Formula::Finally(_, f) | Formula::Globally(_, f) => {
                f.collect_props(out)
            }
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Until(_, a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    /// True when every discount factor lies in `[0, 1)`.
    pub fn discounts_valid(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.discounts_valid(),
            Formula::Or(a, b) | Formula::And(a, b) => a.discounts_valid() && b.discounts_valid(),
            Formula::Next(l, f) | Formula::Finally(l, f) | Formula::Globally(l, f) => {
                is_valid_discount(l) && f.discounts_valid()
            }
            Formula::Until(l, a, b) => {
                is_valid_discount(l) && a.discounts_valid() && b.discounts_valid()
            }
        }
    }

    /// Rewrites to the core grammar: conjunction by De Morgan, eventually as
    /// `true U f`, globally as `!(true U !f)`. Idempotent.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(p) => Formula::Atom(p.clone()),
            Formula::Not(f) => Formula::not(f.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::And(a, b) => Formula::not(Formula::or(
                Formula::not(a.desugar()),
                Formula::not(b.desugar()),
            )),
            Formula::Next(l, f) => Formula::next(l.clone(), f.desugar()),
            Formula::Until(l, a, b) => Formula::until(l.clone(), a.desugar(), b.desugar()),
            Formula::Finally(l, f) => Formula::until(l.clone(), Formula::True, f.desugar()),
            Formula::Globally(l, f) => Formula::not(Formula::until(
                l.clone(),
                Formula::True,
                Formula::not(f.desugar()),
            )),
        }
    }

    /// Uniformity of the discount factors across all temporal operators.
    pub fn is_uniform(&self) -> Uniformity {
        let mut factors = BTreeSet::new();
        self.collect_discounts(&mut factors);
        let mut it = factors.into_iter();
        match (it.next(), it.next()) {
            (None, _) => Uniformity::Any,
            (Some(l), None) => Uniformity::Factor(l),
            _ => Uniformity::NonUniform,
        }
    }

    fn collect_discounts(&self, out: &mut BTreeSet<Rational>) {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_discounts(out),
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.collect_discounts(out);
                b.collect_discounts(out);
            }
            Formula::Next(l, f) | Formula::Finally(l, f) | Formula::Globally(l, f) => {
                out.insert(l.clone());
                f.collect_discounts(out);
            }
            Formula::Until(l, a, b) => {
                out.insert(l.clone());
                a.collect_discounts(out);
                b.collect_discounts(out);
            }
        }
    }

    /// The largest discount factor over all temporal operators. Errors for a
    /// purely propositional formula, where no factor exists.
    pub fn max_discount(&self) -> Result<Rational, NoTemporalOperator> {
        let mut factors = BTreeSet::new();
        self.collect_discounts(&mut factors);
        factors.into_iter().next_back().ok_or(NoTemporalOperator)
    }

    /// True when the formula contains no temporal operator.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_propositional(),
            Formula::Or(a, b) | Formula::And(a, b) => a.is_propositional() && b.is_propositional(),
            Formula::Next(..) | Formula::Until(..) | Formula::Finally(..) | Formula::Globally(..) => {
                false
            }
        }
    }

    /// Node count of the desugared core formula.
    pub fn size(&self) -> usize {
        fn count(f: &Formula) -> usize {
            match f {
                Formula::True | Formula::False | Formula::Atom(_) => 1,
                Formula::Not(a) | Formula::Next(_, a) => 1 + count(a),
                Formula::Or(a, b) | Formula::Until(_, a, b) => 1 + count(a) + count(b),
                Formula::And(..) | Formula::Finally(..) | Formula::Globally(..) => {
                    unreachable!("desugared formula")
                }
            }
        }
        count(&self.desugar())
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            Formula::Until(..) => 3,
            Formula::Not(..)
            | Formula::Next(..)
            | Formula::Finally(..)
            | Formula::Globally(..) => 4,
            Formula::True | Formula::False | Formula::Atom(_) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut core::fmt::Formatter<'_>, min: u8) -> core::fmt::Result {
        let prec = self.precedence();
        let parens = prec < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(p) => write!(f, "{p}")?,
            Formula::Not(a) => {
                f.write_str("!")?;
                a.fmt_prec(f, 4)?;
            }
            Formula::Next(l, a) => {
                write!(f, "X[{l}] ")?;
                a.fmt_prec(f, 4)?;
            }
            Formula::Finally(l, a) => {
                write!(f, "F[{l}] ")?;
                a.fmt_prec(f, 4)?;
            }
            Formula::Globally(l, a) => {
                write!(f, "G[{l}] ")?;
                a.fmt_prec(f, 4)?;
            }
            Formula::Until(l, a, b) => {
                // right associative: parenthesize an until on the left
                a.fmt_prec(f, 4)?;
                write!(f, " U[{l}] ")?;
                b.fmt_prec(f, 3)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl core::fmt::Display for Formula {
    /// Prints concrete syntax that parses back to the same AST.
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoTemporalOperator;

impl core::fmt::Display for NoTemporalOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("formula has no temporal operator")
    }
}

impl core::error::Error for NoTemporalOperator {}
