//! Quantitative semantics on finite and ultimately periodic words.
//!
//! The value of a formula on an infinite word lies in `[0, 1]`. On a finite
//! word we compute a sound interval that contains the value of every infinite
//! extension; strict discounting makes the interval width shrink like
//! `lambda_max^|w|`, so any tolerance can be met by reading enough letters.
//! This evaluator is the oracle that the reward-machine compiler is checked
//! against, so clarity wins over speed throughout.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::formula::Formula;
use crate::rational::{pow, Rational};
use crate::trace::{LassoWord, Letter};

/// Closed subinterval of `[0, 1]` with exact endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        debug_assert!(!lo.is_negative() && hi <= Rational::one());
        Interval { lo, hi }
    }

    pub fn point(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    /// The uninformative interval `[0, 1]`.
    pub fn full() -> Self {
        Interval { lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.hi + &self.lo) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// True when `other` is contained in `self`.
    pub fn subsumes(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn scale(&self, by: &Rational) -> Interval {
        Interval { lo: &self.lo * by, hi: &self.hi * by }
    }

    fn negate(&self) -> Interval {
        Interval { lo: Rational::one() - &self.hi, hi: Rational::one() - &self.lo }
    }

    fn pointwise_min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    fn pointwise_max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }
}

impl core::fmt::Display for Interval {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Interval evaluation: bounds on the value of every infinite extension.
///
/// On the empty word every formula gets `[0, 1]`. Otherwise the recursion
/// follows the semantics clause by clause; the until supremum is enumerated
/// explicitly over the in-word indices, with the boundary term absorbing all
/// later indices.
pub fn eval_interval(formula: &Formula, word: &[Letter]) -> Interval {
    intervals_per_position(&formula.desugar(), word)
        .into_iter()
        .next()
        .expect("position 0 present")
}

/// Intervals for the formula at every suffix position `0..=|w|`.
fn intervals_per_position(f: &Formula, w: &[Letter]) -> Vec<Interval> {
    let n = w.len();
    match f {
        Formula::True => full_tail(vec![Interval::point(Rational::one()); n]),
        Formula::False => full_tail(vec![Interval::point(Rational::zero()); n]),
        Formula::Atom(p) => full_tail(
            w.iter()
                .map(|l| Interval::point(indicator(l.contains(p))))
                .collect(),
        ),
        Formula::Not(a) => intervals_per_position(a, w).iter().map(Interval::negate).collect(),
        Formula::Or(a, b) => {
            let xs = intervals_per_position(a, w);
            let ys = intervals_per_position(b, w);
            xs.iter().zip(&ys).map(|(x, y)| x.pointwise_max(y)).collect()
        }
        Formula::Next(lambda, a) => {
            let xs = intervals_per_position(a, w);
            let mut out: Vec<Interval> = (0..n).map(|j| xs[j + 1].scale(lambda)).collect();
            out.push(Interval::full());
            out
        }
        Formula::Until(lambda, a, b) => {
            let xs = intervals_per_position(a, w);
            let ys = intervals_per_position(b, w);
            let powers = discount_powers(lambda, n);
            let mut out = Vec::with_capacity(n + 1);
            for j in 0..n {
                // term i: min(lambda^i * [[b]] at j+i, min_{j' < i} lambda^j' * [[a]] at j+j')
                let mut best = ys[j].clone();
                let mut left_min = Interval::point(Rational::one());
                for i in 1..=(n - j) {
                    left_min = left_min.pointwise_min(&xs[j + i - 1].scale(&powers[i - 1]));
                    let term = ys[j + i].scale(&powers[i]).pointwise_min(&left_min);
                    best = best.pointwise_max(&term);
                }
                out.push(best);
            }
            out.push(Interval::full());
            out
        }
        Formula::And(..) | Formula::Finally(..) | Formula::Globally(..) => {
            unreachable!("evaluation runs on desugared formulas")
        }
    }
}

/// Replaces the entry for the empty suffix with `[0, 1]`.
fn full_tail(mut v: Vec<Interval>) -> Vec<Interval> {
    v.push(Interval::full());
    v
}

fn indicator(b: bool) -> Rational {
    if b {
        Rational::one()
    } else {
        Rational::zero()
    }
}

fn discount_powers(lambda: &Rational, n: usize) -> Vec<Rational> {
    let mut powers = Vec::with_capacity(n + 1);
    powers.push(Rational::one());
    for i in 1..=n {
        powers.push(&powers[i - 1] * lambda);
    }
    powers
}

/// Exact value of the formula on `w` extended with empty valuations forever.
///
/// This is the finite-word convention used for the leaf rewards of the
/// finite-horizon unrolling: every proposition is false beyond the end of
/// the trace. The result always lies inside [`eval_interval`] of the same
/// word because it is the value of one particular extension.
pub fn eval_finite(formula: &Formula, word: &[Letter]) -> Rational {
    values_per_position(&formula.desugar(), word)
        .into_iter()
        .next()
        .expect("position 0 present")
}

/// Values at every suffix position `0..=|w|`; the last entry is the value on
/// the all-empty tail, which is position independent.
fn values_per_position(f: &Formula, w: &[Letter]) -> Vec<Rational> {
    let n = w.len();
    match f {
        Formula::True => vec![Rational::one(); n + 1],
        Formula::False => vec![Rational::zero(); n + 1],
        Formula::Atom(p) => {
            let mut out: Vec<Rational> =
                w.iter().map(|l| indicator(l.contains(p))).collect();
            out.push(Rational::zero());
            out
        }
        Formula::Not(a) => values_per_position(a, w)
            .into_iter()
            .map(|v| Rational::one() - v)
            .collect(),
        Formula::Or(a, b) => values_per_position(a, w)
            .into_iter()
            .zip(values_per_position(b, w))
            .map(|(x, y)| x.max(y))
            .collect(),
        Formula::Next(lambda, a) => {
            let xs = values_per_position(a, w);
            let mut out: Vec<Rational> = (0..n).map(|j| &xs[j + 1] * lambda).collect();
            out.push(&xs[n] * lambda);
            out
        }
        Formula::Until(lambda, a, b) => {
            let xs = values_per_position(a, w);
            let ys = values_per_position(b, w);
            // sup_i min(...) unrolls backward: W(j) = max(B(j), min(A(j), lambda * W(j+1)))
            let mut out = vec![Rational::zero(); n + 1];
            out[n] = ys[n].clone();
            for j in (0..n).rev() {
                let cont = lambda * &out[j + 1];
                out[j] = ys[j].clone().max(xs[j].clone().min(cont));
            }
            out
        }
        Formula::And(..) | Formula::Finally(..) | Formula::Globally(..) => {
            unreachable!("evaluation runs on desugared formulas")
        }
    }
}

/// Interval evaluation on an ultimately periodic word, unrolled far enough
/// that the width is at most `tol`.
///
/// `tol` must be positive. For a purely propositional formula one letter
/// already pins the value exactly.
pub fn eval_lasso(formula: &Formula, word: &LassoWord, tol: &Rational) -> Interval {
    assert!(tol > &Rational::zero(), "tolerance must be positive");
    let len = if formula.is_propositional() { 1 } else { horizon(formula, tol) };
    eval_interval(formula, &word.unroll(len))
}

/// Smallest `T` with `lambda_max^T <= epsilon`; zero for a propositional
/// formula. Two words agreeing on the first `T + 1` letters then have values
/// within `epsilon` of each other.
pub fn horizon(formula: &Formula, epsilon: &Rational) -> usize {
    assert!(epsilon > &Rational::zero(), "epsilon must be positive");
    let Ok(lambda_max) = formula.max_discount() else {
        return 0;
    };
    let mut t = 0usize;
    let mut acc = Rational::one();
    while &acc > epsilon {
        acc *= &lambda_max;
        t += 1;
    }
    t
}

/// Width bound used by the statistical invariant checker: `lambda_max^|w|`
/// for temporal formulas, `0` for propositional ones on nonempty words.
pub fn width_bound(formula: &Formula, word_len: usize) -> Rational {
    match formula.max_discount() {
        Ok(lambda_max) => pow(&lambda_max, word_len),
        Err(_) => {
            if word_len == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::rat;
    use crate::trace::{compact_word, word};

    #[test]
    fn interval_examples() {
        // first p at index 2, word long enough: exact lambda^2
        let f = parse("F[1/2] p").unwrap();
        let w = compact_word("-.-.p.-");
        assert_eq!(eval_interval(&f, &w), Interval::point(rat(1, 4)));

        // no p seen in two letters: anything from 0 to lambda^2
        assert_eq!(
            eval_interval(&f, &compact_word("-.-")),
            Interval::new(rat(0, 1), rat(1, 4))
        );

        // k p's then a violation: exact 1 - lambda^k
        let g = parse("G[1/2] p").unwrap();
        assert_eq!(
            eval_interval(&g, &compact_word("p.p.-")),
            Interval::point(rat(3, 4))
        );

        // empty word: no information
        let atom = parse("p").unwrap();
        assert_eq!(eval_interval(&atom, &[]), Interval::full());
        assert_eq!(eval_interval(&atom, &word(&[&["p"]])), Interval::point(rat(1, 1)));
    }

    #[test]
    fn finite_examples() {
        let f = parse("F[1/2] p").unwrap();
        assert_eq!(eval_finite(&f, &compact_word("-.p")), rat(1, 2));

        let g = parse("G[1/2] p").unwrap();
        assert_eq!(eval_finite(&g, &compact_word("p.p")), rat(3, 4));

        let atom = parse("p").unwrap();
        assert_eq!(eval_finite(&atom, &compact_word("p")), rat(1, 1));
        assert_eq!(eval_finite(&atom, &[]), rat(0, 1));
    }

    #[test]
    fn horizon_examples() {
        let f = parse("F[1/2] p").unwrap();
        assert_eq!(horizon(&f, &rat(1, 8)), 3);

        let prop = parse("p | q").unwrap();
        assert_eq!(horizon(&prop, &rat(1, 100)), 0);

        let nested = parse("F[0.6] G[0.9] p").unwrap();
        assert_eq!(horizon(&nested, &rat(1, 10)), 22);
    }

    #[test]
    fn lasso_examples() {
        let tol = rat(1, 1_000_000);
        let f = parse("F[1/2] p").unwrap();
        let never = LassoWord::new(Vec::new(), compact_word("-")).unwrap();
        let lo_hi = eval_lasso(&f, &never, &tol);
        assert_eq!(*lo_hi.lo(), rat(0, 1));
        assert!(*lo_hi.hi() <= tol);

        let g = parse("G[1/2] p").unwrap();
        let always = LassoWord::new(Vec::new(), compact_word("p")).unwrap();
        let got = eval_lasso(&g, &always, &tol);
        assert_eq!(*got.hi(), rat(1, 1));
        assert!(got.width() <= tol);

        let prop = parse("p | q").unwrap();
        let got = eval_lasso(&prop, &always, &tol);
        assert_eq!(got, Interval::point(rat(1, 1)));
    }
}
