//! Letters, finite words and lasso words over a proposition valuation
//! alphabet.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::formula::Prop;

/// One valuation: the set of propositions that hold at a position.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Letter {
    props: BTreeSet<Prop>,
}

impl Letter {
    pub fn empty() -> Self {
        Letter::default()
    }

    pub fn from_props<I: IntoIterator<Item = Prop>>(props: I) -> Self {
        Letter { props: props.into_iter().collect() }
    }

    pub fn contains(&self, p: &Prop) -> bool {
        self.props.contains(p)
    }

    pub fn props(&self) -> impl Iterator<Item = &Prop> {
        self.props.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }
}

impl core::fmt::Display for Letter {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.props.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Finite word; may be empty.
pub type FiniteWord = Vec<Letter>;

/// Ultimately periodic word `prefix . cycle^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    prefix: FiniteWord,
    cycle: FiniteWord,
}

impl LassoWord {
    /// The cycle must be nonempty.
    pub fn new(prefix: FiniteWord, cycle: FiniteWord) -> Result<Self, EmptyCycle> {
        if cycle.is_empty() {
            Err(EmptyCycle)
        } else {
            Ok(LassoWord { prefix, cycle })
        }
    }

    pub fn prefix(&self) -> &[Letter] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    /// Letter at position `i` of the infinite word.
    pub fn letter(&self, i: usize) -> &Letter {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The first `n` letters.
    pub fn unroll(&self, n: usize) -> FiniteWord {
        (0..n).map(|i| self.letter(i).clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmptyCycle;

impl core::fmt::Display for EmptyCycle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("lasso cycle must be nonempty")
    }
}

impl core::error::Error for EmptyCycle {}

/// Explicitly enumerated alphabet `2^P` over a fixed proposition set.
///
/// Letters are indexed by the bitmask of their propositions in sorted order,
/// so letter 0 is the empty valuation and indexing is stable across runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    props: Vec<Prop>,
}

/// Enumerated alphabets are capped at this many propositions.
pub const MAX_ALPHABET_PROPS: usize = 16;

impl Alphabet {
    pub fn new<I: IntoIterator<Item = Prop>>(props: I) -> Result<Self, AlphabetTooLarge> {
        let set: BTreeSet<Prop> = props.into_iter().collect();
        if set.len() > MAX_ALPHABET_PROPS {
            return Err(AlphabetTooLarge(set.len()));
        }
        Ok(Alphabet { props: set.into_iter().collect() })
    }

    pub fn props(&self) -> &[Prop] {
        &self.props
    }

    /// Number of letters, `2^|props|`.
    pub fn len(&self) -> usize {
        1 << self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The letter at a given index.
    pub fn letter(&self, index: usize) -> Letter {
        debug_assert!(index < self.len());
        Letter::from_props(
            self.props
                .iter()
                .enumerate()
                .filter(|(i, _)| index >> i & 1 == 1)
                .map(|(_, p)| p.clone()),
        )
    }

    /// Index of a letter, or `None` if it mentions an unknown proposition.
    pub fn index_of(&self, letter: &Letter) -> Option<usize> {
        let mut index = 0usize;
        for p in letter.props() {
            let bit = self.props.binary_search(p).ok()?;
            index |= 1 << bit;
        }
        Some(index)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| self.letter(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphabetTooLarge(pub usize);

impl core::fmt::Display for AlphabetTooLarge {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "alphabet over {} propositions exceeds the {MAX_ALPHABET_PROPS}-proposition cap",
            self.0
        )
    }
}

impl core::error::Error for AlphabetTooLarge {}

/// Convenience constructor for letters from proposition names. Panics on an
/// invalid name; intended for fixtures and tests.
pub fn letter(names: &[&str]) -> Letter {
    Letter::from_props(names.iter().map(|n| Prop::new(n).expect("valid proposition name")))
}

/// Word from per-position proposition name lists.
pub fn word(positions: &[&[&str]]) -> FiniteWord {
    positions.iter().map(|names| letter(names)).collect()
}

/// Parses words like `"p.pq.-"` where letters are separated by dots, `-` is
/// the empty valuation and single-character propositions are juxtaposed.
pub fn compact_word(text: &str) -> FiniteWord {
    text.split('.')
        .filter(|part| !part.is_empty())
        .map(|part| {
            if part == "-" {
                Letter::empty()
            } else {
                Letter::from_props(part.chars().map(|c| {
                    let mut s = String::new();
                    s.push(c);
                    Prop::new(&s).expect("valid proposition name")
                }))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_indexing_round_trips() {
        let ab = Alphabet::new([
            Prop::new("p").unwrap(),
            Prop::new("q").unwrap(),
        ])
        .unwrap();
        assert_eq!(ab.len(), 4);
        for i in 0..ab.len() {
            assert_eq!(ab.index_of(&ab.letter(i)), Some(i));
        }
        assert_eq!(ab.index_of(&letter(&["r"])), None);
        assert_eq!(ab.letter(0), Letter::empty());
    }

    #[test]
    fn lasso_indexing() {
        let l = LassoWord::new(word(&[&["p"]]), word(&[&[], &["q"]])).unwrap();
        assert_eq!(*l.letter(0), letter(&["p"]));
        assert_eq!(*l.letter(1), Letter::empty());
        assert_eq!(*l.letter(2), letter(&["q"]));
        assert_eq!(*l.letter(3), Letter::empty());
        assert_eq!(l.unroll(4).len(), 4);
        assert!(LassoWord::new(Vec::new(), Vec::new()).is_err());
    }

    #[test]
    fn compact_words() {
        assert_eq!(compact_word("p.pq.-"), word(&[&["p"], &["p", "q"], &[]]));
        assert_eq!(compact_word(""), FiniteWord::new());
    }
}
