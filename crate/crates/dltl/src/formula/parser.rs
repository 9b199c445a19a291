//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence, loosest first: `|`, `&`, `U`, then the unary operators
//! `!`, `X`, `F`, `G`. Until is right associative. Discount literals accept
//! fractions (`2/3`) and decimals (`0.5`), both converted exactly.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Formula, Prop};
use crate::rational::{is_valid_discount, parse_rational, Rational};

/// Syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Or,
    And,
    Next,
    Finally,
    Globally,
    Until,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Number(String),
    Slash,
    Eof,
}

impl core::fmt::Display for Tok {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier {s:?}"),
            Tok::Number(s) => return write!(f, "number {s:?}"),
            Tok::True => "'true'",
            Tok::False => "'false'",
            Tok::Not => "'!'",
            Tok::Or => "'|'",
            Tok::And => "'&'",
            Tok::Next => "'X'",
            Tok::Finally => "'F'",
            Tok::Globally => "'G'",
            Tok::Until => "'U'",
            Tok::LParen => "'('",
            Tok::RParen => "')'",
            Tok::LBracket => "'['",
            Tok::RBracket => "']'",
            Tok::Slash => "'/'",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

type Spanned = (Tok, usize, usize);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0, line: 1, column: 1 }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError { line: self.line, column: self.column, message }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.bump(c);
                continue;
            }
            let (line, column) = (self.line, self.column);
            let tok = match c {
                '!' => {
                    self.bump(c);
                    Tok::Not
                }
                '|' => {
                    self.bump(c);
                    Tok::Or
                }
                '&' => {
                    self.bump(c);
                    Tok::And
                }
                '(' => {
                    self.bump(c);
                    Tok::LParen
                }
                ')' => {
                    self.bump(c);
                    Tok::RParen
                }
                '[' => {
                    self.bump(c);
                    Tok::LBracket
                }
                ']' => {
                    self.bump(c);
                    Tok::RBracket
                }
                '/' => {
                    self.bump(c);
                    Tok::Slash
                }
                c if c.is_ascii_digit() => {
                    let start = self.pos;
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_digit() || d == '.' {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    Tok::Number(self.src[start..self.pos].to_owned())
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.pos;
                    while let Some(d) = self.src[self.pos..].chars().next() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            self.bump(d);
                        } else {
                            break;
                        }
                    }
                    match &self.src[start..self.pos] {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "U" => Tok::Until,
                        "X" => Tok::Next,
                        "F" => Tok::Finally,
                        "G" => Tok::Globally,
                        name => Tok::Ident(name.to_owned()),
                    }
                }
                other => return Err(self.error(alloc::format!("unexpected character {other:?}"))),
            };
            out.push((tok, line, column));
        }
        out.push((Tok::Eof, self.line, self.column));
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let (_, line, column) = &self.tokens[self.pos];
        ParseError { line: *line, column: *column, message }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(alloc::format!("expected {want}, found {}", self.peek())))
        }
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until_expr()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.until_expr()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until_expr(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.advance();
            let lambda = self.discount()?;
            let rhs = self.until_expr()?;
            Ok(Formula::until(lambda, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.advance();
                let lambda = self.discount()?;
                Ok(Formula::next(lambda, self.unary()?))
            }
            Tok::Finally => {
                self.advance();
                let lambda = self.discount()?;
                Ok(Formula::finally(lambda, self.unary()?))
            }
            Tok::Globally => {
                self.advance();
                let lambda = self.discount()?;
                Ok(Formula::globally(lambda, self.unary()?))
            }
            Tok::True => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance();
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.advance();
                let f = self.or_expr()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                let err = self.error_here(alloc::format!("invalid proposition {name:?}"));
                self.advance();
                Ok(Formula::Atom(Prop::new(&name).map_err(|_| err)?))
            }
            other => Err(self.error_here(alloc::format!("expected a formula, found {other}"))),
        }
    }

    /// `'[' number ('/' number)? ']'`, checked against `0 <= d < 1`.
    fn discount(&mut self) -> Result<Rational, ParseError> {
        self.expect(Tok::LBracket)?;
        let at_literal = self.pos;
        let numer = match self.advance() {
            Tok::Number(s) => s,
            other => {
                self.pos = at_literal;
                return Err(self.error_here(alloc::format!("expected a discount, found {other}")));
            }
        };
        let text = if *self.peek() == Tok::Slash {
            self.advance();
            let denom = match self.advance() {
                Tok::Number(s) => s,
                other => {
                    return Err(
                        self.error_here(alloc::format!("expected a denominator, found {other}"))
                    )
                }
            };
            alloc::format!("{numer}/{denom}")
        } else {
            numer
        };
        let lambda = parse_rational(&text).map_err(|e| {
            let (_, line, column) = self.tokens[at_literal];
            ParseError { line, column, message: alloc::format!("{e}") }
        })?;
        if !is_valid_discount(&lambda) {
            let (_, line, column) = self.tokens[at_literal];
            return Err(ParseError {
                line,
                column,
                message: alloc::format!("discount {lambda} must lie in [0, 1)"),
            });
        }
        self.expect(Tok::RBracket)?;
        Ok(lambda)
    }
}

/// Parses a formula from UTF-8 text.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let formula = parser.or_expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error_here(alloc::format!("trailing input: {}", parser.peek())));
    }
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn p(name: &str) -> Formula {
        Formula::Atom(Prop::new(name).unwrap())
    }

    #[test]
    fn parses_grammar_productions() {
        assert_eq!(parse("F[2/3] p").unwrap(), Formula::finally(rat(2, 3), p("p")));
        assert_eq!(
            parse("G[0.5] p & F[0.5] !p").unwrap(),
            Formula::and(
                Formula::globally(rat(1, 2), p("p")),
                Formula::finally(rat(1, 2), Formula::not(p("p"))),
            )
        );
        assert_eq!(
            parse("p U[1/2] q U[1/2] r").unwrap(),
            Formula::until(rat(1, 2), p("p"), Formula::until(rat(1, 2), p("q"), p("r"))),
        );
        assert_eq!(
            parse("p | q & r").unwrap(),
            Formula::or(p("p"), Formula::and(p("q"), p("r"))),
        );
        assert_eq!(parse("X[0] p").unwrap(), Formula::next(rat(0, 1), p("p")));
    }

    #[test]
    fn rejects_unit_discount() {
        let err = parse("p U[1] q").unwrap_err();
        assert!(err.message.contains("[0, 1)"), "{err}");
        assert_eq!((err.line, err.column), (1, 5));
        assert!(parse("F[1.5] p").is_err());
    }

    #[test]
    fn reports_positions() {
        let err = parse("p |\n| q").unwrap_err();
        assert_eq!((err.line, err.column), (2, 1));
        assert!(parse("p @ q").is_err());
        assert!(parse("").is_err());
        assert!(parse("p q").is_err());
    }
}
