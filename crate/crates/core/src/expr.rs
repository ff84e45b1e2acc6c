//! Variables, rate symbols and information terms, with their canonical text
//! forms and parsers.
//!
//! Text forms: `X[0]`, `X[1,2]`, `Y[3]`, `R[1,1]`,
//! `I(X[0],X[1,1];Y[2],Y[3]|X[2,1])`, `H(Y[2]|X[2,1])`. Variables inside a
//! term are always printed in sorted order: channel inputs by (order, index),
//! then received signals by terminal.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::message_tree::MessageId;

/// A random variable: the codeword of a message or a terminal's received signal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub enum Var {
    X(MessageId),
    Y(u32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(m) => write!(f, "X{}", m.subscript()),
            Var::Y(k) => write!(f, "Y[{k}]"),
        }
    }
}

/// Rate of a message, `R[k,l]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Rate(pub MessageId);

impl Rate {
    pub const SOURCE: Rate = Rate(MessageId::ROOT);
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0.subscript())
    }
}

/// Conditional mutual information `I(args; outputs | cond)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MiAtom {
    pub args: BTreeSet<Var>,
    pub outputs: BTreeSet<Var>,
    pub cond: BTreeSet<Var>,
}

impl MiAtom {
    pub fn new<A, B, C>(args: A, outputs: B, cond: C) -> Self
    where
        A: IntoIterator<Item = Var>,
        B: IntoIterator<Item = Var>,
        C: IntoIterator<Item = Var>,
    {
        MiAtom {
            args: args.into_iter().collect(),
            outputs: outputs.into_iter().collect(),
            cond: cond.into_iter().collect(),
        }
    }

    /// The single received signal when the atom has exactly one output.
    pub fn receiver(&self) -> Option<u32> {
        match (self.outputs.len(), self.outputs.first()) {
            (1, Some(Var::Y(k))) => Some(*k),
            _ => None,
        }
    }
}

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &BTreeSet<Var>) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for MiAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("I(")?;
        write_vars(f, &self.args)?;
        f.write_str(";")?;
        write_vars(f, &self.outputs)?;
        if !self.cond.is_empty() {
            f.write_str("|")?;
            write_vars(f, &self.cond)?;
        }
        f.write_str(")")
    }
}

/// A conditional mutual information or conditional entropy term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Mi(MiAtom),
    Entropy {
        vars: BTreeSet<Var>,
        cond: BTreeSet<Var>,
    },
}

impl Term {
    pub fn entropy<A, C>(vars: A, cond: C) -> Self
    where
        A: IntoIterator<Item = Var>,
        C: IntoIterator<Item = Var>,
    {
        Term::Entropy {
            vars: vars.into_iter().collect(),
            cond: cond.into_iter().collect(),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        match self {
            Term::Mi(a) => a.args.iter().chain(&a.outputs).chain(&a.cond).copied().collect(),
            Term::Entropy { vars, cond } => vars.iter().chain(cond).copied().collect(),
        }
    }
}

impl From<MiAtom> for Term {
    fn from(a: MiAtom) -> Self {
        Term::Mi(a)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Mi(a) => write!(f, "{a}"),
            Term::Entropy { vars, cond } => {
                f.write_str("H(")?;
                write_vars(f, vars)?;
                if !cond.is_empty() {
                    f.write_str("|")?;
                    write_vars(f, cond)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A sum of information terms. Kept sorted; an empty sum is zero.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct MiExpr {
    terms: Vec<Term>,
}

impl MiExpr {
    pub fn new(mut terms: Vec<Term>) -> Self {
        terms.sort();
        MiExpr { terms }
    }

    pub fn zero() -> Self {
        MiExpr::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        self.terms.iter().flat_map(Term::variables).collect()
    }
}

impl From<Term> for MiExpr {
    fn from(t: Term) -> Self {
        MiExpr { terms: vec![t] }
    }
}

impl From<MiAtom> for MiExpr {
    fn from(a: MiAtom) -> Self {
        MiExpr::from(Term::Mi(a))
    }
}

impl fmt::Display for MiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    /// 1-based character column inside the parsed string.
    pub column: usize,
    pub message: String,
}

/// Cursor over a single-line expression. Whitespace between tokens is ignored.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub(crate) fn column(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    pub(crate) fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.error(format!("expected `{token}`"))
        }
    }

    pub(crate) fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.error("unexpected trailing input")
        }
    }

    pub(crate) fn number(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.chars().take_while(char::is_ascii_digit).count();
        if len == 0 {
            return self.error("expected a number");
        }
        let n = rest[..len].parse().or_else(|_| self.error("number too large"))?;
        self.pos += len;
        Ok(n)
    }

    /// `[0]` or `[k,l]` with `l >= 1`.
    pub(crate) fn subscript(&mut self) -> Result<MessageId, ParseError> {
        self.expect("[")?;
        let order = self.number()?;
        let id = if self.eat(",") {
            let col = self.column();
            let index = self.number()?;
            if index == 0 || index == u32::MAX {
                return Err(ParseError {
                    column: col,
                    message: "message index must be at least 1".into(),
                });
            }
            MessageId::new(order, index)
        } else if order == 0 {
            MessageId::ROOT
        } else {
            return self.error("expected `,` (only the root may be written with one subscript)");
        };
        self.expect("]")?;
        Ok(id)
    }

    /// `m[k,l]` or `m[0]`.
    pub(crate) fn message(&mut self) -> Result<MessageId, ParseError> {
        self.expect("m")?;
        self.subscript()
    }

    pub(crate) fn var(&mut self) -> Result<Var, ParseError> {
        if self.eat("X") {
            Ok(Var::X(self.subscript()?))
        } else if self.eat("Y") {
            self.expect("[")?;
            let k = self.number()?;
            self.expect("]")?;
            Ok(Var::Y(k))
        } else {
            self.error("expected a variable `X[..]` or `Y[..]`")
        }
    }

    pub(crate) fn rate(&mut self) -> Result<Rate, ParseError> {
        self.expect("R")?;
        Ok(Rate(self.subscript()?))
    }

    /// Comma-separated variables, stopping before any of `stops`.
    pub(crate) fn var_list(&mut self) -> Result<BTreeSet<Var>, ParseError> {
        let mut out = BTreeSet::new();
        loop {
            let col = self.column();
            let v = self.var()?;
            if !out.insert(v) {
                return Err(ParseError {
                    column: col,
                    message: format!("{v} listed twice"),
                });
            }
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        if self.eat("I(") {
            let args = self.var_list()?;
            self.expect(";")?;
            let outputs = self.var_list()?;
            let cond = if self.eat("|") {
                self.var_list()?
            } else {
                BTreeSet::new()
            };
            self.expect(")")?;
            Ok(Term::Mi(MiAtom { args, outputs, cond }))
        } else if self.eat("H(") {
            let vars = self.var_list()?;
            let cond = if self.eat("|") {
                self.var_list()?
            } else {
                BTreeSet::new()
            };
            self.expect(")")?;
            Ok(Term::Entropy { vars, cond })
        } else {
            self.error("expected `I(` or `H(`")
        }
    }
}

impl FromStr for Var {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        let v = c.var()?;
        c.finish()?;
        Ok(v)
    }
}

impl FromStr for Rate {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        let r = c.rate()?;
        c.finish()?;
        Ok(r)
    }
}

impl FromStr for MessageId {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        let m = c.message()?;
        c.finish()?;
        Ok(m)
    }
}

impl FromStr for Term {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        let t = c.term()?;
        c.finish()?;
        Ok(t)
    }
}

impl FromStr for MiExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        if c.eat("0") {
            c.finish()?;
            return Ok(MiExpr::zero());
        }
        let mut terms = vec![c.term()?];
        while c.eat("+") {
            terms.push(c.term()?);
        }
        c.finish()?;
        Ok(MiExpr::new(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_text_round_trips() {
        let text = "I(X[0],X[1,1];Y[2],Y[3]|X[2,1])";
        let t: Term = text.parse().unwrap();
        assert_eq!(t.to_string(), text);
        let h: Term = "H(Y[2]|X[2,1])".parse().unwrap();
        assert_eq!(h.to_string(), "H(Y[2]|X[2,1])");
    }

    #[test]
    fn variables_print_sorted() {
        let t: Term = "I(X[1,1],X[0];Y[3]|X[2,1],X[0,1])".parse().unwrap();
        assert_eq!(t.to_string(), "I(X[0],X[1,1];Y[3]|X[0,1],X[2,1])");
    }

    #[test]
    fn sums_sort_and_parse_zero() {
        let e: MiExpr = "I(X[1,1];Y[2]|X[2,1]) + I(X[0];Y[3]|X[1,1],X[2,1])"
            .parse()
            .unwrap();
        assert_eq!(
            e.to_string(),
            "I(X[0];Y[3]|X[1,1],X[2,1]) + I(X[1,1];Y[2]|X[2,1])"
        );
        assert!("0".parse::<MiExpr>().unwrap().is_zero());
    }

    #[test]
    fn parse_errors_carry_columns() {
        let err = "I(X[0];Z[1])".parse::<Term>().unwrap_err();
        assert_eq!(err.column, 8);
        let err = "X[3]".parse::<Var>().unwrap_err();
        assert!(err.message.contains("root"));
        assert!("m[1,0]".parse::<MessageId>().is_err());
        assert_eq!("m[0]".parse::<MessageId>().unwrap(), MessageId::ROOT);
    }
}
