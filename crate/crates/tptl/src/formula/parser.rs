//! Lexer and recursive-descent parser for the formula grammar.
//!
//! Precedence, tightest first: unary operators (negation, next, eventually,
//! always, freeze), `U`/`R` (right-associative), `/\`, `\/`, `->`
//! (right-associative). One token of lookahead resolves every identifier:
//! followed by `.` it opens a freeze binder, followed by a comparison it
//! starts a time constraint, otherwise it is a proposition.
//!
//! [`parse_mtl`] accepts the same grammar without freeze binders and
//! constraints, and extends the temporal operators with optional intervals
//! (`U[l,u]`, `F[l,u]`, `G[l,u]`, `R[l,u]`, upper bound `inf` allowed).

use super::{Formula, Interval, MtlFormula, Relation};
use std::fmt;
use thiserror::Error;

/// Syntax error with the 1-based source position and the token set the
/// parser would have accepted there.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}:{}: found {}, expected ", self.line, self.column, self.found)?;
        match self.expected.as_slice() {
            [] => out.write_str("nothing"),
            [one] => out.write_str(one),
            many => {
                let (last, init) = many.split_last().expect("nonempty");
                write!(out, "one of {}, or {last}", init.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Release,
    Eventually,
    Always,
    Dot,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Le,
    Lt,
    Eq,
    Gt,
    Ge,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Number(value) => format!("number `{value}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`/\\`".into(),
            Tok::Or => "`\\/`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Release => "`R`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Always => "`G`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn comparison(&self) -> Option<Relation> {
        match self {
            Tok::Le => Some(Relation::Le),
            Tok::Lt => Some(Relation::Lt),
            Tok::Eq => Some(Relation::Eq),
            Tok::Gt => Some(Relation::Gt),
            Tok::Ge => Some(Relation::Ge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer { chars: text.chars().collect(), pos: 0, line: 1, column: 1 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        c
    }

    fn number(&mut self) -> f64 {
        let mut text = String::new();
        while self.peek().is_some_and(|d| d.is_ascii_digit()) {
            text.push(self.bump());
        }
        // A fractional part needs a digit after the dot; a bare dot stays a
        // freeze token.
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
            text.push(self.bump());
            while self.peek().is_some_and(|d| d.is_ascii_digit()) {
                text.push(self.bump());
            }
        }
        text.parse().expect("digit sequence")
    }

    fn unexpected(&self, c: char, line: usize, column: usize) -> ParseError {
        ParseError {
            line,
            column,
            found: format!("character `{c}`"),
            expected: vec!["a formula token".into()],
        }
    }

    fn run(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut tokens = Vec::new();
        while let Some(c) = self.peek() {
            let (line, column) = (self.line, self.column);
            let tok = match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                    continue;
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                '!' | '~' => {
                    self.bump();
                    Tok::Not
                }
                '&' => {
                    self.bump();
                    Tok::And
                }
                '|' => {
                    self.bump();
                    Tok::Or
                }
                '/' => {
                    self.bump();
                    if self.peek() == Some('\\') {
                        self.bump();
                        Tok::And
                    } else {
                        return Err(self.unexpected('/', line, column));
                    }
                }
                '\\' => {
                    self.bump();
                    if self.peek() == Some('/') {
                        self.bump();
                        Tok::Or
                    } else {
                        return Err(self.unexpected('\\', line, column));
                    }
                }
                '-' => {
                    self.bump();
                    match self.peek() {
                        Some('>') => {
                            self.bump();
                            Tok::Implies
                        }
                        Some(d) if d.is_ascii_digit() => Tok::Number(-self.number()),
                        _ => return Err(self.unexpected('-', line, column)),
                    }
                }
                '<' => {
                    self.bump();
                    match self.peek() {
                        Some('=') => {
                            self.bump();
                            Tok::Le
                        }
                        Some('>') => {
                            self.bump();
                            Tok::Eventually
                        }
                        _ => Tok::Lt,
                    }
                }
                '>' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                '=' => {
                    self.bump();
                    Tok::Eq
                }
                '[' => {
                    self.bump();
                    if self.peek() == Some(']') {
                        self.bump();
                        Tok::Always
                    } else {
                        Tok::LBracket
                    }
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                d if d.is_ascii_digit() => Tok::Number(self.number()),
                a if a.is_ascii_alphabetic() || a == '_' => {
                    let mut word = String::new();
                    while self.peek().is_some_and(|w| w.is_ascii_alphanumeric() || w == '_') {
                        word.push(self.bump());
                    }
                    match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "U" => Tok::Until,
                        "R" => Tok::Release,
                        "X" => Tok::Next,
                        "F" => Tok::Eventually,
                        "G" => Tok::Always,
                        _ => Tok::Ident(word),
                    }
                }
                other => return Err(self.unexpected(other, line, column)),
            };
            tokens.push(Spanned { tok, line, column });
        }
        tokens.push(Spanned { tok: Tok::End, line: self.line, column: self.column });
        Ok(tokens)
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { tokens: Lexer::new(text).run()?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_second(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn advance(&mut self) -> Spanned {
        let spanned = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        spanned
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let here = &self.tokens[self.pos];
        ParseError {
            line: here.line,
            column: here.column,
            found: here.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(&[expected]))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::End) {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    fn nonnegative_number(&mut self, what: &str) -> Result<f64, ParseError> {
        match self.peek() {
            Tok::Number(value) => {
                let value = *value;
                if value < 0.0 {
                    let err = self.error(&[what]);
                    return Err(ParseError { found: format!("negative number `{value}`"), ..err });
                }
                self.advance();
                Ok(value)
            }
            _ => Err(self.error(&[what])),
        }
    }

    // formula := implies
    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.implies()
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::And) {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            let rhs = self.until()?;
            Ok(Formula::until(lhs, rhs))
        } else if self.eat(&Tok::Release) {
            let rhs = self.until()?;
            Ok(Formula::release(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.advance();
                Ok(Formula::next(self.unary()?))
            }
            Tok::Eventually => {
                self.advance();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Always => {
                self.advance();
                Ok(Formula::always(self.unary()?))
            }
            Tok::Ident(_) if matches!(self.peek_second(), Tok::Dot) => {
                let Tok::Ident(variable) = self.advance().tok else {
                    unreachable!("peeked identifier");
                };
                self.advance(); // the dot
                Ok(Formula::freeze(variable, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance();
                Ok(Formula::fals())
            }
            Tok::LParen => {
                self.advance();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                if let Some(relation) = self.peek().comparison() {
                    self.advance();
                    let bound = self.nonnegative_number("a nonnegative constraint bound")?;
                    Ok(Formula::constraint(name, relation, bound))
                } else {
                    Ok(Formula::Prop(name))
                }
            }
            _ => {
                Err(self.error(&["`true`", "`false`", "an identifier", "`(`", "a unary operator"]))
            }
        }
    }

    // Interval-decorated grammar without freeze binders and constraints.
    fn mtl_formula(&mut self) -> Result<MtlFormula, ParseError> {
        self.mtl_implies()
    }

    fn mtl_implies(&mut self) -> Result<MtlFormula, ParseError> {
        let lhs = self.mtl_or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.mtl_implies()?;
            Ok(MtlFormula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn mtl_or(&mut self) -> Result<MtlFormula, ParseError> {
        let mut lhs = self.mtl_and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.mtl_and()?;
            lhs = MtlFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn mtl_and(&mut self) -> Result<MtlFormula, ParseError> {
        let mut lhs = self.mtl_until()?;
        while self.eat(&Tok::And) {
            let rhs = self.mtl_until()?;
            lhs = MtlFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn mtl_until(&mut self) -> Result<MtlFormula, ParseError> {
        let lhs = self.mtl_unary()?;
        if self.eat(&Tok::Until) {
            let interval = self.interval()?;
            let rhs = self.mtl_until()?;
            Ok(MtlFormula::until(lhs, rhs, interval))
        } else if self.eat(&Tok::Release) {
            let interval = self.interval()?;
            let rhs = self.mtl_until()?;
            Ok(MtlFormula::release(lhs, rhs, interval))
        } else {
            Ok(lhs)
        }
    }

    fn mtl_unary(&mut self) -> Result<MtlFormula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(MtlFormula::not(self.mtl_unary()?))
            }
            Tok::Next => {
                self.advance();
                Ok(MtlFormula::next(self.mtl_unary()?))
            }
            Tok::Eventually => {
                self.advance();
                let interval = self.interval()?;
                Ok(MtlFormula::eventually(self.mtl_unary()?, interval))
            }
            Tok::Always => {
                self.advance();
                let interval = self.interval()?;
                Ok(MtlFormula::always(self.mtl_unary()?, interval))
            }
            _ => self.mtl_atom(),
        }
    }

    fn mtl_atom(&mut self) -> Result<MtlFormula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(MtlFormula::True)
            }
            Tok::False => {
                self.advance();
                Ok(MtlFormula::fals())
            }
            Tok::LParen => {
                self.advance();
                let inner = self.mtl_formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                if self.peek().comparison().is_some() {
                    Err(self.error(&["no comparison after a proposition in the timed grammar"]))
                } else if matches!(self.peek(), Tok::Dot) {
                    Err(self.error(&["no freeze binder in the timed grammar"]))
                } else {
                    Ok(MtlFormula::Prop(name))
                }
            }
            _ => {
                Err(self.error(&["`true`", "`false`", "an identifier", "`(`", "a unary operator"]))
            }
        }
    }

    /// `[l,u]` after a temporal operator; absent means untimed, `[0, inf]`.
    fn interval(&mut self) -> Result<Interval, ParseError> {
        if !self.eat(&Tok::LBracket) {
            return Ok(Interval::untimed());
        }
        let lower = self.nonnegative_number("a nonnegative interval bound")?;
        self.expect(Tok::Comma, "`,`")?;
        let upper = match self.peek().clone() {
            Tok::Ident(word) if word == "inf" => {
                self.advance();
                f64::INFINITY
            }
            _ => self.nonnegative_number("a nonnegative interval bound or `inf`")?,
        };
        if upper < lower {
            return Err(ParseError {
                found: format!("empty interval [{lower},{upper}]"),
                ..self.error(&["an interval with lower <= upper"])
            });
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Interval { lower, upper })
    }
}

/// Parses a formula in the untimed grammar with freeze binders and
/// constraints.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(text)?;
    let formula = parser.formula()?;
    parser.expect_end()?;
    Ok(formula)
}

/// Parses a formula in the interval-decorated grammar.
pub fn parse_mtl(text: &str) -> Result<MtlFormula, ParseError> {
    let mut parser = Parser::new(text)?;
    let formula = parser.mtl_formula()?;
    parser.expect_end()?;
    Ok(formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{check_encapsulated, validate_closed};

    #[test]
    fn parses_nested_freeze_block() {
        let f = parse("G x.(F (a /\\ x <= 1 /\\ G (x <= 1 -> !b)))").unwrap();
        let expected = Formula::always(Formula::freeze(
            "x",
            Formula::eventually(Formula::and(
                Formula::and(Formula::prop("a"), Formula::constraint("x", Relation::Le, 1.0)),
                Formula::always(Formula::implies(
                    Formula::constraint("x", Relation::Le, 1.0),
                    Formula::not(Formula::prop("b")),
                )),
            )),
        ));
        assert_eq!(f, expected);
        assert!(validate_closed(&f).is_ok());
        assert!(check_encapsulated(&f).is_ok());
    }

    #[test]
    fn connective_precedence_and_associativity() {
        assert_eq!(
            parse("a \\/ b /\\ c").unwrap(),
            Formula::or(Formula::prop("a"), Formula::and(Formula::prop("b"), Formula::prop("c")))
        );
        assert_eq!(
            parse("a -> b -> c").unwrap(),
            Formula::implies(
                Formula::prop("a"),
                Formula::implies(Formula::prop("b"), Formula::prop("c"))
            )
        );
        assert_eq!(
            parse("a U b U c").unwrap(),
            Formula::until(
                Formula::prop("a"),
                Formula::until(Formula::prop("b"), Formula::prop("c"))
            )
        );
        assert_eq!(
            parse("a U b R c").unwrap(),
            Formula::until(
                Formula::prop("a"),
                Formula::release(Formula::prop("b"), Formula::prop("c"))
            )
        );
        assert_eq!(
            parse("a /\\ b /\\ c").unwrap(),
            Formula::and(Formula::and(Formula::prop("a"), Formula::prop("b")), Formula::prop("c"))
        );
    }

    #[test]
    fn ascii_aliases() {
        assert_eq!(parse("~a & b").unwrap(), parse("! a /\\ b").unwrap());
        assert_eq!(parse("a | b").unwrap(), parse("a \\/ b").unwrap());
        assert_eq!(parse("<> a").unwrap(), parse("F a").unwrap());
        assert_eq!(parse("[] a").unwrap(), parse("G a").unwrap());
    }

    #[test]
    fn identifier_lookahead_disambiguates() {
        assert_eq!(parse("x").unwrap(), Formula::prop("x"));
        assert_eq!(parse("x <= 1").unwrap(), Formula::constraint("x", Relation::Le, 1.0));
        assert_eq!(parse("x.a").unwrap(), Formula::freeze("x", Formula::prop("a")));
        assert_eq!(
            parse("x.x >= 0").unwrap(),
            Formula::freeze("x", Formula::constraint("x", Relation::Ge, 0.0))
        );
    }

    #[test]
    fn constraints_accept_all_five_comparisons() {
        for (text, relation) in [
            ("x <= 1", Relation::Le),
            ("x < 1", Relation::Lt),
            ("x = 1", Relation::Eq),
            ("x > 1", Relation::Gt),
            ("x >= 1", Relation::Ge),
        ] {
            assert_eq!(parse(text).unwrap(), Formula::constraint("x", relation, 1.0));
        }
    }

    #[test]
    fn false_parses_to_negated_truth() {
        assert_eq!(parse("false").unwrap(), Formula::fals());
    }

    #[test]
    fn negative_bound_is_rejected() {
        let err = parse("x <= -1").unwrap_err();
        assert!(err.found.contains("negative"), "{err}");
    }

    #[test]
    fn arithmetic_over_variables_is_a_syntax_error() {
        assert!(parse("x + 1 <= 2").is_err());
        assert!(parse("x <= y").is_err());
    }

    #[test]
    fn error_carries_position_and_expectations() {
        let err = parse("a /\\").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(!err.expected.is_empty());
        let err = parse("(a \n/\\ )").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn keywords_are_not_identifiers() {
        assert!(parse("U").is_err());
        assert_eq!(parse("Until").unwrap(), Formula::prop("Until"));
        assert_eq!(parse("u").unwrap(), Formula::prop("u"));
    }

    #[test]
    fn decimal_bounds() {
        assert_eq!(parse("x <= 1.5").unwrap(), Formula::constraint("x", Relation::Le, 1.5));
        assert_eq!(
            parse("x.(F x <= 0.25)").unwrap(),
            Formula::freeze("x", Formula::eventually(Formula::constraint("x", Relation::Le, 0.25)))
        );
    }

    #[test]
    fn mtl_intervals() {
        assert_eq!(
            parse_mtl("a U[1,2] b").unwrap(),
            MtlFormula::until(
                MtlFormula::Prop("a".into()),
                MtlFormula::Prop("b".into()),
                Interval { lower: 1.0, upper: 2.0 }
            )
        );
        assert_eq!(
            parse_mtl("a U b").unwrap(),
            MtlFormula::until(
                MtlFormula::Prop("a".into()),
                MtlFormula::Prop("b".into()),
                Interval::untimed()
            )
        );
        assert_eq!(
            parse_mtl("F[0,5] a").unwrap(),
            MtlFormula::eventually(
                MtlFormula::Prop("a".into()),
                Interval { lower: 0.0, upper: 5.0 }
            )
        );
        let g = parse_mtl("G[1,inf] a").unwrap();
        assert_eq!(
            g,
            MtlFormula::always(
                MtlFormula::Prop("a".into()),
                Interval { lower: 1.0, upper: f64::INFINITY }
            )
        );
    }

    #[test]
    fn mtl_rejects_freeze_and_constraints() {
        assert!(parse_mtl("x.(a U b)").is_err());
        assert!(parse_mtl("x <= 1").is_err());
    }

    #[test]
    fn mtl_rejects_empty_interval() {
        let err = parse_mtl("a U[2,1] b").unwrap_err();
        assert!(err.found.contains("empty interval"), "{err}");
    }
}
