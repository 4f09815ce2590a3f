//! Text syntax for formulae and regions.
//!
//! ```text
//! file     := (IDENT "=" region ";")* formula
//! formula  := conjunct ("&&" conjunct)*
//! conjunct := "G" window region | "F" window region
//!           | region "U" window region | region "U'" window region
//! window   := "[" INT "," INT "]"
//! region   := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "!" unary | "(" region ")" | "true" | "box(" NUM ("," NUM)* ")"
//!           | linear (">=" | "<=" | ">" | "<") linear | IDENT
//! ```
//!
//! Variables are `x0`, `x1`, ... Identifiers that are neither variables nor
//! keywords name regions; names without a definition stay abstract atoms.
//! `#` starts a comment.

use std::collections::HashMap;

use super::{AffinePredicate, Conjunct, Formula, RegionExpr, Window};
use crate::error::{Error, Result};
use crate::geometry::Aabb;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    AndAnd,
    And,
    Or,
    Not,
    Ge,
    Le,
    Gt,
    Lt,
    Assign,
    Semi,
    Plus,
    Minus,
    Star,
    Prime,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(tl, tc, format!("malformed number `{s}`")))?;
            col += i - start;
            push(&mut out, Tok::Num(v));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('&', _) => (Tok::And, 1),
            ('|', _) => (Tok::Or, 1),
            ('!', _) => (Tok::Not, 1),
            ('>', _) => (Tok::Gt, 1),
            ('<', _) => (Tok::Lt, 1),
            ('=', _) => (Tok::Assign, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('\'', _) => (Tok::Prime, 1),
            ('′', _) => (Tok::Prime, 1),
            _ => return Err(syntax(tl, tc, format!("unexpected character `{c}`"))),
        };
        i += len;
        col += len;
        push(&mut out, tok);
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Linear expression `Σ c_i x_i + d`.
#[derive(Default)]
struct Linear {
    coef: Vec<f64>,
    constant: f64,
}

impl Linear {
    fn add_term(&mut self, var: Option<usize>, c: f64) {
        match var {
            Some(v) => {
                if self.coef.len() <= v {
                    self.coef.resize(v + 1, 0.0);
                }
                self.coef[v] += c;
            }
            None => self.constant += c,
        }
    }

    /// `self - other` as a predicate `(...) ≥ 0`.
    fn minus(self, other: Linear) -> AffinePredicate {
        let n = self.coef.len().max(other.coef.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let coef = (0..n).map(|i| get(&self.coef, i) - get(&other.coef, i)).collect();
        AffinePredicate::new(coef, self.constant - other.constant)
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    defs: HashMap<String, RegionExpr>,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            defs: HashMap::new(),
            _src: src,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn is_ident(&self, n: usize, name: &str) -> bool {
        matches!(self.peek_at(n), Tok::Ident(s) if s == name)
    }

    fn at_temporal(&self) -> bool {
        (self.is_ident(0, "G") || self.is_ident(0, "F")) && *self.peek_at(1) == Tok::LBracket
    }

    fn at_until(&self) -> bool {
        self.is_ident(0, "U") && matches!(self.peek_at(1), Tok::LBracket | Tok::Prime)
    }

    fn file(&mut self) -> Result<Formula> {
        while matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Assign {
            let Tok::Ident(name) = self.bump() else { unreachable!() };
            if is_reserved(&name) {
                return Err(self.error(format!("`{name}` cannot be redefined")));
            }
            self.bump();
            let r = self.region()?;
            self.expect(Tok::Semi, "`;`")?;
            self.defs.insert(name, r);
        }
        let mut conjuncts = vec![self.conjunct()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            conjuncts.push(self.conjunct()?);
        }
        if *self.peek() != Tok::Eof {
            return Err(self.error(format!("expected `&&` or end of input, found {}", describe(self.peek()))));
        }
        Ok(Formula { conjuncts })
    }

    fn conjunct(&mut self) -> Result<Conjunct> {
        if self.at_temporal() {
            let Tok::Ident(op) = self.bump() else { unreachable!() };
            let window = self.window()?;
            let region = self.region()?;
            return Ok(if op == "G" {
                Conjunct::Always { window, region }
            } else {
                Conjunct::Eventually { window, region }
            });
        }
        let left = self.region()?;
        if !self.at_until() {
            return Err(self.error(format!(
                "expected `U[` or `U'[` after region, found {}",
                describe(self.peek())
            )));
        }
        self.bump();
        let prime = *self.peek() == Tok::Prime;
        if prime {
            self.bump();
        }
        let window = self.window()?;
        let right = self.region()?;
        Ok(if prime {
            Conjunct::UntilFromStart {
                window,
                left,
                right,
            }
        } else {
            Conjunct::Until {
                window,
                left,
                right,
            }
        })
    }

    fn window(&mut self) -> Result<Window> {
        self.expect(Tok::LBracket, "`[`")?;
        let a = self.integer()?;
        self.expect(Tok::Comma, "`,`")?;
        let b = self.integer()?;
        self.expect(Tok::RBracket, "`]`")?;
        Window::new(a, b)
    }

    fn integer(&mut self) -> Result<i64> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e15 => {
                self.bump();
                Ok(if neg { -(v as i64) } else { v as i64 })
            }
            t => Err(self.error(format!("expected integer instant, found {}", describe(&t)))),
        }
    }

    fn region(&mut self) -> Result<RegionExpr> {
        let mut r = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            r = RegionExpr::or(r, self.conj()?);
        }
        Ok(r)
    }

    fn conj(&mut self) -> Result<RegionExpr> {
        let mut r = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            r = RegionExpr::and(r, self.unary()?);
        }
        Ok(r)
    }

    fn unary(&mut self) -> Result<RegionExpr> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(RegionExpr::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let r = self.region()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(r)
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(RegionExpr::True)
            }
            Tok::Ident(name) if name == "box" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.boxed()
            }
            Tok::Ident(name) if variable_index(&name).is_none() && name != "inf" => {
                if self.at_temporal() || self.at_until() {
                    return Err(self.error("expected region, found temporal operator"));
                }
                self.bump();
                Ok(self
                    .defs
                    .get(&name)
                    .cloned()
                    .unwrap_or(RegionExpr::Atom(name)))
            }
            Tok::Ident(_) | Tok::Num(_) | Tok::Minus | Tok::Plus => self.inequality(),
            t => Err(self.error(format!("expected region, found {}", describe(&t)))),
        }
    }

    fn boxed(&mut self) -> Result<RegionExpr> {
        let (line, column) = self.here();
        self.expect(Tok::LParen, "`(`")?;
        let mut v = vec![self.signed_number()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            v.push(self.signed_number()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if v.len() % 2 != 0 {
            return Err(syntax(line, column, "box needs a lo,hi pair per dimension"));
        }
        let lo: Vec<f64> = v.iter().step_by(2).copied().collect();
        let hi: Vec<f64> = v.iter().skip(1).step_by(2).copied().collect();
        let b = Aabb::new(&lo, &hi).map_err(|e| syntax(line, column, e.to_string()))?;
        Ok(RegionExpr::Box(b))
    }

    fn signed_number(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Tok::Minus => sign = -sign,
                Tok::Plus => {}
                _ => break,
            }
            self.bump();
        }
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(sign * v)
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(sign * f64::INFINITY)
            }
            t => Err(self.error(format!("expected number, found {}", describe(&t)))),
        }
    }

    fn inequality(&mut self) -> Result<RegionExpr> {
        let lhs = self.linear()?;
        let op = self.peek().clone();
        if !matches!(op, Tok::Ge | Tok::Le | Tok::Gt | Tok::Lt) {
            return Err(self.error(format!("expected comparison, found {}", describe(&op))));
        }
        self.bump();
        let rhs = self.linear()?;
        let p = match op {
            Tok::Ge | Tok::Gt => lhs.minus(rhs),
            _ => rhs.minus(lhs),
        };
        Ok(RegionExpr::Predicate(p))
    }

    fn linear(&mut self) -> Result<Linear> {
        let mut e = Linear::default();
        let mut sign = 1.0;
        loop {
            while matches!(self.peek(), Tok::Minus | Tok::Plus) {
                if self.bump() == Tok::Minus {
                    sign = -sign;
                }
            }
            let (var, c) = self.term()?;
            e.add_term(var, sign * c);
            match self.peek() {
                Tok::Plus | Tok::Minus => sign = 1.0,
                _ => break,
            }
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<(Option<usize>, f64)> {
        match self.peek().clone() {
            Tok::Num(c) => {
                self.bump();
                if *self.peek() == Tok::Star {
                    self.bump();
                    let v = self.variable()?;
                    Ok((Some(v), c))
                } else {
                    Ok((None, c))
                }
            }
            Tok::Ident(name) if variable_index(&name).is_some() => {
                let v = self.variable()?;
                if *self.peek() == Tok::Star {
                    self.bump();
                    let c = self.signed_number()?;
                    Ok((Some(v), c))
                } else {
                    Ok((Some(v), 1.0))
                }
            }
            t => Err(self.error(format!("expected term, found {}", describe(&t)))),
        }
    }

    fn variable(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Ident(name) => match variable_index(&name) {
                Some(v) => {
                    self.bump();
                    Ok(v)
                }
                None => Err(self.error(format!("expected variable, found `{name}`"))),
            },
            t => Err(self.error(format!("expected variable, found {}", describe(&t)))),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "true" | "box" | "inf" | "G" | "F" | "U") || variable_index(name).is_some()
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("`{v}`"),
        Tok::Eof => "end of input".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::AndAnd => "`&&`".into(),
        Tok::And => "`&`".into(),
        Tok::Or => "`|`".into(),
        Tok::Not => "`!`".into(),
        Tok::Ge => "`>=`".into(),
        Tok::Le => "`<=`".into(),
        Tok::Gt => "`>`".into(),
        Tok::Lt => "`<`".into(),
        Tok::Assign => "`=`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Prime => "`'`".into(),
    }
}

/// Parses a formula, including any leading `name = region;` definitions.
///
/// Predicates are padded to the largest dimension used anywhere in the
/// formula; boxes of differing dimension are rejected.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let f = Parser::new(text)?.file()?;
    match f.min_dim() {
        Some(n) => f.with_dim(n),
        None => Ok(f),
    }
}

/// Parses a formula whose regions live in ℝⁿ.
pub fn parse_formula_for_dim(text: &str, n: usize) -> Result<Formula> {
    Parser::new(text)?.file()?.with_dim(n)
}

/// Parses a single region expression.
pub fn parse_region(text: &str) -> Result<RegionExpr> {
    let mut p = Parser::new(text)?;
    let r = p.region()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(r)
}
