//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := iff
//! iff     := implies ('<=>' implies)*
//! implies := or ('=>' implies)?
//! or      := and ('||' and)*
//! and     := unary ('&&' unary)*
//! unary   := '!' unary | ('exists'|'forall') vars '.' formula | atom | '(' formula ')'
//! atom    := term ('<='|'<'|'>='|'>'|'='|'!=') term | x 'in' (ys) | x '=' 'max' (ys)
//!          | 'argmax' (ys) '=' ('{' ks '}' | 'argmax' (ys)) | 'ispow2' (x)
//!          | Name (xs) ('='|'!=') (ys)
//! term    := summand (('+'|'-') summand)*
//! summand := factor ('*' factor)*
//! factor  := literal | ident | '-' factor | 'exp' (term) | '(' term ')'
//! ```
//! A bare literal multiplied by a bare identifier is the scaled variable `c*x`.

use super::dialect::{validate, Dialect};
use super::{Formula, NetAtom, Term};
use crate::error::{Error, Result};
use crate::rational::Rational;

const RESERVED: &[&str] = &["exists", "forall", "in", "exp", "max", "argmax", "ispow2"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end: usize,
}

fn lex(text: &str) -> Result<Lexed> {
    const SYMS: &[(&str, &str)] = &[
        ("<=>", "<=>"),
        ("<=", "<="),
        (">=", ">="),
        ("!=", "!="),
        ("=>", "=>"),
        ("&&", "&&"),
        ("||", "||"),
        ("<", "<"),
        (">", ">"),
        ("=", "="),
        ("!", "!"),
        ("(", "("),
        (")", ")"),
        ("{", "{"),
        ("}", "}"),
        (",", ","),
        (".", "."),
        ("+", "+"),
        ("-", "-"),
        ("*", "*"),
        ("/", "/"),
        ("⇔", "<=>"),
        ("⇒", "=>"),
        ("≤", "<="),
        ("≥", ">="),
        ("≠", "!="),
        ("¬", "!"),
        ("∧", "&&"),
        ("∨", "||"),
        ("·", "*"),
    ];
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    'outer: while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if c == '∃' || c == '∀' {
            toks.push((Tok::Ident(if c == '∃' { "exists" } else { "forall" }.into()), i));
            i += c.len_utf8();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < text.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '.' && i + 1 < text.len() && bytes[i + 1].is_ascii_digit()
                && !matches!(toks.last(), Some((Tok::Ident(_), _))));
        if starts_number {
            let start = i;
            while i < text.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < text.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < text.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            toks.push((Tok::Num(text[start..i].to_string()), start));
            continue;
        }
        for (s, canon) in SYMS {
            if text[i..].starts_with(s) {
                toks.push((Tok::Sym(canon), i));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(Error::Syntax { pos: i, msg: format!("unexpected character {c:?}") });
    }
    Ok(Lexed { toks, end: text.len() })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    end: usize,
    i: usize,
}

/// A parsed factor together with whether it was written bare (no parentheses).
struct Factor {
    term: Term,
    bare_literal: bool,
    bare_ident: bool,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.i + k).map(|t| &t.0)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) { Ok(()) } else { self.err(format!("expected `{s}`")) }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => self.err("expected a variable name"),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>> {
        self.expect_sym("(")?;
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.implies()?;
        while self.eat_sym("<=>") {
            let g = self.implies()?;
            f = Formula::iff(f, g);
        }
        Ok(f)
    }

    fn implies(&mut self) -> Result<Formula> {
        let f = self.or()?;
        if self.eat_sym("=>") {
            let g = self.implies()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.eat_sym("||") {
            let g = self.and()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&&") {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            let universal = self.is_kw("forall");
            self.i += 1;
            let mut vars = vec![self.ident()?];
            while self.eat_sym(",") {
                vars.push(self.ident()?);
            }
            self.expect_sym(".")?;
            let body = self.formula()?;
            return Ok(if universal {
                Formula::forall_many(&vars, body)
            } else {
                Formula::exists_many(&vars, body)
            });
        }
        if self.is_sym("(") {
            let save = self.i;
            if let Ok(f) = self.atom() {
                return Ok(f);
            }
            self.i = save;
            self.expect_sym("(")?;
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.is_kw("ispow2") {
            self.i += 1;
            let xs = self.ident_list()?;
            if xs.len() != 1 {
                return self.err("ispow2 takes one variable");
            }
            return Ok(Formula::IsPowerOfTwo(xs.into_iter().next().unwrap()));
        }
        if self.is_kw("argmax") {
            self.i += 1;
            let ys = self.ident_list()?;
            self.expect_sym("=")?;
            if self.is_kw("argmax") {
                self.i += 1;
                let zs = self.ident_list()?;
                if zs.len() != ys.len() {
                    return self.err("argmax comparison needs equal lengths");
                }
                return Ok(Formula::ArgmaxEq(ys, zs));
            }
            self.expect_sym("{")?;
            let mut ks = Vec::new();
            if !self.is_sym("}") {
                loop {
                    match self.peek() {
                        Some(Tok::Num(n)) => {
                            let k: usize = n.parse().map_err(|_| Error::Syntax {
                                pos: self.pos(),
                                msg: "index expected".into(),
                            })?;
                            if k == 0 || k > ys.len() {
                                return self.err(format!("index {k} out of range"));
                            }
                            ks.push(k);
                            self.i += 1;
                        }
                        _ => return self.err("index expected"),
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            ks.sort_unstable();
            ks.dedup();
            return Ok(Formula::ArgmaxIs(ys, ks));
        }
        if let (Some(Tok::Ident(name)), Some(Tok::Sym("("))) = (self.peek(), self.peek_at(1)) {
            if !RESERVED.contains(&name.as_str()) {
                let name = name.clone();
                self.i += 1;
                let xs = self.ident_list()?;
                let negated = if self.eat_sym("=") {
                    false
                } else if self.eat_sym("!=") {
                    true
                } else {
                    return self.err("expected `=` or `!=` after network application");
                };
                let ys = if self.is_sym("(") { self.ident_list()? } else { vec![self.ident()?] };
                let a = NetAtom { net: name, inputs: xs, outputs: ys };
                return Ok(if negated { Formula::NegNnAtom(a) } else { Formula::NnAtom(a) });
            }
        }
        let lhs = self.term()?;
        if self.is_kw("in") {
            self.i += 1;
            let x = plain_var(&lhs).ok_or_else(|| Error::Syntax {
                pos: self.pos(),
                msg: "membership needs a variable on the left".into(),
            })?;
            return Ok(Formula::In(x, self.ident_list()?));
        }
        let op = match self.peek() {
            Some(Tok::Sym(s)) if ["<=", "<", ">=", ">", "=", "!="].contains(s) => *s,
            _ => return self.err("expected a comparison operator"),
        };
        self.i += 1;
        if op == "=" && self.is_kw("max") {
            self.i += 1;
            let x = plain_var(&lhs).ok_or_else(|| Error::Syntax {
                pos: self.pos(),
                msg: "max atom needs a variable on the left".into(),
            })?;
            return Ok(Formula::IsMax(x, self.ident_list()?));
        }
        let rhs = self.term()?;
        Ok(match op {
            "<=" => Formula::Le(lhs, rhs),
            "<" => Formula::Lt(lhs, rhs),
            ">=" => Formula::Le(rhs, lhs),
            ">" => Formula::Lt(rhs, lhs),
            "=" => Formula::Eq(lhs, rhs),
            _ => Formula::Ne(lhs, rhs),
        })
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.summand()?;
        loop {
            if self.eat_sym("+") {
                let u = self.summand()?;
                t = Term::add(t, u);
            } else if self.eat_sym("-") {
                let u = self.summand()?;
                t = Term::add(t, u.neg());
            } else {
                return Ok(t);
            }
        }
    }

    fn summand(&mut self) -> Result<Term> {
        let first = self.factor()?;
        if !self.is_sym("*") {
            return Ok(first.term);
        }
        let mut acc = first;
        while self.eat_sym("*") {
            let rhs = self.factor()?;
            let term = match (&acc.term, &rhs.term) {
                (Term::Const(c), Term::Var(_, x)) if acc.bare_literal && rhs.bare_ident => {
                    Term::Var(c.clone(), x.clone())
                }
                _ => Term::mul(acc.term, rhs.term),
            };
            acc = Factor { term, bare_literal: false, bare_ident: false };
        }
        Ok(acc.term)
    }

    fn literal(&mut self) -> Result<Rational> {
        let Some(Tok::Num(n)) = self.peek().cloned() else {
            return self.err("number expected");
        };
        self.i += 1;
        if self.is_sym("/") {
            self.i += 1;
            let Some(Tok::Num(d)) = self.peek().cloned() else {
                return self.err("denominator expected");
            };
            self.i += 1;
            let at = self.pos();
            return Rational::parse(&format!("{n}/{d}"))
                .map_err(|e| Error::Syntax { pos: at, msg: e.to_string() });
        }
        let at = self.pos();
        Rational::parse(&n).map_err(|e| Error::Syntax { pos: at, msg: e.to_string() })
    }

    fn factor(&mut self) -> Result<Factor> {
        if self.eat_sym("-") {
            if matches!(self.peek(), Some(Tok::Num(_))) {
                let c = self.literal()?;
                return Ok(Factor { term: Term::Const(-c), bare_literal: true, bare_ident: false });
            }
            if let (Some(Tok::Ident(x)), next) = (self.peek().cloned(), self.peek_at(1)) {
                if !RESERVED.contains(&x.as_str()) && next != Some(&Tok::Sym("(")) {
                    self.i += 1;
                    return Ok(Factor {
                        term: Term::Var(Rational::from_int(-1), x),
                        bare_literal: false,
                        bare_ident: false,
                    });
                }
            }
            let inner = self.factor()?;
            return Ok(Factor { term: inner.term.neg(), bare_literal: false, bare_ident: false });
        }
        match self.peek().cloned() {
            Some(Tok::Num(_)) => {
                let c = self.literal()?;
                Ok(Factor { term: Term::Const(c), bare_literal: true, bare_ident: false })
            }
            Some(Tok::Ident(x)) if x == "exp" => {
                self.i += 1;
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(Factor { term: Term::exp(t), bare_literal: false, bare_ident: false })
            }
            Some(Tok::Ident(x)) if !RESERVED.contains(&x.as_str()) => {
                if self.peek_at(1) == Some(&Tok::Sym("(")) {
                    return self.err(format!("`{x}(` is a network application, not a term"));
                }
                self.i += 1;
                Ok(Factor { term: Term::var(&x), bare_literal: false, bare_ident: true })
            }
            Some(Tok::Sym("(")) => {
                self.i += 1;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(Factor { term: t, bare_literal: false, bare_ident: false })
            }
            _ => self.err("term expected"),
        }
    }
}

fn plain_var(t: &Term) -> Option<String> {
    match t {
        Term::Var(a, x) if *a == Rational::one() => Some(x.clone()),
        _ => None,
    }
}

/// Parses without dialect checks.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let lexed = lex(text)?;
    let mut p = Parser { toks: lexed.toks, end: lexed.end, i: 0 };
    let f = p.formula()?;
    if p.i != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

/// Parses a term on its own.
pub fn parse_term(text: &str) -> Result<Term> {
    let lexed = lex(text)?;
    let mut p = Parser { toks: lexed.toks, end: lexed.end, i: 0 };
    let t = p.term()?;
    if p.i != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(t)
}

/// Parses and validates against a dialect.
pub fn parse(text: &str, dialect: Dialect) -> Result<Formula> {
    let f = parse_formula(text)?;
    validate(&f, dialect)?;
    Ok(f)
}
