//! Formulas over linear real arithmetic with network atoms, and their tooling.
//!
//! One AST serves every dialect. Sugar nodes (`=`, `!=`, `<`, `=>`, `<=>`, `forall`,
//! membership, max and argmax atoms) are removed by [`abbrev::expand_abbrev`].

pub mod abbrev;
pub mod dialect;
pub mod eval;
pub mod parser;
pub mod prenex;
pub mod printer;
pub mod specs;

use std::collections::{BTreeMap, BTreeSet};

use crate::nn::Ffnn;
use crate::rational::Rational;

pub use dialect::Dialect;
pub use eval::{eval_term, eval_term_f64, holds};
pub use parser::parse;
pub use prenex::{to_prenex, Prefix, Quant};

pub type Var = String;

/// Variable assignment. Interpretations are rational-valued.
pub type Interpretation = BTreeMap<Var, Rational>;

/// Networks referenced by name from network atoms.
pub type NetworkBinding = BTreeMap<String, Ffnn>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// `a·x`
    Var(Rational, Var),
    Const(Rational),
    Add(Box<Term>, Box<Term>),
    /// Product of two terms (exponential-field dialect only).
    Mul(Box<Term>, Box<Term>),
    /// `e^t` (exponential-field dialect only).
    Exp(Box<Term>),
}

/// `N(x1..xm) = (y1..yn)`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetAtom {
    pub net: String,
    pub inputs: Vec<Var>,
    pub outputs: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Le(Term, Term),
    Lt(Term, Term),
    Eq(Term, Term),
    Ne(Term, Term),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    NnAtom(NetAtom),
    NegNnAtom(NetAtom),
    IsPowerOfTwo(Var),
    /// `x ∈ (y1..yn)`
    In(Var, Vec<Var>),
    /// `x = max(y1..yn)`
    IsMax(Var, Vec<Var>),
    /// `argmax(y1..yn) = K` with `K` a sorted set of 1-based indices.
    ArgmaxIs(Vec<Var>, Vec<usize>),
    /// `argmax(y1..yn) = argmax(y1'..yn')`
    ArgmaxEq(Vec<Var>, Vec<Var>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(Rational::one(), x.to_string())
    }

    pub fn scaled(a: Rational, x: &str) -> Term {
        Term::Var(a, x.to_string())
    }

    pub fn constant(c: Rational) -> Term {
        Term::Const(c)
    }

    pub fn int(c: i64) -> Term {
        Term::Const(Rational::from_int(c))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn exp(a: Term) -> Term {
        Term::Exp(Box::new(a))
    }

    /// Left-nested sum; a single element is returned as is, the empty sum is `0`.
    pub fn sum(terms: Vec<Term>) -> Term {
        let mut it = terms.into_iter();
        match it.next() {
            None => Term::int(0),
            Some(first) => it.fold(first, Term::add),
        }
    }

    /// `c·t`, pushing the factor into variables and constants.
    pub fn scale(&self, c: &Rational) -> Term {
        match self {
            Term::Var(a, x) => Term::Var(a * c, x.clone()),
            Term::Const(b) => Term::Const(b * c),
            Term::Add(a, b) => Term::add(a.scale(c), b.scale(c)),
            Term::Mul(a, b) => Term::mul(a.scale(c), (**b).clone()),
            Term::Exp(_) => Term::mul(Term::Const(c.clone()), self.clone()),
        }
    }

    pub fn neg(&self) -> Term {
        self.scale(&Rational::from_int(-1))
    }

    /// `t1 - t2` built as `t1 + (-1)·t2`.
    pub fn minus(a: Term, b: &Term) -> Term {
        Term::add(a, b.neg())
    }

    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(_, x) => {
                out.insert(x.clone());
            }
            Term::Const(_) => {}
            Term::Add(a, b) | Term::Mul(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Term::Exp(a) => a.vars(out),
        }
    }

    pub fn is_linear(&self) -> bool {
        self.linear_form().is_some()
    }

    /// Collects the term into `Σ a_x·x + b`. `None` when a product of two
    /// non-constant terms or an exponential occurs.
    pub fn linear_form(&self) -> Option<(BTreeMap<Var, Rational>, Rational)> {
        let mut coeffs = BTreeMap::new();
        let mut constant = Rational::zero();
        self.collect_linear(&Rational::one(), &mut coeffs, &mut constant)?;
        coeffs.retain(|_, v: &mut Rational| !v.is_zero());
        Some((coeffs, constant))
    }

    fn collect_linear(
        &self,
        factor: &Rational,
        coeffs: &mut BTreeMap<Var, Rational>,
        constant: &mut Rational,
    ) -> Option<()> {
        match self {
            Term::Var(a, x) => {
                let e = coeffs.entry(x.clone()).or_insert_with(Rational::zero);
                *e += a * factor;
            }
            Term::Const(b) => *constant += b * factor,
            Term::Add(a, b) => {
                a.collect_linear(factor, coeffs, constant)?;
                b.collect_linear(factor, coeffs, constant)?;
            }
            Term::Mul(a, b) => {
                let (ca, ka) = a.linear_form()?;
                let (cb, kb) = b.linear_form()?;
                if ca.is_empty() {
                    b.collect_linear(&(factor * &ka), coeffs, constant)?;
                } else if cb.is_empty() {
                    a.collect_linear(&(factor * &kb), coeffs, constant)?;
                } else {
                    return None;
                }
            }
            Term::Exp(_) => return None,
        }
        Some(())
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(a, x) => Term::Var(a.clone(), map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::Const(_) => self.clone(),
            Term::Add(a, b) => Term::add(a.rename(map), b.rename(map)),
            Term::Mul(a, b) => Term::mul(a.rename(map), b.rename(map)),
            Term::Exp(a) => Term::exp(a.rename(map)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Const(_) => 1,
            Term::Add(a, b) | Term::Mul(a, b) => 1 + a.size() + b.size(),
            Term::Exp(a) => 1 + a.size(),
        }
    }
}

impl NetAtom {
    pub fn new(net: &str, inputs: &[&str], outputs: &[&str]) -> NetAtom {
        NetAtom {
            net: net.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn from_vars(net: &str, inputs: Vec<Var>, outputs: Vec<Var>) -> NetAtom {
        NetAtom { net: net.to_string(), inputs, outputs }
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> NetAtom {
        let f = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        NetAtom {
            net: self.net.clone(),
            inputs: self.inputs.iter().map(f).collect(),
            outputs: self.outputs.iter().map(f).collect(),
        }
    }
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Le(a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Lt(a, b)
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::Ne(a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, f: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(f))
    }

    pub fn forall(x: &str, f: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(f))
    }

    /// `∃x1.∃x2.…φ`
    pub fn exists_many<S: AsRef<str>>(xs: &[S], f: Formula) -> Formula {
        xs.iter().rev().fold(f, |acc, x| Formula::exists(x.as_ref(), acc))
    }

    pub fn forall_many<S: AsRef<str>>(xs: &[S], f: Formula) -> Formula {
        xs.iter().rev().fold(f, |acc, x| Formula::forall(x.as_ref(), acc))
    }

    /// The valid formula `0 ≤ 0`.
    pub fn tt() -> Formula {
        Formula::Le(Term::int(0), Term::int(0))
    }

    /// The unsatisfiable formula `¬(0 ≤ 0)`.
    pub fn ff() -> Formula {
        Formula::not(Formula::tt())
    }

    /// Left-nested conjunction; empty input gives [`Formula::tt`].
    pub fn and_all(fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::tt(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left-nested disjunction; empty input gives [`Formula::ff`].
    pub fn or_all(fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::ff(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn nn(atom: NetAtom) -> Formula {
        Formula::NnAtom(atom)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |x: &Var, bound: &Vec<Var>| {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        };
        match self {
            Formula::Le(a, b) | Formula::Lt(a, b) | Formula::Eq(a, b) | Formula::Ne(a, b) => {
                let mut vs = BTreeSet::new();
                a.vars(&mut vs);
                b.vars(&mut vs);
                for v in &vs {
                    add(v, bound);
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::NnAtom(a) | Formula::NegNnAtom(a) => {
                for v in a.inputs.iter().chain(&a.outputs) {
                    add(v, bound);
                }
            }
            Formula::IsPowerOfTwo(x) => add(x, bound),
            Formula::In(x, ys) | Formula::IsMax(x, ys) => {
                add(x, bound);
                for y in ys {
                    add(y, bound);
                }
            }
            Formula::ArgmaxIs(ys, _) => {
                for y in ys {
                    add(y, bound);
                }
            }
            Formula::ArgmaxEq(ys, zs) => {
                for y in ys.iter().chain(zs) {
                    add(y, bound);
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = self.free_vars();
        self.visit(&mut |f| {
            if let Formula::Exists(x, _) | Formula::Forall(x, _) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        let mut qf = true;
        self.visit(&mut |f| {
            if matches!(f, Formula::Exists(..) | Formula::Forall(..)) {
                qf = false;
            }
        });
        qf
    }

    /// Network atoms (positive or negated) occurring in the formula.
    pub fn net_atoms(&self) -> Vec<NetAtom> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::NnAtom(a) | Formula::NegNnAtom(a) = f {
                out.push(a.clone());
            }
        });
        out
    }

    /// Renames free occurrences according to `map`; bound variables shadow the map.
    pub fn rename_free(&self, map: &BTreeMap<Var, Var>) -> Formula {
        use Formula::*;
        let rv = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        match self {
            Le(a, b) => Le(a.rename(map), b.rename(map)),
            Lt(a, b) => Lt(a.rename(map), b.rename(map)),
            Eq(a, b) => Eq(a.rename(map), b.rename(map)),
            Ne(a, b) => Ne(a.rename(map), b.rename(map)),
            Not(f) => Formula::not(f.rename_free(map)),
            Or(a, b) => Formula::or(a.rename_free(map), b.rename_free(map)),
            And(a, b) => Formula::and(a.rename_free(map), b.rename_free(map)),
            Implies(a, b) => Formula::implies(a.rename_free(map), b.rename_free(map)),
            Iff(a, b) => Formula::iff(a.rename_free(map), b.rename_free(map)),
            Exists(x, f) | Forall(x, f) => {
                let mut inner = map.clone();
                inner.remove(x);
                let body = Box::new(f.rename_free(&inner));
                if matches!(self, Exists(..)) { Exists(x.clone(), body) } else { Forall(x.clone(), body) }
            }
            NnAtom(a) => NnAtom(a.rename(map)),
            NegNnAtom(a) => NegNnAtom(a.rename(map)),
            IsPowerOfTwo(x) => IsPowerOfTwo(rv(x)),
            In(x, ys) => In(rv(x), ys.iter().map(rv).collect()),
            IsMax(x, ys) => IsMax(rv(x), ys.iter().map(rv).collect()),
            ArgmaxIs(ys, k) => ArgmaxIs(ys.iter().map(rv).collect(), k.clone()),
            ArgmaxEq(ys, zs) => ArgmaxEq(ys.iter().map(rv).collect(), zs.iter().map(rv).collect()),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            n += match f {
                Formula::Le(a, b) | Formula::Lt(a, b) | Formula::Eq(a, b) | Formula::Ne(a, b) => {
                    1 + a.size() + b.size()
                }
                _ => 1,
            }
        });
        n
    }
}

/// Generator of variable names guaranteed not to clash with user variables: every
/// name starts with the reserved `$` character, which the surface grammar rejects.
#[derive(Clone, Debug, Default)]
pub struct Fresh {
    counter: usize,
}

impl Fresh {
    pub fn new() -> Fresh {
        Fresh { counter: 0 }
    }

    /// Continues numbering after any `$`-names already present in `f`.
    pub fn avoiding(f: &Formula) -> Fresh {
        let mut max = 0;
        for v in f.all_vars() {
            if let Some(rest) = v.strip_prefix('$') {
                let digits: String = rest.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
                let digits: String = digits.chars().rev().collect();
                if let Ok(n) = digits.parse::<usize>() {
                    max = max.max(n + 1);
                }
            }
        }
        Fresh { counter: max }
    }

    pub fn var(&mut self, hint: &str) -> Var {
        // Trailing digits are dropped so the counter suffix stays unambiguous.
        let hint = hint.trim_start_matches('$').trim_end_matches(|c: char| c.is_ascii_digit());
        let v = format!("${hint}{}", self.counter);
        self.counter += 1;
        v
    }
}
