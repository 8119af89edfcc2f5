//! The term table, `A_term`, matrix compilation and quantifier elimination
//! over one automaton per step.

use crate::automata::{complement, intersect, is_empty, union, Buchi};
use crate::logic::{to_prenex, Formula, Prefix, Quant, Term, Var};
use crate::rational::Rational;
use crate::{Error, Result};

use super::atoms::{add, const_, eq, le, mult_const, power_of_two};
use super::{cl_proj, normalize, wf_automaton};

/// Distinct terms of a matrix; the first `m` entries are the prefix variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermTable {
    terms: Vec<Term>,
    m: usize,
}

impl TermTable {
    pub fn new(vars: &[Var], matrix: &Formula) -> Result<TermTable> {
        let mut t = TermTable { terms: vars.iter().map(|x| Term::var(x)).collect(), m: vars.len() };
        t.scan(matrix)?;
        Ok(t)
    }

    fn scan(&mut self, f: &Formula) -> Result<()> {
        use Formula::*;
        match f {
            Le(a, b) | Lt(a, b) | Eq(a, b) | Ne(a, b) => {
                self.insert(a)?;
                self.insert(b)?;
            }
            Not(g) => self.scan(g)?,
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                self.scan(a)?;
                self.scan(b)?;
            }
            IsPowerOfTwo(x) => {
                self.insert(&Term::var(x))?;
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "matrix must be quantifier-free linear arithmetic, found {}",
                    other
                )))
            }
        }
        Ok(())
    }

    fn insert(&mut self, t: &Term) -> Result<usize> {
        match t {
            Term::Var(a, x) if a.is_one() => {
                return self
                    .terms
                    .iter()
                    .position(|s| s == t)
                    .ok_or_else(|| Error::Unbound(format!("variable {x} is not bound by the prefix")));
            }
            Term::Add(l, r) => {
                self.insert(l)?;
                self.insert(r)?;
            }
            Term::Var(_, x) => {
                self.insert(&Term::var(x))?;
            }
            Term::Const(_) => {}
            Term::Mul(..) | Term::Exp(_) => {
                return Err(Error::Unsupported("products and exponentials are not linear".into()))
            }
        }
        Ok(match self.terms.iter().position(|s| s == t) {
            Some(i) => i,
            None => {
                self.terms.push(t.clone());
                self.terms.len() - 1
            }
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn index(&self, t: &Term) -> Result<usize> {
        self.terms
            .iter()
            .position(|s| s == t)
            .ok_or_else(|| Error::Invalid(format!("term {} is not in the table", t)))
    }
}

trait IsOne {
    fn is_one(&self) -> bool;
}

impl IsOne for Rational {
    fn is_one(&self) -> bool {
        *self == Rational::one()
    }
}

/// `A_term`: the intersection, over the composite terms, of the automaton
/// tying each term's track to the value computed from its parts.
pub fn build_term_automaton(table: &TermTable) -> Result<Buchi> {
    let n = table.len();
    let mut acc = wf_automaton(n);
    for i in table.m..n {
        let b = match &table.terms[i] {
            Term::Var(a, x) => mult_const(n, i, a, table.index(&Term::var(x))?)?,
            Term::Const(c) => const_(n, i, c)?,
            Term::Add(l, r) => add(n, i, table.index(l)?, table.index(r)?)?,
            _ => unreachable!("rejected while building the table"),
        };
        acc = normalize(&intersect(&acc, &b)?);
    }
    Ok(acc)
}

/// `B_Φ` over the table's tracks. Correct on words of `A_term`.
pub fn compile_matrix(matrix: &Formula, table: &TermTable) -> Result<Buchi> {
    use Formula::*;
    let n = table.len();
    let idx = |t: &Term| table.index(t);
    let a = match matrix {
        Le(x, y) => le(n, idx(x)?, idx(y)?)?,
        Lt(x, y) => {
            let (i, j) = (idx(x)?, idx(y)?);
            intersect(&le(n, i, j)?, &complement(&eq(n, i, j)?)?)?
        }
        Eq(x, y) => eq(n, idx(x)?, idx(y)?)?,
        Ne(x, y) => complement(&eq(n, idx(x)?, idx(y)?)?)?,
        IsPowerOfTwo(x) => power_of_two(n, idx(&Term::var(x))?)?,
        Not(f) => complement(&compile_matrix(f, table)?)?,
        And(f, g) => intersect(&compile_matrix(f, table)?, &compile_matrix(g, table)?)?,
        Or(f, g) => union(&compile_matrix(f, table)?, &compile_matrix(g, table)?)?,
        Implies(f, g) => union(&complement(&compile_matrix(f, table)?)?, &compile_matrix(g, table)?)?,
        Iff(f, g) => {
            let (a, b) = (compile_matrix(f, table)?, compile_matrix(g, table)?);
            let both = intersect(&a, &b)?;
            let neither = intersect(&complement(&a)?, &complement(&b)?)?;
            union(&both, &neither)?
        }
        other => {
            return Err(Error::Unsupported(format!(
                "cannot compile {}",
                other
            )))
        }
    };
    Ok(normalize(&a))
}

/// `A_Φ = cl(proj(B_Φ ∩ A_term, m))` over the prefix variables.
pub fn matrix_automaton(matrix: &Formula, table: &TermTable) -> Result<Buchi> {
    let term = build_term_automaton(table)?;
    let b = compile_matrix(matrix, table)?;
    cl_proj(&intersect(&b, &term)?, table.m)
}

/// Removes the prefix innermost first: `∃` is `cl∘proj`, `¬∃` additionally
/// complements and intersects with the well-formed words.
pub fn eliminate_quantifiers(prefix: &Prefix, a_phi: &Buchi) -> Result<Buchi> {
    if a_phi.arity() != prefix.len() {
        return Err(Error::Arity { expected: prefix.len(), found: a_phi.arity() });
    }
    let mut a = a_phi.clone();
    for i in (0..prefix.len()).rev() {
        let p = cl_proj(&a, i)?;
        a = match prefix[i].0 {
            Quant::Exists => p,
            Quant::NegExists => normalize(&intersect(&complement(&p)?, &wf_automaton(i))?),
        };
    }
    Ok(a)
}

/// Decides a sentence by the one-automaton-per-step pipeline: prenex form,
/// term table, `A_term`, `B_Φ`, `A_Φ`, then quantifier elimination.
pub fn decide_sentence_literal(phi: &Formula) -> Result<bool> {
    if !phi.is_sentence() {
        return Err(Error::Invalid("free variables in a sentence".into()));
    }
    let (prefix, matrix) = to_prenex(phi);
    let vars: Vec<Var> = prefix.iter().map(|(_, x)| x.clone()).collect();
    let table = TermTable::new(&vars, &matrix)?;
    let a_phi = matrix_automaton(&matrix, &table)?;
    Ok(is_empty(&eliminate_quantifiers(&prefix, &a_phi)?).is_some())
}
