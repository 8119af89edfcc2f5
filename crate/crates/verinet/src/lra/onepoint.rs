//! Removal of existential variables that an equation defines:
//! `∃z.(z = t ∧ φ)` becomes `φ[t/z]`. A disjunction is split first when every
//! branch defines `z`, which is the shape of the ReLU case split. This is an
//! equivalence-preserving rewrite; the automata still decide what remains.

use std::collections::BTreeMap;

use crate::logic::abbrev::{expand, Keep};
use crate::logic::prenex::rename_apart;
use crate::logic::{Formula, Term, Var};
use crate::rational::Rational;

/// Disjunct count above which a defining disjunction is not split.
const SPLIT_LIMIT: usize = 1 << 12;

/// Bound on disjuncts times body size for splitting a disjunction that does
/// not define the variable.
const GROWTH_LIMIT: usize = 1 << 20;

pub fn eliminate_defined(phi: &Formula) -> Formula {
    simplify(&rename_apart(phi))
}

enum Lin {
    Const(bool),
    Atom(Formula),
}

type Form = (BTreeMap<Var, Rational>, Rational);

fn linear(a: &Term, b: &Term) -> Option<Form> {
    Term::minus(a.clone(), b).linear_form()
}

fn term_of(form: &BTreeMap<Var, Rational>) -> Term {
    Term::sum(form.iter().map(|(x, c)| Term::Var(c.clone(), x.clone())).collect())
}

/// `Σ c·x ⋈ −k` from `Σ c·x + k ⋈ 0`, folding constant atoms.
fn rebuild(f: &Formula, (coeffs, k): Form) -> Lin {
    let zero = Rational::zero();
    if coeffs.is_empty() {
        return Lin::Const(match f {
            Formula::Le(..) => k <= zero,
            Formula::Lt(..) => k < zero,
            Formula::Eq(..) => k == zero,
            Formula::Ne(..) => k != zero,
            _ => unreachable!(),
        });
    }
    let (lhs, rhs) = (term_of(&coeffs), Term::Const(-k));
    Lin::Atom(match f {
        Formula::Le(..) => Formula::Le(lhs, rhs),
        Formula::Lt(..) => Formula::Lt(lhs, rhs),
        Formula::Eq(..) => Formula::Eq(lhs, rhs),
        Formula::Ne(..) => Formula::Ne(lhs, rhs),
        _ => unreachable!(),
    })
}

fn lin_to_formula(l: Lin) -> Formula {
    match l {
        Lin::Const(true) => Formula::tt(),
        Lin::Const(false) => Formula::ff(),
        Lin::Atom(a) => a,
    }
}

fn is_tt(f: &Formula) -> bool {
    *f == Formula::tt()
}

fn is_ff(f: &Formula) -> bool {
    *f == Formula::ff()
}

fn and(a: Formula, b: Formula) -> Formula {
    if is_ff(&a) || is_ff(&b) {
        Formula::ff()
    } else if is_tt(&a) {
        b
    } else if is_tt(&b) {
        a
    } else {
        Formula::and(a, b)
    }
}

fn or(a: Formula, b: Formula) -> Formula {
    if is_tt(&a) || is_tt(&b) {
        Formula::tt()
    } else if is_ff(&a) {
        b
    } else if is_ff(&b) {
        a
    } else {
        Formula::or(a, b)
    }
}

fn and_all(fs: Vec<Formula>) -> Formula {
    fs.into_iter().fold(Formula::tt(), and)
}

fn or_all(fs: Vec<Formula>) -> Formula {
    fs.into_iter().fold(Formula::ff(), or)
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other.clone()),
    }
}

fn disjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Or(a, b) => {
            disjuncts(a, out);
            disjuncts(b, out);
        }
        other => out.push(other.clone()),
    }
}

/// `t` with `z = t` implied by the atom, if it is an equation in `z`.
fn definition(atom: &Formula, z: &str) -> Option<Form> {
    let Formula::Eq(a, b) = atom else { return None };
    let (mut coeffs, k) = linear(a, b)?;
    let c = coeffs.remove(z)?;
    // c·z + rest + k = 0  ⇒  z = −(rest + k)/c
    let scale = -(Rational::one() / c);
    Some((coeffs.into_iter().map(|(x, v)| (x, v * &scale)).collect(), k * scale))
}

fn subst_term(t: &Term, z: &str, def: &Form) -> Term {
    match t {
        Term::Var(c, x) if x == z => Term::add(term_of(&def.0).scale(c), Term::Const(&def.1 * c)),
        Term::Var(..) | Term::Const(_) => t.clone(),
        Term::Add(a, b) => Term::add(subst_term(a, z, def), subst_term(b, z, def)),
        Term::Mul(a, b) => Term::mul(subst_term(a, z, def), subst_term(b, z, def)),
        Term::Exp(a) => Term::exp(subst_term(a, z, def)),
    }
}

fn subst(f: &Formula, z: &str, def: &Form) -> Formula {
    use Formula::*;
    match f {
        Le(a, b) | Lt(a, b) | Eq(a, b) | Ne(a, b) => {
            let (a, b) = (subst_term(a, z, def), subst_term(b, z, def));
            match linear(&a, &b) {
                Some(form) => lin_to_formula(rebuild(f, form)),
                None => match f {
                    Le(..) => Le(a, b),
                    Lt(..) => Lt(a, b),
                    Eq(..) => Eq(a, b),
                    _ => Ne(a, b),
                },
            }
        }
        Not(g) => Formula::not(subst(g, z, def)),
        And(a, b) => and(subst(a, z, def), subst(b, z, def)),
        Or(a, b) => or(subst(a, z, def), subst(b, z, def)),
        Implies(a, b) => Formula::implies(subst(a, z, def), subst(b, z, def)),
        Iff(a, b) => Formula::iff(subst(a, z, def), subst(b, z, def)),
        Exists(x, g) if x != z => Formula::exists(x, subst(g, z, def)),
        Forall(x, g) if x != z => Formula::forall(x, subst(g, z, def)),
        other => other.clone(),
    }
}

fn simplify(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Not(g) => {
            let g = simplify(g);
            if is_tt(&g) {
                Formula::ff()
            } else if is_ff(&g) {
                Formula::tt()
            } else {
                Formula::not(g)
            }
        }
        And(a, b) => and(simplify(a), simplify(b)),
        Or(a, b) => or(simplify(a), simplify(b)),
        Implies(a, b) => Formula::implies(simplify(a), simplify(b)),
        Iff(a, b) => Formula::iff(simplify(a), simplify(b)),
        Exists(z, g) => exists(z, simplify(g)),
        Forall(z, g) => Formula::forall(z, simplify(g)),
        Le(a, b) | Lt(a, b) | Eq(a, b) | Ne(a, b) => match linear(a, b) {
            Some(form) => lin_to_formula(rebuild(f, form)),
            None => f.clone(),
        },
        In(..) | IsMax(..) | ArgmaxIs(..) | ArgmaxEq(..) => simplify(&expand(f, Keep::NORMAL)),
        other => other.clone(),
    }
}

/// `∃z. body` for a simplified body.
fn exists(z: &str, body: Formula) -> Formula {
    if !body.free_vars().contains(z) {
        return body;
    }
    let mut ds = Vec::new();
    disjuncts(&body, &mut ds);
    if ds.len() > 1 {
        return or_all(ds.into_iter().map(|d| exists(z, d)).collect());
    }
    let mut cs = Vec::new();
    conjuncts(&body, &mut cs);
    if let Some((i, def)) = cs.iter().enumerate().find_map(|(i, c)| definition(c, z).map(|d| (i, d))) {
        cs.remove(i);
        return simplify(&and_all(cs.iter().map(|c| subst(c, z, &def)).collect()));
    }
    // A disjunction whose branches all define `z`: split it.
    let split = cs.iter().position(|c| {
        let mut branches = Vec::new();
        disjuncts(c, &mut branches);
        branches.len() > 1
            && branches.len() <= SPLIT_LIMIT
            && branches.iter().all(|b| {
                let mut parts = Vec::new();
                conjuncts(b, &mut parts);
                parts.iter().any(|p| definition(p, z).is_some())
            })
    });
    if let Some(i) = split {
        let d = cs.remove(i);
        let mut branches = Vec::new();
        disjuncts(&d, &mut branches);
        let rest = and_all(cs);
        return or_all(branches.into_iter().map(|b| exists(z, and(rest.clone(), b))).collect());
    }
    // Otherwise any disjunction mentioning `z`, while the result stays small.
    let size = body.size();
    let split = cs.iter().position(|c| {
        let mut branches = Vec::new();
        disjuncts(c, &mut branches);
        branches.len() > 1 && c.free_vars().contains(z) && branches.len() * size <= GROWTH_LIMIT
    });
    if let Some(i) = split {
        let d = cs.remove(i);
        let mut branches = Vec::new();
        disjuncts(&d, &mut branches);
        let rest = and_all(cs);
        return or_all(branches.into_iter().map(|b| exists(z, and(rest.clone(), b))).collect());
    }
    Formula::exists(z, body)
}
