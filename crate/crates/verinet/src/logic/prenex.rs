//! Negation normal form and prenex form with `∃`/`¬∃` prefixes.

use std::collections::{BTreeMap, BTreeSet};

use super::abbrev::{expand, Keep};
use super::{Formula, Fresh, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    NegExists,
}

pub type Prefix = Vec<(Quant, Var)>;

/// Pushes negations onto atoms. Input may contain any connective; sugar is expanded first
/// with `∧`, `<` and `∀` kept. Negated comparisons flip into the dual comparison.
pub fn nnf(phi: &Formula) -> Formula {
    nnf_pos(&expand(phi, Keep::NORMAL))
}

fn nnf_pos(phi: &Formula) -> Formula {
    use Formula::*;
    match phi {
        Not(f) => nnf_neg(f),
        Or(a, b) => Formula::or(nnf_pos(a), nnf_pos(b)),
        And(a, b) => Formula::and(nnf_pos(a), nnf_pos(b)),
        Exists(x, f) => Formula::exists(x, nnf_pos(f)),
        Forall(x, f) => Formula::forall(x, nnf_pos(f)),
        other => other.clone(),
    }
}

fn nnf_neg(phi: &Formula) -> Formula {
    use Formula::*;
    match phi {
        Not(f) => nnf_pos(f),
        Or(a, b) => Formula::and(nnf_neg(a), nnf_neg(b)),
        And(a, b) => Formula::or(nnf_neg(a), nnf_neg(b)),
        Exists(x, f) => Formula::forall(x, nnf_neg(f)),
        Forall(x, f) => Formula::exists(x, nnf_neg(f)),
        Le(a, b) => Lt(b.clone(), a.clone()),
        Lt(a, b) => Le(b.clone(), a.clone()),
        NnAtom(a) => NegNnAtom(a.clone()),
        NegNnAtom(a) => NnAtom(a.clone()),
        other => Formula::not(other.clone()),
    }
}

/// Renames bound variables so that every binder is unique and differs from all free
/// variables. Binders that do not clash keep their names.
pub fn rename_apart(phi: &Formula) -> Formula {
    let mut used: BTreeSet<Var> = phi.free_vars();
    let mut fresh = Fresh::avoiding(phi);
    go(phi, &BTreeMap::new(), &mut used, &mut fresh)
}

fn go(phi: &Formula, map: &BTreeMap<Var, Var>, used: &mut BTreeSet<Var>, fresh: &mut Fresh) -> Formula {
    use Formula::*;
    match phi {
        Exists(x, f) | Forall(x, f) => {
            let name = if used.contains(x) { fresh.var(x.trim_start_matches('$')) } else { x.clone() };
            used.insert(name.clone());
            let mut inner = map.clone();
            inner.insert(x.clone(), name.clone());
            let body = go(f, &inner, used, fresh);
            if matches!(phi, Exists(..)) { Formula::exists(&name, body) } else { Formula::forall(&name, body) }
        }
        Not(f) => Formula::not(go(f, map, used, fresh)),
        Or(a, b) => Formula::or(go(a, map, used, fresh), go(b, map, used, fresh)),
        And(a, b) => Formula::and(go(a, map, used, fresh), go(b, map, used, fresh)),
        Implies(a, b) => Formula::implies(go(a, map, used, fresh), go(b, map, used, fresh)),
        Iff(a, b) => Formula::iff(go(a, map, used, fresh), go(b, map, used, fresh)),
        atom => atom.rename_free(map),
    }
}

/// Moves quantifiers of an NNF formula with unique binders to the front.
fn pull(phi: &Formula, prefix: &mut Vec<(bool, Var)>) -> Formula {
    use Formula::*;
    match phi {
        Exists(x, f) => {
            prefix.push((false, x.clone()));
            pull(f, prefix)
        }
        Forall(x, f) => {
            prefix.push((true, x.clone()));
            pull(f, prefix)
        }
        Or(a, b) => {
            let a = pull(a, prefix);
            let b = pull(b, prefix);
            Formula::or(a, b)
        }
        And(a, b) => {
            let a = pull(a, prefix);
            let b = pull(b, prefix);
            Formula::and(a, b)
        }
        other => other.clone(),
    }
}

/// Prenex form `θ1 x1 … θm xm. Φ` with `θi ∈ {∃, ¬∃}`, pairwise distinct `xi` and a
/// quantifier-free matrix in negation normal form.
pub fn to_prenex(phi: &Formula) -> (Prefix, Formula) {
    let normal = rename_apart(&nnf(phi));
    let mut raw = Vec::new();
    let matrix = pull(&normal, &mut raw);
    // `negated` records whether the remaining formula must be read under a negation.
    let mut negated = false;
    let mut prefix = Vec::with_capacity(raw.len());
    for (universal, x) in raw {
        let q = match (negated, universal) {
            (false, false) => Quant::Exists,
            (false, true) => {
                negated = true;
                Quant::NegExists
            }
            (true, false) => {
                negated = false;
                Quant::NegExists
            }
            (true, true) => Quant::Exists,
        };
        prefix.push((q, x));
    }
    let matrix = if negated { nnf_neg(&matrix) } else { matrix };
    (prefix, matrix)
}

/// Rebuilds a formula from a prefix and matrix.
pub fn from_prenex(prefix: &Prefix, matrix: &Formula) -> Formula {
    prefix.iter().rev().fold(matrix.clone(), |acc, (q, x)| match q {
        Quant::Exists => Formula::exists(x, acc),
        Quant::NegExists => Formula::not(Formula::exists(x, acc)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;

    #[test]
    fn mixed_quantifier_prefix() {
        let f = parse_formula("!(exists x1. exists x2. x1 <= x2)").unwrap();
        let (p, _) = to_prenex(&f);
        assert_eq!(p, vec![(Quant::NegExists, "x1".to_string()), (Quant::Exists, "x2".to_string())]);
    }

    #[test]
    fn already_prenex_is_kept() {
        let f = parse_formula("exists a. !(exists b. a <= b)").unwrap();
        let (p, m) = to_prenex(&f);
        assert_eq!(p, vec![(Quant::Exists, "a".to_string()), (Quant::NegExists, "b".to_string())]);
        assert_eq!(m, parse_formula("a <= b").unwrap());
    }

    #[test]
    fn clashing_binders_are_renamed() {
        let f = parse_formula("(exists x. x <= 0) && (exists x. 1 <= x)").unwrap();
        let (p, m) = to_prenex(&f);
        assert_eq!(p.len(), 2);
        assert_ne!(p[0].1, p[1].1);
        assert!(m.is_quantifier_free());
    }
}
