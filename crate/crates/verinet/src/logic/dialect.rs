//! Dialect validators.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{Formula, Term};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    Lra,
    Nnl,
    NnlPlus,
    ExistsLra,
    ExistsNnl,
    Reach,
    Ref,
}

impl FromStr for Dialect {
    type Err = Error;
    fn from_str(s: &str) -> Result<Dialect> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lra" => Dialect::Lra,
            "nnl" => Dialect::Nnl,
            "nnl+" | "nnlplus" | "nnl-plus" => Dialect::NnlPlus,
            "elra" | "exists-lra" | "existslra" => Dialect::ExistsLra,
            "ennl" | "exists-nnl" | "existsnnl" => Dialect::ExistsNnl,
            "reach" => Dialect::Reach,
            "ref" => Dialect::Ref,
            other => return Err(Error::Invalid(format!("unknown dialect {other:?}"))),
        })
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dialect::Lra => "lra",
            Dialect::Nnl => "nnl",
            Dialect::NnlPlus => "nnl+",
            Dialect::ExistsLra => "exists-lra",
            Dialect::ExistsNnl => "exists-nnl",
            Dialect::Reach => "reach",
            Dialect::Ref => "ref",
        };
        f.write_str(s)
    }
}

fn violation<T>(dialect: Dialect, node: &Formula, why: &str) -> Result<T> {
    Err(Error::Dialect(format!("{why} not allowed in {dialect}: `{node}`")))
}

fn linear_terms(f: &Formula) -> bool {
    match f {
        Formula::Le(a, b) | Formula::Lt(a, b) | Formula::Eq(a, b) | Formula::Ne(a, b) => {
            no_ref_terms(a) && no_ref_terms(b)
        }
        _ => true,
    }
}

fn no_ref_terms(t: &Term) -> bool {
    match t {
        Term::Var(..) | Term::Const(_) => true,
        Term::Add(a, b) => no_ref_terms(a) && no_ref_terms(b),
        Term::Mul(..) | Term::Exp(_) => false,
    }
}

/// Checks that `f` belongs to the given dialect. Abbreviations of the dialect are accepted.
pub fn validate(f: &Formula, dialect: Dialect) -> Result<()> {
    if dialect == Dialect::Reach {
        return validate_reach(f);
    }
    let existential = matches!(dialect, Dialect::ExistsLra | Dialect::ExistsNnl);
    let nets = matches!(dialect, Dialect::Nnl | Dialect::NnlPlus | Dialect::ExistsNnl);
    let mut result = Ok(());
    let mut check = |node: &Formula| {
        if result.is_err() {
            return;
        }
        let r = match node {
            n if dialect != Dialect::Ref && !linear_terms(n) => {
                violation(dialect, n, "products and exponentials are")
            }
            Formula::NnAtom(_) | Formula::NegNnAtom(_) if !nets => {
                violation(dialect, node, "network atoms are")
            }
            Formula::IsPowerOfTwo(_) if dialect != Dialect::NnlPlus => {
                violation(dialect, node, "ispow2 is")
            }
            Formula::Not(inner) if existential => match **inner {
                Formula::NnAtom(_) if dialect == Dialect::ExistsNnl => Ok(()),
                _ => violation(dialect, node, "negation outside network atoms is"),
            },
            Formula::Forall(..) | Formula::Implies(..) | Formula::Iff(..) if existential => {
                violation(dialect, node, "universal quantification and implications are")
            }
            Formula::ArgmaxIs(..) | Formula::ArgmaxEq(..) | Formula::IsMax(..) if existential => {
                violation(dialect, node, "argmax and max abbreviations are")
            }
            _ => Ok(()),
        };
        result = r;
    };
    f.visit(&mut check);
    result
}

/// Flattens nested conjunctions.
pub fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        other => vec![other],
    }
}

fn validate_reach(f: &Formula) -> Result<()> {
    let parts = conjuncts(f);
    let atoms: Vec<_> = parts.iter().filter(|p| matches!(p, Formula::NnAtom(_))).collect();
    if atoms.len() != 1 {
        return Err(Error::Dialect(format!(
            "a reachability formula has exactly one network atom, found {}",
            atoms.len()
        )));
    }
    let Formula::NnAtom(atom) = atoms[0] else { unreachable!() };
    let inputs: BTreeSet<_> = atom.inputs.iter().cloned().collect();
    let outputs: BTreeSet<_> = atom.outputs.iter().cloned().collect();
    for p in parts {
        match p {
            Formula::NnAtom(_) => {}
            Formula::Le(a, b) | Formula::Eq(a, b) => {
                if !no_ref_terms(a) || !no_ref_terms(b) {
                    return violation(Dialect::Reach, p, "non-linear terms are");
                }
                let mut vs = BTreeSet::new();
                a.vars(&mut vs);
                b.vars(&mut vs);
                if !(vs.is_subset(&inputs) || vs.is_subset(&outputs)) {
                    return violation(Dialect::Reach, p, "constraints mixing inputs and outputs are");
                }
            }
            other => return violation(Dialect::Reach, other, "this connective is"),
        }
    }
    Ok(())
}
