//! Surface syntax printer. `parse(print(f))` reproduces `f` exactly.

use std::fmt;

use super::{Formula, NetAtom, Term};

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => 0,
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        _ => 5,
    }
}

fn sub(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) < min {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

fn list(vs: &[String]) -> String {
    vs.join(", ")
}

impl fmt::Display for NetAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) = ({})", self.net, list(&self.inputs), list(&self.outputs))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(a, x) => {
                if a.is_integer() && a.numer() == &1.into() {
                    write!(f, "{x}")
                } else {
                    write!(f, "{a}*{x}")
                }
            }
            Term::Const(c) => write!(f, "{c}"),
            Term::Add(a, b) => {
                write!(f, "{a} + ")?;
                if matches!(**b, Term::Add(..)) { write!(f, "({b})") } else { write!(f, "{b}") }
            }
            Term::Mul(a, b) => write!(f, "({a}) * ({b})"),
            Term::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Le(a, b) => write!(f, "{a} <= {b}"),
            Formula::Lt(a, b) => write!(f, "{a} < {b}"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Ne(a, b) => write!(f, "{a} != {b}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                sub(g, 5, f)
            }
            Formula::Iff(a, b) => {
                sub(a, 1, f)?;
                write!(f, " <=> ")?;
                sub(b, 2, f)
            }
            Formula::Implies(a, b) => {
                sub(a, 3, f)?;
                write!(f, " => ")?;
                sub(b, 2, f)
            }
            Formula::Or(a, b) => {
                sub(a, 3, f)?;
                write!(f, " || ")?;
                sub(b, 4, f)
            }
            Formula::And(a, b) => {
                sub(a, 4, f)?;
                write!(f, " && ")?;
                sub(b, 5, f)
            }
            Formula::Exists(x, g) => write!(f, "exists {x}. {g}"),
            Formula::Forall(x, g) => write!(f, "forall {x}. {g}"),
            Formula::NnAtom(a) => write!(f, "{a}"),
            Formula::NegNnAtom(a) => {
                write!(f, "{}({}) != ({})", a.net, list(&a.inputs), list(&a.outputs))
            }
            Formula::IsPowerOfTwo(x) => write!(f, "ispow2({x})"),
            Formula::In(x, ys) => write!(f, "{x} in ({})", list(ys)),
            Formula::IsMax(x, ys) => write!(f, "{x} = max({})", list(ys)),
            Formula::ArgmaxIs(ys, k) => {
                let ks: Vec<String> = k.iter().map(|i| i.to_string()).collect();
                write!(f, "argmax({}) = {{{}}}", list(ys), ks.join(", "))
            }
            Formula::ArgmaxEq(ys, zs) => write!(f, "argmax({}) = argmax({})", list(ys), list(zs)),
        }
    }
}

/// Printed form of a formula.
pub fn print(f: &Formula) -> String {
    f.to_string()
}
