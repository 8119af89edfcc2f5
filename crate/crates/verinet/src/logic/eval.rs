//! Quantifier-free evaluation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Formula, Interpretation, NetAtom, NetworkBinding, Term, Var};
use crate::error::{Error, Result};
use crate::linalg::argmax_set;
use crate::rational::Rational;

fn lookup<'a>(i: &'a Interpretation, x: &Var) -> Result<&'a Rational> {
    i.get(x).ok_or_else(|| Error::Unbound(format!("variable {x}")))
}

/// Exact value of a term. Exponentials have no exact value and are rejected.
pub fn eval_term(t: &Term, i: &Interpretation) -> Result<Rational> {
    Ok(match t {
        Term::Var(a, x) => a * lookup(i, x)?,
        Term::Const(b) => b.clone(),
        Term::Add(a, b) => eval_term(a, i)? + eval_term(b, i)?,
        Term::Mul(a, b) => eval_term(a, i)? * eval_term(b, i)?,
        Term::Exp(a) => {
            let v = eval_term(a, i)?;
            if v.is_zero() {
                Rational::one()
            } else {
                return Err(Error::ExactMode("e^t is irrational for rational t ≠ 0".into()));
            }
        }
    })
}

/// Floating-point value of a term, including exponentials.
pub fn eval_term_f64(t: &Term, i: &BTreeMap<Var, f64>) -> Result<f64> {
    Ok(match t {
        Term::Var(a, x) => a.to_f64() * i.get(x).ok_or_else(|| Error::Unbound(format!("variable {x}")))?,
        Term::Const(b) => b.to_f64(),
        Term::Add(a, b) => eval_term_f64(a, i)? + eval_term_f64(b, i)?,
        Term::Mul(a, b) => eval_term_f64(a, i)? * eval_term_f64(b, i)?,
        Term::Exp(a) => eval_term_f64(a, i)?.exp(),
    })
}

fn vals(i: &Interpretation, xs: &[Var]) -> Result<Vec<Rational>> {
    xs.iter().map(|x| lookup(i, x).cloned()).collect()
}

fn net_holds(a: &NetAtom, i: &Interpretation, nets: &NetworkBinding) -> Result<bool> {
    let net = nets.get(&a.net).ok_or_else(|| Error::Unbound(format!("network {}", a.net)))?;
    if net.in_dim() != a.inputs.len() || net.out_dim() != a.outputs.len() {
        return Err(Error::Arity { expected: net.in_dim() + net.out_dim(), found: a.inputs.len() + a.outputs.len() });
    }
    let out = net.eval(&vals(i, &a.inputs)?)?;
    // Repeated output variables are read as a conjunction of component equalities.
    Ok(out.iter().zip(&a.outputs).all(|(v, y)| i.get(y) == Some(v)))
}

/// Whether `x = 2^n` for some natural number `n`.
pub fn is_power_of_two(x: &Rational) -> bool {
    if !x.is_integer() || !x.is_positive() {
        return false;
    }
    let n: &BigInt = x.numer();
    (n & (n - BigInt::one())).is_zero()
}

/// Truth of a quantifier-free formula under `i`. Sugar nodes are evaluated by their meaning.
pub fn holds(phi: &Formula, i: &Interpretation, nets: &NetworkBinding) -> Result<bool> {
    use Formula::*;
    Ok(match phi {
        Le(a, b) => eval_term(a, i)? <= eval_term(b, i)?,
        Lt(a, b) => eval_term(a, i)? < eval_term(b, i)?,
        Eq(a, b) => eval_term(a, i)? == eval_term(b, i)?,
        Ne(a, b) => eval_term(a, i)? != eval_term(b, i)?,
        Not(f) => !holds(f, i, nets)?,
        Or(a, b) => holds(a, i, nets)? || holds(b, i, nets)?,
        And(a, b) => holds(a, i, nets)? && holds(b, i, nets)?,
        Implies(a, b) => !holds(a, i, nets)? || holds(b, i, nets)?,
        Iff(a, b) => holds(a, i, nets)? == holds(b, i, nets)?,
        Exists(..) | Forall(..) => {
            return Err(Error::Invalid(format!("quantifier in a quantifier-free position: `{phi}`")))
        }
        NnAtom(a) => net_holds(a, i, nets)?,
        NegNnAtom(a) => !net_holds(a, i, nets)?,
        IsPowerOfTwo(x) => is_power_of_two(lookup(i, x)?),
        In(x, ys) => {
            let v = lookup(i, x)?;
            vals(i, ys)?.iter().any(|y| y == v)
        }
        IsMax(x, ys) => {
            let v = lookup(i, x)?;
            let ys = vals(i, ys)?;
            ys.iter().any(|y| y == v) && ys.iter().all(|y| y <= v)
        }
        ArgmaxIs(ys, k) => argmax_set(&vals(i, ys)?)? == *k,
        ArgmaxEq(ys, zs) => argmax_set(&vals(i, ys)?)? == argmax_set(&vals(i, zs)?)?,
    })
}

/// Builds an interpretation from `(name, value)` pairs.
pub fn interp<S: AsRef<str>>(pairs: &[(S, Rational)]) -> Interpretation {
    pairs.iter().map(|(k, v)| (k.as_ref().to_string(), v.clone())).collect()
}
