//! Ready-made specification sentences.
//!
//! Variables follow a fixed naming scheme: inputs `x1..xm`, a second input copy
//! `x1'..xm'`, outputs `y1..yn`, a second output copy `y1'..yn'` and distance witnesses
//! `z1..zm`. A region formula must be stated over `x1..xm`; it is renamed for the primed
//! copy where the sentence needs it.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::{Formula, NetAtom, Term, Var};
use crate::error::{Error, Result};
use crate::linalg::Permutation;
use crate::rational::Rational;

/// Largest `m` for which specifications enumerating all permutations are built.
pub const MAX_PERMUTATION_ARITY: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecKind {
    Max,
    Sorted,
    PermInvariant,
    PermEquivariant,
    Fairness,
    Robustness,
    Equivalence,
    Injective,
    Surjective,
    Xor,
}

impl SpecKind {
    pub const ALL: [SpecKind; 10] = [
        SpecKind::Max,
        SpecKind::Sorted,
        SpecKind::PermInvariant,
        SpecKind::PermEquivariant,
        SpecKind::Fairness,
        SpecKind::Robustness,
        SpecKind::Equivalence,
        SpecKind::Injective,
        SpecKind::Surjective,
        SpecKind::Xor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecKind::Max => "max",
            SpecKind::Sorted => "sorted",
            SpecKind::PermInvariant => "perm_invariant",
            SpecKind::PermEquivariant => "perm_equivariant",
            SpecKind::Fairness => "fairness",
            SpecKind::Robustness => "robustness",
            SpecKind::Equivalence => "equivalence",
            SpecKind::Injective => "injective",
            SpecKind::Surjective => "surjective",
            SpecKind::Xor => "xor",
        }
    }
}

impl FromStr for SpecKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<SpecKind> {
        SpecKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown specification `{s}`")))
    }
}

/// Parameters of a specification. Unused fields are ignored.
#[derive(Clone, Debug)]
pub struct SpecParams {
    pub net: String,
    /// Second network, used by `equivalence`.
    pub net2: String,
    pub m: usize,
    pub n: usize,
    /// Protected input positions (1-based) for `fairness`.
    pub k: Vec<usize>,
    pub eps: Option<Rational>,
    pub region: Option<Formula>,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams {
            net: "N".into(),
            net2: "N2".into(),
            m: 2,
            n: 1,
            k: Vec::new(),
            eps: None,
            region: None,
        }
    }
}

impl SpecParams {
    pub fn new(m: usize, n: usize) -> Self {
        SpecParams { m, n, ..Default::default() }
    }
}

fn names(base: &str, count: usize, suffix: &str) -> Vec<Var> {
    (1..=count).map(|i| format!("{base}{i}{suffix}")).collect()
}

fn var_eq(a: &str, b: &str) -> Formula {
    Formula::eq(Term::var(a), Term::var(b))
}

fn permutations(m: usize) -> Result<Vec<Permutation>> {
    if m > MAX_PERMUTATION_ARITY {
        return Err(Error::Capacity(format!(
            "enumerating permutations of {m} inputs (limit {MAX_PERMUTATION_ARITY})"
        )));
    }
    Ok(Permutation::all(m))
}

fn permute(pi: &Permutation, xs: &[Var]) -> Vec<Var> {
    crate::linalg::apply_permutation(pi, xs).expect("permutation sized to its input")
}

fn region(params: &SpecParams, primed: bool) -> Formula {
    let phi = params.region.clone().unwrap_or_else(Formula::tt);
    if !primed {
        return phi;
    }
    let map: BTreeMap<Var, Var> =
        (1..=params.m).map(|i| (format!("x{i}"), format!("x{i}'"))).collect();
    phi.rename_free(&map)
}

fn has_region(params: &SpecParams) -> bool {
    params.region.is_some()
}

/// Builds the named specification sentence.
pub fn build_spec(name: &str, params: &SpecParams) -> Result<Formula> {
    build(name.parse()?, params)
}

pub fn build(kind: SpecKind, p: &SpecParams) -> Result<Formula> {
    if p.m == 0 {
        return Err(Error::Invalid("specification needs at least one input".into()));
    }
    let x = names("x", p.m, "");
    let xp = names("x", p.m, "'");
    let y = names("y", p.n, "");
    let yp = names("y", p.n, "'");
    let net = |inputs: &[Var], outputs: &[Var]| {
        Formula::nn(NetAtom::from_vars(&p.net, inputs.to_vec(), outputs.to_vec()))
    };
    let f = match kind {
        SpecKind::Max => {
            let body = Formula::implies(
                net(&x, &["y".to_string()]),
                Formula::IsMax("y".into(), x.clone()),
            );
            Formula::forall_many(&[x.clone(), vec!["y".into()]].concat(), body)
        }
        SpecKind::Sorted => {
            if p.n != p.m {
                return Err(Error::Arity { expected: p.m, found: p.n });
            }
            let mut ordered = Vec::new();
            for i in 0..p.n {
                for j in i + 1..p.n {
                    ordered.push(Formula::le(Term::var(&y[i]), Term::var(&y[j])));
                }
            }
            let arrangements = permutations(p.m)?
                .iter()
                .map(|pi| {
                    let ys = permute(pi, &y);
                    Formula::and_all(x.iter().zip(&ys).map(|(a, b)| var_eq(a, b)).collect())
                })
                .collect();
            let body = Formula::implies(
                net(&x, &y),
                Formula::and(Formula::and_all(ordered), Formula::or_all(arrangements)),
            );
            Formula::forall_many(&[x.clone(), y.clone()].concat(), body)
        }
        SpecKind::PermInvariant => {
            let all = permutations(p.m)?
                .iter()
                .map(|pi| net(&permute(pi, &x), &y))
                .collect();
            Formula::forall_many(&x, Formula::exists_many(&y, Formula::and_all(all)))
        }
        SpecKind::PermEquivariant => {
            if p.n != p.m {
                return Err(Error::Arity { expected: p.m, found: p.n });
            }
            let all = permutations(p.m)?
                .iter()
                .map(|pi| net(&permute(pi, &x), &permute(pi, &y)))
                .collect();
            let body = Formula::implies(net(&x, &y), Formula::and_all(all));
            Formula::forall_many(&[x.clone(), y.clone()].concat(), body)
        }
        SpecKind::Fairness => {
            if let Some(&bad) = p.k.iter().find(|&&i| i == 0 || i > p.m) {
                return Err(Error::Invalid(format!("protected position {bad} out of range")));
            }
            let mut hyp = vec![net(&x, &y), net(&xp, &yp)];
            if has_region(p) {
                hyp.push(region(p, false));
                hyp.push(region(p, true));
            }
            hyp.extend(p.k.iter().map(|&i| var_eq(&x[i - 1], &xp[i - 1])));
            let body = Formula::implies(
                Formula::and_all(hyp),
                Formula::ArgmaxEq(y.clone(), yp.clone()),
            );
            Formula::forall_many(&[x.clone(), xp.clone(), y.clone(), yp.clone()].concat(), body)
        }
        SpecKind::Robustness => {
            let eps = p
                .eps
                .clone()
                .ok_or_else(|| Error::Invalid("robustness needs a distance bound".into()))?;
            let z = names("z", p.m, "");
            let mut dist = Vec::new();
            for i in 0..p.m {
                let (a, b, zi) = (Term::var(&x[i]), Term::var(&xp[i]), Term::var(&z[i]));
                dist.push(Formula::and(
                    Formula::implies(
                        Formula::le(a.clone(), b.clone()),
                        Formula::eq(zi.clone(), Term::minus(b.clone(), &a)),
                    ),
                    Formula::implies(
                        Formula::lt(b.clone(), a.clone()),
                        Formula::eq(zi, Term::minus(a, &b)),
                    ),
                ));
            }
            let zsum = Term::sum(z.iter().map(|v| Term::var(v)).collect());
            dist.push(Formula::le(zsum, Term::constant(eps)));
            let mut hyp = vec![net(&x, &y), net(&xp, &yp)];
            if has_region(p) {
                hyp.push(region(p, false));
            }
            hyp.push(Formula::exists_many(&z, Formula::and_all(dist)));
            let body = Formula::implies(
                Formula::and_all(hyp),
                Formula::ArgmaxEq(y.clone(), yp.clone()),
            );
            Formula::forall_many(&[x.clone(), xp.clone(), y.clone(), yp.clone()].concat(), body)
        }
        SpecKind::Equivalence => {
            let mut hyp = vec![
                net(&x, &y),
                Formula::nn(NetAtom::from_vars(&p.net2, x.clone(), yp.clone())),
            ];
            if has_region(p) {
                hyp.push(region(p, false));
            }
            let body = Formula::implies(
                Formula::and_all(hyp),
                Formula::ArgmaxEq(y.clone(), yp.clone()),
            );
            Formula::forall_many(&[x.clone(), y.clone(), yp.clone()].concat(), body)
        }
        SpecKind::Injective => {
            let body = Formula::implies(
                Formula::and(net(&x, &y), net(&xp, &y)),
                Formula::and_all(x.iter().zip(&xp).map(|(a, b)| var_eq(a, b)).collect()),
            );
            Formula::forall_many(&[x.clone(), xp.clone(), y.clone()].concat(), body)
        }
        SpecKind::Surjective => Formula::forall_many(&y, Formula::exists_many(&x, net(&x, &y))),
        SpecKind::Xor => {
            if p.m != 2 || p.n != 1 {
                return Err(Error::Arity { expected: 2, found: p.m });
            }
            let bits = ["0", "1"].map(|c| Term::constant(c.parse().unwrap()));
            let boolean = |v: &str| {
                Formula::or(
                    Formula::eq(Term::var(v), bits[0].clone()),
                    Formula::eq(Term::var(v), bits[1].clone()),
                )
            };
            let out = vec!["y".to_string()];
            let hyp = Formula::and_all(vec![net(&x, &out), boolean(&x[0]), boolean(&x[1])]);
            let same = var_eq(&x[0], &x[1]);
            let concl = Formula::and(
                Formula::implies(same.clone(), Formula::eq(Term::var("y"), bits[0].clone())),
                Formula::implies(Formula::not(same), Formula::eq(Term::var("y"), bits[1].clone())),
            );
            Formula::forall_many(&[x.clone(), out].concat(), Formula::implies(hyp, concl))
        }
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_spec_is_a_sentence() {
        let mut p = SpecParams::new(2, 2);
        p.k = vec![1];
        p.eps = Some(Rational::from(1));
        for kind in SpecKind::ALL {
            let mut p = p.clone();
            if matches!(kind, SpecKind::Max | SpecKind::Xor) {
                p.n = 1;
            }
            let f = build(kind, &p).unwrap();
            assert!(f.is_sentence(), "{}: {f}", kind.name());
        }
    }

    #[test]
    fn permutation_guard() {
        let p = SpecParams::new(7, 7);
        assert!(matches!(build(SpecKind::Sorted, &p), Err(Error::Capacity(_))));
        assert!(build(SpecKind::Injective, &p).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for k in SpecKind::ALL {
            assert_eq!(k.name().parse::<SpecKind>().unwrap(), k);
        }
        assert!("nope".parse::<SpecKind>().is_err());
    }
}
