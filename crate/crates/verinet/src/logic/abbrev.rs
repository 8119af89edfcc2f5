//! Removal of abbreviations.

use super::{Formula, Term, Var};

/// Which derived connectives survive expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Keep {
    pub and: bool,
    pub lt: bool,
    pub forall: bool,
}

impl Keep {
    /// Nothing is kept: the result uses only `≤`, `¬`, `∨`, `∃` and primitive atoms.
    pub const CORE: Keep = Keep { and: false, lt: false, forall: false };
    /// Conjunction, strict comparison and universal quantification are kept.
    pub const NORMAL: Keep = Keep { and: true, lt: true, forall: true };
}

/// Rewrites all sugar into the core grammar `t ≤ t | ¬φ | φ ∨ φ | ∃x.φ` (plus network
/// atoms and `ispow2`).
pub fn expand_abbrev(phi: &Formula) -> Formula {
    expand(phi, Keep::CORE)
}

/// Rewrites sugar but keeps the connectives selected by `keep`.
pub fn expand(phi: &Formula, keep: Keep) -> Formula {
    Expander { keep }.formula(phi)
}

struct Expander {
    keep: Keep,
}

impl Expander {
    fn and(&self, a: Formula, b: Formula) -> Formula {
        if self.keep.and {
            Formula::and(a, b)
        } else {
            Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
        }
    }

    fn and_all(&self, fs: Vec<Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::tt(),
            Some(first) => it.fold(first, |acc, f| self.and(acc, f)),
        }
    }

    fn eq(&self, a: &Term, b: &Term) -> Formula {
        self.and(Formula::Le(a.clone(), b.clone()), Formula::Le(b.clone(), a.clone()))
    }

    fn lt(&self, a: &Term, b: &Term) -> Formula {
        if self.keep.lt {
            Formula::Lt(a.clone(), b.clone())
        } else {
            self.and(Formula::Le(a.clone(), b.clone()), Formula::not(self.eq(a, b)))
        }
    }

    fn var_eq(&self, x: &Var, y: &Var) -> Formula {
        self.eq(&Term::var(x), &Term::var(y))
    }

    fn member(&self, x: &Var, ys: &[Var]) -> Formula {
        Formula::or_all(ys.iter().map(|y| self.var_eq(x, y)).collect())
    }

    fn is_max(&self, x: &Var, ys: &[Var]) -> Formula {
        let bounds = ys.iter().map(|y| Formula::Le(Term::var(y), Term::var(x)));
        self.and_all(std::iter::once(self.member(x, ys)).chain(bounds).collect())
    }

    fn argmax_is(&self, ys: &[Var], k: &[usize]) -> Formula {
        let mut parts: Vec<Formula> =
            k.iter().map(|&i| self.is_max(&ys[i - 1], ys)).collect();
        for i in 1..=ys.len() {
            if !k.contains(&i) {
                parts.push(Formula::not(self.is_max(&ys[i - 1], ys)));
            }
        }
        self.and_all(parts)
    }

    fn formula(&self, phi: &Formula) -> Formula {
        use Formula::*;
        match phi {
            Le(..) | NnAtom(_) | IsPowerOfTwo(_) => phi.clone(),
            Lt(a, b) => self.lt(a, b),
            Eq(a, b) => self.eq(a, b),
            Ne(a, b) => {
                if self.keep.lt {
                    Formula::or(Formula::Lt(a.clone(), b.clone()), Formula::Lt(b.clone(), a.clone()))
                } else {
                    Formula::not(self.eq(a, b))
                }
            }
            Not(f) => Formula::not(self.formula(f)),
            Or(a, b) => Formula::or(self.formula(a), self.formula(b)),
            And(a, b) => self.and(self.formula(a), self.formula(b)),
            Implies(a, b) => Formula::or(Formula::not(self.formula(a)), self.formula(b)),
            Iff(a, b) => {
                let (fa, fb) = (self.formula(a), self.formula(b));
                self.and(
                    Formula::or(Formula::not(fa.clone()), fb.clone()),
                    Formula::or(Formula::not(fb), fa),
                )
            }
            Exists(x, f) => Formula::exists(x, self.formula(f)),
            Forall(x, f) => {
                if self.keep.forall {
                    Formula::forall(x, self.formula(f))
                } else {
                    Formula::not(Formula::exists(x, Formula::not(self.formula(f))))
                }
            }
            NegNnAtom(a) => Formula::not(NnAtom(a.clone())),
            In(x, ys) => self.member(x, ys),
            IsMax(x, ys) => self.is_max(x, ys),
            ArgmaxIs(ys, k) => self.argmax_is(ys, k),
            ArgmaxEq(ys, zs) => {
                // argmax never returns the empty set, so only non-empty K contribute.
                let n = ys.len();
                let disjuncts = (1u64..(1u64 << n))
                    .map(|mask| {
                        let k: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
                        self.and(self.argmax_is(ys, &k), self.argmax_is(zs, &k))
                    })
                    .collect();
                Formula::or_all(disjuncts)
            }
        }
    }
}

/// Whether `phi` uses only `≤`, `¬`, `∨`, `∃`, network atoms and `ispow2`.
pub fn is_core(phi: &Formula) -> bool {
    let mut ok = true;
    phi.visit(&mut |f| {
        if !matches!(
            f,
            Formula::Le(..)
                | Formula::Not(_)
                | Formula::Or(..)
                | Formula::Exists(..)
                | Formula::NnAtom(_)
                | Formula::IsPowerOfTwo(_)
        ) {
            ok = false;
        }
    });
    ok
}
