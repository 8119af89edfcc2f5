//! Deterministic weak automata for single linear constraints `Σ c_i·x_i ⋈ b`.
//!
//! After the sign column the automaton knows the signed coefficients
//! `e_i = ±c_i` and runs over the magnitudes. In the integer part it tracks
//! `s = Σ e_i·(integer prefix of x_i)`; at the `•` it switches to the budget
//! `t = b − s`, and each fraction column maps `t` to `2t − Σ e_i·d_i`. Values
//! outside a window fixed by the positive and negative coefficient sums are
//! decided and collapse into accepting or rejecting sinks.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::automata::{Buchi, Label, Sym};
use crate::rational::Rational;
use crate::{Error, Result};

/// Comparison of a linear constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

/// Largest window of carry values a single constraint automaton may span.
const WINDOW_LIMIT: i64 = 1 << 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum St {
    Init,
    Int(u32, i64),
    Frac(u32, i64),
    AccInt,
    AccFrac,
}

enum Step {
    To(St),
    Reject,
}

/// Scales `Σ c_i·x_i ⋈ b` with rational data to coprime integers.
pub fn integral(coeffs: &[Rational], b: &Rational) -> Result<(Vec<i64>, i64)> {
    let mut l = BigInt::from(1);
    for c in coeffs.iter().chain(std::iter::once(b)) {
        l = l.lcm(c.denom());
    }
    let scaled: Vec<BigInt> = coeffs
        .iter()
        .chain(std::iter::once(b))
        .map(|c| (c.numer() * &l) / c.denom())
        .collect();
    let g = scaled.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    let g = if g.is_zero() { BigInt::from(1) } else { g };
    let mut ints = Vec::with_capacity(scaled.len());
    for v in scaled {
        let v = (v / &g)
            .to_i64()
            .filter(|v| v.abs() < WINDOW_LIMIT)
            .ok_or_else(|| Error::Capacity("linear constraint coefficients too large".into()))?;
        ints.push(v);
    }
    let b = ints.pop().unwrap();
    Ok((ints, b))
}

/// Automaton over `coeffs.len()` tracks accepting exactly the well-formed
/// words whose values satisfy `Σ coeffs[i]·x_i ⋈ b`.
pub fn linear_automaton(coeffs: &[i64], rel: Rel, b: i64) -> Result<Buchi> {
    let k = coeffs.len();
    if k > 20 {
        return Err(Error::Capacity(format!("linear constraint over {k} variables")));
    }
    if k == 0 {
        let holds = match rel {
            Rel::Le => 0 <= b,
            Rel::Lt => 0 < b,
            Rel::Eq => b == 0,
        };
        return Ok(if holds { Buchi::universal(0) } else { Buchi::empty(0) });
    }
    let signed = |sigma: u32| -> Vec<i64> {
        coeffs.iter().enumerate().map(|(i, &c)| if sigma >> i & 1 == 1 { -c } else { c }).collect()
    };
    let sums = |e: &[i64]| -> (i64, i64) {
        (e.iter().filter(|&&c| c > 0).sum(), e.iter().filter(|&&c| c < 0).sum())
    };
    let int_step = |sigma: u32, s: i64| -> Step {
        let e = signed(sigma);
        let (pos, neg) = sums(&e);
        let hi = (b - neg).max(-neg);
        let lo = (b - pos).min(-pos);
        if s > hi {
            Step::Reject
        } else if s < lo {
            match rel {
                Rel::Eq => Step::Reject,
                _ => Step::To(St::AccInt),
            }
        } else {
            Step::To(St::Int(sigma, s))
        }
    };
    let frac_step = |sigma: u32, t: i64| -> Step {
        let (pos, neg) = sums(&signed(sigma));
        match rel {
            Rel::Le if t >= pos => Step::To(St::AccFrac),
            Rel::Le if t < neg => Step::Reject,
            Rel::Lt if t > pos => Step::To(St::AccFrac),
            Rel::Lt if t <= neg => Step::Reject,
            Rel::Eq if t > pos || t < neg => Step::Reject,
            _ => Step::To(St::Frac(sigma, t)),
        }
    };
    let digit_label = |d: u32| -> Label {
        let letter: Vec<Sym> = (0..k).map(|i| if d >> i & 1 == 1 { Sym::One } else { Sym::Zero }).collect();
        Label::of_letter(&letter)
    };
    let dot = Label::of_letter(&vec![Sym::Dot; k]);
    let digits_any = Label::uniform(k, crate::automata::DIGIT_MASK);

    let mut a = Buchi::new(k);
    let mut index: HashMap<St, usize> = HashMap::from([(St::Init, 0)]);
    let mut queue = VecDeque::from([St::Init]);
    let mut states = 0usize;
    let is_final = |st: St| match st {
        St::AccFrac => true,
        St::Frac(..) => rel != Rel::Lt,
        _ => false,
    };
    while let Some(st) = queue.pop_front() {
        let src = index[&st];
        let mut succ: Vec<(Label, St)> = Vec::new();
        match st {
            St::Init => {
                for sigma in 0..(1u32 << k) {
                    let letter: Vec<Sym> =
                        (0..k).map(|i| if sigma >> i & 1 == 1 { Sym::Minus } else { Sym::Plus }).collect();
                    if let Step::To(t) = int_step(sigma, 0) {
                        succ.push((Label::of_letter(&letter), t));
                    }
                }
            }
            St::Int(sigma, s) => {
                let e = signed(sigma);
                for d in 0..(1u32 << k) {
                    let c: i64 = (0..k).filter(|&i| d >> i & 1 == 1).map(|i| e[i]).sum();
                    if let Step::To(t) = int_step(sigma, 2 * s + c) {
                        succ.push((digit_label(d), t));
                    }
                }
                if let Step::To(t) = frac_step(sigma, b - s) {
                    succ.push((dot, t));
                }
            }
            St::Frac(sigma, t) => {
                let e = signed(sigma);
                for d in 0..(1u32 << k) {
                    let c: i64 = (0..k).filter(|&i| d >> i & 1 == 1).map(|i| e[i]).sum();
                    if let Step::To(n) = frac_step(sigma, 2 * t - c) {
                        succ.push((digit_label(d), n));
                    }
                }
            }
            St::AccInt => {
                succ.push((digits_any, St::AccInt));
                succ.push((dot, St::AccFrac));
            }
            St::AccFrac => succ.push((digits_any, St::AccFrac)),
        }
        for (l, t) in succ {
            let dst = match index.get(&t) {
                Some(&d) => d,
                None => {
                    states += 1;
                    if states > 4 * WINDOW_LIMIT as usize {
                        return Err(Error::Capacity("linear constraint automaton too large".into()));
                    }
                    let d = a.add_state(is_final(t));
                    index.insert(t, d);
                    queue.push_back(t);
                    d
                }
            };
            a.add_edge(src, l, dst);
        }
    }
    a.compress();
    Ok(a.with_flag(true))
}

/// `Σ coeffs[i]·x_i ⋈ b` with rational data.
pub fn linear_rational(coeffs: &[Rational], rel: Rel, b: &Rational) -> Result<Buchi> {
    let (c, b) = integral(coeffs, b)?;
    linear_automaton(&c, rel, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::accepts;
    use crate::lra::codec::encode_tuple;
    use crate::rational::r;

    fn check(coeffs: &[i64], rel: Rel, b: i64, xs: &[&str]) -> bool {
        let a = linear_automaton(coeffs, rel, b).unwrap();
        let vals: Vec<Rational> = xs.iter().map(|s| r(s)).collect();
        accepts(&a, &encode_tuple(&vals).word).unwrap()
    }

    #[test]
    fn simple_constraints() {
        assert!(check(&[1, -1], Rel::Le, 0, &["1/3", "1/2"]));
        assert!(!check(&[1, -1], Rel::Le, 0, &["2/3", "1/2"]));
        assert!(check(&[1, -1], Rel::Eq, 0, &["-5/7", "-5/7"]));
        assert!(!check(&[1, -1], Rel::Lt, 0, &["-5/7", "-5/7"]));
        assert!(check(&[2, 3], Rel::Eq, 7, &["2", "1"]));
        assert!(check(&[1], Rel::Lt, -3, &["-7/2"]));
    }

    #[test]
    fn dual_representations_agree() {
        let a = linear_automaton(&[1], Rel::Eq, 2).unwrap();
        let w1 = crate::automata::UPWord::from_tracks(&["+10•"], &["0"]).unwrap();
        let w2 = crate::automata::UPWord::from_tracks(&["+0001•"], &["1"]).unwrap();
        assert!(accepts(&a, &w1).unwrap());
        assert!(accepts(&a, &w2).unwrap());
        assert!(a.is_deterministic() && a.is_weak());
    }
}
