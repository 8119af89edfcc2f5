//! Binary encodings of reals as ultimately periodic words.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::automata::{Letter, Sym, UPWord};
use crate::rational::Rational;
use crate::{Error, Result};

/// A well-formed word together with the column index of its `•`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfEncoding {
    pub word: UPWord,
    pub dot: usize,
}

impl WfEncoding {
    pub fn negative(&self, track: usize) -> bool {
        self.word.at(0)[track] == Sym::Minus
    }
}

/// Sign, integer digits (most significant first), fraction pre-period and period.
struct Parts {
    negative: bool,
    int: Vec<Sym>,
    pre: Vec<Sym>,
    period: Vec<Sym>,
}

fn bit(b: bool) -> Sym {
    if b {
        Sym::One
    } else {
        Sym::Zero
    }
}

fn parts(q: &Rational) -> Parts {
    let a = q.abs();
    let int = a.floor();
    let frac = &a - &Rational::from_bigint(int.clone());
    let int_digits: Vec<Sym> = if int.is_zero() {
        vec![]
    } else {
        int.to_str_radix(2).chars().map(|c| bit(c == '1')).collect()
    };
    let d = frac.denom().clone();
    let mut r = frac.numer().clone();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    let (pre, period) = loop {
        if r.is_zero() {
            break (digits, vec![Sym::Zero]);
        }
        if let Some(&p) = seen.get(&r) {
            let period = digits.split_off(p);
            break (digits, period);
        }
        seen.insert(r.clone(), digits.len());
        r *= 2;
        let one = r >= d;
        if one {
            r -= &d;
        }
        digits.push(bit(one));
    };
    Parts { negative: q.is_negative(), int: int_digits, pre, period }
}

/// Canonical one-track encoding: no leading zeros, terminating tails end in
/// `0^ω`, zero carries `+`.
pub fn encode_rational(q: &Rational) -> WfEncoding {
    encode_tuple(std::slice::from_ref(q))
}

/// Aligned encoding of a tuple: integer parts padded to a common length, the
/// fraction parts merged into a common pre-period and period.
pub fn encode_tuple(qs: &[Rational]) -> WfEncoding {
    let ps: Vec<Parts> = qs.iter().map(parts).collect();
    let width = ps.iter().map(|p| p.int.len()).max().unwrap_or(0);
    let pre_len = ps.iter().map(|p| p.pre.len()).max().unwrap_or(0);
    let per_len = ps.iter().fold(1usize, |acc, p| acc.lcm(&p.period.len()));
    let frac_at = |p: &Parts, j: usize| {
        if j < p.pre.len() {
            p.pre[j]
        } else {
            p.period[(j - p.pre.len()) % p.period.len()]
        }
    };
    let column = |f: &dyn Fn(&Parts) -> Sym| -> Letter { ps.iter().map(f).collect() };
    let mut prefix: Vec<Letter> = Vec::new();
    prefix.push(column(&|p| if p.negative { Sym::Minus } else { Sym::Plus }));
    for c in 0..width {
        prefix.push(column(&|p| {
            let pad = width - p.int.len();
            if c < pad {
                Sym::Zero
            } else {
                p.int[c - pad]
            }
        }));
    }
    prefix.push(column(&|_| Sym::Dot));
    for j in 0..pre_len {
        prefix.push(column(&|p| frac_at(p, j)));
    }
    let period: Vec<Letter> = (pre_len..pre_len + per_len).map(|j| column(&|p| frac_at(p, j))).collect();
    let period = if qs.is_empty() { vec![vec![]] } else { period };
    let prefix = if qs.is_empty() { vec![] } else { prefix };
    WfEncoding { word: UPWord { prefix, period }, dot: width + 1 }
}

fn bits_value(bits: &[Sym]) -> BigInt {
    bits.iter().fold(BigInt::zero(), |acc, s| acc * 2 + u8::from(*s == Sym::One))
}

/// Exact value of a well-formed one-track word.
pub fn decode_upword(w: &UPWord) -> Result<Rational> {
    if w.arity() != 1 {
        return Err(Error::Arity { expected: 1, found: w.arity() });
    }
    decode_track(w, 0)
}

/// Values of all tracks of a well-formed word (the `•` columns must align).
pub fn decode_tuple(w: &UPWord) -> Result<Vec<Rational>> {
    let vals: Vec<Rational> = (0..w.arity()).map(|t| decode_track(w, t)).collect::<Result<_>>()?;
    let dot_of = |t: usize| w.prefix.iter().position(|l| l[t] == Sym::Dot);
    if (1..w.arity()).any(|t| dot_of(t) != dot_of(0)) {
        return Err(Error::Invalid("misaligned • columns".into()));
    }
    Ok(vals)
}

fn decode_track(w: &UPWord, t: usize) -> Result<Rational> {
    let row: Vec<Sym> = w.prefix.iter().map(|l| l[t]).collect();
    let per: Vec<Sym> = w.period.iter().map(|l| l[t]).collect();
    let malformed = |m: &str| Error::Invalid(format!("malformed word on track {t}: {m}"));
    if per.iter().any(|s| !s.is_digit()) {
        return Err(malformed("period must consist of digits"));
    }
    let first = if row.is_empty() { per[0] } else { row[0] };
    let negative = match first {
        Sym::Plus => false,
        Sym::Minus => true,
        _ => return Err(malformed("missing sign")),
    };
    let dot = row.iter().position(|&s| s == Sym::Dot).ok_or_else(|| malformed("no •"))?;
    let int = &row[1..dot];
    let pre = &row[dot + 1..];
    if int.iter().chain(pre.iter()).any(|s| !s.is_digit()) {
        return Err(malformed("stray symbol"));
    }
    let int_val = Rational::from_bigint(bits_value(int));
    let a = bits_value(pre);
    let b = bits_value(&per);
    let two_a = BigInt::one() << pre.len();
    let cycle = (BigInt::one() << per.len()) - BigInt::one();
    let frac = Rational::new(a * &cycle + b, two_a * cycle);
    let v = int_val + frac;
    Ok(if negative { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, r};

    #[test]
    fn thirteen_halves_both_ways() {
        let a = UPWord::from_tracks(&["+0110•1"], &["0"]).unwrap();
        let b = UPWord::from_tracks(&["+110•0"], &["1"]).unwrap();
        assert_eq!(decode_upword(&a).unwrap(), q(13, 2));
        assert_eq!(decode_upword(&b).unwrap(), q(13, 2));
    }

    #[test]
    fn zero_is_plus_dot() {
        let e = encode_rational(&Rational::zero());
        assert_eq!(e.word, UPWord::from_tracks(&["+•"], &["0"]).unwrap());
        assert_eq!(decode_upword(&e.word).unwrap(), Rational::zero());
        let neg_zero = UPWord::from_tracks(&["-000•"], &["0"]).unwrap();
        assert_eq!(decode_upword(&neg_zero).unwrap(), Rational::zero());
    }

    #[test]
    fn periodic_fraction() {
        let e = encode_rational(&r("-1/3"));
        assert_eq!(e.word, UPWord::from_tracks(&["-•"], &["01"]).unwrap());
        assert_eq!(decode_upword(&e.word).unwrap(), r("-1/3"));
        let t = encode_tuple(&[r("5/6"), r("12"), r("1/4")]);
        assert_eq!(decode_tuple(&t.word).unwrap(), vec![r("5/6"), r("12"), r("1/4")]);
        assert_eq!(t.dot, 5);
    }

    #[test]
    fn malformed_words() {
        assert!(decode_upword(&UPWord::from_tracks(&["01"], &["0"]).unwrap()).is_err());
        assert!(decode_upword(&UPWord::from_tracks(&["+01"], &["0"]).unwrap()).is_err());
        assert!(decode_upword(&UPWord::from_tracks(&["+0•"], &["•"]).unwrap()).is_err());
    }
}
