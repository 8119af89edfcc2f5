//! Arithmetic atom automata assembled from a bitwise adder, equality,
//! projection and leading-zero closure.
//!
//! Every constructor builds its automaton over the few tracks it mentions
//! (plus auxiliary tapes appended after them) and then places it into the
//! requested arity; the remaining tracks are only required to be well formed.

use num_bigint::BigInt;

use super::linear::{linear_automaton, linear_rational, Rel};
use super::{cl_proj, normalize, wf_automaton};
use crate::automata::{embed, intersect, Buchi, Label, Sym, DIGIT_MASK, DOT_MASK, SIGN_MASK};
use crate::rational::Rational;
use crate::{Error, Result};

/// Hands out auxiliary tape indices after the tracks already in use and keeps
/// the distinct-index bookkeeping for the constructions below.
#[derive(Clone, Debug)]
pub struct TapeAllocator {
    used: usize,
}

impl TapeAllocator {
    pub fn new(used: usize) -> TapeAllocator {
        TapeAllocator { used }
    }

    pub fn fresh(&mut self) -> usize {
        self.used += 1;
        self.used - 1
    }

    pub fn width(&self) -> usize {
        self.used
    }
}

/// Collapses repeated indices: returns the distinct tracks (in first-seen
/// order) and, for each input index, its position among them.
fn localize(tracks: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut distinct: Vec<usize> = Vec::new();
    let pos = tracks
        .iter()
        .map(|t| match distinct.iter().position(|d| d == t) {
            Some(p) => p,
            None => {
                distinct.push(*t);
                distinct.len() - 1
            }
        })
        .collect();
    (distinct, pos)
}

fn check_range(k: usize, tracks: &[usize]) -> Result<()> {
    if let Some(&t) = tracks.iter().find(|&&t| t >= k) {
        return Err(Error::Invalid(format!("track index {t} out of range for arity {k}")));
    }
    Ok(())
}

/// Places an automaton whose track `j` denotes `tracks[j]` into arity `k`.
fn place(core: &Buchi, k: usize, tracks: &[usize]) -> Result<Buchi> {
    check_range(k, tracks)?;
    embed(core, k, tracks)
}

/// `x_i = x_j`.
pub fn eq(k: usize, i: usize, j: usize) -> Result<Buchi> {
    check_range(k, &[i, j])?;
    if i == j {
        return Ok(wf_automaton(k));
    }
    place(&linear_automaton(&[1, -1], Rel::Eq, 0)?, k, &[i, j])
}

/// `x_i = −x_j`: equality with the sign column of track `j` mirrored.
pub fn neg(k: usize, i: usize, j: usize) -> Result<Buchi> {
    check_range(k, &[i, j])?;
    let base = linear_automaton(&[1, -1], Rel::Eq, 0)?;
    let mut mirrored = Buchi::new(2);
    for _ in 1..base.num_states() {
        mirrored.add_state(false);
    }
    for q in base.finals() {
        mirrored.set_final(q, true);
    }
    mirrored.set_init(base.init());
    for (p, l, q) in base.transitions() {
        let m = l.track(1);
        let swapped = if m & SIGN_MASK != 0 {
            (m & !SIGN_MASK) | ((m & Sym::Plus.bit()) << 1) | ((m & Sym::Minus.bit()) >> 1)
        } else {
            m
        };
        mirrored.add_edge(p, l.with_track(1, swapped), q);
    }
    mirrored.mark_det_weak();
    place(&mirrored, k, &[i, j])
}

/// Track `i` carries the sign `+`.
pub fn sign_plus(k: usize, i: usize) -> Result<Buchi> {
    let mut a = Buchi::new(1);
    let int = a.add_state(false);
    let frac = a.add_state(true);
    a.add_edge(0, Label::from_masks(&[Sym::Plus.bit()]), int);
    a.add_edge(int, Label::from_masks(&[DIGIT_MASK]), int);
    a.add_edge(int, Label::from_masks(&[DOT_MASK]), frac);
    a.add_edge(frac, Label::from_masks(&[DIGIT_MASK]), frac);
    a.mark_det_weak();
    place(&a, k, &[i])
}

/// The bitwise adder `B`: accepts words where the magnitudes on the three
/// tracks add column by column with carries, read most significant first.
///
/// Signs select which track plays the sum: with `x_i = x_i1 + x_i2` rewritten
/// as `σ1·|x_i1| + σ2·|x_i2| − σ·|x_i| = 0`, the track whose coefficient sign
/// is in the minority holds the sum of the other two magnitudes. When all
/// three coefficient signs agree only all-zero digits are accepted.
/// Not every representation of a valid triple is accepted; that is repaired
/// by [`add`].
pub fn bitwise_adder(k: usize, i: usize, i1: usize, i2: usize) -> Result<Buchi> {
    check_range(k, &[i, i1, i2])?;
    // Core track order: i1, i2, i.
    let mut a = Buchi::new(3);
    // int[s][e], frac[s][e] for sum track s and pending carry e; zero branch separate.
    let mut int = [[0usize; 2]; 3];
    let mut frac = [[0usize; 2]; 3];
    for s in 0..3 {
        for e in 0..2 {
            int[s][e] = a.add_state(false);
            frac[s][e] = a.add_state(true);
        }
    }
    let zero_int = a.add_state(false);
    let zero_frac = a.add_state(true);
    let sym = |b: bool| if b { Sym::One } else { Sym::Zero };
    for signs in 0..8u32 {
        let neg = |t: usize| signs >> t & 1 == 1;
        let letter: Vec<Sym> = (0..3).map(|t| if neg(t) { Sym::Minus } else { Sym::Plus }).collect();
        // Coefficient signs: + for addends with sign +, and the sum enters negated.
        let coef_pos = [!neg(0), !neg(1), neg(2)];
        let npos = coef_pos.iter().filter(|&&p| p).count();
        let target = match npos {
            0 | 3 => zero_int,
            _ => {
                let minority = npos == 1;
                let s = (0..3).find(|&t| coef_pos[t] == minority).unwrap();
                int[s][0]
            }
        };
        a.add_edge(0, Label::of_letter(&letter), target);
    }
    let zeros = Label::of_letter(&[Sym::Zero; 3]);
    let dot = Label::of_letter(&[Sym::Dot; 3]);
    a.add_edge(zero_int, zeros, zero_int);
    a.add_edge(zero_int, dot, zero_frac);
    a.add_edge(zero_frac, zeros, zero_frac);
    for s in 0..3 {
        let addends: Vec<usize> = (0..3).filter(|&t| t != s).collect();
        for e in 0..2usize {
            a.add_edge(int[s][e], dot, frac[s][e]);
            for d in 0..8u32 {
                let bit = |t: usize| (d >> t & 1) as usize;
                for g in 0..2usize {
                    if bit(addends[0]) + bit(addends[1]) + g == bit(s) + 2 * e {
                        let letter: Vec<Sym> = (0..3).map(|t| sym(bit(t) == 1)).collect();
                        let l = Label::of_letter(&letter);
                        a.add_edge(int[s][e], l, int[s][g]);
                        a.add_edge(frac[s][e], l, frac[s][g]);
                    }
                }
            }
        }
    }
    a.compress();
    place(&a, k, &[i1, i2, i])
}

/// `x_i = x_i1 + x_i2`, as `cl(proj(B ∩ eq(i, aux)))` with the adder writing
/// into an auxiliary tape.
pub fn add(k: usize, i: usize, i1: usize, i2: usize) -> Result<Buchi> {
    check_range(k, &[i, i1, i2])?;
    let (tracks, pos) = localize(&[i, i1, i2]);
    let mut tapes = TapeAllocator::new(tracks.len());
    let aux = tapes.fresh();
    let w = tapes.width();
    let b = bitwise_adder(w, aux, pos[1], pos[2])?;
    let e = eq(w, pos[0], aux)?;
    let core = cl_proj(&intersect(&b, &e)?, tracks.len())?;
    place(&core, k, &tracks)
}

/// `x_i = Σ x_ij`, built inductively from binary additions.
pub fn add_n(k: usize, i: usize, summands: &[usize]) -> Result<Buchi> {
    check_range(k, summands)?;
    match summands.len() {
        0 => return const_(k, i, &Rational::zero()),
        1 => return eq(k, i, summands[0]),
        2 => return add(k, i, summands[0], summands[1]),
        _ => {}
    }
    let mut all = vec![i];
    all.extend_from_slice(summands);
    let (tracks, pos) = localize(&all);
    let mut tapes = TapeAllocator::new(tracks.len());
    let aux = tapes.fresh();
    let w = tapes.width();
    let n = summands.len();
    let head = add_n(w, aux, &pos[1..n])?;
    let last = add(w, pos[0], pos[n], aux)?;
    let core = cl_proj(&intersect(&head, &last)?, tracks.len())?;
    place(&core, k, &tracks)
}

/// `x_i = a·x_j` for rational `a`.
pub fn mult_const(k: usize, i: usize, a: &Rational, j: usize) -> Result<Buchi> {
    check_range(k, &[i, j])?;
    if a.is_zero() {
        return const_(k, i, &Rational::zero());
    }
    if *a == Rational::one() {
        return eq(k, i, j);
    }
    if *a == Rational::from_int(-1) {
        return neg(k, i, j);
    }
    let (tracks, pos) = localize(&[i, j]);
    let (li, lj) = (pos[0], pos[1]);
    let mut tapes = TapeAllocator::new(tracks.len());
    let core = if a.is_negative() {
        // x_i = −t with t = |a|·x_j.
        let t = tapes.fresh();
        let w = tapes.width();
        let scaled = mult_const(w, t, &a.abs(), lj)?;
        cl_proj(&intersect(&scaled, &neg(w, li, t)?)?, tracks.len())?
    } else if !a.is_integer() {
        // n·x_i = m·x_j through two tapes that must agree.
        let (m, n) = (Rational::from_bigint(a.numer().clone()), Rational::from_bigint(a.denom().clone()));
        let t1 = tapes.fresh();
        let t2 = tapes.fresh();
        let w = tapes.width();
        let left = mult_const(w, t1, &n, li)?;
        let right = mult_const(w, t2, &m, lj)?;
        let both = normalize(&intersect(&left, &right)?);
        cl_proj(&intersect(&both, &eq(w, t1, t2)?)?, tracks.len())?
    } else if a.numer() == &BigInt::from(2) {
        let t = tapes.fresh();
        let w = tapes.width();
        cl_proj(&intersect(&eq(w, t, lj)?, &add(w, li, lj, t)?)?, tracks.len())?
    } else {
        // Tapes hold x_j, 2·x_j, 4·x_j, …; x_i sums those selected by the binary digits of a.
        let bits = a.numer().to_str_radix(2);
        let n = bits.len();
        let first = tapes.fresh();
        let mut doubles = vec![first];
        for _ in 1..n {
            doubles.push(tapes.fresh());
        }
        let w = tapes.width();
        let mut acc = eq(w, first, lj)?;
        for l in 1..n {
            acc = normalize(&intersect(&acc, &mult_const(w, doubles[l], &Rational::from_int(2), doubles[l - 1])?)?);
        }
        let selected: Vec<usize> = bits
            .chars()
            .rev()
            .enumerate()
            .filter(|(_, c)| *c == '1')
            .map(|(l, _)| doubles[l])
            .collect();
        cl_proj(&intersect(&acc, &add_n(w, li, &selected)?)?, tracks.len())?
    };
    place(&core, k, &tracks)
}

/// `x_i = b`: all representations of `b`, with either digit tail, any number
/// of leading zeros and both signs for zero.
pub fn const_(k: usize, i: usize, b: &Rational) -> Result<Buchi> {
    check_range(k, &[i])?;
    place(&linear_rational(&[Rational::one()], Rel::Eq, b)?, k, &[i])
}

/// `x_i ≤ x_j`, as `x_j = x_i + d` with `d` carrying the sign `+`.
pub fn le(k: usize, i: usize, j: usize) -> Result<Buchi> {
    check_range(k, &[i, j])?;
    if i == j {
        return Ok(wf_automaton(k));
    }
    let mut tapes = TapeAllocator::new(2);
    let d = tapes.fresh();
    let w = tapes.width();
    let core = cl_proj(&intersect(&add(w, 1, 0, d)?, &sign_plus(w, d)?)?, 2)?;
    place(&core, k, &[i, j])
}

/// `x_i = 2^n` for some natural number `n`: either `0*10*•0^ω` or `0*1^n•1^ω`.
pub fn power_of_two(k: usize, i: usize) -> Result<Buchi> {
    check_range(k, &[i])?;
    let mut a = Buchi::new(1);
    let zero = Label::from_masks(&[Sym::Zero.bit()]);
    let one = Label::from_masks(&[Sym::One.bit()]);
    let dot = Label::from_masks(&[DOT_MASK]);
    let lead = a.add_state(false);
    let after_one = a.add_state(false);
    let ones = a.add_state(false);
    let tail0 = a.add_state(true);
    let tail1 = a.add_state(true);
    a.add_edge(0, Label::from_masks(&[Sym::Plus.bit()]), lead);
    a.add_edge(lead, zero, lead);
    a.add_edge(lead, one, after_one);
    a.add_edge(after_one, zero, after_one);
    a.add_edge(after_one, dot, tail0);
    a.add_edge(tail0, zero, tail0);
    a.add_edge(lead, dot, tail1);
    a.add_edge(lead, one, ones);
    a.add_edge(ones, one, ones);
    a.add_edge(ones, dot, tail1);
    a.add_edge(tail1, one, tail1);
    place(&normalize(&a), k, &[i])
}
