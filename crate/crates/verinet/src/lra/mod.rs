//! Deciding linear real arithmetic with Büchi automata over binary encodings.

pub mod atoms;
pub mod codec;
pub mod decide;
pub mod linear;
pub mod onepoint;
pub mod terms;

pub use atoms::{add, add_n, bitwise_adder, const_, eq, le, mult_const, neg, power_of_two, sign_plus, TapeAllocator};
pub use codec::{decode_tuple, decode_upword, encode_rational, encode_tuple, WfEncoding};
pub use decide::{decide_nnl_sentence, decide_sentence, witness_exists, Decider};
pub use linear::{linear_automaton, linear_rational, Rel};
pub use terms::{
    build_term_automaton, compile_matrix, decide_sentence_literal, eliminate_quantifiers, matrix_automaton,
    TermTable,
};

use crate::automata::{determinize, leading_zero_closure, project, reduce, remove_track, Buchi, Label, DIGIT_MASK, DOT_MASK, SIGN_MASK};
use crate::Result;

/// The automaton of all well-formed k-track words: a sign column, integer
/// digits, one aligned `•` column, then fraction digits forever.
pub fn wf_automaton(k: usize) -> Buchi {
    if k == 0 {
        return Buchi::universal(0);
    }
    let mut a = Buchi::new(k);
    let int = a.add_state(false);
    let frac = a.add_state(true);
    a.add_edge(0, Label::uniform(k, SIGN_MASK), int);
    a.add_edge(int, Label::uniform(k, DIGIT_MASK), int);
    a.add_edge(int, Label::uniform(k, DOT_MASK), frac);
    a.add_edge(frac, Label::uniform(k, DIGIT_MASK), frac);
    a.with_flag(true)
}

/// Shrinks an automaton without changing its language: bisimulation quotient,
/// then a deterministic weak form when the subset construction stays small.
pub fn normalize(a: &Buchi) -> Buchi {
    let r = reduce(a);
    if r.is_det_weak() {
        return r;
    }
    match determinize(&r) {
        Ok(d) => {
            let d = reduce(&d);
            if d.is_deterministic() && d.is_weak() {
                d.with_flag(true)
            } else {
                r
            }
        }
        Err(_) => r,
    }
}

/// `cl(proj(A, i))`, normalized.
pub fn cl_proj(a: &Buchi, i: usize) -> Result<Buchi> {
    Ok(normalize(&leading_zero_closure(&project(a, i)?)))
}

/// `cl` of the automaton with track `t` deleted, normalized.
pub fn cl_remove(a: &Buchi, t: usize) -> Result<Buchi> {
    Ok(normalize(&leading_zero_closure(&remove_track(a, t)?)))
}
