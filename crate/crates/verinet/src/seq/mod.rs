//! Recurrent networks over finite alphabets and probabilistic automata.

pub mod pfa;
pub mod rnn;

pub use pfa::{
    apply_morphism, build_eval_pfa, normalize_morphism, parse_bits, pcp_to_pfa, pfa_complement, pfa_convex,
    pfa_letterize, pfa_product, pfa_prune, pfa_square_trick, reversed_binary, words, Morphism, Pfa,
};
pub use rnn::{heaviside_rnn_emptiness, pfa_to_rnn, rnn_lang_member, OneHotCodec, Rnn};

use crate::rational::Rational;

/// Comparison of a score against a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Eq,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Ge, Relation::Gt, Relation::Eq];

    pub fn holds(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Relation::Ge => a >= b,
            Relation::Gt => a > b,
            Relation::Eq => a == b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        }
    }

    pub fn parse(s: &str) -> Option<Relation> {
        match s {
            ">=" | "ge" => Some(Relation::Ge),
            ">" | "gt" => Some(Relation::Gt),
            "=" | "==" | "eq" => Some(Relation::Eq),
            _ => None,
        }
    }
}
