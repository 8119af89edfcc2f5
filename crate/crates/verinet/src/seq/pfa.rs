//! Probabilistic finite automata over finite alphabets, with exact values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, Vector};
use crate::rational::Rational;

use super::Relation;

/// A reactive PFA. Letters are indices into `alphabet`; `matrices[a]` is the
/// column-stochastic transition matrix of letter `a`, entry `(j, i)` being the
/// probability of moving from state `i` to state `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pfa {
    alphabet: Vec<String>,
    matrices: Vec<Matrix>,
    lambda: Vector,
    gamma: Vector,
}

fn is_bit(v: &Rational) -> bool {
    v.is_zero() || *v == Rational::one()
}

impl Pfa {
    pub fn new(alphabet: Vec<String>, matrices: Vec<Matrix>, lambda: Vector, gamma: Vector) -> Result<Pfa> {
        if alphabet.is_empty() {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        if matrices.len() != alphabet.len() {
            return Err(Error::Dimension(format!("{} matrices for {} letters", matrices.len(), alphabet.len())));
        }
        let n = lambda.len();
        if n == 0 || gamma.len() != n {
            return Err(Error::Dimension(format!("initial vector of length {n}, final vector of length {}", gamma.len())));
        }
        for (a, m) in alphabet.iter().zip(&matrices) {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("matrix of {a} is {}x{}, expected {n}x{n}", m.rows(), m.cols())));
            }
            if m.entries().iter().any(|v| v.is_negative() || *v > Rational::one()) {
                return Err(Error::Invalid(format!("matrix of {a} has an entry outside [0,1]")));
            }
            for i in 0..n {
                let s: Rational = m.column(i).into_iter().sum();
                if s != Rational::one() {
                    return Err(Error::Invalid(format!("column {} of the matrix of {a} sums to {s}", i + 1)));
                }
            }
        }
        if !lambda.iter().all(is_bit) || lambda.iter().filter(|v| !v.is_zero()).count() != 1 {
            return Err(Error::Invalid("initial vector must have exactly one 1 and zeros elsewhere".into()));
        }
        if !gamma.iter().all(is_bit) {
            return Err(Error::Invalid("final vector must be 0/1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(a) = alphabet.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(Error::Invalid(format!("letter {a} listed twice")));
        }
        Ok(Pfa { alphabet, matrices, lambda, gamma })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn matrix(&self, letter: usize) -> &Matrix {
        &self.matrices[letter]
    }

    pub fn lambda(&self) -> &[Rational] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[Rational] {
        &self.gamma
    }

    pub fn states(&self) -> usize {
        self.lambda.len()
    }

    pub fn letter(&self, name: &str) -> Result<usize> {
        self.alphabet.iter().position(|a| a == name).ok_or_else(|| Error::Unbound(format!("letter {name}")))
    }

    /// Letter indices of a word given by letter names.
    pub fn word(&self, letters: &[&str]) -> Result<Vec<usize>> {
        letters.iter().map(|a| self.letter(a)).collect()
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        match w.iter().find(|&&a| a >= self.alphabet.len()) {
            Some(a) => Err(Error::Unbound(format!("letter index {a} outside an alphabet of {}", self.alphabet.len()))),
            None => Ok(()),
        }
    }

    /// `P^a · x`.
    pub fn step(&self, x: &[Rational], letter: usize) -> Result<Vector> {
        self.check_word(&[letter])?;
        self.matrices[letter].mul_vec(x)
    }

    /// State distribution after reading `w` from `λ`.
    pub fn distribution(&self, w: &[usize]) -> Result<Vector> {
        self.check_word(w)?;
        let mut x = self.lambda.clone();
        for &a in w {
            x = self.matrices[a].mul_vec(&x)?;
        }
        Ok(x)
    }

    /// Probability of ending in a final state after reading `w`.
    pub fn value(&self, w: &[usize]) -> Result<Rational> {
        Ok(dot(&self.gamma, &self.distribution(w)?))
    }

    /// Membership of a nonempty word in the threshold language.
    pub fn accepts(&self, w: &[usize], rel: Relation, theta: &Rational) -> Result<bool> {
        if w.is_empty() {
            return Ok(false);
        }
        Ok(rel.holds(&self.value(w)?, theta))
    }

    /// Letter of the incoming transitions of each state, if unique.
    /// `Ok(None)` marks a state without incoming transitions.
    fn incoming_letters(&self) -> std::result::Result<Vec<Option<usize>>, usize> {
        let n = self.states();
        let mut out = vec![None; n];
        for (j, slot) in out.iter_mut().enumerate() {
            for (a, m) in self.matrices.iter().enumerate() {
                if m.row(j).iter().any(|v| !v.is_zero()) {
                    match slot {
                        Some(b) if *b != a => return Err(j),
                        _ => *slot = Some(a),
                    }
                }
            }
        }
        Ok(out)
    }

    /// Whether every state is entered by a single letter.
    pub fn is_letter_unique(&self) -> bool {
        self.incoming_letters().is_ok()
    }

    /// For each state, the letter entering it (`None` if no transition does),
    /// or an error naming a state entered by two letters.
    pub fn state_letters(&self) -> Result<Vec<Option<usize>>> {
        self.incoming_letters()
            .map_err(|j| Error::Invalid(format!("state {} is entered by more than one letter", j + 1)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PfaFile::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Pfa> {
        let f: PfaFile = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("PFA file: {e}")))?;
        f.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct PfaFile {
    alphabet: Vec<String>,
    matrices: BTreeMap<String, Matrix>,
    lambda: Vector,
    gamma: Vector,
}

impl From<&Pfa> for PfaFile {
    fn from(p: &Pfa) -> PfaFile {
        PfaFile {
            alphabet: p.alphabet.clone(),
            matrices: p.alphabet.iter().cloned().zip(p.matrices.iter().cloned()).collect(),
            lambda: p.lambda.clone(),
            gamma: p.gamma.clone(),
        }
    }
}

impl TryFrom<PfaFile> for Pfa {
    type Error = Error;

    fn try_from(mut f: PfaFile) -> Result<Pfa> {
        let matrices = f
            .alphabet
            .iter()
            .map(|a| f.matrices.remove(a).ok_or_else(|| Error::Invalid(format!("no matrix for letter {a}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = f.matrices.keys().next() {
            return Err(Error::Invalid(format!("matrix for unknown letter {extra}")));
        }
        Pfa::new(f.alphabet, matrices, f.lambda, f.gamma)
    }
}

impl Serialize for Pfa {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PfaFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pfa {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Pfa, D::Error> {
        PfaFile::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

fn unit(n: usize, i: usize) -> Vector {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn same_alphabet(a: &Pfa, b: &Pfa) -> Result<()> {
    if a.alphabet != b.alphabet {
        return Err(Error::Invalid(format!("alphabets {:?} and {:?} differ", a.alphabet, b.alphabet)));
    }
    Ok(())
}

/// Value `1 − ⟦A⟧(w)`: the final states are swapped.
pub fn pfa_complement(a: &Pfa) -> Pfa {
    let gamma = a.gamma.iter().map(|g| Rational::one() - g).collect();
    Pfa { gamma, ..a.clone() }
}

/// Value `p·⟦A⟧(w) + (1 − p)·⟦B⟧(w)` on nonempty words.
///
/// A fresh initial state is prepended; its column mixes the first steps of
/// both automata and nothing returns to it. The empty word gets value 0.
pub fn pfa_convex(p: &Rational, a: &Pfa, b: &Pfa) -> Result<Pfa> {
    same_alphabet(a, b)?;
    if p.is_negative() || *p > Rational::one() {
        return Err(Error::Invalid(format!("mixing weight {p} outside [0,1]")));
    }
    let q = Rational::one() - p;
    let (na, nb) = (a.states(), b.states());
    let n = 1 + na + nb;
    let matrices = a
        .matrices
        .iter()
        .zip(&b.matrices)
        .map(|(ma, mb)| {
            let mut m = Matrix::zeros(n, n);
            let first_a = ma.mul_vec(&a.lambda).expect("square");
            let first_b = mb.mul_vec(&b.lambda).expect("square");
            for (j, fa) in first_a.iter().enumerate() {
                m.set(1 + j, 0, p * fa);
                for i in 0..na {
                    m.set(1 + j, 1 + i, ma.get(j, i).clone());
                }
            }
            for (j, fb) in first_b.iter().enumerate() {
                m.set(1 + na + j, 0, &q * fb);
                for i in 0..nb {
                    m.set(1 + na + j, 1 + na + i, mb.get(j, i).clone());
                }
            }
            m
        })
        .collect();
    let mut gamma = vec![Rational::zero()];
    gamma.extend(a.gamma.iter().cloned());
    gamma.extend(b.gamma.iter().cloned());
    Pfa::new(a.alphabet.clone(), matrices, unit(n, 0), gamma)
}

/// Value `⟦A⟧(w)·⟦B⟧(w)`, by running both automata independently.
pub fn pfa_product(a: &Pfa, b: &Pfa) -> Result<Pfa> {
    same_alphabet(a, b)?;
    let matrices = a.matrices.iter().zip(&b.matrices).map(|(x, y)| x.kron(y)).collect();
    let kron_vec = |x: &[Rational], y: &[Rational]| -> Vector { x.iter().flat_map(|u| y.iter().map(move |v| u * v)).collect() };
    Pfa::new(a.alphabet.clone(), matrices, kron_vec(&a.lambda, &b.lambda), kron_vec(&a.gamma, &b.gamma))
}

/// Equivalent PFA over states `Q × Σ` whose second component is the last
/// letter read, so every state is entered by one letter only. State
/// `(q, a)` has index `a·n + q`; the initial state is `(ι, first letter)`.
/// Unreachable states are kept.
pub fn pfa_letterize(a: &Pfa) -> Pfa {
    let (n, k) = (a.states(), a.alphabet.len());
    let size = n * k;
    let matrices = a
        .matrices
        .iter()
        .enumerate()
        .map(|(letter, m)| {
            let mut out = Matrix::zeros(size, size);
            for j in 0..n {
                for i in 0..n {
                    let p = m.get(j, i);
                    if !p.is_zero() {
                        for from in 0..k {
                            out.set(letter * n + j, from * n + i, p.clone());
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut lambda = vec![Rational::zero(); size];
    lambda[..n].clone_from_slice(&a.lambda);
    let gamma = (0..k).flat_map(|_| a.gamma.iter().cloned()).collect();
    Pfa::new(a.alphabet.clone(), matrices, lambda, gamma).expect("letterization preserves stochasticity")
}

/// Drops states unreachable from the initial state (for display).
pub fn pfa_prune(a: &Pfa) -> Pfa {
    let n = a.states();
    let start = a.lambda.iter().position(|v| !v.is_zero()).expect("validated");
    let mut keep = vec![false; n];
    keep[start] = true;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        for m in &a.matrices {
            for (j, k) in keep.iter_mut().enumerate() {
                if !*k && !m.get(j, i).is_zero() {
                    *k = true;
                    stack.push(j);
                }
            }
        }
    }
    let idx: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let pick = |v: &[Rational]| -> Vector { idx.iter().map(|&i| v[i].clone()).collect() };
    let matrices = a
        .matrices
        .iter()
        .map(|m| Matrix::from_rows(idx.iter().map(|&j| pick(m.row(j))).collect()).expect("rectangular"))
        .collect();
    Pfa::new(a.alphabet.clone(), matrices, pick(&a.lambda), pick(&a.gamma)).expect("closed under reachability")
}

/// The two-state automaton over `{0, 1}` whose value on `u_1…u_k` is the
/// binary fraction `0.u_k…u_1`.
pub fn build_eval_pfa() -> Pfa {
    Pfa::new(
        vec!["0".into(), "1".into()],
        vec![Matrix::from_strs(&[&["1", "1/2"], &["0", "1/2"]]), Matrix::from_strs(&[&["1/2", "0"], &["1/2", "1"]])],
        vec![Rational::one(), Rational::zero()],
        vec![Rational::zero(), Rational::one()],
    )
    .expect("stochastic")
}

/// `0.u_k…u_1` in binary for the bit string `u_1…u_k`.
pub fn reversed_binary(bits: &[bool]) -> Rational {
    bits.iter().rev().enumerate().fold(Rational::zero(), |acc, (i, &b)| {
        if b { acc + Rational::pow2(-(i as i64) - 1) } else { acc }
    })
}

/// Images of the letters of an alphabet, as strings over `{0, 1}`.
pub type Morphism = Vec<Vec<bool>>;

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Invalid(format!("bit string contains {other:?}"))),
        })
        .collect()
}

/// `f(0) = 10`, `f(1) = 11` applied to every image, so all images start with 1.
pub fn normalize_morphism(f: &[Vec<bool>]) -> Morphism {
    f.iter().map(|img| img.iter().flat_map(|&b| [true, b]).collect()).collect()
}

/// `f(w)` for a word of letter indices.
pub fn apply_morphism(f: &[Vec<bool>], w: &[usize]) -> Vec<bool> {
    w.iter().flat_map(|&a| f[a].iter().copied()).collect()
}

/// Automaton over `alphabet` with value `0.f(w)` read backwards: letter `a`
/// acts as the product of the evaluation matrices along `f(a)`.
fn morphism_pfa(alphabet: &[String], f: &[Vec<bool>]) -> Result<Pfa> {
    let b = build_eval_pfa();
    let matrices = f
        .iter()
        .map(|img| {
            img.iter().try_fold(Matrix::identity(2), |acc, &bit| b.matrix(bit as usize).mul(&acc))
        })
        .collect::<Result<Vec<_>>>()?;
    Pfa::new(alphabet.to_vec(), matrices, b.lambda.clone(), b.gamma.clone())
}

/// A PFA with value exactly 1/2 on the nonempty words where the normalized
/// morphisms agree.
pub fn pcp_to_pfa(alphabet: &[String], f1: &[Vec<bool>], f2: &[Vec<bool>]) -> Result<Pfa> {
    for f in [f1, f2] {
        if f.len() != alphabet.len() {
            return Err(Error::Dimension(format!("{} images for {} letters", f.len(), alphabet.len())));
        }
        if let Some(a) = f.iter().position(|img| img.is_empty()) {
            return Err(Error::Invalid(format!("letter {} has an empty image", alphabet[a])));
        }
    }
    let a1 = morphism_pfa(alphabet, &normalize_morphism(f1))?;
    let a2 = morphism_pfa(alphabet, &normalize_morphism(f2))?;
    pfa_convex(&Rational::half(), &a1, &pfa_complement(&a2))
}

/// Value `r·(1 − r)` where `r` is the value of `A`; it reaches 1/4 exactly
/// when `r = 1/2`.
pub fn pfa_square_trick(a: &Pfa) -> Result<Pfa> {
    pfa_product(a, &pfa_complement(a))
}

/// All words of length `1..=max_len` over `k` letters, shortest first.
pub fn words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..k).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub mod examples {
    use super::*;

    /// Two states, letters `a` and `b`: `a` moves to state 1 with probability
    /// 1/3 from anywhere, `b` swaps the states; state 1 is initial and final.
    pub fn two_state_pfa() -> Pfa {
        Pfa::new(
            vec!["a".into(), "b".into()],
            vec![Matrix::from_strs(&[&["1/3", "1/3"], &["2/3", "2/3"]]), Matrix::from_strs(&[&["0", "1"], &["1", "0"]])],
            vec![Rational::one(), Rational::zero()],
            vec![Rational::one(), Rational::zero()],
        )
        .expect("stochastic")
    }
}

#[cfg(test)]
mod tests {
    use super::examples::two_state_pfa;
    use super::*;
    use crate::rational::q;

    #[test]
    fn example_values() {
        let a = two_state_pfa();
        for k in 0..=10 {
            let mut w = vec![0];
            w.extend(std::iter::repeat_n(1, k));
            assert_eq!(a.value(&w).unwrap(), if k % 2 == 0 { q(1, 3) } else { q(2, 3) });
        }
        assert!(a.accepts(&[1, 1], Relation::Ge, &Rational::half()).unwrap());
        assert!(!a.accepts(&[], Relation::Ge, &Rational::zero()).unwrap());
        let image = [Rational::zero(), q(1, 3), q(2, 3), Rational::one()];
        for w in words(2, 8) {
            assert!(image.contains(&a.value(&w).unwrap()));
        }
    }

    #[test]
    fn closures_on_example() {
        let a = two_state_pfa();
        assert_eq!(pfa_complement(&a).value(&[0, 1]).unwrap(), q(1, 3));
        assert_eq!(pfa_product(&a, &a).unwrap().value(&[0, 1]).unwrap(), q(4, 9));
        let c = pfa_convex(&Rational::one(), &a, &pfa_complement(&a)).unwrap();
        for w in words(2, 5) {
            assert_eq!(c.value(&w).unwrap(), a.value(&w).unwrap());
        }
    }

    #[test]
    fn letterized_example_matches_printed_matrices() {
        let l = pfa_letterize(&two_state_pfa());
        assert_eq!(
            *l.matrix(0),
            Matrix::from_strs(&[
                &["1/3", "1/3", "1/3", "1/3"],
                &["2/3", "2/3", "2/3", "2/3"],
                &["0", "0", "0", "0"],
                &["0", "0", "0", "0"]
            ])
        );
        assert_eq!(
            *l.matrix(1),
            Matrix::from_strs(&[&["0", "0", "0", "0"], &["0", "0", "0", "0"], &["0", "1", "0", "1"], &["1", "0", "1", "0"]])
        );
        assert_eq!(l.lambda(), &crate::linalg::ints(&[1, 0, 0, 0])[..]);
        assert_eq!(l.gamma(), &crate::linalg::ints(&[1, 0, 1, 0])[..]);
        assert!(l.is_letter_unique());
        assert!(!two_state_pfa().is_letter_unique());
    }

    #[test]
    fn evaluation_pfa() {
        let b = build_eval_pfa();
        assert_eq!(b.value(&[0]).unwrap(), Rational::zero());
        assert_eq!(b.value(&[1]).unwrap(), Rational::half());
        assert_eq!(b.value(&[0, 1]).unwrap(), Rational::half());
        assert_eq!(b.value(&[1, 0]).unwrap(), q(1, 4));
    }

    #[test]
    fn pcp_examples() {
        let sigma: Vec<String> = vec!["a".into()];
        let p = pcp_to_pfa(&sigma, &[parse_bits("1").unwrap()], &[parse_bits("11").unwrap()]).unwrap();
        assert_ne!(p.value(&[0]).unwrap(), Rational::half());
        let same = pcp_to_pfa(&sigma, &[parse_bits("01").unwrap()], &[parse_bits("01").unwrap()]).unwrap();
        for w in words(1, 4) {
            assert_eq!(same.value(&w).unwrap(), Rational::half());
        }
        assert!(pcp_to_pfa(&sigma, &[vec![]], &[vec![true]]).is_err());
    }

    #[test]
    fn square_trick_values() {
        let a = two_state_pfa();
        let b = pfa_square_trick(&a).unwrap();
        assert_eq!(b.value(&[0]).unwrap(), q(2, 9));
    }

    #[test]
    fn json_round_trip() {
        let a = two_state_pfa();
        assert_eq!(Pfa::from_json(&a.to_json()).unwrap(), a);
        let text = r#"{"alphabet":["a","b"],"matrices":{"a":[["1/3","1/3"],["2/3","2/3"]],"b":[["0","1"],["1","0"]]},"lambda":["1","0"],"gamma":["1","0"]}"#;
        assert_eq!(Pfa::from_json(text).unwrap(), a);
        assert!(Pfa::from_json(r#"{"alphabet":["a"],"matrices":{"a":[["1/2"]]},"lambda":["1"],"gamma":["1"]}"#).is_err());
    }
}
