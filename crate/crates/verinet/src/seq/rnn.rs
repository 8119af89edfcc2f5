//! Elman networks: a recurrent input layer over `h ⫿ x` and an output layer.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_set, argmax_set_f64, to_f64, vcat, Matrix, Vector};
use crate::nn::{Activation, Layer};
use crate::rational::Rational;

use super::pfa::{pfa_letterize, Pfa};
use super::Relation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rnn {
    input: Layer,
    output: Layer,
    h0: Vector,
}

impl Rnn {
    /// `input` maps `n + m` values to `n`, `output` maps `n` to `o`.
    pub fn new(input: Layer, output: Layer, h0: Vector) -> Result<Rnn> {
        let n = h0.len();
        if n == 0 {
            return Err(Error::Dimension("empty hidden state".into()));
        }
        if input.out_dim() != n || input.in_dim() <= n {
            return Err(Error::Dimension(format!(
                "input layer is {}→{} for a hidden state of size {n}",
                input.in_dim(),
                input.out_dim()
            )));
        }
        if output.in_dim() != n {
            return Err(Error::Dimension(format!("output layer reads {} values, hidden state has {n}", output.in_dim())));
        }
        Ok(Rnn { input, output, h0 })
    }

    pub fn state_dim(&self) -> usize {
        self.h0.len()
    }

    pub fn in_dim(&self) -> usize {
        self.input.in_dim() - self.state_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn input_layer(&self) -> &Layer {
        &self.input
    }

    pub fn output_layer(&self) -> &Layer {
        &self.output
    }

    pub fn h0(&self) -> &[Rational] {
        &self.h0
    }

    /// `(f, g)`: activations of the input and output layers.
    pub fn activations(&self) -> (Activation, Activation) {
        (self.input.activation, self.output.activation)
    }

    fn check_symbol(&self, x: &[Rational]) -> Result<()> {
        if x.len() != self.in_dim() {
            return Err(Error::Dimension(format!("input symbol of size {}, expected {}", x.len(), self.in_dim())));
        }
        Ok(())
    }

    /// `δ(h, x) = ⟦L_in⟧(h ⫿ x)`.
    pub fn step(&self, h: &[Rational], x: &[Rational]) -> Result<Vector> {
        self.check_symbol(x)?;
        if h.len() != self.state_dim() {
            return Err(Error::Dimension(format!("hidden state of size {}, expected {}", h.len(), self.state_dim())));
        }
        self.input.eval(&vcat(h, x))
    }

    /// Hidden states `h(1) … h(ℓ)`.
    pub fn states(&self, seq: &[Vector]) -> Result<Vec<Vector>> {
        let mut h = self.h0.clone();
        seq.iter()
            .map(|x| {
                h = self.step(&h, x)?;
                Ok(h.clone())
            })
            .collect()
    }

    /// Sequence-to-sequence: one output per input symbol.
    pub fn s2s(&self, seq: &[Vector]) -> Result<Vec<Vector>> {
        self.states(seq)?.iter().map(|h| self.output.eval(h)).collect()
    }

    /// Sequence-to-vector: the output at the last state.
    pub fn s2v(&self, seq: &[Vector]) -> Result<Vector> {
        self.output.eval(&self.last_state(seq)?)
    }

    fn last_state(&self, seq: &[Vector]) -> Result<Vector> {
        if seq.is_empty() {
            return Err(Error::Invalid("sequences are nonempty".into()));
        }
        Ok(self.states(seq)?.pop().expect("nonempty"))
    }

    pub fn s2s_f64(&self, seq: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut h = to_f64(&self.h0);
        let mut out = Vec::with_capacity(seq.len());
        for x in seq {
            if x.len() != self.in_dim() {
                return Err(Error::Dimension(format!("input symbol of size {}, expected {}", x.len(), self.in_dim())));
            }
            let mut hx = h.clone();
            hx.extend_from_slice(x);
            h = self.input.eval_f64(&hx)?;
            out.push(self.output.eval_f64(&h)?);
        }
        Ok(out)
    }

    pub fn s2v_f64(&self, seq: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.s2s_f64(seq)?.pop().ok_or_else(|| Error::Invalid("sequences are nonempty".into()))
    }

    /// Whether the single output at the last state satisfies `⋈ θ`, decided
    /// exactly. A sigmoid output is compared through its argument, using
    /// `σ(t) ⋈ 1/2 ⟺ t ⋈ 0` and `0 < σ(t) < 1`.
    pub fn score_relation(&self, seq: &[Vector], rel: Relation, theta: &Rational) -> Result<bool> {
        if self.out_dim() != 1 {
            return Err(Error::Dimension(format!("a classifier has one output, this network has {}", self.out_dim())));
        }
        let h = self.last_state(seq)?;
        match self.output.activation {
            Activation::Sigmoid => {
                let t = &self.output.pre_activation(&h)?[0];
                if *theta == Rational::half() {
                    Ok(rel.holds(t, &Rational::zero()))
                } else if !theta.is_positive() {
                    Ok(rel != Relation::Eq)
                } else if *theta >= Rational::one() {
                    Ok(false)
                } else {
                    Err(Error::ExactMode(format!("sigmoid compared with the threshold {theta}")))
                }
            }
            _ => Ok(rel.holds(&self.output.eval(&h)?[0], theta)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Rnn> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("RNN file: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct RnnFile {
    #[serde(rename = "type")]
    kind: String,
    input: Layer,
    output: Layer,
    h0: Vector,
}

impl Serialize for Rnn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RnnFile { kind: "rnn".into(), input: self.input.clone(), output: self.output.clone(), h0: self.h0.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rnn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rnn, D::Error> {
        let f = RnnFile::deserialize(d)?;
        if f.kind != "rnn" {
            return Err(serde::de::Error::custom(format!("expected type \"rnn\", found {:?}", f.kind)));
        }
        Rnn::new(f.input, f.output, f.h0).map_err(serde::de::Error::custom)
    }
}

/// One-hot encoding of an ordered alphabet: the `i`-th letter is the `i`-th
/// standard basis vector. Decoding picks the letter at the smallest index of
/// a maximal entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneHotCodec {
    alphabet: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl OneHotCodec {
    pub fn new<S: AsRef<str>>(alphabet: &[S]) -> Result<OneHotCodec> {
        if alphabet.is_empty() {
            return Err(Error::Invalid("empty alphabet".into()));
        }
        let alphabet: Vec<String> = alphabet.iter().map(|a| a.as_ref().to_string()).collect();
        let index: BTreeMap<String, usize> = alphabet.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        if index.len() != alphabet.len() {
            return Err(Error::Invalid("repeated letter".into()));
        }
        Ok(OneHotCodec { alphabet, index })
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn index(&self, letter: &str) -> Result<usize> {
        self.index.get(letter).copied().ok_or_else(|| Error::Unbound(format!("letter {letter}")))
    }

    pub fn encode_index(&self, i: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.len()];
        v[i] = Rational::one();
        v
    }

    pub fn encode(&self, letter: &str) -> Result<Vector> {
        Ok(self.encode_index(self.index(letter)?))
    }

    pub fn encode_word<S: AsRef<str>>(&self, w: &[S]) -> Result<Vec<Vector>> {
        w.iter().map(|a| self.encode(a.as_ref())).collect()
    }

    pub fn encode_indices(&self, w: &[usize]) -> Vec<Vector> {
        w.iter().map(|&i| self.encode_index(i)).collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::Dimension(format!("vector of size {n} for an alphabet of {}", self.len())));
        }
        Ok(())
    }

    pub fn decode(&self, x: &[Rational]) -> Result<&str> {
        self.check_len(x.len())?;
        Ok(&self.alphabet[argmax_set(x)?[0] - 1])
    }

    pub fn decode_f64(&self, x: &[f64]) -> Result<&str> {
        self.check_len(x.len())?;
        Ok(&self.alphabet[argmax_set_f64(x)?[0] - 1])
    }

    pub fn decode_seq(&self, xs: &[Vector]) -> Result<Vec<&str>> {
        xs.iter().map(|x| self.decode(x)).collect()
    }
}

/// Membership of a nonempty word (letter indices) in `{w | s2v(enc(w)) ⋈ θ}`.
pub fn rnn_lang_member(r: &Rnn, codec: &OneHotCodec, w: &[usize], rel: Relation, theta: &Rational) -> Result<bool> {
    if codec.len() != r.in_dim() {
        return Err(Error::Dimension(format!("alphabet of {} letters, network reads {}", codec.len(), r.in_dim())));
    }
    if w.is_empty() {
        return Ok(false);
    }
    if let Some(&a) = w.iter().find(|&&a| a >= codec.len()) {
        return Err(Error::Unbound(format!("letter index {a}")));
    }
    r.score_relation(&codec.encode_indices(w), rel, theta)
}

/// A (ReLU, σ)-network whose language at threshold 1/2 equals the language
/// `⋈ θ` of the automaton. The automaton is letterized first unless every
/// state is already entered by a single letter; the hidden state then tracks
/// the state distribution exactly.
pub fn pfa_to_rnn(a: &Pfa, theta: &Rational) -> Result<Rnn> {
    if theta.is_negative() || *theta > Rational::one() {
        return Err(Error::Invalid(format!("threshold {theta} outside [0,1]")));
    }
    let lettered;
    let a = if a.is_letter_unique() {
        a
    } else {
        lettered = pfa_letterize(a);
        &lettered
    };
    let (n, m) = (a.states(), a.alphabet().len());
    let letters = a.state_letters()?;
    let sum = a.matrices().iter().skip(1).try_fold(a.matrix(0).clone(), |acc, p| acc.add(p))?;
    let mut c = Matrix::zeros(n, m);
    for (j, l) in letters.iter().enumerate() {
        if let Some(k) = l {
            c.set(j, *k, Rational::one());
        }
    }
    let input = Layer::new(sum.hconcat(&c)?, vec![-Rational::one(); n], Activation::Relu)?;
    let output = Layer::new(Matrix::from_rows(vec![a.gamma().to_vec()])?, vec![-theta.clone()], Activation::Sigmoid)?;
    Rnn::new(input, output, a.lambda().to_vec())
}

/// Shortest word (letter indices, ties broken by letter order) whose output
/// satisfies `⋈ θ`, or `None` when the language is empty. Requires heaviside
/// hidden units so that every state after the first step is a 0/1 vector.
pub fn heaviside_rnn_emptiness(r: &Rnn, rel: Relation, theta: &Rational) -> Result<Option<Vec<usize>>> {
    if r.input.activation != Activation::Heaviside {
        return Err(Error::Unsupported(format!(
            "emptiness needs heaviside hidden units, found {}",
            r.input.activation.name()
        )));
    }
    if r.out_dim() != 1 {
        return Err(Error::Dimension(format!("a classifier has one output, this network has {}", r.out_dim())));
    }
    let m = r.in_dim();
    let codec_unit = |k: usize| {
        let mut v = vec![Rational::zero(); m];
        v[k] = Rational::one();
        v
    };
    let accepts = |h: &Vector| -> Result<bool> {
        match r.output.activation {
            Activation::Sigmoid => {
                let t = &r.output.pre_activation(h)?[0];
                if *theta == Rational::half() {
                    Ok(rel.holds(t, &Rational::zero()))
                } else {
                    Err(Error::ExactMode(format!("sigmoid compared with the threshold {theta}")))
                }
            }
            _ => Ok(rel.holds(&r.output.eval(h)?[0], theta)),
        }
    };
    let mut seen: BTreeSet<Vector> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for k in 0..m {
        let h = r.step(&r.h0, &codec_unit(k))?;
        if seen.insert(h.clone()) {
            queue.push_back((h, vec![k]));
        }
    }
    while let Some((h, w)) = queue.pop_front() {
        if accepts(&h)? {
            return Ok(Some(w));
        }
        for k in 0..m {
            let next = r.step(&h, &codec_unit(k))?;
            if seen.insert(next.clone()) {
                let mut longer = w.clone();
                longer.push(k);
                queue.push_back((next, longer));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ints;
    use crate::rational::q;
    use crate::seq::pfa::examples::two_state_pfa;

    #[test]
    fn decoding_examples() {
        let c = OneHotCodec::new(&["a", "b"]).unwrap();
        assert_eq!(c.decode(&[q(7, 10), q(1, 2)]).unwrap(), "a");
        assert_eq!(c.decode(&[q(1, 2), q(1, 2)]).unwrap(), "a");
        assert_eq!(c.decode(&[q(1, 5), q(1, 2)]).unwrap(), "b");
        assert_eq!(c.decode(&c.encode("b").unwrap()).unwrap(), "b");
        assert!(OneHotCodec::new::<&str>(&[]).is_err());
    }

    #[test]
    fn zero_network_outputs_bias() {
        let input = Layer::new(Matrix::zeros(2, 3), ints(&[0, 0]), Activation::Relu).unwrap();
        let output = Layer::new(Matrix::from_rows(vec![ints(&[1, 1])]).unwrap(), ints(&[5]), Activation::Id).unwrap();
        let r = Rnn::new(input, output, ints(&[0, 0])).unwrap();
        let seq = vec![ints(&[1]), ints(&[-3]), ints(&[2])];
        assert_eq!(r.s2s(&seq).unwrap(), vec![ints(&[5]); 3]);
        assert_eq!(r.s2v(&seq).unwrap(), ints(&[5]));
    }

    #[test]
    fn compiled_example_language() {
        let a = two_state_pfa();
        let r = pfa_to_rnn(&a, &Rational::half()).unwrap();
        let codec = OneHotCodec::new(a.alphabet()).unwrap();
        assert!(rnn_lang_member(&r, &codec, &[1, 1], Relation::Ge, &Rational::half()).unwrap());
        assert!(!rnn_lang_member(&r, &codec, &[0], Relation::Ge, &Rational::half()).unwrap());
        let l = pfa_letterize(&a);
        let h = r.step(r.h0(), &codec.encode("a").unwrap()).unwrap();
        assert_eq!(h, l.step(l.lambda(), 0).unwrap());
        assert_eq!(h, vec![q(1, 3), q(2, 3), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn json_round_trip() {
        let r = pfa_to_rnn(&two_state_pfa(), &q(1, 3)).unwrap();
        assert_eq!(Rnn::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn parity_emptiness() {
        // h1 flips on every letter; output h1 accepted when ≥ 1/2.
        let input =
            Layer::new(Matrix::from_rows(vec![ints(&[-1, 1])]).unwrap(), ints(&[0]), Activation::Heaviside).unwrap();
        let output = Layer::new(Matrix::from_rows(vec![ints(&[1])]).unwrap(), ints(&[0]), Activation::Relu).unwrap();
        let r = Rnn::new(input, output, ints(&[1])).unwrap();
        let w = heaviside_rnn_emptiness(&r, Relation::Ge, &Rational::half()).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        let zero = Layer::new(Matrix::zeros(1, 1), ints(&[0]), Activation::Relu).unwrap();
        let input =
            Layer::new(Matrix::from_rows(vec![ints(&[-1, 1])]).unwrap(), ints(&[0]), Activation::Heaviside).unwrap();
        let dead = Rnn::new(input, zero, ints(&[1])).unwrap();
        assert_eq!(heaviside_rnn_emptiness(&dead, Relation::Ge, &Rational::half()).unwrap(), None);
    }
}
