//! Attention heads, encoder and decoder layers, and transformers.
//!
//! Evaluation is generic over [`Scalar`]: `Rational` for exact runs (hard
//! attention only, no layer norm) and `f64` for everything else.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{Matrix, Vector};
use crate::nn::{Activation, Ffnn, Layer};
use crate::rational::Rational;
use crate::seq::{OneHotCodec, Relation};

/// ε of the layer norm.
pub const NORM_EPSILON: f64 = 1e-5;

/// Number type the transformer can be evaluated over.
pub trait Scalar: Clone + PartialOrd + Debug + Send + Sync {
    fn zero() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div_count(&self, k: usize) -> Self;
    fn layer(l: &Layer, x: &[Self]) -> Result<Vec<Self>>;
    fn softmax(a: &[Self]) -> Result<Vec<Self>>;
    /// `x / √n`.
    fn scale_inv_sqrt(&self, n: usize) -> Result<Self>;
    fn layer_norm(x: &[Self]) -> Result<Vec<Self>>;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn div_count(&self, k: usize) -> Self {
        self / &Rational::from_int(k as i64)
    }

    fn layer(l: &Layer, x: &[Self]) -> Result<Vec<Self>> {
        l.eval(x)
    }

    fn softmax(_: &[Self]) -> Result<Vec<Self>> {
        Err(Error::ExactMode("softmax attention".into()))
    }

    fn scale_inv_sqrt(&self, n: usize) -> Result<Self> {
        let r = (n as f64).sqrt().round() as usize;
        if r * r == n {
            Ok(self.div_count(r))
        } else {
            Err(Error::ExactMode(format!("scaling by 1/√{n}")))
        }
    }

    fn layer_norm(_: &[Self]) -> Result<Vec<Self>> {
        Err(Error::ExactMode("layer norm".into()))
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }

    fn div_count(&self, k: usize) -> Self {
        self / k as f64
    }

    fn layer(l: &Layer, x: &[Self]) -> Result<Vec<Self>> {
        l.eval_f64(x)
    }

    fn softmax(a: &[Self]) -> Result<Vec<Self>> {
        Ok(crate::nn::softmax(a))
    }

    fn scale_inv_sqrt(&self, n: usize) -> Result<Self> {
        Ok(self / (n as f64).sqrt())
    }

    fn layer_norm(x: &[Self]) -> Result<Vec<Self>> {
        Ok(layer_norm(x, NORM_EPSILON))
    }
}

/// `(x − mean) / √(variance + ε)`.
pub fn layer_norm(x: &[f64], epsilon: f64) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let d = (var + epsilon).sqrt();
    x.iter().map(|v| (v - mean) / d).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightFn {
    #[serde(rename = "softmax")]
    Softmax,
    #[serde(rename = "min-argmax")]
    MinArgmax,
    #[serde(rename = "avg-argmax")]
    AvgArgmax,
}

fn argmax_positions<T: PartialOrd>(a: &[T]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for (i, v) in a.iter().enumerate() {
        match best.first() {
            None => best.push(i),
            Some(&b) if *v > a[b] => best = vec![i],
            Some(&b) if *v == a[b] => best.push(i),
            _ => {}
        }
    }
    best
}

/// The weight function applied to a nonempty score sequence.
pub fn weights<T: Scalar>(kind: WeightFn, scores: &[T]) -> Result<Vec<T>> {
    if scores.is_empty() {
        return Err(Error::Invalid("weights of an empty sequence".into()));
    }
    let one = T::from_rational(&Rational::one());
    let mut out = vec![T::zero(); scores.len()];
    match kind {
        WeightFn::Softmax => return T::softmax(scores),
        WeightFn::MinArgmax => out[argmax_positions(scores)[0]] = one,
        WeightFn::AvgArgmax => {
            let top = argmax_positions(scores);
            let p = one.div_count(top.len());
            for i in top {
                out[i] = p.clone();
            }
        }
    }
    Ok(out)
}

fn mat_vec<T: Scalar>(m: &Matrix, x: &[T]) -> Vec<T> {
    (0..m.rows())
        .map(|i| {
            m.row(i).iter().zip(x).fold(T::zero(), |acc, (w, v)| {
                if w.is_zero() { acc } else { acc.add(&T::from_rational(w).mul(v)) }
            })
        })
        .collect()
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

fn add_vec<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn check_dim(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what} has dimension {got}, expected {want}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionHead {
    #[serde(rename = "Q")]
    q: Matrix,
    #[serde(rename = "K")]
    k: Matrix,
    #[serde(rename = "V")]
    v: Matrix,
    weights: WeightFn,
    #[serde(default)]
    scaling: bool,
}

impl AttentionHead {
    pub fn new(q: Matrix, k: Matrix, v: Matrix, weights: WeightFn, scaling: bool) -> Result<AttentionHead> {
        let h = AttentionHead { q, k, v, weights, scaling };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        let n = self.q.cols();
        if n == 0 || self.q.rows() == 0 || self.v.rows() == 0 {
            return Err(Error::Dimension("attention matrices must be nonempty".into()));
        }
        if self.k.cols() != n || self.v.cols() != n || self.k.rows() != self.q.rows() {
            return Err(Error::Dimension(format!(
                "Q is {}x{}, K is {}x{}, V is {}x{}",
                self.q.rows(),
                self.q.cols(),
                self.k.rows(),
                self.k.cols(),
                self.v.rows(),
                self.v.cols()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.q.cols()
    }

    pub fn key_dim(&self) -> usize {
        self.q.rows()
    }

    pub fn value_dim(&self) -> usize {
        self.v.rows()
    }

    pub fn weight_fn(&self) -> WeightFn {
        self.weights
    }

    /// `Σ p_i · V z_i` with `p = Weights(⟨Q x, K z_i⟩)`.
    pub fn apply<T: Scalar>(&self, context: &[Vec<T>], x: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        check_dim("query vector", x.len(), n)?;
        if context.is_empty() {
            return Err(Error::Invalid("attention over an empty context".into()));
        }
        let q = mat_vec(&self.q, x);
        let scores = context
            .iter()
            .map(|z| {
                check_dim("context vector", z.len(), n)?;
                let a = dot(&q, &mat_vec(&self.k, z));
                if self.scaling { a.scale_inv_sqrt(self.key_dim()) } else { Ok(a) }
            })
            .collect::<Result<Vec<T>>>()?;
        let p = weights(self.weights, &scores)?;
        let mut y = vec![T::zero(); self.value_dim()];
        if self.weights == WeightFn::AvgArgmax {
            // Sum first and divide once, so equal values average to themselves in floats.
            let chosen: Vec<usize> = (0..p.len()).filter(|&i| p[i] != T::zero()).collect();
            for &i in &chosen {
                y = add_vec(&y, &mat_vec(&self.v, &context[i]));
            }
            return Ok(y.iter().map(|v| v.div_count(chosen.len())).collect());
        }
        for (pi, z) in p.iter().zip(context) {
            if *pi != T::zero() {
                y = add_vec(&y, &mat_vec(&self.v, z).iter().map(|v| pi.mul(v)).collect::<Vec<_>>());
            }
        }
        Ok(y)
    }
}

/// Several heads with shared dimensions and a combining matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttentionLayer {
    heads: Vec<AttentionHead>,
    #[serde(rename = "W")]
    w: Matrix,
}

impl AttentionLayer {
    pub fn new(heads: Vec<AttentionHead>, w: Matrix) -> Result<AttentionLayer> {
        let l = AttentionLayer { heads, w };
        l.validate()?;
        Ok(l)
    }

    fn validate(&self) -> Result<()> {
        let Some(h0) = self.heads.first() else {
            return Err(Error::Invalid("an attention layer needs a head".into()));
        };
        for h in &self.heads {
            h.validate()?;
            if (h.dim(), h.key_dim(), h.value_dim()) != (h0.dim(), h0.key_dim(), h0.value_dim()) {
                return Err(Error::Dimension("heads of a layer must share their dimensions".into()));
            }
        }
        check_dim("combiner rows", self.w.rows(), h0.dim())?;
        check_dim("combiner columns", self.w.cols(), self.heads.len() * h0.value_dim())
    }

    pub fn dim(&self) -> usize {
        self.heads[0].dim()
    }

    pub fn heads(&self) -> &[AttentionHead] {
        &self.heads
    }

    fn at<T: Scalar>(&self, context: &[Vec<T>], x: &[T]) -> Result<Vec<T>> {
        let mut cat = Vec::new();
        for h in &self.heads {
            cat.extend(h.apply(context, x)?);
        }
        Ok(mat_vec(&self.w, &cat))
    }

    /// Position `i` of the result attends over `context` with query `xs[i]`.
    pub fn cross<T: Scalar>(&self, context: &[Vec<T>], xs: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        exec.map(xs, |x| self.at(context, x)).into_iter().collect()
    }

    pub fn self_attend<T: Scalar>(&self, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        self.cross(w, w, exec)
    }

    /// Position `i` attends over the prefix `x_1 … x_i`.
    pub fn masked<T: Scalar>(&self, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        exec.map_range(w.len(), |i| self.at(&w[..=i], &w[i])).into_iter().collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Off,
    Layernorm,
}

fn norm_seq<T: Scalar>(norm: Norm, w: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
    match norm {
        Norm::Off => Ok(w),
        Norm::Layernorm => w.iter().map(|x| T::layer_norm(x)).collect(),
    }
}

fn ffnn_seq<T: Scalar>(n: &Ffnn, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
    exec.map(w, |x| n.layers().iter().try_fold(x.clone(), |acc, l| T::layer(l, &acc))).into_iter().collect()
}

fn residual<T: Scalar>(on: bool, w: &[Vec<T>], r: Vec<Vec<T>>) -> Vec<Vec<T>> {
    if on { w.iter().zip(&r).map(|(a, b)| add_vec(a, b)).collect() } else { r }
}

/// Encoder layer: `Norm(ŵ + N(ŵ))` with `ŵ = Norm(w + A(w))`. Each residual
/// connection can be dropped, the attention can be masked and the norm can
/// be the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderLayer {
    pub attention: AttentionLayer,
    pub ffn: Ffnn,
    pub masked: bool,
    pub residual: bool,
    pub ffn_residual: bool,
    pub norm: Norm,
}

impl EncoderLayer {
    pub fn new(attention: AttentionLayer, ffn: Ffnn, masked: bool, residual: bool, ffn_residual: bool, norm: Norm) -> Result<EncoderLayer> {
        let n = attention.dim();
        check_dim("encoder network input", ffn.in_dim(), n)?;
        check_dim("encoder network output", ffn.out_dim(), n)?;
        Ok(EncoderLayer { attention, ffn, masked, residual, ffn_residual, norm })
    }

    pub fn dim(&self) -> usize {
        self.attention.dim()
    }

    pub fn apply<T: Scalar>(&self, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        for x in w {
            check_dim("encoder input", x.len(), self.dim())?;
        }
        let a = if self.masked { self.attention.masked(w, exec)? } else { self.attention.self_attend(w, exec)? };
        let hat = norm_seq(self.norm, residual(self.residual, w, a))?;
        let n = ffnn_seq(&self.ffn, &hat, exec)?;
        norm_seq(self.norm, residual(self.ffn_residual, &hat, n))
    }
}

#[derive(Serialize, Deserialize)]
struct EncoderFile {
    attention: AttentionLayer,
    ffn: Ffnn,
    #[serde(default)]
    masked: bool,
    #[serde(default = "yes")]
    residual: bool,
    #[serde(default)]
    ffn_residual: Option<bool>,
    #[serde(default)]
    norm: Norm,
}

fn yes() -> bool {
    true
}

impl Serialize for EncoderLayer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EncoderFile {
            attention: self.attention.clone(),
            ffn: self.ffn.clone(),
            masked: self.masked,
            residual: self.residual,
            ffn_residual: Some(self.ffn_residual),
            norm: self.norm,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EncoderLayer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<EncoderLayer, D::Error> {
        let f = EncoderFile::deserialize(d)?;
        f.attention.validate().map_err(serde::de::Error::custom)?;
        let ffn_residual = f.ffn_residual.unwrap_or(f.residual);
        EncoderLayer::new(f.attention, f.ffn, f.masked, f.residual, ffn_residual, f.norm).map_err(serde::de::Error::custom)
    }
}

/// Decoder layer: masked self-attention, cross-attention into the encoder
/// output, then the network, each followed by residual and norm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderLayer {
    pub masked_attention: AttentionLayer,
    pub cross_attention: AttentionLayer,
    pub ffn: Ffnn,
    #[serde(default = "yes")]
    pub residual: bool,
    #[serde(default)]
    pub norm: Norm,
}

impl DecoderLayer {
    pub fn new(masked_attention: AttentionLayer, cross_attention: AttentionLayer, ffn: Ffnn, residual: bool, norm: Norm) -> Result<DecoderLayer> {
        let n = masked_attention.dim();
        check_dim("cross attention", cross_attention.dim(), n)?;
        check_dim("decoder network input", ffn.in_dim(), n)?;
        check_dim("decoder network output", ffn.out_dim(), n)?;
        Ok(DecoderLayer { masked_attention, cross_attention, ffn, residual, norm })
    }

    pub fn dim(&self) -> usize {
        self.masked_attention.dim()
    }

    pub fn apply<T: Scalar>(&self, w_enc: &[Vec<T>], w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        for x in w.iter().chain(w_enc) {
            check_dim("decoder input", x.len(), self.dim())?;
        }
        let w1 = norm_seq(self.norm, residual(self.residual, w, self.masked_attention.masked(w, exec)?))?;
        let w2 = norm_seq(self.norm, residual(self.residual, &w1, self.cross_attention.cross(w_enc, &w1, exec)?))?;
        let n = ffnn_seq(&self.ffn, &w2, exec)?;
        norm_seq(self.norm, residual(self.residual, &w2, n))
    }
}

/// `N_out ∘ E_κ ∘ … ∘ E_1 ∘ N_in`, applied positionwise where needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderOnlyTransformer {
    input: Ffnn,
    layers: Vec<EncoderLayer>,
    output: Ffnn,
}

impl EncoderOnlyTransformer {
    pub fn new(input: Ffnn, layers: Vec<EncoderLayer>, output: Ffnn) -> Result<EncoderOnlyTransformer> {
        let n = input.out_dim();
        for l in &layers {
            check_dim("encoder layer", l.dim(), n)?;
        }
        check_dim("output network input", output.in_dim(), n)?;
        Ok(EncoderOnlyTransformer { input, layers, output })
    }

    pub fn in_dim(&self) -> usize {
        self.input.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.output.out_dim()
    }

    pub fn state_dim(&self) -> usize {
        self.input.out_dim()
    }

    pub fn layers(&self) -> &[EncoderLayer] {
        &self.layers
    }

    /// Hidden sequences after `N_in` and after every encoder layer.
    pub fn trace<T: Scalar>(&self, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<Vec<T>>>> {
        if w.is_empty() {
            return Err(Error::Invalid("sequences are nonempty".into()));
        }
        for x in w {
            check_dim("input symbol", x.len(), self.in_dim())?;
        }
        let mut out = vec![ffnn_seq(&self.input, w, exec)?];
        for l in &self.layers {
            let next = l.apply(out.last().expect("nonempty"), exec)?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn s2s_with<T: Scalar>(&self, w: &[Vec<T>], exec: Exec) -> Result<Vec<Vec<T>>> {
        let hidden = self.trace(w, exec)?.pop().expect("nonempty");
        ffnn_seq(&self.output, &hidden, exec)
    }

    pub fn s2s<T: Scalar>(&self, w: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        self.s2s_with(w, Exec::default())
    }

    pub fn s2v<T: Scalar>(&self, w: &[Vec<T>]) -> Result<Vec<T>> {
        Ok(self.s2s(w)?.pop().expect("nonempty"))
    }

    /// Exact membership of `w` in `{w | s2v(w) ⋈ θ}`.
    pub fn lang_member(&self, w: &[Vector], rel: Relation, theta: &Rational) -> Result<bool> {
        if self.out_dim() != 1 {
            return Err(Error::Dimension(format!("a classifier has one output, this transformer has {}", self.out_dim())));
        }
        Ok(rel.holds(&self.s2v(w)?[0], theta))
    }

    /// Membership of a word over a one-hot encoded alphabet.
    pub fn lang_member_word(&self, codec: &OneHotCodec, w: &[usize], rel: Relation, theta: &Rational) -> Result<bool> {
        check_dim("alphabet", codec.len(), self.in_dim())?;
        self.lang_member(&codec.encode_indices(w), rel, theta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<EncoderOnlyTransformer> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("transformer file: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct EncoderOnlyFile {
    #[serde(rename = "type")]
    kind: String,
    input: Ffnn,
    layers: Vec<EncoderLayer>,
    output: Ffnn,
}

impl Serialize for EncoderOnlyTransformer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EncoderOnlyFile {
            kind: "encoder-transformer".into(),
            input: self.input.clone(),
            layers: self.layers.clone(),
            output: self.output.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EncoderOnlyTransformer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<EncoderOnlyTransformer, D::Error> {
        let f = EncoderOnlyFile::deserialize(d)?;
        if f.kind != "encoder-transformer" {
            return Err(serde::de::Error::custom(format!("expected type \"encoder-transformer\", found {:?}", f.kind)));
        }
        EncoderOnlyTransformer::new(f.input, f.layers, f.output).map_err(serde::de::Error::custom)
    }
}

/// Word embedding (one column per letter) plus a positional table; positions
/// past the table get the zero vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub alphabet: Vec<String>,
    pub words: Matrix,
    #[serde(default)]
    pub positions: Vec<Vector>,
}

impl Embedding {
    pub fn new(alphabet: Vec<String>, words: Matrix, positions: Vec<Vector>) -> Result<Embedding> {
        let e = Embedding { alphabet, words, positions };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        check_dim("word embedding columns", self.words.cols(), self.alphabet.len())?;
        for p in &self.positions {
            check_dim("positional encoding", p.len(), self.words.rows())?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.words.rows()
    }

    pub fn letter(&self, name: &str) -> Result<usize> {
        self.alphabet.iter().position(|a| a == name).ok_or_else(|| Error::Unbound(format!("letter {name}")))
    }

    /// `WE(α_i) + PE(i)` for letter indices.
    pub fn embed<T: Scalar>(&self, w: &[usize]) -> Result<Vec<Vec<T>>> {
        w.iter()
            .enumerate()
            .map(|(i, &a)| {
                if a >= self.alphabet.len() {
                    return Err(Error::Unbound(format!("letter index {a}")));
                }
                let mut v = self.words.column(a);
                if let Some(p) = self.positions.get(i) {
                    v = v.iter().zip(p).map(|(x, y)| x + y).collect();
                }
                Ok(v.iter().map(T::from_rational).collect())
            })
            .collect()
    }
}

/// Outcome of greedy decoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Translation {
    Output(Vec<usize>),
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transformer {
    pub source: Embedding,
    pub target: Embedding,
    pub sos: usize,
    pub eos: usize,
    pub encoders: Vec<EncoderLayer>,
    pub decoders: Vec<DecoderLayer>,
    pub output: Ffnn,
}

impl Transformer {
    pub fn new(
        source: Embedding,
        target: Embedding,
        sos: usize,
        eos: usize,
        encoders: Vec<EncoderLayer>,
        decoders: Vec<DecoderLayer>,
        output: Ffnn,
    ) -> Result<Transformer> {
        let t = Transformer { source, target, sos, eos, encoders, decoders, output };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.target.validate()?;
        let n = self.source.dim();
        check_dim("target embedding", self.target.dim(), n)?;
        if self.encoders.len() != self.decoders.len() {
            return Err(Error::Invalid(format!("{} encoder and {} decoder layers", self.encoders.len(), self.decoders.len())));
        }
        for l in &self.encoders {
            check_dim("encoder layer", l.dim(), n)?;
        }
        for l in &self.decoders {
            check_dim("decoder layer", l.dim(), n)?;
        }
        check_dim("output network input", self.output.in_dim(), n)?;
        check_dim("output network output", self.output.out_dim(), self.target.alphabet.len())?;
        let k = self.target.alphabet.len();
        if self.sos >= k || self.eos >= k || self.sos == self.eos {
            return Err(Error::Invalid("start and end symbols must be distinct target letters".into()));
        }
        Ok(())
    }

    pub fn encode<T: Scalar>(&self, w_in: &[usize], exec: Exec) -> Result<Vec<Vec<T>>> {
        if w_in.is_empty() {
            return Err(Error::Invalid("input sequences are nonempty".into()));
        }
        let mut w = self.source.embed(w_in)?;
        for e in &self.encoders {
            w = e.apply(&w, exec)?;
        }
        Ok(w)
    }

    fn next_from<T: Scalar>(&self, enc: &[Vec<T>], w_out: &[usize], exec: Exec) -> Result<usize> {
        let mut w = self.target.embed(w_out)?;
        for d in &self.decoders {
            w = d.apply(enc, &w, exec)?;
        }
        let x = w.last().ok_or_else(|| Error::Invalid("output prefix is empty".into()))?;
        // Softmax is strictly monotone, so the last layer is compared before it.
        let layers = self.output.layers();
        let (last, init) = layers.split_last().expect("networks have layers");
        let h = init.iter().try_fold(x.clone(), |acc, l| T::layer(l, &acc))?;
        let z = if last.activation == Activation::Softmax {
            let pre = Layer::new(last.weights.clone(), last.bias.clone(), Activation::Id)?;
            T::layer(&pre, &h)?
        } else {
            T::layer(last, &h)?
        };
        Ok(argmax_positions(&z)[0])
    }

    /// Index of the next target letter after `w_out` (which starts with SOS).
    pub fn next<T: Scalar>(&self, w_in: &[usize], w_out: &[usize]) -> Result<usize> {
        let enc = self.encode::<T>(w_in, Exec::default())?;
        self.next_from(&enc, w_out, Exec::default())
    }

    /// Greedy decoding from SOS until EOS, giving up after `max_steps` letters.
    pub fn translate<T: Scalar>(&self, w_in: &[usize], max_steps: usize) -> Result<Translation> {
        let exec = Exec::default();
        let enc = self.encode::<T>(w_in, exec)?;
        let mut out = vec![self.sos];
        for _ in 0..max_steps {
            let b = self.next_from(&enc, &out, exec)?;
            if b == self.eos {
                return Ok(Translation::Output(out[1..].to_vec()));
            }
            out.push(b);
        }
        Ok(Translation::Diverged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Transformer> {
        let t: Transformer = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("transformer file: {e}")))?;
        t.validate()?;
        Ok(t)
    }
}

fn r(v: i64) -> Rational {
    Rational::from_int(v)
}

fn m(rows: &[&[i64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|row| row.iter().map(|&v| r(v)).collect()).collect()).expect("rectangular")
}

fn layer(rows: &[&[i64]], bias: &[i64], act: Activation) -> Layer {
    Layer::new(m(rows), bias.iter().map(|&v| r(v)).collect(), act).expect("consistent")
}

fn net(layers: Vec<Layer>) -> Ffnn {
    Ffnn::new(layers).expect("chained")
}

/// Head over `(z, ·, 1)` vectors returning the largest first component.
pub fn build_max_head() -> AttentionHead {
    AttentionHead::new(m(&[&[0, 0, 1]]), m(&[&[1, 0, 0]]), m(&[&[1, 0, 0]]), WeightFn::MinArgmax, false).expect("3x1 head")
}

/// The max head writing into the second component.
pub fn build_max_layer() -> AttentionLayer {
    AttentionLayer::new(vec![build_max_head()], m(&[&[0], &[1], &[0]])).expect("consistent")
}

fn embed_scalar() -> Ffnn {
    net(vec![layer(&[&[1], &[0], &[0]], &[0, 0, 1], Activation::Id)])
}

/// `(x1, x2, x3) ↦ ([x1 ≠ x2], 0, x3)` for `x3 = 1`.
fn mismatch_flag() -> Ffnn {
    net(vec![
        layer(&[&[1, -1, 0], &[-1, 1, 0], &[0, 0, 1]], &[0, 0, 0], Activation::Heaviside),
        layer(&[&[1, 1, 0], &[0, 0, 0], &[0, 0, 1]], &[0, 0, 0], Activation::Id),
    ])
}

fn invert_first() -> Ffnn {
    net(vec![layer(&[&[-1, 0, 0]], &[1], Activation::Id)])
}

/// Encoder-only transformer of dimensions (1, 1) marking with 1 the positions
/// that hold the maximum of the sequence.
pub fn build_argmax_transformer() -> EncoderOnlyTransformer {
    let e1 = EncoderLayer::new(build_max_layer(), mismatch_flag(), false, true, false, Norm::Off).expect("3-dim");
    EncoderOnlyTransformer::new(embed_scalar(), vec![e1], invert_first()).expect("consistent")
}

/// Encoder-only transformer whose last output is 1 if the sequence is
/// non-decreasing and 0 otherwise. Both layers attend over prefixes.
pub fn build_sorted_recognizer() -> EncoderOnlyTransformer {
    let e1 = EncoderLayer::new(build_max_layer(), mismatch_flag(), true, true, false, Norm::Off).expect("3-dim");
    let swap = net(vec![layer(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]], &[0, 0, 0], Activation::Id)]);
    let e2 = EncoderLayer::new(build_max_layer(), swap, true, true, false, Norm::Off).expect("3-dim");
    EncoderOnlyTransformer::new(embed_scalar(), vec![e1, e2], invert_first()).expect("consistent")
}

/// Encoder-only transformer over one-hot `(⟨, ⟩)` whose last output is 0
/// exactly on well-formed bracket strings.
///
/// State `(d, a, v, 1)`: `d = ±1` per bracket; layer 1 averages `d` over each
/// prefix into `a` and sets `v = [a < 0]`; layer 2 adds the maximum of `v`
/// into `v`; the output is `|a| + v` at the last position.
pub fn build_dyck_recognizer() -> EncoderOnlyTransformer {
    let input = net(vec![layer(&[&[1, -1], &[0, 0], &[0, 0], &[0, 0]], &[0, 0, 0, 1], Activation::Id)]);
    let uniform = AttentionHead::new(m(&[&[0, 0, 0, 0]]), m(&[&[0, 0, 0, 0]]), m(&[&[1, 0, 0, 0]]), WeightFn::AvgArgmax, false)
        .expect("4x1 head");
    let a1 = AttentionLayer::new(vec![uniform], m(&[&[0], &[1], &[0], &[0]])).expect("consistent");
    let flag = net(vec![layer(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, -1, 0, 0], &[0, 0, 0, 0]], &[0, 0, 0, 0], Activation::Heaviside)]);
    let e1 = EncoderLayer::new(a1, flag, true, true, true, Norm::Off).expect("4-dim");
    let max_v = AttentionHead::new(m(&[&[0, 0, 0, 1]]), m(&[&[0, 0, 1, 0]]), m(&[&[0, 0, 1, 0]]), WeightFn::MinArgmax, false)
        .expect("4x1 head");
    let a2 = AttentionLayer::new(vec![max_v], m(&[&[0], &[0], &[1], &[0]])).expect("consistent");
    let zero = net(vec![layer(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]], &[0, 0, 0, 0], Activation::Id)]);
    let e2 = EncoderLayer::new(a2, zero, false, true, true, Norm::Off).expect("4-dim");
    let output = net(vec![
        layer(&[&[0, 1, 0, 0], &[0, -1, 0, 0], &[0, 0, 1, 0]], &[0, 0, 0], Activation::Relu),
        layer(&[&[1, 1, 1]], &[0], Activation::Id),
    ]);
    EncoderOnlyTransformer::new(input, vec![e1, e2], output).expect("consistent")
}

/// Positions holding the maximum get 1, others 0.
pub fn argmax_marking(xs: &[Rational]) -> Vec<Rational> {
    let top = argmax_positions(xs);
    (0..xs.len()).map(|i| if top.contains(&i) { Rational::one() } else { Rational::zero() }).collect()
}

pub fn is_sorted(xs: &[Rational]) -> bool {
    xs.windows(2).all(|p| p[0] <= p[1])
}

/// Well-formedness of a bracket string given as `true` for opening.
pub fn is_balanced(brackets: &[bool]) -> bool {
    let mut depth = 0i64;
    for &open in brackets {
        depth += if open { 1 } else { -1 };
        if depth < 0 {
            return false;
        }
    }
    depth == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ints;
    use crate::rational::q;

    fn col(xs: &[i64]) -> Vec<Vector> {
        xs.iter().map(|&x| vec![r(x)]).collect()
    }

    #[test]
    fn weight_functions() {
        let s = ints(&[3, 7, 4, 7]);
        assert_eq!(weights(WeightFn::MinArgmax, &s).unwrap(), ints(&[0, 1, 0, 0]));
        assert_eq!(weights(WeightFn::AvgArgmax, &s).unwrap(), vec![r(0), q(1, 2), r(0), q(1, 2)]);
        let soft = weights(WeightFn::Softmax, &[0.0, 0.0]).unwrap();
        assert!((soft[0] - 0.5).abs() < 1e-12 && (soft[1] - 0.5).abs() < 1e-12);
        assert!(weights(WeightFn::Softmax, &ints(&[0])).is_err());
    }

    #[test]
    fn max_head() {
        let h = build_max_head();
        let ctx = vec![ints(&[1, 0, 1]), ints(&[5, 0, 1]), ints(&[3, 0, 1])];
        assert_eq!(h.apply(&ctx, &ints(&[3, 0, 1])).unwrap(), ints(&[5]));
        let ctx = vec![ints(&[2, 0, 1]), ints(&[9, 0, 1]), ints(&[4, 0, 1])];
        assert_eq!(h.apply(&ctx, &ints(&[0, 0, 1])).unwrap(), ints(&[9]));
        let zero_v = AttentionHead::new(m(&[&[0, 0, 1]]), m(&[&[1, 0, 0]]), m(&[&[0, 0, 0]]), WeightFn::AvgArgmax, false).unwrap();
        assert_eq!(zero_v.apply(&ctx, &ints(&[0, 0, 1])).unwrap(), ints(&[0]));
    }

    #[test]
    fn masked_differs_from_self_on_decreasing_input() {
        let l = build_max_layer();
        let w: Vec<Vector> = vec![ints(&[5, 0, 1]), ints(&[3, 0, 1]), ints(&[1, 0, 1])];
        let masked = l.masked(&w, Exec::Sequential).unwrap();
        let full = l.self_attend(&w, Exec::Sequential).unwrap();
        assert_eq!(masked[0], full[0]);
        assert_eq!(masked[2], ints(&[0, 5, 0]));
        assert_eq!(full, l.cross(&w, &w, Exec::Sequential).unwrap());
        let masked_f = l.masked(&[vec![2.0, 0.0, 1.0]], Exec::Sequential).unwrap();
        assert_eq!(masked_f, vec![vec![0.0, 2.0, 0.0]]);
    }

    #[test]
    fn builders_on_examples() {
        let t = build_argmax_transformer();
        assert_eq!(t.s2s(&col(&[3, 7, 4, 7])).unwrap(), col(&[0, 1, 0, 1]));
        assert_eq!(t.s2s(&col(&[4])).unwrap(), col(&[1]));
        let s = build_sorted_recognizer();
        assert_eq!(s.s2v(&col(&[1, 2, 2, 3])).unwrap(), ints(&[1]));
        assert_eq!(s.s2v(&col(&[2, 1])).unwrap(), ints(&[0]));
        assert_eq!(s.s2v(&col(&[5])).unwrap(), ints(&[1]));
        let d = build_dyck_recognizer();
        let codec = OneHotCodec::new(&["<", ">"]).unwrap();
        let word = |s: &str| -> Vec<usize> { s.chars().map(|c| if c == '<' { 0 } else { 1 }).collect() };
        let zero = Rational::zero();
        assert!(d.lang_member_word(&codec, &word("<<>><>"), Relation::Eq, &zero).unwrap());
        assert!(!d.lang_member_word(&codec, &word("><"), Relation::Eq, &zero).unwrap());
        assert!(!d.lang_member_word(&codec, &word("<<>"), Relation::Eq, &zero).unwrap());
    }

    #[test]
    fn sorted_trace_first_layer() {
        let s = build_sorted_recognizer();
        let tr = s.trace(&col(&[1, 2]), Exec::Sequential).unwrap();
        assert_eq!(tr[1], vec![ints(&[0, 0, 1]), ints(&[0, 0, 1])]);
    }

    #[test]
    fn layer_norm_properties() {
        assert!(layer_norm(&[3.0, 3.0, 3.0], 1e-5).iter().all(|v| v.abs() < 1e-12));
        let y = layer_norm(&[1.0, -2.0, 7.5, 0.25], NORM_EPSILON);
        assert!((y.iter().sum::<f64>() / 4.0).abs() < 1e-9);
        assert!(<Rational as Scalar>::layer_norm(&ints(&[1, 2])).is_err());
    }

    #[test]
    fn json_round_trips() {
        for t in [build_argmax_transformer(), build_sorted_recognizer(), build_dyck_recognizer()] {
            assert_eq!(EncoderOnlyTransformer::from_json(&t.to_json()).unwrap(), t);
        }
        let head = r#"{"Q":[["0","0","1"]],"K":[["1","0","0"]],"V":[["1","0","0"]],"weights":"avg-argmax","scaling":false}"#;
        let h: AttentionHead = serde_json::from_str(head).unwrap();
        assert_eq!(h.weight_fn(), WeightFn::AvgArgmax);
    }
}
