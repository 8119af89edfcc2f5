//! Feed-forward networks with exact and floating-point evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_set, argmax_set_f64, Matrix, Vector};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Id,
    Relu,
    Nlrelu,
    Sigmoid,
    Tanh,
    Heaviside,
    Softmax,
}

impl Activation {
    /// Whether the activation maps rationals to rationals.
    pub fn is_exact(self) -> bool {
        matches!(self, Activation::Id | Activation::Relu | Activation::Heaviside)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Id => "id",
            Activation::Relu => "relu",
            Activation::Nlrelu => "nlrelu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Heaviside => "heaviside",
            Activation::Softmax => "softmax",
        }
    }

    pub fn apply_exact(self, z: &[Rational]) -> Result<Vector> {
        match self {
            Activation::Id => Ok(z.to_vec()),
            Activation::Relu => Ok(z.iter().map(Rational::relu).collect()),
            Activation::Heaviside => Ok(z.iter().map(heaviside).collect()),
            other => Err(Error::ExactMode(format!("activation {} is transcendental", other.name()))),
        }
    }

    pub fn apply_f64(self, z: &[f64]) -> Vec<f64> {
        match self {
            Activation::Id => z.to_vec(),
            Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
            Activation::Heaviside => z.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect(),
            Activation::Nlrelu => z.iter().map(|v| v.max(0.0).ln_1p()).collect(),
            Activation::Sigmoid => z.iter().map(|&v| sigmoid(v)).collect(),
            Activation::Tanh => z.iter().map(|v| v.tanh()).collect(),
            Activation::Softmax => softmax(z),
        }
    }
}

pub fn heaviside(x: &Rational) -> Rational {
    if x.is_positive() { Rational::one() } else { Rational::zero() }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax over a fixed-arity vector, shifted by the maximum for stability.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    if z.is_empty() {
        return Vec::new();
    }
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

/// Result of a mode-dependent evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum Evaluation {
    Exact(Vector),
    Float(Vec<f64>),
}

impl Evaluation {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Evaluation::Exact(v) => crate::linalg::to_f64(v),
            Evaluation::Float(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vector,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vector, activation: Activation) -> Result<Layer> {
        if bias.len() != weights.rows() {
            return Err(Error::Dimension(format!(
                "bias of length {} for a weight matrix with {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Layer { weights, bias, activation })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// `W·x + b` before the activation.
    pub fn pre_activation(&self, x: &[Rational]) -> Result<Vector> {
        let wx = self.weights.mul_vec(x)?;
        Ok(wx.into_iter().zip(&self.bias).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vector> {
        if !self.activation.is_exact() {
            return Err(Error::ExactMode(format!(
                "activation {} cannot be evaluated exactly",
                self.activation.name()
            )));
        }
        self.activation.apply_exact(&self.pre_activation(x)?)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        let wx = self.weights.mul_vec_f64(x)?;
        let z: Vec<f64> = wx.into_iter().zip(&self.bias).map(|(a, b)| a + b.to_f64()).collect();
        Ok(self.activation.apply_f64(&z))
    }
}

pub fn eval_layer(layer: &Layer, x: &[Rational], mode: Mode) -> Result<Evaluation> {
    match mode {
        Mode::Exact => layer.eval(x).map(Evaluation::Exact),
        Mode::Float => layer.eval_f64(&crate::linalg::to_f64(x)).map(Evaluation::Float),
    }
}

/// A feed-forward network: a non-empty chain of layers with matching dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ffnn {
    layers: Vec<Layer>,
}

#[derive(Serialize, Deserialize)]
struct FfnnFile {
    #[serde(rename = "type")]
    kind: String,
    layers: Vec<Layer>,
}

impl Ffnn {
    pub fn new(layers: Vec<Layer>) -> Result<Ffnn> {
        if layers.is_empty() {
            return Err(Error::Dimension("a network needs at least one layer".into()));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Dimension(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    k + 1,
                    pair[0].out_dim(),
                    k + 2,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Ffnn { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.in_dim(), self.out_dim())
    }

    pub fn neuron_count(&self) -> usize {
        self.layers.iter().map(Layer::out_dim).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.layers.iter().all(|l| l.activation.is_exact())
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vector> {
        self.check_input(x.len())?;
        let mut v = x.to_vec();
        for l in &self.layers {
            v = l.eval(&v)?;
        }
        Ok(v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let mut v = x.to_vec();
        for l in &self.layers {
            v = l.eval_f64(&v)?;
        }
        Ok(v)
    }

    pub fn eval_mode(&self, x: &[Rational], mode: Mode) -> Result<Evaluation> {
        match mode {
            Mode::Exact => self.eval(x).map(Evaluation::Exact),
            Mode::Float => self.eval_f64(&crate::linalg::to_f64(x)).map(Evaluation::Float),
        }
    }

    fn check_input(&self, n: usize) -> Result<()> {
        if n != self.in_dim() {
            return Err(Error::Dimension(format!(
                "network expects {} inputs, got {}",
                self.in_dim(),
                n
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FfnnFile { kind: "ffnn".into(), layers: self.layers.clone() })
            .expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Ffnn> {
        let f: FfnnFile =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("model file: {e}")))?;
        if f.kind != "ffnn" {
            return Err(Error::Invalid(format!("expected type \"ffnn\", found {:?}", f.kind)));
        }
        for l in &f.layers {
            if l.bias.len() != l.weights.rows() {
                return Err(Error::Dimension("bias length differs from weight rows".into()));
            }
        }
        Ffnn::new(f.layers)
    }
}

impl Serialize for Ffnn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FfnnFile { kind: "ffnn".into(), layers: self.layers.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ffnn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Ffnn, D::Error> {
        let f = FfnnFile::deserialize(d)?;
        Ffnn::new(f.layers).map_err(serde::de::Error::custom)
    }
}

pub fn eval_ffnn(net: &Ffnn, x: &[Rational], mode: Mode) -> Result<Evaluation> {
    net.eval_mode(x, mode)
}

/// The network computing `n2 ∘ n1`.
pub fn concat_ffnn(n1: &Ffnn, n2: &Ffnn) -> Result<Ffnn> {
    if n1.out_dim() != n2.in_dim() {
        return Err(Error::Dimension(format!(
            "cannot feed {} outputs into a network with {} inputs",
            n1.out_dim(),
            n2.in_dim()
        )));
    }
    Ffnn::new(n1.layers.iter().chain(&n2.layers).cloned().collect())
}

/// Category assigned by the network: the smallest maximizing output index (1-based).
pub fn classify(net: &Ffnn, x: &[Rational]) -> Result<usize> {
    if net.is_exact() {
        Ok(argmax_set(&net.eval(x)?)?[0])
    } else {
        Ok(argmax_set_f64(&net.eval_f64(&crate::linalg::to_f64(x))?)?[0])
    }
}

/// Single-layer network with one neuron, `W = (1)`, `b = (0)` and the given activation.
pub fn single_neuron(activation: Activation) -> Ffnn {
    let layer = Layer::new(Matrix::identity(1), vec![Rational::zero()], activation).unwrap();
    Ffnn::new(vec![layer]).unwrap()
}

/// Reference networks used throughout the examples and tests.
pub mod examples {
    use super::*;

    /// Two-layer ReLU network computing `max(x1, x2)` exactly.
    pub fn max_network() -> Ffnn {
        let l1 = Layer::new(
            Matrix::from_strs(&[&["1", "-1"], &["0", "1"], &["0", "-1"]]),
            crate::linalg::ints(&[0, 0, 0]),
            Activation::Relu,
        )
        .unwrap();
        let l2 = Layer::new(
            Matrix::from_strs(&[&["1", "1", "-1"]]),
            crate::linalg::ints(&[0]),
            Activation::Id,
        )
        .unwrap();
        Ffnn::new(vec![l1, l2]).unwrap()
    }

    /// Two-layer network with hand-picked decimal weights.
    pub fn decimal_network() -> Ffnn {
        let l1 = Layer::new(
            Matrix::from_strs(&[&["0.33", "0.2"], &["-0.1", "1.13"], &["1.03", "-1.03"]]),
            crate::linalg::ints(&[0, 0, 0]),
            Activation::Relu,
        )
        .unwrap();
        let l2 = Layer::new(
            Matrix::from_strs(&[&["0.24", "0.84", "0.97"]]),
            vec![crate::rational::r("0.07")],
            Activation::Id,
        )
        .unwrap();
        Ffnn::new(vec![l1, l2]).unwrap()
    }

    /// XOR on {0,1}²: `relu(x1 - x2) + relu(x2 - x1)`.
    pub fn xor_network() -> Ffnn {
        let l1 = Layer::new(
            Matrix::from_strs(&[&["1", "-1"], &["-1", "1"]]),
            crate::linalg::ints(&[0, 0]),
            Activation::Relu,
        )
        .unwrap();
        let l2 = Layer::new(Matrix::from_strs(&[&["1", "1"]]), crate::linalg::ints(&[0]), Activation::Id)
            .unwrap();
        Ffnn::new(vec![l1, l2]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::linalg::ints;
    use crate::rational::q;

    #[test]
    fn single_layer_cases() {
        let relu = single_neuron(Activation::Relu);
        assert_eq!(relu.eval(&ints(&[-2])).unwrap(), ints(&[0]));
        let id = single_neuron(Activation::Id);
        assert_eq!(id.eval(&[q(7, 3)]).unwrap(), vec![q(7, 3)]);
    }

    #[test]
    fn first_layer_of_max_network() {
        let net = max_network();
        let l = &net.layers()[0];
        assert_eq!(l.pre_activation(&ints(&[3, 2])).unwrap(), ints(&[1, 2, -2]));
        assert_eq!(l.eval(&ints(&[3, 2])).unwrap(), ints(&[1, 2, 0]));
    }

    #[test]
    fn exact_mode_rejects_sigmoid() {
        let s = single_neuron(Activation::Sigmoid);
        assert!(matches!(s.eval(&ints(&[0])), Err(Error::ExactMode(_))));
        assert!((s.eval_f64(&[0.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let n = max_network();
        let back = Ffnn::from_json(&n.to_json()).unwrap();
        assert_eq!(n, back);
        let text = r#"{"type":"ffnn","layers":[{"weights":[["1","-1"],["0","1"],["0","-1"]],"bias":["0","0","0"],"activation":"relu"}]}"#;
        let parsed = Ffnn::from_json(text).unwrap();
        assert_eq!(parsed.dim(), (2, 3));
    }

    #[test]
    fn concat_dims() {
        let a = Ffnn::new(vec![Layer::new(Matrix::zeros(1, 2), ints(&[0]), Activation::Id).unwrap()]).unwrap();
        let b = Ffnn::new(vec![Layer::new(Matrix::zeros(3, 1), ints(&[0, 0, 0]), Activation::Id).unwrap()]).unwrap();
        assert_eq!(concat_ffnn(&a, &b).unwrap().dim(), (2, 3));
        assert!(concat_ffnn(&b, &b).is_err());
    }
}
