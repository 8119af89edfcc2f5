use crate::linalg::Matrix;
use crate::nn::{Activation, Ffnn, Layer};
use crate::rational::Rational;

/// Rewrites an id/ReLU network so every layer but the last uses ReLU.
///
/// An identity neuron computing `t` becomes the pair `ReLU(t)`, `ReLU(−t)`; the next layer
/// reads it with weights `a` and `−a`, since `ReLU(t)·a + ReLU(−t)·(−a) = t·a`.
pub fn id_to_relu(net: &Ffnn) -> Ffnn {
    let mut layers: Vec<Layer> = net.layers().to_vec();
    for l in 0..layers.len().saturating_sub(1) {
        if layers[l].activation != Activation::Id {
            continue;
        }
        let cur = &layers[l];
        let neg = cur.weights.scale(&Rational::from(-1));
        let weights = cur.weights.vconcat(&neg).expect("same column count");
        let bias = cur.bias.iter().cloned().chain(cur.bias.iter().map(|b| -b.clone())).collect();
        layers[l] = Layer::new(weights, bias, Activation::Relu).expect("dimensions preserved");
        let next = &layers[l + 1];
        let flipped = next.weights.scale(&Rational::from(-1));
        let weights: Matrix = next.weights.hconcat(&flipped).expect("same row count");
        layers[l + 1] = Layer::new(weights, next.bias.clone(), next.activation).expect("dimensions preserved");
    }
    Ffnn::new(layers).expect("chained dimensions preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ints;
    use crate::nn::examples::max_network;

    #[test]
    fn relu_network_unchanged() {
        assert_eq!(id_to_relu(&max_network()), max_network());
    }

    #[test]
    fn single_identity_neuron() {
        let l1 = Layer::new(Matrix::from_rows(vec![ints(&[1])]).unwrap(), ints(&[0]), Activation::Id).unwrap();
        let l2 = Layer::new(Matrix::from_rows(vec![ints(&[3])]).unwrap(), ints(&[0]), Activation::Id).unwrap();
        let net = Ffnn::new(vec![l1, l2]).unwrap();
        let r = id_to_relu(&net);
        assert_eq!(r.layers()[0].activation, Activation::Relu);
        assert_eq!(r.eval(&ints(&[-2])).unwrap(), ints(&[-6]));
    }
}
