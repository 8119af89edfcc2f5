use proptest::prelude::*;

use verinet::exec::Exec;
use verinet::linalg::{ints, Matrix};
use verinet::nn::{Activation, Ffnn, Layer};
use verinet::rational::q;
use verinet::seq::{words, OneHotCodec};
use verinet::transformer::*;
use verinet::Rational;

fn m(rows: &[&[i64]]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| ints(r)).collect()).unwrap()
}

fn zeros(r: usize, c: usize) -> Matrix {
    Matrix::zeros(r, c)
}

fn unit_row(n: usize, i: usize, v: i64) -> Vec<i64> {
    let mut row = vec![0; n];
    row[i] = v;
    row
}

const N: usize = 8;
// Components: is_a, is_b, position, position², 1, selected a, selected b, selected position.
const SOS: usize = 0;
const EOS: usize = 1;

fn zero_attention() -> AttentionLayer {
    let h = AttentionHead::new(zeros(1, N), zeros(1, N), zeros(1, N), WeightFn::MinArgmax, false).unwrap();
    AttentionLayer::new(vec![h], zeros(N, 1)).unwrap()
}

fn zero_ffn() -> Ffnn {
    Ffnn::new(vec![Layer::new(zeros(N, N), vec![Rational::zero(); N], Activation::Id).unwrap()]).unwrap()
}

fn embeddings() -> (Embedding, Embedding) {
    let positions: Vec<Vec<Rational>> = (1..=16)
        .map(|i| {
            let mut v = vec![Rational::zero(); N];
            v[2] = Rational::from_int(i);
            v[3] = Rational::from_int(i * i);
            v
        })
        .collect();
    let mut src = zeros(N, 2);
    src.set(0, 0, Rational::one());
    src.set(1, 1, Rational::one());
    src.set(4, 0, Rational::one());
    src.set(4, 1, Rational::one());
    let mut tgt = zeros(N, 4);
    for c in 0..4 {
        tgt.set(4, c, Rational::one());
    }
    let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    (
        Embedding::new(names(&["a", "b"]), src, positions.clone()).unwrap(),
        Embedding::new(names(&["<s>", "</s>", "a", "b"]), tgt, positions).unwrap(),
    )
}

/// Copies its input: output step `t` attends to input position `t` through the
/// score `2t·j − j²` and emits EOS once `t` passes the last position.
fn copy_transformer() -> Transformer {
    let (src, tgt) = embeddings();
    let encoder = EncoderLayer::new(zero_attention(), zero_ffn(), false, true, true, Norm::Off).unwrap();
    let q_rows = [unit_row(N, 2, 2), unit_row(N, 4, -1)];
    let k_rows = [unit_row(N, 2, 1), unit_row(N, 3, 1)];
    let v_rows = [unit_row(N, 0, 1), unit_row(N, 1, 1), unit_row(N, 2, 1)];
    let rows = |r: &[Vec<i64>]| Matrix::from_rows(r.iter().map(|x| ints(x)).collect()).unwrap();
    let head = AttentionHead::new(rows(&q_rows), rows(&k_rows), rows(&v_rows), WeightFn::MinArgmax, false).unwrap();
    let mut w = zeros(N, 3);
    w.set(5, 0, Rational::one());
    w.set(6, 1, Rational::one());
    w.set(7, 2, Rational::one());
    let cross = AttentionLayer::new(vec![head], w).unwrap();
    let decoder = DecoderLayer::new(zero_attention(), cross, zero_ffn(), true, Norm::Off).unwrap();
    let flags = Layer::new(
        rows(&[
            vec![0, 0, 1, 0, 0, 0, 0, -1],
            unit_row(N, 5, 1),
            unit_row(N, 6, 1),
        ]),
        ints(&[0, 0, 0]),
        Activation::Heaviside,
    )
    .unwrap();
    let logits = Layer::new(m(&[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 1]]), ints(&[0, 0, 0, 0]), Activation::Softmax)
        .unwrap();
    let out = Ffnn::new(vec![flags, logits]).unwrap();
    Transformer::new(src, tgt, SOS, EOS, vec![encoder], vec![decoder], out).unwrap()
}

fn constant_output(letter: usize) -> Transformer {
    let mut t = copy_transformer();
    let mut bias = vec![Rational::zero(); 4];
    bias[letter] = Rational::one();
    t.output = Ffnn::new(vec![Layer::new(zeros(4, N), bias, Activation::Softmax).unwrap()]).unwrap();
    t
}

#[test]
fn copy_transformer_copies() {
    let t = copy_transformer();
    for w in words(2, 6) {
        let want = Translation::Output(w.iter().map(|&a| a + 2).collect());
        assert_eq!(t.translate::<Rational>(&w, 20).unwrap(), want, "{w:?}");
        assert_eq!(t.translate::<f64>(&w, 20).unwrap(), want, "{w:?}");
    }
    assert_eq!(t.translate::<Rational>(&[0, 1, 1], 2).unwrap(), Translation::Diverged);
    assert_eq!(t.next::<Rational>(&[1, 0], &[SOS]).unwrap(), 3);
}

#[test]
fn end_of_sequence_and_divergence() {
    assert_eq!(constant_output(EOS).translate::<Rational>(&[0, 1], 10).unwrap(), Translation::Output(vec![]));
    assert_eq!(constant_output(2).translate::<Rational>(&[0, 1], 3).unwrap(), Translation::Diverged);
    assert_eq!(constant_output(2).translate::<f64>(&[0], 3).unwrap(), Translation::Diverged);
}

#[test]
fn transformer_json_round_trip() {
    let t = copy_transformer();
    let back = Transformer::from_json(&t.to_json()).unwrap();
    assert_eq!(back, t);
    let mut bad = t.clone();
    bad.eos = bad.sos;
    assert!(Transformer::from_json(&bad.to_json()).is_err());
}

#[test]
fn exact_mode_rejects_soft_attention_and_norm() {
    let h = AttentionHead::new(m(&[&[1]]), m(&[&[1]]), m(&[&[1]]), WeightFn::Softmax, false).unwrap();
    let ctx = vec![ints(&[1]), ints(&[2])];
    assert!(h.apply(&ctx, &ints(&[1])).is_err());
    let y = h.apply(&[vec![1.0], vec![2.0]], &[1.0]).unwrap()[0];
    let e = std::f64::consts::E;
    assert!((y - (e + 2.0 * e * e) / (e + e * e)).abs() < 1e-12);
    let scaled = AttentionHead::new(m(&[&[1, 0], &[0, 1]]), m(&[&[1, 0], &[0, 1]]), m(&[&[1, 0]]), WeightFn::MinArgmax, true)
        .unwrap();
    assert!(scaled.apply(&[ints(&[1, 0])], &ints(&[1, 0])).is_err());
    let four = AttentionHead::new(zeros(4, 1), zeros(4, 1), m(&[&[1]]), WeightFn::AvgArgmax, true).unwrap();
    assert_eq!(four.apply(&[ints(&[3])], &ints(&[3])).unwrap(), ints(&[3]));
    let l = build_argmax_transformer().layers()[0].clone();
    let normed = EncoderLayer::new(l.attention, l.ffn, false, true, false, Norm::Layernorm).unwrap();
    let input = Ffnn::new(vec![Layer::new(m(&[&[1], &[0], &[0]]), ints(&[0, 0, 1]), Activation::Id).unwrap()]).unwrap();
    let output = Ffnn::new(vec![Layer::new(m(&[&[-1, 0, 0]]), ints(&[1]), Activation::Id).unwrap()]).unwrap();
    let enc = EncoderOnlyTransformer::new(input, vec![normed], output).unwrap();
    assert!(enc.s2s(&[ints(&[1])]).is_err());
    assert!(enc.s2s(&[vec![1.0]]).is_ok());
}

#[test]
fn dyck_rejects_and_accepts_examples() {
    let d = build_dyck_recognizer();
    let codec = OneHotCodec::new(&["<", ">"]).unwrap();
    let enc = |s: &str| codec.encode_word(&s.chars().map(|c| c.to_string()).collect::<Vec<_>>()).unwrap();
    assert_eq!(d.s2v(&enc("<<>><>")).unwrap(), ints(&[0]));
    assert!(d.s2v(&enc("><")).unwrap()[0].is_positive());
    assert_eq!(d.s2v(&enc("<<>")).unwrap(), vec![q(1, 3)]);
}

fn rational_seq() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-50i64..50, 1i64..=100).prop_map(|(n, d)| Rational::new(n, d)), 1..9)
}

fn col(xs: &[Rational]) -> Vec<Vec<Rational>> {
    xs.iter().map(|x| vec![x.clone()]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn argmax_builder_matches_oracle(xs in rational_seq()) {
        let t = build_argmax_transformer();
        let out = t.s2s(&col(&xs)).unwrap();
        prop_assert_eq!(out.len(), xs.len());
        prop_assert_eq!(out, col(&argmax_marking(&xs)));
    }

    #[test]
    fn sorted_builder_matches_oracle(mut xs in rational_seq(), sort in any::<bool>()) {
        if sort {
            xs.sort();
        }
        let t = build_sorted_recognizer();
        let want = if is_sorted(&xs) { Rational::one() } else { Rational::zero() };
        prop_assert_eq!(t.s2v(&col(&xs)).unwrap(), vec![want]);
    }

    #[test]
    fn exact_and_float_agree(xs in rational_seq()) {
        let fl: Vec<Vec<f64>> = xs.iter().map(|x| vec![x.to_f64()]).collect();
        for t in [build_argmax_transformer(), build_sorted_recognizer()] {
            let exact = t.s2s(&col(&xs)).unwrap();
            let float = t.s2s(&fl).unwrap();
            for (a, b) in exact.iter().zip(&float) {
                prop_assert_eq!(a[0].to_f64(), b[0]);
            }
        }
    }

    #[test]
    fn masked_and_full_second_layer_agree_at_the_end(xs in rational_seq()) {
        let t = build_sorted_recognizer();
        let hidden = t.trace(&col(&xs), Exec::Sequential).unwrap();
        let l = &t.layers()[1];
        let masked = l.attention.masked(&hidden[1], Exec::Sequential).unwrap();
        let full = l.attention.self_attend(&hidden[1], Exec::Sequential).unwrap();
        prop_assert_eq!(masked.last(), full.last());
    }

    #[test]
    fn execution_modes_agree(xs in rational_seq()) {
        let t = build_argmax_transformer();
        prop_assert_eq!(t.s2s_with(&col(&xs), Exec::Sequential).unwrap(), t.s2s_with(&col(&xs), Exec::Parallel).unwrap());
    }

    #[test]
    fn dyck_builder_matches_oracle(w in prop::collection::vec(any::<bool>(), 1..16)) {
        let codec = OneHotCodec::new(&["<", ">"]).unwrap();
        let idx: Vec<usize> = w.iter().map(|&open| if open { 0 } else { 1 }).collect();
        let out = build_dyck_recognizer().s2v(&codec.encode_indices(&idx)).unwrap();
        prop_assert_eq!(out[0].is_zero(), is_balanced(&w));
    }

    #[test]
    fn weight_functions_are_distributions(xs in prop::collection::vec(-20i64..20, 1..10)) {
        let s: Vec<Rational> = xs.iter().map(|&x| Rational::from_int(x)).collect();
        for kind in [WeightFn::MinArgmax, WeightFn::AvgArgmax] {
            let p = weights(kind, &s).unwrap();
            prop_assert_eq!(p.iter().fold(Rational::zero(), |a, b| a + b), Rational::one());
        }
        let f: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        let p = weights(WeightFn::Softmax, &f).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
