mod common;

use proptest::prelude::*;

use verinet::automata::*;
use verinet::lra::{cl_proj, encode_tuple, normalize, wf_automaton};
use verinet::Rational;

fn automaton() -> impl Strategy<Value = Buchi> {
    (any::<u64>(), 1usize..=5, any::<bool>()).prop_map(|(seed, n, det)| {
        let mut rng = common::rng(seed);
        if det {
            common::random_deterministic(&mut rng, n)
        } else {
            common::random_weak(&mut rng, n)
        }
    })
}

fn language(a: &Buchi, words: &[UPWord]) -> Vec<bool> {
    words.iter().map(|w| accepts(a, w).unwrap()).collect()
}

/// Every `u·v^ω` over `{0,1}` with `|u| ≤ 3` and `1 ≤ |v| ≤ 4`.
fn short_words() -> Vec<UPWord> {
    common::binary_battery(3, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boolean_operations_are_pointwise(a in automaton(), b in automaton()) {
        let words = short_words();
        let (la, lb) = (language(&a, &words), language(&b, &words));
        let lu = language(&union(&a, &b).unwrap(), &words);
        let li = language(&intersect(&a, &b).unwrap(), &words);
        let lc = language(&complement(&a).unwrap(), &words);
        for t in 0..words.len() {
            prop_assert_eq!(lu[t], la[t] || lb[t]);
            prop_assert_eq!(li[t], la[t] && lb[t]);
            prop_assert_eq!(lc[t], !la[t]);
        }
    }

    #[test]
    fn double_complement_and_idempotence(a in automaton()) {
        let words = short_words();
        let la = language(&a, &words);
        let cc = complement(&complement(&a).unwrap()).unwrap();
        prop_assert_eq!(language(&cc, &words), la.clone());
        prop_assert_eq!(language(&intersect(&a, &a).unwrap(), &words), la.clone());
        prop_assert_eq!(language(&reduce(&a), &words), la);
    }

    #[test]
    fn emptiness_agrees_with_exhaustive_search(a in automaton()) {
        // Five states admit a lasso with a stem of at most 4 and a loop of at most 5 letters.
        let words = common::binary_battery(4, 5);
        let any_member = language(&a, &words).into_iter().any(|x| x);
        match is_empty(&a) {
            Some(w) => prop_assert!(accepts(&a, &w).unwrap()),
            None => prop_assert!(!any_member),
        }
        prop_assert_eq!(is_empty(&a).is_some(), any_member);
    }

    #[test]
    fn union_with_complement_is_universal(a in automaton()) {
        let u = union(&a, &complement(&a).unwrap()).unwrap();
        prop_assert!(language(&u, &short_words()).into_iter().all(|x| x));
        prop_assert!(is_empty(&intersect(&a, &complement(&a).unwrap()).unwrap()).is_none());
    }

    #[test]
    fn dump_round_trip(a in automaton()) {
        let b = Buchi::parse(&a.dump()).unwrap();
        prop_assert_eq!(language(&b, &short_words()), language(&a, &short_words()));
    }
}

#[test]
fn infinitely_many_ones_or_its_complement() {
    let a = infinitely_many_ones();
    let u = union(&a, &complement(&a).unwrap()).unwrap();
    for w in common::binary_battery(4, 4) {
        assert!(accepts(&u, &w).unwrap(), "{w}");
    }
}

#[test]
fn closure_is_extensive_and_idempotent() {
    let eq = verinet::lra::eq(2, 0, 1).unwrap();
    let once = cl_proj(&eq, 1).unwrap();
    let twice = normalize(&once);
    let mut rng = common::rng(23);
    for _ in 0..100 {
        let x = common::rational(&mut rng, 30, 8);
        let w = encode_tuple(&[x]).word;
        assert!(accepts(&once, &w).unwrap());
        assert_eq!(accepts(&twice, &w).unwrap(), accepts(&once, &w).unwrap());
    }
    assert!(is_empty(&intersect(&wf_automaton(1), &complement(&once).unwrap()).unwrap()).is_none());
}

#[test]
fn complement_rejects_nondeterministic_non_weak_input() {
    let mut a = Buchi::new(1);
    let q1 = a.add_state(true);
    let any = Label::full(1);
    a.add_edge(0, any, 0);
    a.add_edge(0, any, q1);
    a.add_edge(q1, Label::from_masks(&[common::ONE]), q1);
    a.add_edge(q1, Label::from_masks(&[common::ZERO]), 0);
    assert!(!a.is_weak() && !a.trim().is_deterministic());
    assert!(complement(&a).is_err());
}

#[test]
fn arithmetic_words_decode_back() {
    let mut rng = common::rng(29);
    for _ in 0..200 {
        let xs: Vec<Rational> = common::rationals(&mut rng, 3, 50, 9);
        let enc = encode_tuple(&xs);
        assert_eq!(verinet::lra::decode_tuple(&enc.word).unwrap(), xs);
    }
}
