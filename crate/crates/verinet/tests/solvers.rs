mod common;

use proptest::prelude::*;

use verinet::compilers::{id_to_relu, sat3_to_reach, Cnf3};
use verinet::exec::Exec;
use verinet::exists::{solve_exists_lra, Outcome, Solver};
use verinet::logic::parser::parse_formula;
use verinet::logic::printer::print;
use verinet::logic::specs::{build_spec, SpecParams};
use verinet::logic::{holds, Formula, NetworkBinding};
use verinet::lra::{decide_nnl_sentence, decide_sentence, witness_exists};
use verinet::nn::examples::max_network;
use verinet::nn::Ffnn;
use verinet::Rational;

fn body(phi: &Formula) -> &Formula {
    match phi {
        Formula::Exists(_, f) => body(f),
        f => f,
    }
}

fn bind(name: &str, net: Ffnn) -> NetworkBinding {
    let mut nets = NetworkBinding::new();
    nets.insert(name.into(), net);
    nets
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let phi = common::exists_lra(&mut common::rng(seed), 3, 4);
        let text = print(&phi);
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(print(&back), text);
        prop_assert_eq!(decide_sentence(&back).unwrap(), decide_sentence(&phi).unwrap());
    }

    #[test]
    fn witnesses_satisfy_the_matrix(seed in any::<u64>()) {
        let phi = common::exists_lra(&mut common::rng(seed), 2, 3);
        let none = NetworkBinding::new();
        let truth = decide_sentence(&phi).unwrap();
        let w = witness_exists(&phi, &none).unwrap();
        prop_assert_eq!(w.is_some(), truth);
        if let Some(i) = w {
            prop_assert!(holds(body(&phi), &i, &none).unwrap());
        }
        match solve_exists_lra(&phi).unwrap() {
            Outcome::Sat(i) => {
                prop_assert!(truth);
                prop_assert!(holds(body(&phi), &i, &none).unwrap());
            }
            Outcome::Unsat => prop_assert!(!truth),
        }
    }

    #[test]
    fn relu_rewrite_and_json_preserve_networks(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let dims = common::relu_dims(&mut rng, 2, 2, 6);
        let net = common::relu_net(&mut rng, &dims);
        let back = Ffnn::from_json(&net.to_json()).unwrap();
        let relu = id_to_relu(&net);
        for _ in 0..10 {
            let x = common::rationals(&mut rng, 2, 20, 7);
            let y = net.eval(&x).unwrap();
            prop_assert_eq!(&back.eval(&x).unwrap(), &y);
            prop_assert_eq!(&relu.eval(&x).unwrap(), &y);
            let xf: Vec<f64> = x.iter().map(Rational::to_f64).collect();
            for (a, b) in net.eval_f64(&xf).unwrap().iter().zip(&y) {
                prop_assert!((a - b.to_f64()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exec_modes_agree_on_nnl_queries(seed in any::<u64>()) {
        let (phi, nets) = common::exists_nnl(&mut common::rng(seed), 5);
        let seq = Solver::new(Exec::Sequential).solve_exists_nnl(&phi, &nets).unwrap().is_sat();
        let par = Solver::new(Exec::Parallel).solve_exists_nnl(&phi, &nets).unwrap().is_sat();
        prop_assert_eq!(seq, par);
    }
}

#[test]
fn max_network_is_not_injective() {
    let nets = bind("N", max_network());
    let spec = build_spec("injective", &SpecParams::new(2, 1)).unwrap();
    assert!(!decide_nnl_sentence(&spec, &nets).unwrap());
    assert!(!Solver::default().prove(&spec, &nets).unwrap());
    let max = build_spec("max", &SpecParams::new(2, 1)).unwrap();
    assert!(decide_nnl_sentence(&max, &nets).unwrap());
}

#[test]
fn unsatisfiable_cnf_has_no_reachable_output() {
    // Every assignment of x1, x2 violates one of the four clauses.
    let cnf = Cnf3::new(2, vec![[1, 2, 2], [-1, 2, 2], [1, -2, -2], [-1, -2, -2]]).unwrap();
    assert!(cnf.brute_force().is_none());
    assert!(!verinet::exists::solve_reach(&sat3_to_reach(&cnf)).unwrap().is_sat());
    let text = cnf.to_dimacs();
    assert_eq!(Cnf3::from_dimacs(&text).unwrap().to_dimacs(), text);
}

#[test]
fn reach_witnesses_pass_the_instance_check() {
    let mut rng = common::rng(11);
    for _ in 0..20 {
        let cnf = common::cnf(&mut rng, 5, 8);
        let inst = sat3_to_reach(&cnf);
        if let Some(x) = verinet::exists::solve_reach(&inst).unwrap().model() {
            assert!(inst.check(&x).unwrap());
        }
    }
}
