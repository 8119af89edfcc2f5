//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use verinet::automata::{Buchi, Label, Sym, UPWord};
use verinet::compilers::Cnf3;
use verinet::linalg::Matrix;
use verinet::logic::{Formula, NetAtom, NetworkBinding, Term};
use verinet::nn::{Activation, Ffnn, Layer};
use verinet::seq::{Morphism, Pfa};
use verinet::Rational;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A rational with numerator in `[-num, num]` and denominator in `[1, den]`.
pub fn rational(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn rationals(rng: &mut impl Rng, n: usize, num: i64, den: i64) -> Vec<Rational> {
    (0..n).map(|_| rational(rng, num, den)).collect()
}

/// Random network of the given widths: ReLU hidden layers and an identity output layer.
pub fn relu_net(rng: &mut impl Rng, dims: &[usize]) -> Ffnn {
    let mut layers = Vec::new();
    for (i, w) in dims.windows(2).enumerate() {
        let rows = (0..w[1]).map(|_| (0..w[0]).map(|_| rational(rng, 2, 2)).collect()).collect();
        let bias = (0..w[1]).map(|_| Rational::from_int(rng.gen_range(-2..=2))).collect();
        let act = if i + 2 == dims.len() { Activation::Id } else { Activation::Relu };
        layers.push(Layer::new(Matrix::from_rows(rows).unwrap(), bias, act).unwrap());
    }
    Ffnn::new(layers).unwrap()
}

/// Widths `[inputs, hidden.., outputs]` with at most `max_neurons` non-input neurons.
pub fn relu_dims(rng: &mut impl Rng, inputs: usize, outputs: usize, max_neurons: usize) -> Vec<usize> {
    let mut dims = vec![inputs];
    let mut budget = max_neurons - outputs;
    let hidden_layers = rng.gen_range(1..=2);
    for _ in 0..hidden_layers {
        if budget == 0 {
            break;
        }
        let w = rng.gen_range(1..=budget.min(4));
        dims.push(w);
        budget -= w;
    }
    dims.push(outputs);
    dims
}

/// `Σ c_i·x_i ⋈ k` with small coefficients, at least one of them nonzero.
pub fn linear_atom(rng: &mut impl Rng, vars: &[String]) -> Formula {
    let mut t = Term::int(0);
    let mut any = false;
    for v in vars {
        let c = rng.gen_range(-2..=2);
        if c != 0 && rng.gen_bool(0.6) {
            t = Term::add(t, Term::scaled(Rational::from_int(c), v));
            any = true;
        }
    }
    if !any {
        t = Term::var(&vars[rng.gen_range(0..vars.len())]);
    }
    let k = Term::constant(rational(rng, 3, 2));
    match rng.gen_range(0..4) {
        0 => Formula::le(t, k),
        1 => Formula::lt(t, k),
        2 => Formula::eq(t, k),
        _ => Formula::le(k, t),
    }
}

/// Random and/or tree over the atoms, using each exactly once.
pub fn combine(rng: &mut impl Rng, mut atoms: Vec<Formula>) -> Formula {
    while atoms.len() > 1 {
        let a = atoms.remove(rng.gen_range(0..atoms.len()));
        let b = atoms.remove(rng.gen_range(0..atoms.len()));
        atoms.push(if rng.gen_bool(0.6) { Formula::and(a, b) } else { Formula::or(a, b) });
    }
    atoms.pop().unwrap()
}

pub fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// `∃x1..xk. φ` with `k ≤ max_vars` and at most `max_atoms` linear atoms.
pub fn exists_lra(rng: &mut impl Rng, max_vars: usize, max_atoms: usize) -> Formula {
    let vars = var_names("x", rng.gen_range(1..=max_vars));
    let atoms = (0..rng.gen_range(1..=max_atoms)).map(|_| linear_atom(rng, &vars)).collect();
    Formula::exists_many(&vars, combine(rng, atoms))
}

/// `∃x y. N(x) = y ∧ ψ` over a fresh random ReLU network bound to `N`.
pub fn exists_nnl(rng: &mut impl Rng, max_neurons: usize) -> (Formula, NetworkBinding) {
    let m = rng.gen_range(1..=2);
    let n = rng.gen_range(1..=2);
    let dims = relu_dims(rng, m, n, max_neurons);
    let net = relu_net(rng, &dims);
    let xs = var_names("x", m);
    let ys = var_names("y", n);
    let atom = NetAtom::from_vars("N", xs.clone(), ys.clone());
    let all: Vec<String> = xs.iter().chain(&ys).cloned().collect();
    let mut parts = vec![if rng.gen_bool(0.2) { Formula::NegNnAtom(atom) } else { Formula::nn(atom) }];
    let constraints = (0..rng.gen_range(1..=3)).map(|_| linear_atom(rng, &all)).collect();
    parts.push(combine(rng, constraints));
    let mut nets = NetworkBinding::new();
    nets.insert("N".into(), net);
    (Formula::exists_many(&all, Formula::and_all(parts)), nets)
}

pub fn cnf(rng: &mut impl Rng, max_vars: usize, max_clauses: usize) -> Cnf3 {
    let m = rng.gen_range(1..=max_vars);
    let k = rng.gen_range(1..=max_clauses);
    let clauses = (0..k)
        .map(|_| {
            let mut c = [0i32; 3];
            for l in c.iter_mut() {
                let v = rng.gen_range(1..=m as i32);
                *l = if rng.gen_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    Cnf3::new(m, clauses).unwrap()
}

/// Column-stochastic automaton with `n` states over `letters` letters.
pub fn pfa(rng: &mut impl Rng, n: usize, letters: usize) -> Pfa {
    let alphabet: Vec<String> = (0..letters).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let matrices = (0..letters)
        .map(|_| {
            let mut m = Matrix::zeros(n, n);
            for col in 0..n {
                let mut w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
                if w.iter().all(|&v| v == 0) {
                    w[rng.gen_range(0..n)] = 1;
                }
                let total: i64 = w.iter().sum();
                for (row, v) in w.into_iter().enumerate() {
                    m.set(row, col, Rational::new(v, total));
                }
            }
            m
        })
        .collect();
    let mut lambda = vec![Rational::zero(); n];
    lambda[rng.gen_range(0..n)] = Rational::one();
    let gamma = (0..n).map(|_| if rng.gen_bool(0.5) { Rational::one() } else { Rational::zero() }).collect();
    Pfa::new(alphabet, matrices, lambda, gamma).unwrap()
}

pub fn morphism(rng: &mut impl Rng, letters: usize, max_len: usize) -> Morphism {
    (0..letters).map(|_| (0..rng.gen_range(1..=max_len)).map(|_| rng.gen_bool(0.5)).collect()).collect()
}

/// Morphism pairs over two letters: random, identical, or `(uv, v)` against
/// `(u, vv)`, for which `ab` is a solution.
pub fn morphism_pair(rng: &mut impl Rng) -> (Morphism, Morphism) {
    match rng.gen_range(0..3) {
        0 => (morphism(rng, 2, 3), morphism(rng, 2, 3)),
        1 => {
            let f = morphism(rng, 2, 3);
            (f.clone(), f)
        }
        _ => {
            let g = morphism(rng, 2, 2);
            let (u, v) = (g[0].clone(), g[1].clone());
            let uv: Vec<bool> = u.iter().chain(&v).copied().collect();
            let vv: Vec<bool> = v.iter().chain(&v).copied().collect();
            (vec![uv, v], vec![u, vv])
        }
    }
}

pub const ZERO: u8 = 1 << Sym::Zero as u8;
pub const ONE: u8 = 1 << Sym::One as u8;

/// All `u·v^ω` over `{0,1}` with `|u| ≤ max_prefix` and `1 ≤ |v| ≤ max_period`.
pub fn binary_battery(max_prefix: usize, max_period: usize) -> Vec<UPWord> {
    fn strings(max: usize, min: usize) -> Vec<String> {
        let mut out = Vec::new();
        for len in min..=max {
            for bits in 0..1u32 << len {
                out.push((0..len).map(|i| if bits >> i & 1 == 1 { '1' } else { '0' }).collect());
            }
        }
        out
    }
    let mut words = Vec::new();
    for u in strings(max_prefix, 0) {
        for v in strings(max_period, 1) {
            words.push(UPWord::from_tracks(&[&u], &[&v]).unwrap());
        }
    }
    words
}

/// Complete deterministic automaton over `{0,1}` (one track).
pub fn random_deterministic(rng: &mut impl Rng, states: usize) -> Buchi {
    let mut a = Buchi::new(1);
    for _ in 1..states {
        a.add_state(false);
    }
    for q in 0..states {
        a.set_final(q, rng.gen_bool(0.4));
        for mask in [ZERO, ONE] {
            a.add_edge(q, Label::from_masks(&[mask]), rng.gen_range(0..states));
        }
    }
    a
}

/// Nondeterministic automaton whose edges never go back to an earlier state,
/// so every strongly connected component is a single state and it is weak.
pub fn random_weak(rng: &mut impl Rng, states: usize) -> Buchi {
    let mut a = Buchi::new(1);
    for _ in 1..states {
        a.add_state(false);
    }
    for q in 0..states {
        a.set_final(q, rng.gen_bool(0.4));
        for mask in [ZERO, ONE, ZERO | ONE] {
            if rng.gen_bool(0.5) {
                a.add_edge(q, Label::from_masks(&[mask]), rng.gen_range(q..states));
            }
        }
    }
    a
}
