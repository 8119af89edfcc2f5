//! Translations between networks, logics and decision problems.

pub mod reference;
mod relu;
pub mod sat;

pub use reference::{
    activation_nets, nnlstar_to_ref, phi_exp, phi_ln, phi_mult, ref_to_nnlstar, ref_to_nnlstar_traced,
    residual, residual_with_hints, NET_NLRELU, NET_SIGMOID, NET_TANH,
};
pub use relu::id_to_relu;
pub use sat::{bool_gadget, clause_gadget, sat3_to_reach, Cnf3, ReachInstance};

use crate::error::{Error, Result};
use crate::logic::dialect::{validate, Dialect};
use crate::logic::{Formula, Fresh, NetAtom, NetworkBinding, Term, Var};
use crate::nn::{Activation, Ffnn, Layer};
use crate::rational::Rational;

/// Which activations a network encoding may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Target {
    Lra,
    Ref,
}

/// `b_i + Σ_j a_ij·x_j`, leaving out zero weights.
pub(crate) fn affine(layer: &Layer, i: usize, xs: &[Var]) -> Term {
    let mut parts = vec![Term::Const(layer.bias[i].clone())];
    for (j, x) in xs.iter().enumerate() {
        let a = layer.weights.get(i, j);
        if !a.is_zero() {
            parts.push(Term::Var(a.clone(), x.clone()));
        }
    }
    if parts.len() > 1 && layer.bias[i].is_zero() {
        parts.remove(0);
    }
    Term::sum(parts)
}

fn neuron(act: Activation, z: &Var, y: &Var) -> Formula {
    let (zt, yt) = (Term::var(z), Term::var(y));
    let zero = Term::int(0);
    match act {
        Activation::Relu => Formula::or(
            Formula::and(Formula::le(zt.clone(), zero.clone()), Formula::eq(yt.clone(), zero.clone())),
            Formula::and(Formula::lt(zero, zt.clone()), Formula::eq(yt, zt)),
        ),
        Activation::Sigmoid => Formula::eq(
            Term::mul(yt, Term::add(Term::int(1), Term::exp(zt.clone()))),
            Term::exp(zt),
        ),
        Activation::Tanh => {
            let e2z = Term::exp(Term::Var(Rational::from_int(2), z.clone()));
            Formula::eq(
                Term::mul(yt, Term::add(e2z.clone(), Term::int(1))),
                Term::add(e2z, Term::int(-1)),
            )
        }
        Activation::Nlrelu => Formula::or(
            Formula::and(Formula::le(zt.clone(), zero.clone()), Formula::eq(yt.clone(), zero.clone())),
            Formula::and(Formula::lt(zero, zt.clone()), Formula::eq(Term::exp(yt), Term::add(zt, Term::int(1)))),
        ),
        Activation::Id | Activation::Softmax | Activation::Heaviside => unreachable!("filtered by caller"),
    }
}

fn check_activation(net: &Ffnn, target: Target) -> Result<()> {
    for (idx, layer) in net.layers().iter().enumerate() {
        let ok = match layer.activation {
            Activation::Id | Activation::Relu => true,
            Activation::Sigmoid | Activation::Tanh | Activation::Nlrelu => target == Target::Ref,
            Activation::Softmax | Activation::Heaviside => false,
        };
        if !ok {
            return Err(Error::Unsupported(format!(
                "activation {} in layer {} cannot be encoded",
                layer.activation.name(),
                idx + 1
            )));
        }
    }
    Ok(())
}

fn layer_formula(layer: &Layer, xs: &[Var], ys: &[Var], fresh: &mut Fresh) -> Formula {
    let parts = (0..layer.out_dim())
        .map(|i| {
            let t = affine(layer, i, xs);
            if layer.activation == Activation::Id {
                Formula::eq(Term::var(&ys[i]), t)
            } else {
                let z = fresh.var("z");
                Formula::exists(&z, Formula::and(Formula::eq(Term::var(&z), t), neuron(layer.activation, &z, &ys[i])))
            }
        })
        .collect();
    Formula::and_all(parts)
}

pub(crate) fn encode_network(
    net: &Ffnn,
    xs: &[Var],
    ys: &[Var],
    fresh: &mut Fresh,
    target: Target,
) -> Result<Formula> {
    check_activation(net, target)?;
    if xs.len() != net.in_dim() || ys.len() != net.out_dim() {
        return Err(Error::Arity { expected: net.in_dim() + net.out_dim(), found: xs.len() + ys.len() });
    }
    Ok(encode_layers(net.layers(), xs, ys, fresh))
}

fn encode_layers(layers: &[Layer], xs: &[Var], ys: &[Var], fresh: &mut Fresh) -> Formula {
    let (last, init) = layers.split_last().expect("networks have at least one layer");
    if init.is_empty() {
        return layer_formula(last, xs, ys, fresh);
    }
    let zs: Vec<Var> = (0..last.in_dim()).map(|_| fresh.var("h")).collect();
    let first = encode_layers(init, xs, &zs, fresh);
    let second = layer_formula(last, &zs, ys, fresh);
    Formula::exists_many(&zs, Formula::and(first, second))
}

/// LRA formula `φ_N(x̄, ȳ)` satisfied exactly by the input/output pairs of an id/ReLU network.
pub fn nn_to_lra(net: &Ffnn, xs: &[Var], ys: &[Var]) -> Result<Formula> {
    let mut fresh = Fresh::avoiding(&Formula::nn(NetAtom::from_vars("N", xs.to_vec(), ys.to_vec())));
    encode_network(net, xs, ys, &mut fresh, Target::Lra)
}

fn lookup<'a>(nets: &'a NetworkBinding, name: &str) -> Result<&'a Ffnn> {
    nets.get(name).ok_or_else(|| Error::Unbound(format!("network {name}")))
}

/// `∃z̄. φ_N(x̄, z̄) ∧ ⋁ y_i ≠ z_i`
fn negated_atom(atom: &NetAtom, nets: &NetworkBinding, fresh: &mut Fresh, target: Target) -> Result<Formula> {
    let net = lookup(nets, &atom.net)?;
    let zs: Vec<Var> = atom.outputs.iter().map(|_| fresh.var("o")).collect();
    let phi = encode_network(net, &atom.inputs, &zs, fresh, target)?;
    let differs = atom
        .outputs
        .iter()
        .zip(&zs)
        .map(|(y, z)| Formula::ne(Term::var(y), Term::var(z)))
        .collect();
    Ok(Formula::exists_many(&zs, Formula::and(phi, Formula::or_all(differs))))
}

fn lower(phi: &Formula, nets: &NetworkBinding, fresh: &mut Fresh, target: Target) -> Result<Formula> {
    use Formula::*;
    let rec = |f: &Formula, fresh: &mut Fresh| lower(f, nets, fresh, target);
    Ok(match phi {
        NnAtom(a) => encode_network(lookup(nets, &a.net)?, &a.inputs, &a.outputs, fresh, target)?,
        NegNnAtom(a) => negated_atom(a, nets, fresh, target)?,
        Not(f) => match &**f {
            NnAtom(a) => negated_atom(a, nets, fresh, target)?,
            g => Formula::not(rec(g, fresh)?),
        },
        Or(a, b) => Formula::or(rec(a, fresh)?, rec(b, fresh)?),
        And(a, b) => Formula::and(rec(a, fresh)?, rec(b, fresh)?),
        Implies(a, b) => Formula::implies(rec(a, fresh)?, rec(b, fresh)?),
        Iff(a, b) => Formula::iff(rec(a, fresh)?, rec(b, fresh)?),
        Exists(x, f) => Formula::exists(x, rec(f, fresh)?),
        Forall(x, f) => Formula::forall(x, rec(f, fresh)?),
        other => other.clone(),
    })
}

/// Replaces every network atom of an NNL formula by its LRA encoding.
pub fn nnl_lower(phi: &Formula, nets: &NetworkBinding) -> Result<Formula> {
    validate(phi, Dialect::NnlPlus)?;
    lower(phi, nets, &mut Fresh::avoiding(phi), Target::Lra)
}

/// Replaces every network atom of an ∃NNL formula, producing an ∃LRA formula.
pub fn exists_nnl_lower(phi: &Formula, nets: &NetworkBinding) -> Result<Formula> {
    validate(phi, Dialect::ExistsNnl)?;
    let out = lower(phi, nets, &mut Fresh::avoiding(phi), Target::Lra)?;
    debug_assert!(validate(&out, Dialect::ExistsLra).is_ok());
    Ok(out)
}

pub(crate) fn lower_ref(phi: &Formula, nets: &NetworkBinding) -> Result<Formula> {
    lower(phi, nets, &mut Fresh::avoiding(phi), Target::Ref)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ints, Matrix};
    use crate::logic::parser::parse_formula;
    use crate::nn::examples::max_network;

    fn one_neuron(w: i64, b: i64, act: Activation) -> Ffnn {
        Ffnn::new(vec![Layer::new(Matrix::from_rows(vec![ints(&[w])]).unwrap(), ints(&[b]), act).unwrap()]).unwrap()
    }

    #[test]
    fn identity_layer_is_an_equation() {
        let f = nn_to_lra(&one_neuron(2, 1, Activation::Id), &["x".into()], &["y".into()]).unwrap();
        assert_eq!(f, parse_formula("y = 1 + 2*x").unwrap());
    }

    #[test]
    fn negated_atom_is_existential_lra() {
        let mut nets = NetworkBinding::new();
        nets.insert("N".into(), one_neuron(1, 0, Activation::Id));
        let f = exists_nnl_lower(&parse_formula("N(r) != (s)").unwrap(), &nets).unwrap();
        let Formula::Exists(z, body) = &f else { panic!("expected an existential, got {f}") };
        assert!(validate(&f, Dialect::ExistsLra).is_ok());
        assert_eq!(**body, parse_formula(&format!("{z} = r && s != {z}").replace('$', "")).unwrap().rename_free(
            &[(z.trim_start_matches('$').to_string(), z.clone())].into_iter().collect()
        ));
    }

    #[test]
    fn max_network_free_variables() {
        let f = nn_to_lra(&max_network(), &["x1".into(), "x2".into()], &["y".into()]).unwrap();
        assert!(!f.is_quantifier_free());
        let names: Vec<_> = f.free_vars().into_iter().collect();
        assert_eq!(names, ["x1", "x2", "y"]);
    }

    #[test]
    fn rejects_sigmoid_in_lra() {
        let err = nn_to_lra(&one_neuron(1, 0, Activation::Sigmoid), &["x".into()], &["y".into()]).unwrap_err();
        assert!(err.to_string().contains("layer 1"));
    }
}
