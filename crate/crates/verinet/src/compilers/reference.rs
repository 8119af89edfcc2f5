//! Encodings between networks with smooth activations and the exponential field.
//!
//! Formulas in the exponential field are emitted but never decided. [`residual`] measures
//! in floating point how far an interpretation is from satisfying such a formula; existential
//! variables are solved from the defining equations the encodings always provide.

use std::collections::{BTreeMap, BTreeSet};

use super::lower_ref;
use crate::error::{Error, Result};
use crate::logic::abbrev::{expand, Keep};
use crate::logic::eval::eval_term_f64;
use crate::logic::prenex::nnf;
use crate::logic::{Formula, Fresh, NetAtom, NetworkBinding, Term, Var};
use crate::nn::{single_neuron, Activation, Ffnn};
use crate::rational::Rational;

pub const NET_NLRELU: &str = "NLReLU";
pub const NET_SIGMOID: &str = "Sigmoid";
pub const NET_TANH: &str = "Tanh";

/// Single-neuron networks referenced by [`ref_to_nnlstar`].
pub fn activation_nets() -> NetworkBinding {
    [
        (NET_NLRELU, Activation::Nlrelu),
        (NET_SIGMOID, Activation::Sigmoid),
        (NET_TANH, Activation::Tanh),
    ]
    .into_iter()
    .map(|(n, a)| (n.to_string(), single_neuron(a)))
    .collect()
}

/// Replaces network atoms by exponential-field formulas. Supports id, ReLU, NLReLU,
/// sigmoid and tanh layers.
pub fn nnlstar_to_ref(phi: &Formula, nets: &NetworkBinding) -> Result<Formula> {
    lower_ref(phi, nets)
}

fn f_atom(net: &str, input: &Var, output: &Var) -> Formula {
    Formula::nn(NetAtom::from_vars(net, vec![input.clone()], vec![output.clone()]))
}

fn v(x: &Var) -> Term {
    Term::var(x)
}

fn veq(a: &Var, t: Term) -> Formula {
    Formula::eq(v(a), t)
}

/// `ln(x) = y`, split at `x = 1`: above via `η(x − 1)`, below via `σ⁻¹(x) − 2·tanh⁻¹(x) + η(x)`.
pub fn phi_ln(x: &Var, y: &Var, fresh: &mut Fresh) -> Formula {
    let one = Term::int(1);
    let z = fresh.var("l");
    let upper = Formula::implies(
        Formula::le(one.clone(), v(x)),
        Formula::exists(
            &z,
            Formula::and(veq(&z, Term::add(v(x), Term::int(-1))), f_atom(NET_NLRELU, &z, y)),
        ),
    );
    let (z1, z2, z3) = (fresh.var("l"), fresh.var("l"), fresh.var("l"));
    let combo = Term::sum(vec![v(&z1), Term::Var(Rational::from(-2), z2.clone()), v(&z3)]);
    let lower = Formula::implies(
        Formula::lt(v(x), one),
        Formula::exists_many(
            &[z1.clone(), z2.clone(), z3.clone()],
            Formula::and_all(vec![
                veq(y, combo),
                f_atom(NET_SIGMOID, &z1, x),
                f_atom(NET_TANH, &z2, x),
                f_atom(NET_NLRELU, x, &z3),
            ]),
        ),
    );
    Formula::and_all(vec![Formula::lt(Term::int(0), v(x)), upper, lower])
}

/// `e^x = y`, obtained from `ln` by swapping the roles of the variables.
pub fn phi_exp(x: &Var, y: &Var, fresh: &mut Fresh) -> Formula {
    phi_ln(y, x, fresh)
}

fn sign_atom(x: &Var, negative: bool) -> Formula {
    if negative {
        Formula::lt(v(x), Term::int(0))
    } else {
        Formula::lt(Term::int(0), v(x))
    }
}

/// `x·y = z`. Zero factors force `z = 0`; each of the four non-zero sign patterns
/// multiplies absolute values through `ln` and `exp` and restores the sign.
pub fn phi_mult(x: &Var, y: &Var, z: &Var, fresh: &mut Fresh) -> Formula {
    let zero = Term::int(0);
    let mut parts = vec![Formula::implies(
        Formula::or(Formula::eq(v(x), zero.clone()), Formula::eq(v(y), zero.clone())),
        Formula::eq(v(z), zero),
    )];
    for (nx, ny) in [(false, false), (true, false), (false, true), (true, true)] {
        let (z1, z2, z3) = (fresh.var("m"), fresh.var("m"), fresh.var("m"));
        let mut bound = vec![z1.clone(), z2.clone(), z3.clone()];
        let mut body = Vec::new();
        let mut magnitude = |var: &Var, negative: bool, fresh: &mut Fresh| -> Var {
            if !negative {
                return var.clone();
            }
            let abs = fresh.var("a");
            bound.push(abs.clone());
            body.push(veq(&abs, v(var).neg()));
            abs
        };
        let ax = magnitude(x, nx, fresh);
        let ay = magnitude(y, ny, fresh);
        let target = if nx != ny {
            let zp = fresh.var("p");
            bound.push(zp.clone());
            zp
        } else {
            z.clone()
        };
        body.push(phi_ln(&ax, &z1, fresh));
        body.push(phi_ln(&ay, &z2, fresh));
        body.push(veq(&z3, Term::add(v(&z1), v(&z2))));
        body.push(phi_exp(&z3, &target, fresh));
        if target != *z {
            body.push(veq(z, v(&target).neg()));
        }
        parts.push(Formula::implies(
            Formula::and(sign_atom(x, nx), sign_atom(y, ny)),
            Formula::exists_many(&bound, Formula::and_all(body)),
        ));
    }
    Formula::and_all(parts)
}

struct Flattener<'a> {
    fresh: &'a mut Fresh,
    names: BTreeMap<Term, Var>,
    order: Vec<Var>,
    defs: Vec<Formula>,
    trace: Vec<(Var, Term)>,
}

impl Flattener<'_> {
    fn name(&mut self, t: &Term) -> Var {
        if let Some(z) = self.names.get(t) {
            return z.clone();
        }
        let def = match t {
            Term::Var(..) | Term::Const(_) => None,
            Term::Add(a, b) => Some((self.name(a), Some(self.name(b)), 0)),
            Term::Mul(a, b) => Some((self.name(a), Some(self.name(b)), 1)),
            Term::Exp(a) => Some((self.name(a), None, 2)),
        };
        let z = self.fresh.var("t");
        let psi = match def {
            None => veq(&z, t.clone()),
            Some((a, Some(b), 0)) => Formula::eq(Term::add(v(&a), v(&b)), v(&z)),
            Some((a, Some(b), _)) => phi_mult(&a, &b, &z, self.fresh),
            Some((a, None, _)) => phi_exp(&a, &z, self.fresh),
        };
        self.names.insert(t.clone(), z.clone());
        self.order.push(z.clone());
        self.defs.push(psi);
        self.trace.push((z.clone(), t.clone()));
        z
    }
}

fn flatten_atom(
    make: fn(Term, Term) -> Formula,
    a: &Term,
    b: &Term,
    fresh: &mut Fresh,
    trace: &mut Vec<(Var, Term)>,
) -> Formula {
    let mut fl = Flattener { fresh, names: BTreeMap::new(), order: Vec::new(), defs: Vec::new(), trace: Vec::new() };
    let za = fl.name(a);
    let zb = fl.name(b);
    let mut body = vec![make(v(&za), v(&zb))];
    body.append(&mut fl.defs);
    trace.append(&mut fl.trace);
    Formula::exists_many(&fl.order, Formula::and_all(body))
}

fn to_nnlstar(phi: &Formula, fresh: &mut Fresh, trace: &mut Vec<(Var, Term)>) -> Result<Formula> {
    use Formula::*;
    Ok(match phi {
        Le(a, b) => flatten_atom(Formula::le, a, b, fresh, trace),
        Lt(a, b) => flatten_atom(Formula::lt, a, b, fresh, trace),
        Eq(a, b) => flatten_atom(Formula::eq, a, b, fresh, trace),
        Ne(a, b) => flatten_atom(Formula::ne, a, b, fresh, trace),
        Not(f) => Formula::not(to_nnlstar(f, fresh, trace)?),
        Or(a, b) => Formula::or(to_nnlstar(a, fresh, trace)?, to_nnlstar(b, fresh, trace)?),
        And(a, b) => Formula::and(to_nnlstar(a, fresh, trace)?, to_nnlstar(b, fresh, trace)?),
        Implies(a, b) => Formula::implies(to_nnlstar(a, fresh, trace)?, to_nnlstar(b, fresh, trace)?),
        Iff(a, b) => Formula::iff(to_nnlstar(a, fresh, trace)?, to_nnlstar(b, fresh, trace)?),
        Exists(x, f) => Formula::exists(x, to_nnlstar(f, fresh, trace)?),
        Forall(x, f) => Formula::forall(x, to_nnlstar(f, fresh, trace)?),
        NnAtom(_) | NegNnAtom(_) | IsPowerOfTwo(_) => {
            return Err(Error::Dialect(format!("`{phi}` is not an exponential-field formula")))
        }
        In(..) | IsMax(..) | ArgmaxIs(..) | ArgmaxEq(..) => to_nnlstar(&expand(phi, Keep::NORMAL), fresh, trace)?,
    })
}

/// Translates an exponential-field formula into NNL over NLReLU, sigmoid and tanh neurons.
/// Returns the formula together with the networks it refers to.
pub fn ref_to_nnlstar(phi: &Formula) -> Result<(Formula, NetworkBinding)> {
    let (f, nets, _) = ref_to_nnlstar_traced(phi)?;
    Ok((f, nets))
}

/// Fresh variables paired with the subterms they name.
pub type Naming = Vec<(Var, Term)>;

/// Like [`ref_to_nnlstar`], additionally listing which subterm each fresh `z_t` names.
pub fn ref_to_nnlstar_traced(phi: &Formula) -> Result<(Formula, NetworkBinding, Naming)> {
    let mut fresh = Fresh::avoiding(phi);
    let mut trace = Vec::new();
    let f = to_nnlstar(phi, &mut fresh, &mut trace)?;
    Ok((f, activation_nets(), trace))
}

type Env = BTreeMap<Var, f64>;

fn holds_f64(phi: &Formula, env: &Env) -> Option<bool> {
    let t = |t: &Term| eval_term_f64(t, env).ok();
    Some(match phi {
        Formula::Le(a, b) => t(a)? <= t(b)?,
        Formula::Lt(a, b) => t(a)? < t(b)?,
        Formula::Eq(a, b) => t(a)? == t(b)?,
        Formula::Ne(a, b) => t(a)? != t(b)?,
        Formula::Not(f) => !holds_f64(f, env)?,
        Formula::And(a, b) => holds_f64(a, env)? && holds_f64(b, env)?,
        Formula::Or(a, b) => holds_f64(a, env)? || holds_f64(b, env)?,
        _ => return None,
    })
}

fn mentions(t: &Term, u: &Var) -> bool {
    let mut vs = BTreeSet::new();
    t.vars(&mut vs);
    vs.contains(u)
}

fn affine_in(t: &Term, u: &Var) -> bool {
    match t {
        Term::Var(..) | Term::Const(_) => true,
        Term::Add(a, b) => affine_in(a, u) && affine_in(b, u),
        Term::Mul(a, b) => (!mentions(a, u) && affine_in(b, u)) || (!mentions(b, u) && affine_in(a, u)),
        Term::Exp(a) => !mentions(a, u),
    }
}

fn solve_affine(t: &Term, u: &Var, env: &Env) -> Option<f64> {
    let at = |x: f64| {
        let mut e = env.clone();
        e.insert(u.clone(), x);
        eval_term_f64(t, &e).ok()
    };
    let (f0, f1) = (at(0.0)?, at(1.0)?);
    let slope = f1 - f0;
    (slope != 0.0 && slope.is_finite()).then(|| -f0 / slope)
}

fn invert(act: Activation, y: f64) -> Option<f64> {
    match act {
        Activation::Id => Some(y),
        Activation::Relu => (y >= 0.0).then_some(y),
        Activation::Nlrelu => (y >= 0.0).then(|| y.exp_m1()),
        Activation::Sigmoid => (y > 0.0 && y < 1.0).then(|| (y / (1.0 - y)).ln()),
        Activation::Tanh => (y.abs() < 1.0).then(|| y.atanh()),
        _ => None,
    }
}

fn solve_equation(a: &Term, b: &Term, u: &Var, env: &Env) -> Option<f64> {
    let diff = Term::add(a.clone(), b.neg());
    if affine_in(&diff, u) {
        return solve_affine(&diff, u, env);
    }
    for (l, r) in [(a, b), (b, a)] {
        if let Term::Exp(inner) = l {
            if !mentions(r, u) && affine_in(inner, u) {
                let target = eval_term_f64(r, env).ok()?;
                if target > 0.0 {
                    return solve_affine(&Term::add((**inner).clone(), Term::Const(Rational::from_f64(-target.ln())?)), u, env);
                }
            }
        }
    }
    None
}

struct Solver<'a> {
    nets: &'a NetworkBinding,
    hints: &'a Env,
}

impl Solver<'_> {
    fn network(&self, a: &NetAtom) -> Result<&Ffnn> {
        self.nets.get(&a.net).ok_or_else(|| Error::Unbound(format!("network {}", a.net)))
    }

    /// Value of `u` that makes `phi` hold, given values for all its other free variables.
    fn infer(&self, phi: &Formula, u: &Var, env: &Env) -> Option<f64> {
        match phi {
            Formula::Eq(a, b) => solve_equation(a, b, u, env),
            Formula::NnAtom(a) => {
                let net = self.network(a).ok()?;
                if let Some(pos) = a.outputs.iter().position(|y| y == u) {
                    let x: Option<Vec<f64>> = a.inputs.iter().map(|x| env.get(x).copied()).collect();
                    return net.eval_f64(&x?).ok().map(|out| out[pos]);
                }
                let [layer] = net.layers() else { return None };
                if a.inputs.len() != 1 || a.outputs.len() != 1 {
                    return None;
                }
                let y = *env.get(&a.outputs[0])?;
                let pre = invert(layer.activation, y)?;
                let (w, b) = (layer.weights.get(0, 0).to_f64(), layer.bias[0].to_f64());
                (w != 0.0).then(|| (pre - b) / w)
            }
            Formula::And(..) | Formula::Exists(..) => {
                let mut block = Vec::new();
                let mut body = phi;
                while let Formula::Exists(x, f) = body {
                    block.push(x.clone());
                    body = f;
                }
                block.push(u.clone());
                let solved = self.propagate(body, &block, env);
                solved.get(u).copied()
            }
            Formula::Implies(p, q) => match holds_f64(p, env) {
                Some(true) => self.infer(q, u, env),
                Some(false) => None,
                None => {
                    let candidate = self.infer(q, u, env)?;
                    let mut e = env.clone();
                    e.insert(u.clone(), candidate);
                    (holds_f64(p, &e) == Some(true)).then_some(candidate)
                }
            },
            Formula::Or(a, b) => [a, b].into_iter().find_map(|d| {
                let c = self.infer(d, u, env)?;
                let mut e = env.clone();
                e.insert(u.clone(), c);
                (self.residual(d, &e).ok()? <= 1e-6).then_some(c)
            }),
            _ => None,
        }
    }

    /// Assigns the `unknown` variables from the conjuncts of `body`, as far as possible.
    fn propagate(&self, body: &Formula, unknown: &[Var], env: &Env) -> Env {
        let mut env = env.clone();
        for u in unknown {
            env.remove(u);
            if let Some(h) = self.hints.get(u) {
                env.insert(u.clone(), *h);
            }
        }
        let parts = crate::logic::dialect::conjuncts(body);
        loop {
            let mut progress = false;
            for p in &parts {
                let open: Vec<Var> =
                    p.free_vars().into_iter().filter(|x| unknown.contains(x) && !env.contains_key(x)).collect();
                if open.is_empty() {
                    continue;
                }
                if let Formula::NnAtom(a) = p {
                    if a.inputs.iter().all(|x| env.contains_key(x)) {
                        let x: Vec<f64> = a.inputs.iter().map(|x| env[x]).collect();
                        if let Ok(out) = self.network(a).and_then(|n| n.eval_f64(&x)) {
                            for (y, val) in a.outputs.iter().zip(out) {
                                env.entry(y.clone()).or_insert(val);
                            }
                            progress = true;
                        }
                        continue;
                    }
                }
                if open.len() == 1 {
                    if let Some(val) = self.infer(p, &open[0], &env) {
                        env.insert(open[0].clone(), val);
                        progress = true;
                    }
                }
            }
            if !progress {
                return env;
            }
        }
    }

    fn residual(&self, phi: &Formula, env: &Env) -> Result<f64> {
        let t = |t: &Term| eval_term_f64(t, env);
        Ok(match phi {
            Formula::Le(a, b) | Formula::Lt(a, b) => (t(a)? - t(b)?).max(0.0),
            Formula::Eq(a, b) => (t(a)? - t(b)?).abs(),
            Formula::Ne(a, b) => f64::from(t(a)? == t(b)?),
            Formula::And(a, b) => self.residual(a, env)?.max(self.residual(b, env)?),
            Formula::Or(a, b) => self.residual(a, env)?.min(self.residual(b, env)?),
            Formula::Implies(p, q) => match holds_f64(p, env) {
                Some(false) => 0.0,
                _ if self.residual(p, env)? > 0.0 => 0.0,
                _ => self.residual(q, env)?,
            },
            Formula::Iff(a, b) => self
                .residual(&Formula::implies((**a).clone(), (**b).clone()), env)?
                .max(self.residual(&Formula::implies((**b).clone(), (**a).clone()), env)?),
            Formula::Not(f) => match &**f {
                Formula::Le(..) | Formula::Lt(..) | Formula::Eq(..) | Formula::Ne(..) | Formula::NnAtom(_) => {
                    self.residual(&nnf(phi), env)?
                }
                _ => return Err(Error::Unsupported(format!("residual of a negated compound formula `{phi}`"))),
            },
            Formula::Exists(..) => {
                let mut block = Vec::new();
                let mut body = phi;
                while let Formula::Exists(x, f) = body {
                    block.push(x.clone());
                    body = f;
                }
                let solved = self.propagate(body, &block, env);
                if let Some(x) = block.iter().find(|x| !solved.contains_key(*x)) {
                    return Err(Error::Invalid(format!("no witness found for {x}")));
                }
                self.residual(body, &solved)?
            }
            Formula::NnAtom(a) => {
                let x: Result<Vec<f64>> = a
                    .inputs
                    .iter()
                    .map(|x| env.get(x).copied().ok_or_else(|| Error::Unbound(x.clone())))
                    .collect();
                let out = self.network(a)?.eval_f64(&x?)?;
                let mut worst: f64 = 0.0;
                for (y, o) in a.outputs.iter().zip(out) {
                    let y = env.get(y).copied().ok_or_else(|| Error::Unbound(y.clone()))?;
                    worst = worst.max((o - y).abs());
                }
                worst
            }
            Formula::NegNnAtom(a) => {
                f64::from(self.residual(&Formula::NnAtom(a.clone()), env)? == 0.0)
            }
            other => return Err(Error::Unsupported(format!("residual of `{other}`"))),
        })
    }
}

/// Floating-point violation of `phi` under `env`; zero means satisfied. Equalities count
/// their absolute difference, inequalities their overshoot, conjunctions the maximum and
/// disjunctions the minimum. Existential variables are computed from defining conjuncts.
pub fn residual(phi: &Formula, env: &BTreeMap<Var, f64>, nets: &NetworkBinding) -> Result<f64> {
    residual_with_hints(phi, env, nets, &BTreeMap::new())
}

/// [`residual`] with known values for some bound variables, for instance the subterm
/// values reported by [`ref_to_nnlstar_traced`].
pub fn residual_with_hints(
    phi: &Formula,
    env: &BTreeMap<Var, f64>,
    nets: &NetworkBinding,
    hints: &BTreeMap<Var, f64>,
) -> Result<f64> {
    Solver { nets, hints }.residual(phi, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;

    fn env(pairs: &[(&str, f64)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn sigmoid_neuron_constraint() {
        let mut nets = NetworkBinding::new();
        nets.insert("N".into(), single_neuron(Activation::Sigmoid));
        let f = nnlstar_to_ref(&parse_formula("N(x) = (y)").unwrap(), &nets).unwrap();
        assert!(residual(&f, &env(&[("x", 0.0), ("y", 0.5)]), &nets).unwrap() < 1e-9);
        assert!(residual(&f, &env(&[("x", 0.0), ("y", 0.6)]), &nets).unwrap() > 1e-3);
    }

    #[test]
    fn logarithm_both_sides_of_one() {
        let nets = activation_nets();
        let mut fresh = Fresh::new();
        let f = phi_ln(&"x".into(), &"y".into(), &mut fresh);
        for x in [0.2f64, 0.9, 1.0, 3.5] {
            assert!(residual(&f, &env(&[("x", x), ("y", x.ln())]), &nets).unwrap() < 1e-9, "x = {x}");
            assert!(residual(&f, &env(&[("x", x), ("y", x.ln() + 0.1)]), &nets).unwrap() > 1e-3);
        }
    }

    #[test]
    fn product_through_flattening() {
        let (f, nets, _) = ref_to_nnlstar_traced(&parse_formula("(x) * (y) = z").unwrap()).unwrap();
        assert!(residual(&f, &env(&[("x", 2.0), ("y", 3.0), ("z", 6.0)]), &nets).unwrap() < 1e-9);
        assert!(residual(&f, &env(&[("x", 2.0), ("y", 3.0), ("z", 7.0)]), &nets).unwrap() > 1e-3);
    }
}
