//! Sentence decision with a factored representation.
//!
//! Instead of one automaton over every variable of the prenex form, the
//! decider keeps a Boolean tree whose leaves are automata over the few
//! variables they mention. Existential quantifiers are pushed down the tree
//! (into disjunctions, and into the conjuncts that mention the variable),
//! negations are pushed to the leaves, and leaves are only joined when a
//! projection needs them together. All results agree with the prenex
//! pipeline in [`super::terms`]; the factored form just keeps the automata small.

use std::collections::BTreeSet;

use crate::automata::{complement, embed, intersect, is_empty, union, Buchi};
use crate::compilers::nnl_lower;
use crate::exec::Exec;
use crate::logic::abbrev::{expand, Keep};
use crate::logic::{holds, Formula, Interpretation, NetworkBinding, Term, Var};
use crate::rational::Rational;
use crate::{Error, Result};

use super::atoms::power_of_two;
use super::codec::decode_upword;
use super::linear::{linear_rational, Rel};
use super::onepoint::eliminate_defined;
use super::{cl_remove, normalize, wf_automaton};

#[derive(Clone, Debug)]
enum Node {
    Bool(bool),
    /// Automaton whose tracks are the sorted variables.
    Auto(Vec<Var>, Buchi),
    And(Vec<Node>),
    Or(Vec<Node>),
}

fn leaf(vars: Vec<Var>, a: Buchi) -> Node {
    if vars.is_empty() {
        Node::Bool(is_empty(&a).is_some())
    } else if is_empty(&a).is_none() {
        Node::Bool(false)
    } else {
        Node::Auto(vars, a)
    }
}

fn and(children: Vec<Node>) -> Node {
    let mut out = Vec::new();
    for c in children {
        match c {
            Node::Bool(true) => {}
            Node::Bool(false) => return Node::Bool(false),
            Node::And(cs) => out.extend(cs),
            c => out.push(c),
        }
    }
    match out.len() {
        0 => Node::Bool(true),
        1 => out.pop().unwrap(),
        _ => Node::And(out),
    }
}

fn or(children: Vec<Node>) -> Node {
    let mut out = Vec::new();
    for c in children {
        match c {
            Node::Bool(false) => {}
            Node::Bool(true) => return Node::Bool(true),
            Node::Or(cs) => out.extend(cs),
            c => out.push(c),
        }
    }
    match out.len() {
        0 => Node::Bool(false),
        1 => out.pop().unwrap(),
        _ => Node::Or(out),
    }
}

impl Node {
    fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Node::Bool(_) => {}
            Node::Auto(vs, _) => out.extend(vs.iter().cloned()),
            Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    fn mentions(&self, x: &str) -> bool {
        match self {
            Node::Bool(_) => false,
            Node::Auto(vs, _) => vs.iter().any(|v| v == x),
            Node::And(cs) | Node::Or(cs) => cs.iter().any(|c| c.mentions(x)),
        }
    }
}

/// Factored decision procedure for linear real arithmetic with `ispow2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Decider {
    pub exec: Exec,
}

impl Decider {
    pub fn new(exec: Exec) -> Decider {
        Decider { exec }
    }

    /// Truth value of a sentence.
    pub fn decide(&self, phi: &Formula) -> Result<bool> {
        if !phi.is_sentence() {
            return Err(Error::Invalid(format!("free variables {:?} in a sentence", phi.free_vars())));
        }
        match self.compile(phi)? {
            Node::Bool(b) => Ok(b),
            other => unreachable!("closed formula left variables {:?}", other.vars()),
        }
    }

    /// Automaton over `vars` (in that order) accepting the encodings of the
    /// assignments satisfying `phi`. Every free variable must be listed.
    pub fn solutions(&self, phi: &Formula, vars: &[Var]) -> Result<Buchi> {
        let free = phi.free_vars();
        if let Some(x) = free.iter().find(|x| !vars.contains(x)) {
            return Err(Error::Unbound(format!("free variable {x} not listed")));
        }
        let node = self.compile(phi)?;
        let (vs, a) = self.materialize(&node)?;
        let map: Vec<usize> = vs.iter().map(|v| vars.iter().position(|w| w == v).unwrap()).collect();
        Ok(normalize(&embed(&a, vars.len(), &map)?))
    }

    fn compile(&self, phi: &Formula) -> Result<Node> {
        let mut atoms = Vec::new();
        let shape = self.shape(&eliminate_defined(phi), &mut atoms)?;
        let compiled = self.exec.map(&atoms, compile_atom);
        let compiled: Vec<Node> = compiled.into_iter().collect::<Result<_>>()?;
        self.assemble(&shape, &compiled)
    }

    /// Replaces atoms by indices into `atoms`, keeping the connective skeleton.
    fn shape(&self, phi: &Formula, atoms: &mut Vec<Formula>) -> Result<Shape> {
        use Formula::*;
        Ok(match phi {
            Le(..) | Lt(..) | Eq(..) | Ne(..) | IsPowerOfTwo(_) => {
                atoms.push(phi.clone());
                Shape::Atom(atoms.len() - 1)
            }
            Not(f) => Shape::Not(Box::new(self.shape(f, atoms)?)),
            And(a, b) => Shape::And(vec![self.shape(a, atoms)?, self.shape(b, atoms)?]),
            Or(a, b) => Shape::Or(vec![self.shape(a, atoms)?, self.shape(b, atoms)?]),
            Implies(a, b) => Shape::Or(vec![Shape::Not(Box::new(self.shape(a, atoms)?)), self.shape(b, atoms)?]),
            Iff(a, b) => {
                let (sa, sb) = (self.shape(a, atoms)?, self.shape(b, atoms)?);
                let neg = |s: &Shape| Shape::Not(Box::new(s.clone()));
                Shape::Or(vec![
                    Shape::And(vec![sa.clone(), sb.clone()]),
                    Shape::And(vec![neg(&sa), neg(&sb)]),
                ])
            }
            Exists(..) | Forall(..) => {
                let universal = matches!(phi, Forall(..));
                let mut xs = Vec::new();
                let mut body = phi;
                while let Exists(x, f) | Forall(x, f) = body {
                    if matches!(body, Forall(..)) != universal {
                        break;
                    }
                    xs.push(x.clone());
                    body = f;
                }
                Shape::Quant(universal, xs, Box::new(self.shape(body, atoms)?))
            }
            NnAtom(_) | NegNnAtom(_) => {
                return Err(Error::Unsupported("network atoms must be lowered before deciding".into()))
            }
            In(..) | IsMax(..) | ArgmaxIs(..) | ArgmaxEq(..) => self.shape(&expand(phi, Keep::NORMAL), atoms)?,
        })
    }

    fn assemble(&self, s: &Shape, atoms: &[Node]) -> Result<Node> {
        Ok(match s {
            Shape::Atom(i) => atoms[*i].clone(),
            Shape::Not(f) => self.negate(self.assemble(f, atoms)?)?,
            Shape::And(cs) => and(cs.iter().map(|c| self.assemble(c, atoms)).collect::<Result<_>>()?),
            Shape::Or(cs) => or(cs.iter().map(|c| self.assemble(c, atoms)).collect::<Result<_>>()?),
            Shape::Quant(universal, xs, body) => {
                let n = self.assemble(body, atoms)?;
                if *universal {
                    let n = self.eliminate(self.negate(n)?, xs)?;
                    self.negate(n)?
                } else {
                    self.eliminate(n, xs)?
                }
            }
        })
    }

    /// De Morgan down to the leaves; a leaf is complemented within the
    /// well-formed words.
    fn negate(&self, n: Node) -> Result<Node> {
        Ok(match n {
            Node::Bool(b) => Node::Bool(!b),
            Node::Auto(vs, a) => {
                let c = intersect(&complement(&a)?, &wf_automaton(vs.len()))?;
                leaf(vs, normalize(&c))
            }
            Node::And(cs) => or(cs.into_iter().map(|c| self.negate(c)).collect::<Result<_>>()?),
            Node::Or(cs) => and(cs.into_iter().map(|c| self.negate(c)).collect::<Result<_>>()?),
        })
    }

    /// `∃xs. n`, cheapest variable first.
    fn eliminate(&self, mut n: Node, xs: &[Var]) -> Result<Node> {
        let mut todo: Vec<Var> = xs.to_vec();
        while !todo.is_empty() {
            todo.retain(|x| n.mentions(x));
            let Some(pos) = (0..todo.len()).min_by_key(|&i| (join_width(&n, &todo[i]), usize::MAX - i)) else {
                break;
            };
            let x = todo.remove(pos);
            n = self.exists(n, &x)?;
        }
        Ok(n)
    }

    fn exists(&self, n: Node, x: &str) -> Result<Node> {
        if !n.mentions(x) {
            return Ok(n);
        }
        Ok(match n {
            Node::Bool(_) => unreachable!(),
            Node::Auto(mut vs, a) => {
                let i = vs.iter().position(|v| v == x).unwrap();
                vs.remove(i);
                leaf(vs, cl_remove(&a, i)?)
            }
            Node::Or(cs) => or(cs.into_iter().map(|c| self.exists(c, x)).collect::<Result<_>>()?),
            Node::And(cs) => {
                let (with, without): (Vec<Node>, Vec<Node>) = cs.into_iter().partition(|c| c.mentions(x));
                let joined = if with.len() == 1 {
                    self.exists(with.into_iter().next().unwrap(), x)?
                } else {
                    let (vs, a) = self.materialize(&Node::And(with))?;
                    self.exists(leaf(vs, a), x)?
                };
                and(without.into_iter().chain(std::iter::once(joined)).collect())
            }
        })
    }

    /// One automaton for a whole subtree, over its sorted variables.
    fn materialize(&self, n: &Node) -> Result<(Vec<Var>, Buchi)> {
        match n {
            Node::Bool(b) => Ok((vec![], if *b { Buchi::universal(0) } else { Buchi::empty(0) })),
            Node::Auto(vs, a) => Ok((vs.clone(), a.clone())),
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(n, Node::And(_));
                let vars: Vec<Var> = n.vars().into_iter().collect();
                let mut parts: Vec<(Vec<Var>, Buchi)> = cs.iter().map(|c| self.materialize(c)).collect::<Result<_>>()?;
                parts.sort_by_key(|(_, a)| a.num_states());
                let mut acc: Option<Buchi> = None;
                for (vs, a) in parts {
                    let map: Vec<usize> = vs.iter().map(|v| vars.binary_search(v).unwrap()).collect();
                    let e = embed(&a, vars.len(), &map)?;
                    acc = Some(match acc {
                        None => e,
                        Some(prev) if conj => normalize(&intersect(&prev, &e)?),
                        Some(prev) => normalize(&union(&prev, &e)?),
                    });
                }
                Ok((vars, acc.expect("connectives have children")))
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Atom(usize),
    Not(Box<Shape>),
    And(Vec<Shape>),
    Or(Vec<Shape>),
    Quant(bool, Vec<Var>, Box<Shape>),
}

/// Number of variables that end up together if `x` is projected now.
fn join_width(n: &Node, x: &str) -> usize {
    fn go(n: &Node, x: &str, out: &mut BTreeSet<Var>) {
        match n {
            Node::Bool(_) => {}
            Node::Auto(vs, _) => {
                if vs.iter().any(|v| v == x) {
                    out.extend(vs.iter().cloned());
                }
            }
            Node::And(cs) | Node::Or(cs) => cs.iter().for_each(|c| go(c, x, out)),
        }
    }
    let mut out = BTreeSet::new();
    go(n, x, &mut out);
    out.len()
}

fn compile_atom(f: &Formula) -> Result<Node> {
    use Formula::*;
    let (a, b, rel) = match f {
        Le(a, b) => (a, b, Rel::Le),
        Lt(a, b) => (a, b, Rel::Lt),
        Eq(a, b) | Ne(a, b) => (a, b, Rel::Eq),
        IsPowerOfTwo(x) => return Ok(leaf(vec![x.clone()], power_of_two(1, 0)?)),
        _ => unreachable!("not an atom"),
    };
    let diff = Term::minus(a.clone(), b);
    let (coeffs, c) = diff
        .linear_form()
        .ok_or_else(|| Error::Unsupported(format!("non-linear atom {f}")))?;
    let (vars, cs): (Vec<Var>, Vec<Rational>) = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).unzip();
    let auto = linear_rational(&cs, rel, &-c)?;
    let node = leaf(vars.clone(), auto);
    if matches!(f, Ne(..)) {
        return Ok(match node {
            Node::Bool(b) => Node::Bool(!b),
            Node::Auto(vs, a) => leaf(vs, normalize(&intersect(&complement(&a)?, &wf_automaton(vars.len()))?)),
            _ => unreachable!(),
        });
    }
    Ok(node)
}

/// Truth value of an LRA sentence.
pub fn decide_sentence(phi: &Formula) -> Result<bool> {
    Decider::default().decide(phi)
}

/// Truth value of an NNL sentence over id/ReLU networks.
pub fn decide_nnl_sentence(phi: &Formula, nets: &NetworkBinding) -> Result<bool> {
    Decider::default().decide(&nnl_lower(phi, nets)?)
}

/// Values for the free and outermost existential variables of `phi`, or
/// `None` when it is unsatisfiable. Variables are fixed one at a time: each
/// gets the value of a shortest accepted word of the projection onto it.
pub fn witness_exists(phi: &Formula, nets: &NetworkBinding) -> Result<Option<Interpretation>> {
    let mut targets: Vec<Var> = phi.free_vars().into_iter().collect();
    let mut body = phi;
    while let Formula::Exists(x, f) = body {
        if !targets.contains(x) {
            targets.push(x.clone());
        }
        body = f;
    }
    let lowered = nnl_lower(body, nets)?;
    let decider = Decider::default();
    let mut node = decider.compile(&lowered)?;
    let mut out = Interpretation::new();
    for (i, x) in targets.iter().enumerate() {
        let others: Vec<Var> = targets[i + 1..].to_vec();
        let proj = decider.eliminate(node.clone(), &others)?;
        let value = match proj {
            Node::Bool(false) => return Ok(None),
            Node::Bool(true) => Rational::zero(),
            n => {
                let (vs, a) = decider.materialize(&n)?;
                debug_assert_eq!(vs, vec![x.clone()]);
                let Some(w) = is_empty(&a) else { return Ok(None) };
                decode_upword(&w)?
            }
        };
        let fix = compile_atom(&Formula::eq(Term::var(x), Term::Const(value.clone())))?;
        node = decider.eliminate(and(vec![node, fix]), std::slice::from_ref(x))?;
        out.insert(x.clone(), value);
    }
    if body.is_quantifier_free() && !holds(body, &out, nets)? {
        return Err(Error::Invalid("witness failed validation".into()));
    }
    Ok(Some(out.into_iter().filter(|(k, _)| !k.starts_with('$')).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::parse_formula;
    use crate::logic::specs::{build_spec, SpecParams};
    use crate::nn::examples::max_network;
    use crate::rational::q;

    fn dec(s: &str) -> bool {
        decide_sentence(&parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn small_sentences() {
        assert!(dec("forall x. forall y. (x < y => exists z. (x < z && z < y))"));
        assert!(!dec("forall x. forall y. exists z. (x < z && z < y)"));
        assert!(dec("exists x. (x = 2*x && !(x <= -1))"));
        assert!(!dec("exists x. x < x"));
        assert!(dec("forall x. exists y. y = 3*x + 1/2"));
        assert!(dec("exists x. (ispow2(x) && 3 < x && x < 5)"));
        assert!(!dec("exists x. (ispow2(x) && 4 < x && x < 8)"));
    }

    #[test]
    fn witness_for_linear_system() {
        let phi = parse_formula("exists x. exists y. (x + y = 3 && x - y = 1/2)").unwrap();
        let w = witness_exists(&phi, &NetworkBinding::new()).unwrap().unwrap();
        assert_eq!(w["x"], q(7, 4));
        assert_eq!(w["y"], q(5, 4));
        let none = parse_formula("exists x. (x < 0 && 0 < x)").unwrap();
        assert!(witness_exists(&none, &NetworkBinding::new()).unwrap().is_none());
    }

    #[test]
    fn max_network_specs() {
        let mut nets = NetworkBinding::new();
        nets.insert("N".into(), max_network());
        let p = SpecParams::new(2, 1);
        let max = build_spec("max", &p).unwrap();
        assert!(decide_nnl_sentence(&max, &nets).unwrap());
    }
}
