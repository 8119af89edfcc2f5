//! 3SAT instances and their reduction to network reachability.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::logic::dialect::{conjuncts, validate, Dialect};
use crate::logic::eval::holds;
use crate::logic::{Formula, NetAtom, NetworkBinding, Term, Var};
use crate::nn::{Activation, Ffnn, Layer};
use crate::rational::Rational;

/// CNF with exactly three literals per clause. Literals are signed 1-based variable indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3 {
    pub vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Cnf3 {
    pub fn new(vars: usize, clauses: Vec<[i32; 3]>) -> Result<Cnf3> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(Error::Invalid(format!("literal {l} outside variables 1..{vars}")));
                }
            }
        }
        Ok(Cnf3 { vars, clauses })
    }

    /// Reads DIMACS CNF. Clauses with fewer than three literals are padded by repeating
    /// their last literal; longer clauses are rejected.
    pub fn from_dimacs(text: &str) -> Result<Cnf3> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let fields: Vec<&str> = rest.split_whitespace().collect();
                if fields.len() != 3 || fields[0] != "cnf" {
                    return Err(Error::Invalid(format!("bad problem line `{line}`")));
                }
                vars = Some(fields[1].parse::<usize>().map_err(|e| Error::Invalid(e.to_string()))?);
                continue;
            }
            for tok in line.split_whitespace() {
                let l: i32 = tok.parse().map_err(|_| Error::Invalid(format!("bad literal `{tok}`")))?;
                if l != 0 {
                    current.push(l);
                    continue;
                }
                match current.len() {
                    1..=3 => {
                        while current.len() < 3 {
                            current.push(*current.last().unwrap());
                        }
                        clauses.push([current[0], current[1], current[2]]);
                    }
                    0 => return Err(Error::Invalid("empty clause".into())),
                    n => return Err(Error::Invalid(format!("clause with {n} literals"))),
                }
                current.clear();
            }
        }
        if !current.is_empty() {
            return Err(Error::Invalid("unterminated clause".into()));
        }
        let vars = vars.ok_or_else(|| Error::Invalid("missing `p cnf` line".into()))?;
        Cnf3::new(vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            let _ = writeln!(s, "{} {} {} 0", c[0], c[1], c[2]);
        }
        s
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Exhaustive search; intended for small instances.
    pub fn brute_force(&self) -> Option<Vec<bool>> {
        (0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }
}

/// A network with box-style linear constraints on its inputs `x1..xm` and outputs `y1..yn`.
#[derive(Clone, Debug)]
pub struct ReachInstance {
    pub network: Ffnn,
    pub input: Vec<Formula>,
    pub output: Vec<Formula>,
}

pub fn input_names(m: usize) -> Vec<Var> {
    (1..=m).map(|i| format!("x{i}")).collect()
}

pub fn output_names(n: usize) -> Vec<Var> {
    (1..=n).map(|i| format!("y{i}")).collect()
}

impl ReachInstance {
    /// The reachability formula with the network bound to `name`.
    pub fn to_formula(&self, name: &str) -> Formula {
        let atom = NetAtom::from_vars(name, input_names(self.network.in_dim()), output_names(self.network.out_dim()));
        let mut parts = vec![Formula::nn(atom)];
        parts.extend(self.input.iter().cloned());
        parts.extend(self.output.iter().cloned());
        Formula::and_all(parts)
    }

    /// Reads a reachability formula, renaming its variables to `x1..xm`, `y1..yn`.
    pub fn from_formula(phi: &Formula, nets: &NetworkBinding) -> Result<ReachInstance> {
        validate(phi, Dialect::Reach)?;
        let parts = conjuncts(phi);
        let atom = parts
            .iter()
            .find_map(|p| match p {
                Formula::NnAtom(a) => Some(a.clone()),
                _ => None,
            })
            .expect("validated");
        let network = nets.get(&atom.net).ok_or_else(|| Error::Unbound(format!("network {}", atom.net)))?.clone();
        if network.in_dim() != atom.inputs.len() || network.out_dim() != atom.outputs.len() {
            return Err(Error::Arity {
                expected: network.in_dim() + network.out_dim(),
                found: atom.inputs.len() + atom.outputs.len(),
            });
        }
        if atom.inputs.iter().any(|x| atom.outputs.contains(x)) {
            return Err(Error::Unsupported("a variable used as both input and output".into()));
        }
        let mut map = BTreeMap::new();
        let mut input = Vec::new();
        let mut output = Vec::new();
        for (names, vars, sink) in [
            (input_names(atom.inputs.len()), &atom.inputs, &mut input),
            (output_names(atom.outputs.len()), &atom.outputs, &mut output),
        ] {
            for (fresh, v) in names.iter().zip(vars.iter()) {
                match map.get(v) {
                    // A repeated variable forces the two positions to agree.
                    Some(first) => {
                        let (a, b): (&String, &String) = (first, fresh);
                        sink.push(Formula::le(Term::var(a), Term::var(b)));
                        sink.push(Formula::le(Term::var(b), Term::var(a)));
                    }
                    None => {
                        map.insert(v.clone(), fresh.clone());
                    }
                }
            }
        }
        for p in parts {
            if matches!(p, Formula::NnAtom(_)) {
                continue;
            }
            let renamed = p.rename_free(&map);
            let mut vs = renamed.free_vars();
            vs.retain(|v| v.starts_with('y'));
            if vs.is_empty() {
                input.push(renamed);
            } else {
                output.push(renamed);
            }
        }
        Ok(ReachInstance { network, input, output })
    }

    /// Whether `x` meets the input constraints and `N(x)` meets the output constraints.
    pub fn check(&self, x: &[Rational]) -> Result<bool> {
        let y = self.network.eval(x)?;
        let mut i = BTreeMap::new();
        for (n, v) in input_names(x.len()).into_iter().zip(x) {
            i.insert(n, v.clone());
        }
        for (n, v) in output_names(y.len()).into_iter().zip(&y) {
            i.insert(n, v.clone());
        }
        let none = NetworkBinding::new();
        for c in self.input.iter().chain(&self.output) {
            if !holds(c, &i, &none)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn half() -> Rational {
    Rational::half()
}

/// Inner weights and constant of `1 − ReLU(1 − ℓ1 − ℓ2 − ℓ3)` where a negated literal is `1 − r`.
fn clause_row(clause: &[i32; 3], vars: usize) -> (Vec<Rational>, Rational) {
    let mut w = vec![Rational::zero(); vars];
    let mut c = Rational::one();
    for &l in clause {
        let v = l.unsigned_abs() as usize - 1;
        if l > 0 {
            w[v] -= Rational::one();
        } else {
            w[v] += Rational::one();
            c -= Rational::one();
        }
    }
    (w, c)
}

/// Network with `vars` inputs computing the clause gadget (1 on Boolean inputs iff the clause holds).
pub fn clause_gadget(clause: &[i32; 3], vars: usize) -> Ffnn {
    let (w, c) = clause_row(clause, vars);
    let l1 = Layer::new(Matrix::from_rows(vec![w]).unwrap(), vec![c], Activation::Relu).unwrap();
    let l2 = Layer::new(
        Matrix::from_rows(vec![vec![Rational::from(-1)]]).unwrap(),
        vec![Rational::one()],
        Activation::Id,
    )
    .unwrap();
    Ffnn::new(vec![l1, l2]).unwrap()
}

/// `ReLU(r − 1/2) + ReLU(1/2 − r) − 1/2`, zero exactly on `{0, 1}`.
pub fn bool_gadget() -> Ffnn {
    let l1 = Layer::new(
        Matrix::from_rows(vec![vec![Rational::one()], vec![Rational::from(-1)]]).unwrap(),
        vec![-half(), half()],
        Activation::Relu,
    )
    .unwrap();
    let l2 = Layer::new(Matrix::from_rows(vec![vec![Rational::one(), Rational::one()]]).unwrap(), vec![-half()], Activation::Id)
        .unwrap();
    Ffnn::new(vec![l1, l2]).unwrap()
}

/// Reduction of 3SAT to reachability. The network maps `x1..xm` to
/// `(y, z1..zm)` where `y` sums the clause gadgets and `zi` is the Boolean gadget of `xi`;
/// the output constraints demand `y = k` and every `zi = 0`, each as a pair of `≤`.
pub fn sat3_to_reach(cnf: &Cnf3) -> ReachInstance {
    let m = cnf.vars;
    let k = cnf.clauses.len();
    let mut w1 = Vec::new();
    let mut b1 = Vec::new();
    for clause in &cnf.clauses {
        let (w, c) = clause_row(clause, m);
        w1.push(w);
        b1.push(c);
    }
    for i in 0..m {
        let mut up = vec![Rational::zero(); m];
        up[i] = Rational::one();
        let down = up.iter().map(|v| -v.clone()).collect();
        w1.push(up);
        b1.push(-half());
        w1.push(down);
        b1.push(half());
    }
    let hidden = k + 2 * m;
    let mut w2 = Vec::new();
    let mut b2 = Vec::new();
    let mut sum_row = vec![Rational::zero(); hidden];
    for v in sum_row.iter_mut().take(k) {
        *v = Rational::from(-1);
    }
    w2.push(sum_row);
    b2.push(Rational::from(k as i64));
    for i in 0..m {
        let mut row = vec![Rational::zero(); hidden];
        row[k + 2 * i] = Rational::one();
        row[k + 2 * i + 1] = Rational::one();
        w2.push(row);
        b2.push(-half());
    }
    let layers = if hidden == 0 {
        // No variables and no clauses: the network still needs an input and an output.
        vec![Layer::new(Matrix::zeros(1, 0), vec![Rational::zero()], Activation::Id).unwrap()]
    } else {
        vec![
            Layer::new(Matrix::from_rows(w1).unwrap_or_else(|_| Matrix::zeros(hidden, m)), b1, Activation::Relu).unwrap(),
            Layer::new(Matrix::from_rows(w2).unwrap(), b2, Activation::Id).unwrap(),
        ]
    };
    let network = Ffnn::new(layers).expect("consistent dimensions");
    let ys = output_names(m + 1);
    let mut output = Vec::new();
    let mut pin = |v: &Var, c: Rational| {
        output.push(Formula::le(Term::var(v), Term::Const(c.clone())));
        output.push(Formula::le(Term::Const(c), Term::var(v)));
    };
    pin(&ys[0], Rational::from(k as i64));
    for y in &ys[1..] {
        pin(y, Rational::zero());
    }
    ReachInstance { network, input: Vec::new(), output }
}
