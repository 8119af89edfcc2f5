//! Satisfiability for the existential fragments: exact Fourier–Motzkin
//! elimination with strict inequalities under a depth-first Boolean split,
//! ReLU phase enumeration for reachability, and the universal check.

use std::collections::{BTreeMap, HashMap};

use crate::compilers::sat::{input_names, output_names, ReachInstance};
use crate::compilers::exists_nnl_lower;
use crate::exec::Exec;
use crate::logic::dialect::{validate, Dialect};
use crate::logic::prenex::{nnf, rename_apart};
use crate::logic::{holds, Formula, Interpretation, NetworkBinding, Var};
use crate::nn::{Activation, Ffnn};
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Lt,
}

/// `coeffs · x ⋈ rhs`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

impl Constraint {
    fn holds(&self, x: &[Rational]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Lt => lhs < self.rhs,
        }
    }
}

fn dot(c: &[Rational], x: &[Rational]) -> Rational {
    c.iter().zip(x).filter(|(a, _)| !a.is_zero()).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
}

/// A conjunction of non-strict and strict linear inequalities over named variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystem {
    vars: Vec<Var>,
    rows: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(vars: &[Var]) -> LinearSystem {
        LinearSystem { vars: vars.to_vec(), rows: Vec::new() }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn var_index(&mut self, x: &str) -> usize {
        if let Some(i) = self.vars.iter().position(|v| v == x) {
            return i;
        }
        self.vars.push(x.to_string());
        for r in &mut self.rows {
            r.coeffs.push(Rational::zero());
        }
        self.vars.len() - 1
    }

    /// Adds `coeffs · x ⋈ rhs`; a shorter coefficient vector is padded with zeros.
    pub fn add(&mut self, mut coeffs: Vec<Rational>, cmp: Cmp, rhs: Rational) -> Result<()> {
        if coeffs.len() > self.vars.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} variables",
                coeffs.len(),
                self.vars.len()
            )));
        }
        coeffs.resize(self.vars.len(), Rational::zero());
        self.rows.push(Constraint { coeffs, cmp, rhs });
        Ok(())
    }

    /// Adds a linear comparison atom; equalities become two `≤`.
    pub fn add_atom(&mut self, atom: &Formula) -> Result<()> {
        let (a, b, cmps): (_, _, &[Cmp]) = match atom {
            Formula::Le(a, b) => (a, b, &[Cmp::Le]),
            Formula::Lt(a, b) => (a, b, &[Cmp::Lt]),
            Formula::Eq(a, b) => (a, b, &[Cmp::Le, Cmp::Le]),
            other => return Err(Error::Unsupported(format!("not a linear inequality: {other}"))),
        };
        let diff = crate::logic::Term::minus(a.clone(), b);
        let (form, c) = diff.linear_form().ok_or_else(|| Error::Unsupported(format!("non-linear atom {atom}")))?;
        let mut coeffs = vec![Rational::zero(); self.vars.len()];
        for (x, v) in &form {
            let i = self.var_index(x);
            coeffs.resize(self.vars.len(), Rational::zero());
            coeffs[i] = v.clone();
        }
        self.add(coeffs.clone(), cmps[0], -c.clone())?;
        if cmps.len() == 2 {
            self.add(coeffs.iter().map(|v| -v.clone()).collect(), Cmp::Le, c)?;
        }
        Ok(())
    }

    /// A solution, if one exists.
    pub fn solve(&self) -> Option<Vec<Rational>> {
        let x = fourier_motzkin(&self.rows, self.vars.len())?;
        assert!(self.rows.iter().all(|r| r.holds(&x)), "back-substitution produced a non-model");
        Some(x)
    }

    pub fn is_feasible(&self) -> bool {
        self.solve().is_some()
    }

    pub fn model(&self) -> Option<Interpretation> {
        self.solve().map(|x| self.vars.iter().cloned().zip(x).collect())
    }
}

#[derive(Clone, Debug)]
struct Row {
    c: Vec<Rational>,
    strict: bool,
    d: Rational,
}

enum Step {
    /// `x_var = expr · x + k`
    Subst(usize, Vec<Rational>, Rational),
    /// Rows that mentioned `x_var` when it was projected away.
    Bounds(usize, Vec<Row>),
}

/// Drops trivial rows, scales each row so its first nonzero coefficient is
/// `±1`, and keeps only the tightest row per coefficient vector. `None` when a
/// row without variables is false.
fn tidy(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: HashMap<Vec<Rational>, (Rational, bool)> = HashMap::new();
    let mut order: Vec<Vec<Rational>> = Vec::new();
    for r in rows {
        let Some(lead) = r.c.iter().find(|v| !v.is_zero()).map(|v| v.abs()) else {
            let ok = if r.strict { Rational::zero() < r.d } else { Rational::zero() <= r.d };
            if !ok {
                return None;
            }
            continue;
        };
        let c: Vec<Rational> = r.c.iter().map(|v| v / &lead).collect();
        let d = &r.d / &lead;
        match best.get_mut(&c) {
            Some((bd, bs)) => {
                if d < *bd || (d == *bd && r.strict) {
                    *bd = d;
                    *bs = r.strict;
                }
            }
            None => {
                order.push(c.clone());
                best.insert(c, (d, r.strict));
            }
        }
    }
    Some(
        order
            .into_iter()
            .map(|c| {
                let (d, strict) = best[&c].clone();
                Row { c, strict, d }
            })
            .collect(),
    )
}

/// An implied equation `c·x = d` from rows `c·x ≤ d` and `−c·x ≤ −d`.
fn find_equation(rows: &[Row]) -> Option<(Vec<Rational>, Rational)> {
    let index: HashMap<&Vec<Rational>, &Row> = rows.iter().map(|r| (&r.c, r)).collect();
    for r in rows {
        if r.strict {
            continue;
        }
        let neg: Vec<Rational> = r.c.iter().map(|v| -v.clone()).collect();
        if let Some(o) = index.get(&neg) {
            if !o.strict && o.d == -r.d.clone() {
                return Some((r.c.clone(), r.d.clone()));
            }
            // Opposite rows with an empty gap are infeasible; FM finds that too.
        }
    }
    None
}

/// Exact Fourier–Motzkin with strictness; returns a model by back-substitution.
fn fourier_motzkin(rows: &[Constraint], n: usize) -> Option<Vec<Rational>> {
    let mut cur: Vec<Row> = rows
        .iter()
        .map(|r| Row { c: r.coeffs.clone(), strict: r.cmp == Cmp::Lt, d: r.rhs.clone() })
        .collect();
    let mut steps: Vec<Step> = Vec::new();
    loop {
        cur = tidy(cur)?;
        if cur.is_empty() {
            break;
        }
        if let Some((c, d)) = find_equation(&cur) {
            let j = c.iter().position(|v| !v.is_zero()).unwrap();
            // x_j = (d − Σ_{i≠j} c_i x_i) / c_j
            let cj = c[j].clone();
            let mut expr: Vec<Rational> = c.iter().map(|v| -(v / &cj)).collect();
            expr[j] = Rational::zero();
            let k = &d / &cj;
            cur = cur
                .into_iter()
                .map(|mut r| {
                    let a = std::mem::replace(&mut r.c[j], Rational::zero());
                    if !a.is_zero() {
                        for (ri, ei) in r.c.iter_mut().zip(&expr) {
                            if !ei.is_zero() {
                                *ri += &a * ei;
                            }
                        }
                        r.d -= &a * &k;
                    }
                    r
                })
                .collect();
            steps.push(Step::Subst(j, expr, k));
            continue;
        }
        let j = (0..n)
            .filter(|&j| cur.iter().any(|r| !r.c[j].is_zero()))
            .min_by_key(|&j| {
                let pos = cur.iter().filter(|r| r.c[j].is_positive()).count();
                let neg = cur.iter().filter(|r| r.c[j].is_negative()).count();
                (pos * neg) as i64 - (pos + neg) as i64
            })
            .expect("a row mentions a variable");
        let (mention, rest): (Vec<Row>, Vec<Row>) = cur.into_iter().partition(|r| !r.c[j].is_zero());
        let mut next = rest;
        for u in mention.iter().filter(|r| r.c[j].is_positive()) {
            for l in mention.iter().filter(|r| r.c[j].is_negative()) {
                let (a, b) = (-l.c[j].clone(), u.c[j].clone());
                let c: Vec<Rational> = u.c.iter().zip(&l.c).map(|(x, y)| &a * x + &b * y).collect();
                next.push(Row { c, strict: u.strict || l.strict, d: &a * &u.d + &b * &l.d });
            }
        }
        steps.push(Step::Bounds(j, mention));
        cur = next;
    }
    let mut x = vec![Rational::zero(); n];
    for step in steps.iter().rev() {
        match step {
            Step::Subst(j, expr, k) => x[*j] = dot(expr, &x) + k,
            Step::Bounds(j, rows) => {
                x[*j] = Rational::zero();
                let mut lo: Option<(Rational, bool)> = None;
                let mut hi: Option<(Rational, bool)> = None;
                for r in rows {
                    let cj = &r.c[*j];
                    let bound = (&r.d - dot(&r.c, &x)) / cj.clone();
                    if cj.is_positive() {
                        if hi.as_ref().is_none_or(|(h, s)| bound < *h || (bound == *h && r.strict && !s)) {
                            hi = Some((bound, r.strict));
                        }
                    } else if lo.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && r.strict && !s)) {
                        lo = Some((bound, r.strict));
                    }
                }
                x[*j] = pick(lo, hi);
            }
        }
    }
    Some(x)
}

/// A simple value in the interval: zero if allowed, else the integer nearest
/// zero, else the midpoint.
fn pick(lo: Option<(Rational, bool)>, hi: Option<(Rational, bool)>) -> Rational {
    let above = |v: &Rational| lo.as_ref().is_none_or(|(l, s)| if *s { v > l } else { v >= l });
    let below = |v: &Rational| hi.as_ref().is_none_or(|(h, s)| if *s { v < h } else { v <= h });
    let zero = Rational::zero();
    if above(&zero) && below(&zero) {
        return zero;
    }
    let candidates = match (&lo, &hi) {
        (Some((l, _)), _) if l.is_positive() => {
            let f = Rational::from_bigint(l.floor());
            vec![f.clone(), f + Rational::one()]
        }
        (_, Some((h, _))) => {
            let f = Rational::from_bigint(h.floor());
            vec![f.clone(), f - Rational::one()]
        }
        _ => vec![],
    };
    if let Some(v) = candidates.into_iter().find(|v| above(v) && below(v)) {
        return v;
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / Rational::from_int(2),
        (Some((l, _)), None) => l + Rational::one(),
        (None, Some((h, _))) => h - Rational::one(),
        (None, None) => zero,
    }
}

/// Result of a satisfiability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome<M> {
    Sat(M),
    Unsat,
}

impl<M> Outcome<M> {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat(_))
    }

    pub fn model(self) -> Option<M> {
        match self {
            Outcome::Sat(m) => Some(m),
            Outcome::Unsat => None,
        }
    }
}

/// Pending goals of one branch plus the inequalities collected so far.
#[derive(Clone)]
struct Branch {
    goals: Vec<Formula>,
    sys: LinearSystem,
}

impl Branch {
    /// Consumes goals until a disjunction is at the top; returns false if the
    /// collected system became infeasible.
    fn advance(&mut self) -> Result<bool> {
        while let Some(f) = self.goals.last() {
            match f {
                Formula::And(..) => {
                    let Some(Formula::And(a, b)) = self.goals.pop() else { unreachable!() };
                    self.goals.push(*b);
                    self.goals.push(*a);
                }
                Formula::Or(..) => return Ok(self.sys.is_feasible()),
                _ => {
                    let atom = self.goals.pop().unwrap();
                    self.sys.add_atom(&atom)?;
                }
            }
        }
        Ok(true)
    }

    /// The two sides of the disjunction on top, in left-to-right order.
    fn split(mut self) -> [Branch; 2] {
        let Some(Formula::Or(a, b)) = self.goals.pop() else { unreachable!("split without a disjunction") };
        let mut left = self.clone();
        left.goals.push(*a);
        self.goals.push(*b);
        [left, self]
    }
}

fn search(mut br: Branch) -> Result<Option<Vec<Rational>>> {
    if !br.advance()? {
        return Ok(None);
    }
    if br.goals.is_empty() {
        return Ok(br.sys.solve());
    }
    for child in br.split() {
        if let Some(x) = search(child)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Breadth-first expansion of the first splits, preserving depth-first order.
fn frontier(root: Branch, width: usize) -> Result<Vec<Branch>> {
    let mut items = vec![root];
    loop {
        if items.len() >= width {
            return Ok(items);
        }
        let mut next = Vec::new();
        let mut grew = false;
        for mut b in items {
            if !b.advance()? {
                continue;
            }
            if b.goals.is_empty() {
                next.push(b);
            } else {
                grew = true;
                next.extend(b.split());
            }
        }
        items = next;
        if !grew {
            return Ok(items);
        }
    }
}

fn strip_exists(phi: &Formula) -> Formula {
    use Formula::*;
    match phi {
        Exists(_, f) => strip_exists(f),
        And(a, b) => Formula::and(strip_exists(a), strip_exists(b)),
        Or(a, b) => Formula::or(strip_exists(a), strip_exists(b)),
        other => other.clone(),
    }
}

/// Existential LRA solver; free variables are read existentially.
#[derive(Clone, Copy, Debug, Default)]
pub struct Solver {
    pub exec: Exec,
}

impl Solver {
    pub fn new(exec: Exec) -> Solver {
        Solver { exec }
    }

    pub fn solve_exists_lra(&self, phi: &Formula) -> Result<Outcome<Interpretation>> {
        validate(phi, Dialect::ExistsLra)?;
        let matrix = strip_exists(&nnf(&rename_apart(phi)));
        let vars: Vec<Var> = matrix.all_vars().into_iter().collect();
        let root = Branch { goals: vec![matrix.clone()], sys: LinearSystem::new(&vars) };
        let width = if self.exec.is_parallel() { 64 } else { 1 };
        let items = frontier(root, width)?;
        let found = self.exec.find_first(&items, |b| match search(b.clone()) {
            Ok(Some(x)) => Some(Ok((b.sys.vars().to_vec(), x))),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        });
        let Some(found) = found else { return Ok(Outcome::Unsat) };
        let (names, x) = found?;
        let model: Interpretation = names.into_iter().zip(x).collect();
        if !holds(&matrix, &model, &NetworkBinding::new())? {
            return Err(Error::Invalid("solver model fails the formula".into()));
        }
        Ok(Outcome::Sat(model))
    }

    /// Input/output reachability over an id/ReLU network by phase enumeration.
    pub fn solve_reach(&self, inst: &ReachInstance) -> Result<Outcome<Vec<Rational>>> {
        let plan = ReachPlan::new(inst)?;
        let root = plan.root()?;
        let Some(root) = root else { return Ok(Outcome::Unsat) };
        let depth = if self.exec.is_parallel() { 6.min(plan.order.len()) } else { 0 };
        let mut items = vec![root];
        for _ in 0..depth {
            let mut next = Vec::new();
            for s in &items {
                next.extend(plan.children(s)?);
            }
            items = next;
        }
        let found = self.exec.find_first(&items, |s| plan.dfs(s).transpose());
        match found.transpose()? {
            None => Ok(Outcome::Unsat),
            Some(x) => {
                if !inst.check(&x)? {
                    return Err(Error::Invalid("reachability witness fails evaluation".into()));
                }
                Ok(Outcome::Sat(x))
            }
        }
    }

    /// Reachability for identity-only networks: one linear feasibility problem.
    pub fn solve_reach_linear(&self, inst: &ReachInstance) -> Result<Outcome<Vec<Rational>>> {
        if let Some((i, l)) = inst.network.layers().iter().enumerate().find(|(_, l)| l.activation != Activation::Id) {
            return Err(Error::Unsupported(format!(
                "activation {} in layer {} is not the identity",
                l.activation.name(),
                i + 1
            )));
        }
        let plan = ReachPlan::new(inst)?;
        let Some(root) = plan.root()? else { return Ok(Outcome::Unsat) };
        match plan.dfs(&root)? {
            None => Ok(Outcome::Unsat),
            Some(x) => {
                let x = x[..plan.m].to_vec();
                if !inst.check(&x)? {
                    return Err(Error::Invalid("reachability witness fails evaluation".into()));
                }
                Ok(Outcome::Sat(x))
            }
        }
    }

    /// `⊨ ¬φ` for an ∃NNL sentence.
    pub fn check_universal(&self, phi: &Formula, nets: &NetworkBinding) -> Result<bool> {
        if !phi.is_sentence() {
            return Err(Error::Invalid(format!(
                "universal check needs a sentence; free variables {:?}",
                phi.free_vars()
            )));
        }
        Ok(!self.solve_exists_nnl(phi, nets)?.is_sat())
    }

    /// Validity of a sentence whose negation normal form of `¬φ` is
    /// existential (a universal property such as a specification).
    pub fn prove(&self, phi: &Formula, nets: &NetworkBinding) -> Result<bool> {
        let neg = nnf(&Formula::not(phi.clone()));
        validate(&neg, Dialect::ExistsNnl)
            .map_err(|_| Error::Unsupported("the negation is not existential".into()))?;
        self.check_universal(&neg, nets)
    }

    pub fn solve_exists_nnl(&self, phi: &Formula, nets: &NetworkBinding) -> Result<Outcome<Interpretation>> {
        self.solve_exists_lra(&exists_nnl_lower(phi, nets)?)
    }
}

pub fn solve_exists_lra(phi: &Formula) -> Result<Outcome<Interpretation>> {
    Solver::default().solve_exists_lra(phi)
}

pub fn solve_reach(inst: &ReachInstance) -> Result<Outcome<Vec<Rational>>> {
    Solver::default().solve_reach(inst)
}

pub fn solve_reach_linear(inst: &ReachInstance) -> Result<Outcome<Vec<Rational>>> {
    Solver::default().solve_reach_linear(inst)
}

pub fn check_universal(phi: &Formula, nets: &NetworkBinding) -> Result<bool> {
    Solver::default().check_universal(phi, nets)
}

/// One bit per ReLU neuron: `true` for the active phase `z > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseVector(pub Vec<bool>);

/// Affine expression over the inputs followed by one placeholder per ReLU
/// neuron, plus a constant. A placeholder stands for the output of a neuron
/// whose phase is still open; such outputs are only known to be `≥ 0`.
#[derive(Clone, Debug)]
struct Affine {
    c: Vec<Rational>,
    k: Rational,
}

impl Affine {
    fn zero(width: usize) -> Affine {
        Affine { c: vec![Rational::zero(); width], k: Rational::zero() }
    }

    fn unit(width: usize, i: usize) -> Affine {
        let mut a = Affine::zero(width);
        a.c[i] = Rational::one();
        a
    }

    fn add_scaled(&mut self, w: &Rational, o: &Affine) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            if !b.is_zero() {
                *a += w * b;
            }
        }
        self.k += w * &o.k;
    }
}

type Row3 = (Vec<Rational>, Cmp, Rational);

struct ReachPlan<'a> {
    net: &'a Ffnn,
    m: usize,
    relus: usize,
    /// Global index of each ReLU neuron, per layer.
    relu_id: Vec<Vec<Option<usize>>>,
    /// ReLU neurons `(layer, index)` in decision order.
    order: Vec<(usize, usize)>,
    /// Output constraints `Σ a_j y_j ⋈ b`.
    outputs: Vec<(BTreeMap<usize, Rational>, Cmp, Rational)>,
    inputs: Vec<Formula>,
}

#[derive(Clone)]
struct State {
    phases: PhaseVector,
    /// Output of each decided ReLU neuron, over the inputs.
    relu_val: Vec<Option<Affine>>,
    /// Output constraints already added exactly.
    done: Vec<bool>,
    sys: LinearSystem,
}

impl<'a> ReachPlan<'a> {
    fn new(inst: &'a ReachInstance) -> Result<ReachPlan<'a>> {
        let net = &inst.network;
        if let Some((i, l)) = net
            .layers()
            .iter()
            .enumerate()
            .find(|(_, l)| !matches!(l.activation, Activation::Id | Activation::Relu))
        {
            return Err(Error::Unsupported(format!(
                "activation {} in layer {} cannot be enumerated",
                l.activation.name(),
                i + 1
            )));
        }
        let ys = output_names(net.out_dim());
        let mut outputs = Vec::new();
        for f in inst.output.iter().flat_map(flatten) {
            let mut sys = LinearSystem::new(&ys);
            sys.add_atom(&f)?;
            if sys.vars().len() > ys.len() {
                return Err(Error::Unbound(format!("output constraint {f} mentions a non-output variable")));
            }
            for r in sys.constraints() {
                let form: BTreeMap<usize, Rational> =
                    r.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect();
                outputs.push((form, r.cmp, r.rhs.clone()));
            }
        }
        let mut relus = 0;
        let relu_id = net
            .layers()
            .iter()
            .map(|l| {
                (0..l.out_dim())
                    .map(|_| {
                        (l.activation == Activation::Relu).then(|| {
                            relus += 1;
                            relus - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let inputs: Vec<Formula> = inst.input.iter().flat_map(flatten).collect();
        let mut plan = ReachPlan { net, m: net.in_dim(), relus, relu_id, order: Vec::new(), outputs, inputs };
        plan.order = plan.decision_order();
        Ok(plan)
    }

    fn width(&self) -> usize {
        self.m + self.relus
    }

    /// Layer by layer. Within a layer, greedily the neuron reading the fewest
    /// inputs not read by earlier choices, so a neuron is decided as soon as
    /// the inputs it depends on are pinned down.
    fn decision_order(&self) -> Vec<(usize, usize)> {
        use std::collections::BTreeSet;
        let mut support: Vec<BTreeSet<usize>> = (0..self.m).map(|i| BTreeSet::from([i])).collect();
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        let mut order = Vec::new();
        for (l, layer) in self.net.layers().iter().enumerate() {
            let cur: Vec<BTreeSet<usize>> = (0..layer.out_dim())
                .map(|i| {
                    layer
                        .weights
                        .row(i)
                        .iter()
                        .enumerate()
                        .filter(|(_, w)| !w.is_zero())
                        .flat_map(|(j, _)| support[j].iter().copied())
                        .collect()
                })
                .collect();
            if layer.activation == Activation::Relu {
                let mut pending: Vec<usize> = (0..layer.out_dim()).collect();
                while !pending.is_empty() {
                    let pos = (0..pending.len())
                        .min_by_key(|&p| (cur[pending[p]].difference(&covered).count(), pending[p]))
                        .unwrap();
                    let i = pending.remove(pos);
                    covered.extend(cur[i].iter().copied());
                    order.push((l, i));
                }
            }
            support = cur;
        }
        order
    }

    fn pre_activation(&self, prev: &[Affine], l: usize, i: usize) -> Affine {
        let layer = &self.net.layers()[l];
        let mut a = Affine::zero(self.width());
        a.k = layer.bias[i].clone();
        for (j, w) in layer.weights.row(i).iter().enumerate() {
            if !w.is_zero() {
                a.add_scaled(w, &prev[j]);
            }
        }
        a
    }

    /// Outputs of every layer under the decisions in `st`, preceded by the inputs.
    fn values(&self, st: &State) -> Vec<Vec<Affine>> {
        let mut all = vec![(0..self.m).map(|i| Affine::unit(self.width(), i)).collect::<Vec<_>>()];
        for (l, layer) in self.net.layers().iter().enumerate() {
            let cur = (0..layer.out_dim())
                .map(|i| match self.relu_id[l][i] {
                    Some(id) => match &st.relu_val[id] {
                        Some(v) => v.clone(),
                        None => Affine::unit(self.width(), self.m + id),
                    },
                    None => self.pre_activation(&all[l], l, i),
                })
                .collect();
            all.push(cur);
        }
        all
    }

    /// Adds output constraints that no longer mention open neurons, and
    /// returns relaxations of the others: dropping placeholders with
    /// nonnegative weight keeps a valid `≤`/`<` row.
    fn propagate(&self, st: &mut State) -> Result<Vec<Row3>> {
        let vals = self.values(st);
        let out = vals.last().expect("networks have layers");
        let mut relaxed = Vec::new();
        for (k, (form, cmp, rhs)) in self.outputs.iter().enumerate() {
            if st.done[k] {
                continue;
            }
            let mut a = Affine::zero(self.width());
            for (&j, w) in form {
                a.add_scaled(w, &out[j]);
            }
            let (xs, ps) = a.c.split_at(self.m);
            let d = rhs - &a.k;
            if ps.iter().all(|v| v.is_zero()) {
                st.sys.add(xs.to_vec(), *cmp, d)?;
                st.done[k] = true;
            } else if ps.iter().all(|v| !v.is_negative()) {
                relaxed.push((xs.to_vec(), *cmp, d));
            }
        }
        Ok(relaxed)
    }

    fn feasible(&self, st: &State, relaxed: Vec<Row3>) -> Result<bool> {
        if relaxed.is_empty() {
            return Ok(st.sys.is_feasible());
        }
        let mut sys = st.sys.clone();
        for (c, cmp, d) in relaxed {
            sys.add(c, cmp, d)?;
        }
        Ok(sys.is_feasible())
    }

    fn root(&self) -> Result<Option<State>> {
        let mut sys = LinearSystem::new(&input_names(self.m));
        for f in &self.inputs {
            sys.add_atom(f)?;
        }
        if sys.vars().len() > self.m {
            return Err(Error::Unbound("input constraint mentions a non-input variable".into()));
        }
        let mut st = State {
            phases: PhaseVector::default(),
            relu_val: vec![None; self.relus],
            done: vec![false; self.outputs.len()],
            sys,
        };
        let relaxed = self.propagate(&mut st)?;
        Ok(self.feasible(&st, relaxed)?.then_some(st))
    }

    /// Feasible one-neuron extensions, inactive phase first.
    fn children(&self, st: &State) -> Result<Vec<State>> {
        let depth = st.phases.0.len();
        if depth == self.order.len() {
            return Ok(vec![st.clone()]);
        }
        let (l, i) = self.order[depth];
        let id = self.relu_id[l][i].expect("decisions are ReLU neurons");
        let z = self.pre_activation(&self.values(st)[l], l, i);
        debug_assert!(z.c[self.m..].iter().all(|v| v.is_zero()), "earlier layers are decided");
        let xs = z.c[..self.m].to_vec();
        let mut out = Vec::new();
        for active in [false, true] {
            let mut s = st.clone();
            s.phases.0.push(active);
            if active {
                // −(c·x + k) < 0
                s.sys.add(xs.iter().map(|v| -v.clone()).collect(), Cmp::Lt, z.k.clone())?;
                s.relu_val[id] = Some(z.clone());
            } else {
                s.sys.add(xs.clone(), Cmp::Le, -z.k.clone())?;
                s.relu_val[id] = Some(Affine::zero(self.width()));
            }
            let relaxed = self.propagate(&mut s)?;
            if self.feasible(&s, relaxed)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    fn dfs(&self, st: &State) -> Result<Option<Vec<Rational>>> {
        if st.phases.0.len() == self.order.len() {
            return Ok(st.sys.solve());
        }
        for c in self.children(st)? {
            if let Some(x) = self.dfs(&c)? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }
}

fn flatten(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut v = flatten(a);
            v.extend(flatten(b));
            v
        }
        other => vec![other.clone()],
    }
}
