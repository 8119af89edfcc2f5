//! Logic-side commands: check, solve, reduce and automaton.

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use verinet::automata::Buchi;
use verinet::compilers::{nnl_lower, sat3_to_reach, Cnf3};
use verinet::exists::Solver;
use verinet::logic::{self, Dialect, Formula, Interpretation, NetworkBinding};
use verinet::lra::{witness_exists, Decider};

use crate::io::{self, read_source};
use crate::report::Answer;
use crate::{AutomatonCmd, Engine, Reduce, Run};

/// Parses the formula file in the dialect and loads its network bindings.
fn load(run: &mut Run, f: &crate::Formula, dialect: &str) -> Result<(Formula, NetworkBinding)> {
    let dialect: Dialect = dialect.parse()?;
    let text = read_source(&f.file, &mut run.inputs)?;
    let phi = logic::parse(&text, dialect).with_context(|| format!("parsing {} as {dialect}", f.file))?;
    let nets = io::bindings(&f.models, &mut run.inputs)?;
    io::check_bindings(&phi, &nets)?;
    Ok((phi, nets))
}

fn sentence(phi: &Formula) -> Result<()> {
    if !phi.is_sentence() {
        bail!("expected a sentence; free variables {:?}", phi.free_vars());
    }
    Ok(())
}

/// Restricts a model to the variables that occur in the user's formula.
fn visible(phi: &Formula, model: &Interpretation) -> Value {
    let vars = phi.all_vars();
    let shown: Interpretation = model.iter().filter(|(k, _)| vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    io::interpretation_json(&shown)
}

pub fn check(run: &mut Run, f: &crate::Formula, engine: Engine, dialect: &str) -> Result<Answer> {
    let (phi, nets) = load(run, f, dialect)?;
    sentence(&phi)?;
    let automata = || -> Result<bool> { Ok(Decider::new(run.exec).decide(&nnl_lower(&phi, &nets)?)?) };
    let exists = || -> Result<bool> { Ok(Solver::new(run.exec).prove(&phi, &nets)?) };
    let truth = match engine {
        Engine::Automata => automata()?,
        Engine::Exists => exists()?,
        Engine::Both => {
            let (a, b) = (automata()?, exists()?);
            if a != b {
                bail!("engines disagree: automata {a}, exists {b}");
            }
            a
        }
    };
    Ok(Answer::Bool(truth))
}

pub fn solve(run: &mut Run, f: &crate::Formula, dialect: &str, witness: bool) -> Result<Answer> {
    let (phi, nets) = load(run, f, dialect)?;
    let outcome = Solver::new(run.exec).solve_exists_nnl(&phi, &nets)?;
    let sat = outcome.is_sat();
    if let (true, Some(model)) = (witness, outcome.model()) {
        run.witness = Some(visible(&phi, &model));
    }
    Ok(Answer::Sat(sat))
}

pub fn reduce(run: &mut Run, r: Reduce) -> Result<Answer> {
    let Reduce::ThreeSat { cnf, solve, witness } = r;
    let cnf = Cnf3::from_dimacs(&read_source(&cnf, &mut run.inputs)?)?;
    let inst = sat3_to_reach(&cnf);
    if !solve {
        let print = |fs: &[Formula]| fs.iter().map(logic::printer::print).collect::<Vec<_>>();
        return Ok(Answer::Artifact(json!({
            "network": serde_json::to_value(&inst.network)?,
            "input": print(&inst.input),
            "output": print(&inst.output),
        })));
    }
    let outcome = Solver::new(run.exec).solve_reach(&inst)?;
    let sat = outcome.is_sat();
    if let (true, Some(x)) = (witness, outcome.model()) {
        let assignment: serde_json::Map<String, Value> =
            x.iter().enumerate().map(|(i, v)| (format!("x{}", i + 1), Value::Bool(!v.is_zero()))).collect();
        run.witness = Some(Value::Object(assignment));
    }
    Ok(Answer::Sat(sat))
}

pub fn automaton(run: &mut Run, cmd: AutomatonCmd) -> Result<(String, Answer)> {
    Ok(match cmd {
        AutomatonCmd::Build { formula, dialect, vars, emit_automaton } => {
            let (phi, nets) = load(run, &formula, &dialect)?;
            let vars = match vars {
                Some(v) => io::comma_list(&v),
                None => phi.free_vars().into_iter().collect(),
            };
            let a = Decider::new(run.exec).solutions(&nnl_lower(&phi, &nets)?, &vars)?;
            let answer = match emit_automaton {
                Some(path) => {
                    std::fs::write(&path, a.dump()).with_context(|| format!("writing {}", path.display()))?;
                    Answer::Value(format!("{} states over ({})", a.num_states(), vars.join(", ")))
                }
                None => Answer::Text(a.dump()),
            };
            ("automaton build".into(), answer)
        }
        AutomatonCmd::Decide { formula, dialect } => {
            let (phi, nets) = load(run, &formula, &dialect)?;
            sentence(&phi)?;
            ("automaton decide".into(), Answer::Bool(Decider::new(run.exec).decide(&nnl_lower(&phi, &nets)?)?))
        }
        AutomatonCmd::Witness { formula, dialect } => {
            let (phi, nets) = load(run, &formula, &dialect)?;
            let w = witness_exists(&phi, &nets)?;
            let sat = w.is_some();
            run.witness = w.map(|m| io::interpretation_json(&m));
            ("automaton witness".into(), Answer::Sat(sat))
        }
        AutomatonCmd::Dump { file, trim } => {
            let mut a = Buchi::parse(&read_source(&file, &mut run.inputs)?)?;
            if trim {
                a = a.trim();
            }
            ("automaton dump".into(), Answer::Text(a.dump()))
        }
    })
}
