//! Reading inputs: files, stdin, bindings, words and vector sequences.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use verinet::logic::{Formula, Interpretation, NetworkBinding};
use verinet::nn::Ffnn;
use verinet::Rational;

use crate::report::Inputs;

/// Contents of `path`, or of stdin when `path` is `-`.
pub fn read_source(path: &str, inputs: &mut Inputs) -> Result<String> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    inputs.add("file", text.as_bytes());
    Ok(text)
}

/// Parses `NAME=path.json` bindings into networks.
pub fn bindings(models: &[String], inputs: &mut Inputs) -> Result<NetworkBinding> {
    let mut nets = NetworkBinding::new();
    for m in models {
        let (name, path) = m.split_once('=').ok_or_else(|| anyhow!("model binding {m:?} is not NAME=path"))?;
        let net = Ffnn::from_json(&read_source(path, inputs)?).with_context(|| format!("loading model {name}"))?;
        if nets.insert(name.to_string(), net).is_some() {
            bail!("network {name} is bound twice");
        }
    }
    Ok(nets)
}

/// Fails unless every network atom of `phi` names a bound network.
pub fn check_bindings(phi: &Formula, nets: &NetworkBinding) -> Result<()> {
    for atom in phi.net_atoms() {
        if !nets.contains_key(&atom.net) {
            bail!("network {} is not bound; pass --model {}=path.json", atom.net, atom.net);
        }
    }
    Ok(())
}

pub fn rational(text: &str) -> Result<Rational> {
    text.trim().parse().map_err(|e| anyhow!("bad rational {text:?}: {e}"))
}

/// A sequence of vectors: whitespace separates positions, commas separate components.
pub fn vectors(text: &str) -> Result<Vec<Vec<Rational>>> {
    text.split_whitespace().map(|tok| tok.split(',').map(rational).collect()).collect()
}

pub fn comma_list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Letter indices of a word. Letters are separated by whitespace, or written
/// back to back when every letter of the alphabet is a single character.
pub fn word(alphabet: &[String], text: &str) -> Result<Vec<usize>> {
    let index = |l: &str| {
        alphabet.iter().position(|a| a == l).ok_or_else(|| anyhow!("letter {l:?} is not in the alphabet {alphabet:?}"))
    };
    let single = alphabet.iter().all(|a| a.chars().count() == 1);
    if text.contains(char::is_whitespace) || !single {
        text.split_whitespace().map(index).collect()
    } else {
        text.chars().map(|c| index(&c.to_string())).collect()
    }
}

pub fn spell(alphabet: &[String], w: &[usize]) -> Vec<String> {
    w.iter().map(|&i| alphabet[i].clone()).collect()
}

pub fn interpretation_json(i: &Interpretation) -> Value {
    let map: BTreeMap<&String, String> = i.iter().map(|(k, v)| (k, v.to_string())).collect();
    serde_json::to_value(map).expect("string map")
}

pub fn vector_text(v: &[Rational]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn float_text(v: &[f64]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).context("parsing JSON")
}
