//! Büchi automata over k-track alphabets.
//!
//! Transitions carry [`Label`]s: per-track symbol sets, so a single edge can
//! stand for many letters. All constructions are pure and return new automata.

mod complement;
mod label;
mod ops;
mod reduce;
mod search;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

pub use complement::{complement, determinize};
pub use label::{
    parse_syms, Label, Letter, Sym, UPWord, ANY_MASK, DIGIT_MASK, DOT_MASK, MAX_TRACKS, SIGN_MASK,
};
pub use ops::{embed, intersect, leading_zero_closure, project, remove_track, union};
pub use reduce::reduce;
pub use search::{accepts, is_empty};

use crate::{Error, Result};

/// A Büchi automaton with one initial state and integer-numbered states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Buchi {
    k: usize,
    init: usize,
    finals: Vec<bool>,
    edges: Vec<Vec<(Label, usize)>>,
    det_weak: bool,
}

impl Buchi {
    /// A single non-final initial state and no transitions (the empty language).
    pub fn new(k: usize) -> Buchi {
        assert!(k <= MAX_TRACKS, "at most {MAX_TRACKS} tracks are supported");
        Buchi { k, init: 0, finals: vec![false], edges: vec![vec![]], det_weak: false }
    }

    /// The automaton accepting every word over Σ^k.
    pub fn universal(k: usize) -> Buchi {
        let mut a = Buchi::new(k);
        a.set_final(0, true);
        a.add_edge(0, Label::full(k), 0);
        a.det_weak = true;
        a
    }

    pub fn empty(k: usize) -> Buchi {
        let mut a = Buchi::new(k);
        a.det_weak = true;
        a
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn set_init(&mut self, q: usize) {
        assert!(q < self.num_states());
        self.init = q;
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn set_final(&mut self, q: usize, f: bool) {
        self.finals[q] = f;
        self.det_weak = false;
    }

    pub fn finals(&self) -> impl Iterator<Item = usize> + '_ {
        self.finals.iter().enumerate().filter(|(_, f)| **f).map(|(q, _)| q)
    }

    pub fn add_state(&mut self, fin: bool) -> usize {
        self.finals.push(fin);
        self.edges.push(vec![]);
        self.finals.len() - 1
    }

    /// Adds an edge; edges with an empty label are ignored.
    pub fn add_edge(&mut self, p: usize, label: Label, q: usize) {
        assert!(p < self.num_states() && q < self.num_states(), "edge endpoint out of range");
        if label.is_empty(self.k) {
            return;
        }
        self.edges[p].push((label, q));
        self.det_weak = false;
    }

    pub fn edges(&self, q: usize) -> &[(Label, usize)] {
        &self.edges[q]
    }

    /// All transitions as `(source, label, target)`.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, Label, usize)> + '_ {
        self.edges.iter().enumerate().flat_map(|(p, es)| es.iter().map(move |&(l, q)| (p, l, q)))
    }

    /// Whether the automaton is flagged deterministic and weak.
    pub fn is_det_weak(&self) -> bool {
        self.det_weak
    }

    /// Sets the deterministic-weak flag after checking it.
    pub fn mark_det_weak(&mut self) -> bool {
        self.det_weak = self.is_deterministic() && self.is_weak();
        self.det_weak
    }

    pub(crate) fn with_flag(mut self, det_weak: bool) -> Buchi {
        self.det_weak = det_weak;
        self
    }

    /// At most one successor per state and letter.
    pub fn is_deterministic(&self) -> bool {
        self.edges.iter().all(|es| {
            es.iter().enumerate().all(|(i, &(l1, q1))| {
                es[i + 1..].iter().all(|&(l2, q2)| q1 == q2 || l1.and(l2).is_empty(self.k))
            })
        })
    }

    /// Every strongly connected component with a cycle is all-final or all-non-final.
    pub fn is_weak(&self) -> bool {
        let (comp, ncomp) = self.scc();
        let mut seen: Vec<Option<bool>> = vec![None; ncomp];
        let cyclic = self.cyclic_components(&comp, ncomp);
        for (q, &c) in comp.iter().enumerate() {
            if !cyclic[c] {
                continue;
            }
            match seen[c] {
                None => seen[c] = Some(self.finals[q]),
                Some(f) if f != self.finals[q] => return false,
                _ => {}
            }
        }
        true
    }

    /// Strongly connected components (Tarjan, iterative). Returns the
    /// component index per state and the number of components.
    pub fn scc(&self) -> (Vec<usize>, usize) {
        let adj: Vec<Vec<usize>> = self.edges.iter().map(|es| es.iter().map(|e| e.1).collect()).collect();
        search::tarjan(&adj)
    }

    pub(crate) fn cyclic_components(&self, comp: &[usize], ncomp: usize) -> Vec<bool> {
        let mut size = vec![0usize; ncomp];
        for &c in comp {
            size[c] += 1;
        }
        let mut cyc: Vec<bool> = size.iter().map(|&s| s > 1).collect();
        for (p, es) in self.edges.iter().enumerate() {
            if es.iter().any(|e| e.1 == p) {
                cyc[comp[p]] = true;
            }
        }
        cyc
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.init];
        seen[self.init] = true;
        while let Some(p) = stack.pop() {
            for &(_, q) in &self.edges[p] {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        seen
    }

    /// Keeps only states that are reachable and can reach an accepting cycle.
    pub fn trim(&self) -> Buchi {
        let reach = self.reachable();
        let (comp, ncomp) = self.scc();
        let cyclic = self.cyclic_components(&comp, ncomp);
        let n = self.num_states();
        let mut good = vec![false; n];
        let mut rev: Vec<Vec<usize>> = vec![vec![]; n];
        for (p, es) in self.edges.iter().enumerate() {
            for &(_, q) in es {
                rev[q].push(p);
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&q| self.finals[q] && cyclic[comp[q]]).collect();
        for &q in &stack {
            good[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !good[p] {
                    good[p] = true;
                    stack.push(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|q| (reach[q] && good[q]) || q == self.init).collect();
        self.restrict(&keep)
    }

    /// The sub-automaton induced by `keep` (which must contain the initial state).
    pub(crate) fn restrict(&self, keep: &[bool]) -> Buchi {
        let mut index = vec![usize::MAX; self.num_states()];
        let mut out = Buchi { k: self.k, init: 0, finals: vec![], edges: vec![], det_weak: false };
        for q in (0..self.num_states()).filter(|&q| keep[q]) {
            index[q] = out.add_state(self.finals[q]);
        }
        out.init = index[self.init];
        for (p, es) in self.edges.iter().enumerate() {
            if index[p] == usize::MAX {
                continue;
            }
            for &(l, q) in es {
                if index[q] != usize::MAX {
                    out.edges[index[p]].push((l, index[q]));
                }
            }
        }
        out.det_weak = self.det_weak;
        out
    }

    /// Merges edges sharing source and target whose labels differ on at most
    /// one track, and drops edges subsumed by another.
    pub fn compress(&mut self) {
        let k = self.k;
        for es in &mut self.edges {
            let mut by_target: HashMap<usize, Vec<Label>> = HashMap::new();
            for &(l, q) in es.iter() {
                by_target.entry(q).or_default().push(l);
            }
            let mut merged: Vec<(Label, usize)> = Vec::with_capacity(es.len());
            let mut targets: Vec<usize> = by_target.keys().copied().collect();
            targets.sort_unstable();
            for q in targets {
                let mut ls = by_target.remove(&q).unwrap();
                ls.sort_unstable();
                ls.dedup();
                merge_cubes(&mut ls, k);
                merged.extend(ls.into_iter().map(|l| (l, q)));
            }
            *es = merged;
        }
    }

    /// Text dump: header, final-state line, one transition per line.
    pub fn dump(&self) -> String {
        let mut s = format!("buchi k={} states={} init={}\n", self.k, self.num_states(), self.init);
        let fin: Vec<String> = self.finals().map(|q| q.to_string()).collect();
        let _ = writeln!(s, "final:{}{}", if fin.is_empty() { "" } else { " " }, fin.join(" "));
        for (p, l, q) in self.transitions() {
            let _ = writeln!(s, "{p} --{}--> {q}", l.render(self.k));
        }
        s
    }

    /// Parses the text format written by [`Buchi::dump`].
    pub fn parse(text: &str) -> Result<Buchi> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Invalid("empty automaton text".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("buchi") {
            return Err(Error::Invalid(format!("bad header: {header}")));
        }
        let mut get = |name: &str| -> Result<usize> {
            let f = fields.next().ok_or_else(|| Error::Invalid(format!("header lacks {name}")))?;
            f.strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Invalid(format!("bad header field {f}")))
        };
        let k = get("k")?;
        let n = get("states")?;
        let init = get("init")?;
        if k > MAX_TRACKS {
            return Err(Error::Capacity(format!("{k} tracks exceed the limit of {MAX_TRACKS}")));
        }
        if n == 0 || init >= n {
            return Err(Error::Invalid("initial state out of range".into()));
        }
        let mut a = Buchi { k, init, finals: vec![false; n], edges: vec![vec![]; n], det_weak: false };
        let fin = lines.next().ok_or_else(|| Error::Invalid("missing final line".into()))?;
        let fin = fin.strip_prefix("final:").ok_or_else(|| Error::Invalid(format!("bad final line: {fin}")))?;
        for tok in fin.split_whitespace() {
            let q: usize = tok.parse().map_err(|_| Error::Invalid(format!("bad state {tok}")))?;
            if q >= n {
                return Err(Error::Invalid(format!("final state {q} out of range")));
            }
            a.finals[q] = true;
        }
        for line in lines {
            let (p, rest) = line.split_once("--").ok_or_else(|| Error::Invalid(format!("bad transition: {line}")))?;
            let (label, q) = rest.rsplit_once("-->").ok_or_else(|| Error::Invalid(format!("bad transition: {line}")))?;
            let p: usize = p.trim().parse().map_err(|_| Error::Invalid(format!("bad state in {line}")))?;
            let q: usize = q.trim().parse().map_err(|_| Error::Invalid(format!("bad state in {line}")))?;
            if p >= n || q >= n {
                return Err(Error::Invalid(format!("transition endpoint out of range: {line}")));
            }
            a.add_edge(p, Label::parse(label, k)?, q);
        }
        Ok(a)
    }

    /// The set of (source, label, target) triples, for structural comparisons.
    pub fn edge_set(&self) -> BTreeSet<(usize, Label, usize)> {
        self.transitions().collect()
    }
}

/// Greedy cube merging: repeatedly drops subsumed cubes and unites cubes
/// that agree on all tracks but one.
pub(crate) fn merge_cubes(ls: &mut Vec<Label>, k: usize) {
    let mut changed = true;
    while changed && ls.len() > 1 {
        changed = false;
        'outer: for i in 0..ls.len() {
            for j in 0..ls.len() {
                if i == j {
                    continue;
                }
                if ls[i].is_subset(ls[j]) {
                    ls.swap_remove(i);
                    changed = true;
                    break 'outer;
                }
                let diff: Vec<usize> = (0..k).filter(|&t| ls[i].track(t) != ls[j].track(t)).collect();
                if diff.len() == 1 {
                    let t = diff[0];
                    let m = ls[i].track(t) | ls[j].track(t);
                    ls[i] = ls[i].with_track(t, m);
                    ls.swap_remove(j);
                    changed = true;
                    break 'outer;
                }
            }
        }
    }
}

/// The example automaton over one track accepting words with infinitely many `1`s.
pub fn infinitely_many_ones() -> Buchi {
    let mut a = Buchi::new(1);
    let q1 = a.add_state(true);
    let zero = Label::from_masks(&[Sym::Zero.bit()]);
    let one = Label::from_masks(&[Sym::One.bit()]);
    a.add_edge(0, zero, 0);
    a.add_edge(0, one, q1);
    a.add_edge(q1, one, q1);
    a.add_edge(q1, zero, 0);
    a
}
