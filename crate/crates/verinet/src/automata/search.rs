use std::collections::VecDeque;

use super::{Buchi, Label, Letter, UPWord};
use crate::{Error, Result};

/// Iterative Tarjan SCC over an adjacency list.
pub(crate) fn tarjan(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next = 0usize;
    let mut ncomp = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    (comp, ncomp)
}

/// Breadth-first path from `from` to `to` (inclusive of at least one edge when
/// `from == to`), restricted to states satisfying `allowed`.
fn bfs_path(a: &Buchi, from: usize, to: usize, allowed: &dyn Fn(usize) -> bool) -> Option<Vec<Label>> {
    let n = a.num_states();
    let mut parent: Vec<Option<(usize, Label)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &(l, q) in a.edges(from) {
        if allowed(q) && !seen[q] {
            seen[q] = true;
            parent[q] = Some((from, l));
            queue.push_back(q);
        }
    }
    while let Some(p) = queue.pop_front() {
        if p == to {
            break;
        }
        for &(l, q) in a.edges(p) {
            if allowed(q) && !seen[q] {
                seen[q] = true;
                parent[q] = Some((p, l));
                queue.push_back(q);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut labels = Vec::new();
    let mut cur = to;
    loop {
        let (p, l) = parent[cur].unwrap();
        labels.push(l);
        cur = p;
        if cur == from {
            break;
        }
    }
    labels.reverse();
    Some(labels)
}

/// Returns `None` when the language is empty, else a lasso witness.
pub fn is_empty(a: &Buchi) -> Option<UPWord> {
    let reach = a.reachable();
    let (comp, ncomp) = a.scc();
    let cyclic = a.cyclic_components(&comp, ncomp);
    let f = (0..a.num_states()).find(|&q| reach[q] && a.is_final(q) && cyclic[comp[q]])?;
    let k = a.arity();
    let prefix: Vec<Letter> = if f == a.init() {
        vec![]
    } else {
        bfs_path(a, a.init(), f, &|_| true)?.into_iter().map(|l| l.sample(k)).collect()
    };
    let c = comp[f];
    let period: Vec<Letter> =
        bfs_path(a, f, f, &|q| comp[q] == c)?.into_iter().map(|l| l.sample(k)).collect();
    Some(UPWord { prefix, period })
}

/// Membership of an ultimately periodic word, via the product with its lasso graph.
pub fn accepts(a: &Buchi, w: &UPWord) -> Result<bool> {
    if w.arity() != a.arity() {
        return Err(Error::Arity { expected: a.arity(), found: w.arity() });
    }
    let letters: Vec<Label> = w.prefix.iter().chain(w.period.iter()).map(|l| Label::of_letter(l)).collect();
    let len = letters.len();
    let loop_start = w.prefix.len();
    let succ_pos = |p: usize| if p + 1 < len { p + 1 } else { loop_start };
    let id = |q: usize, p: usize| q * len + p;
    let n = a.num_states() * len;
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    let mut seen = vec![false; n];
    let start = id(a.init(), 0);
    seen[start] = true;
    let mut stack = vec![(a.init(), 0usize)];
    while let Some((q, p)) = stack.pop() {
        let np = succ_pos(p);
        for &(l, r) in a.edges(q) {
            if letters[p].is_subset(l) {
                let t = id(r, np);
                adj[id(q, p)].push(t);
                if !seen[t] {
                    seen[t] = true;
                    stack.push((r, np));
                }
            }
        }
    }
    let (comp, ncomp) = tarjan(&adj);
    let mut size = vec![0usize; ncomp];
    for v in 0..n {
        size[comp[v]] += 1;
    }
    Ok((0..n).any(|v| {
        seen[v] && a.is_final(v / len) && (size[comp[v]] > 1 || adj[v].contains(&v))
    }))
}
