use std::collections::HashMap;

use super::{Buchi, Label};

/// Hash-consed multi-valued decision diagrams over track symbols, used to
/// compare transition relations of states independently of how their labels
/// happen to be cut into cubes.
#[derive(Default)]
struct Mdd {
    table: HashMap<Node, u32>,
    leaves: HashMap<Vec<u32>, u32>,
    next: u32,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Node {
    Leaf(u32),
    Inner(u8, [u32; 5]),
}

impl Mdd {
    fn intern(&mut self, n: Node) -> u32 {
        if let Some(&id) = self.table.get(&n) {
            return id;
        }
        let id = self.next;
        self.next += 1;
        self.table.insert(n, id);
        id
    }

    fn leaf(&mut self, mut targets: Vec<u32>) -> u32 {
        targets.sort_unstable();
        targets.dedup();
        let next = self.leaves.len() as u32;
        let lid = *self.leaves.entry(targets).or_insert(next);
        self.intern(Node::Leaf(lid))
    }

    /// Canonical diagram of the map letter -> set of targets given by `edges`.
    fn build(&mut self, k: usize, edges: &[(Label, u32)]) -> u32 {
        let all: Vec<usize> = (0..edges.len()).collect();
        let mut memo = HashMap::new();
        self.go(k, edges, 0, all, &mut memo)
    }

    fn go(
        &mut self,
        k: usize,
        edges: &[(Label, u32)],
        track: usize,
        live: Vec<usize>,
        memo: &mut HashMap<(usize, Vec<usize>), u32>,
    ) -> u32 {
        if track == k || live.is_empty() {
            let targets = live.iter().map(|&i| edges[i].1).collect();
            return self.leaf(targets);
        }
        let key = (track, live);
        if let Some(&id) = memo.get(&key) {
            return id;
        }
        let live = &key.1;
        let mut kids = [0u32; 5];
        for (s, kid) in kids.iter_mut().enumerate() {
            let sub: Vec<usize> =
                live.iter().copied().filter(|&i| edges[i].0.track(track) & (1 << s) != 0).collect();
            *kid = self.go(k, edges, track + 1, sub, memo);
        }
        let id = if kids.iter().all(|&c| c == kids[0]) {
            kids[0]
        } else {
            self.intern(Node::Inner(track as u8, kids))
        };
        memo.insert(key, id);
        id
    }
}

/// Trims and quotients by forward bisimulation (partition refinement starting
/// from the final/non-final split). The language is unchanged. When the
/// quotient would break weakness of a weak input, the trimmed automaton is
/// returned instead.
pub fn reduce(a: &Buchi) -> Buchi {
    let a = a.trim();
    let n = a.num_states();
    let k = a.arity();
    let mut block: Vec<u32> = (0..n).map(|q| u32::from(a.is_final(q))).collect();
    let mut count = 0usize;
    loop {
        let mut mdd = Mdd::default();
        let mut sigs: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = vec![0u32; n];
        for q in 0..n {
            let mapped: Vec<(Label, u32)> = a.edges(q).iter().map(|&(l, t)| (l, block[t])).collect();
            let d = mdd.build(k, &mapped);
            let len = sigs.len() as u32;
            next[q] = *sigs.entry((block[q], d)).or_insert(len);
        }
        let c = sigs.len();
        block = next;
        if c == count {
            break;
        }
        count = c;
    }
    if count == n {
        return a;
    }
    let mut out = Buchi::new(k);
    for _ in 1..count {
        out.add_state(false);
    }
    let mut rep = vec![usize::MAX; count];
    for (q, &b) in block.iter().enumerate() {
        let b = b as usize;
        if rep[b] == usize::MAX {
            rep[b] = q;
        }
    }
    for (b, &q) in rep.iter().enumerate() {
        out.finals[b] = a.is_final(q);
        for &(l, t) in a.edges(q) {
            out.edges[b].push((l, block[t] as usize));
        }
    }
    out.init = block[a.init()] as usize;
    out.compress();
    let was_weak = a.is_weak();
    if was_weak && !out.is_weak() {
        return a;
    }
    let det = out.is_deterministic() && out.is_weak();
    out.with_flag(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{accepts, infinitely_many_ones, UPWord};

    #[test]
    fn duplicate_states_collapse() {
        let mut a = infinitely_many_ones();
        // Add a copy of state 1 reached from state 0 on the same letter.
        let q2 = a.add_state(true);
        let one = Label::from_masks(&[2]);
        let zero = Label::from_masks(&[1]);
        a.add_edge(0, one, q2);
        a.add_edge(q2, one, q2);
        a.add_edge(q2, zero, 0);
        let r = reduce(&a);
        assert_eq!(r.num_states(), 2);
        for (u, v) in [("", "01"), ("1", "0"), ("0", "1")] {
            let w = UPWord::from_tracks(&[u], &[v]).unwrap();
            assert_eq!(accepts(&a, &w).unwrap(), accepts(&r, &w).unwrap());
        }
    }
}
