use std::collections::{HashMap, VecDeque};

use super::ops::complete;
use super::{reduce, Buchi, Label};
use crate::{Error, Result};

/// Upper bound on the number of subset states built by one determinization.
pub const DETERMINIZATION_BUDGET: usize = 200_000;

/// Splits Σ^k into regions (lists of disjoint cubes) such that every label in
/// `labels` either contains a region or is disjoint from it. Each region comes
/// with the indices of the labels containing it. Regions covered by no label
/// are kept only when `keep_uncovered` is set.
pub(crate) fn partition(labels: &[Label], k: usize, keep_uncovered: bool) -> Vec<(Vec<Label>, Vec<usize>)> {
    let mut parts: Vec<(Vec<Label>, Vec<usize>)> = vec![(vec![Label::full(k)], vec![])];
    for (li, &lab) in labels.iter().enumerate() {
        let mut next = Vec::with_capacity(parts.len() * 2);
        for (cubes, members) in parts {
            let mut inside = Vec::new();
            let mut outside = Vec::new();
            for c in cubes {
                let i = c.and(lab);
                if i.is_empty(k) {
                    outside.push(c);
                } else {
                    inside.push(i);
                    outside.extend(c.minus(lab, k));
                }
            }
            if !inside.is_empty() {
                let mut m = members.clone();
                m.push(li);
                next.push((inside, m));
            }
            if !outside.is_empty() {
                next.push((outside, members));
            }
        }
        parts = next;
    }
    if !keep_uncovered {
        parts.retain(|(_, m)| !m.is_empty());
    }
    parts
}

/// Breakpoint construction for a weak automaton read as co-Büchi.
///
/// Returns a complete deterministic automaton whose final states are the
/// breakpoints (tracked set empty). A word is accepted by the result iff it
/// is rejected by `a`.
fn breakpoint(a: &Buchi) -> Result<Buchi> {
    let k = a.arity();
    let mut out = Buchi::new(k);
    let mut index: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
    let start = (vec![a.init()], Vec::new());
    out.set_final(0, true);
    index.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start]);
    while let Some((s, o)) = queue.pop_front() {
        let src = index[&(s.clone(), o.clone())];
        let mut labels: Vec<Label> = s.iter().flat_map(|&p| a.edges(p).iter().map(|e| e.0)).collect();
        labels.sort_unstable();
        labels.dedup();
        let lookup: HashMap<Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut grouped: HashMap<(Vec<usize>, Vec<usize>), Vec<Label>> = HashMap::new();
        for (cubes, members) in partition(&labels, k, true) {
            let mut in_region = vec![false; labels.len()];
            for m in members {
                in_region[m] = true;
            }
            let step = |from: &[usize]| -> Vec<usize> {
                let mut t: Vec<usize> = from
                    .iter()
                    .flat_map(|&p| a.edges(p).iter())
                    .filter(|(l, _)| in_region[lookup[l]])
                    .map(|e| e.1)
                    .collect();
                t.sort_unstable();
                t.dedup();
                t
            };
            let s2 = step(&s);
            let tracked = if o.is_empty() { step(&s) } else { step(&o) };
            let o2: Vec<usize> = tracked.into_iter().filter(|&q| a.is_final(q)).collect();
            grouped.entry((s2, o2)).or_default().extend(cubes);
        }
        for (key, cubes) in grouped {
            let dst = match index.get(&key) {
                Some(&d) => d,
                None => {
                    if index.len() >= DETERMINIZATION_BUDGET {
                        return Err(Error::Capacity(format!(
                            "breakpoint construction exceeded {DETERMINIZATION_BUDGET} states"
                        )));
                    }
                    let d = out.add_state(key.1.is_empty());
                    index.insert(key.clone(), d);
                    queue.push_back(key);
                    d
                }
            };
            for c in cubes {
                out.add_edge(src, c, dst);
            }
        }
    }
    out.compress();
    Ok(out)
}

/// Turns a deterministic Büchi automaton into a weak one by making every
/// cyclic component containing a final state entirely final. Fails when such a
/// component also has a cycle avoiding final states, i.e. when the language is
/// not weak.
fn homogenize(a: &Buchi) -> Option<Buchi> {
    let (comp, ncomp) = a.scc();
    let cyclic = a.cyclic_components(&comp, ncomp);
    let n = a.num_states();
    let mut has_final = vec![false; ncomp];
    for q in 0..n {
        if a.is_final(q) {
            has_final[comp[q]] = true;
        }
    }
    // Cycles through non-final states only, inside mixed components.
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|p| {
            if a.is_final(p) || !has_final[comp[p]] {
                return vec![];
            }
            a.edges(p).iter().map(|e| e.1).filter(|&q| comp[q] == comp[p] && !a.is_final(q)).collect()
        })
        .collect();
    let (sub, nsub) = super::search::tarjan(&adj);
    let mut size = vec![0usize; nsub];
    for &c in &sub {
        size[c] += 1;
    }
    for p in 0..n {
        if !adj[p].is_empty() && (size[sub[p]] > 1 || adj[p].contains(&p)) {
            return None;
        }
    }
    let mut out = a.clone();
    for q in 0..n {
        let f = cyclic[comp[q]] && has_final[comp[q]];
        out.finals[q] = f || (a.is_final(q) && !cyclic[comp[q]]);
    }
    Some(out.with_flag(true))
}

fn flip(a: &Buchi) -> Buchi {
    let mut out = a.clone();
    for f in out.finals.iter_mut() {
        *f = !*f;
    }
    let flag = a.is_det_weak();
    out.with_flag(flag)
}

/// Complement of a complete deterministic automaton as a nondeterministic
/// automaton: guess the point after which only non-final states are visited.
fn kurshan(a: &Buchi) -> Buchi {
    let a = complete(a);
    let n = a.num_states();
    let mut out = Buchi::new(a.arity());
    for _ in 1..n {
        out.add_state(false);
    }
    out.init = a.init();
    let mut copy = vec![usize::MAX; n];
    for (q, c) in copy.iter_mut().enumerate() {
        if !a.is_final(q) {
            *c = out.add_state(true);
        }
    }
    for (p, l, q) in a.transitions() {
        out.add_edge(p, l, q);
        if copy[q] != usize::MAX {
            out.add_edge(p, l, copy[q]);
            if copy[p] != usize::MAX {
                out.add_edge(copy[p], l, copy[q]);
            }
        }
    }
    out.trim()
}

/// A deterministic weak automaton for the language of a weak automaton.
pub fn determinize(a: &Buchi) -> Result<Buchi> {
    if a.is_det_weak() {
        return Ok(a.clone());
    }
    if a.is_deterministic() {
        if let Some(h) = homogenize(&a.trim()) {
            return Ok(h);
        }
    }
    if !a.is_weak() {
        return Err(Error::NotWeak("determinization needs a weak automaton".into()));
    }
    let co = breakpoint(&reduce(a))?;
    let w = homogenize(&co).ok_or_else(|| Error::NotWeak("breakpoint automaton has mixed components".into()))?;
    Ok(flip(&w).trim().with_flag(true))
}

/// Exact complement.
///
/// Deterministic automata whose language is weak are completed and have their
/// final states flipped; other deterministic automata use the guess-the-suffix
/// construction; nondeterministic weak automata go through the breakpoint
/// construction. Nondeterministic non-weak automata are rejected.
pub fn complement(a: &Buchi) -> Result<Buchi> {
    if a.is_det_weak() {
        return Ok(flip(&complete(a)).with_flag(true));
    }
    let t = a.trim();
    if t.is_deterministic() {
        if let Some(h) = homogenize(&t) {
            return Ok(flip(&complete(&h)).with_flag(true));
        }
        return Ok(kurshan(&t));
    }
    if !t.is_weak() {
        return Err(Error::NotWeak("complementation of a nondeterministic automaton needs weakness".into()));
    }
    let co = breakpoint(&reduce(&t))?;
    Ok(match homogenize(&co) {
        Some(h) => h,
        None => co,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{accepts, infinitely_many_ones, intersect, is_empty, UPWord};

    fn w(u: &str, v: &str) -> UPWord {
        UPWord::from_tracks(&[u], &[v]).unwrap()
    }

    #[test]
    fn complement_of_infinitely_many_ones() {
        let c = complement(&infinitely_many_ones()).unwrap();
        assert!(accepts(&c, &w("1", "0")).unwrap());
        assert!(!accepts(&c, &w("", "01")).unwrap());
    }

    #[test]
    fn complement_of_empty_is_universal() {
        let c = complement(&Buchi::empty(1)).unwrap();
        assert!(accepts(&c, &w("", "0")).unwrap());
    }

    #[test]
    fn nondeterministic_weak_complement() {
        // Words containing at least one 1, built nondeterministically.
        let mut a = Buchi::new(1);
        let q1 = a.add_state(true);
        let any = Label::full(1);
        let one = Label::from_masks(&[2]);
        a.add_edge(0, any, 0);
        a.add_edge(0, one, q1);
        a.add_edge(q1, any, q1);
        assert!(a.is_weak() && !a.is_deterministic());
        let c = complement(&a).unwrap();
        assert!(accepts(&c, &w("", "0")).unwrap());
        assert!(!accepts(&c, &w("00", "10")).unwrap());
        assert!(is_empty(&intersect(&a, &c).unwrap()).is_none());
        let d = determinize(&a).unwrap();
        assert!(d.is_det_weak());
        assert!(accepts(&d, &w("0001", "0")).unwrap());
        assert!(!accepts(&d, &w("", "0")).unwrap());
    }
}
