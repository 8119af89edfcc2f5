use std::collections::{HashMap, HashSet, VecDeque};

use super::{is_empty, Buchi, Label, SIGN_MASK};
use crate::{Error, Result};

fn check_arity(a: &Buchi, b: &Buchi) -> Result<()> {
    if a.arity() != b.arity() {
        return Err(Error::Arity { expected: a.arity(), found: b.arity() });
    }
    Ok(())
}

/// Synchronous product exploring only reachable pairs. `phase` computes the
/// flag component of the successor; `fin` decides finality of a product state.
fn product(
    a: &Buchi,
    b: &Buchi,
    phase: impl Fn(usize, usize, u8) -> u8,
    fin: impl Fn(usize, usize, u8) -> bool,
) -> Buchi {
    let k = a.arity();
    let mut out = Buchi::new(k);
    let mut index: HashMap<(usize, usize, u8), usize> = HashMap::new();
    let start = (a.init(), b.init(), 0u8);
    out.set_final(0, fin(start.0, start.1, start.2));
    index.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q, f)) = queue.pop_front() {
        let src = index[&(p, q, f)];
        let nf = phase(p, q, f);
        for &(l1, p2) in a.edges(p) {
            for &(l2, q2) in b.edges(q) {
                let l = l1.and(l2);
                if l.is_empty(k) {
                    continue;
                }
                let key = (p2, q2, nf);
                let dst = match index.get(&key) {
                    Some(&d) => d,
                    None => {
                        let d = out.add_state(fin(p2, q2, nf));
                        index.insert(key, d);
                        queue.push_back(key);
                        d
                    }
                };
                out.add_edge(src, l, dst);
            }
        }
    }
    out.compress();
    out
}

/// Language intersection. Weak inputs use the plain product (final when both
/// components are final), which stays weak; other inputs use the two-phase
/// flag product.
pub fn intersect(a: &Buchi, b: &Buchi) -> Result<Buchi> {
    check_arity(a, b)?;
    if a.is_weak() && b.is_weak() {
        let det = a.is_det_weak() && b.is_det_weak();
        let p = product(a, b, |_, _, _| 0, |p, q, _| a.is_final(p) && b.is_final(q));
        return Ok(p.with_flag(det));
    }
    let p = product(
        a,
        b,
        |p, q, f| match f {
            0 if a.is_final(p) => 1,
            1 if b.is_final(q) => 0,
            f => f,
        },
        |_, q, f| f == 1 && b.is_final(q),
    );
    Ok(p)
}

/// Adds a non-final sink and routes every missing letter to it.
pub(crate) fn complete(a: &Buchi) -> Buchi {
    let k = a.arity();
    let mut out = a.clone();
    let mut sink = None;
    for p in 0..a.num_states() {
        let mut missing = vec![Label::full(k)];
        for &(l, _) in a.edges(p) {
            missing = missing.into_iter().flat_map(|m| m.minus(l, k)).collect();
            if missing.is_empty() {
                break;
            }
        }
        if missing.is_empty() {
            continue;
        }
        let s = *sink.get_or_insert_with(|| {
            let s = out.add_state(false);
            out.add_edge(s, Label::full(k), s);
            s
        });
        for m in missing {
            out.add_edge(p, m, s);
        }
    }
    out.compress();
    let flag = a.is_det_weak();
    out.with_flag(flag)
}

/// Language union. Two deterministic-weak inputs give a deterministic-weak
/// product; otherwise a fresh initial state joins both automata.
pub fn union(a: &Buchi, b: &Buchi) -> Result<Buchi> {
    check_arity(a, b)?;
    if a.is_det_weak() && b.is_det_weak() {
        let (ca, cb) = (complete(a), complete(b));
        let p = product(&ca, &cb, |_, _, _| 0, |p, q, _| ca.is_final(p) || cb.is_final(q));
        return Ok(p.trim().with_flag(true));
    }
    let k = a.arity();
    let mut out = Buchi::new(k);
    let off_a = 1;
    let off_b = 1 + a.num_states();
    for q in 0..a.num_states() {
        out.add_state(a.is_final(q));
    }
    for q in 0..b.num_states() {
        out.add_state(b.is_final(q));
    }
    for (p, l, q) in a.transitions() {
        out.add_edge(p + off_a, l, q + off_a);
    }
    for (p, l, q) in b.transitions() {
        out.add_edge(p + off_b, l, q + off_b);
    }
    for &(l, q) in a.edges(a.init()) {
        out.add_edge(0, l, q + off_a);
    }
    for &(l, q) in b.edges(b.init()) {
        out.add_edge(0, l, q + off_b);
    }
    Ok(out.trim())
}

fn map_labels(a: &Buchi, k: usize, f: impl Fn(Label) -> Label) -> Buchi {
    let mut out = Buchi::new(k);
    for _ in 1..a.num_states() {
        out.add_state(false);
    }
    for q in 0..a.num_states() {
        out.finals[q] = a.is_final(q);
    }
    out.init = a.init();
    for (p, l, q) in a.transitions() {
        out.add_edge(p, f(l), q);
    }
    out.compress();
    out
}

/// Keeps the first `i` tracks of every label.
pub fn project(a: &Buchi, i: usize) -> Result<Buchi> {
    if i > a.arity() {
        return Err(Error::Invalid(format!("cannot project {} tracks to {i}", a.arity())));
    }
    if i == a.arity() {
        return Ok(a.clone());
    }
    Ok(map_labels(a, i, |l| l.truncate(i)))
}

/// Deletes track `t` from every label.
pub fn remove_track(a: &Buchi, t: usize) -> Result<Buchi> {
    if t >= a.arity() {
        return Err(Error::Invalid(format!("track {t} out of range for arity {}", a.arity())));
    }
    Ok(map_labels(a, a.arity() - 1, |l| l.remove_track(t)))
}

/// Re-expresses an automaton over `k` tracks: source track `t` becomes track
/// `map[t]` (several source tracks may share a target, which forces them to
/// agree). Target tracks not hit by `map` are constrained only to follow the
/// column type (sign, dot, digit) of the other tracks, so a language inside
/// WF^m becomes its cylinder inside WF^k.
pub fn embed(a: &Buchi, k: usize, map: &[usize]) -> Result<Buchi> {
    if map.len() != a.arity() {
        return Err(Error::Arity { expected: a.arity(), found: map.len() });
    }
    if map.iter().any(|&t| t >= k) {
        return Err(Error::Invalid("embedding target out of range".into()));
    }
    if a.arity() == 0 {
        return Ok(if is_empty(a).is_some() {
            crate::lra::wf_automaton(k)
        } else {
            Buchi::empty(k)
        });
    }
    let identity = map.len() == k && map.iter().enumerate().all(|(i, &t)| i == t);
    if identity {
        return Ok(a.clone());
    }
    let src_k = a.arity();
    let out = map_labels_multi(a, k, |l| {
        l.typed_parts(src_k)
            .into_iter()
            .filter_map(|(mask, part)| {
                let mut t = Label::uniform(k, mask);
                for (s, &dst) in map.iter().enumerate() {
                    t = t.with_track(dst, t.track(dst) & part.track(s));
                }
                (!t.is_empty(k)).then_some(t)
            })
            .collect()
    });
    // Each target letter determines its source letter, so determinism and
    // weakness carry over.
    let det = a.is_det_weak();
    Ok(out.with_flag(det))
}

fn map_labels_multi(a: &Buchi, k: usize, f: impl Fn(Label) -> Vec<Label>) -> Buchi {
    let mut out = Buchi::new(k);
    for _ in 1..a.num_states() {
        out.add_state(false);
    }
    for q in 0..a.num_states() {
        out.finals[q] = a.is_final(q);
    }
    out.init = a.init();
    for (p, l, q) in a.transitions() {
        for m in f(l) {
            out.add_edge(p, m, q);
        }
    }
    out.compress();
    out
}

/// Closure under deleting an all-zero column right after the sign column.
///
/// Saturates: whenever the initial state has a sign edge to `q` and `q` has an
/// edge admitting the all-zero letter to `q'`, a sign edge to `q'` is added.
pub fn leading_zero_closure(a: &Buchi) -> Buchi {
    let k = a.arity();
    if k == 0 {
        return a.clone();
    }
    let mut b = a.clone();
    // Give the initial state no incoming edges so new edges only act at position 0.
    if b.transitions().any(|(_, _, q)| q == b.init) {
        let fresh = b.add_state(b.is_final(b.init));
        let init_edges = b.edges(b.init).to_vec();
        for (l, q) in init_edges {
            b.add_edge(fresh, l, q);
        }
        b.init = fresh;
    }
    let zero = Label::uniform(k, 1);
    let sign = Label::uniform(k, SIGN_MASK);
    let init = b.init;
    let mut present: HashSet<(Label, usize)> = b.edges(init).iter().copied().collect();
    let mut work: Vec<(Label, usize)> = b
        .edges(init)
        .iter()
        .filter_map(|&(l, q)| {
            let s = l.and(sign);
            (!s.is_empty(k)).then_some((s, q))
        })
        .collect();
    while let Some((s, q)) = work.pop() {
        let succ: Vec<usize> =
            b.edges(q).iter().filter(|(m, _)| zero.is_subset(*m)).map(|&(_, q2)| q2).collect();
        for q2 in succ {
            if present.insert((s, q2)) {
                b.add_edge(init, s, q2);
                work.push((s, q2));
            }
        }
    }
    b.compress();
    b
}
