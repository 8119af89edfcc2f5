use std::fmt;

use crate::{Error, Result};

/// Maximum number of tracks a label can hold.
pub const MAX_TRACKS: usize = 25;

/// One entry of a track symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Zero = 0,
    One = 1,
    Dot = 2,
    Plus = 3,
    Minus = 4,
}

impl Sym {
    pub const ALL: [Sym; 5] = [Sym::Zero, Sym::One, Sym::Dot, Sym::Plus, Sym::Minus];

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn from_index(i: u8) -> Sym {
        Sym::ALL[i as usize]
    }

    pub fn to_char(self) -> char {
        match self {
            Sym::Zero => '0',
            Sym::One => '1',
            Sym::Dot => '•',
            Sym::Plus => '+',
            Sym::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Sym> {
        match c {
            '0' => Some(Sym::Zero),
            '1' => Some(Sym::One),
            '•' | '.' => Some(Sym::Dot),
            '+' => Some(Sym::Plus),
            '-' | '−' => Some(Sym::Minus),
            _ => None,
        }
    }

    pub fn is_digit(self) -> bool {
        matches!(self, Sym::Zero | Sym::One)
    }
}

/// A concrete letter: one symbol per track.
pub type Letter = Vec<Sym>;

/// Parses a track string such as `+01•1` into symbols.
pub fn parse_syms(s: &str) -> Result<Vec<Sym>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| Sym::from_char(c).ok_or_else(|| Error::Invalid(format!("unknown track symbol {c:?}"))))
        .collect()
}

/// Per-track symbol masks.
pub const SIGN_MASK: u8 = (1 << 3) | (1 << 4);
pub const DOT_MASK: u8 = 1 << 2;
pub const DIGIT_MASK: u8 = 0b11;
pub const ANY_MASK: u8 = 0x1f;

/// A cube of letters: for every track, a set of allowed symbols (5 bits each).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub(crate) u128);

fn low_bits(k: usize) -> u128 {
    (0..k).fold(0u128, |acc, i| acc | (1u128 << (5 * i)))
}

impl Label {
    pub fn uniform(k: usize, mask: u8) -> Label {
        Label(low_bits(k) * mask as u128)
    }

    pub fn full(k: usize) -> Label {
        Label::uniform(k, ANY_MASK)
    }

    pub fn from_masks(masks: &[u8]) -> Label {
        Label(masks.iter().enumerate().fold(0u128, |acc, (i, &m)| acc | ((m as u128 & 0x1f) << (5 * i))))
    }

    pub fn of_letter(letter: &[Sym]) -> Label {
        Label(letter.iter().enumerate().fold(0u128, |acc, (i, s)| acc | ((s.bit() as u128) << (5 * i))))
    }

    pub fn track(self, i: usize) -> u8 {
        ((self.0 >> (5 * i)) & 0x1f) as u8
    }

    pub fn with_track(self, i: usize, mask: u8) -> Label {
        Label((self.0 & !(0x1fu128 << (5 * i))) | ((mask as u128 & 0x1f) << (5 * i)))
    }

    pub fn masks(self, k: usize) -> Vec<u8> {
        (0..k).map(|i| self.track(i)).collect()
    }

    pub fn and(self, other: Label) -> Label {
        Label(self.0 & other.0)
    }

    /// True when some track admits no symbol.
    pub fn is_empty(self, k: usize) -> bool {
        let g = self.0;
        let t = (g | g >> 1 | g >> 2 | g >> 3 | g >> 4) & low_bits(k);
        t != low_bits(k)
    }

    pub fn is_subset(self, other: Label) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, letter: &[Sym]) -> bool {
        let l = Label::of_letter(letter);
        self.0 & l.0 == l.0
    }

    /// Some letter inside the cube, preferring `0`, then `1`, `•`, `+`, `-`.
    pub fn sample(self, k: usize) -> Letter {
        (0..k)
            .map(|i| Sym::from_index(self.track(i).trailing_zeros() as u8))
            .collect()
    }

    /// Drops the first `i` tracks' worth of info beyond index `i`: keeps tracks `0..i`.
    pub fn truncate(self, i: usize) -> Label {
        if i == 0 {
            Label(0)
        } else {
            Label(self.0 & ((1u128 << (5 * i)) - 1))
        }
    }

    /// Removes track `t`, shifting later tracks down.
    pub fn remove_track(self, t: usize) -> Label {
        let low = if t == 0 { 0 } else { self.0 & ((1u128 << (5 * t)) - 1) };
        let high = (self.0 >> (5 * (t + 1))) << (5 * t);
        Label(low | high)
    }

    /// The cube difference `self \ other`, as disjoint cubes.
    pub fn minus(self, other: Label, k: usize) -> Vec<Label> {
        let mut out = Vec::new();
        let mut prefix = self;
        for t in 0..k {
            let rest = self.track(t) & !other.track(t);
            if rest != 0 {
                out.push(prefix.with_track(t, rest));
            }
            let both = self.track(t) & other.track(t);
            if both == 0 {
                break;
            }
            prefix = prefix.with_track(t, both);
        }
        out
    }

    /// Splits the cube by column type (sign, dot, digit), dropping empty parts.
    pub fn typed_parts(self, k: usize) -> Vec<(u8, Label)> {
        [SIGN_MASK, DOT_MASK, DIGIT_MASK]
            .into_iter()
            .filter_map(|m| {
                let l = self.and(Label::uniform(k, m));
                (!l.is_empty(k)).then_some((m, l))
            })
            .collect()
    }

    pub fn render(self, k: usize) -> String {
        let parts: Vec<String> = (0..k)
            .map(|i| {
                let m = self.track(i);
                if m == ANY_MASK {
                    "*".to_string()
                } else {
                    Sym::ALL.iter().filter(|s| m & s.bit() != 0).map(|s| s.to_char()).collect()
                }
            })
            .collect();
        format!("[{}]", parts.join(","))
    }

    pub fn parse(s: &str, k: usize) -> Result<Label> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Invalid(format!("label must be bracketed: {s}")))?;
        let items: Vec<&str> = if inner.trim().is_empty() { vec![] } else { inner.split(',').collect() };
        if items.len() != k {
            return Err(Error::Arity { expected: k, found: items.len() });
        }
        let mut masks = Vec::with_capacity(k);
        for it in items {
            let it = it.trim();
            let m = if it == "*" {
                ANY_MASK
            } else {
                let syms = parse_syms(it)?;
                if syms.is_empty() {
                    return Err(Error::Invalid("empty symbol set in label".into()));
                }
                syms.iter().fold(0u8, |m, s| m | s.bit())
            };
            masks.push(m);
        }
        Ok(Label::from_masks(&masks))
    }
}

/// An ultimately periodic word `prefix · period^ω` over k-track letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UPWord {
    pub prefix: Vec<Letter>,
    pub period: Vec<Letter>,
}

impl UPWord {
    pub fn new(prefix: Vec<Letter>, period: Vec<Letter>) -> Result<UPWord> {
        if period.is_empty() {
            return Err(Error::Invalid("period of an ultimately periodic word must be non-empty".into()));
        }
        let k = period[0].len();
        if prefix.iter().chain(period.iter()).any(|l| l.len() != k) {
            return Err(Error::Invalid("letters of differing arity".into()));
        }
        Ok(UPWord { prefix, period })
    }

    /// Builds a word from one string per track, e.g. `["+01•", "+10•"]` with period `["0", "0"]`.
    pub fn from_tracks(prefix: &[&str], period: &[&str]) -> Result<UPWord> {
        if prefix.len() != period.len() {
            return Err(Error::Arity { expected: prefix.len(), found: period.len() });
        }
        let columns = |rows: &[&str]| -> Result<Vec<Letter>> {
            let rows: Vec<Vec<Sym>> = rows.iter().map(|r| parse_syms(r)).collect::<Result<_>>()?;
            let len = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != len) {
                return Err(Error::Invalid("tracks of differing length".into()));
            }
            Ok((0..len).map(|c| rows.iter().map(|r| r[c]).collect()).collect())
        };
        let mut p = columns(prefix)?;
        let mut v = columns(period)?;
        if prefix.is_empty() {
            // k = 0: a single empty letter stands for the unique word.
            p.clear();
            v = vec![vec![]];
        }
        UPWord::new(p, v)
    }

    pub fn arity(&self) -> usize {
        self.period[0].len()
    }

    /// Letter at position `i` of the infinite word.
    pub fn at(&self, i: usize) -> &Letter {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// The word restricted to one track.
    pub fn track(&self, t: usize) -> UPWord {
        UPWord {
            prefix: self.prefix.iter().map(|l| vec![l[t]]).collect(),
            period: self.period.iter().map(|l| vec![l[t]]).collect(),
        }
    }
}

impl fmt::Display for UPWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.arity();
        let row = |ls: &[Letter], t: usize| ls.iter().map(|l| l[t].to_char()).collect::<String>();
        for t in 0..k {
            if t > 0 {
                writeln!(f)?;
            }
            write!(f, "{}({})^ω", row(&self.prefix, t), row(&self.period, t))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_difference_is_disjoint_and_exact() {
        let k = 3;
        let a = Label::full(k);
        let b = Label::from_masks(&[0b11, 0b100, 0b1]);
        let parts = a.minus(b, k);
        let mut count = 0;
        for l in Sym::ALL {
            for m in Sym::ALL {
                for n in Sym::ALL {
                    let w = [l, m, n];
                    let hits = parts.iter().filter(|p| p.contains(&w)).count();
                    assert_eq!(hits, usize::from(!b.contains(&w)));
                    count += hits;
                }
            }
        }
        assert_eq!(count, 125 - 2);
    }

    #[test]
    fn emptiness_and_truncation() {
        assert!(!Label::full(0).is_empty(0));
        assert!(Label::from_masks(&[1, 0]).is_empty(2));
        let l = Label::from_masks(&[1, 2, 4]);
        assert_eq!(l.remove_track(1).masks(2), vec![1, 4]);
        assert_eq!(l.truncate(2).masks(2), vec![1, 2]);
        assert_eq!(Label::parse(&l.render(3), 3).unwrap(), l);
    }
}
