//! Finite automata over child-count parities.
//!
//! Patterns are written over the letters `o` (odd), `e` (even, at least 2),
//! `z` (zero) and `E` (even or zero), with `|`, `*`, `+` and parentheses.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CountClass {
    Zero,
    Odd,
    Even,
}

impl CountClass {
    pub const ALL: [CountClass; 3] = [CountClass::Zero, CountClass::Odd, CountClass::Even];

    pub fn of(count: usize) -> CountClass {
        match count {
            0 => CountClass::Zero,
            c if c % 2 == 1 => CountClass::Odd,
            _ => CountClass::Even,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            CountClass::Zero => 'z',
            CountClass::Odd => 'o',
            CountClass::Even => 'e',
        }
    }

    /// Smallest count with this parity class.
    pub fn least(self) -> usize {
        match self {
            CountClass::Zero => 0,
            CountClass::Odd => 1,
            CountClass::Even => 2,
        }
    }
}

pub fn word_of(counts: &[usize]) -> Vec<CountClass> {
    counts.iter().map(|&c| CountClass::of(c)).collect()
}

pub fn word_string(word: &[CountClass]) -> String {
    word.iter().map(|s| s.letter()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pattern error at {offset}: {message}")]
pub struct PatternError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Regex {
    Empty,
    Letter(u8),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

struct RegexParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl RegexParser<'_> {
    fn fail<T>(&self, message: &str) -> Result<T, PatternError> {
        Err(PatternError { offset: self.pos, message: message.into() })
    }

    fn alt(&mut self) -> Result<Regex, PatternError> {
        let mut arms = vec![self.concat()?];
        while self.text.get(self.pos) == Some(&b'|') {
            self.pos += 1;
            arms.push(self.concat()?);
        }
        Ok(if arms.len() == 1 { arms.pop().unwrap() } else { Regex::Alt(arms) })
    }

    fn concat(&mut self) -> Result<Regex, PatternError> {
        let mut parts = Vec::new();
        while let Some(&c) = self.text.get(self.pos) {
            let atom = match c {
                b'o' | b'e' | b'z' | b'E' => {
                    self.pos += 1;
                    Regex::Letter(match c {
                        b'z' => 1,
                        b'o' => 2,
                        b'e' => 4,
                        _ => 5,
                    })
                }
                b'(' => {
                    self.pos += 1;
                    let inner = self.alt()?;
                    if self.text.get(self.pos) != Some(&b')') {
                        return self.fail("expected ')'");
                    }
                    self.pos += 1;
                    inner
                }
                b'|' | b')' => break,
                b' ' => {
                    self.pos += 1;
                    continue;
                }
                _ => return self.fail("unexpected character"),
            };
            let atom = match self.text.get(self.pos) {
                Some(b'*') => {
                    self.pos += 1;
                    Regex::Star(Box::new(atom))
                }
                Some(b'+') => {
                    self.pos += 1;
                    Regex::Concat(vec![atom.clone(), Regex::Star(Box::new(atom))])
                }
                _ => atom,
            };
            parts.push(atom);
        }
        Ok(match parts.len() {
            0 => Regex::Empty,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }
}

fn parse_regex(text: &str) -> Result<Regex, PatternError> {
    let mut p = RegexParser { text: text.as_bytes(), pos: 0 };
    let r = p.alt()?;
    if p.pos != text.len() {
        return p.fail("trailing input");
    }
    Ok(r)
}

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(u8, usize)>>,
}

impl Nfa {
    fn node(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (entry, exit) of a fragment for `r`.
    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Empty => {
                let n = self.node();
                (n, n)
            }
            Regex::Letter(mask) => {
                let (a, b) = (self.node(), self.node());
                self.edges[a].push((*mask, b));
                (a, b)
            }
            Regex::Concat(parts) => {
                let (start, mut end) = self.build(&parts[0]);
                for p in &parts[1..] {
                    let (s, e) = self.build(p);
                    self.eps[end].push(s);
                    end = e;
                }
                (start, end)
            }
            Regex::Alt(arms) => {
                let (a, b) = (self.node(), self.node());
                for arm in arms {
                    let (s, e) = self.build(arm);
                    self.eps[a].push(s);
                    self.eps[e].push(b);
                }
                (a, b)
            }
            Regex::Star(inner) => {
                let a = self.node();
                let (s, e) = self.build(inner);
                self.eps[a].push(s);
                self.eps[e].push(a);
                (a, a)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(n) = stack.pop() {
            for &m in &self.eps[n] {
                if set.insert(m) {
                    stack.push(m);
                }
            }
        }
    }
}

pub type StateId = usize;

/// Deterministic automaton recognising several languages at once; each state
/// carries a bit per language it accepts.
#[derive(Clone, Debug)]
pub struct Dfa {
    next: Vec<[StateId; 3]>,
    flags: Vec<u32>,
    names: Vec<String>,
}

impl Dfa {
    pub fn new(languages: &[(&str, &str)]) -> Result<Dfa, PatternError> {
        assert!(languages.len() <= 32);
        let mut nfa = Nfa::default();
        let root = nfa.node();
        let mut accepting = Vec::new();
        for (_, text) in languages {
            let (s, e) = nfa.build(&parse_regex(text)?);
            nfa.eps[root].push(s);
            accepting.push(e);
        }
        let flags_of = |set: &BTreeSet<usize>| {
            accepting.iter().enumerate().filter(|(_, e)| set.contains(e)).fold(0u32, |f, (i, _)| f | 1 << i)
        };
        let mut start = BTreeSet::from([root]);
        nfa.closure(&mut start);
        let mut ids: HashMap<BTreeSet<usize>, StateId> = HashMap::new();
        let mut sets = vec![start.clone()];
        ids.insert(start, 0);
        let mut next = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut row = [0; 3];
            for sym in CountClass::ALL {
                let bit = 1u8 << sym.index();
                let mut target = BTreeSet::new();
                for &n in &sets[i] {
                    for &(mask, m) in &nfa.edges[n] {
                        if mask & bit != 0 {
                            target.insert(m);
                        }
                    }
                }
                nfa.closure(&mut target);
                let id = *ids.entry(target.clone()).or_insert_with(|| {
                    sets.push(target);
                    sets.len() - 1
                });
                row[sym.index()] = id;
            }
            next.push(row);
            i += 1;
        }
        let flags = sets.iter().map(flags_of).collect();
        Ok(Dfa { next, flags, names: languages.iter().map(|(n, _)| n.to_string()).collect() })
    }

    pub fn start(&self) -> StateId {
        0
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    pub fn step(&self, q: StateId, sym: CountClass) -> StateId {
        self.next[q][sym.index()]
    }

    pub fn run(&self, q: StateId, word: &[CountClass]) -> StateId {
        word.iter().fold(q, |q, &s| self.step(q, s))
    }

    pub fn flags(&self, q: StateId) -> u32 {
        self.flags[q]
    }

    pub fn accepts(&self, q: StateId, language: usize) -> bool {
        self.flags[q] & (1 << language) != 0
    }

    pub fn matches(&self, word: &[CountClass], language: usize) -> bool {
        self.accepts(self.run(self.start(), word), language)
    }

    pub fn language_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// States from which no language can still be accepted.
    pub fn dead_states(&self) -> Vec<bool> {
        let mut live: Vec<bool> = self.flags.iter().map(|&f| f != 0).collect();
        loop {
            let mut changed = false;
            for q in 0..self.len() {
                if !live[q] && self.next[q].iter().any(|&r| live[r]) {
                    live[q] = true;
                    changed = true;
                }
            }
            if !changed {
                return live.into_iter().map(|l| !l).collect();
            }
        }
    }
}

impl fmt::Display for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, row) in self.next.iter().enumerate() {
            writeln!(f, "{q}: z->{} o->{} e->{} flags={:b}", row[0], row[1], row[2], self.flags[q])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str) -> Vec<CountClass> {
        text.chars()
            .map(|c| match c {
                'o' => CountClass::Odd,
                'e' => CountClass::Even,
                _ => CountClass::Zero,
            })
            .collect()
    }

    #[test]
    fn small_patterns() {
        let d = Dfa::new(&[("a", "o(oo)*"), ("b", "eE*"), ("c", "")]).unwrap();
        assert!(d.matches(&w("ooo"), 0));
        assert!(!d.matches(&w("oo"), 0));
        assert!(d.matches(&w("ezez"), 1));
        assert!(!d.matches(&w("zee"), 1));
        assert!(d.matches(&[], 2));
        assert!(!d.matches(&w("o"), 2));
        assert_eq!(d.language_index("b"), Some(1));
    }

    #[test]
    fn plus_and_errors() {
        let d = Dfa::new(&[("p", "(eo)+")]).unwrap();
        assert!(d.matches(&w("eoeo"), 0));
        assert!(!d.matches(&[], 0));
        assert!(Dfa::new(&[("x", "(o")]).is_err());
        assert!(Dfa::new(&[("x", "q")]).is_err());
    }

    #[test]
    fn dead_state_detection() {
        let d = Dfa::new(&[("x", "oe")]).unwrap();
        let dead = d.dead_states();
        let q = d.run(d.start(), &w("e"));
        assert!(dead[q]);
        assert!(!dead[d.run(d.start(), &w("o"))]);
    }

    #[test]
    fn symbols() {
        assert_eq!(word_string(&word_of(&[0, 1, 2, 3, 4])), "zoeoe");
        assert_eq!(CountClass::Even.least(), 2);
    }
}
