//! Endings of count sequences and the ending pairs a subtree can realize.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{CountClass, Dfa, StateId};
use crate::tree::TreeExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Ending {
    None,
    E1,
    E2,
    E2P,
    E3,
}

impl Ending {
    pub const ALL: [Ending; 5] = [Ending::None, Ending::E1, Ending::E2, Ending::E2P, Ending::E3];

    /// Attainable endings, the ones a whole tree may finish with.
    pub fn is_attainable(self) -> bool {
        matches!(self, Ending::None | Ending::E1 | Ending::E2)
    }
}

impl fmt::Display for Ending {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ending::None => "∅",
            Ending::E1 => "E1",
            Ending::E2 => "E2",
            Ending::E2P => "E2'",
            Ending::E3 => "E3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EndingVariant {
    /// Complete trees, no zeros.
    Strict,
    /// Second and trailing `e` may be zero.
    Relaxed,
}

const N_STAR: &str = "(o|eoooe|eoeeoe|eE(oo)*Ee)*";

/// Regular expression of each ending, in `Ending::ALL` order.
pub fn ending_patterns(variant: EndingVariant) -> [String; 5] {
    let (second, last) = match variant {
        EndingVariant::Strict => ("e", "e"),
        EndingVariant::Relaxed => ("E", "E"),
    };
    [
        N_STAR.to_string(),
        format!("{N_STAR}e"),
        format!("{N_STAR}e{second}(oo)*"),
        format!("{N_STAR}e{second}o(oo)*"),
        format!("{N_STAR}e{second}(oo)*{last}"),
    ]
}

pub fn ending_dfa(variant: EndingVariant) -> &'static Dfa {
    use std::sync::OnceLock;
    static STRICT: OnceLock<Dfa> = OnceLock::new();
    static RELAXED: OnceLock<Dfa> = OnceLock::new();
    let cell = match variant {
        EndingVariant::Strict => &STRICT,
        EndingVariant::Relaxed => &RELAXED,
    };
    cell.get_or_init(|| {
        let pats = ending_patterns(variant);
        let named: Vec<(&str, &str)> = ["none", "e1", "e2", "e2p", "e3"].iter().copied().zip(pats.iter().map(String::as_str)).collect();
        Dfa::new(&named).expect("ending patterns compile")
    })
}

/// Endings of a concrete word.
pub fn endings_of(word: &[CountClass], variant: EndingVariant) -> BTreeSet<Ending> {
    let dfa = ending_dfa(variant);
    let q = dfa.run(dfa.start(), word);
    Ending::ALL.iter().enumerate().filter(|(i, _)| dfa.accepts(q, *i)).map(|(_, e)| *e).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndingError {
    #[error("a subtree has {0} children; every level needs an odd number")]
    EvenArity(usize),
    #[error("zero entries need the relaxed variant")]
    Zero,
    #[error("leaf counts appear at different depths")]
    Ragged,
    #[error("a subtree has {0} children, too many to arrange exhaustively")]
    TooWide(usize),
}

/// Ending pairs with a witness arrangement for each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndingPairSet {
    pub pairs: BTreeSet<(Ending, Ending)>,
    /// A level word realizing each pair.
    pub witnesses: Vec<((Ending, Ending), Vec<usize>)>,
}

impl EndingPairSet {
    pub fn contains(&self, from: Ending, to: Ending) -> bool {
        self.pairs.contains(&(from, to))
    }
}

/// The transition function of one arrangement's word.
type StateMap = Vec<StateId>;

const MAX_ARITY: usize = 20;

fn max_arity(expr: &TreeExpr) -> usize {
    match expr {
        TreeExpr::LeafCount(_) => 0,
        TreeExpr::Node(kids) => kids.iter().map(max_arity).max().unwrap_or(0).max(kids.len()),
    }
}

fn check_shape(expr: &TreeExpr, variant: EndingVariant) -> Result<usize, EndingError> {
    match expr {
        TreeExpr::LeafCount(0) if variant == EndingVariant::Strict => Err(EndingError::Zero),
        TreeExpr::LeafCount(_) => Ok(0),
        TreeExpr::Node(kids) => {
            if kids.len() % 2 == 0 {
                return Err(EndingError::EvenArity(kids.len()));
            }
            let depths: BTreeSet<usize> = kids.iter().map(|k| check_shape(k, variant)).collect::<Result<_, _>>()?;
            if depths.len() > 1 {
                return Err(EndingError::Ragged);
            }
            Ok(depths.into_iter().next().unwrap_or(0) + 1)
        }
    }
}

/// Every state map reachable by some arrangement of `expr`, with a witness word.
fn arrangements(expr: &TreeExpr, dfa: &Dfa, memo: &mut HashMap<String, Vec<(StateMap, Vec<usize>)>>) -> Vec<(StateMap, Vec<usize>)> {
    let key = expr.to_string();
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let out = match expr {
        TreeExpr::LeafCount(n) => {
            let sym = CountClass::of(*n as usize);
            vec![((0..dfa.len()).map(|q| dfa.step(q, sym)).collect(), vec![*n as usize])]
        }
        TreeExpr::Node(kids) => {
            let options: Vec<Vec<(StateMap, Vec<usize>)>> = kids.iter().map(|k| arrangements(k, dfa, memo)).collect();
            // subsets of placed children → maps so far
            let k = kids.len();
            let identity: StateMap = (0..dfa.len()).collect();
            let mut layer: HashMap<u32, HashMap<StateMap, Vec<usize>>> = HashMap::new();
            layer.entry(0).or_default().insert(identity, Vec::new());
            for size in 0..k {
                let masks: Vec<u32> = layer.keys().copied().filter(|m| m.count_ones() as usize == size).collect();
                for mask in masks {
                    let maps = layer[&mask].clone();
                    for child in 0..k {
                        if mask >> child & 1 == 1 {
                            continue;
                        }
                        // identical siblings only need one of their orders
                        if (0..child).any(|c| mask >> c & 1 == 0 && kids[c] == kids[child]) {
                            continue;
                        }
                        let next = layer.entry(mask | 1 << child).or_default();
                        for (f, w) in &maps {
                            for (g, wg) in &options[child] {
                                let h: StateMap = f.iter().map(|&q| g[q]).collect();
                                next.entry(h).or_insert_with(|| {
                                    let mut word = w.clone();
                                    word.extend_from_slice(wg);
                                    word
                                });
                            }
                        }
                    }
                }
            }
            let full = (1u32 << k) - 1;
            layer.remove(&full).unwrap_or_default().into_iter().collect()
        }
    };
    memo.insert(key, out.clone());
    out
}

/// The ending pairs `(E, E')` such that some arrangement of `expr`, appended to
/// any sequence with ending `E`, yields a sequence with ending `E'`.
pub fn associate_endings(expr: &TreeExpr, variant: EndingVariant) -> Result<EndingPairSet, EndingError> {
    check_shape(expr, variant)?;
    if max_arity(expr) > MAX_ARITY {
        return Err(EndingError::TooWide(max_arity(expr)));
    }
    let dfa = ending_dfa(variant);
    let mut memo = HashMap::new();
    let maps = arrangements(expr, dfa, &mut memo);
    let mut pairs = BTreeSet::new();
    let mut witnesses = Vec::new();
    for (i, &from) in Ending::ALL.iter().enumerate() {
        let sources: Vec<StateId> = (0..dfa.len()).filter(|&q| dfa.accepts(q, i)).collect();
        for (j, &to) in Ending::ALL.iter().enumerate() {
            if let Some((_, w)) = maps.iter().find(|(f, _)| sources.iter().all(|&q| dfa.accepts(f[q], j))) {
                pairs.insert((from, to));
                witnesses.push(((from, to), w.clone()));
            }
        }
    }
    Ok(EndingPairSet { pairs, witnesses })
}

/// Pairs claimed for a subtree by the number of even entries mod 4.
pub fn claimed_pairs(evens: usize) -> Vec<(Ending, Ending)> {
    use Ending::*;
    match evens % 4 {
        0 => vec![(None, None), (E2, E2P), (E2P, E2)],
        1 => vec![(None, E1), (E1, E2), (E2, E3), (E3, None)],
        2 => vec![(None, E2), (None, E2P), (E2, None), (E2P, None)],
        _ => vec![(None, E3), (E1, None), (E2, E1), (E3, E2)],
    }
}

/// Number of even leaf counts in the expression.
pub fn even_entries(expr: &TreeExpr) -> usize {
    match expr {
        TreeExpr::LeafCount(n) => usize::from(n % 2 == 0),
        TreeExpr::Node(kids) => kids.iter().map(even_entries).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree_expr;
    use Ending::*;

    fn pairs(text: &str, v: EndingVariant) -> BTreeSet<(Ending, Ending)> {
        associate_endings(&parse_tree_expr(text).unwrap(), v).unwrap().pairs
    }

    #[test]
    fn single_counts() {
        let p = pairs("3", EndingVariant::Strict);
        for c in [(None, None), (E2, E2P), (E2P, E2)] {
            assert!(p.contains(&c));
        }
        let p = pairs("2", EndingVariant::Strict);
        for c in [(None, E1), (E1, E2), (E2, E3), (E3, None)] {
            assert!(p.contains(&c), "{c:?}");
        }
    }

    #[test]
    fn two_evens() {
        let p = pairs("(2,2,3)", EndingVariant::Strict);
        for c in claimed_pairs(2) {
            assert!(p.contains(&c), "{c:?}");
        }
    }

    #[test]
    fn word_endings() {
        use crate::automaton::word_of;
        assert!(endings_of(&word_of(&[1, 3]), EndingVariant::Strict).contains(&None));
        assert!(endings_of(&word_of(&[1, 2]), EndingVariant::Strict).contains(&E1));
        assert!(endings_of(&word_of(&[2, 2, 1, 1]), EndingVariant::Strict).contains(&E2));
        assert!(endings_of(&word_of(&[2, 2, 1]), EndingVariant::Strict).contains(&E2P));
        assert!(endings_of(&word_of(&[2, 2, 2]), EndingVariant::Strict).contains(&E3));
        assert!(!endings_of(&word_of(&[2, 0, 1]), EndingVariant::Strict).contains(&E2P));
        assert!(endings_of(&word_of(&[2, 0, 1]), EndingVariant::Relaxed).contains(&E2P));
    }

    #[test]
    fn shape_errors() {
        let e = |t: &str, v| associate_endings(&parse_tree_expr(t).unwrap(), v).unwrap_err();
        assert_eq!(e("(2,2)", EndingVariant::Strict), EndingError::EvenArity(2));
        assert_eq!(e("(2,0,1)", EndingVariant::Strict), EndingError::Zero);
        assert!(associate_endings(&parse_tree_expr("(2,2,0)").unwrap(), EndingVariant::Relaxed).is_ok());
        assert_eq!(e("((1),1,1)", EndingVariant::Strict), EndingError::Ragged);
    }
}
