//! Grandchild-count tuples of diameter-6 trees.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::planner::{apply_order, plan_level_order, PlanError};
use crate::attainable::ATTAIN;
use crate::automaton::Dfa;
use crate::tree::{RootedTree, VertexId};

/// Which depth-3 theorem the tuple is read under: complete trees, or trees
/// whose tuples may contain a single zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TupleVariant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TupleRep {
    ZeroOne,
    OneThree,
    TwoThree,
    ThreeFive,
    ThreeThree,
    OneOne,
}

impl fmt::Display for TupleRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TupleRep::ZeroOne => "0/1",
            TupleRep::OneThree => "1/3",
            TupleRep::TwoThree => "2/3",
            TupleRep::ThreeFive => "3/5",
            TupleRep::ThreeThree => "3/3",
            TupleRep::OneOne => "1/1",
        })
    }
}

impl TupleRep {
    pub fn parse(text: &str) -> Option<TupleRep> {
        Some(match text.trim() {
            "0/1" => TupleRep::ZeroOne,
            "1/3" => TupleRep::OneThree,
            "2/3" => TupleRep::TwoThree,
            "3/5" => TupleRep::ThreeFive,
            "3/3" => TupleRep::ThreeThree,
            "1/1" => TupleRep::OneOne,
            _ => return None,
        })
    }

    /// `(a, b)` of the representative.
    pub fn shape(self) -> (usize, usize) {
        match self {
            TupleRep::ZeroOne => (0, 1),
            TupleRep::OneThree => (1, 3),
            TupleRep::TwoThree => (2, 3),
            TupleRep::ThreeFive => (3, 5),
            TupleRep::ThreeThree => (3, 3),
            TupleRep::OneOne => (1, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TupleClass {
    /// Number of even entries, zeros included.
    pub a: usize,
    pub b: usize,
    pub rep: TupleRep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleError {
    #[error("empty tuple")]
    Empty,
    #[error("tuple has even length {0}")]
    EvenLength(usize),
    #[error("zero entries are not allowed in complete trees")]
    Zero,
    #[error("tuple has {0} zero entries, at most one is allowed")]
    ManyZeros(usize),
    #[error("a zero entry needs another even entry beside it")]
    LoneZero,
}

pub fn classify_tuple(t: &[usize], variant: TupleVariant) -> Result<TupleClass, TupleError> {
    let b = t.len();
    if b == 0 {
        return Err(TupleError::Empty);
    }
    if b % 2 == 0 {
        return Err(TupleError::EvenLength(b));
    }
    let a = t.iter().filter(|&&x| x % 2 == 0).count();
    let zeros = t.iter().filter(|&&x| x == 0).count();
    let rep = match variant {
        TupleVariant::A => {
            if zeros > 0 {
                return Err(TupleError::Zero);
            }
            if a == b {
                TupleRep::OneOne
            } else {
                [TupleRep::ZeroOne, TupleRep::OneThree, TupleRep::TwoThree, TupleRep::ThreeFive][a % 4]
            }
        }
        TupleVariant::B => {
            if zeros > 1 {
                return Err(TupleError::ManyZeros(zeros));
            }
            if zeros == 1 && a < 2 {
                return Err(TupleError::LoneZero);
            }
            match a % 4 {
                0 => TupleRep::ZeroOne,
                1 if a < b => TupleRep::OneThree,
                1 => TupleRep::OneOne,
                2 => TupleRep::TwoThree,
                _ => TupleRep::ThreeThree,
            }
        }
    };
    Ok(TupleClass { a, b, rep })
}

/// Kind of a row in the published tuple tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TableKind {
    Minimal,
    Irreducible,
    /// Lists standing in for the `(2/3, 1/1)` family.
    Special,
}

#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub variant: TupleVariant,
    pub kind: TableKind,
    pub classes: &'static str,
    /// The arrangement as printed, with `...` marking insertion points.
    pub arrangement: &'static str,
}

const fn row(variant: TupleVariant, kind: TableKind, classes: &'static str, arrangement: &'static str) -> TableRow {
    TableRow { variant, kind, classes, arrangement }
}

use TableKind::{Irreducible, Minimal, Special};
use TupleVariant::{A as VA, B as VB};

pub const TUPLE_TABLES: &[TableRow] = &[
    row(VA, Minimal, "0/1", "((o))"),
    row(VA, Minimal, "1/3,1/3", "((e,o,o),(o,e,o))"),
    row(VA, Minimal, "1/3,3/5", "((o,o,e),(e,e,e,o,o))"),
    row(VA, Minimal, "2/3,2/3", "((o,e,e),(e,e,o))"),
    row(VA, Minimal, "2/3,3/5,3/5", "((o,e,e),(e,e,o,o,e),(e,e,e,o,o))"),
    row(VA, Minimal, "3/5,3/5,3/5,3/5", "((o,o,e,e,e),(e,o,o,e,e),(e,e,o,o,e),(e,e,e,o,o))"),
    row(VA, Irreducible, "", ""),
    row(VA, Irreducible, "1/3", "((o,o,e))"),
    row(VA, Irreducible, "2/3", "((o,e,e))"),
    row(VA, Irreducible, "3/5", "((o,o,e,e,e))"),
    row(VA, Irreducible, "1/3,2/3", "((e,o,o),(o,e,e))"),
    row(VA, Irreducible, "2/3,3/5", "((o,e,e),(e,e,o,o,e))"),
    row(VA, Irreducible, "3/5,3/5", "((o,o,e,e,e),(e,o,o,e,e))"),
    row(VA, Irreducible, "3/5,3/5,3/5", "((o,o,e,e,e),(e,o,o,e,e),(e,e,o,o,e))"),
    row(VB, Minimal, "0/1", "((...,o))"),
    row(VB, Minimal, "1/3,1/3", "((...,e,o,o),(o,e,...,o))"),
    row(VB, Minimal, "1/3,3/3", "((...,o,o,e),(e/0,e,e,...))"),
    row(VB, Minimal, "2/3,2/3", "((...,o,e,e/0),(e/0,e,...,o))"),
    row(VB, Minimal, "3/3,1/1", "((...,e,e/0,e),(e,...))"),
    row(VB, Minimal, "1/3,2/3,1/1", "((...,o,o,e),(...,e),(e/0,e,...,o))"),
    row(VB, Minimal, "2/3,3/3,3/3", "((...,o,e,e/0),(e/0,e,...,e),(e/0,e,e,...))"),
    row(VB, Minimal, "2/3,1/1,1/1", "((...,o,e,e/0),(...,e),(...,e))"),
    row(VB, Minimal, "3/3,3/3,3/3,3/3", "((...,e,e/0,e),(e,...,e,e/0),(e/0,e,...,e),(e/0,e,e,...))"),
    row(VB, Minimal, "1/3,1/1,1/1,1/1", "((...,o,o,e),(...,e),(...,e),(...,e))"),
    row(VB, Minimal, "1/1,1/1,1/1,1/1", "((...,e),(...,e),(...,e),(...,e))"),
    row(VB, Irreducible, "", "((...))"),
    row(VB, Irreducible, "1/3", "((...,o,o,e))"),
    row(VB, Irreducible, "2/3", "((...,o,e,e/0))"),
    row(VB, Irreducible, "3/3", "((...,e,e,e/0))"),
    row(VB, Irreducible, "1/1", "((...,e))"),
    row(VB, Irreducible, "1/3,2/3", "((...,e,o,o),(o,e,...,e/0))"),
    row(VB, Irreducible, "1/3,1/1", "((...,o,o,e),(...,e))"),
    row(VB, Irreducible, "2/3,3/3", "((...,o,e,e/0),(e/0,e,...,e))"),
    row(VB, Irreducible, "2/3,1/1", "((e),(e/0,e,o))"),
    row(VB, Irreducible, "3/3,3/3", "((...,e,e/0,e),(e,...,e,e/0))"),
    row(VB, Irreducible, "1/1,1/1", "((...,e),(...,e))"),
    row(VB, Irreducible, "1/3,1/1,1/1", "((...,o,o,e),(...,e),(...,e))"),
    row(VB, Irreducible, "3/3,3/3,3/3", "((...,e,e/0,e),(e,...,e,e/0),(e/0,e,...,e))"),
    row(VB, Irreducible, "1/1,1/1,1/1", "((...,e),(...,e),(...,e))"),
    row(VB, Special, "2/3,5/5", "((...,o,e,e/0),(e/0,e,...,e,e,e))"),
    row(VB, Special, "2/5,1/1", "((...,e),(o,o,o,e,...,e/0))"),
    row(VB, Special, "6/7,1/1", "((...,o,e,e/0,e,e,e,e),(...,e))"),
];

/// Symbol of one slot of a table arrangement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Odd,
    Even,
    EvenOrZero,
}

impl TableRow {
    /// The tuples of the arrangement, insertion points dropped.
    pub fn groups(&self) -> Vec<Vec<Slot>> {
        let inner = self.arrangement.trim();
        let inner = inner.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or("");
        let mut groups = Vec::new();
        for part in inner.split(')') {
            let part = part.trim_start_matches([',', '(']);
            let slots: Vec<Slot> = part
                .split(',')
                .filter_map(|t| match t.trim() {
                    "o" => Some(Slot::Odd),
                    "e" => Some(Slot::Even),
                    "e/0" => Some(Slot::EvenOrZero),
                    _ => None,
                })
                .collect();
            if !slots.is_empty() {
                groups.push(slots);
            }
        }
        groups
    }

    pub fn reps(&self) -> Vec<TupleRep> {
        if self.classes.is_empty() {
            return Vec::new();
        }
        self.classes.split(',').map(|c| TupleRep::parse(c).unwrap_or(TupleRep::ZeroOne)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Depth3Error {
    #[error(transparent)]
    Tuple(#[from] TupleError),
    #[error("no arrangement of the tuples is attainable: {0}")]
    Plan(#[from] PlanError),
}

/// Tree with a root, one child per tuple, and the tuple's counts as leaf children below.
pub fn tuples_to_tree(tuples: &[Vec<usize>]) -> RootedTree {
    let mut parents: Vec<Option<VertexId>> = vec![None];
    for t in tuples {
        let mid = parents.len();
        parents.push(Some(0));
        for &k in t {
            let g = parents.len();
            parents.push(Some(mid));
            parents.extend(std::iter::repeat(Some(g)).take(k));
        }
    }
    RootedTree::from_parents(&parents).expect("parent list is a tree")
}

pub(crate) fn attain_dfa() -> &'static Dfa {
    static DFA: std::sync::OnceLock<Dfa> = std::sync::OnceLock::new();
    // unvisited vertices at the end of the list keep no leaves
    DFA.get_or_init(|| Dfa::new(&[("attain", &format!("({ATTAIN})z*"))]).expect("language compiles"))
}

/// The counts without their trailing zeros.
pub fn trim_zeros(counts: &[usize]) -> &[usize] {
    let end = counts.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
    &counts[..end]
}

/// Permutes the tuples and their entries so the flattened counts are attainable.
pub fn plan_depth3(tuples: &[Vec<usize>], variant: TupleVariant) -> Result<(Vec<Vec<usize>>, Vec<usize>), Depth3Error> {
    for t in tuples {
        classify_tuple(t, variant)?;
    }
    let tree = tuples_to_tree(tuples);
    let dfa = attain_dfa();
    let plan = plan_level_order(&tree, dfa, 0, dfa.start(), 2)?;
    let ordered = apply_order(&tree, &plan);
    let permuted: Vec<Vec<usize>> = ordered
        .children(ordered.root())
        .iter()
        .map(|&m| ordered.children(m).iter().map(|&g| ordered.children(g).len()).collect())
        .collect();
    let counts = permuted.concat();
    Ok((permuted, counts))
}
