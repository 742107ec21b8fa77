//! Membership tests for the five tree classes the constructors handle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::tree::{RootedTree, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClassId {
    A,
    B,
    C,
    D,
    E,
}

impl ClassId {
    pub const ALL: [ClassId; 5] = [ClassId::A, ClassId::B, ClassId::C, ClassId::D, ClassId::E];

    pub fn describe(self) -> &'static str {
        match self {
            ClassId::A => "diameter-6 complete",
            ClassId::B => "diameter-6, unpaired level-2 leaves with an even sibling",
            ClassId::C => "diameter-2r complete, even count at level r-1 not 3 mod 4",
            ClassId::D => "diameter-2r, even count not 3 mod 4, unpaired level-(r-1) leaves with an even sibling",
            ClassId::E => "diameter-6, every internal vertex has an odd number of children",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            ClassId::A => 'a',
            ClassId::B => 'b',
            ClassId::C => 'c',
            ClassId::D => 'd',
            ClassId::E => 'e',
        };
        write!(f, "{c}")
    }
}

impl std::str::FromStr for ClassId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(ClassId::A),
            "b" => Ok(ClassId::B),
            "c" => Ok(ClassId::C),
            "d" => Ok(ClassId::D),
            "e" => Ok(ClassId::E),
            other => Err(format!("unknown class '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub classes: BTreeSet<ClassId>,
    pub diameter: usize,
    /// Height of the tree from its root; the `r` in diameter `2r`.
    pub depth: usize,
    /// Vertices at depth `r - 1` with an even number of children (leaves included).
    pub even_at_penultimate: usize,
    /// Why each class was rejected.
    pub excluded: BTreeMap<ClassId, String>,
}

impl ClassReport {
    pub fn contains(&self, class: ClassId) -> bool {
        self.classes.contains(&class)
    }
}

/// Structural facts shared by every class predicate.
struct Shape {
    depth: Vec<usize>,
    height: usize,
    diameter: usize,
}

fn odd_above_last_two(tree: &RootedTree, s: &Shape) -> Result<(), String> {
    for v in tree.vertices() {
        if s.depth[v] + 2 <= s.height && tree.children(v).len() % 2 == 0 {
            return Err(format!(
                "vertex {v} at depth {} has {} children, expected odd above the last two levels",
                s.depth[v],
                tree.children(v).len()
            ));
        }
    }
    Ok(())
}

fn complete(tree: &RootedTree, s: &Shape) -> Result<(), String> {
    match tree.vertices().find(|&v| tree.is_leaf(v) && s.depth[v] != s.height) {
        Some(v) => Err(format!("leaf {v} at depth {} is not in the last level", s.depth[v])),
        None => Ok(()),
    }
}

/// No two leaves at depth `r-1` are siblings, and each has a sibling with an even child count.
fn sibling_conditions(tree: &RootedTree, s: &Shape) -> Result<(), String> {
    let level = s.height - 1;
    for v in tree.vertices() {
        if s.depth[v] + 1 != level {
            continue;
        }
        let kids = tree.children(v);
        let leaves: Vec<VertexId> = kids.iter().copied().filter(|&c| tree.is_leaf(c)).collect();
        if leaves.len() > 1 {
            return Err(format!("leaves {} and {} at depth {level} are siblings", leaves[0], leaves[1]));
        }
        if let Some(&l) = leaves.first() {
            let has_even = kids.iter().any(|&c| c != l && tree.children(c).len() % 2 == 0);
            if !has_even {
                return Err(format!("leaf {l} at depth {level} has no sibling with an even number of children"));
            }
        }
    }
    Ok(())
}

fn all_internal_odd(tree: &RootedTree) -> Result<(), String> {
    match tree.vertices().find(|&v| !tree.is_leaf(v) && tree.children(v).len() % 2 == 0) {
        Some(v) => Err(format!("internal vertex {v} has {} children", tree.children(v).len())),
        None => Ok(()),
    }
}

/// Evaluates every class predicate on `tree` as rooted.
pub fn classify_tree(tree: &RootedTree) -> ClassReport {
    let depth = tree.depths();
    let height = depth.iter().copied().max().unwrap_or(0);
    let diameter = tree.diameter();
    let shape = Shape { depth, height, diameter };

    let even_at_penultimate = if height >= 1 {
        tree.vertices()
            .filter(|&v| shape.depth[v] + 1 == height && tree.children(v).len() % 2 == 0)
            .count()
    } else {
        0
    };

    let centered = if shape.diameter % 2 == 1 {
        Err(format!("diameter {} is odd, the tree has an edge center", shape.diameter))
    } else if shape.diameter != 2 * shape.height {
        Err(format!("root is not a center: diameter {} but height {}", shape.diameter, shape.height))
    } else {
        Ok(())
    };
    let common = centered.and_then(|_| odd_above_last_two(tree, &shape));
    let diam6 = || {
        if shape.diameter == 6 {
            Ok(())
        } else {
            Err(format!("diameter {} != 6", shape.diameter))
        }
    };
    let deep = || {
        if shape.height >= 2 {
            Ok(())
        } else {
            Err(format!("diameter {} is not 2r with r >= 2", shape.diameter))
        }
    };
    let mod4 = || {
        if even_at_penultimate % 4 == 3 {
            Err(format!(
                "{even_at_penultimate} vertices at depth r-1 have an even number of children (3 mod 4)"
            ))
        } else {
            Ok(())
        }
    };

    let mut classes = BTreeSet::new();
    let mut excluded = BTreeMap::new();
    for class in ClassId::ALL {
        let verdict = common.clone().and_then(|_| match class {
            ClassId::A => diam6().and_then(|_| complete(tree, &shape)),
            ClassId::B => diam6().and_then(|_| sibling_conditions(tree, &shape)),
            ClassId::C => deep().and_then(|_| complete(tree, &shape)).and_then(|_| mod4()),
            ClassId::D => deep().and_then(|_| mod4()).and_then(|_| sibling_conditions(tree, &shape)),
            ClassId::E => diam6().and_then(|_| all_internal_odd(tree)),
        });
        match verdict {
            Ok(()) => {
                classes.insert(class);
            }
            Err(why) => {
                excluded.insert(class, why);
            }
        }
    }
    ClassReport { classes, diameter: shape.diameter, depth: shape.height, even_at_penultimate, excluded }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tree has diameter {diameter}, its center is an edge")]
pub struct EdgeCenter {
    pub diameter: usize,
}

/// Reroots the tree at its central vertex. Fails for odd diameter.
pub fn recenter(tree: &RootedTree) -> Result<RootedTree, EdgeCenter> {
    match tree.centers().as_slice() {
        [c] => Ok(tree.rerooted(*c)),
        _ => Err(EdgeCenter { diameter: tree.diameter() }),
    }
}
