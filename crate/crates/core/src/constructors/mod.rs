//! Graceful labelings for the tree classes, built by replaying transfer scripts
//! from a star.

pub mod endings;
pub mod odd;
pub mod planner;
pub mod tuples;

use serde::Serialize;
use thiserror::Error;

use crate::attainable::{decompose, realize, DecomposeError, RealizeError};
use crate::automaton::CountClass;
use crate::classify::{classify_tree, ClassId, ClassReport};
use crate::transfer::{make_context, pattern_label, replay_script, star_state, Pattern, ReplayError, TransferScript};
use crate::tree::{rooted_isomorphism, verify_graceful, Labeling, RootedTree, VertexId};

use planner::{apply_order, plan_level_order, PlanError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("tree is not in class {class}: {reason}")]
    NotInClass { class: ClassId, reason: String },
    #[error("tree is in none of the constructible classes")]
    NoClass(Box<ClassReport>),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("walk schedule failed: {0}")]
    Schedule(String),
    #[error("the replayed tree is not isomorphic to the input")]
    Mismatch,
    #[error("input labeling is not graceful")]
    NotGraceful,
    #[error("root has label {0}, expected 0")]
    RootLabel(u32),
}

/// Everything needed to audit a construction.
#[derive(Clone, Debug, Serialize)]
pub struct ConstructionTrace {
    pub class: ClassId,
    /// The star `K_{1,N}` the script starts from.
    pub star: usize,
    /// Planned child counts per level, in breadth-first order.
    pub levels: Vec<Vec<usize>>,
    /// Block decomposition of the counts, when one was used.
    pub plan: Option<String>,
    #[serde(skip)]
    pub script: TransferScript,
    #[serde(skip)]
    pub built: RootedTree,
    /// Label of each input vertex.
    pub mapping: Vec<u32>,
    #[serde(skip)]
    pub labeling: Labeling,
}

impl ConstructionTrace {
    /// The script with a `#!` header recording the class, star and vertex map.
    pub fn to_trace_text(&self) -> String {
        let mut out = format!("#! class {}\n#! star {}\n", self.class, self.star);
        for (v, l) in self.mapping.iter().enumerate() {
            out.push_str(&format!("#! map {v} {l}\n"));
        }
        out.push_str(&self.script.to_string());
        out
    }
}

/// Star size named in a trace header, if any.
pub fn trace_star(text: &str) -> Option<usize> {
    text.lines().find_map(|l| l.strip_prefix("#! star ")).and_then(|s| s.trim().parse().ok())
}

fn require(tree: &RootedTree, class: ClassId) -> Result<ClassReport, ConstructError> {
    let report = classify_tree(tree);
    if report.contains(class) {
        return Ok(report);
    }
    let reason = report.excluded.get(&class).cloned().unwrap_or_default();
    Err(ConstructError::NotInClass { class, reason })
}

fn finish(
    tree: &RootedTree,
    class: ClassId,
    levels: Vec<Vec<usize>>,
    plan: Option<String>,
    script: TransferScript,
    built: RootedTree,
) -> Result<ConstructionTrace, ConstructError> {
    let map = rooted_isomorphism(tree, &built).ok_or(ConstructError::Mismatch)?;
    let mapping: Vec<u32> = map.iter().map(|&b| b as u32).collect();
    let labeling = Labeling::from_labels(mapping.clone());
    if !verify_graceful(tree, &labeling).graceful {
        return Err(ConstructError::Mismatch);
    }
    Ok(ConstructionTrace { class, star: tree.len() - 1, levels, plan, script, built, mapping, labeling })
}

/// Child counts of all vertices above the last level, level by level.
fn level_counts(tree: &RootedTree) -> Vec<Vec<usize>> {
    let depth = tree.depths();
    let height = tree.height();
    let mut levels = vec![Vec::new(); height];
    for v in tree.bfs_order() {
        if depth[v] < height {
            levels[depth[v]].push(tree.children(v).len());
        }
    }
    levels
}

/// The shared pipeline: order children so the counts are attainable, decompose
/// them into blocks, and walk the star's leaves into place.
fn label_attainable(tree: &RootedTree, class: ClassId) -> Result<ConstructionTrace, ConstructError> {
    let r = tree.height();
    let dfa = tuples::attain_dfa();
    let depth = tree.depths();
    let prefix = tree.vertices().filter(|&v| depth[v] + 1 < r).count();
    let start = dfa.run(dfa.start(), &vec![CountClass::Odd; prefix]);
    let plan = plan_level_order(tree, dfa, 0, start, r - 1)?;
    let ordered = apply_order(tree, &plan);
    let levels = level_counts(&ordered);
    let counts: Vec<usize> = levels.concat();
    let blocks = decompose(tuples::trim_zeros(&counts))?;

    let n = tree.len() - 1;
    let state = star_state(n).map_err(|e| ConstructError::Schedule(e.to_string()))?;
    let (a, b) = (0i64, n as i64 + 1);
    let vlist: Vec<u32> = (1..=n + 1).map(|i| pattern_label(Pattern::Rising, a, b, i) as u32).collect();
    let ctx = make_context(&state, vlist, a, b, 1, n as i64).map_err(|e| ConstructError::Schedule(e.to_string()))?;
    let script = realize(&ctx, tuples::trim_zeros(&counts), &blocks)?;
    let built = replay_script(&state, &script)?.tree().clone();
    finish(tree, class, levels, Some(blocks.to_string()), script, built)
}

/// Complete diameter-6 trees with odd root and middle degrees.
pub fn label_thm5a(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    require(tree, ClassId::A)?;
    label_attainable(tree, ClassId::A)
}

/// Diameter-6 trees with lone leaves at depth 2 beside an even sibling.
pub fn label_thm5b(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    require(tree, ClassId::B)?;
    label_attainable(tree, ClassId::B)
}

/// Complete trees of any depth with few enough even counts above the leaves.
pub fn label_thm5c(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    require(tree, ClassId::C)?;
    label_attainable(tree, ClassId::C)
}

pub fn label_thm5d(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    require(tree, ClassId::D)?;
    label_attainable(tree, ClassId::D)
}

/// Diameter-6 trees whose internal vertices all have odd degree below the root.
pub fn label_thm5e(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    require(tree, ClassId::E)?;
    let p = odd::plan_odd(tree)?;
    finish(tree, ClassId::E, p.levels, None, p.script, p.built)
}

/// Labels the tree with the first class that applies, in the order E, A, B, C, D.
pub fn dispatch_label(tree: &RootedTree) -> Result<ConstructionTrace, ConstructError> {
    let report = classify_tree(tree);
    let mut last = None;
    for class in [ClassId::E, ClassId::A, ClassId::B, ClassId::C, ClassId::D] {
        if !report.contains(class) {
            continue;
        }
        let attempt = match class {
            ClassId::A => label_thm5a(tree),
            ClassId::B => label_thm5b(tree),
            ClassId::C => label_thm5c(tree),
            ClassId::D => label_thm5d(tree),
            ClassId::E => label_thm5e(tree),
        };
        match attempt {
            Ok(t) => return Ok(t),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or(ConstructError::NoClass(Box::new(report))))
}

/// Adds `k` leaves to the root of a tree whose root is labeled 0, labeling
/// them `n..n+k-1`. Gracefulness is preserved since the new edges get the new
/// differences.
pub fn attach_leaves_at_root(
    tree: &RootedTree,
    labeling: &Labeling,
    k: usize,
) -> Result<(RootedTree, Labeling), ConstructError> {
    if !verify_graceful(tree, labeling).graceful {
        return Err(ConstructError::NotGraceful);
    }
    let root_label = labeling.get(tree.root()).ok_or(ConstructError::NotGraceful)?;
    if root_label != 0 {
        return Err(ConstructError::RootLabel(root_label));
    }
    let n = tree.len();
    let mut t = tree.clone();
    let mut labels: Vec<u32> = tree.vertices().map(|v| labeling.get(v).expect("graceful")).collect();
    for i in 0..k {
        let v: VertexId = t.push_child(t.root());
        debug_assert_eq!(v, labels.len());
        labels.push((n + i) as u32);
    }
    Ok((t, Labeling::from_labels(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{expr_to_tree, parse_tree_expr};

    fn tree(text: &str) -> RootedTree {
        expr_to_tree(&parse_tree_expr(text).unwrap())
    }

    fn check(t: &RootedTree, trace: &ConstructionTrace) {
        assert!(verify_graceful(t, &trace.labeling).graceful);
        let again = replay_script(&star_state(trace.star).unwrap(), &trace.script).unwrap();
        assert!(rooted_isomorphism(t, again.tree()).is_some());
    }

    #[test]
    fn attainable_classes() {
        for text in ["((2,1,1),(1),(1))", "((1),(1),(1))", "((2,2,1),(3),(1,1,1))", "(2,1,3)", "((2,2,2),(1),(3))"] {
            let t = tree(text);
            let trace = dispatch_label(&t).unwrap_or_else(|e| panic!("{text}: {e}"));
            check(&t, &trace);
        }
    }

    #[test]
    fn odd_class() {
        for text in ["(1,(1),(1))", "((1,1,1),1,(3))", "((1),(1),(1))", "((1,1,1),(3,1,1),2,4,1)", "((3,(1),(1)))"] {
            let t = tree(text);
            if !classify_tree(&t).contains(ClassId::E) {
                continue;
            }
            let trace = label_thm5e(&t).unwrap_or_else(|e| panic!("{text}: {e}"));
            check(&t, &trace);
        }
    }

    #[test]
    fn rejects_wrong_class() {
        let t = tree("((2,1),(1),(1))");
        assert!(matches!(label_thm5a(&t), Err(ConstructError::NotInClass { .. })));
    }

    #[test]
    fn attaching_root_leaves() {
        let t = tree("((1),(1),(1))");
        let trace = dispatch_label(&t).unwrap();
        let (t2, l2) = attach_leaves_at_root(&t, &trace.labeling, 3).unwrap();
        if trace.labeling.get(t.root()) == Some(0) {
            assert!(verify_graceful(&t2, &l2).graceful);
        }
    }
}
