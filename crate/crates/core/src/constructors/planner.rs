//! Chooses child orders so that the child counts along one level, read in
//! breadth-first order, spell a word of a given regular language.

use std::collections::HashMap;

use thiserror::Error;

use crate::automaton::{CountClass, Dfa, StateId};
use crate::tree::{subtree_codes, RootedTree, VertexId};

type Mask = u64;

/// For each entry state, the set of states a subtree can lead to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Behavior(Vec<Mask>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("automaton has {0} states, at most 64 are supported")]
    TooManyStates(usize),
    #[error("vertex {vertex} has {combos} child arrangements to track")]
    TooWide { vertex: VertexId, combos: usize },
    #[error("no child order puts the level-{level} counts in the language")]
    NoOrder { level: usize },
}

const MAX_COMBOS: usize = 1 << 22;

fn bits(mask: Mask) -> impl Iterator<Item = StateId> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

struct Groups {
    behaviors: Vec<Behavior>,
    members: Vec<Vec<VertexId>>,
    stride: Vec<usize>,
    combos: usize,
}

impl Groups {
    fn new(children: &[VertexId], behavior: &[Option<Behavior>]) -> Groups {
        let mut index: HashMap<&Behavior, usize> = HashMap::new();
        let mut behaviors = Vec::new();
        let mut members: Vec<Vec<VertexId>> = Vec::new();
        for &c in children {
            let b = behavior[c].as_ref().expect("children are planned first");
            let g = *index.entry(b).or_insert_with(|| {
                behaviors.push(b.clone());
                members.push(Vec::new());
                behaviors.len() - 1
            });
            members[g].push(c);
        }
        let mut stride = Vec::with_capacity(members.len());
        let mut combos = 1usize;
        for m in &members {
            stride.push(combos);
            combos = combos.saturating_mul(m.len() + 1);
        }
        Groups { behaviors, members, stride, combos }
    }

    fn used(&self, idx: usize, g: usize) -> usize {
        idx / self.stride[g] % (self.members[g].len() + 1)
    }

    /// `reach[idx]`: states reachable from `q_in` after placing the children counted by `idx`.
    fn reach(&self, q_in: StateId) -> Vec<Mask> {
        let mut reach = vec![0 as Mask; self.combos];
        reach[0] = 1 << q_in;
        for idx in 0..self.combos {
            let here = reach[idx];
            if here == 0 {
                continue;
            }
            for g in 0..self.members.len() {
                if self.used(idx, g) < self.members[g].len() {
                    let img = bits(here).fold(0, |acc, q| acc | self.behaviors[g].0[q]);
                    reach[idx + self.stride[g]] |= img;
                }
            }
        }
        reach
    }

    /// A group sequence with intermediate states leading from `q_in` to `q_out`.
    fn route(&self, q_in: StateId, q_out: StateId) -> Vec<(usize, StateId, StateId)> {
        let reach = self.reach(q_in);
        let mut idx = self.combos - 1;
        let mut q = q_out;
        let mut steps = Vec::new();
        while idx != 0 {
            let (g, prev) = (0..self.members.len())
                .filter(|&g| self.used(idx, g) > 0)
                .find_map(|g| {
                    let before = reach[idx - self.stride[g]];
                    bits(before).find(|&p| self.behaviors[g].0[p] >> q & 1 == 1).map(|p| (g, p))
                })
                .expect("reach table is consistent");
            steps.push((g, prev, q));
            idx -= self.stride[g];
            q = prev;
        }
        debug_assert_eq!(q, q_in);
        steps.reverse();
        steps
    }
}

/// Child orders (indexed by vertex) for every vertex above `level`.
#[derive(Clone, Debug)]
pub struct LevelPlan {
    pub order: Vec<Vec<VertexId>>,
    pub end_state: StateId,
}

/// Orders children so that the classes of child counts at depth `level`, read
/// left to right, drive `dfa` from `start` into a state accepting `language`.
pub fn plan_level_order(
    tree: &RootedTree,
    dfa: &Dfa,
    language: usize,
    start: StateId,
    level: usize,
) -> Result<LevelPlan, PlanError> {
    let states = dfa.len();
    if states > 64 {
        return Err(PlanError::TooManyStates(states));
    }
    let depth = tree.depths();
    let codes = subtree_codes(tree);
    let mut memo: HashMap<&str, Behavior> = HashMap::new();
    let mut behavior: Vec<Option<Behavior>> = vec![None; tree.len()];
    let order = tree.bfs_order();
    for &v in order.iter().rev() {
        if depth[v] > level {
            continue;
        }
        if let Some(b) = memo.get(codes[v].as_str()) {
            behavior[v] = Some(b.clone());
            continue;
        }
        let b = if depth[v] == level {
            let sym = CountClass::of(tree.children(v).len());
            Behavior((0..states).map(|q| 1 << dfa.step(q, sym)).collect())
        } else {
            let groups = Groups::new(tree.children(v), &behavior);
            if groups.combos > MAX_COMBOS {
                return Err(PlanError::TooWide { vertex: v, combos: groups.combos });
            }
            Behavior((0..states).map(|q| groups.reach(q)[groups.combos - 1]).collect())
        };
        memo.insert(codes[v].as_str(), b.clone());
        behavior[v] = Some(b);
    }

    let root = tree.root();
    let root_b = behavior[root].as_ref().expect("root planned");
    let end_state = bits(root_b.0[start])
        .find(|&q| dfa.accepts(q, language))
        .ok_or(PlanError::NoOrder { level })?;

    let mut child_order: Vec<Vec<VertexId>> = (0..tree.len()).map(|v| tree.children(v).to_vec()).collect();
    let mut stack = vec![(root, start, end_state)];
    while let Some((v, q_in, q_out)) = stack.pop() {
        if depth[v] >= level {
            continue;
        }
        let groups = Groups::new(tree.children(v), &behavior);
        let mut pools = groups.members.clone();
        let mut seq = Vec::with_capacity(tree.children(v).len());
        for (g, a, b) in groups.route(q_in, q_out) {
            let c = pools[g].pop().expect("group has a free member");
            seq.push(c);
            stack.push((c, a, b));
        }
        child_order[v] = seq;
    }
    Ok(LevelPlan { order: child_order, end_state })
}

/// The tree with the planned child orders applied.
pub fn apply_order(tree: &RootedTree, plan: &LevelPlan) -> RootedTree {
    tree.with_child_order(|v, _| plan.order[v].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::word_of;
    use crate::tree::{expr_to_tree, parse_tree_expr};

    fn level_word(tree: &RootedTree, level: usize) -> Vec<usize> {
        let depth = tree.depths();
        tree.bfs_order().into_iter().filter(|&v| depth[v] == level).map(|v| tree.children(v).len()).collect()
    }

    #[test]
    fn finds_order_for_simple_language() {
        // counts become 3 then 2 only if the odd subtree comes first
        let dfa = Dfa::new(&[("oe", "oe")]).unwrap();
        let t = expr_to_tree(&parse_tree_expr("(2,3)").unwrap());
        let plan = plan_level_order(&t, &dfa, 0, dfa.start(), 1).unwrap();
        let ordered = apply_order(&t, &plan);
        assert_eq!(level_word(&ordered, 1), vec![3, 2]);
    }

    #[test]
    fn nested_orders() {
        let dfa = Dfa::new(&[("p", "oeeooo")]).unwrap();
        let t = expr_to_tree(&parse_tree_expr("((2,1),(1,2),(1,1))").unwrap());
        let plan = plan_level_order(&t, &dfa, 0, dfa.start(), 2).unwrap();
        let w = level_word(&apply_order(&t, &plan), 2);
        assert!(dfa.matches(&word_of(&w), 0));
    }

    #[test]
    fn reports_impossible_languages() {
        let dfa = Dfa::new(&[("p", "ee")]).unwrap();
        let t = expr_to_tree(&parse_tree_expr("(2,3)").unwrap());
        assert_eq!(plan_level_order(&t, &dfa, 0, dfa.start(), 1).unwrap_err(), PlanError::NoOrder { level: 1 });
    }
}
