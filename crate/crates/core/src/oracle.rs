//! Independent checks: backtracking search for graceful labelings, enumeration
//! of small trees, and exhaustive search over well-behaved transfer scripts.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::classify::{classify_tree, ClassId};
use crate::transfer::{LabelRun, LabeledState, TransferContext, TransferScript, TransferStep};
use crate::tree::{canonical_code, Labeling, RootedTree, VertexId};
use crate::walk::trim_run;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: 200_000_000, max_time: Duration::from_secs(60) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    NoSolution,
    Exhausted,
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

struct Meter {
    nodes: u64,
    budget: SearchBudget,
    started: Instant,
    out: bool,
}

impl Meter {
    fn new(budget: SearchBudget) -> Self {
        Meter { nodes: 0, budget, started: Instant::now(), out: false }
    }

    /// Counts a node; false once the budget is spent.
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes
            || (self.nodes & 0xfff == 0 && self.started.elapsed() > self.budget.max_time)
        {
            self.out = true;
        }
        !self.out
    }
}

struct Labeler<'a> {
    order: Vec<VertexId>,
    tree: &'a RootedTree,
    label: Vec<u32>,
    used: u64,
    diffs: u64,
    n: u32,
}

impl Labeler<'_> {
    fn go(&mut self, k: usize, meter: &mut Meter) -> bool {
        if k == self.order.len() {
            return true;
        }
        if !meter.tick() {
            return false;
        }
        let v = self.order[k];
        let p = self.label[self.tree.parent(v).expect("non-root")];
        for d in (1..self.n).rev() {
            if self.diffs >> d & 1 == 1 {
                continue;
            }
            for x in [p.checked_add(d), p.checked_sub(d)].into_iter().flatten() {
                if x >= self.n || self.used >> x & 1 == 1 {
                    continue;
                }
                self.label[v] = x;
                self.used |= 1 << x;
                self.diffs |= 1 << d;
                if self.go(k + 1, meter) {
                    return true;
                }
                self.used &= !(1 << x);
                self.diffs &= !(1 << d);
                if meter.out {
                    return false;
                }
            }
        }
        false
    }
}

/// Backtracking over labels in breadth-first order, largest differences first.
/// Supports trees of at most 64 vertices.
pub fn brute_force_graceful(tree: &RootedTree, root_label: Option<u32>, budget: SearchBudget) -> SearchOutcome<Labeling> {
    let n = tree.len() as u32;
    assert!(n <= 64, "brute force supports at most 64 vertices");
    let roots: Vec<u32> = match root_label {
        Some(r) if r >= n => return SearchOutcome::NoSolution,
        Some(r) => vec![r],
        None => (0..n).collect(),
    };
    let order: Vec<VertexId> = tree.bfs_order().into_iter().skip(1).collect();
    let mut meter = Meter::new(budget);
    for r in roots {
        let mut lab = Labeler { order: order.clone(), tree, label: vec![0; n as usize], used: 1 << r, diffs: 0, n };
        lab.label[tree.root()] = r;
        if lab.go(0, &mut meter) {
            return SearchOutcome::Found(Labeling::from_labels(lab.label));
        }
        if meter.out {
            return SearchOutcome::Exhausted;
        }
    }
    SearchOutcome::NoSolution
}

/// Which class to enumerate, up to how many vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassFilter {
    pub class: ClassId,
    pub n_max: usize,
}

/// One isomorphism class of subtree; children index the catalog one level down.
#[derive(Clone, Debug)]
struct Shape {
    size: usize,
    height: usize,
    children: Vec<usize>,
}

/// Subtrees of height at most `h` whose vertices above relative depth `odd`
/// all have an odd number of children.
struct Catalogs {
    n_max: usize,
    memo: HashMap<(usize, usize), Vec<Shape>>,
}

impl Catalogs {
    fn get(&mut self, h: usize, odd: usize) -> &[Shape] {
        if !self.memo.contains_key(&(h, odd)) {
            let shapes = self.build(h, odd);
            self.memo.insert((h, odd), shapes);
        }
        &self.memo[&(h, odd)]
    }

    fn build(&mut self, h: usize, odd: usize) -> Vec<Shape> {
        let mut out = Vec::new();
        if odd == 0 {
            out.push(Shape { size: 1, height: 0, children: Vec::new() });
        }
        if h == 0 {
            return out;
        }
        let n_max = self.n_max;
        let sub = self.get(h - 1, odd.saturating_sub(1)).to_vec();
        let mut chosen = Vec::new();
        multisets(&sub, 0, n_max - 1, &mut chosen, &mut |kids: &[usize]| {
            if kids.is_empty() || (odd > 0 && kids.len() % 2 == 0) {
                return;
            }
            let size = 1 + kids.iter().map(|&k| sub[k].size).sum::<usize>();
            let height = 1 + kids.iter().map(|&k| sub[k].height).max().unwrap_or(0);
            out.push(Shape { size, height, children: kids.to_vec() });
        });
        out.sort_by_key(|s| s.size);
        out
    }

    fn materialize(&self, shape: &Shape, h: usize, odd: usize, parents: &mut Vec<Option<VertexId>>, parent: Option<VertexId>) {
        let me = parents.len();
        parents.push(parent);
        if shape.children.is_empty() {
            return;
        }
        let sub = &self.memo[&(h - 1, odd.saturating_sub(1))];
        for &k in &shape.children {
            self.materialize(&sub[k], h - 1, odd.saturating_sub(1), parents, Some(me));
        }
    }
}

/// Calls `f` on every non-decreasing index sequence whose sizes fit in `room`.
/// Catalogs are kept sorted by size so the scan can stop early.
fn multisets(items: &[Shape], from: usize, room: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(chosen);
    for i in from..items.len() {
        if items[i].size > room {
            break;
        }
        chosen.push(i);
        multisets(items, i, room - items[i].size, chosen, f);
        chosen.pop();
    }
}

/// All trees with at most `n_max` vertices in the class, rooted at their
/// center, one per isomorphism class.
pub fn enumerate_class(filter: ClassFilter) -> Vec<RootedTree> {
    let mut out = Vec::new();
    if filter.n_max < 3 {
        return out;
    }
    let mut cats = Catalogs { n_max: filter.n_max, memo: HashMap::new() };
    let mut r = 1;
    while 2 * r < filter.n_max {
        // depth-1 subtrees: height ≤ r-1, odd counts above relative depth r-2
        let sub_key = (r - 1, r.saturating_sub(2));
        let sub = cats.get(sub_key.0, sub_key.1).to_vec();
        let mut roots = Vec::new();
        multisets(&sub, 0, filter.n_max - 1, &mut Vec::new(), &mut |kids: &[usize]| {
            let tall = kids.iter().filter(|&&k| sub[k].height + 1 == r).count();
            if tall >= 2 && (r == 1 || kids.len() % 2 == 1) {
                roots.push(kids.to_vec());
            }
        });
        for kids in roots {
            let mut parents = vec![None];
            let catalog = &cats.memo[&sub_key];
            for k in kids {
                cats.materialize(&catalog[k], sub_key.0, sub_key.1, &mut parents, Some(0));
            }
            let tree = RootedTree::from_parents(&parents).expect("generated parents form a tree");
            if classify_tree(&tree).contains(filter.class) {
                out.push(tree);
            }
        }
        r += 1;
    }
    let mut seen = HashSet::new();
    out.retain(|t| seen.insert(canonical_code(t)));
    out
}

/// Every rooted tree on `n` vertices, from canonical level sequences.
pub fn rooted_trees(n: usize) -> Vec<RootedTree> {
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(from_levels(&level));
        let Some(p) = (1..n).rev().find(|&i| level[i] > 1) else { break };
        let q = (0..p).rev().find(|&i| level[i] == level[p] - 1).expect("a parent level exists");
        for i in p..n {
            level[i] = level[i - (p - q)];
        }
    }
    out
}

fn from_levels(level: &[usize]) -> RootedTree {
    let mut last_at: Vec<VertexId> = Vec::new();
    let mut parents = Vec::with_capacity(level.len());
    for (i, &l) in level.iter().enumerate() {
        parents.push(if l == 0 { None } else { Some(last_at[l - 1]) });
        last_at.truncate(l);
        last_at.push(i);
    }
    RootedTree::from_parents(&parents).expect("level sequence is a tree")
}

/// Depth-first search over well-behaved scripts from `ctx` whose result is
/// `counts` (vertex-list order, missing entries zero).
pub fn search_well_behaved(ctx: &TransferContext, counts: &[usize], budget: SearchBudget) -> SearchOutcome<TransferScript> {
    let m = ctx.len();
    if counts.len() > m || counts.iter().sum::<usize>() != ctx.pool_size() {
        return SearchOutcome::NoSolution;
    }
    let mut target = counts.to_vec();
    target.resize(m, 0);
    let mut search = ScriptSearch {
        ctx,
        target,
        left: vec![0; m],
        steps: Vec::new(),
        seen: HashSet::new(),
        meter: Meter::new(budget),
    };
    if search.go(&ctx.state, 1, ctx.pool()) {
        return SearchOutcome::Found(TransferScript::new(search.steps));
    }
    if search.meter.out {
        SearchOutcome::Exhausted
    } else {
        SearchOutcome::NoSolution
    }
}

struct ScriptSearch<'a> {
    ctx: &'a TransferContext,
    target: Vec<usize>,
    /// Pool leaves left behind at each `v_i`, 0-based.
    left: Vec<usize>,
    steps: Vec<TransferStep>,
    seen: HashSet<(usize, LabelRun, Vec<usize>)>,
    meter: Meter,
}

impl ScriptSearch<'_> {
    fn go(&mut self, state: &LabeledState, holder: usize, run: LabelRun) -> bool {
        if !self.meter.tick() || !self.seen.insert((holder, run, self.left.clone())) {
            return false;
        }
        let done = (0..self.target.len()).all(|i| {
            let held = self.left[i] + if i + 1 == holder { run.len() } else { 0 };
            held == self.target[i]
        });
        if done {
            return true;
        }
        let from = self.ctx.vlist[holder - 1];
        for next in (1..=self.ctx.len()).filter(|j| j % 2 != holder % 2) {
            let to = self.ctx.vlist[next - 1];
            for leave in 0..run.len() {
                if self.left[holder - 1] + leave > self.target[holder - 1] {
                    break;
                }
                let Some(moved) = trim_run(run, from, to, leave) else { continue };
                let Ok(after) = state.apply_type1(from, to, moved) else { continue };
                self.left[holder - 1] += leave;
                self.steps.push(TransferStep::type1(from, to, moved));
                if self.go(&after, next, moved) {
                    return true;
                }
                self.steps.pop();
                self.left[holder - 1] -= leave;
                if self.meter.out {
                    return false;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::{make_context, star_state};
    use crate::tree::{expr_to_tree, parse_tree_expr, tree_to_expr, verify_graceful};

    #[test]
    fn small_labelings() {
        let p2 = RootedTree::star(1);
        let l = brute_force_graceful(&p2, Some(0), SearchBudget::default()).found().unwrap();
        assert_eq!((l.get(0), l.get(1)), (Some(0), Some(1)));
        let star = RootedTree::star(3);
        let l = brute_force_graceful(&star, Some(0), SearchBudget::default()).found().unwrap();
        let mut leaves: Vec<u32> = (1..4).map(|v| l.get(v).unwrap()).collect();
        leaves.sort_unstable();
        assert_eq!(leaves, vec![1, 2, 3]);
        let t = expr_to_tree(&parse_tree_expr("((2,1,1))").unwrap());
        let l = brute_force_graceful(&t, Some(0), SearchBudget::default()).found().unwrap();
        assert!(verify_graceful(&t, &l).graceful);
    }

    #[test]
    fn budget_is_reported() {
        let t = expr_to_tree(&parse_tree_expr("((2,1,1),(3),(1))").unwrap());
        let tiny = SearchBudget { max_nodes: 3, max_time: Duration::from_secs(1) };
        assert_eq!(brute_force_graceful(&t, Some(0), tiny), SearchOutcome::Exhausted);
    }

    #[test]
    fn class_enumeration() {
        assert!(enumerate_class(ClassFilter { class: ClassId::A, n_max: 5 }).is_empty());
        assert!(enumerate_class(ClassFilter { class: ClassId::C, n_max: 1 }).is_empty());
        // the 7-vertex path has an even root degree
        assert!(enumerate_class(ClassFilter { class: ClassId::E, n_max: 8 }).is_empty());
        let e = enumerate_class(ClassFilter { class: ClassId::E, n_max: 9 });
        assert_eq!(e.len(), 1);
        assert_eq!(tree_to_expr(&e[0]).to_string(), "(1,(1),(1))");
    }

    #[test]
    fn catalog_matches_plain_enumeration() {
        for class in ClassId::ALL {
            let mut fast: Vec<String> =
                enumerate_class(ClassFilter { class, n_max: 11 }).iter().map(canonical_code).collect();
            let mut slow: Vec<String> = (1..=11)
                .flat_map(rooted_trees)
                .filter(|t| classify_tree(t).contains(class))
                .map(|t| canonical_code(&t))
                .collect();
            fast.sort();
            slow.sort();
            assert_eq!(fast, slow, "class {class}");
        }
    }

    #[test]
    fn script_search() {
        let s = star_state(3).unwrap();
        let ctx = make_context(&s, vec![0, 3], 0, 4, 1, 3).unwrap();
        assert_eq!(search_well_behaved(&ctx, &[2, 1], SearchBudget::default()), SearchOutcome::NoSolution);
        assert!(search_well_behaved(&ctx, &[3], SearchBudget::default()).is_found());
        assert!(search_well_behaved(&ctx, &[1, 2], SearchBudget::default()).is_found());
    }
}
