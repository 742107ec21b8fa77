//! Leaf transfers on gracefully labeled trees.
//!
//! Vertices are addressed by label throughout, since labels never change
//! while leaves are moved around.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tree::{verify_graceful, Labeling, RootedTree, VertexId};

/// Consecutive labels `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelRun {
    pub start: u32,
    pub end: u32,
}

impl LabelRun {
    pub fn new(start: u32, end: u32) -> Self {
        assert!(start <= end, "empty run {start}..{end}");
        LabelRun { start, end }
    }

    pub fn single(label: u32) -> Self {
        LabelRun { start: label, end: label }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sum(&self) -> u64 {
        self.start as u64 + self.end as u64
    }

    pub fn contains(&self, label: u32) -> bool {
        self.start <= label && label <= self.end
    }

    pub fn is_within(&self, other: &LabelRun) -> bool {
        other.start <= self.start && self.end <= other.end
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.end
    }
}

impl fmt::Display for LabelRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransferStep {
    Type1 { from: u32, to: u32, run: LabelRun },
    Type2 { from: u32, to: u32, first: LabelRun, second: LabelRun },
}

impl TransferStep {
    pub fn type1(from: u32, to: u32, run: LabelRun) -> Self {
        TransferStep::Type1 { from, to, run }
    }

    pub fn from(&self) -> u32 {
        match *self {
            TransferStep::Type1 { from, .. } | TransferStep::Type2 { from, .. } => from,
        }
    }

    pub fn to(&self) -> u32 {
        match *self {
            TransferStep::Type1 { to, .. } | TransferStep::Type2 { to, .. } => to,
        }
    }

    pub fn moved(&self) -> Vec<u32> {
        match *self {
            TransferStep::Type1 { run, .. } => run.labels().collect(),
            TransferStep::Type2 { first, second, .. } => first.labels().chain(second.labels()).collect(),
        }
    }
}

impl fmt::Display for TransferStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferStep::Type1 { from, to, run } => write!(f, "{from}->{to}: {run}"),
            TransferStep::Type2 { from, to, first, second } => write!(f, "{from}->{to}: {first}, {second}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransferScript {
    pub steps: Vec<TransferStep>,
}

impl TransferScript {
    pub fn new(steps: Vec<TransferStep>) -> Self {
        TransferScript { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// One step per line, `U->V: K..E` or `U->V: K..E, L..F`.
impl fmt::Display for TransferScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("script line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

fn parse_run(text: &str) -> Result<LabelRun, String> {
    let text = text.trim();
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text, text),
    };
    let a: u32 = a.parse().map_err(|_| format!("bad label '{a}'"))?;
    let b: u32 = b.parse().map_err(|_| format!("bad label '{b}'"))?;
    if a > b {
        return Err(format!("run {a}..{b} is empty"));
    }
    Ok(LabelRun::new(a, b))
}

impl FromStr for TransferScript {
    type Err = ScriptParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let err = |message: String| ScriptParseError { line: i + 1, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, runs) = line.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
            let (u, v) = head.split_once("->").ok_or_else(|| err("missing '->'".into()))?;
            let from: u32 = u.trim().parse().map_err(|_| err(format!("bad label '{}'", u.trim())))?;
            let to: u32 = v.trim().parse().map_err(|_| err(format!("bad label '{}'", v.trim())))?;
            let parts: Vec<&str> = runs.split(',').collect();
            let step = match parts.as_slice() {
                [r] => TransferStep::Type1 { from, to, run: parse_run(r).map_err(err)? },
                [r1, r2] => TransferStep::Type2 {
                    from,
                    to,
                    first: parse_run(r1).map_err(err)?,
                    second: parse_run(r2).map_err(err)?,
                },
                _ => return Err(err("expected one or two runs".into())),
            };
            steps.push(step);
        }
        Ok(TransferScript { steps })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error("star needs at least one leaf")]
    EmptyStar,
    #[error("labeling of the initial tree is not graceful")]
    NotGraceful,
    #[error("no vertex carries label {0}")]
    UnknownLabel(u32),
    #[error("a transfer needs two distinct vertices, got {0} twice")]
    SameVertex(u32),
    #[error("f({from}) + f({to}) = {pair_sum}, but the run(s) need {run_sum}")]
    SumMismatch { from: u32, to: u32, pair_sum: u64, run_sum: u64 },
    #[error("label {label} is not a movable leaf of {from}")]
    NotMovableLeaf { label: u32, from: u32 },
    #[error("type-2 runs {first} and {second} differ in length")]
    UnequalRuns { first: LabelRun, second: LabelRun },
    #[error("type-2 runs {first} and {second} overlap")]
    OverlappingRuns { first: LabelRun, second: LabelRun },
    #[error("edge labels changed after the transfer")]
    LostGracefulness,
}

/// A gracefully labeled tree plus the set of leaves that may still be moved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledState {
    tree: RootedTree,
    labeling: Labeling,
    by_label: Vec<VertexId>,
    movable: Vec<bool>,
}

impl LabeledState {
    /// `K_{1,n}` with center 0 and leaves `1..=n`; vertex ids equal labels.
    pub fn star(n: usize) -> Result<Self, TransferError> {
        if n == 0 {
            return Err(TransferError::EmptyStar);
        }
        let tree = RootedTree::star(n);
        let labeling = Labeling::from_labels((0..=n as u32).collect());
        Self::from_parts(tree, labeling)
    }

    /// Wraps a graceful labeling; every leaf starts out movable.
    pub fn from_parts(tree: RootedTree, labeling: Labeling) -> Result<Self, TransferError> {
        if !verify_graceful(&tree, &labeling).graceful {
            return Err(TransferError::NotGraceful);
        }
        let mut by_label = vec![0; tree.len()];
        for v in tree.vertices() {
            by_label[labeling.get(v).expect("verified") as usize] = v;
        }
        let movable = tree.vertices().map(|v| tree.is_leaf(v)).collect();
        Ok(LabeledState { tree, labeling, by_label, movable })
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Largest label, `n - 1` for an `n`-vertex tree.
    pub fn max_label(&self) -> u32 {
        (self.len() - 1) as u32
    }

    pub fn vertex(&self, label: u32) -> Option<VertexId> {
        self.by_label.get(label as usize).copied()
    }

    pub fn label(&self, v: VertexId) -> u32 {
        self.labeling.get(v).expect("complete labeling")
    }

    fn vertex_or_err(&self, label: u32) -> Result<VertexId, TransferError> {
        self.vertex(label).ok_or(TransferError::UnknownLabel(label))
    }

    pub fn parent_label(&self, label: u32) -> Option<u32> {
        let v = self.vertex(label)?;
        self.tree.parent(v).map(|p| self.label(p))
    }

    pub fn child_labels(&self, label: u32) -> Vec<u32> {
        match self.vertex(label) {
            Some(v) => self.tree.children(v).iter().map(|&c| self.label(c)).collect(),
            None => Vec::new(),
        }
    }

    pub fn is_leaf(&self, label: u32) -> bool {
        self.vertex(label).is_some_and(|v| self.tree.is_leaf(v))
    }

    /// Whether `label` is a movable leaf currently attached to `parent`.
    pub fn is_movable_leaf_of(&self, label: u32, parent: u32) -> bool {
        match (self.vertex(label), self.vertex(parent)) {
            (Some(v), Some(p)) => self.movable[v] && self.tree.is_leaf(v) && self.tree.parent(v) == Some(p),
            _ => false,
        }
    }

    pub fn is_movable(&self, label: u32) -> bool {
        self.vertex(label).is_some_and(|v| self.movable[v])
    }

    /// Marks leaves as no longer transferable.
    pub fn freeze(&mut self, labels: impl IntoIterator<Item = u32>) {
        for l in labels {
            if let Some(v) = self.vertex(l) {
                self.movable[v] = false;
            }
        }
    }

    /// The labeling `g(v) = (n - 1) - f(v)`, which is graceful whenever `f` is.
    pub fn mirrored(&self) -> LabeledState {
        let top = self.max_label();
        let labeling = Labeling::from_labels(self.tree.vertices().map(|v| top - self.label(v)).collect());
        let mut by_label = vec![0; self.len()];
        for v in self.tree.vertices() {
            by_label[(top - self.label(v)) as usize] = v;
        }
        LabeledState { tree: self.tree.clone(), labeling, by_label, movable: self.movable.clone() }
    }

    /// Every run of consecutive movable leaves at `u` that a type-1 transfer `u→v`
    /// can carry, longest first.
    pub fn legal_type1_moves(&self, u: u32, v: u32) -> Vec<LabelRun> {
        if u == v || self.vertex(u).is_none() || self.vertex(v).is_none() {
            return Vec::new();
        }
        let sum = u as i64 + v as i64;
        let (mut lo, mut hi) = (sum / 2, sum - sum / 2);
        let ok = |l: i64| l >= 0 && l <= self.max_label() as i64 && self.is_movable_leaf_of(l as u32, u);
        let mut runs = Vec::new();
        if lo == hi {
            if !ok(lo) {
                return runs;
            }
        } else if !(ok(lo) && ok(hi)) {
            return runs;
        }
        loop {
            runs.push(LabelRun::new(lo as u32, hi as u32));
            if ok(lo - 1) && ok(hi + 1) {
                lo -= 1;
                hi += 1;
            } else {
                break;
            }
        }
        runs.reverse();
        runs
    }

    fn move_leaves(&self, from: u32, to: u32, labels: &[u32]) -> Result<LabeledState, TransferError> {
        let fu = self.vertex_or_err(from)?;
        let fv = self.vertex_or_err(to)?;
        for &l in labels {
            if !self.is_movable_leaf_of(l, from) {
                return Err(TransferError::NotMovableLeaf { label: l, from });
            }
        }
        let mut before: Vec<u32> = labels.iter().map(|&l| l.abs_diff(from)).collect();
        let mut after: Vec<u32> = labels.iter().map(|&l| l.abs_diff(to)).collect();
        before.sort_unstable();
        after.sort_unstable();
        if before != after {
            return Err(TransferError::LostGracefulness);
        }
        let mut next = self.clone();
        for &l in labels {
            let w = self.by_label[l as usize];
            next.tree.reparent(w, fv);
        }
        next.movable[fv] = false;
        debug_assert!(fu != fv);
        debug_assert!(verify_graceful(&next.tree, &next.labeling).graceful);
        Ok(next)
    }

    pub fn apply_type1(&self, from: u32, to: u32, run: LabelRun) -> Result<LabeledState, TransferError> {
        if from == to {
            return Err(TransferError::SameVertex(from));
        }
        self.vertex_or_err(from)?;
        self.vertex_or_err(to)?;
        let pair_sum = from as u64 + to as u64;
        if run.sum() != pair_sum {
            return Err(TransferError::SumMismatch { from, to, pair_sum, run_sum: run.sum() });
        }
        let labels: Vec<u32> = run.labels().collect();
        self.move_leaves(from, to, &labels)
    }

    pub fn apply_type2(
        &self,
        from: u32,
        to: u32,
        first: LabelRun,
        second: LabelRun,
    ) -> Result<LabeledState, TransferError> {
        if from == to {
            return Err(TransferError::SameVertex(from));
        }
        self.vertex_or_err(from)?;
        self.vertex_or_err(to)?;
        if first.len() != second.len() {
            return Err(TransferError::UnequalRuns { first, second });
        }
        let (lo, hi) = if first.start <= second.start { (first, second) } else { (second, first) };
        if lo.end >= hi.start {
            return Err(TransferError::OverlappingRuns { first, second });
        }
        let pair_sum = from as u64 + to as u64;
        let run_sum = lo.start as u64 + hi.end as u64;
        if run_sum != pair_sum {
            return Err(TransferError::SumMismatch { from, to, pair_sum, run_sum });
        }
        let labels: Vec<u32> = lo.labels().chain(hi.labels()).collect();
        self.move_leaves(from, to, &labels)
    }

    pub fn apply(&self, step: &TransferStep) -> Result<LabeledState, TransferError> {
        match *step {
            TransferStep::Type1 { from, to, run } => self.apply_type1(from, to, run),
            TransferStep::Type2 { from, to, first, second } => self.apply_type2(from, to, first, second),
        }
    }
}

/// Convenience wrapper matching the free-function form of the other operations.
pub fn star_state(n: usize) -> Result<LabeledState, TransferError> {
    LabeledState::star(n)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index} ({step}) failed: {source}")]
pub struct ReplayError {
    pub index: usize,
    pub step: TransferStep,
    #[source]
    pub source: TransferError,
}

pub fn replay_script(state: &LabeledState, script: &TransferScript) -> Result<LabeledState, ReplayError> {
    replay_with(state, script, |_, _| {})
}

/// Replays a script, calling `observe` with each intermediate state.
pub fn replay_with(
    state: &LabeledState,
    script: &TransferScript,
    mut observe: impl FnMut(usize, &LabeledState),
) -> Result<LabeledState, ReplayError> {
    let mut cur = state.clone();
    for (index, step) in script.steps.iter().enumerate() {
        cur = cur.apply(step).map_err(|source| ReplayError { index, step: *step, source })?;
        observe(index, &cur);
    }
    Ok(cur)
}

/// Direction of the alternating label sequence of a context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// `a, b-1, a+1, b-2, ...`
    Rising,
    /// `a, b+1, a-1, b+2, ...`
    Falling,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("vertex list is empty")]
    EmptyList,
    #[error("label of v{index} is {found}, the alternating pattern needs {expected}")]
    Labels { index: usize, found: u32, expected: i64 },
    #[error("v{index} (label {label}) is not a vertex of the tree")]
    Missing { index: usize, label: u32 },
    #[error("v1 is not adjacent to a leaf labeled {0}")]
    PoolLeaf(i64),
    #[error("pool {c}..{d} is empty")]
    EmptyPool { c: i64, d: i64 },
    #[error("a + b = {ab} but c + d = {cd}")]
    Sum { ab: i64, cd: i64 },
}

/// A labeled tree together with `v1..vm`, `a, b` and the pool `c..d` at `v1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferContext {
    pub state: LabeledState,
    pub vlist: Vec<u32>,
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub pattern: Pattern,
}

/// Label of `v_index` in the alternating sequence; `v_0` has label `b`.
pub fn pattern_label(pattern: Pattern, a: i64, b: i64, index: usize) -> i64 {
    let t = (index / 2) as i64;
    match (pattern, index % 2) {
        (Pattern::Rising, 1) => a + t,
        (Pattern::Rising, _) => b - t,
        (Pattern::Falling, 1) => a - t,
        (Pattern::Falling, _) => b + t,
    }
}

pub fn make_context(
    state: &LabeledState,
    vlist: Vec<u32>,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
) -> Result<TransferContext, ContextError> {
    if vlist.is_empty() {
        return Err(ContextError::EmptyList);
    }
    let pattern = if vlist.len() >= 2 && vlist[1] as i64 == b + 1 {
        Pattern::Falling
    } else if vlist.len() >= 2 || a < b {
        Pattern::Rising
    } else {
        Pattern::Falling
    };
    for (i, &l) in vlist.iter().enumerate() {
        let expected = pattern_label(pattern, a, b, i + 1);
        if l as i64 != expected {
            return Err(ContextError::Labels { index: i + 1, found: l, expected });
        }
        if state.vertex(l).is_none() {
            return Err(ContextError::Missing { index: i + 1, label: l });
        }
    }
    if c > d {
        return Err(ContextError::EmptyPool { c, d });
    }
    for leaf in c..=d {
        if leaf < 0 || leaf > state.max_label() as i64 {
            return Err(ContextError::PoolLeaf(leaf));
        }
        let l = leaf as u32;
        if state.parent_label(l) != Some(vlist[0]) || !state.is_leaf(l) {
            return Err(ContextError::PoolLeaf(leaf));
        }
    }
    if a + b != c + d {
        return Err(ContextError::Sum { ab: a + b, cd: c + d });
    }
    Ok(TransferContext { state: state.clone(), vlist, a, b, c, d, pattern })
}

impl TransferContext {
    pub fn len(&self) -> usize {
        self.vlist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vlist.is_empty()
    }

    pub fn pool(&self) -> LabelRun {
        LabelRun::new(self.c as u32, self.d as u32)
    }

    pub fn pool_size(&self) -> usize {
        (self.d - self.c + 1) as usize
    }

    /// Label of `v_index` for any index, including `v_0` and indices past `m`.
    pub fn label_at(&self, index: usize) -> i64 {
        pattern_label(self.pattern, self.a, self.b, index)
    }

    /// 1-based position of `label` in the vertex list, or 0 for `v_0`.
    pub fn index_of(&self, label: u32) -> Option<usize> {
        if label as i64 == self.b {
            return Some(0);
        }
        self.vlist.iter().position(|&l| l == label).map(|i| i + 1)
    }

    /// The same context under the mirrored labeling `g = (n-1) - f`.
    pub fn mirrored(&self) -> TransferContext {
        let top = self.state.max_label() as i64;
        TransferContext {
            state: self.state.mirrored(),
            vlist: self.vlist.iter().map(|&l| (top - l as i64) as u32).collect(),
            a: top - self.a,
            b: top - self.b,
            c: top - self.d,
            d: top - self.c,
            pattern: match self.pattern {
                Pattern::Rising => Pattern::Falling,
                Pattern::Falling => Pattern::Rising,
            },
        }
    }

    /// Returns a context on `state` with the same vertex list and pool parameters.
    pub fn with_state(&self, state: LabeledState) -> TransferContext {
        TransferContext { state, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LeaveBehindError {
    #[error("indices {current} and {next} have the same parity")]
    SameParity { current: usize, next: usize },
    #[error("indices {previous} and {next} differ by an odd amount")]
    OddGap { previous: usize, next: usize },
    #[error("index {0} is outside the vertex list")]
    OutOfRange(usize),
}

/// Counts that a type-1 transfer `v_cur → v_next` can leave behind at `v_cur`,
/// given the previous hop came from `v_prev` (use 0 for the first transfer).
///
/// `available` is the most leaves that may stay behind, i.e. one less than the
/// size of the run that arrived at `v_cur`, so that the transfer still moves a leaf.
pub fn leave_behind_options(
    ctx: &TransferContext,
    i_prev: usize,
    i_cur: usize,
    i_next: usize,
    available: usize,
) -> Result<Vec<usize>, LeaveBehindError> {
    for i in [i_cur, i_next] {
        if i == 0 || i > ctx.len() + 1 {
            return Err(LeaveBehindError::OutOfRange(i));
        }
    }
    if i_prev > ctx.len() + 1 {
        return Err(LeaveBehindError::OutOfRange(i_prev));
    }
    if i_cur % 2 == i_next % 2 {
        return Err(LeaveBehindError::SameParity { current: i_cur, next: i_next });
    }
    let gap = i_next.abs_diff(i_prev);
    if gap % 2 != 0 {
        return Err(LeaveBehindError::OddGap { previous: i_prev, next: i_next });
    }
    let min = gap / 2;
    Ok((min..=available).step_by(2).collect())
}

/// Whether a transfer out of `v1` leaves behind the pool leaves that come
/// first in the vertex list. Meaningful when the list contains enough pool leaves.
pub fn check_leaf_order(ctx: &TransferContext, step: &TransferStep) -> bool {
    let pool = ctx.pool();
    let moved: BTreeSet<u32> = step.moved().into_iter().collect();
    let left: BTreeSet<u32> = pool.labels().filter(|l| !moved.contains(l)).collect();
    let listed: Vec<u32> = ctx.vlist.iter().copied().filter(|&l| pool.contains(l)).collect();
    if listed.len() < left.len() {
        return false;
    }
    let first: BTreeSet<u32> = listed[..left.len()].iter().copied().collect();
    first == left
}

/// Checks the well-behaved conditions: type-1 only, starting at `v1`,
/// chained hops, shrinking moved sets inside the pool, alternating index parity.
pub fn check_well_behaved(ctx: &TransferContext, script: &TransferScript) -> Result<(), String> {
    let mut prev_run = ctx.pool();
    let mut prev_to = ctx.vlist[0];
    for (i, step) in script.steps.iter().enumerate() {
        let TransferStep::Type1 { from, to, run } = *step else {
            return Err(format!("step {i} is not a type-1 transfer"));
        };
        if from != prev_to {
            return Err(format!("step {i} starts at {from}, expected {prev_to}"));
        }
        let (Some(iu), Some(iv)) = (ctx.index_of(from), ctx.index_of(to)) else {
            return Err(format!("step {i} leaves the vertex list"));
        };
        if iu == 0 || iv == 0 {
            return Err(format!("step {i} touches v0"));
        }
        if iu % 2 == iv % 2 {
            return Err(format!("step {i} joins indices {iu} and {iv} of equal parity"));
        }
        if !run.is_within(&prev_run) {
            return Err(format!("step {i} moves {run}, not inside {prev_run}"));
        }
        prev_run = run;
        prev_to = to;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(a: u32, b: u32) -> LabelRun {
        LabelRun::new(a, b)
    }

    fn fig1_script() -> TransferScript {
        TransferScript::new(vec![
            TransferStep::type1(0, 12, run(2, 10)),
            TransferStep::type1(12, 1, run(3, 10)),
            TransferStep::type1(1, 11, run(4, 8)),
            TransferStep::type1(11, 2, run(5, 8)),
        ])
    }

    #[test]
    fn star_states() {
        let s = star_state(12).unwrap();
        assert_eq!(s.child_labels(0), (1..=12).collect::<Vec<_>>());
        assert!((1..=12).all(|l| s.is_movable(l)));
        assert_eq!(star_state(1).unwrap().len(), 2);
        assert_eq!(star_state(21).unwrap().len(), 22);
        assert_eq!(star_state(0).unwrap_err(), TransferError::EmptyStar);
    }

    #[test]
    fn type1_moves_on_star() {
        let s = star_state(12).unwrap();
        let runs = s.legal_type1_moves(0, 12);
        assert_eq!(runs, vec![run(1, 11), run(2, 10), run(3, 9), run(4, 8), run(5, 7), run(6, 6)]);
        assert!(s.legal_type1_moves(0, 1).is_empty());
        assert!(s.legal_type1_moves(0, 0).is_empty());
    }

    #[test]
    fn fig1_runs_after_first_step() {
        let s = star_state(12).unwrap().apply_type1(0, 12, run(2, 10)).unwrap();
        let runs = s.legal_type1_moves(12, 1);
        assert_eq!(runs.first(), Some(&run(3, 10)));
        assert!(runs.contains(&run(6, 7)));
        assert_eq!(runs.len(), 4);
    }

    #[test]
    fn type1_errors() {
        let s = star_state(12).unwrap();
        assert!(matches!(s.apply_type1(0, 12, run(2, 9)), Err(TransferError::SumMismatch { .. })));
        assert!(matches!(s.apply_type1(0, 0, run(2, 9)), Err(TransferError::SameVertex(0))));
        let s = s.apply_type1(0, 12, run(2, 10)).unwrap();
        // 1 is attached to 0, not 12
        assert!(matches!(s.apply_type1(12, 0, run(1, 11)), Err(TransferError::NotMovableLeaf { .. })));
    }

    fn sorted_children(s: &LabeledState, l: u32) -> Vec<u32> {
        let mut c = s.child_labels(l);
        c.sort_unstable();
        c
    }

    #[test]
    fn fig1_replay() {
        let s = replay_script(&star_state(12).unwrap(), &fig1_script()).unwrap();
        assert_eq!(sorted_children(&s, 0), vec![1, 11, 12]);
        assert_eq!(sorted_children(&s, 12), vec![2]);
        assert_eq!(sorted_children(&s, 1), vec![3, 9, 10]);
        assert_eq!(sorted_children(&s, 11), vec![4]);
        assert_eq!(sorted_children(&s, 2), vec![5, 6, 7, 8]);
        assert!(verify_graceful(s.tree(), s.labeling()).graceful);
    }

    #[test]
    fn swapped_fig1_steps_fail_at_index_one() {
        let mut script = fig1_script();
        script.steps.swap(1, 2);
        let err = replay_script(&star_state(12).unwrap(), &script).unwrap_err();
        assert_eq!(err.index, 1);
        assert!(replay_script(&star_state(5).unwrap(), &TransferScript::default()).unwrap() == star_state(5).unwrap());
    }

    #[test]
    fn type2_on_fig1_tree() {
        let s = replay_script(&star_state(12).unwrap(), &fig1_script()).unwrap();
        let t = s.apply_type2(2, 10, LabelRun::single(5), LabelRun::single(7)).unwrap();
        assert_eq!(t.child_labels(2), vec![6, 8]);
        assert_eq!(t.child_labels(10), vec![5, 7]);
        assert!(matches!(
            s.apply_type2(2, 10, LabelRun::single(5), LabelRun::single(5)),
            Err(TransferError::OverlappingRuns { .. })
        ));
        assert!(matches!(s.apply_type2(2, 10, run(5, 6), LabelRun::single(8)), Err(TransferError::UnequalRuns { .. })));
    }

    #[test]
    fn type2_sum_condition() {
        let err = star_state(9).unwrap().apply_type2(0, 9, run(2, 3), run(5, 6)).unwrap_err();
        assert_eq!(err, TransferError::SumMismatch { from: 0, to: 9, pair_sum: 9, run_sum: 8 });
    }

    #[test]
    fn type1_only_replay_from_larger_star() {
        let script = TransferScript::new(vec![
            TransferStep::type1(0, 21, run(2, 19)),
            TransferStep::type1(21, 0, run(3, 18)),
            TransferStep::type1(0, 21, run(4, 17)),
        ]);
        let s = replay_script(&star_state(21).unwrap(), &script).unwrap();
        assert_eq!(s.child_labels(21), vec![2, 19, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17]);
    }

    #[test]
    fn leave_behind_formula() {
        let ctx = make_context(&star_state(12).unwrap(), vec![0, 12, 1, 11, 2, 10], 0, 13, 1, 12).unwrap();
        assert_eq!(leave_behind_options(&ctx, 1, 2, 3, 5).unwrap(), vec![1, 3, 5]);
        assert_eq!(leave_behind_options(&ctx, 1, 2, 1, 4).unwrap(), vec![0, 2, 4]);
        assert_eq!(leave_behind_options(&ctx, 0, 1, 2, 6).unwrap(), vec![1, 3, 5]);
        assert!(matches!(leave_behind_options(&ctx, 1, 2, 4, 5), Err(LeaveBehindError::SameParity { .. })));
        assert!(matches!(leave_behind_options(&ctx, 2, 2, 3, 5), Err(LeaveBehindError::OddGap { .. })));
    }

    #[test]
    fn contexts() {
        let star = star_state(12).unwrap();
        let ctx = make_context(&star, vec![0, 12, 1, 11, 2, 10], 0, 13, 1, 12).unwrap();
        assert_eq!(ctx.pattern, Pattern::Rising);
        assert_eq!(ctx.label_at(0), 13);
        assert_eq!(ctx.label_at(7), 3);
        assert_eq!(ctx.index_of(11), Some(4));
        assert_eq!(make_context(&star, vec![0, 12], 0, 13, 2, 12).unwrap_err(), ContextError::Sum { ab: 13, cd: 14 });
        assert!(matches!(make_context(&star, vec![0, 11], 0, 13, 1, 12), Err(ContextError::Labels { index: 2, .. })));
        assert!(matches!(make_context(&star, vec![1, 11], 1, 12, 2, 11), Err(ContextError::PoolLeaf(_))));

        let m = ctx.mirrored();
        assert_eq!(m.vlist, vec![12, 0, 11, 1, 10, 2]);
        assert_eq!((m.a, m.b, m.c, m.d), (12, -1, 0, 11));
        assert_eq!(m.pattern, Pattern::Falling);
        let again = make_context(&m.state, m.vlist.clone(), m.a, m.b, m.c, m.d).unwrap();
        assert_eq!(again.pattern, Pattern::Falling);
        assert_eq!(again.mirrored().vlist, ctx.vlist);
    }

    #[test]
    fn leaf_order_on_fig1() {
        let full = vec![0, 12, 1, 11, 2, 10, 3, 9, 4, 8, 5, 7, 6];
        let ctx = make_context(&star_state(12).unwrap(), full, 0, 13, 1, 12).unwrap();
        for r in ctx.state.legal_type1_moves(0, 12) {
            assert!(check_leaf_order(&ctx, &TransferStep::type1(0, 12, r)), "{r}");
        }
        // leaves 1 and 12 behind but not 11, which precedes 2 in the list
        let s = ctx.state.apply_type1(0, 11, run(2, 9)).unwrap();
        assert!(!check_leaf_order(&ctx.with_state(s), &TransferStep::type1(0, 11, run(2, 9))));
    }

    #[test]
    fn script_dsl_round_trip() {
        let text = "# fig. 1\n0->12: 2..10\n12->1: 3..10  # second\n\n1->11: 4..8\n11->2: 5..8\n2->10: 5, 7..7\n";
        let s: TransferScript = text.parse().unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.steps[4], TransferStep::Type2 { from: 2, to: 10, first: LabelRun::single(5), second: LabelRun::single(7) });
        let again: TransferScript = s.to_string().parse().unwrap();
        assert_eq!(again, s);
        let err = "0->12 2..10".parse::<TransferScript>().unwrap_err();
        assert_eq!(err.line, 1);
        assert!("0->x: 1..2".parse::<TransferScript>().is_err());
        assert!("0->1: 3..2".parse::<TransferScript>().is_err());
    }

    #[test]
    fn well_behaved_predicate() {
        let ctx = make_context(&star_state(12).unwrap(), vec![0, 12, 1, 11, 2, 10], 0, 13, 1, 12).unwrap();
        assert!(check_well_behaved(&ctx, &fig1_script()).is_ok());
        let bad = TransferScript::new(vec![TransferStep::type1(0, 1, run(0, 1))]);
        assert!(check_well_behaved(&ctx, &bad).is_err());
    }
}
