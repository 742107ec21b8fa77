//! Diameter-6 trees whose internal vertices all have an odd number of children.

use crate::transfer::{make_context, pattern_label, star_state, LabelRun, Pattern, TransferContext, TransferScript, TransferStep};
use crate::tree::{RootedTree, VertexId};
use crate::walk::{execute_walk, Hop};

use super::ConstructError;

/// The subtree groups, in the order they are placed around the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Group {
    /// Odd number of internal children, no leaves.
    InternalOnly,
    /// Odd number of internal children, even number of leaves.
    OddInternal,
    /// Even number of internal children, odd number of leaves.
    EvenInternal,
    /// Leaves only.
    LeavesOnly,
}

#[derive(Clone, Debug)]
pub(crate) struct RootChild {
    pub group: Group,
    /// Internal children, each with its child count.
    pub internal: Vec<(VertexId, usize)>,
    pub leaves: usize,
}

pub(crate) fn root_children(tree: &RootedTree) -> Result<Vec<RootChild>, ConstructError> {
    let mut out = Vec::new();
    for &u in tree.children(tree.root()) {
        let internal: Vec<(VertexId, usize)> = tree
            .children(u)
            .iter()
            .filter(|&&w| !tree.is_leaf(w))
            .map(|&w| (w, tree.children(w).len()))
            .collect();
        let leaves = tree.children(u).len() - internal.len();
        let group = match (internal.len() % 2, internal.is_empty(), leaves) {
            (1, _, 0) => Group::InternalOnly,
            (1, _, l) if l % 2 == 0 => Group::OddInternal,
            (0, false, l) if l % 2 == 1 => Group::EvenInternal,
            (0, true, l) if l % 2 == 1 => Group::LeavesOnly,
            _ => {
                return Err(ConstructError::Schedule(format!(
                    "vertex {u} has {} internal children and {leaves} leaves",
                    internal.len()
                )))
            }
        };
        out.push(RootChild { group, internal, leaves });
    }
    out.sort_by_key(|c| c.group);
    Ok(out)
}

/// Source indices of the three passes over `v_1..v_m` (1-based).
pub(crate) fn pass_route(groups: &[Group]) -> Vec<usize> {
    let m = groups.len();
    let i1 = 1 + groups.iter().filter(|&&g| g == Group::InternalOnly).count();
    let i3 = 1 + groups.iter().filter(|&&g| g != Group::LeavesOnly).count();
    let t = i3 - 1;
    if t <= i1 {
        return (1..=m).collect();
    }
    let mut route: Vec<usize> = (1..=t).collect();
    route.extend((i1..t).rev());
    route.extend(i1 + 1..=m);
    route
}

/// How many internal vertices and leaves each visit leaves behind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Visit {
    pub index: usize,
    pub internal: usize,
    pub leaves: usize,
}

fn needed(route: &[usize], k: usize, next_after: usize) -> usize {
    let prev = if k == 0 { 0 } else { route[k - 1] };
    let next = route.get(k + 1).copied().unwrap_or(next_after);
    next.abs_diff(prev) / 2
}

/// Splits `total` over visits with the given minimums, least on all but the last.
fn spread(total: usize, mins: &[usize]) -> Option<Vec<usize>> {
    if mins.is_empty() {
        return (total == 0).then(Vec::new);
    }
    let floor: usize = mins.iter().sum();
    if total < floor || (total - floor) % 2 != 0 {
        return None;
    }
    let mut out = mins.to_vec();
    *out.last_mut().unwrap() += total - floor;
    Some(out)
}

/// Assigns internal vertices before all leaves in time: visits before a switch
/// point leave internal vertices only, visits after it leaves only.
pub(crate) fn schedule(route: &[usize], internal: &[usize], leaves: &[usize]) -> Option<Vec<Visit>> {
    let m = internal.len();
    let after = m + 1;
    let d: Vec<usize> = (0..route.len()).map(|k| needed(route, k, after)).collect();
    'switch: for h in 0..route.len() {
        let mut visits: Vec<Visit> = route.iter().map(|&index| Visit { index, internal: 0, leaves: 0 }).collect();
        for j in 1..=m {
            let pre: Vec<usize> = (0..h).filter(|&k| route[k] == j).collect();
            let post: Vec<usize> = (h + 1..route.len()).filter(|&k| route[k] == j).collect();
            let at = route[h] == j;
            let mins = |ks: &[usize]| ks.iter().map(|&k| d[k]).collect::<Vec<_>>();
            let found = if at {
                (0..=internal[j - 1]).find_map(|ia| {
                    (0..=leaves[j - 1]).find_map(|la| {
                        let total = ia + la;
                        if total < d[h] || (total - d[h]) % 2 != 0 {
                            return None;
                        }
                        let p = spread(internal[j - 1] - ia, &mins(&pre))?;
                        let q = spread(leaves[j - 1] - la, &mins(&post))?;
                        Some((p, Some((ia, la)), q))
                    })
                })
            } else {
                spread(internal[j - 1], &mins(&pre)).and_then(|p| spread(leaves[j - 1], &mins(&post)).map(|q| (p, None, q)))
            };
            let Some((p, a, q)) = found else { continue 'switch };
            for (k, amount) in pre.iter().zip(p) {
                visits[*k].internal = amount;
            }
            for (k, amount) in post.iter().zip(q) {
                visits[*k].leaves = amount;
            }
            if let Some((ia, la)) = a {
                visits[h].internal = ia;
                visits[h].leaves = la;
            }
        }
        return Some(visits);
    }
    None
}

#[derive(Clone, Debug)]
pub(crate) struct OddPlan {
    pub script: TransferScript,
    pub built: RootedTree,
    /// Root child counts and the chain counts, for the trace.
    pub levels: Vec<Vec<usize>>,
}

/// Context after the first transfer `0 → N`, which leaves `m` children at the root.
fn first_context(n_minus_1: usize, m: usize) -> Result<(TransferContext, TransferStep), ConstructError> {
    let top = n_minus_1 as u32;
    let x = m.div_ceil(2) as u32;
    if m == 0 || x > top - x {
        return Err(ConstructError::Schedule(format!("root degree {m} leaves nothing to transfer")));
    }
    let run = LabelRun::new(x, top - x);
    let first = TransferStep::type1(0, top, run);
    let state = star_state(n_minus_1).map_err(|e| ConstructError::Schedule(e.to_string()))?.apply(&first).map_err(|e| ConstructError::Schedule(e.to_string()))?;
    let vlist: Vec<u32> =
        (1..=n_minus_1).map(|i| pattern_label(Pattern::Falling, top as i64, 0, i) as u32).collect();
    let ctx = make_context(&state, vlist, top as i64, 0, x as i64, (top - x) as i64)
        .map_err(|e| ConstructError::Schedule(e.to_string()))?;
    Ok((ctx, first))
}

pub(crate) fn plan_odd(tree: &RootedTree) -> Result<OddPlan, ConstructError> {
    let kids = root_children(tree)?;
    let m = kids.len();
    let groups: Vec<Group> = kids.iter().map(|c| c.group).collect();
    let internal: Vec<usize> = kids.iter().map(|c| c.internal.len()).collect();
    let leaves: Vec<usize> = kids.iter().map(|c| c.leaves).collect();
    let mut visits = None;
    for route in [pass_route(&groups), (1..=m).collect()] {
        if let Some(v) = schedule(&route, &internal, &leaves) {
            visits = Some(v);
            break;
        }
    }
    let visits = visits.ok_or_else(|| ConstructError::Schedule("no leave-behind schedule fits the parity constraints".into()))?;

    // internal grandchildren in the order they are left behind
    let mut queues: Vec<std::collections::VecDeque<usize>> =
        kids.iter().map(|c| c.internal.iter().map(|&(_, k)| k).collect()).collect();
    let mut chain = Vec::new();
    for v in &visits {
        for _ in 0..v.internal {
            chain.push(queues[v.index - 1].pop_front().expect("schedule matches counts"));
        }
    }
    let k = chain.len();
    let mut hops: Vec<Hop> = visits.iter().map(|v| Hop { index: v.index, leave: v.internal + v.leaves }).collect();
    for (i, &c) in chain.iter().enumerate().take(k.saturating_sub(1)) {
        hops.push(Hop { index: m + 1 + i, leave: c });
    }
    let (ctx, first) = first_context(tree.len() - 1, m)?;
    let out = execute_walk(&ctx, &hops, m + k).map_err(|e| ConstructError::Schedule(e.to_string()))?;
    let mut steps = vec![first];
    steps.extend(out.script.steps);
    let levels = vec![
        vec![m],
        kids.iter().map(|c| c.internal.len() + c.leaves).collect(),
        chain,
    ];
    Ok(OddPlan { script: TransferScript::new(steps), built: out.state.tree().clone(), levels })
}
