//! Chains of type-1 transfers along a context's vertex list.

use thiserror::Error;

use crate::transfer::{LabelRun, LabeledState, ReplayError, TransferContext, TransferScript, TransferStep};

/// The run moved from `source` to `recipient` when `leave` leaves of `current`
/// stay at `source`. The leaves kept are split between both ends so that the
/// moved run sums to `source + recipient`.
pub fn trim_run(current: LabelRun, source: u32, recipient: u32, leave: usize) -> Option<LabelRun> {
    let delta = source as i64 + recipient as i64 - current.sum() as i64;
    let leave = leave as i64;
    if (leave + delta) % 2 != 0 {
        return None;
    }
    let x = (leave + delta) / 2;
    let y = (leave - delta) / 2;
    if x < 0 || y < 0 || leave >= current.len() as i64 {
        return None;
    }
    Some(LabelRun::new(current.start + x as u32, current.end - y as u32))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError {
    #[error("walk has no hops")]
    Empty,
    #[error("walk starts at v{0}, not v1")]
    BadStart(usize),
    #[error("index {0} is outside the vertex list")]
    OutOfRange(usize),
    #[error("hop {hop}: cannot leave {leave} of {current} at v{from} when moving to v{to}")]
    Trim { hop: usize, from: usize, to: usize, leave: usize, current: LabelRun },
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

/// One visit of the walk: transfer out of `v_index`, keeping `leave` leaves there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub index: usize,
    pub leave: usize,
}

#[derive(Clone, Debug)]
pub struct WalkOutcome {
    pub script: TransferScript,
    pub state: LabeledState,
    /// Leaves held by each `v_i` once the walk ends, 1-based (entry 0 unused).
    pub held: Vec<usize>,
    /// The run that stays at the final vertex.
    pub last_run: LabelRun,
}

/// Runs the walk `hops[0] → hops[1] → … → final_index` starting from the pool at `v1`.
pub fn execute_walk(ctx: &TransferContext, hops: &[Hop], final_index: usize) -> Result<WalkOutcome, WalkError> {
    let (script, held, last_run) = plan_walk(ctx, hops, final_index)?;
    let state = crate::transfer::replay_script(&ctx.state, &script)?;
    Ok(WalkOutcome { script, state, held, last_run })
}

/// Computes the transfer script of a walk without touching the tree.
pub fn plan_walk(
    ctx: &TransferContext,
    hops: &[Hop],
    final_index: usize,
) -> Result<(TransferScript, Vec<usize>, LabelRun), WalkError> {
    let first = hops.first().ok_or(WalkError::Empty)?;
    if first.index != 1 {
        return Err(WalkError::BadStart(first.index));
    }
    let m = ctx.len();
    let label = |i: usize| -> Result<u32, WalkError> {
        if i == 0 || i > m {
            Err(WalkError::OutOfRange(i))
        } else {
            Ok(ctx.vlist[i - 1])
        }
    };
    let mut held = vec![0; m + 1];
    let mut current = ctx.pool();
    let mut steps = Vec::with_capacity(hops.len());
    for (k, hop) in hops.iter().enumerate() {
        let to = hops.get(k + 1).map_or(final_index, |h| h.index);
        let (u, v) = (label(hop.index)?, label(to)?);
        let moved = trim_run(current, u, v, hop.leave).ok_or(WalkError::Trim {
            hop: k,
            from: hop.index,
            to,
            leave: hop.leave,
            current,
        })?;
        held[hop.index] += hop.leave;
        steps.push(TransferStep::type1(u, v, moved));
        current = moved;
    }
    label(final_index)?;
    held[final_index] += current.len();
    Ok((TransferScript::new(steps), held, current))
}
