//! Count patterns, the catalog of attainable and nicely attainable rows, and
//! their realization as transfer walks.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{CountClass, Dfa};
use crate::transfer::{replay_script, ReplayError, TransferContext, TransferScript};
use crate::walk::{plan_walk, Hop, WalkError};

/// Nicely attainable rows, over the automaton alphabet.
pub const NICELY: &str = "o|eoooe|eoeeoe|eE(oo)*Ee";
/// Attainable sequences: nicely attainable blocks followed by one terminal block.
pub const ATTAIN: &str = "(o|eoooe|eoeeoe|eE(oo)*Ee)*(o|eoooe|eoeeoe|eE(oo)*Ee|e+|eEeo|eE(oo)*)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CountSymbol {
    /// Positive odd.
    O,
    /// Positive even.
    E,
    /// Non-negative even.
    E0,
}

impl CountSymbol {
    pub fn matches(self, n: usize) -> bool {
        match self {
            CountSymbol::O => n % 2 == 1,
            CountSymbol::E => n % 2 == 0 && n >= 2,
            CountSymbol::E0 => n % 2 == 0,
        }
    }

    fn regex(self) -> &'static str {
        match self {
            CountSymbol::O => "o",
            CountSymbol::E => "e",
            CountSymbol::E0 => "E",
        }
    }
}

impl fmt::Display for CountSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountSymbol::O => "o",
            CountSymbol::E => "e",
            CountSymbol::E0 => "e0",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PatternItem {
    One(CountSymbol),
    /// `body` repeated at least `min` times.
    Repeat { body: Vec<CountSymbol>, min: usize },
}

/// A row shape such as `e,e0,(o,o)*,e0,e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountPattern {
    pub items: Vec<PatternItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad count pattern '{text}': {message}")]
pub struct CountPatternError {
    pub text: String,
    pub message: String,
}

fn symbol(text: &str) -> Option<CountSymbol> {
    match text.trim() {
        "o" | "O" => Some(CountSymbol::O),
        "e" | "E" => Some(CountSymbol::E),
        "e0" | "E0" | "e/0" => Some(CountSymbol::E0),
        _ => None,
    }
}

/// Parses `o`, `e`, `e0` separated by commas; `(x,y)*`, `x*` and `x+` repeat.
impl FromStr for CountPattern {
    type Err = CountPatternError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |message: &str| CountPatternError { text: text.to_string(), message: message.into() };
        let mut items = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let (body, tail) = if let Some(inner) = rest.strip_prefix('(') {
                let close = inner.find(')').ok_or_else(|| err("unclosed '('"))?;
                let body: Option<Vec<CountSymbol>> = inner[..close].split(',').map(symbol).collect();
                (body.ok_or_else(|| err("unknown symbol in group"))?, &inner[close + 1..])
            } else {
                let end = rest.find([',', '*', '+']).unwrap_or(rest.len());
                let s = symbol(&rest[..end]).ok_or_else(|| err(&format!("unknown symbol '{}'", rest[..end].trim())))?;
                (vec![s], &rest[end..])
            };
            let (item, tail) = match tail.chars().next() {
                Some('*') => (PatternItem::Repeat { body, min: 0 }, &tail[1..]),
                Some('+') => (PatternItem::Repeat { body, min: 1 }, &tail[1..]),
                _ if body.len() == 1 => (PatternItem::One(body[0]), tail),
                _ => return Err(err("group needs '*' or '+'")),
            };
            items.push(item);
            let tail = tail.trim_start();
            rest = match tail.strip_prefix(',') {
                Some(t) => t.trim_start(),
                None if tail.is_empty() => tail,
                None => return Err(err("expected ','")),
            };
        }
        if items.is_empty() {
            return Err(err("empty pattern"));
        }
        Ok(CountPattern { items })
    }
}

impl fmt::Display for CountPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match item {
                PatternItem::One(s) => write!(f, "{s}")?,
                PatternItem::Repeat { body, min } => {
                    let star = if *min == 0 { '*' } else { '+' };
                    if body.len() == 1 {
                        write!(f, "{}{star}", body[0])?;
                    } else {
                        let parts: Vec<String> = body.iter().map(|s| s.to_string()).collect();
                        write!(f, "({}){star}", parts.join(","))?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl CountPattern {
    fn regex(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            match item {
                PatternItem::One(s) => out.push_str(s.regex()),
                PatternItem::Repeat { body, min } => {
                    let b: String = body.iter().map(|s| s.regex()).collect();
                    for _ in 0..*min {
                        out.push_str(&b);
                    }
                    out.push_str(&format!("({b})*"));
                }
            }
        }
        out
    }

    /// The concrete symbol list of length `len`, if the pattern has one.
    pub fn expand(&self, len: usize) -> Option<Vec<CountSymbol>> {
        let fixed: usize = self
            .items
            .iter()
            .map(|i| match i {
                PatternItem::One(_) => 1,
                PatternItem::Repeat { body, min } => body.len() * min,
            })
            .sum();
        let repeats: Vec<usize> = self
            .items
            .iter()
            .enumerate()
            .filter(|(_, i)| matches!(i, PatternItem::Repeat { .. }))
            .map(|(k, _)| k)
            .collect();
        if len < fixed {
            return None;
        }
        let mut extra = vec![0; self.items.len()];
        let mut spare = len - fixed;
        // all the slack goes to the first repeat whose body divides it
        if spare > 0 {
            let k = repeats.iter().copied().find(|&k| match &self.items[k] {
                PatternItem::Repeat { body, .. } => spare % body.len() == 0,
                _ => false,
            })?;
            if let PatternItem::Repeat { body, .. } = &self.items[k] {
                extra[k] = spare / body.len();
                spare = 0;
            }
        }
        debug_assert_eq!(spare, 0);
        let mut out = Vec::with_capacity(len);
        for (k, item) in self.items.iter().enumerate() {
            match item {
                PatternItem::One(s) => out.push(*s),
                PatternItem::Repeat { body, min } => {
                    for _ in 0..min + extra[k] {
                        out.extend_from_slice(body);
                    }
                }
            }
        }
        Some(out)
    }
}

pub fn match_pattern(counts: &[usize], pattern: &CountPattern) -> bool {
    let dfa = Dfa::new(&[("p", &pattern.regex())]).expect("patterns compile");
    let word: Vec<CountClass> = counts.iter().map(|&c| CountClass::of(c)).collect();
    dfa.matches(&word, 0)
}

/// Rows of the catalog. `N*` rows are nicely attainable, `A*` rows attainable only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CatalogRow {
    /// `o`
    N1,
    /// `e,o,o,o,e`
    N2,
    /// `e,o,e,e,o,e`
    N3,
    /// `e,e0,(o,o)*,e0,e`
    N4,
    /// `e+`
    A1,
    /// `e,e0,e,o`
    A2,
    /// `e,e0,(o,o)*`
    A3,
}

impl CatalogRow {
    pub const ALL: [CatalogRow; 7] =
        [CatalogRow::N1, CatalogRow::N2, CatalogRow::N3, CatalogRow::N4, CatalogRow::A1, CatalogRow::A2, CatalogRow::A3];

    pub fn is_nicely(self) -> bool {
        matches!(self, CatalogRow::N1 | CatalogRow::N2 | CatalogRow::N3 | CatalogRow::N4)
    }

    pub fn pattern(self) -> CountPattern {
        let text = match self {
            CatalogRow::N1 => "o",
            CatalogRow::N2 => "e,o,o,o,e",
            CatalogRow::N3 => "e,o,e,e,o,e",
            CatalogRow::N4 => "e,e0,(o,o)*,e0,e",
            CatalogRow::A1 => "e+",
            CatalogRow::A2 => "e,e0,e,o",
            CatalogRow::A3 => "e,e0,(o,o)*",
        };
        text.parse().expect("catalog patterns parse")
    }

    /// Source indices (1-based, relative to the block) in visit order and the
    /// vertex after the last source: the handoff for nicely rows used inside a
    /// plan, the final holder otherwise.
    pub fn walk(self, len: usize, as_final: bool) -> (Vec<usize>, usize) {
        let (mut sources, handoff) = match self {
            CatalogRow::N1 => (vec![1], 2),
            CatalogRow::N2 => (vec![1, 4, 3, 2, 5], 6),
            CatalogRow::N3 => (vec![1, 4, 5, 2, 3, 6], 7),
            CatalogRow::N4 => {
                let mut s = vec![1, 2, 1];
                let mut i = 4;
                while i <= len {
                    s.push(i);
                    s.push(i - 1);
                    i += 2;
                }
                s.push(len);
                (s, len + 1)
            }
            CatalogRow::A1 => {
                if len == 1 {
                    return (Vec::new(), 1);
                }
                let mut s: Vec<usize> = (1..=len).collect();
                s.extend((2..len).rev());
                return (s, 1);
            }
            CatalogRow::A2 => return (vec![1, 2, 1, 4], 3),
            CatalogRow::A3 => {
                if len == 2 {
                    return (vec![1, 2], 1);
                }
                let mut s = vec![1, 2, 1];
                for j in (4..=len).step_by(2) {
                    s.push(j);
                    if j < len {
                        s.push(j - 1);
                    }
                }
                return (s, len - 1);
            }
        };
        debug_assert!(self.is_nicely());
        if as_final {
            let last = sources.pop().expect("rows have sources");
            return (sources, last);
        }
        (sources, handoff)
    }
}

impl fmt::Display for CatalogRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pattern())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    /// 0-based offset into the count sequence.
    pub start: usize,
    pub len: usize,
    pub row: CatalogRow,
    /// Whether the block hands off to the next one (false for the terminal block).
    pub nicely: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BlockPlan {
    pub blocks: Vec<Block>,
}

impl fmt::Display for BlockPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("[{}..{}) {}{}", b.start, b.start + b.len, b.row, if b.nicely { "" } else { " (final)" }))
            .collect();
        f.write_str(&parts.join(" | "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("counts do not decompose into catalog rows; longest nicely attainable prefix covers {matched} of {len} entries")]
pub struct DecomposeError {
    pub matched: usize,
    pub len: usize,
}

fn row_dfa(row: CatalogRow) -> &'static Dfa {
    static DFAS: OnceLock<Vec<Dfa>> = OnceLock::new();
    let all = DFAS.get_or_init(|| {
        CatalogRow::ALL.iter().map(|r| Dfa::new(&[("row", &r.pattern().regex())]).expect("catalog compiles")).collect()
    });
    &all[row as usize]
}

/// Prefix lengths of `counts` matching `row`, longest first.
fn row_lengths(row: CatalogRow, counts: &[usize]) -> Vec<usize> {
    let dfa = row_dfa(row);
    let dead = dfa.dead_states();
    let mut q = dfa.start();
    let mut out = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        q = dfa.step(q, CountClass::of(c));
        if dead[q] {
            break;
        }
        if dfa.accepts(q, 0) {
            out.push(i + 1);
        }
    }
    out.reverse();
    out
}

/// Splits `counts` into nicely attainable rows and a terminal attainable row.
/// Longer blocks are tried first; on a dead end the split backtracks.
pub fn decompose(counts: &[usize]) -> Result<BlockPlan, DecomposeError> {
    if counts.is_empty() {
        return Err(DecomposeError { matched: 0, len: 0 });
    }
    let n = counts.len();
    let mut failed = vec![false; n + 1];
    let mut best = 0;
    let mut blocks = Vec::new();
    if solve(counts, 0, &mut failed, &mut best, &mut blocks) {
        blocks.reverse();
        Ok(BlockPlan { blocks })
    } else {
        Err(DecomposeError { matched: best, len: n })
    }
}

fn solve(counts: &[usize], pos: usize, failed: &mut [bool], best: &mut usize, out: &mut Vec<Block>) -> bool {
    if failed[pos] {
        return false;
    }
    let rest = &counts[pos..];
    let mut options: Vec<(usize, CatalogRow)> = Vec::new();
    for row in CatalogRow::ALL {
        for len in row_lengths(row, rest) {
            if row.is_nicely() || len == rest.len() {
                options.push((len, row));
            }
        }
    }
    options.sort_by(|a, b| b.0.cmp(&a.0));
    for (len, row) in options {
        if len == rest.len() {
            out.push(Block { start: pos, len, row, nicely: false });
            return true;
        }
        *best = (*best).max(pos + len);
        if solve(counts, pos + len, failed, best, out) {
            out.push(Block { start: pos, len, row, nicely: true });
            return true;
        }
    }
    failed[pos] = true;
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("counts sum to {sum} but the pool holds {pool} leaves")]
    Total { sum: usize, pool: usize },
    #[error("{needed} vertices needed, the context lists {have}")]
    TooFewVertices { needed: usize, have: usize },
    #[error("plan does not cover the counts")]
    BadPlan,
    #[error("v{index} needs {count} leaves but its visits require at least {needed} with parity {parity}")]
    LeaveBehind { index: usize, count: usize, needed: usize, parity: usize },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// The global walk of a plan: source visits and the final holder, as vlist indices.
pub fn plan_route(plan: &BlockPlan) -> (Vec<usize>, usize) {
    let mut sources = Vec::new();
    let mut last = 1;
    for b in &plan.blocks {
        let (s, end) = b.row.walk(b.len, !b.nicely);
        sources.extend(s.into_iter().map(|i| i + b.start));
        last = end + b.start;
    }
    (sources, last)
}

/// Chooses how many leaves each visit leaves behind: the least amount allowed
/// on every visit but the last one to a vertex, which takes the remainder.
pub fn assign_leaves(counts: &[usize], sources: &[usize], final_index: usize) -> Result<Vec<Hop>, RealizeError> {
    let m = counts.len();
    let mut last_visit = vec![None; m + 1];
    for (k, &i) in sources.iter().enumerate() {
        last_visit[i] = Some(k);
    }
    let mut given = vec![0usize; m + 1];
    let mut hops = Vec::with_capacity(sources.len());
    for (k, &i) in sources.iter().enumerate() {
        let prev = if k == 0 { 0 } else { sources[k - 1] };
        let next = sources.get(k + 1).copied().unwrap_or(final_index);
        let d = next.abs_diff(prev) / 2;
        let leave = if last_visit[i] == Some(k) && i != final_index {
            let rest = counts[i - 1].checked_sub(given[i]);
            match rest {
                Some(r) if r >= d && (r - d) % 2 == 0 => r,
                _ => return Err(RealizeError::LeaveBehind { index: i, count: counts[i - 1], needed: given[i] + d, parity: d % 2 }),
            }
        } else {
            d
        };
        given[i] += leave;
        hops.push(Hop { index: i, leave });
    }
    Ok(hops)
}

/// Builds the well-behaved script whose result is `counts`.
pub fn realize(ctx: &TransferContext, counts: &[usize], plan: &BlockPlan) -> Result<TransferScript, RealizeError> {
    let sum: usize = counts.iter().sum();
    if sum != ctx.pool_size() {
        return Err(RealizeError::Total { sum, pool: ctx.pool_size() });
    }
    if counts.len() > ctx.len() {
        return Err(RealizeError::TooFewVertices { needed: counts.len(), have: ctx.len() });
    }
    let covered: usize = plan.blocks.iter().map(|b| b.len).sum();
    if covered != counts.len() || plan.blocks.last().is_none_or(|b| b.nicely) {
        return Err(RealizeError::BadPlan);
    }
    let (sources, final_index) = plan_route(plan);
    if sources.is_empty() {
        return Ok(TransferScript::default());
    }
    let hops = assign_leaves(counts, &sources, final_index)?;
    let (script, held, _) = plan_walk(ctx, &hops, final_index)?;
    debug_assert_eq!(&held[1..=counts.len()], counts);
    Ok(script)
}

/// Replays `script` and counts the pool labels adjacent to each listed vertex
/// as children.
pub fn result_of(ctx: &TransferContext, script: &TransferScript) -> Result<Vec<usize>, ReplayError> {
    let state = replay_script(&ctx.state, script)?;
    let pool = ctx.pool();
    Ok(ctx
        .vlist
        .iter()
        .map(|&v| state.child_labels(v).into_iter().filter(|&c| pool.contains(c)).count())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transfer::{make_context, star_state};

    fn pat(s: &str) -> CountPattern {
        s.parse().unwrap()
    }

    fn fig1_ctx(m: usize) -> TransferContext {
        let full = [0, 12, 1, 11, 2, 10, 3, 9, 4, 8, 5, 7, 6];
        make_context(&star_state(12).unwrap(), full[..m].to_vec(), 0, 13, 1, 12).unwrap()
    }

    #[test]
    fn pattern_matching() {
        assert!(match_pattern(&[4, 3, 5, 7, 2], &pat("e,o,o,o,e")));
        assert!(match_pattern(&[2, 0, 3, 3, 0, 2], &pat("e,e0,(o,o)*,e0,e")));
        assert!(!match_pattern(&[3, 2], &pat("o")));
        assert!(!match_pattern(&[2, 0, 3, 0, 2], &pat("e,e0,(o,o)*,e0,e")));
        assert!(!match_pattern(&[0], &pat("e")));
        assert!(match_pattern(&[0], &pat("e0")));
    }

    #[test]
    fn pattern_text_round_trip() {
        for row in CatalogRow::ALL {
            let p = row.pattern();
            assert_eq!(p.to_string().parse::<CountPattern>().unwrap(), p);
        }
        assert!("o,x".parse::<CountPattern>().is_err());
        assert!("(o,o".parse::<CountPattern>().is_err());
        assert!("".parse::<CountPattern>().is_err());
        assert_eq!(pat("e,e0,(o,o)*,e0,e").expand(6).unwrap().len(), 6);
        assert!(pat("e,e0,(o,o)*,e0,e").expand(5).is_none());
    }

    #[test]
    fn decompositions() {
        let p = decompose(&[3, 1, 3, 1, 4]).unwrap();
        let rows: Vec<CatalogRow> = p.blocks.iter().map(|b| b.row).collect();
        assert_eq!(rows, vec![CatalogRow::N1, CatalogRow::N1, CatalogRow::N1, CatalogRow::N1, CatalogRow::A1]);

        let p = decompose(&[2, 3, 3, 3, 2, 2, 2]).unwrap();
        assert_eq!(p.blocks[0].row, CatalogRow::N2);
        assert_eq!(p.blocks[1].row, CatalogRow::A1);
        assert_eq!(p.blocks[1].len, 2);

        assert_eq!(decompose(&[2, 1]).unwrap_err().matched, 0);
        let p = decompose(&[2, 2, 2, 2]).unwrap();
        assert_eq!(p.blocks.len(), 1);
    }

    #[test]
    fn routes() {
        assert_eq!(CatalogRow::N2.walk(5, false), (vec![1, 4, 3, 2, 5], 6));
        assert_eq!(CatalogRow::N4.walk(6, false), (vec![1, 2, 1, 4, 3, 6, 5, 6], 7));
        assert_eq!(CatalogRow::N4.walk(4, true), (vec![1, 2, 1, 4, 3], 4));
        assert_eq!(CatalogRow::A1.walk(3, true), (vec![1, 2, 3, 2], 1));
        assert_eq!(CatalogRow::A3.walk(2, true), (vec![1, 2], 1));
        assert_eq!(CatalogRow::A3.walk(6, true), (vec![1, 2, 1, 4, 3, 6], 5));
        assert_eq!(CatalogRow::A2.walk(4, true), (vec![1, 2, 1, 4], 3));
    }

    #[test]
    fn fig1_counts_realize() {
        let ctx = fig1_ctx(5);
        let counts = [3, 1, 3, 1, 4];
        let script = realize(&ctx, &counts, &decompose(&counts).unwrap()).unwrap();
        assert_eq!(script.to_string(), "0->12: 2..10\n12->1: 3..10\n1->11: 4..8\n11->2: 5..8\n");
        assert_eq!(result_of(&ctx, &script).unwrap(), counts);
    }

    #[test]
    fn single_odd_block() {
        let star = star_state(7).unwrap();
        let ctx = make_context(&star, vec![0, 7], 0, 8, 1, 7).unwrap();
        let counts = [3, 4];
        let script = realize(&ctx, &counts, &decompose(&counts).unwrap()).unwrap();
        assert_eq!(script.len(), 1);
        assert_eq!(script.steps[0].moved().len(), 4);
    }

    #[test]
    fn trivial_results() {
        let ctx = fig1_ctx(4);
        assert_eq!(result_of(&ctx, &TransferScript::default()).unwrap(), vec![12, 0, 0, 0]);
        let all: TransferScript = "0->12: 1..11".parse().unwrap();
        assert_eq!(result_of(&ctx, &all).unwrap(), vec![1, 11, 0, 0]);
    }

    #[test]
    fn realize_errors() {
        let ctx = fig1_ctx(5);
        let plan = decompose(&[3, 1, 3, 1, 3]).unwrap();
        assert!(matches!(realize(&ctx, &[3, 1, 3, 1, 3], &plan), Err(RealizeError::Total { .. })));
        let plan = decompose(&[2, 2, 2, 2, 2, 2]).unwrap();
        assert!(matches!(realize(&ctx, &[2, 2, 2, 2, 2, 2], &plan), Err(RealizeError::TooFewVertices { .. })));
    }
}
