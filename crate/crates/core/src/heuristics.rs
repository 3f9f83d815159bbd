//! Feasible-solution generators.
//!
//! * [`heuristic_h`]: relocate the blocker to the column with the smallest
//!   minimum larger than itself (a good column); if none exists, to the
//!   column whose minimum is largest.
//! * [`tree_heuristic`]: branch on the `L` best columns of that ranking and
//!   keep the cheapest completion.
//! * [`myopic_heuristic`]: the H rule when labels above the known set are
//!   hidden until the reveal time.
//! * [`nearest_relocation`]: baseline that moves the blocker to the closest
//!   column with room.

use thiserror::Error;

use crate::bay::{Bay, Label, MoveEvent, EMPTY_MIN};
use crate::bounds::s0;
use crate::stochastic::TwoStageInstance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("no column can receive container {container}; every other column is full")]
    NoDestination { container: Label },
    #[error("branch width must be at least 1")]
    ZeroWidth,
}

/// Relocation count and the full move sequence (retrievals included).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicResult {
    pub relocations: u32,
    pub moves: Vec<MoveEvent>,
}

/// Number of candidate columns TH-L branches on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchWidth(usize);

impl BranchWidth {
    pub fn new(width: usize) -> Result<BranchWidth, HeuristicError> {
        if width == 0 {
            Err(HeuristicError::ZeroWidth)
        } else {
            Ok(BranchWidth(width))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Destination columns for relocating `container` out of `source`, best
/// first: good columns by increasing minimum, then bad columns by
/// decreasing minimum. Full columns are skipped; ties go to the lower index.
pub fn ranked_columns(bay: &Bay, container: Label, source: usize) -> Vec<usize> {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for c in 0..bay.columns() {
        if c == source || bay.is_full(c) {
            continue;
        }
        let m = bay.column_min(c);
        if m > container {
            good.push((m, c));
        } else {
            bad.push((m, c));
        }
    }
    good.sort_by_key(|&(m, c)| (m, c));
    bad.sort_by_key(|&(m, c)| (std::cmp::Reverse(m), c));
    good.into_iter().chain(bad).map(|(_, c)| c).collect()
}

/// The column chosen by H, without building the full ranking.
#[inline]
pub fn h_destination(bay: &Bay, container: Label, source: usize) -> Option<usize> {
    let mut best_good: Option<(Label, usize)> = None;
    let mut best_bad: Option<(Label, usize)> = None;
    for c in 0..bay.columns() {
        if c == source || bay.is_full(c) {
            continue;
        }
        let m = bay.column_min(c);
        if m > container {
            if best_good.map_or(true, |(bm, _)| m < bm) {
                best_good = Some((m, c));
            }
        } else if best_bad.map_or(true, |(bm, _)| m > bm) {
            best_bad = Some((m, c));
        }
    }
    best_good.or(best_bad).map(|(_, c)| c)
}

fn run_greedy(
    bay: &Bay,
    mut record: Option<&mut Vec<MoveEvent>>,
    mut choose: impl FnMut(&Bay, Label, usize) -> Option<usize>,
) -> Result<u32, HeuristicError> {
    let mut bay = bay.clone();
    let mut relocations = 0;
    loop {
        match record.as_deref_mut() {
            Some(out) => bay.pop_retrievable_into(out),
            None => bay.pop_retrievable(),
        };
        let Some((r, from)) = bay.blocking_container() else {
            return Ok(relocations);
        };
        let to = choose(&bay, r, from).ok_or(HeuristicError::NoDestination { container: r })?;
        bay.relocate_top(from, to);
        if let Some(out) = record.as_deref_mut() {
            out.push(MoveEvent::Relocate {
                container: r,
                from,
                to,
            });
        }
        relocations += 1;
    }
}

/// Heuristic H with its move sequence.
pub fn heuristic_h(bay: &Bay) -> Result<HeuristicResult, HeuristicError> {
    let mut moves = Vec::new();
    let relocations = run_greedy(bay, Some(&mut moves), h_destination)?;
    Ok(HeuristicResult { relocations, moves })
}

/// Relocation count of heuristic H only.
pub fn h_relocations(bay: &Bay) -> Result<u32, HeuristicError> {
    run_greedy(bay, None, h_destination)
}

/// Baseline: move the blocker to the closest column with room, ties toward
/// the lower index.
pub fn nearest_relocation(bay: &Bay) -> Result<HeuristicResult, HeuristicError> {
    let mut moves = Vec::new();
    let relocations = run_greedy(bay, Some(&mut moves), |b, _, from| {
        (0..b.columns())
            .filter(|&c| c != from && !b.is_full(c))
            .min_by_key(|&c| (c.abs_diff(from), c))
    })?;
    Ok(HeuristicResult { relocations, moves })
}

/// Default node cap of the tree heuristic.
pub const TREE_NODE_CAP: usize = 2_000_000;

/// TH-L with the default node cap.
pub fn tree_heuristic(bay: &Bay, width: BranchWidth) -> Result<HeuristicResult, HeuristicError> {
    tree_heuristic_capped(bay, width, TREE_NODE_CAP)
}

/// TH-L: depth-first over the first `width` ranked columns at every
/// relocation. The first leaf reached is the H solution, so the result never
/// exceeds `z_H`. Subtrees whose relocations so far plus `S_0` cannot beat
/// the incumbent are skipped. Once `node_cap` nodes have been expanded the
/// remaining branches are completed greedily with H.
pub fn tree_heuristic_capped(
    bay: &Bay,
    width: BranchWidth,
    node_cap: usize,
) -> Result<HeuristicResult, HeuristicError> {
    let mut search = TreeSearch {
        width: width.get(),
        node_cap,
        nodes: 0,
        path: Vec::new(),
        best: None,
    };
    search.descend(bay.clone(), 0);
    match search.best {
        Some((relocations, moves)) => Ok(HeuristicResult { relocations, moves }),
        None => {
            // Every branch dead-ended; report the blocker H got stuck on.
            heuristic_h(bay)
        }
    }
}

struct TreeSearch {
    width: usize,
    node_cap: usize,
    nodes: usize,
    path: Vec<MoveEvent>,
    best: Option<(u32, Vec<MoveEvent>)>,
}

impl TreeSearch {
    fn descend(&mut self, mut bay: Bay, relocations: u32) {
        let mark = self.path.len();
        bay.pop_retrievable_into(&mut self.path);
        let Some((r, from)) = bay.blocking_container() else {
            if self.best.as_ref().map_or(true, |(z, _)| relocations < *z) {
                self.best = Some((relocations, self.path.clone()));
            }
            self.path.truncate(mark);
            return;
        };
        if let Some((z, _)) = &self.best {
            if relocations + s0(&bay) >= *z {
                self.path.truncate(mark);
                return;
            }
        }
        self.nodes += 1;
        let width = if self.nodes > self.node_cap { 1 } else { self.width };
        for to in ranked_columns(&bay, r, from).into_iter().take(width) {
            let mut child = bay.clone();
            child.relocate_top(from, to);
            self.path.push(MoveEvent::Relocate {
                container: r,
                from,
                to,
            });
            self.descend(child, relocations + 1);
            self.path.pop();
        }
        self.path.truncate(mark);
    }
}

/// How labels look to a decision maker who only knows `1..=known` before
/// the reveal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mask {
    pub known: Label,
    /// Value shown for every unknown container (`N + 1`).
    pub unknown: Label,
    /// Minimum assigned to an empty column (`N + 2`).
    pub empty: Label,
}

impl Mask {
    pub fn new(known: usize, containers: usize) -> Mask {
        Mask {
            known: known as Label,
            unknown: containers as Label + 1,
            empty: containers as Label + 2,
        }
    }

    #[inline]
    pub fn view(&self, label: Label) -> Label {
        if label > self.known {
            self.unknown
        } else {
            label
        }
    }

    /// Column minimum as seen through the mask.
    pub fn column_min(&self, bay: &Bay, column: usize) -> Label {
        match bay.column_min(column) {
            EMPTY_MIN => self.empty,
            m => self.view(m),
        }
    }

    pub fn is_known(&self, label: Label) -> bool {
        label <= self.known
    }
}

/// H rule under a mask. Equal visible minima prefer the emptier column,
/// then the lower index.
pub fn masked_destination(bay: &Bay, mask: &Mask, container: Label, source: usize) -> Option<usize> {
    let r = mask.view(container);
    let mut best_good: Option<(Label, usize, usize)> = None;
    let mut best_bad: Option<(Label, usize, usize)> = None;
    for c in 0..bay.columns() {
        if c == source || bay.is_full(c) {
            continue;
        }
        let m = mask.column_min(bay, c);
        let h = bay.height(c);
        if m > r {
            if best_good.map_or(true, |(bm, bh, _)| (m, h) < (bm, bh)) {
                best_good = Some((m, h, c));
            }
        } else if best_bad.map_or(true, |(bm, bh, _)| m > bm || (m == bm && h < bh)) {
            best_bad = Some((m, h, c));
        }
    }
    best_good.or(best_bad).map(|(_, _, c)| c)
}

/// Myopic heuristic on one realized scenario: the instance's bay carries
/// the true labels, but decisions before the reveal time only see the mask.
///
/// Time starts at 1 and every move (or idle step while the target is not
/// yet due) takes one step; container `n` may leave at time `n` or later.
pub fn myopic_heuristic(instance: &TwoStageInstance) -> Result<HeuristicResult, HeuristicError> {
    let mask = instance.mask();
    let t_star = instance.t_star();
    let mut bay = instance.bay().clone();
    let mut moves = Vec::new();
    let mut relocations = 0;
    let mut time = 1usize;
    while let Some((target, tc, tt)) = bay.target_position() {
        if tt + 1 == bay.height(tc) {
            if target as usize <= time {
                bay.pop(tc);
                moves.push(MoveEvent::Retrieve {
                    container: target,
                    from: tc,
                });
            }
            time += 1;
            continue;
        }
        let r = bay.top(tc).expect("target is blocked");
        let to = if time < t_star {
            masked_destination(&bay, &mask, r, tc)
        } else {
            h_destination(&bay, r, tc)
        }
        .ok_or(HeuristicError::NoDestination { container: r })?;
        bay.relocate_top(tc, to);
        moves.push(MoveEvent::Relocate {
            container: r,
            from: tc,
            to,
        });
        relocations += 1;
        time += 1;
    }
    Ok(HeuristicResult { relocations, moves })
}
