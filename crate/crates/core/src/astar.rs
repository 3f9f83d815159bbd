//! Anytime tree search for the restricted CRP.
//!
//! Nodes are bays reached after `l` relocations (retrievals are applied
//! eagerly whenever the target is on top). Levels are expanded breadth
//! first. Each visited node gets cumulative bounds `L = S + l` and
//! `U = R + l`; a node stops branching when `U <= L` or `L >= z_A`. The
//! search stops as soon as `node_budget` children have been generated, and
//! the certified gap is `z_A - L_min` over the leaves left open.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bay::{Bay, Label, MoveEvent};
use crate::bounds::{s_p, LookAhead};
use crate::heuristics::{
    heuristic_h, h_relocations, ranked_columns, tree_heuristic, BranchWidth, HeuristicResult,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("node budget must be at least 1")]
    BudgetZero,
    #[error("budgets must be sorted ascending")]
    UnsortedBudgets,
}

/// Heuristic used as the local upper bound `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpperBound {
    H,
    Tree(usize),
}

impl UpperBound {
    fn relocations(&self, bay: &Bay) -> Option<u32> {
        match *self {
            UpperBound::H => h_relocations(bay).ok(),
            UpperBound::Tree(w) => tree_heuristic(bay, BranchWidth::new(w).ok()?)
                .ok()
                .map(|r| r.relocations),
        }
    }

    fn solution(&self, bay: &Bay) -> Option<HeuristicResult> {
        match *self {
            UpperBound::H => heuristic_h(bay).ok(),
            UpperBound::Tree(w) => tree_heuristic(bay, BranchWidth::new(w).ok()?).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of tree nodes generated (the root is free).
    pub node_budget: usize,
    pub lower_bound: LookAhead,
    pub upper_bound: UpperBound,
    /// Skip children whose bay was already generated. Off by default: node
    /// counts are those of a pure tree.
    pub deduplicate: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            node_budget: 1_000_000,
            lower_bound: LookAhead::FULL,
            upper_bound: UpperBound::H,
            deduplicate: false,
        }
    }
}

impl SolverConfig {
    pub fn with_budget(mut self, node_budget: usize) -> SolverConfig {
        self.node_budget = node_budget;
        self
    }

    pub fn with_lower_bound(mut self, lower_bound: LookAhead) -> SolverConfig {
        self.lower_bound = lower_bound;
        self
    }

    pub fn with_upper_bound(mut self, upper_bound: UpperBound) -> SolverConfig {
        self.upper_bound = upper_bound;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    /// Best incumbent `z_A`.
    pub relocations: u32,
    /// Moves realizing the incumbent, retrievals included.
    pub moves: Vec<MoveEvent>,
    /// Certified gap `z_A - L_min`.
    pub gap: u32,
    /// Smallest open cumulative lower bound (equals `z_A` when optimal).
    pub lower_bound: u32,
    /// Children generated.
    pub nodes: usize,
    /// Deepest level reached.
    pub depth: u32,
    pub budget_exhausted: bool,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.gap == 0
    }
}

/// What happened at a node, for the optional trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceAction {
    /// Rule (i): `L = U`.
    PruneBoundsMet,
    /// Rule (ii): `L >= z_A`.
    PruneIncumbent,
    Branch,
    /// Budget ran out while branching this node.
    Cut,
    /// Nothing left to branch on.
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub level: u32,
    pub bay_hash: u64,
    pub lower: u32,
    pub upper: u32,
    pub action: TraceAction,
}

/// Trace as CSV with header `level,bay-hash,L,U,action`.
pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("level,bay-hash,L,U,action\n");
    for r in trace {
        let action = match r.action {
            TraceAction::PruneBoundsMet => "prune_bounds_met",
            TraceAction::PruneIncumbent => "prune_incumbent",
            TraceAction::Branch => "branch",
            TraceAction::Cut => "cut",
            TraceAction::Leaf => "leaf",
        };
        out.push_str(&format!(
            "{},{:016x},{},{},{}\n",
            r.level, r.bay_hash, r.lower, r.upper, action
        ));
    }
    out
}

fn bay_hash(bay: &Bay) -> u64 {
    let mut h = DefaultHasher::new();
    bay.hash(&mut h);
    h.finish()
}

#[derive(Clone, Copy)]
struct Link {
    parent: u32,
    relocation: Option<(Label, u16, u16)>,
}

struct Open {
    id: u32,
    bay: Bay,
    lower: u32,
}

const NO_UPPER: u32 = u32::MAX;

/// Snapshot of the search taken when the generated-node count first reaches
/// a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapPoint {
    pub budget: usize,
    pub incumbent: u32,
    pub lower_bound: u32,
    pub gap: u32,
}

struct Search<'a> {
    config: SolverConfig,
    links: Vec<Link>,
    incumbent: u32,
    incumbent_node: Option<(u32, Bay)>,
    trace: Option<&'a mut Vec<TraceRecord>>,
    checkpoints: &'a [usize],
    next_checkpoint: usize,
    points: Vec<GapPoint>,
    seen: HashSet<Bay>,
}

impl Search<'_> {
    fn lower(&self, bay: &Bay, level: u32) -> u32 {
        s_p(bay, self.config.lower_bound) + level
    }

    fn record(&mut self, level: u32, bay: &Bay, lower: u32, upper: u32, action: TraceAction) {
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(TraceRecord {
                level,
                bay_hash: bay_hash(bay),
                lower,
                upper,
                action,
            });
        }
    }

    fn open_min(&self, pending: &[Open], next: &[Open], cut: Option<u32>) -> u32 {
        pending
            .iter()
            .chain(next)
            .map(|n| n.lower)
            .chain(cut)
            .min()
            .unwrap_or(self.incumbent)
            .min(self.incumbent)
    }

    fn snapshot(&mut self, generated: usize, pending: &[Open], next: &[Open], cut: u32) {
        while self.next_checkpoint < self.checkpoints.len()
            && self.checkpoints[self.next_checkpoint] <= generated
        {
            let lower = self.open_min(pending, next, Some(cut));
            self.points.push(GapPoint {
                budget: self.checkpoints[self.next_checkpoint],
                incumbent: self.incumbent,
                lower_bound: lower,
                gap: self.incumbent - lower,
            });
            self.next_checkpoint += 1;
        }
    }

    fn run(&mut self, bay: &Bay) -> SolveOutcome {
        let mut root = bay.clone();
        root.pop_retrievable();
        self.links.push(Link {
            parent: u32::MAX,
            relocation: None,
        });
        let root_lower = self.lower(&root, 0);
        if self.config.deduplicate {
            self.seen.insert(root.clone());
        }
        let mut current = vec![Open {
            id: 0,
            bay: root,
            lower: root_lower,
        }];
        let mut generated = 0usize;
        let mut level = 0u32;
        let mut open_lower: Option<u32> = None;
        let budget = self.config.node_budget;

        'levels: while !current.is_empty() {
            let mut next: Vec<Open> = Vec::new();
            let mut pending = std::mem::take(&mut current).into_iter();
            while let Some(node) = pending.next() {
                let upper = self
                    .config
                    .upper_bound
                    .relocations(&node.bay)
                    .map_or(NO_UPPER, |r| r + level);
                if upper < self.incumbent {
                    self.incumbent = upper;
                    self.incumbent_node = Some((node.id, node.bay.clone()));
                }
                if upper <= node.lower {
                    self.record(level, &node.bay, node.lower, upper, TraceAction::PruneBoundsMet);
                    continue;
                }
                if node.lower >= self.incumbent {
                    self.record(level, &node.bay, node.lower, upper, TraceAction::PruneIncumbent);
                    continue;
                }
                let Some((r, from)) = node.bay.blocking_container() else {
                    self.record(level, &node.bay, node.lower, upper, TraceAction::Leaf);
                    continue;
                };
                let targets = ranked_columns(&node.bay, r, from);
                if targets.is_empty() {
                    self.record(level, &node.bay, node.lower, upper, TraceAction::Leaf);
                    continue;
                }
                for to in targets {
                    if generated >= budget {
                        let rest: Vec<Open> = pending.collect();
                        self.snapshot(generated, &rest, &next, node.lower);
                        open_lower = Some(self.open_min(&rest, &next, Some(node.lower)));
                        self.record(level, &node.bay, node.lower, upper, TraceAction::Cut);
                        break 'levels;
                    }
                    if self.next_checkpoint < self.checkpoints.len()
                        && self.checkpoints[self.next_checkpoint] <= generated
                    {
                        let rest: Vec<Open> = pending.clone_open();
                        self.snapshot(generated, &rest, &next, node.lower);
                    }
                    let mut child = node.bay.clone();
                    child.relocate_top(from, to);
                    child.pop_retrievable();
                    if self.config.deduplicate && !self.seen.insert(child.clone()) {
                        continue;
                    }
                    generated += 1;
                    let id = self.links.len() as u32;
                    self.links.push(Link {
                        parent: node.id,
                        relocation: Some((r, from as u16, to as u16)),
                    });
                    let lower = self.lower(&child, level + 1);
                    next.push(Open {
                        id,
                        bay: child,
                        lower,
                    });
                }
                self.record(level, &node.bay, node.lower, upper, TraceAction::Branch);
            }
            current = next;
            if !current.is_empty() {
                level += 1;
            }
        }

        let lower_bound = open_lower.unwrap_or(self.incumbent);
        // Remaining checkpoints see the final state.
        while self.next_checkpoint < self.checkpoints.len() {
            self.points.push(GapPoint {
                budget: self.checkpoints[self.next_checkpoint],
                incumbent: self.incumbent,
                lower_bound,
                gap: self.incumbent - lower_bound,
            });
            self.next_checkpoint += 1;
        }
        let moves = self.incumbent_moves(bay);
        SolveOutcome {
            relocations: self.incumbent,
            moves,
            gap: self.incumbent - lower_bound,
            lower_bound,
            nodes: generated,
            depth: level,
            budget_exhausted: open_lower.is_some(),
        }
    }

    fn incumbent_moves(&self, bay: &Bay) -> Vec<MoveEvent> {
        let Some((id, ref leaf)) = self.incumbent_node else {
            return Vec::new();
        };
        let mut relocations = Vec::new();
        let mut at = id;
        while at != u32::MAX {
            let link = self.links[at as usize];
            if let Some(r) = link.relocation {
                relocations.push(r);
            }
            at = link.parent;
        }
        relocations.reverse();
        let mut moves = Vec::new();
        let mut state = bay.clone();
        state.pop_retrievable_into(&mut moves);
        for (container, from, to) in relocations {
            state.relocate_top(from as usize, to as usize);
            moves.push(MoveEvent::Relocate {
                container,
                from: from as usize,
                to: to as usize,
            });
            state.pop_retrievable_into(&mut moves);
        }
        debug_assert_eq!(&state, leaf);
        if let Some(tail) = self.config.upper_bound.solution(leaf) {
            moves.extend(tail.moves);
        }
        moves
    }
}

trait CloneOpen {
    fn clone_open(&self) -> Vec<Open>;
}

impl CloneOpen for std::vec::IntoIter<Open> {
    fn clone_open(&self) -> Vec<Open> {
        self.as_slice()
            .iter()
            .map(|n| Open {
                id: n.id,
                bay: n.bay.clone(),
                lower: n.lower,
            })
            .collect()
    }
}

fn new_search<'a>(
    config: SolverConfig,
    trace: Option<&'a mut Vec<TraceRecord>>,
    checkpoints: &'a [usize],
) -> Result<Search<'a>, SolveError> {
    if config.node_budget < 1 {
        return Err(SolveError::BudgetZero);
    }
    Ok(Search {
        config,
        links: Vec::new(),
        incumbent: NO_UPPER,
        incumbent_node: None,
        trace,
        checkpoints,
        next_checkpoint: 0,
        points: Vec::new(),
        seen: HashSet::new(),
    })
}

/// Solves `bay` within the configured node budget.
pub fn solve(bay: &Bay, config: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    Ok(new_search(*config, None, &[])?.run(bay))
}

/// As [`solve`], also returning one trace record per visited node.
pub fn solve_traced(
    bay: &Bay,
    config: &SolverConfig,
) -> Result<(SolveOutcome, Vec<TraceRecord>), SolveError> {
    let mut trace = Vec::new();
    let outcome = new_search(*config, Some(&mut trace), &[])?.run(bay);
    Ok((outcome, trace))
}

/// Certified gap at each budget in `budgets` (ascending), from a single run
/// with the largest budget.
pub fn gap_curve(
    bay: &Bay,
    budgets: &[usize],
    config: &SolverConfig,
) -> Result<Vec<GapPoint>, SolveError> {
    if budgets.windows(2).any(|w| w[0] > w[1]) {
        return Err(SolveError::UnsortedBudgets);
    }
    let Some(&largest) = budgets.last() else {
        return Ok(Vec::new());
    };
    if budgets[0] < 1 {
        return Err(SolveError::BudgetZero);
    }
    let config = SolverConfig {
        node_budget: largest,
        ..*config
    };
    let mut search = new_search(config, None, budgets)?;
    search.run(bay);
    let points = search.points;
    assert!(
        points.windows(2).all(|w| w[1].gap <= w[0].gap),
        "gap must not increase with the budget"
    );
    Ok(points)
}

/// Along the incumbent path of an optimal solve, `z_opt(B^l) - S_N(B^l)`
/// for each level `l`. `None` if the solve could not certify optimality.
pub fn optimal_path_lb_gap(bay: &Bay, config: &SolverConfig) -> Result<Option<Vec<(u32, u32)>>, SolveError> {
    let outcome = solve(bay, config)?;
    if !outcome.is_optimal() {
        return Ok(None);
    }
    let mut state = bay.clone();
    state.pop_retrievable();
    let mut gaps = Vec::new();
    let mut level = 0u32;
    gaps.push((level, outcome.relocations - s_p(&state, LookAhead::FULL)));
    for m in &outcome.moves {
        if let MoveEvent::Relocate { from, to, .. } = *m {
            state.relocate_top(from, to);
            state.pop_retrievable();
            level += 1;
            gaps.push((level, outcome.relocations - level - s_p(&state, LookAhead::FULL)));
        }
    }
    Ok(Some(gaps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bay::relocation_count;
    use crate::bounds::s0;

    fn fig2() -> Bay {
        Bay::new(3, &[vec![4, 1, 6], vec![2, 5], vec![3]]).unwrap()
    }

    fn counting() -> SolverConfig {
        SolverConfig::default().with_lower_bound(LookAhead::COUNTING)
    }

    #[test]
    fn fig2_tree_is_complete_at_level_two() {
        let (out, trace) = solve_traced(&fig2(), &counting()).unwrap();
        assert_eq!(out.relocations, 4);
        assert_eq!(out.gap, 0);
        assert_eq!(out.nodes, 6);
        assert_eq!(out.depth, 2);
        assert!(!out.budget_exhausted);
        let summary: Vec<(u32, u32, u32)> = trace.iter().map(|r| (r.level, r.lower, r.upper)).collect();
        assert_eq!(
            summary,
            vec![(0, 2, 4), (1, 3, 4), (1, 3, 5), (2, 4, 4), (2, 4, 5), (2, 4, 5), (2, 4, 5)]
        );
        assert_eq!(trace[3].action, TraceAction::PruneBoundsMet);
        assert_eq!(relocation_count(&out.moves) as u32, 4);
        assert!(fig2().replay(&out.moves).unwrap().is_empty());
    }

    #[test]
    fn tiny_bay_needs_no_branching() {
        let bay = Bay::new(3, &[vec![2, 3], vec![1]]).unwrap();
        let out = solve(&bay, &counting()).unwrap();
        assert_eq!(out.relocations, s0(&bay));
        assert_eq!(out.nodes, 0);
    }

    #[test]
    fn budget_of_one_reports_root_gap() {
        let out = solve(&fig2(), &counting().with_budget(1)).unwrap();
        assert_eq!(out.relocations, 4);
        assert!(out.budget_exhausted);
        assert_eq!(out.gap, 4 - 2);
        assert_eq!(out.lower_bound, 2);
        let full = solve(&fig2(), &SolverConfig::default().with_budget(1)).unwrap();
        assert_eq!(full.gap, 0);
        assert_eq!(solve(&fig2(), &counting().with_budget(0)), Err(SolveError::BudgetZero));
    }

    #[test]
    fn gap_curve_of_fig2() {
        let points = gap_curve(&fig2(), &[1, 2, 6, 10], &counting()).unwrap();
        let gaps: Vec<u32> = points.iter().map(|p| p.gap).collect();
        assert_eq!(gaps, vec![2, 1, 0, 0]);
        for (p, b) in points.iter().zip([1, 2, 6, 10]) {
            let fresh = solve(&fig2(), &counting().with_budget(b)).unwrap();
            assert_eq!(p.gap, fresh.gap, "budget {b}");
        }
        assert_eq!(
            gap_curve(&fig2(), &[3, 1], &counting()),
            Err(SolveError::UnsortedBudgets)
        );
    }

    #[test]
    fn lower_bound_gap_on_optimal_path() {
        let gaps = optimal_path_lb_gap(&fig2(), &counting()).unwrap().unwrap();
        assert_eq!(gaps[0], (0, 0));
        assert_eq!(gaps[2], (2, 0));
        assert!(gaps.iter().all(|&(_, g)| g == 0));
    }

    #[test]
    fn trace_csv_header() {
        let (_, trace) = solve_traced(&fig2(), &counting()).unwrap();
        let csv = trace_to_csv(&trace);
        assert!(csv.starts_with("level,bay-hash,L,U,action\n0,"));
        assert_eq!(csv.lines().count(), trace.len() + 1);
    }

    #[test]
    fn tree_upper_bound_and_dedup_agree() {
        let bay = Bay::new(4, &[vec![3, 1, 5], vec![6, 2, 9], vec![8, 4, 7]]).unwrap();
        let base = solve(&bay, &SolverConfig::default()).unwrap();
        let tree = solve(&bay, &SolverConfig::default().with_upper_bound(UpperBound::Tree(2))).unwrap();
        let dedup = solve(
            &bay,
            &SolverConfig {
                deduplicate: true,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert_eq!(base.relocations, tree.relocations);
        assert_eq!(base.relocations, dedup.relocations);
        assert!(dedup.nodes <= base.nodes);
    }
}
