//! Admissible lower bounds on the number of relocations.
//!
//! [`s0`] counts blocking containers. The look-ahead family [`s_p`] adds the
//! unavoidable second relocations detected by repeatedly discarding the
//! target together with the containers blocking it: whenever a discarded
//! blocker is larger than the max-of-mins of the remaining bay it cannot
//! find a good column and must move twice.

use serde::Serialize;

use crate::bay::{Bay, Label, EMPTY_MIN};

/// Look-ahead depth `p`; `0` is the counting bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct LookAhead(pub usize);

impl LookAhead {
    pub const COUNTING: LookAhead = LookAhead(0);
    /// Deep enough for any bay; the recursion stops on its own.
    pub const FULL: LookAhead = LookAhead(usize::MAX);

    pub fn depth(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for LookAhead {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if *self == LookAhead::FULL {
            write!(f, "N")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Number of containers sitting above at least one smaller container.
pub fn s0(bay: &Bay) -> u32 {
    let mut count = 0;
    for stack in bay.stacks() {
        let mut below_min = EMPTY_MIN;
        for &label in stack {
            if label > below_min {
                count += 1;
            } else {
                below_min = label;
            }
        }
    }
    count
}

/// Maximum over non-empty columns of the column minimum. `None` for an
/// empty bay.
pub fn max_of_mins(bay: &Bay) -> Option<Label> {
    (0..bay.columns())
        .filter(|&c| bay.height(c) > 0)
        .map(|c| bay.column_min(c))
        .max()
}

/// One step of the discard recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscardStep {
    /// Label `k` processed at this step.
    pub target: Label,
    /// `MM(B_k)`, or `None` when `k` had already been discarded as a blocker.
    pub max_of_mins: Option<Label>,
    /// Blockers of `k` discarded at this step (`R_k`), bottom to top.
    pub discarded: Vec<Label>,
    /// Blockers in `R_k` larger than `MM(B_k)`.
    pub increment: u32,
}

/// The sequence of discarded bays `B_{n1}, B_{n1+1}, ...`.
///
/// Labels are visited in increasing order of the labels present in the
/// original bay. Iteration stops at the first discarded bay with an empty
/// column (no further increments are possible) or when the bay is empty.
#[derive(Debug, Clone)]
pub struct DiscardState {
    bay: Bay,
    order: Vec<Label>,
    next: usize,
    total: u32,
    done: bool,
}

impl DiscardState {
    pub fn new(bay: &Bay) -> DiscardState {
        let mut order: Vec<Label> = bay.labels().collect();
        order.sort_unstable();
        DiscardState {
            bay: bay.clone(),
            order,
            next: 0,
            total: 0,
            done: false,
        }
    }

    /// Current discarded bay `B_k`.
    pub fn bay(&self) -> &Bay {
        &self.bay
    }

    /// Sum of increments so far.
    pub fn total(&self) -> u32 {
        self.total
    }

    /// Number of labels processed so far.
    pub fn steps(&self) -> usize {
        self.next
    }
}

impl Iterator for DiscardState {
    type Item = DiscardStep;

    fn next(&mut self) -> Option<DiscardStep> {
        if self.done || self.next >= self.order.len() {
            return None;
        }
        let columns = self.bay.columns();
        if (0..columns).any(|c| self.bay.height(c) == 0) {
            self.done = true;
            return None;
        }
        let k = self.order[self.next];
        self.next += 1;
        let Some((col, tier)) = self.bay.locate(k) else {
            return Some(DiscardStep {
                target: k,
                max_of_mins: None,
                discarded: Vec::new(),
                increment: 0,
            });
        };
        let mm = max_of_mins(&self.bay).expect("bay has no empty column");
        let discarded = self.bay.stack(col)[tier + 1..].to_vec();
        let increment = discarded.iter().filter(|&&r| r > mm).count() as u32;
        while self.bay.height(col) > tier {
            self.bay.pop(col);
        }
        self.total += increment;
        Some(DiscardStep {
            target: k,
            max_of_mins: Some(mm),
            discarded,
            increment,
        })
    }
}

/// Look-ahead lower bound `S_p`: `S_0` plus the increments of the first `p`
/// discard steps.
pub fn s_p(bay: &Bay, depth: LookAhead) -> u32 {
    let base = s0(bay);
    if depth.0 == 0 {
        return base;
    }
    base + look_ahead_increment(bay, depth.0)
}

/// Allocation-light evaluation of the discard recursion used by the
/// solvers. Must agree with [`DiscardState`].
fn look_ahead_increment(bay: &Bay, depth: usize) -> u32 {
    let columns = bay.columns();
    let tiers = bay.tiers();
    if (0..columns).any(|c| bay.height(c) == 0) {
        return 0;
    }
    // Working heights and bottom-up prefix minima per column.
    let mut heights = vec![0usize; columns];
    let mut prefix = vec![0 as Label; columns * tiers];
    let mut order: Vec<(Label, usize, usize)> = Vec::with_capacity(columns * tiers);
    for c in 0..columns {
        let stack = bay.stack(c);
        heights[c] = stack.len();
        let mut m = EMPTY_MIN;
        for (t, &l) in stack.iter().enumerate() {
            m = m.min(l);
            prefix[c * tiers + t] = m;
            order.push((l, c, t));
        }
    }
    order.sort_unstable();

    let mut total = 0;
    for &(_, c, t) in order.iter().take(depth) {
        if t >= heights[c] {
            // Already discarded as a blocker of a smaller label.
            continue;
        }
        let mm = (0..columns)
            .map(|j| prefix[j * tiers + heights[j] - 1])
            .max()
            .unwrap();
        let stack = bay.stack(c);
        total += stack[t + 1..heights[c]].iter().filter(|&&r| r > mm).count() as u32;
        heights[c] = t;
        if t == 0 {
            break;
        }
    }
    total
}

/// Cumulative bound at tree level `level`: local bound plus relocations
/// already performed.
#[inline]
pub fn cumulative(bound: u32, level: u32) -> u32 {
    bound + level
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> Bay {
        Bay::new(3, &[vec![4, 1, 6], vec![2, 5], vec![3]]).unwrap()
    }

    #[test]
    fn counting_bound() {
        assert_eq!(s0(&fig2()), 2);
        assert_eq!(s0(&Bay::new(3, &[vec![3, 2, 1]]).unwrap()), 0);
        assert_eq!(s0(&Bay::new(3, &[vec![1, 2, 3]]).unwrap()), 2);
        assert_eq!(s0(&Bay::empty(3, 3).unwrap()), 0);
    }

    #[test]
    fn max_of_mins_examples() {
        assert_eq!(max_of_mins(&fig2()), Some(3));
        let b2 = Bay::new(3, &[vec![4], vec![2, 5], vec![3]]).unwrap();
        assert_eq!(max_of_mins(&b2), Some(4));
        assert_eq!(max_of_mins(&Bay::new(3, &[vec![5]]).unwrap()), Some(5));
        assert_eq!(max_of_mins(&Bay::empty(2, 2).unwrap()), None);
    }

    #[test]
    fn discard_sequence_of_fig2() {
        let mut state = DiscardState::new(&fig2());
        let first = state.next().unwrap();
        assert_eq!(first.target, 1);
        assert_eq!(first.max_of_mins, Some(3));
        assert_eq!(first.discarded, vec![6]);
        assert_eq!(first.increment, 1);
        assert_eq!(state.bay().to_stacks(), vec![vec![4], vec![2, 5], vec![3]]);
        let second = state.next().unwrap();
        assert_eq!(second.max_of_mins, Some(4));
        assert_eq!(second.increment, 1);
        assert_eq!(state.bay().to_stacks(), vec![vec![4], vec![], vec![3]]);
        assert_eq!(state.next(), None);
        assert_eq!(state.total(), 2);
    }

    #[test]
    fn look_ahead_of_fig2() {
        let bay = fig2();
        assert_eq!(s_p(&bay, LookAhead(0)), 2);
        assert_eq!(s_p(&bay, LookAhead(1)), 3);
        assert_eq!(s_p(&bay, LookAhead(2)), 4);
        assert_eq!(s_p(&bay, LookAhead::FULL), 4);
    }

    #[test]
    fn blocker_of_two_targets_counts_once() {
        // 6 blocks both 1 and 4; it belongs to R_1 only.
        let bay = Bay::new(4, &[vec![4, 1, 6], vec![2], vec![3]]).unwrap();
        let steps: Vec<_> = DiscardState::new(&bay).collect();
        assert_eq!(steps[0].discarded, vec![6]);
        assert_eq!(steps.iter().filter(|s| s.discarded.contains(&6)).count(), 1);
    }

    #[test]
    fn cumulative_bounds_of_fig3() {
        assert_eq!(cumulative(s0(&fig2()), 0), 2);
        let child = Bay::new(3, &[vec![4, 1], vec![2, 5], vec![3, 6]]).unwrap();
        assert_eq!(cumulative(s0(&child), 1), 3);
        assert_eq!(cumulative(0, 0), 0);
    }
}
