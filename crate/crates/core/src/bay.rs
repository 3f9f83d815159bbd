//! Bay configurations, moves and retrieval semantics.
//!
//! A bay is a grid of `columns` stacks, each holding at most `tiers`
//! containers. Containers are identified by positive labels; the smallest
//! label present is the *target* and must leave the bay next. Only the
//! containers sitting above the target may be relocated (restricted CRP).
//!
//! Columns are 0-based throughout the library. Instance files and JSON
//! output use 1-based columns (see [`crate::io`]).

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Container label. Lower labels leave the bay earlier.
pub type Label = u32;

/// Sentinel used for the minimum of an empty column.
pub const EMPTY_MIN: Label = Label::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BayError {
    #[error("bay needs at least one tier and one column (got {tiers} tiers, {columns} columns)")]
    Dimensions { tiers: usize, columns: usize },
    #[error("expected {expected} stacks, got {got}")]
    StackCount { expected: usize, got: usize },
    #[error("column {column} holds {height} containers but the bay has {tiers} tiers")]
    StackTooHigh {
        column: usize,
        height: usize,
        tiers: usize,
    },
    #[error("label 0 in column {column}; labels must be positive")]
    ZeroLabel { column: usize },
    #[error("label {label} appears more than once")]
    DuplicateLabel { label: Label },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("bay is empty")]
    EmptyBay,
    #[error("column {column} does not exist")]
    NoSuchColumn { column: usize },
    #[error("container {container} is not on top of column {column}")]
    NotOnTop { container: Label, column: usize },
    #[error("container {container} is not the current target {target}")]
    NotTarget { container: Label, target: Label },
    #[error("container {container} does not block the target {target}")]
    NotBlocking { container: Label, target: Label },
    #[error("destination column {column} is full")]
    ColumnFull { column: usize },
    #[error("source and destination are both column {column}")]
    SameColumn { column: usize },
    #[error("target {target} is not blocked; it must be retrieved")]
    NotBlocked { target: Label },
}

/// One relocation or retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveEvent {
    Relocate {
        container: Label,
        from: usize,
        to: usize,
    },
    Retrieve {
        container: Label,
        from: usize,
    },
}

impl MoveEvent {
    pub fn container(&self) -> Label {
        match *self {
            MoveEvent::Relocate { container, .. } | MoveEvent::Retrieve { container, .. } => {
                container
            }
        }
    }

    pub fn is_relocation(&self) -> bool {
        matches!(self, MoveEvent::Relocate { .. })
    }
}

impl fmt::Display for MoveEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MoveEvent::Relocate {
                container,
                from,
                to,
            } => write!(f, "relocate {container} c{}->c{}", from + 1, to + 1),
            MoveEvent::Retrieve { container, from } => {
                write!(f, "retrieve {container} c{}", from + 1)
            }
        }
    }
}

/// Number of relocations in a move sequence.
pub fn relocation_count(moves: &[MoveEvent]) -> usize {
    moves.iter().filter(|m| m.is_relocation()).count()
}

/// Immutable-by-convention bay configuration.
///
/// Storage is a single buffer of `columns * (tiers + 1)` labels: for each
/// column one height cell followed by `tiers` slots, bottom to top. Unused
/// slots are always zero so that equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bay {
    tiers: usize,
    columns: usize,
    data: Vec<Label>,
}

impl Bay {
    /// Empty bay.
    pub fn empty(tiers: usize, columns: usize) -> Result<Bay, BayError> {
        if tiers == 0 || columns == 0 {
            return Err(BayError::Dimensions { tiers, columns });
        }
        Ok(Bay {
            tiers,
            columns,
            data: vec![0; columns * (tiers + 1)],
        })
    }

    /// Builds a bay from bottom-to-top stacks, validating heights and labels.
    pub fn new<S: AsRef<[Label]>>(tiers: usize, stacks: &[S]) -> Result<Bay, BayError> {
        let mut bay = Bay::empty(tiers, stacks.len())?;
        let mut seen = std::collections::HashSet::new();
        for (c, stack) in stacks.iter().enumerate() {
            let stack = stack.as_ref();
            if stack.len() > tiers {
                return Err(BayError::StackTooHigh {
                    column: c,
                    height: stack.len(),
                    tiers,
                });
            }
            for &label in stack {
                if label == 0 {
                    return Err(BayError::ZeroLabel { column: c });
                }
                if !seen.insert(label) {
                    return Err(BayError::DuplicateLabel { label });
                }
                bay.push(c, label);
            }
        }
        Ok(bay)
    }

    /// Like [`Bay::new`] but also checks the number of stacks.
    pub fn with_columns<S: AsRef<[Label]>>(
        tiers: usize,
        columns: usize,
        stacks: &[S],
    ) -> Result<Bay, BayError> {
        if stacks.len() != columns {
            return Err(BayError::StackCount {
                expected: columns,
                got: stacks.len(),
            });
        }
        Bay::new(tiers, stacks)
    }

    #[inline]
    pub fn tiers(&self) -> usize {
        self.tiers
    }

    #[inline]
    pub fn columns(&self) -> usize {
        self.columns
    }

    #[inline]
    fn base(&self, column: usize) -> usize {
        column * (self.tiers + 1)
    }

    #[inline]
    pub fn height(&self, column: usize) -> usize {
        self.data[self.base(column)] as usize
    }

    /// Containers of `column`, bottom to top.
    #[inline]
    pub fn stack(&self, column: usize) -> &[Label] {
        let b = self.base(column);
        let h = self.data[b] as usize;
        &self.data[b + 1..b + 1 + h]
    }

    pub fn stacks(&self) -> impl Iterator<Item = &[Label]> + '_ {
        (0..self.columns).map(move |c| self.stack(c))
    }

    /// Total number of containers.
    pub fn len(&self) -> usize {
        (0..self.columns).map(|c| self.height(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        (0..self.columns).all(|c| self.height(c) == 0)
    }

    #[inline]
    pub fn is_full(&self, column: usize) -> bool {
        self.height(column) == self.tiers
    }

    #[inline]
    pub fn top(&self, column: usize) -> Option<Label> {
        self.stack(column).last().copied()
    }

    /// Smallest label in `column`, or [`EMPTY_MIN`] when the column is empty.
    #[inline]
    pub fn column_min(&self, column: usize) -> Label {
        self.stack(column).iter().copied().min().unwrap_or(EMPTY_MIN)
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.stacks().flat_map(|s| s.iter().copied())
    }

    pub fn max_label(&self) -> Option<Label> {
        self.labels().max()
    }

    /// Column and tier (0 = bottom) of `label`.
    pub fn locate(&self, label: Label) -> Option<(usize, usize)> {
        (0..self.columns).find_map(|c| {
            self.stack(c)
                .iter()
                .position(|&l| l == label)
                .map(|t| (c, t))
        })
    }

    /// The smallest label present.
    pub fn target(&self) -> Option<Label> {
        self.labels().min()
    }

    /// Target label with its column and tier.
    pub fn target_position(&self) -> Option<(Label, usize, usize)> {
        let mut best: Option<(Label, usize, usize)> = None;
        for c in 0..self.columns {
            for (t, &l) in self.stack(c).iter().enumerate() {
                if best.map_or(true, |(b, _, _)| l < b) {
                    best = Some((l, c, t));
                }
            }
        }
        best
    }

    /// Topmost container above the target and its column, if the target is
    /// blocked.
    pub fn blocking_container(&self) -> Option<(Label, usize)> {
        let (_, c, t) = self.target_position()?;
        let h = self.height(c);
        (t + 1 < h).then(|| (self.stack(c)[h - 1], c))
    }

    /// Checks C ≥ P ≥ 3, the regime used for experiment instances.
    pub fn is_experiment_regime(&self) -> bool {
        self.columns >= self.tiers && self.tiers >= 3
    }

    #[inline]
    pub(crate) fn push(&mut self, column: usize, label: Label) {
        let b = self.base(column);
        let h = self.data[b] as usize;
        debug_assert!(h < self.tiers);
        self.data[b + 1 + h] = label;
        self.data[b] += 1;
    }

    #[inline]
    pub(crate) fn pop(&mut self, column: usize) -> Label {
        let b = self.base(column);
        let h = self.data[b] as usize;
        debug_assert!(h > 0);
        let label = std::mem::take(&mut self.data[b + h]);
        self.data[b] -= 1;
        label
    }

    /// Moves the top of `from` onto `to` without legality checks.
    #[inline]
    pub(crate) fn relocate_top(&mut self, from: usize, to: usize) -> Label {
        let label = self.pop(from);
        self.push(to, label);
        label
    }

    /// Returns a new bay with `m` applied, enforcing restricted-CRP legality.
    pub fn apply_move(&self, m: &MoveEvent) -> Result<Bay, MoveError> {
        let mut next = self.clone();
        next.apply_move_in_place(m)?;
        Ok(next)
    }

    pub fn apply_move_in_place(&mut self, m: &MoveEvent) -> Result<(), MoveError> {
        let (target, tc, tt) = self.target_position().ok_or(MoveError::EmptyBay)?;
        match *m {
            MoveEvent::Retrieve { container, from } => {
                self.check_column(from)?;
                if container != target {
                    return Err(MoveError::NotTarget { container, target });
                }
                if self.top(from) != Some(container) {
                    return Err(MoveError::NotOnTop {
                        container,
                        column: from,
                    });
                }
                self.pop(from);
            }
            MoveEvent::Relocate {
                container,
                from,
                to,
            } => {
                self.check_column(from)?;
                self.check_column(to)?;
                if self.top(from) != Some(container) {
                    return Err(MoveError::NotOnTop {
                        container,
                        column: from,
                    });
                }
                if from != tc || tt + 1 >= self.height(from) {
                    return Err(MoveError::NotBlocking { container, target });
                }
                if from == to {
                    return Err(MoveError::SameColumn { column: to });
                }
                if self.is_full(to) {
                    return Err(MoveError::ColumnFull { column: to });
                }
                self.relocate_top(from, to);
            }
        }
        Ok(())
    }

    fn check_column(&self, column: usize) -> Result<(), MoveError> {
        if column < self.columns {
            Ok(())
        } else {
            Err(MoveError::NoSuchColumn { column })
        }
    }

    /// All relocations of the topmost blocking container, in column order.
    pub fn legal_relocations(&self) -> Result<Vec<MoveEvent>, MoveError> {
        let target = self.target().ok_or(MoveError::EmptyBay)?;
        let (container, from) = self
            .blocking_container()
            .ok_or(MoveError::NotBlocked { target })?;
        Ok((0..self.columns)
            .filter(|&c| c != from && !self.is_full(c))
            .map(|to| MoveEvent::Relocate {
                container,
                from,
                to,
            })
            .collect())
    }

    /// Retrieves targets while they sit on top; returns how many left.
    pub fn pop_retrievable(&mut self) -> usize {
        let mut n = 0;
        while let Some((_, c, t)) = self.target_position() {
            if t + 1 != self.height(c) {
                break;
            }
            self.pop(c);
            n += 1;
        }
        n
    }

    /// As [`Bay::pop_retrievable`], recording the retrievals.
    pub fn pop_retrievable_into(&mut self, out: &mut Vec<MoveEvent>) -> usize {
        let mut n = 0;
        while let Some((label, c, t)) = self.target_position() {
            if t + 1 != self.height(c) {
                break;
            }
            self.pop(c);
            out.push(MoveEvent::Retrieve {
                container: label,
                from: c,
            });
            n += 1;
        }
        n
    }

    /// Replays `moves` and checks that they empty the bay legally.
    pub fn replay(&self, moves: &[MoveEvent]) -> Result<Bay, MoveError> {
        let mut bay = self.clone();
        for m in moves {
            bay.apply_move_in_place(m)?;
        }
        Ok(bay)
    }

    /// Same stacks with labels replaced by `f(label)`.
    pub fn map_labels(&self, mut f: impl FnMut(Label) -> Label) -> Bay {
        let mut out = self.clone();
        for c in 0..self.columns {
            let b = out.base(c);
            let h = out.data[b] as usize;
            for slot in &mut out.data[b + 1..b + 1 + h] {
                *slot = f(*slot);
            }
        }
        out
    }

    /// Stacks as owned vectors (bottom to top).
    pub fn to_stacks(&self) -> Vec<Vec<Label>> {
        self.stacks().map(<[Label]>::to_vec).collect()
    }
}

impl fmt::Debug for Bay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bay(P={}, ", self.tiers)?;
        f.debug_list().entries(self.stacks()).finish()?;
        write!(f, ")")
    }
}

/// Grid rendering, top tier first, like a bay drawing.
impl fmt::Display for Bay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .max_label()
            .map_or(1, |m| m.to_string().len())
            .max(1);
        for tier in (0..self.tiers).rev() {
            let row: Vec<String> = (0..self.columns)
                .map(|c| match self.stack(c).get(tier) {
                    Some(l) => format!("{l:>width$}"),
                    None => format!("{:>width$}", "."),
                })
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Parameters of a uniformly random bay with `fill` containers per column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub tiers: usize,
    pub columns: usize,
    pub fill: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(tiers: usize, columns: usize, fill: usize, seed: u64) -> InstanceSpec {
        InstanceSpec {
            tiers,
            columns,
            fill,
            seed,
        }
    }

    pub fn containers(&self) -> usize {
        self.fill * self.columns
    }

    pub fn validate(&self) -> Result<(), BayError> {
        if self.tiers == 0 || self.columns == 0 {
            return Err(BayError::Dimensions {
                tiers: self.tiers,
                columns: self.columns,
            });
        }
        if self.fill + 1 > self.tiers {
            return Err(BayError::StackTooHigh {
                column: 0,
                height: self.fill,
                tiers: self.tiers.saturating_sub(1),
            });
        }
        Ok(())
    }

    /// Generates the bay from the spec's own seed.
    pub fn generate(&self) -> Result<Bay, BayError> {
        generate_uniform(self, &mut ChaCha8Rng::seed_from_u64(self.seed))
    }

    /// Generates the `index`-th bay of a batch whose master seed is `self.seed`.
    pub fn generate_nth(&self, index: u64) -> Result<Bay, BayError> {
        generate_uniform(self, &mut instance_rng(self.seed, index))
    }
}

/// Per-instance RNG derived from a master seed, independent of scheduling.
pub fn instance_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Uniform random bay: a random permutation of `1..=fill*columns` laid out
/// column by column, bottom to top.
pub fn generate_uniform<R: Rng + ?Sized>(spec: &InstanceSpec, rng: &mut R) -> Result<Bay, BayError> {
    spec.validate()?;
    let n = spec.containers() as Label;
    let mut perm: Vec<Label> = (1..=n).collect();
    perm.shuffle(rng);
    let mut bay = Bay::empty(spec.tiers, spec.columns)?;
    for (i, &label) in perm.iter().enumerate() {
        bay.push(i / spec.fill.max(1), label);
    }
    Ok(bay)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig2() -> Bay {
        Bay::new(3, &[vec![4, 1, 6], vec![2, 5], vec![3]]).unwrap()
    }

    #[test]
    fn target_of_fig2_is_one() {
        assert_eq!(fig2().target(), Some(1));
        assert_eq!(Bay::empty(3, 3).unwrap().target(), None);
        assert_eq!(Bay::new(3, &[vec![7]]).unwrap().target(), Some(7));
    }

    #[test]
    fn relocate_six_to_third_column() {
        let bay = fig2();
        let next = bay
            .apply_move(&MoveEvent::Relocate {
                container: 6,
                from: 0,
                to: 2,
            })
            .unwrap();
        assert_eq!(next.to_stacks(), vec![vec![4, 1], vec![2, 5], vec![3, 6]]);
    }

    #[test]
    fn retrieve_requires_top_target() {
        let bay = Bay::new(3, &[vec![4, 1], vec![2]]).unwrap();
        let next = bay
            .apply_move(&MoveEvent::Retrieve {
                container: 1,
                from: 0,
            })
            .unwrap();
        assert_eq!(next.to_stacks(), vec![vec![4], vec![2]]);
        assert_eq!(
            fig2().apply_move(&MoveEvent::Retrieve {
                container: 1,
                from: 0
            }),
            Err(MoveError::NotOnTop {
                container: 1,
                column: 0
            })
        );
        assert!(matches!(
            bay.apply_move(&MoveEvent::Retrieve {
                container: 2,
                from: 1
            }),
            Err(MoveError::NotTarget { .. })
        ));
    }

    #[test]
    fn illegal_relocations_are_rejected() {
        let bay = Bay::new(2, &[vec![1, 3], vec![2, 4], vec![5]]).unwrap();
        assert_eq!(
            bay.apply_move(&MoveEvent::Relocate {
                container: 3,
                from: 0,
                to: 1
            }),
            Err(MoveError::ColumnFull { column: 1 })
        );
        // 4 sits above 2, not above the target 1.
        assert!(matches!(
            bay.apply_move(&MoveEvent::Relocate {
                container: 4,
                from: 1,
                to: 2
            }),
            Err(MoveError::NotBlocking { .. })
        ));
        assert_eq!(
            bay.apply_move(&MoveEvent::Relocate {
                container: 3,
                from: 0,
                to: 0
            }),
            Err(MoveError::SameColumn { column: 0 })
        );
    }

    #[test]
    fn legal_relocations_of_fig2() {
        let moves = fig2().legal_relocations().unwrap();
        assert_eq!(
            moves,
            vec![
                MoveEvent::Relocate {
                    container: 6,
                    from: 0,
                    to: 1
                },
                MoveEvent::Relocate {
                    container: 6,
                    from: 0,
                    to: 2
                },
            ]
        );
    }

    #[test]
    fn legal_relocations_edge_cases() {
        let full = Bay::new(2, &[vec![1, 3], vec![2, 4], vec![5, 6]]).unwrap();
        assert!(full.legal_relocations().unwrap().is_empty());
        let open = Bay::new(3, &[vec![1, 3], vec![2], vec![]]).unwrap();
        assert_eq!(open.legal_relocations().unwrap().len(), 2);
        let unblocked = Bay::new(3, &[vec![3, 1], vec![2]]).unwrap();
        assert_eq!(
            unblocked.legal_relocations(),
            Err(MoveError::NotBlocked { target: 1 })
        );
    }

    #[test]
    fn pop_retrievable_stops_at_blocked_target() {
        let mut bay = Bay::new(3, &[vec![3, 1], vec![4, 2, 5]]).unwrap();
        let mut log = Vec::new();
        assert_eq!(bay.pop_retrievable_into(&mut log), 1);
        assert_eq!(bay.to_stacks(), vec![vec![3], vec![4, 2, 5]]);
        assert_eq!(
            log,
            vec![MoveEvent::Retrieve {
                container: 1,
                from: 0
            }]
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Bay::new(2, &[vec![1, 2, 3]]),
            Err(BayError::StackTooHigh {
                column: 0,
                height: 3,
                tiers: 2
            })
        );
        assert_eq!(
            Bay::new(3, &[vec![1, 2], vec![2]]),
            Err(BayError::DuplicateLabel { label: 2 })
        );
        assert_eq!(
            Bay::new(3, &[vec![0]]),
            Err(BayError::ZeroLabel { column: 0 })
        );
    }

    #[test]
    fn generated_shape() {
        let spec = InstanceSpec::new(4, 7, 3, 42);
        let bay = spec.generate().unwrap();
        assert_eq!(bay.len(), 21);
        assert!((0..7).all(|c| bay.height(c) == 3));
        let mut labels: Vec<_> = bay.labels().collect();
        labels.sort_unstable();
        assert_eq!(labels, (1..=21).collect::<Vec<_>>());
        assert_eq!(spec.generate().unwrap(), bay);
        assert!(bay.is_experiment_regime());
    }

    #[test]
    fn structural_equality_and_hash() {
        use std::collections::HashSet;
        let mut a = fig2();
        a.relocate_top(0, 2);
        a.relocate_top(2, 0);
        assert_eq!(a, fig2());
        let set: HashSet<Bay> = [a, fig2()].into_iter().collect();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn display_draws_top_tier_first() {
        assert_eq!(fig2().to_string(), "6 . .\n1 5 .\n4 2 3\n");
    }
}
