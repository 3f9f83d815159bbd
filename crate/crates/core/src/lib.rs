//! Solvers for the restricted container relocation problem.
//!
//! A bay holds labelled containers in columns; containers leave in label
//! order and only containers above the current target may be relocated.
//! The crate provides the bay model ([`bay`]), lower bounds ([`bounds`]),
//! heuristics ([`heuristics`]), an anytime A* search ([`astar`]), a
//! two-stage solver for partially known departure orders ([`stochastic`])
//! and average-case quantities ([`analysis`]).

pub mod analysis;
pub mod astar;
pub mod bay;
pub mod bounds;
pub mod heuristics;
pub mod io;
pub mod stochastic;

pub use astar::{solve, SolveOutcome, SolverConfig, UpperBound};
pub use bay::{Bay, InstanceSpec, Label, MoveEvent};
pub use bounds::{s0, s_p, LookAhead};
pub use heuristics::{heuristic_h, tree_heuristic, BranchWidth};
pub use stochastic::{asa_star, TwoStageInstance};
