//! Experiment runners and output formatting behind the `crp` binary.

pub mod experiments;
