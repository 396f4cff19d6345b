//! Exact finite models of distance sets: tree metrics, ultrametric
//! builders, gluing, spectra and triangle realizability.

// errors carry exact witnesses and sit on cold paths
#![allow(clippy::result_large_err)]

pub mod audit;
pub mod constructors;
pub mod exact;
pub mod io;
pub mod metrics;
pub mod spectra;
pub mod trees;

pub use exact::{BitWord, Dyadic, Rational};
pub use metrics::{FiniteMetricSpace, SpectrumSet, Verdict};
pub use trees::{BinaryTree, TreeNode, TruncatedTree};
