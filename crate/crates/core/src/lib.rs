//! Constraint-based causal discovery for directed graphs that may contain
//! cycles, latent variables and selection bias.
//!
//! The crate is organized around a small set of pieces:
//!
//! - [`graph`]: directed systems (cycles allowed) with an observed / latent /
//!   selection vertex partition, and partially oriented mixed graphs with
//!   tail / arrowhead / circle endpoint marks.
//! - [`dsep`]: an exact d-separation oracle, inducing-path and D-SEP queries,
//!   and construction of the ground-truth maximal almost ancestral graph
//!   (MAAG) of a directed system.
//! - [`datagen`]: random linear Gaussian systems, equilibrium sampling via
//!   `X = (I - B)^-1 eps`, and selection filtering.
//! - [`ci`]: the conditional-independence provider abstraction with an
//!   exact-oracle implementation and a Gaussian Fisher-z implementation.
//! - [`cci`]: the cyclic causal inference (CCI) discovery algorithm proper,
//!   including the PC/FCI skeleton subroutines and orientation rules 1-7.
//! - [`eval`]: RFCI v-structure orientation, corrected oracle graphs,
//!   structural Hamming distance and endpoint-orientation comparison.
//! - [`format`]: text formats for graphs, datasets, manifests and trace logs.

pub mod cci;
pub mod ci;
pub mod datagen;
pub mod dsep;
pub mod error;
pub mod eval;
pub mod format;
pub mod graph;
pub mod samples;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
