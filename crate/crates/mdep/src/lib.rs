//! Analysis of stationary m-dependent sequences built as sliding block
//! factors of an i.i.d. source.
//!
//! A block factor applies a fixed function `f` of `ell` consecutive source
//! draws at every offset of an i.i.d. sequence, producing a stationary
//! (ell-1)-dependent sequence `X_k`. This crate computes the asymptotic
//! variance `sigma^2` of partial sums of `X_k`, decides whether the factor is
//! degenerate (a coboundary, so centered partial sums stay bounded), runs Monte
//! Carlo diagnostics for the central limit behaviour, and applies the same
//! machinery to fringe-subtree statistics of random binary search trees and
//! conditioned Galton-Watson trees.
//!
//! Entry points:
//! - [`SourceDistribution`], [`BlockFactor`], [`sample_path`]: model and
//!   simulate the sequence.
//! - [`exact_moments`], [`var_sn_exact`], [`sigma_squared_mc`]: variance of
//!   partial sums, exactly for finite alphabets or by simulation.
//! - [`coboundary_decompose`], [`rc2_witness_check`]: decide degeneracy and
//!   produce checkable certificates either way.
//! - [`simulate_clt`], [`rn_example_moments`], [`covariance_matrix_mc`]:
//!   sampling diagnostics.
//! - [`trees`]: binary search tree and Galton-Watson tree statistics as
//!   block factors.

pub mod error;
pub mod source;
pub mod factor;
pub mod path;
pub mod rng;
pub mod stats;
pub mod moments;
pub mod coboundary;
pub mod mc;
pub mod clt;
pub mod covariance;
pub mod exact;
pub mod trees;
pub mod specfile;

pub use coboundary::{
    cesaro_coboundary_estimate, coboundary_decompose, coboundary_decompose_with, rc2_witness_check,
    CesaroEstimate, CoboundaryResult, CycleWitness, DecomposeOptions, PotentialTable, Rc2Witness,
};
pub use clt::{
    degenerate_distribution_check, rn_example_moments, simulate_clt, CltRow, DistributionCheck,
    RnMoments, SimulationReport,
};
pub use covariance::{covariance_matrix_mc, CovarianceEstimate};
pub use error::Error;
pub use exact::{
    RationalCoboundary, RationalFactor, RationalMoments, RationalPotential, RationalWitness,
};
pub use factor::BlockFactor;
pub use mc::{sigma_squared_mc, McVariance};
pub use moments::{
    exact_moments, exact_moments_with, var_sn_exact, var_sn_exact_with, ExactOptions,
    MomentSummary,
};
pub use path::{sample_path, SamplePath};
pub use source::{Atom, Component, Scalar, SourceDistribution, Value};
pub use specfile::{parse_spec, parse_spec_path, ParsedSpec};
pub use trees::{BinaryTree, LinearSubtreeStatistic, OrderedTree, TreePattern};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Default absolute tolerance for exact-arithmetic comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default root seed, the ASCII bytes of "mdep".
pub const DEFAULT_SEED: u64 = 0x6d64_6570;
