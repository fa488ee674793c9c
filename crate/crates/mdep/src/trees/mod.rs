//! Random-tree statistics expressed through the block-factor machinery:
//! binary search trees grown from i.i.d. uniforms and ordered trees with a
//! conditioned degree sequence (Galton-Watson trees).

pub mod binary;
pub mod bst;
pub mod gw;
pub mod ordered;

pub use binary::BinaryTree;
pub use bst::{
    bst_devroye_tree, bst_fringe_factor, bst_fringe_indicator, bst_from_keys, bst_subtree_count,
    bst_witness_configuration, split_for_witness,
};
pub use gw::{
    gw_alpha_beta, gw_centering_check, gw_conditioned_degrees, gw_degeneracy_argument,
    gw_degree_indicator, gw_factor, gw_sigma_squared, gw_subtree_count, CenteringCheck,
    DegeneracyCertificate, GwSigmaMode, OffspringDistribution, SupportResidual,
};
pub use ordered::OrderedTree;

use crate::error::Error;
use crate::Result;

/// A tree shape usable as a fringe-subtree pattern.
pub trait TreePattern: Clone + PartialEq {
    /// Number of nodes.
    fn size(&self) -> usize;
    /// Canonical text encoding, the notion of equality for patterns.
    fn label(&self) -> String;
}

/// A linear combination `sum_j a_j * n_{T_j}` of fringe-subtree counts.
///
/// Patterns are held sorted by size (ties keep insertion order) and must be
/// pairwise distinct under their canonical encoding. Terms with coefficient
/// zero are dropped at construction; a statistic with no remaining terms is
/// rejected. Sorting guarantees that no pattern is a proper subtree of the
/// first one, which the witness constructions rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubtreeStatistic<T> {
    trees: Vec<T>,
    coeffs: Vec<f64>,
}

impl<T: TreePattern> LinearSubtreeStatistic<T> {
    pub fn new(terms: Vec<(T, f64)>) -> Result<Self> {
        let kept: Vec<(T, f64)> = terms.into_iter().filter(|(_, a)| *a != 0.0).collect();
        if kept.is_empty() {
            return Err(Error::invalid(
                "a subtree statistic needs at least one nonzero coefficient",
            ));
        }
        for (tree, coeff) in &kept {
            if !coeff.is_finite() {
                return Err(Error::invalid("coefficients must be finite"));
            }
            if tree.size() == 0 {
                return Err(Error::invalid("patterns must have at least one node"));
            }
        }
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                if kept[i].0.label() == kept[j].0.label() {
                    return Err(Error::invalid(format!(
                        "duplicate pattern {}",
                        kept[i].0.label()
                    )));
                }
            }
        }
        let mut kept = kept;
        kept.sort_by_key(|(t, _)| t.size());
        let (trees, coeffs) = kept.into_iter().unzip();
        Ok(LinearSubtreeStatistic { trees, coeffs })
    }

    /// Single-pattern statistic with coefficient 1.
    pub fn count_of(tree: T) -> Result<Self> {
        Self::new(vec![(tree, 1.0)])
    }

    pub fn trees(&self) -> &[T] {
        &self.trees
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size of the largest pattern.
    pub fn max_size(&self) -> usize {
        self.trees.iter().map(|t| t.size()).max().unwrap_or(0)
    }

    /// The smallest pattern and its coefficient (the witness target).
    pub fn leading(&self) -> (&T, f64) {
        (&self.trees[0], self.coeffs[0])
    }

    pub fn labels(&self) -> Vec<String> {
        self.trees.iter().map(|t| t.label()).collect()
    }
}
