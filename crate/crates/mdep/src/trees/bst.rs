//! Binary search trees grown from i.i.d. uniforms, their fringe-subtree
//! indicators as block factors, and explicit two-configuration witnesses
//! showing that nonzero fringe statistics have positive asymptotic variance.
//!
//! The tree shape of a BST built from distinct values is recovered without
//! inserting anything: the root sits at the position of the minimum and the
//! two sides recurse. A pattern `T` with `k` nodes appears as a fringe
//! subtree rooted at the value-interval spanned by `k` consecutive values
//! exactly when a window of `k + 2` consecutive values (one boundary value on
//! each side, the path padded with zeros at both ends) has both boundaries
//! smaller than the interior and the interior's shape equal to `T`.

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::rng::substream;
use crate::source::Value;
use crate::trees::binary::BinaryTree;
use crate::trees::LinearSubtreeStatistic;
use crate::Result;
use rand::Rng;

/// Shape of the search tree that inserting `values` in positional order
/// would produce: the minimum becomes the root and the entries before and
/// after it build the subtrees. Empty input gives the empty tree.
pub(crate) fn devroye_shape(values: &[f64]) -> BinaryTree {
    if values.is_empty() {
        return BinaryTree::Empty;
    }
    let mut arg = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[arg] {
            arg = i;
        }
    }
    BinaryTree::node(
        devroye_shape(&values[..arg]),
        devroye_shape(&values[arg + 1..]),
    )
}

/// Shape of the binary search tree built by inserting `keys` left to right.
///
/// Keys must be finite and pairwise distinct; a repeated key has no
/// well-defined insertion side and is rejected as a domain error.
pub fn bst_from_keys(keys: &[f64]) -> Result<BinaryTree> {
    for k in keys {
        if !k.is_finite() {
            return Err(Error::domain("keys must be finite"));
        }
    }
    let mut sorted = keys.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite keys compare"));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("keys must be pairwise distinct"));
    }
    fn build(keys: &[f64]) -> BinaryTree {
        let Some((&root, rest)) = keys.split_first() else {
            return BinaryTree::Empty;
        };
        let smaller: Vec<f64> = rest.iter().copied().filter(|k| *k < root).collect();
        let larger: Vec<f64> = rest.iter().copied().filter(|k| *k > root).collect();
        BinaryTree::node(build(&smaller), build(&larger))
    }
    Ok(build(keys))
}

/// `n` draws from the open-interval uniform on (0, 1), stream 0 of `seed`.
/// Shared by the tree sampler and the window counter so both see the same
/// values for the same seed.
fn draw_uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, 0);
    (0..n)
        .map(|_| loop {
            let x: f64 = rng.random();
            if x > 0.0 {
                break x;
            }
        })
        .collect()
}

/// Random `n`-node binary search tree: the shape grown from `n` i.i.d.
/// uniforms drawn on stream 0 of `seed`. `n = 0` gives the empty tree.
pub fn bst_devroye_tree(n: usize, seed: u64) -> BinaryTree {
    devroye_shape(&draw_uniforms(n, seed))
}

/// Fringe indicator for pattern `tree` (`k` nodes) on a window of `k + 2`
/// values: 1 exactly when both boundary entries are smaller than every
/// interior entry and the interior's shape equals the pattern.
///
/// Interior entries must be pairwise distinct (the shape is undefined
/// otherwise); the boundary entries may collide with each other or with the
/// interior, which simply fails the strict comparison. This keeps the
/// indicator total on zero-padded paths.
pub fn bst_fringe_indicator(tree: &BinaryTree, window: &[f64]) -> Result<bool> {
    let k = tree.size();
    if k == 0 {
        return Err(Error::invalid("pattern must have at least one node"));
    }
    if window.len() != k + 2 {
        return Err(Error::Arity { got: window.len(), expected: k + 2 });
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("window entries must be finite"));
    }
    let interior = &window[1..=k];
    for i in 0..k {
        for j in (i + 1)..k {
            if interior[i] == interior[j] {
                return Err(Error::domain("interior window entries must be distinct"));
            }
        }
    }
    let lo = window[0];
    let hi = window[k + 1];
    if interior.iter().any(|v| *v <= lo || *v <= hi) {
        return Ok(false);
    }
    Ok(devroye_shape(interior) == *tree)
}

/// Window sum of `stat` on real values: each pattern's indicator reads the
/// first `size + 2` entries of the window. Called by the block-factor
/// evaluator, whose window length is `stat.max_size() + 2`.
pub(crate) fn stat_window_value(
    stat: &LinearSubtreeStatistic<BinaryTree>,
    window: &[Value],
) -> Result<f64> {
    let mut reals = Vec::with_capacity(window.len());
    for v in window {
        reals.push(v.as_real()?);
    }
    let mut total = 0.0;
    for (tree, coeff) in stat.trees().iter().zip(stat.coeffs()) {
        if bst_fringe_indicator(tree, &reals[..tree.size() + 2])? {
            total += coeff;
        }
    }
    Ok(total)
}

/// Number of indicator windows for `tree` on the zero-padded path `draws`.
fn count_on_draws(draws: &[f64], tree: &BinaryTree) -> Result<u64> {
    let k = tree.size();
    if k > draws.len() {
        return Ok(0);
    }
    let mut padded = Vec::with_capacity(draws.len() + 2);
    padded.push(0.0);
    padded.extend_from_slice(draws);
    padded.push(0.0);
    let mut count = 0u64;
    for i in 0..=(draws.len() - k) {
        if bst_fringe_indicator(tree, &padded[i..i + k + 2])? {
            count += 1;
        }
    }
    Ok(count)
}

/// Exact number of fringe copies of `tree` in the `n`-node search tree grown
/// from stream 0 of `seed`, counted through the padded-window indicator.
/// Shares its draws with [`bst_devroye_tree`], so the count agrees with
/// direct fringe enumeration on that tree.
pub fn bst_subtree_count(n: usize, tree: &BinaryTree, seed: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("the path needs at least one value"));
    }
    if tree.size() == 0 {
        return Err(Error::invalid("pattern must have at least one node"));
    }
    count_on_draws(&draw_uniforms(n, seed), tree)
}

/// Block factor evaluating `stat` on windows of `max pattern size + 2`
/// uniform draws. Locally constant: the value depends only on the relative
/// order of the window entries.
pub fn bst_fringe_factor(stat: &LinearSubtreeStatistic<BinaryTree>) -> BlockFactor {
    BlockFactor::bst_fringe(stat.clone())
}

/// Writes `values` (sorted ascending) onto `out[lo..lo + tree.size()]` so
/// that the written stretch has shape `tree`: the minimum goes to the root
/// position and the next-smallest values fill the left subtree.
fn place_shape(tree: &BinaryTree, lo: usize, values: &[f64], out: &mut [f64]) {
    let BinaryTree::Node(left, right) = tree else {
        return;
    };
    let s = left.size();
    out[lo + s] = values[0];
    place_shape(left, lo, &values[1..=s], out);
    place_shape(right, lo + s + 1, &values[s + 1..], out);
}

/// Two length-`n` value sequences that agree everywhere except on one
/// interior stretch and whose fringe counts for the smallest pattern of
/// `stat` differ by exactly one, with every other pattern's count unchanged.
///
/// The first sequence is strictly increasing, `(i + 1) / (n + 1)`; its
/// search tree is the right path, so no pattern of size two or more occurs
/// and the smallest pattern occurs at most once (once exactly when it is the
/// single-node tree, at the path's bottom). The second permutes the `k + 1`
/// values at positions `ell, ..., ell + k` (1-based, `ell` the factor window
/// length, `k` the smallest pattern's size): the smallest value moves to the
/// right end and the rest realize the pattern's shape, planting one fringe
/// copy whose boundary values are the two stretch minima. Requires
/// `n > 3 * ell` so the stretch sits clear of both ends; smaller `n` is a
/// domain error.
pub fn bst_witness_configuration(
    stat: &LinearSubtreeStatistic<BinaryTree>,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let ell = stat.max_size() + 2;
    if n <= 3 * ell {
        return Err(Error::domain(format!(
            "need more than {} values to fit the witness stretch, got {n}",
            3 * ell
        )));
    }
    let base: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / (n + 1) as f64).collect();
    let (pattern, _) = stat.leading();
    let k = pattern.size();
    let mut twisted = base.clone();
    // 1-based positions ell..ell + k hold values v_0 < ... < v_k; the stretch
    // minimum lands at the right end and the interior realizes the pattern.
    let lo = ell - 1;
    let values: Vec<f64> = base[lo..=lo + k].to_vec();
    twisted[lo + k] = values[0];
    place_shape(pattern, lo, &values[1..], &mut twisted);
    debug_assert_eq!(
        devroye_shape(&twisted[lo..lo + k]),
        *pattern,
        "permuted stretch must realize the target pattern"
    );
    Ok((base, twisted))
}

/// Splits two equal-length real configurations into the pieces the
/// two-configuration variance check consumes: the shared leading and
/// trailing `ell - 1` values and the two differing middles. The
/// configurations must agree on both boundary stretches.
/// Pieces of a two-configuration check: left boundary, right boundary, and
/// the two middles.
pub type WitnessSplit = (Vec<Value>, Vec<Value>, Vec<Value>, Vec<Value>);

pub fn split_for_witness(a: &[f64], b: &[f64], ell: usize) -> Result<WitnessSplit> {
    if ell < 1 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    let m = ell - 1;
    if a.len() != b.len() {
        return Err(Error::invalid("configurations must have equal length"));
    }
    if a.len() < 2 * m + 1 {
        return Err(Error::invalid(format!(
            "configurations need at least {} values, got {}",
            2 * m + 1,
            a.len()
        )));
    }
    let tail = a.len() - m;
    if a[..m] != b[..m] || a[tail..] != b[tail..] {
        return Err(Error::invalid(
            "configurations must agree on their boundary stretches",
        ));
    }
    let reals = |xs: &[f64]| xs.iter().map(|x| Value::Real(*x)).collect::<Vec<_>>();
    Ok((
        reals(&a[..m]),
        reals(&a[tail..]),
        reals(&a[m..tail]),
        reals(&b[m..tail]),
    ))
}
