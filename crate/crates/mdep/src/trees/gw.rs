//! Conditioned Galton-Watson trees through their depth-first degree
//! sequences, fringe-subtree statistics as centered block factors over the
//! offspring source, and an explicit two-configuration argument showing that
//! every nonzero fringe statistic has positive asymptotic variance.
//!
//! A critical offspring law conditioned on total progeny `n` is, on the
//! degree-sequence side, the i.i.d. law of `n` offspring draws conditioned on
//! summing to `n - 1` and rotated to the unique cyclic shift that forms a
//! valid preorder degree sequence (the cycle lemma; no sequence with that sum
//! can be properly periodic, so the valid rotation is unique). Fringe copies
//! of a pattern with degree sequence `t` are exactly the positions where the
//! degree sequence contains `t` as a block, and on the rotated sequence the
//! count equals the cyclic window count, which makes the statistic a sum of
//! windows over an i.i.d.-conditioned sequence.
//!
//! Centering subtracts the projection onto the conditioning defect: with
//! `alpha = sum_j Cov(f, xi_j) / Var(xi)` over the window coordinates and
//! `beta = alpha * E(xi) - E(f)`, the factor `f - alpha * x_0 + beta` has
//! mean exactly zero and is asymptotically uncorrelated with the degree sum,
//! so its partial sums carry the conditional fluctuations.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::Serialize;

use crate::coboundary::{rc2_witness_check, Rc2Witness};
use crate::error::Error;
use crate::factor::BlockFactor;
use crate::mc::sigma_squared_mc;
use crate::moments::{exact_mean, exact_moments, for_each_index_window, ExactOptions};
use crate::path::{draw_into, sum_windows};
use crate::rng::{run_replicas, substream};
use crate::source::{Scalar, SourceDistribution, Value};
use crate::stats::{jackknife_covariance, NeumaierSum};
use crate::trees::ordered::OrderedTree;
use crate::trees::LinearSubtreeStatistic;
use crate::Result;

/// Attempts the conditioned sampler makes before giving up.
const MAX_REJECTION_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Clone, Copy)]
enum Preset {
    None,
    Poisson1(Poisson<f64>),
    GeomHalf(Geometric),
}

/// A critical offspring law: mean one, an atom at zero, finitely many
/// degrees in its working probability table.
///
/// Finite tables are validated for criticality directly. The `poisson1` and
/// `geom-half` presets are critical analytically; their working tables
/// truncate the law at a configurable maximum degree (default 30) and
/// renormalize, and the discarded mass is recorded. Enumerations and exact
/// moments use the working table; sampling draws from the untruncated law,
/// so the two sides differ by the recorded truncated mass (below `5e-10`
/// even for the heavier geometric tail at the default truncation).
#[derive(Debug, Clone)]
pub struct OffspringDistribution {
    probs: Vec<f64>,
    mean: f64,
    variance: f64,
    truncated_mass: f64,
    preset: Preset,
    label: String,
}

impl OffspringDistribution {
    /// Offspring law from an explicit probability table `probs[k] = P(xi = k)`.
    ///
    /// Requires finite nonnegative entries summing to one, a positive atom at
    /// zero, and mean one (criticality) within `1e-9`. Trailing zeros are
    /// trimmed; interior zeros are kept and simply never drawn.
    pub fn finite(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        if probs.is_empty() {
            return Err(Error::invalid("offspring table must not be empty"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("offspring probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "offspring probabilities must sum to 1, got {total}"
            )));
        }
        if probs[0] <= 0.0 {
            return Err(Error::invalid("offspring law needs a positive atom at degree 0"));
        }
        let (mean, variance) = table_moments(&probs);
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "offspring mean must be 1 (critical), got {mean}"
            )));
        }
        let label = format!("finite(max_degree={})", probs.len() - 1);
        Ok(OffspringDistribution {
            probs,
            mean,
            variance,
            truncated_mass: 0.0,
            preset: Preset::None,
            label,
        })
    }

    /// Named preset with the default truncation of 30.
    pub fn preset(name: &str) -> Result<Self> {
        Self::preset_with_truncation(name, 30)
    }

    /// Named preset: `"poisson1"` (Poisson with mean 1) or `"geom-half"`
    /// (geometric on 0, 1, 2, ... with success probability 1/2). The working
    /// table keeps degrees `0..=truncate` and renormalizes; `truncate` must
    /// be at least 2 so the table stays critical-shaped with mass above 1.
    pub fn preset_with_truncation(name: &str, truncate: u32) -> Result<Self> {
        if truncate < 2 {
            return Err(Error::invalid("truncation must keep degrees up to at least 2"));
        }
        let (raw, preset): (Vec<f64>, Preset) = match name {
            "poisson1" => {
                let mut p = Vec::with_capacity(truncate as usize + 1);
                let mut term = (-1.0f64).exp();
                for k in 0..=truncate {
                    if k > 0 {
                        term /= k as f64;
                    }
                    p.push(term);
                }
                let dist = Poisson::new(1.0).expect("valid Poisson mean");
                (p, Preset::Poisson1(dist))
            }
            "geom-half" => {
                let p = (0..=truncate).map(|k| 0.5f64.powi(k as i32 + 1)).collect();
                let dist = Geometric::new(0.5).expect("valid geometric parameter");
                (p, Preset::GeomHalf(dist))
            }
            other => {
                return Err(Error::invalid(format!(
                    "unknown offspring preset {other:?}; known presets: poisson1, geom-half"
                )))
            }
        };
        let kept: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|p| p / kept).collect();
        let (mean, variance) = table_moments(&probs);
        let label = format!("{name}(truncate={truncate})");
        Ok(OffspringDistribution {
            probs,
            mean,
            variance,
            truncated_mass: 1.0 - kept,
            preset,
            label,
        })
    }

    /// Working probability table, `probs()[k] = P(xi = k)`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mean of the working table.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Variance of the working table.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Probability mass the truncation discarded (zero for finite tables).
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// Degrees with positive probability, ascending.
    pub fn support(&self) -> Vec<u32> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, _)| k as u32)
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The working table as a finite discrete source with integer atoms.
    /// Zero-probability degrees are dropped.
    pub fn as_source(&self) -> Result<SourceDistribution> {
        let atoms: Vec<(Scalar, f64)> = self
            .probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| (Scalar::Int(k as i64), *p))
            .collect();
        SourceDistribution::finite_discrete(atoms)
    }

    /// One offspring draw. Presets sample their untruncated law; finite
    /// tables invert the cumulative distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self.preset {
            Preset::Poisson1(dist) => dist.sample(rng) as u32,
            Preset::GeomHalf(dist) => dist.sample(rng) as u32,
            Preset::None => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (k, p) in self.probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u32;
                    }
                }
                self.probs.len() as u32 - 1
            }
        }
    }
}

/// Mean and variance of a probability table indexed by degree.
fn table_moments(probs: &[f64]) -> (f64, f64) {
    let mut mean = NeumaierSum::new();
    let mut second = NeumaierSum::new();
    for (k, p) in probs.iter().enumerate() {
        mean.add(k as f64 * p);
        second.add((k * k) as f64 * p);
    }
    let mean = mean.total();
    (mean, second.total() - mean * mean)
}

/// Exact match of a degree window against a pattern's preorder sequence.
pub fn gw_degree_indicator(tree: &OrderedTree, window: &[u32]) -> Result<bool> {
    if window.len() != tree.size() {
        return Err(Error::Arity { got: window.len(), expected: tree.size() });
    }
    Ok(window == tree.degrees())
}

/// Centered window value `sum_j a_j 1{window starts with T_j} - alpha *
/// window[0] + beta` on integer degree values. Called by the block-factor
/// evaluator, whose window length is `stat.max_size()`.
pub(crate) fn stat_window_value(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    alpha: f64,
    beta: f64,
    window: &[Value],
) -> Result<f64> {
    let mut degrees = Vec::with_capacity(window.len());
    for v in window {
        degrees.push(v.as_int()?);
    }
    let mut total = pure_stat_value(stat, &degrees);
    total += beta - alpha * degrees[0] as f64;
    Ok(total)
}

/// Indicator part alone: `sum_j a_j 1{window starts with T_j}`.
fn pure_stat_value(stat: &LinearSubtreeStatistic<OrderedTree>, degrees: &[i64]) -> f64 {
    let mut total = 0.0;
    for (tree, coeff) in stat.trees().iter().zip(stat.coeffs()) {
        let pat = tree.degrees();
        if pat.len() <= degrees.len()
            && pat.iter().zip(degrees).all(|(p, d)| *p as i64 == *d)
        {
            total += coeff;
        }
    }
    total
}

/// Degree sequence of a conditioned Galton-Watson tree with `n` nodes:
/// offspring draws on stream 0 of `seed` are rejected until they sum to
/// `n - 1`, then rotated to start after the first minimum of the prefix walk
/// `sum (d_i - 1)`, the unique rotation forming a valid preorder sequence.
///
/// Fails with a rejection error when no draw is accepted within the attempt
/// budget, which in particular happens whenever `P(sum = n - 1)` is zero,
/// such as support `{0, 2}` with even `n`.
pub fn gw_conditioned_degrees(
    off: &OffspringDistribution,
    n: usize,
    seed: u64,
) -> Result<OrderedTree> {
    if n == 0 {
        return Err(Error::invalid("a tree needs at least one node"));
    }
    let target = n as u64 - 1;
    let mut rng = substream(seed, 0);
    let mut draws: Vec<u32> = Vec::with_capacity(n);
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        draws.clear();
        let mut sum = 0u64;
        for _ in 0..n {
            let d = off.sample(&mut rng);
            sum += u64::from(d);
            draws.push(d);
        }
        if sum != target {
            continue;
        }
        // First minimum of the prefix walk; the valid sequence starts just
        // after it.
        let mut walk = 0i64;
        let mut best = i64::MAX;
        let mut best_at = 0;
        for (j, d) in draws.iter().enumerate() {
            walk += i64::from(*d) - 1;
            if walk < best {
                best = walk;
                best_at = j;
            }
        }
        let start = (best_at + 1) % n;
        let mut rotated = Vec::with_capacity(n);
        rotated.extend_from_slice(&draws[start..]);
        rotated.extend_from_slice(&draws[..start]);
        return Ok(OrderedTree::new(rotated)
            .expect("cycle-lemma rotation yields a valid degree sequence"));
    }
    Err(Error::Rejection { attempts: MAX_REJECTION_ATTEMPTS, rate: 0.0 })
}

/// Number of cyclic degree windows of the conditioned tree matching the
/// pattern's sequence. On the canonical rotation no window wraps around and
/// matches, so this equals the exact fringe count of the sampled tree.
pub fn gw_subtree_count(
    n: usize,
    tree: &OrderedTree,
    off: &OffspringDistribution,
    seed: u64,
) -> Result<u64> {
    let sample = gw_conditioned_degrees(off, n, seed)?;
    let degrees = sample.degrees();
    let pat = tree.degrees();
    let k = pat.len();
    if k > n {
        return Ok(0);
    }
    let mut count = 0u64;
    for i in 0..n {
        if (0..k).all(|j| degrees[(i + j) % n] == pat[j]) {
            count += 1;
        }
    }
    Ok(count)
}

/// Linear correction coefficients for an arbitrary window function over the
/// working offspring table: `alpha = sum_j Cov(f, xi_j) / Var(xi)` and
/// `beta = alpha * E(xi) - E(f)`, by exact enumeration of support windows.
fn linear_correction(
    f: &dyn Fn(&[u32]) -> f64,
    ell: usize,
    off: &OffspringDistribution,
) -> Result<(f64, f64)> {
    if ell == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    let support = off.support();
    let probs: Vec<f64> = support.iter().map(|k| off.probs[*k as usize]).collect();
    let tuples = (support.len() as u128).checked_pow(ell as u32).unwrap_or(u128::MAX);
    let budget = ExactOptions::default().budget;
    if tuples > u128::from(budget) {
        return Err(Error::Budget { needed: tuples, budget });
    }
    let mut ef = NeumaierSum::new();
    let mut ef_xi: Vec<NeumaierSum> = (0..ell).map(|_| NeumaierSum::new()).collect();
    let mut window = vec![0u32; ell];
    for_each_index_window(support.len(), ell, |idx| {
        let mut p = 1.0;
        for (slot, i) in window.iter_mut().zip(idx) {
            *slot = support[*i];
            p *= probs[*i];
        }
        let val = f(&window);
        ef.add(p * val);
        for (acc, d) in ef_xi.iter_mut().zip(&window) {
            acc.add(p * val * f64::from(*d));
        }
    });
    let ef = ef.total();
    let mut cov_sum = NeumaierSum::new();
    for acc in ef_xi {
        cov_sum.add(acc.total() - ef * off.mean());
    }
    let alpha = cov_sum.total() / off.variance();
    let beta = alpha * off.mean() - ef;
    Ok((alpha, beta))
}

/// Correction coefficients for a fringe statistic: `alpha` projects out the
/// conditioning defect, `beta` recenters to mean zero.
pub fn gw_alpha_beta(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    off: &OffspringDistribution,
) -> Result<(f64, f64)> {
    let f = |window: &[u32]| {
        let degrees: Vec<i64> = window.iter().map(|d| i64::from(*d)).collect();
        pure_stat_value(stat, &degrees)
    };
    linear_correction(&f, stat.max_size(), off)
}

/// Centered block factor for `stat` over the offspring source. The mean is
/// exactly zero by the choice of `beta`, so the factor declares it.
pub fn gw_factor(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    off: &OffspringDistribution,
) -> Result<BlockFactor> {
    let (alpha, beta) = gw_alpha_beta(stat, off)?;
    Ok(BlockFactor::gw_fringe(stat.clone(), alpha, beta).with_known_mean(0.0))
}

/// How to compute the asymptotic variance of a centered fringe factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GwSigmaMode {
    /// Exact enumeration over the working table; `n`, `reps`, `seed` unused.
    Exact,
    /// Monte Carlo on the unconditioned sequence, `Var(S_n) / n`.
    Mc,
}

/// Asymptotic variance of the centered factor for `stat` over `off`.
pub fn gw_sigma_squared(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    off: &OffspringDistribution,
    mode: GwSigmaMode,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<f64> {
    let bf = gw_factor(stat, off)?;
    let src = off.as_source()?;
    match mode {
        GwSigmaMode::Exact => Ok(exact_moments(&bf, &src)?.sigma2),
        GwSigmaMode::Mc => Ok(sigma_squared_mc(&bf, &src, n, reps, seed)?.estimate),
    }
}

/// Exact mean of the centered factor together with a Monte Carlo estimate of
/// `Cov(S_n, Z_n) / n` on the unconditioned sequence, where `Z_n` is the
/// degree sum. Both should be near zero for a well-centered factor.
#[derive(Debug, Clone, Serialize)]
pub struct CenteringCheck {
    /// Exactly enumerated mean of the centered factor.
    pub exact_mean: f64,
    /// Estimated covariance between the factor's partial sum and the degree
    /// sum, divided by `n`.
    pub cov_over_n: f64,
    /// Jackknife standard error of `cov_over_n`.
    pub cov_std_error: f64,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
}

/// Verifies the centering of the factor for `stat`: the exact mean (zero up
/// to rounding by construction) and the per-step covariance with the
/// conditioning statistic, estimated over `reps` unconditioned paths.
pub fn gw_centering_check(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    off: &OffspringDistribution,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<CenteringCheck> {
    let bf = gw_factor(stat, off)?;
    let src = off.as_source()?;
    if n < bf.ell() {
        return Err(Error::invalid(format!(
            "need at least {} summands, got {n}",
            bf.ell()
        )));
    }
    if reps < 3 {
        return Err(Error::invalid("the jackknife needs at least 3 replicas"));
    }
    let mean = exact_mean(&bf, &src, ExactOptions::default().budget)?;
    let len = n + bf.ell() - 1;
    let rows = run_replicas(seed, 0, reps as usize, |_, rng| -> Result<(f64, f64)> {
        let mut draws = Vec::new();
        draw_into(&src, rng, len, &mut draws);
        let s = sum_windows(&bf, &draws, n)?;
        let mut z = NeumaierSum::new();
        for v in &draws[..n] {
            z.add(v.as_int()? as f64);
        }
        Ok((s, z.total()))
    });
    let pairs: Vec<(f64, f64)> = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (cov, se) = jackknife_covariance(&pairs);
    Ok(CenteringCheck {
        exact_mean: mean,
        cov_over_n: cov / n as f64,
        cov_std_error: se / n as f64,
        n,
        reps,
        seed,
    })
}

/// One positive support degree and the centered factor's value on the
/// constant window of that degree. A degenerate factor would need every
/// residual to vanish.
#[derive(Debug, Clone, Serialize)]
pub struct SupportResidual {
    pub degree: u32,
    /// Value of `-alpha * degree + beta`; the indicator part is zero on a
    /// constant positive window because its degree sum cannot be `size - 1`.
    pub residual: f64,
}

/// Certificate that the centered factor for a nonzero fringe statistic has
/// positive asymptotic variance.
///
/// Two ingredients: were the variance zero, the factor's block sums would be
/// a function of the boundary windows alone, forcing the residual
/// `-alpha * j + beta` to vanish on every constant window of a positive
/// support degree (two distinct positive degrees then force `alpha = beta =
/// 0`); and the two recorded configurations share their boundary windows yet
/// have indicator block sums differing by exactly the smallest pattern's
/// coefficient, which contradicts boundary determinism. The embedded middle
/// plants the smallest pattern inside a run of the background degree; runs
/// of a degree of at least two admit no other pattern window, so no other
/// term moves.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyCertificate {
    pub alpha: f64,
    pub beta: f64,
    /// Centered-factor values on constant windows, one per positive support
    /// degree.
    pub support_residuals: Vec<SupportResidual>,
    /// Background degree filling the boundary windows and the plain middle.
    pub background: u32,
    /// Shared boundary window, `ell - 1` copies of the background degree.
    pub boundary: Vec<u32>,
    /// Middle of the first configuration: background degrees only.
    pub middle_plain: Vec<u32>,
    /// Middle of the second configuration: the smallest pattern's sequence.
    pub middle_embedded: Vec<u32>,
    /// Coefficient of the smallest pattern, the exact block-sum difference.
    pub leading_coefficient: f64,
    /// Replay of the two configurations through the two-configuration check
    /// with the indicator part alone.
    pub rc2: Rc2Witness,
    /// True when the block sums differ beyond tolerance.
    pub sigma_positive: bool,
}

/// Builds the degeneracy certificate for `stat` over `off`.
///
/// Requires at least two distinct positive degrees in the support; a support
/// of the form `{0, r}` is outside the argument's scope and is reported as
/// unsupported rather than decided.
pub fn gw_degeneracy_argument(
    stat: &LinearSubtreeStatistic<OrderedTree>,
    off: &OffspringDistribution,
) -> Result<DegeneracyCertificate> {
    let positives: Vec<u32> = off.support().into_iter().filter(|k| *k >= 1).collect();
    if positives.len() < 2 {
        return Err(Error::unsupported(
            "support {0, r} is outside the argument's scope: it needs two distinct \
             positive degrees to pin down the linear correction",
        ));
    }
    let (alpha, beta) = gw_alpha_beta(stat, off)?;
    let ell = stat.max_size();
    let support_residuals: Vec<SupportResidual> = positives
        .iter()
        .map(|j| SupportResidual {
            degree: *j,
            residual: beta - alpha * f64::from(*j),
        })
        .collect();
    // Background of degree >= 2: the larger of two distinct positives.
    let background = *positives.iter().max().expect("nonempty positives");
    debug_assert!(background >= 2, "two distinct positive degrees put the max at 2 or more");
    let (pattern, leading_coefficient) = stat.leading();
    let boundary = vec![background; ell - 1];
    let middle_plain = vec![background; pattern.size()];
    let middle_embedded = pattern.degrees().to_vec();
    let indicator_only = BlockFactor::gw_fringe(stat.clone(), 0.0, 0.0);
    let to_values = |xs: &[u32]| -> Vec<Value> {
        xs.iter().map(|x| Value::Int(i64::from(*x))).collect()
    };
    let bvals = to_values(&boundary);
    let rc2 = rc2_witness_check(
        &indicator_only,
        &bvals,
        &bvals,
        &to_values(&middle_plain),
        &to_values(&middle_embedded),
    )?;
    let sigma_positive = rc2.differs;
    Ok(DegeneracyCertificate {
        alpha,
        beta,
        support_residuals,
        background,
        boundary,
        middle_plain,
        middle_embedded,
        leading_coefficient,
        rc2,
        sigma_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_half_quarter() -> OffspringDistribution {
        OffspringDistribution::finite(vec![0.25, 0.5, 0.25]).expect("critical table")
    }

    fn leaf_stat() -> LinearSubtreeStatistic<OrderedTree> {
        LinearSubtreeStatistic::count_of(OrderedTree::leaf()).expect("stat")
    }

    #[test]
    fn finite_tables_are_validated() {
        let off = quarter_half_quarter();
        assert!((off.mean() - 1.0).abs() < 1e-15, "mean is 1");
        assert!((off.variance() - 0.5).abs() < 1e-15, "variance is 1/2");
        assert_eq!(off.support(), vec![0, 1, 2], "full support");
        assert_eq!(off.truncated_mass(), 0.0, "finite tables discard nothing");

        let err = OffspringDistribution::finite(vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "zero mass at degree 0 is rejected");
        let err = OffspringDistribution::finite(vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "subcritical tables are rejected");
        let err = OffspringDistribution::finite(vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "non-normalized tables are rejected");

        let gapped = OffspringDistribution::finite(vec![0.5, 0.0, 0.5]).expect("critical");
        assert_eq!(gapped.support(), vec![0, 2], "interior zeros drop out of the support");
    }

    #[test]
    fn presets_build_truncated_renormalized_tables() {
        let poisson = OffspringDistribution::preset("poisson1").expect("preset");
        let e_inv = (-1.0f64).exp();
        assert!((poisson.probs()[0] - e_inv).abs() < 1e-12, "P(0) is 1/e");
        assert!((poisson.probs()[2] - e_inv / 2.0).abs() < 1e-12, "P(2) is 1/(2e)");
        assert!(poisson.truncated_mass() < 1e-30, "Poisson tail beyond 30 is negligible");
        assert!((poisson.mean() - 1.0).abs() < 1e-12, "working mean stays at 1");
        assert!((poisson.variance() - 1.0).abs() < 1e-12, "working variance stays at 1");

        let geom = OffspringDistribution::preset("geom-half").expect("preset");
        assert!((geom.probs()[0] - 0.5).abs() < 1e-9, "P(0) is 1/2");
        let tail = geom.truncated_mass();
        assert!(tail > 4e-10 && tail < 5e-10, "geometric discards about 2^-31, got {tail}");
        assert!((geom.mean() - 1.0).abs() < 1e-7, "working mean near 1, got {}", geom.mean());
        assert!((geom.variance() - 2.0).abs() < 1e-6, "working variance near 2");

        let err = OffspringDistribution::preset("zeta").unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "unknown preset is rejected");
        let err = OffspringDistribution::preset_with_truncation("poisson1", 1).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "truncation below 2 is rejected");
    }

    #[test]
    fn sampling_matches_the_table_frequencies() {
        let cases = [
            OffspringDistribution::preset("poisson1").expect("preset"),
            OffspringDistribution::preset("geom-half").expect("preset"),
            quarter_half_quarter(),
        ];
        for off in &cases {
            let mut rng = substream(97, 0);
            let reps = 20_000usize;
            let mut zeros = 0usize;
            for _ in 0..reps {
                if off.sample(&mut rng) == 0 {
                    zeros += 1;
                }
            }
            let p0 = off.probs()[0];
            let freq = zeros as f64 / reps as f64;
            let se = (p0 * (1.0 - p0) / reps as f64).sqrt();
            assert!(
                (freq - p0).abs() < 5.0 * se,
                "{}: zero frequency {freq} not within 5 standard errors of {p0}",
                off.label()
            );
        }
    }

    #[test]
    fn degree_indicator_compares_sequences() {
        let leaf = OrderedTree::leaf();
        let cherry = OrderedTree::parse("2,0,0").expect("cherry");
        assert!(gw_degree_indicator(&leaf, &[0]).expect("arity"), "leaf matches (0)");
        assert!(!gw_degree_indicator(&leaf, &[1]).expect("arity"), "leaf rejects (1)");
        assert!(
            gw_degree_indicator(&cherry, &[2, 0, 0]).expect("arity"),
            "cherry matches its own sequence"
        );
        assert!(
            !gw_degree_indicator(&cherry, &[2, 0, 1]).expect("arity"),
            "one mismatched degree fails"
        );
        let err = gw_degree_indicator(&cherry, &[2, 0]).unwrap_err();
        assert!(matches!(err, Error::Arity { got: 2, expected: 3 }), "arity is checked");
    }

    #[test]
    fn tiny_trees_are_forced() {
        let off = OffspringDistribution::preset("poisson1").expect("preset");
        let one = gw_conditioned_degrees(&off, 1, 3).expect("sample");
        assert_eq!(one.degrees(), &[0], "the 1-node tree is a leaf");
        for seed in 0..20 {
            let two = gw_conditioned_degrees(&off, 2, seed).expect("sample");
            assert_eq!(two.degrees(), &[1, 0], "the only 2-node preorder sequence");
        }
    }

    #[test]
    fn three_node_shapes_follow_the_conditional_law() {
        // Conditioned on 3 nodes, P(root degree 2) = p2 p0 / (p2 p0 + p1^2),
        // which is 1/3 for the Poisson preset.
        let off = OffspringDistribution::preset("poisson1").expect("preset");
        let reps = 3000u64;
        let mut cherries = 0usize;
        for seed in 0..reps {
            let tree = gw_conditioned_degrees(&off, 3, seed).expect("sample");
            match tree.degrees() {
                [2, 0, 0] => cherries += 1,
                [1, 1, 0] => {}
                other => panic!("impossible 3-node sequence {other:?}"),
            }
        }
        let freq = cherries as f64 / reps as f64;
        let se = (2.0 / 9.0 / reps as f64).sqrt();
        assert!(
            (freq - 1.0 / 3.0).abs() < 5.0 * se,
            "cherry frequency {freq} not within 5 standard errors of 1/3"
        );
    }

    #[test]
    fn impossible_progeny_exhausts_the_budget() {
        // Support {0, 2} only reaches even degree sums, so 4 nodes (sum 3)
        // can never be accepted.
        let off = OffspringDistribution::finite(vec![0.5, 0.0, 0.5]).expect("critical");
        let err = gw_conditioned_degrees(&off, 4, 0).unwrap_err();
        assert!(
            matches!(err, Error::Rejection { attempts: MAX_REJECTION_ATTEMPTS, .. }),
            "unreachable progeny reports rejection, got {err:?}"
        );
        let five = gw_conditioned_degrees(&off, 5, 0).expect("sum 4 is reachable");
        assert_eq!(five.degrees().iter().sum::<u32>(), 4, "degree sum is n - 1");
    }

    #[test]
    fn cyclic_count_equals_direct_fringe_count() {
        let off = OffspringDistribution::preset("poisson1").expect("preset");
        let leaf = OrderedTree::leaf();
        let cherry = OrderedTree::parse("2,0,0").expect("cherry");
        for n in [5usize, 8, 12] {
            for seed in 0..20 {
                let tree = gw_conditioned_degrees(&off, n, seed).expect("sample");
                for pattern in [&leaf, &cherry] {
                    let cyclic = gw_subtree_count(n, pattern, &off, seed).expect("count");
                    let direct = tree.count_fringe(pattern) as u64;
                    assert_eq!(
                        cyclic, direct,
                        "cyclic count disagrees with fringe enumeration at n={n} seed={seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn leaf_correction_matches_closed_forms() {
        // Leaf statistic: alpha = -p0 / Var(xi), beta = alpha - p0.
        let poisson = OffspringDistribution::preset("poisson1").expect("preset");
        let e_inv = (-1.0f64).exp();
        let (a, b) = gw_alpha_beta(&leaf_stat(), &poisson).expect("enumeration");
        assert!((a + e_inv).abs() < 1e-12, "Poisson alpha is -1/e, got {a}");
        assert!((b + 2.0 * e_inv).abs() < 1e-12, "Poisson beta is -2/e, got {b}");

        let geom = OffspringDistribution::preset("geom-half").expect("preset");
        let (a, b) = gw_alpha_beta(&leaf_stat(), &geom).expect("enumeration");
        assert!((a + 0.25).abs() < 1e-5, "geometric alpha is near -1/4, got {a}");
        assert!((b + 0.75).abs() < 1e-5, "geometric beta is near -3/4, got {b}");

        let (a, b) = gw_alpha_beta(&leaf_stat(), &quarter_half_quarter()).expect("enumeration");
        assert!((a + 0.5).abs() < 1e-14, "table alpha is -1/2, got {a}");
        assert!((b + 0.75).abs() < 1e-14, "table beta is -3/4, got {b}");
    }

    #[test]
    fn identity_window_function_is_fully_projected_out() {
        // f(d) = d has alpha = 1, beta = 0: the corrected value vanishes.
        let off = OffspringDistribution::preset("poisson1").expect("preset");
        let f = |w: &[u32]| f64::from(w[0]);
        let (a, b) = linear_correction(&f, 1, &off).expect("enumeration");
        assert!((a - 1.0).abs() < 1e-12, "alpha is 1, got {a}");
        assert!(b.abs() < 1e-12, "beta is 0, got {b}");
    }

    #[test]
    fn centered_factor_has_mean_zero_and_known_values() {
        let off = quarter_half_quarter();
        let bf = gw_factor(&leaf_stat(), &off).expect("factor");
        assert_eq!(bf.known_mean(), Some(0.0), "the factor declares its exact mean");
        let vals: Vec<f64> = (0..3)
            .map(|d| bf.evaluate(&[Value::Int(d)]).expect("evaluate"))
            .collect();
        assert!((vals[0] - 0.25).abs() < 1e-14, "degree 0 maps to 1/4, got {}", vals[0]);
        assert!((vals[1] + 0.25).abs() < 1e-14, "degree 1 maps to -1/4, got {}", vals[1]);
        assert!((vals[2] - 0.25).abs() < 1e-14, "degree 2 maps to 1/4, got {}", vals[2]);
        let sigma2 = gw_sigma_squared(&leaf_stat(), &off, GwSigmaMode::Exact, 0, 0, 0)
            .expect("exact mode ignores sampling arguments");
        assert!((sigma2 - 0.0625).abs() < 1e-14, "sigma^2 is 1/16, got {sigma2}");
    }

    #[test]
    fn exact_and_monte_carlo_sigma_agree() {
        let off = OffspringDistribution::preset("poisson1").expect("preset");
        let stat = leaf_stat();
        let exact = gw_sigma_squared(&stat, &off, GwSigmaMode::Exact, 0, 0, 0).expect("exact");
        // Window length 1 means no lag terms, so the estimator is unbiased;
        // recompute through the factor to read the standard error.
        let bf = gw_factor(&stat, &off).expect("factor");
        let src = off.as_source().expect("source");
        let mc = sigma_squared_mc(&bf, &src, 500, 2000, 31).expect("mc");
        assert!(
            (exact - mc.estimate).abs() < 5.0 * mc.std_error,
            "exact {exact} and Monte Carlo {} disagree beyond 5 standard errors",
            mc.estimate
        );
        let through_mode =
            gw_sigma_squared(&stat, &off, GwSigmaMode::Mc, 500, 2000, 31).expect("mc mode");
        assert_eq!(through_mode, mc.estimate, "mode wrapper reproduces the direct call");
    }

    #[test]
    fn centering_check_is_clean() {
        let off = quarter_half_quarter();
        let check = gw_centering_check(&leaf_stat(), &off, 200, 400, 33).expect("check");
        assert!(check.exact_mean.abs() < 1e-12, "exact mean is zero by construction");
        assert!(
            check.cov_over_n.abs() < 5.0 * check.cov_std_error.max(1e-12),
            "covariance {} exceeds 5 standard errors {}",
            check.cov_over_n,
            check.cov_std_error
        );
    }

    #[test]
    fn degeneracy_certificate_for_the_leaf_statistic() {
        let off = quarter_half_quarter();
        let cert = gw_degeneracy_argument(&leaf_stat(), &off).expect("certificate");
        assert!((cert.alpha + 0.5).abs() < 1e-14, "alpha is -1/2");
        assert_eq!(cert.background, 2, "largest positive support degree");
        assert!(cert.boundary.is_empty(), "window length 1 has empty boundaries");
        assert_eq!(cert.middle_plain, vec![2], "plain middle is the background");
        assert_eq!(cert.middle_embedded, vec![0], "embedded middle is the leaf sequence");
        assert!(
            (cert.rc2.s_b - cert.rc2.s_a - cert.leading_coefficient).abs() < 1e-12,
            "block sums differ by the leading coefficient"
        );
        assert!(cert.sigma_positive, "the certificate must certify a positive variance");
        for r in &cert.support_residuals {
            assert!(
                r.residual.abs() > 1e-12,
                "degree {} residual vanishes, which only a degenerate factor allows",
                r.degree
            );
        }
    }

    #[test]
    fn degeneracy_certificate_with_two_patterns() {
        let stat = LinearSubtreeStatistic::new(vec![
            (OrderedTree::leaf(), 1.0),
            (OrderedTree::parse("2,0,0").expect("cherry"), -2.0),
        ])
        .expect("stat");
        let off = quarter_half_quarter();
        let cert = gw_degeneracy_argument(&stat, &off).expect("certificate");
        assert_eq!(cert.boundary, vec![2, 2], "window length 3 pads two background degrees");
        assert_eq!(cert.leading_coefficient, 1.0, "smallest pattern is the leaf");
        assert!(
            (cert.rc2.s_b - cert.rc2.s_a - 1.0).abs() < 1e-12,
            "only the leaf count moves, by exactly one"
        );
        assert!(cert.sigma_positive, "nonzero statistic is certified nondegenerate");
    }

    #[test]
    fn degeneracy_argument_declines_single_positive_support() {
        let off = OffspringDistribution::finite(vec![0.5, 0.0, 0.5]).expect("critical");
        let err = gw_degeneracy_argument(&leaf_stat(), &off).unwrap_err();
        assert!(
            matches!(err, Error::Unsupported(_)),
            "support {{0, 2}} is declined, not decided, got {err:?}"
        );
    }
}
