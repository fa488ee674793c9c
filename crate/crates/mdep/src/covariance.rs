//! Joint covariance estimation for several statistics driven by one source.

use rand::Rng;
use serde::Serialize;

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::path::{draw_into, sum_windows};
use crate::rng::{run_replicas, substream};
use crate::source::SourceDistribution;
use crate::stats::symmetric_eigenvalues;
use crate::Result;

/// Estimated `n^{-1} Cov(S_n^(i), S_n^(j))` matrix for coupled statistics.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceEstimate {
    /// One label per statistic, in input order.
    pub labels: Vec<String>,
    /// Symmetric matrix of scaled covariances.
    pub matrix: Vec<Vec<f64>>,
    /// Smallest eigenvalue of the matrix.
    pub min_eigenvalue: f64,
    /// Bootstrap percentile interval (2.5%, 97.5%) for the smallest
    /// eigenvalue, from 200 resamples of the replica sums.
    pub min_eigenvalue_ci: (f64, f64),
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
}

const BOOTSTRAP_RESAMPLES: usize = 200;
const MAX_FACTORS: usize = 10;

fn covariance_from_totals(totals: &[Vec<f64>], count: usize, n: f64) -> Vec<Vec<f64>> {
    let r = totals.len();
    let mut means = vec![0.0; count];
    for row in totals {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= r as f64;
    }
    let mut matrix = vec![vec![0.0; count]; count];
    for i in 0..count {
        for j in i..count {
            let mut acc = 0.0;
            let mut comp = 0.0;
            for row in totals {
                let term = (row[i] - means[i]) * (row[j] - means[j]);
                let t = acc + term;
                comp += if acc.abs() >= term.abs() { (acc - t) + term } else { (term - t) + acc };
                acc = t;
            }
            let cov = (acc + comp) / ((r - 1) as f64 * n);
            matrix[i][j] = cov;
            matrix[j][i] = cov;
        }
    }
    matrix
}

/// Estimates the scaled covariance matrix of several block sums driven by
/// the same draws, together with its smallest eigenvalue.
///
/// All factors see one shared path per replica (length `n` plus the largest
/// window overhang), so perfectly dependent statistics come out exactly
/// equal rather than equal up to noise.
pub fn covariance_matrix_mc(
    factors: &[BlockFactor],
    src: &SourceDistribution,
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<CovarianceEstimate> {
    if factors.is_empty() {
        return Err(Error::invalid("need at least one factor"));
    }
    if factors.len() > MAX_FACTORS {
        return Err(Error::invalid(format!(
            "at most {MAX_FACTORS} coupled statistics are supported"
        )));
    }
    for bf in factors {
        bf.validate_for(src)?;
    }
    let max_ell = factors.iter().map(|f| f.ell()).max().expect("nonempty");
    if n < max_ell {
        return Err(Error::invalid("n must be at least the largest block length"));
    }
    if reps < 3 {
        return Err(Error::invalid("need at least 3 replicas"));
    }

    let totals: Vec<Result<Vec<f64>>> = run_replicas(seed, 0, reps as usize, |_, rng| {
        let mut draws = Vec::new();
        draw_into(src, rng, n + max_ell - 1, &mut draws);
        factors.iter().map(|bf| sum_windows(bf, &draws, n)).collect()
    });
    let totals = totals.into_iter().collect::<Result<Vec<Vec<f64>>>>()?;

    let count = factors.len();
    let matrix = covariance_from_totals(&totals, count, n as f64);
    let min_eigenvalue = symmetric_eigenvalues(&matrix)[0];

    // Percentile bootstrap over replicas; the resampling stream sits just
    // past the replica substreams.
    let mut boot_rng = substream(seed, reps);
    let r = totals.len();
    let mut boot_mins = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = Vec::with_capacity(r);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        resample.clear();
        for _ in 0..r {
            resample.push(totals[boot_rng.random_range(0..r)].clone());
        }
        let m = covariance_from_totals(&resample, count, n as f64);
        boot_mins.push(symmetric_eigenvalues(&m)[0]);
    }
    boot_mins.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let lo = boot_mins[(0.025 * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize];
    let hi = boot_mins[(0.975 * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize];

    Ok(CovarianceEstimate {
        labels: factors.iter().map(|f| f.label()).collect(),
        matrix,
        min_eigenvalue,
        min_eigenvalue_ci: (lo, hi),
        n,
        reps,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::sigma_squared_mc;

    fn product_factor() -> (BlockFactor, SourceDistribution) {
        let src = SourceDistribution::bernoulli_half();
        let bf = BlockFactor::table_for_source(2, &src, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        (bf, src)
    }

    #[test]
    fn single_factor_recovers_the_variance_estimate() {
        let (bf, src) = product_factor();
        let est = covariance_matrix_mc(std::slice::from_ref(&bf), &src, 200, 2000, 21).unwrap();
        let var = sigma_squared_mc(&bf, &src, 200, 2000, 21).unwrap();
        assert_eq!(est.matrix.len(), 1);
        assert!((est.matrix[0][0] - var.estimate).abs() < 1e-9);
        assert!((est.min_eigenvalue - est.matrix[0][0]).abs() < 1e-12);
    }

    #[test]
    fn duplicated_factor_is_perfectly_coupled() {
        let (bf, src) = product_factor();
        let est = covariance_matrix_mc(&[bf.clone(), bf], &src, 100, 1000, 22).unwrap();
        assert_eq!(est.matrix[0][1], est.matrix[0][0]);
        assert_eq!(est.matrix[1][0], est.matrix[1][1]);
        // Rank-1 matrix: the smallest eigenvalue is 0 up to rounding.
        assert!(est.min_eigenvalue.abs() < 1e-10 * est.matrix[0][0].abs());
    }

    #[test]
    fn min_eigenvalue_respects_the_rayleigh_bound() {
        let src = SourceDistribution::bernoulli_half();
        let product =
            BlockFactor::table_for_source(2, &src, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let identity = BlockFactor::table_for_source(1, &src, vec![0.0, 1.0]).unwrap();
        let est = covariance_matrix_mc(&[product, identity], &src, 200, 2000, 23).unwrap();
        for i in 0..2 {
            assert!(est.min_eigenvalue <= est.matrix[i][i] + 1e-12);
        }
        assert!(est.min_eigenvalue > 0.0);
        assert!(est.min_eigenvalue_ci.0 <= est.min_eigenvalue);
        assert!(est.min_eigenvalue <= est.min_eigenvalue_ci.1);
        for i in 0..2 {
            for j in 0..2 {
                assert!((est.matrix[i][j] - est.matrix[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shapes_are_validated() {
        let (bf, src) = product_factor();
        assert!(covariance_matrix_mc(&[], &src, 100, 100, 0).is_err());
        assert!(covariance_matrix_mc(std::slice::from_ref(&bf), &src, 1, 100, 0).is_err());
        assert!(covariance_matrix_mc(std::slice::from_ref(&bf), &src, 100, 2, 0).is_err());
        let many: Vec<BlockFactor> = (0..11).map(|_| bf.clone()).collect();
        assert!(covariance_matrix_mc(&many, &src, 100, 100, 0).is_err());
    }
}
