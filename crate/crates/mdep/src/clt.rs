//! Monte Carlo diagnostics for the normal limit of block sums and for the
//! distributional invariance of the degenerate case.

use serde::Serialize;

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::moments::exact_mean;
use crate::path::{draw_into, sum_windows};
use crate::rng::run_replicas;
use crate::source::{Component, SourceDistribution};
use crate::stats::{
    ks_distance, ks_threshold_one_sample, ks_threshold_two_sample, ks_two_sample, mean,
    mean_and_se, normal_cdf, sample_variance,
};
use crate::Result;

/// Significance level behind the default Kolmogorov-Smirnov thresholds.
pub const DEFAULT_KS_ALPHA: f64 = 1e-3;

/// Diagnostics for one path length.
#[derive(Debug, Clone, Serialize)]
pub struct CltRow {
    pub n: usize,
    /// Sample mean of S_n.
    pub mean: f64,
    /// Standard error of that mean.
    pub mean_std_error: f64,
    /// Sample variance of S_n.
    pub variance: f64,
    /// Second moment of the standardized sums; 1 by construction since the
    /// standardization uses the population-style standard deviation.
    pub standardized_m2: f64,
    /// Fourth moment of the standardized sums; 3 for a normal limit.
    pub standardized_m4: f64,
    pub standardized_m4_std_error: f64,
    /// Kolmogorov-Smirnov distance of the standardized sums to N(0, 1).
    pub ks_normal: f64,
    /// One-sample threshold at [`DEFAULT_KS_ALPHA`].
    pub ks_threshold: f64,
}

/// Normality diagnostics across path lengths.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub rows: Vec<CltRow>,
    pub reps: u64,
    pub seed: u64,
}

/// Simulates `reps` paths per entry of `n_list` and reports moment and
/// empirical-CDF diagnostics of the standardized block sums.
///
/// Replicas for the j-th path length use substreams `j*reps..(j+1)*reps`, so
/// every entry is reproducible in isolation.
pub fn simulate_clt(
    bf: &BlockFactor,
    src: &SourceDistribution,
    n_list: &[usize],
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    bf.validate_for(src)?;
    if n_list.is_empty() {
        return Err(Error::invalid("need at least one path length"));
    }
    if n_list.iter().any(|&n| n < bf.ell()) {
        return Err(Error::invalid("every path length must be at least the block length"));
    }
    if reps < 100 {
        return Err(Error::invalid("need at least 100 replicas for distribution diagnostics"));
    }
    let ell = bf.ell();
    let mut rows = Vec::with_capacity(n_list.len());
    for (j, &n) in n_list.iter().enumerate() {
        let totals: Vec<Result<f64>> =
            run_replicas(seed, j as u64 * reps, reps as usize, |_, rng| {
                let mut draws = Vec::new();
                draw_into(src, rng, n + ell - 1, &mut draws);
                sum_windows(bf, &draws, n)
            });
        let totals = totals.into_iter().collect::<Result<Vec<f64>>>()?;
        let (m, m_se) = mean_and_se(&totals);
        let variance = sample_variance(&totals);
        let r = totals.len() as f64;
        let sd_pop = (variance * (r - 1.0) / r).sqrt();
        if sd_pop == 0.0 {
            return Err(Error::domain(
                "all replica sums are identical; the standardized diagnostics are undefined",
            ));
        }
        let zs: Vec<f64> = totals.iter().map(|x| (x - m) / sd_pop).collect();
        let standardized_m2 = mean(&zs.iter().map(|z| z * z).collect::<Vec<f64>>());
        let z4: Vec<f64> = zs.iter().map(|z| z.powi(4)).collect();
        let (m4, m4_se) = mean_and_se(&z4);
        let ks_normal = ks_distance(&zs, |x| normal_cdf(x, 0.0, 1.0));
        rows.push(CltRow {
            n,
            mean: m,
            mean_std_error: m_se,
            variance,
            standardized_m2,
            standardized_m4: m4,
            standardized_m4_std_error: m4_se,
            ks_normal,
            ks_threshold: ks_threshold_one_sample(DEFAULT_KS_ALPHA, totals.len()),
        });
    }
    Ok(SimulationReport { rows, reps, seed })
}

/// Two-sample comparison of centered block sums at two path lengths.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionCheck {
    /// Two-sample Kolmogorov-Smirnov distance.
    pub distance: f64,
    /// Rejection threshold at `alpha`.
    pub threshold: f64,
    /// True when the distance stays below the threshold, consistent with
    /// `S_n - E S_n` having one fixed distribution for all tested lengths.
    pub pass: bool,
    pub alpha: f64,
    pub n1: usize,
    pub n2: usize,
    pub reps: u64,
    pub seed: u64,
}

/// Draws independent samples of `S_{n1} - E S_{n1}` and `S_{n2} - E S_{n2}`
/// and compares their empirical distributions.
///
/// For a telescoping factor the two distributions coincide whenever both
/// lengths reach `ell - 1`, so a pass supports degeneracy and a clear fail
/// refutes it. Centering requires an exact mean: either declared on the
/// factor or enumerable from a finite alphabet.
pub fn degenerate_distribution_check(
    bf: &BlockFactor,
    src: &SourceDistribution,
    n1: usize,
    n2: usize,
    reps: u64,
    seed: u64,
) -> Result<DistributionCheck> {
    bf.validate_for(src)?;
    let floor = bf.m().max(1);
    if n1 < floor || n2 < floor {
        return Err(Error::invalid(
            "both path lengths must be at least max(ell - 1, 1)",
        ));
    }
    if reps < 100 {
        return Err(Error::invalid("need at least 100 replicas for distribution diagnostics"));
    }
    let mu = match bf.known_mean() {
        Some(mu) => mu,
        None if src.atoms().is_some() => exact_mean(bf, src, 50_000_000)?,
        None => {
            return Err(Error::unsupported(
                "centering needs an exact mean: declare one on the factor or use a finite \
                 alphabet",
            ))
        }
    };
    let ell = bf.ell();
    let sample = |n: usize, offset: u64| -> Result<Vec<f64>> {
        let totals: Vec<Result<f64>> = run_replicas(seed, offset, reps as usize, |_, rng| {
            let mut draws = Vec::new();
            draw_into(src, rng, n + ell - 1, &mut draws);
            Ok(sum_windows(bf, &draws, n)? - n as f64 * mu)
        });
        totals.into_iter().collect()
    };
    let a = sample(n1, 0)?;
    let b = sample(n2, reps)?;
    let distance = ks_two_sample(&a, &b);
    let threshold = ks_threshold_two_sample(DEFAULT_KS_ALPHA, a.len(), b.len());
    Ok(DistributionCheck {
        distance,
        threshold,
        pass: distance < threshold,
        alpha: DEFAULT_KS_ALPHA,
        n1,
        n2,
        reps,
        seed,
    })
}

/// Estimated second and fourth moments of the built-in pair-source factor.
#[derive(Debug, Clone, Serialize)]
pub struct RnMoments {
    pub m2: f64,
    pub m2_std_error: f64,
    pub m4: f64,
    pub m4_std_error: f64,
    pub reps: u64,
    pub seed: u64,
}

/// Estimates E X^2 and E X^4 for the built-in factor over (uniform, normal)
/// pairs, a stationary 2-dependent sequence whose block sums are exactly
/// N(0, 2) while X itself is not normal.
pub fn rn_example_moments(reps: u64, seed: u64) -> Result<RnMoments> {
    if reps < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }
    let bf = BlockFactor::rn_example();
    let src = SourceDistribution::composite(vec![Component::Uniform01, Component::StdNormal])?;
    let samples: Vec<Result<(f64, f64)>> = run_replicas(seed, 0, reps as usize, |_, rng| {
        let mut draws = Vec::with_capacity(3);
        draw_into(&src, rng, 3, &mut draws);
        let x = bf.evaluate(&draws)?;
        let x2 = x * x;
        Ok((x2, x2 * x2))
    });
    let samples = samples.into_iter().collect::<Result<Vec<(f64, f64)>>>()?;
    let squares: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let fourths: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let (m2, m2_std_error) = mean_and_se(&squares);
    let (m4, m4_std_error) = mean_and_se(&fourths);
    Ok(RnMoments { m2, m2_std_error, m4, m4_std_error, reps, seed })
}
