use crate::error::Error;
use crate::factor::BlockFactor;
use crate::source::{SourceDistribution, Value};
use crate::stats::NeumaierSum;
use crate::Result;
use serde::Serialize;

/// Exact first and second moments of the block-factor sequence.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSummary {
    /// E X_0.
    pub mean: f64,
    /// Var X_0.
    pub variance: f64,
    /// Cov(X_0, X_k) for k = 1..=m.
    pub lag_covs: Vec<f64>,
    /// Asymptotic variance Var X_0 + 2 sum_k Cov(X_0, X_k), zeroed when it
    /// falls within `tolerance` of 0.
    pub sigma2: f64,
    /// The same sum before the near-zero clamp.
    pub sigma2_raw: f64,
}

/// Options for the exact enumerations.
#[derive(Debug, Clone, Copy)]
pub struct ExactOptions {
    /// Maximum number of window tuples an enumeration may visit.
    pub budget: u64,
    /// Absolute tolerance for near-zero clamping and comparisons.
    pub tolerance: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { budget: 50_000_000, tolerance: crate::DEFAULT_TOLERANCE }
    }
}

/// Visits every window of `len` indices over an alphabet of size `k`, in
/// mixed-radix order with the last coordinate fastest.
pub(crate) fn for_each_index_window(k: usize, len: usize, mut f: impl FnMut(&[usize])) {
    debug_assert!(k >= 1 && len >= 1);
    let mut w = vec![0usize; len];
    loop {
        f(&w);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            w[pos] += 1;
            if w[pos] < k {
                break;
            }
            w[pos] = 0;
        }
    }
}

/// Evaluates any factor on a window of atom indices, via the dense table
/// when there is one and through atom values otherwise.
pub(crate) struct IndexEvaluator<'a> {
    bf: &'a BlockFactor,
    values: Vec<Value>,
    window: Vec<Value>,
    is_table: bool,
}

impl<'a> IndexEvaluator<'a> {
    pub(crate) fn new(bf: &'a BlockFactor, src: &SourceDistribution) -> Result<Self> {
        let atoms = src.atoms().ok_or_else(|| {
            Error::unsupported(
                "exact enumeration needs a finite alphabet; use the Monte Carlo estimator",
            )
        })?;
        Ok(IndexEvaluator {
            bf,
            values: atoms.iter().map(|a| Value::scalar(a.value)).collect(),
            window: Vec::with_capacity(bf.ell()),
            is_table: bf.table_entries().is_some(),
        })
    }

    pub(crate) fn eval(&mut self, idx_window: &[usize]) -> Result<f64> {
        if self.is_table {
            return Ok(self.bf.eval_indices(idx_window));
        }
        self.window.clear();
        for &i in idx_window {
            self.window.push(self.values[i].clone());
        }
        self.bf.evaluate(&self.window)
    }
}

fn checked_pow(k: usize, e: usize) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(k as u128))
}

/// Exact E X_0 by a single pass over the window distribution.
pub(crate) fn exact_mean(bf: &BlockFactor, src: &SourceDistribution, budget: u64) -> Result<f64> {
    bf.validate_for(src)?;
    let atoms = src
        .atoms()
        .ok_or_else(|| Error::unsupported("exact mean needs a finite alphabet"))?
        .to_vec();
    let k = atoms.len();
    let ell = bf.ell();
    let needed = checked_pow(k, ell);
    if needed > budget as u128 {
        return Err(Error::Budget { needed, budget });
    }
    let probs: Vec<f64> = atoms.iter().map(|a| a.prob).collect();
    let mut evaluator = IndexEvaluator::new(bf, src)?;
    let mut acc = NeumaierSum::new();
    let mut eval_err = None;
    for_each_index_window(k, ell, |w| {
        if eval_err.is_some() {
            return;
        }
        match evaluator.eval(w) {
            Ok(v) => {
                let p: f64 = w.iter().map(|&i| probs[i]).product();
                acc.add(p * v);
            }
            Err(e) => eval_err = Some(e),
        }
    });
    if let Some(e) = eval_err {
        return Err(e);
    }
    Ok(acc.total())
}

/// Exact mean, variance, lag covariances, and asymptotic variance by full
/// enumeration of atom windows, with the default budget and tolerance.
pub fn exact_moments(bf: &BlockFactor, src: &SourceDistribution) -> Result<MomentSummary> {
    exact_moments_with(bf, src, &ExactOptions::default())
}

/// See [`exact_moments`].
pub fn exact_moments_with(
    bf: &BlockFactor,
    src: &SourceDistribution,
    opts: &ExactOptions,
) -> Result<MomentSummary> {
    bf.validate_for(src)?;
    let atoms = src
        .atoms()
        .ok_or_else(|| {
            Error::unsupported(
                "exact moments need a finite alphabet; use the Monte Carlo estimator",
            )
        })?
        .to_vec();
    let k = atoms.len();
    let ell = bf.ell();
    let m = bf.m();

    let needed: u128 =
        (0..=m).map(|lag| checked_pow(k, ell + lag)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > opts.budget as u128 {
        return Err(Error::Budget { needed, budget: opts.budget });
    }

    let probs: Vec<f64> = atoms.iter().map(|a| a.prob).collect();
    let mut evaluator = IndexEvaluator::new(bf, src)?;

    // One pass for E X and E X^2.
    let mut mean_acc = NeumaierSum::new();
    let mut sq_acc = NeumaierSum::new();
    let mut eval_err = None;
    for_each_index_window(k, ell, |w| {
        if eval_err.is_some() {
            return;
        }
        match evaluator.eval(w) {
            Ok(v) => {
                let p: f64 = w.iter().map(|&i| probs[i]).product();
                mean_acc.add(p * v);
                sq_acc.add(p * v * v);
            }
            Err(e) => eval_err = Some(e),
        }
    });
    if let Some(e) = eval_err {
        return Err(e);
    }
    let mean = mean_acc.total();
    let variance = sq_acc.total() - mean * mean;

    // One pass per lag for E[X_0 X_k].
    let mut lag_covs = Vec::with_capacity(m);
    for lag in 1..=m {
        let mut acc = NeumaierSum::new();
        let mut err = None;
        for_each_index_window(k, ell + lag, |w| {
            if err.is_some() {
                return;
            }
            let a = match evaluator.eval(&w[..ell]) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let b = match evaluator.eval(&w[lag..lag + ell]) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let p: f64 = w.iter().map(|&i| probs[i]).product();
            acc.add(p * a * b);
        });
        if let Some(e) = err {
            return Err(e);
        }
        lag_covs.push(acc.total() - mean * mean);
    }

    let mut sigma2_raw = variance;
    for c in &lag_covs {
        sigma2_raw += 2.0 * c;
    }
    let sigma2 = if sigma2_raw.abs() <= opts.tolerance { 0.0 } else { sigma2_raw };
    Ok(MomentSummary { mean, variance, lag_covs, sigma2, sigma2_raw })
}

/// Exact Var(S_n) with the default budget.
pub fn var_sn_exact(bf: &BlockFactor, src: &SourceDistribution, n: usize) -> Result<f64> {
    var_sn_exact_with(bf, src, n, &ExactOptions::default())
}

/// Exact Var(S_n): `n sigma^2 - 2 sum_k k Cov(X_0, X_k)` for n >= m, and the
/// direct double covariance sum for shorter stretches.
pub fn var_sn_exact_with(
    bf: &BlockFactor,
    src: &SourceDistribution,
    n: usize,
    opts: &ExactOptions,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mom = exact_moments_with(bf, src, opts)?;
    let m = bf.m();
    if n >= m {
        let mut v = n as f64 * mom.sigma2_raw;
        for (k, c) in mom.lag_covs.iter().enumerate() {
            v -= 2.0 * (k + 1) as f64 * c;
        }
        Ok(v)
    } else {
        let mut v = n as f64 * mom.variance;
        for (k, c) in mom.lag_covs.iter().enumerate() {
            let lag = k + 1;
            if lag < n {
                v += 2.0 * (n - lag) as f64 * c;
            }
        }
        Ok(v)
    }
}
