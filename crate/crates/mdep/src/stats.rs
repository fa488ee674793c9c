//! Shared numeric helpers: compensated summation, moment estimates with
//! standard errors, jackknife resampling, distribution distances, and a
//! small symmetric eigensolver.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Neumaier-compensated accumulator; order-independent enough to keep
/// aggregation deterministic and accurate over long replica lists.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    compensated_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (two-pass, compensated).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let r = xs.len();
    assert!(r >= 2, "variance needs at least two observations");
    let m = mean(xs);
    let mut acc = NeumaierSum::new();
    for &x in xs {
        let d = x - m;
        acc.add(d * d);
    }
    acc.total() / (r - 1) as f64
}

/// Mean with its standard error sd/sqrt(r).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let se = (sample_variance(xs) / xs.len() as f64).sqrt();
    (m, se)
}

/// Unbiased sample variance with its jackknife standard error.
pub fn jackknife_variance(xs: &[f64]) -> (f64, f64) {
    let r = xs.len();
    assert!(r >= 3, "jackknife variance needs at least three observations");
    let rf = r as f64;
    let m = mean(xs);
    let mut sc = NeumaierSum::new();
    let mut qc = NeumaierSum::new();
    for &x in xs {
        let c = x - m;
        sc.add(c);
        qc.add(c * c);
    }
    let (sc, qc) = (sc.total(), qc.total());
    let full = (qc - sc * sc / rf) / (rf - 1.0);

    // Leave-one-out variances from the centered sums.
    let mut loo = Vec::with_capacity(r);
    for &x in xs {
        let c = x - m;
        let s1 = sc - c;
        let q1 = qc - c * c;
        loo.push((q1 - s1 * s1 / (rf - 1.0)) / (rf - 2.0));
    }
    let lm = mean(&loo);
    let mut dev = NeumaierSum::new();
    for v in &loo {
        let d = v - lm;
        dev.add(d * d);
    }
    let se = ((rf - 1.0) / rf * dev.total()).sqrt();
    (full, se)
}

/// Unbiased sample covariance of paired observations with its jackknife
/// standard error.
pub fn jackknife_covariance(pairs: &[(f64, f64)]) -> (f64, f64) {
    let r = pairs.len();
    assert!(r >= 3, "jackknife covariance needs at least three observations");
    let rf = r as f64;
    let ma = mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let mb = mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let (mut sa, mut sb, mut p_acc) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    for (a, b) in pairs {
        let (ca, cb) = (a - ma, b - mb);
        sa.add(ca);
        sb.add(cb);
        p_acc.add(ca * cb);
    }
    let (sa, sb, pp) = (sa.total(), sb.total(), p_acc.total());
    let full = (pp - sa * sb / rf) / (rf - 1.0);

    let mut loo = Vec::with_capacity(r);
    for (a, b) in pairs {
        let (ca, cb) = (a - ma, b - mb);
        let s1a = sa - ca;
        let s1b = sb - cb;
        let p1 = pp - ca * cb;
        loo.push((p1 - s1a * s1b / (rf - 1.0)) / (rf - 2.0));
    }
    let lm = mean(&loo);
    let mut dev = NeumaierSum::new();
    for v in &loo {
        let d = v - lm;
        dev.add(d * d);
    }
    let se = ((rf - 1.0) / rf * dev.total()).sqrt();
    (full, se)
}

/// Fourth moment of the standardized sample, with the standard error of the
/// mean of z^4 (conservative for normal data).
pub fn standardized_fourth_moment(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let sd = sample_variance(xs).sqrt();
    let z4: Vec<f64> = xs.iter().map(|x| ((x - m) / sd).powi(4)).collect();
    mean_and_se(&z4)
}

/// Kolmogorov-Smirnov distance between the sample and a reference CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must not contain NaN"));
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / r).max((i + 1) as f64 / r - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = a[i].min(b[j]);
        while i < n && a[i] == t {
            i += 1;
        }
        while j < m && b[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic Kolmogorov quantile c(alpha) = sqrt(-ln(alpha/2)/2).
pub fn kolmogorov_quantile(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 1.0);
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample KS pass threshold at level `alpha` for `r` observations.
pub fn ks_threshold_one_sample(alpha: f64, r: usize) -> f64 {
    kolmogorov_quantile(alpha) / (r as f64).sqrt()
}

/// Two-sample KS pass threshold at level `alpha`.
pub fn ks_threshold_two_sample(alpha: f64, r1: usize, r2: usize) -> f64 {
    kolmogorov_quantile(alpha) * ((r1 + r2) as f64 / (r1 as f64 * r2 as f64)).sqrt()
}

/// CDF of N(mean, sd^2).
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("sd > 0").cdf(x)
}

/// Quantile of the chi-squared distribution with `df` degrees of freedom.
pub fn chi_square_quantile(df: f64, p: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").inverse_cdf(p)
}

/// Equal-width histogram over the sample range.
pub fn histogram(xs: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    assert!(bins >= 1 && !xs.is_empty());
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &x in xs {
        let mut idx = ((x - lo) / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Intended for the small matrices produced by covariance estimation.
pub fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    assert!(n >= 1 && matrix.iter().all(|row| row.len() == n));
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= 1e-28 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let (app, aqq) = (a[p][p], a[q][q]);
                a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                // Each pass writes four scattered cells per row; plain
                // indexing is the readable form here.
                #[allow(clippy::needless_range_loop)]
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[p][k] = a[k][p];
                    a[k][q] = s * akp + c * akq;
                    a[q][k] = a[k][q];
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eig
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_survives_cancellation() {
        assert_eq!(compensated_sum(&[1e16, 1.0, -1e16]), 1.0);
    }

    #[test]
    fn jackknife_variance_matches_direct_leave_one_out() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        let (v, se) = jackknife_variance(&xs);
        assert!((v - sample_variance(&xs)).abs() < 1e-12);

        // Direct leave-one-out recomputation.
        let r = xs.len();
        let mut loo = Vec::new();
        for i in 0..r {
            let rest: Vec<f64> = xs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| *x)
                .collect();
            loo.push(sample_variance(&rest));
        }
        let lm = mean(&loo);
        let direct =
            ((r as f64 - 1.0) / r as f64 * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>())
                .sqrt();
        assert!((se - direct).abs() < 1e-12, "jackknife se {se} vs direct {direct}");
    }

    #[test]
    fn jackknife_covariance_matches_direct_leave_one_out() {
        let pairs = [(1.0, 2.0), (2.0, 1.5), (3.0, 4.0), (4.0, 3.0), (5.0, 6.5), (6.0, 5.0)];
        let (c, se) = jackknife_covariance(&pairs);
        let r = pairs.len();
        let direct_cov = {
            let ma = mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let mb = mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            pairs.iter().map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>() / (r as f64 - 1.0)
        };
        assert!((c - direct_cov).abs() < 1e-12);

        let mut loo = Vec::new();
        for i in 0..r {
            let rest: Vec<(f64, f64)> = pairs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| *p)
                .collect();
            let ma = mean(&rest.iter().map(|p| p.0).collect::<Vec<_>>());
            let mb = mean(&rest.iter().map(|p| p.1).collect::<Vec<_>>());
            loo.push(
                rest.iter().map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>()
                    / (rest.len() as f64 - 1.0),
            );
        }
        let lm = mean(&loo);
        let direct_se =
            ((r as f64 - 1.0) / r as f64 * loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>())
                .sqrt();
        assert!((se - direct_se).abs() < 1e-12);
    }

    #[test]
    fn ks_distance_detects_shifts() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d_uniform = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d_uniform < 0.002, "uniform grid vs uniform cdf: {d_uniform}");
        let d_shift = ks_distance(&xs, |x| (x - 0.2).clamp(0.0, 1.0));
        assert!(d_shift > 0.19);
    }

    #[test]
    fn two_sample_ks_handles_ties() {
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 2.0, 3.0];
        let d = ks_two_sample(&a, &b);
        assert!((d - 0.25).abs() < 1e-12);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn kolmogorov_quantile_matches_known_values() {
        assert!((kolmogorov_quantile(0.05) - 1.3581).abs() < 1e-3);
        assert!((kolmogorov_quantile(0.001) - 1.9495).abs() < 1e-3);
    }

    #[test]
    fn jacobi_matches_analytic_eigenvalues() {
        let eig = symmetric_eigenvalues(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((eig[0] - 1.0).abs() < 1e-12 && (eig[1] - 3.0).abs() < 1e-12);

        // diag(5, -1, 2) under an orthogonal change of basis unwinds back.
        let m = vec![
            vec![3.0, 2.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ];
        // Analytic eigenvalues of the 2x2 block: (3 +- sqrt(9+16))/2 = 4, -1.
        let eig = symmetric_eigenvalues(&m);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 2.0).abs() < 1e-12);
        assert!((eig[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_and_chi_square_quantile_are_sane() {
        assert!((normal_cdf(0.0, 0.0, 1.0) - 0.5).abs() < 1e-12);
        assert!((normal_cdf(1.96, 0.0, 1.0) - 0.975).abs() < 1e-3);
        // chi^2_1 median is about 0.4549.
        assert!((chi_square_quantile(1.0, 0.5) - 0.4549).abs() < 1e-3);
    }

    #[test]
    fn histogram_covers_the_range() {
        let xs = [0.0, 0.1, 0.5, 0.9, 1.0];
        let h = histogram(&xs, 2);
        assert_eq!(h.len(), 2);
        assert_eq!(h.iter().map(|(_, _, c)| c).sum::<u64>(), 5);
        // Half-open bins: 0.5 belongs to the upper bin, the max is clamped in.
        assert_eq!(h[0].2, 2);
        assert_eq!(h[1].2, 3);
    }
}
