//! Exact rational arithmetic for finite table factors: moments, variance of
//! partial sums, and the degeneracy verdict with zero tolerance.
//!
//! The floating-point pipeline clamps near-zero quantities at an absolute
//! tolerance so the degenerate/nondegenerate verdict cannot flap on rounding
//! noise. When the table entries and atom probabilities are exact rationals,
//! this module decides the same questions with no tolerance at all: a factor
//! is degenerate exactly when its asymptotic variance is the rational zero.
//! Every `f64` is a dyadic rational, so any table factor converts losslessly;
//! probabilities are renormalized exactly so they sum to one.

use std::collections::VecDeque;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

use num_traits::{Signed, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::moments::{for_each_index_window, ExactOptions};
use crate::source::{Scalar, SourceDistribution};
use crate::Result;

fn big(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn checked_pow(k: usize, e: usize) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(k as u128))
}

fn decode(code: usize, k: usize, len: usize) -> Vec<usize> {
    let mut w = vec![0usize; len];
    let mut c = code;
    for slot in w.iter_mut().rev() {
        *slot = c % k;
        c /= k;
    }
    w
}

fn encode(window: &[usize], k: usize) -> usize {
    window.iter().fold(0usize, |c, &i| c * k + i)
}

fn rational_of(x: f64, what: &str) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::invalid(format!("{what} must be finite, got {x}")))
}

/// A block factor over a finite alphabet with exact rational table entries
/// and atom probabilities. Windows are encoded mixed-radix with the last
/// coordinate fastest, matching the floating-point table layout.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFactor {
    ell: usize,
    atoms: Vec<Scalar>,
    probs: Vec<BigRational>,
    table: Vec<BigRational>,
}

impl RationalFactor {
    /// Factor from explicit rational data. `table` is indexed by the
    /// mixed-radix window code and must have `atoms.len()^ell` entries;
    /// probabilities must be positive and sum to one exactly.
    pub fn new(
        ell: usize,
        atoms: Vec<Scalar>,
        probs: Vec<BigRational>,
        table: Vec<BigRational>,
    ) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        let k = atoms.len();
        if k == 0 {
            return Err(Error::invalid("alphabet must not be empty"));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if atoms[i] == atoms[j] {
                    return Err(Error::invalid("atoms must be pairwise distinct"));
                }
            }
        }
        if probs.len() != k {
            return Err(Error::invalid("one probability per atom"));
        }
        if probs.iter().any(|p| *p <= BigRational::zero()) {
            return Err(Error::invalid("atom probabilities must be positive"));
        }
        let total: BigRational = probs.iter().sum();
        if total != BigRational::from_integer(BigInt::from(1)) {
            return Err(Error::invalid(format!(
                "atom probabilities must sum to 1 exactly, got {total}"
            )));
        }
        let expected = checked_pow(k, ell);
        if expected > usize::MAX as u128 || table.len() as u128 != expected {
            return Err(Error::invalid(format!(
                "table needs {expected} entries, got {}",
                table.len()
            )));
        }
        Ok(RationalFactor { ell, atoms, probs, table })
    }

    /// Lossless conversion of a table factor over a finite source. Every
    /// stored `f64` is a dyadic rational; the dyadic probabilities are
    /// renormalized exactly so they sum to one, which perturbs them by at
    /// most one part in 2^52 relative to the floating-point model.
    pub fn from_block_factor(bf: &BlockFactor, src: &SourceDistribution) -> Result<Self> {
        bf.validate_for(src)?;
        let entries = bf.table_entries().ok_or_else(|| {
            Error::unsupported("the rational mode needs an explicit table factor")
        })?;
        let atoms = src.atoms().ok_or_else(|| {
            Error::unsupported("the rational mode needs a finite alphabet")
        })?;
        let table: Vec<BigRational> = entries
            .iter()
            .map(|e| rational_of(*e, "table entry"))
            .collect::<Result<_>>()?;
        let raw: Vec<BigRational> = atoms
            .iter()
            .map(|a| rational_of(a.prob, "atom probability"))
            .collect::<Result<_>>()?;
        let total: BigRational = raw.iter().sum();
        let probs: Vec<BigRational> = raw.into_iter().map(|p| p / &total).collect();
        Self::new(bf.ell(), atoms.iter().map(|a| a.value).collect(), probs, table)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn atoms(&self) -> &[Scalar] {
        &self.atoms
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn table(&self) -> &[BigRational] {
        &self.table
    }

    fn eval(&self, idx_window: &[usize]) -> &BigRational {
        &self.table[encode(idx_window, self.atoms.len())]
    }

    /// Mean, lagged covariances, and asymptotic variance, all exact.
    pub fn moments(&self) -> Result<RationalMoments> {
        let k = self.atoms.len();
        let ell = self.ell;
        let m = ell - 1;
        let needed: u128 = (0..=m).map(|lag| checked_pow(k, ell + lag)).sum();
        let budget = ExactOptions::default().budget;
        if needed > u128::from(budget) {
            return Err(Error::Budget { needed, budget });
        }

        let mut mean = BigRational::zero();
        let mut second = BigRational::zero();
        for_each_index_window(k, ell, |w| {
            let p = self.window_prob(w);
            let f = self.eval(w);
            mean += &p * f;
            second += p * f * f;
        });
        let variance = second - &mean * &mean;

        let mut lag_covs = Vec::with_capacity(m);
        for lag in 1..=m {
            let mut joint = BigRational::zero();
            for_each_index_window(k, ell + lag, |w| {
                let p = self.window_prob(w);
                joint += p * self.eval(&w[..ell]) * self.eval(&w[lag..]);
            });
            lag_covs.push(joint - &mean * &mean);
        }

        let mut sigma2 = variance.clone();
        for cov in &lag_covs {
            sigma2 += cov + cov;
        }
        Ok(RationalMoments { mean, variance, lag_covs, sigma2 })
    }

    /// Exact `Var(S_n)` for `n` summands of the stationary sequence.
    pub fn var_sn(&self, n: usize) -> Result<BigRational> {
        if n == 0 {
            return Err(Error::invalid("need at least one summand"));
        }
        let mm = self.moments()?;
        let m = self.ell - 1;
        if n >= m {
            let mut out = big(n) * &mm.sigma2;
            for (k, cov) in mm.lag_covs.iter().enumerate() {
                out -= big(2 * (k + 1)) * cov;
            }
            Ok(out)
        } else {
            let mut out = big(n) * &mm.variance;
            for (k, cov) in mm.lag_covs.iter().enumerate().take(n - 1) {
                out += big(2 * (n - (k + 1))) * cov;
            }
            Ok(out)
        }
    }

    /// Degeneracy verdict with zero tolerance: either an exact potential
    /// table or a closed walk whose centered sum is a nonzero rational.
    pub fn decompose(&self) -> Result<RationalCoboundary> {
        let k = self.atoms.len();
        let ell = self.ell;
        let vertex_count = checked_pow(k, ell - 1);
        let edge_count = checked_pow(k, ell);
        let needed = vertex_count.saturating_add(edge_count.saturating_mul(2));
        let budget = ExactOptions::default().budget;
        if needed > u128::from(budget) {
            return Err(Error::Budget { needed, budget });
        }
        let vertex_count = vertex_count as usize;

        let mut mu = BigRational::zero();
        for_each_index_window(k, ell, |w| {
            mu += self.window_prob(w) * self.eval(w);
        });

        // First-visit traversal; tree edges satisfy the identity exactly.
        let mut g: Vec<Option<BigRational>> = vec![None; vertex_count];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; vertex_count];
        let mut queue = VecDeque::new();
        g[0] = Some(BigRational::zero());
        queue.push_back(0usize);
        let shift = if ell >= 2 { checked_pow(k, ell - 2) as usize } else { 1 };
        let mut edge_window = vec![0usize; ell];
        while let Some(u) = queue.pop_front() {
            let u_syms = decode(u, k, ell - 1);
            edge_window[..ell - 1].copy_from_slice(&u_syms);
            for a in 0..k {
                let next = if ell == 1 { 0 } else { (u % shift) * k + a };
                if g[next].is_none() {
                    edge_window[ell - 1] = a;
                    let w = self.eval(&edge_window) - &mu;
                    g[next] = Some(g[u].clone().expect("queued vertices have potentials") + w);
                    parent[next] = Some((u, a));
                    queue.push_back(next);
                }
            }
        }

        // Exact validation: the first violated edge decides.
        let mut violated: Option<(usize, usize, usize)> = None;
        for_each_index_window(k, ell, |w| {
            if violated.is_some() {
                return;
            }
            let from = encode(&w[..ell - 1], k);
            let to = encode(&w[1..], k);
            let lhs = g[to].clone().expect("strongly connected graph is fully visited");
            let rhs = g[from].clone().expect("strongly connected graph is fully visited")
                + (self.eval(w) - &mu);
            if lhs != rhs {
                violated = Some((from, to, w[ell - 1]));
            }
        });

        let Some((from, to, last_sym)) = violated else {
            let values = g
                .into_iter()
                .map(|v| v.expect("strongly connected graph is fully visited"))
                .collect();
            return Ok(RationalCoboundary::Degenerate {
                mu,
                potential: RationalPotential {
                    arity: ell - 1,
                    atoms: self.atoms.clone(),
                    values,
                },
            });
        };

        // Close the violated edge into a cycle through tree edges. The two
        // candidate walks' centered sums differ by exactly the (nonzero)
        // defect, so at least one sum is nonzero.
        let tree_path = |mut x: usize| -> Vec<usize> {
            let mut rev = Vec::new();
            while let Some((p, a)) = parent[x] {
                rev.push(a);
                x = p;
            }
            rev.reverse();
            rev
        };
        let root_syms = decode(0, k, ell - 1);
        let mut walk_a = root_syms.clone();
        walk_a.extend(tree_path(from));
        walk_a.push(last_sym);
        walk_a.extend(&root_syms);
        let mut walk_b = root_syms.clone();
        walk_b.extend(tree_path(to));
        walk_b.extend(&root_syms);

        let sum_of = |symbols: &[usize]| -> (usize, BigRational) {
            if symbols.len() < ell {
                return (0, BigRational::zero());
            }
            let n = symbols.len() + 1 - ell;
            let mut acc = BigRational::zero();
            for i in 0..n {
                acc += self.eval(&symbols[i..i + ell]) - &mu;
            }
            (n, acc)
        };
        let (n_a, c_a) = sum_of(&walk_a);
        let (n_b, c_b) = sum_of(&walk_b);
        let (n, centered_sum, symbols) = if n_b == 0 || c_a.abs() >= c_b.abs() {
            (n_a, c_a, walk_a)
        } else {
            (n_b, c_b, walk_b)
        };
        debug_assert!(!centered_sum.is_zero(), "a violated edge forces a nonzero walk sum");

        Ok(RationalCoboundary::Nondegenerate {
            witness: RationalWitness {
                ell,
                atoms: self.atoms.clone(),
                symbols,
                n,
                mu,
                centered_sum,
            },
        })
    }

    fn window_prob(&self, idx_window: &[usize]) -> BigRational {
        let mut p = BigRational::from_integer(BigInt::from(1));
        for &i in idx_window {
            p *= &self.probs[i];
        }
        p
    }
}

/// Exact moments of the stationary sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMoments {
    pub mean: BigRational,
    pub variance: BigRational,
    /// `Cov(X_0, X_k)` for `k = 1..=ell-1`.
    pub lag_covs: Vec<BigRational>,
    /// Asymptotic variance; zero exactly when the factor is degenerate.
    pub sigma2: BigRational,
}

impl RationalMoments {
    pub fn is_degenerate(&self) -> bool {
        self.sigma2.is_zero()
    }
}

impl Serialize for RationalMoments {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalMoments", 4)?;
        st.serialize_field("mean", &self.mean.to_string())?;
        st.serialize_field("variance", &self.variance.to_string())?;
        let covs: Vec<String> = self.lag_covs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("lag_covs", &covs)?;
        st.serialize_field("sigma2", &self.sigma2.to_string())?;
        st.end()
    }
}

/// Exact potential table over `(ell-1)`-windows, fixed to zero at the
/// all-first-atom window.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPotential {
    arity: usize,
    atoms: Vec<Scalar>,
    values: Vec<BigRational>,
}

impl RationalPotential {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    /// Supported windows in table order.
    pub fn windows(&self) -> Vec<Vec<Scalar>> {
        let k = self.atoms.len();
        (0..self.values.len())
            .map(|code| decode(code, k, self.arity).into_iter().map(|i| self.atoms[i]).collect())
            .collect()
    }
}

impl Serialize for RationalPotential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Entry {
            window: Vec<Scalar>,
            value: String,
        }
        let entries: Vec<Entry> = self
            .windows()
            .into_iter()
            .zip(self.values.iter())
            .map(|(window, value)| Entry { window, value: value.to_string() })
            .collect();
        let mut st = s.serialize_struct("RationalPotential", 2)?;
        st.serialize_field("arity", &self.arity)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

/// Closed walk with a nonzero exact centered sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalWitness {
    ell: usize,
    atoms: Vec<Scalar>,
    symbols: Vec<usize>,
    /// Number of windows the walk visits.
    pub n: usize,
    /// Exact mean subtracted from each window value.
    pub mu: BigRational,
    /// Exact sum of `f - mu` along the walk; nonzero by construction.
    pub centered_sum: BigRational,
}

impl RationalWitness {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Walk symbols as source atoms.
    pub fn symbols(&self) -> Vec<Scalar> {
        self.symbols.iter().map(|&i| self.atoms[i]).collect()
    }

    /// The `n` overlapping windows of the walk.
    pub fn windows(&self) -> Vec<Vec<Scalar>> {
        (0..self.n)
            .map(|i| self.symbols[i..i + self.ell].iter().map(|&j| self.atoms[j]).collect())
            .collect()
    }

    /// First and last `ell - 1` symbols coincide.
    pub fn is_closed(&self) -> bool {
        let m = self.ell - 1;
        self.symbols[..m] == self.symbols[self.symbols.len() - m..]
    }

    /// Re-evaluates the walk sum against the factor it certifies.
    pub fn replay(&self, rf: &RationalFactor) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..self.n {
            acc += rf.eval(&self.symbols[i..i + self.ell]) - &self.mu;
        }
        acc
    }
}

impl Serialize for RationalWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RationalWitness", 5)?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("mu", &self.mu.to_string())?;
        st.serialize_field("centered_sum", &self.centered_sum.to_string())?;
        st.serialize_field("windows", &self.windows())?;
        st.end()
    }
}

/// Zero-tolerance analogue of the floating-point decomposition result.
#[derive(Debug, Clone, PartialEq)]
pub enum RationalCoboundary {
    Degenerate {
        mu: BigRational,
        potential: RationalPotential,
    },
    Nondegenerate {
        witness: RationalWitness,
    },
}

impl Serialize for RationalCoboundary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RationalCoboundary::Degenerate { mu, potential } => {
                let mut st = s.serialize_struct("RationalCoboundary", 3)?;
                st.serialize_field("verdict", "degenerate")?;
                st.serialize_field("mu", &mu.to_string())?;
                st.serialize_field("potential", potential)?;
                st.end()
            }
            RationalCoboundary::Nondegenerate { witness } => {
                let mut st = s.serialize_struct("RationalCoboundary", 2)?;
                st.serialize_field("verdict", "nondegenerate")?;
                st.serialize_field("witness", witness)?;
                st.end()
            }
        }
    }
}

impl RationalCoboundary {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, RationalCoboundary::Degenerate { .. })
    }

    pub fn witness(&self) -> Option<&RationalWitness> {
        match self {
            RationalCoboundary::Nondegenerate { witness } => Some(witness),
            RationalCoboundary::Degenerate { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coboundary::coboundary_decompose;
    use crate::moments::exact_moments;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bernoulli_half_factor(table: &[i64]) -> RationalFactor {
        let atoms = vec![Scalar::Int(0), Scalar::Int(1)];
        let probs = vec![ratio(1, 2), ratio(1, 2)];
        let entries = table.iter().map(|t| ratio(*t, 1)).collect();
        let ell = (table.len() as f64).log2().round() as usize;
        RationalFactor::new(ell, atoms, probs, entries).expect("valid factor")
    }

    #[test]
    fn product_moments_are_exact() {
        // f(x1, x2) = x1 * x2 over Bernoulli(1/2): table (0,0,0,1).
        let rf = bernoulli_half_factor(&[0, 0, 0, 1]);
        let mm = rf.moments().expect("moments");
        assert_eq!(mm.mean, ratio(1, 4), "mean is 1/4");
        assert_eq!(mm.variance, ratio(3, 16), "variance is 3/16");
        assert_eq!(mm.lag_covs, vec![ratio(1, 16)], "lag-1 covariance is 1/16");
        assert_eq!(mm.sigma2, ratio(5, 16), "sigma^2 is 5/16");
        assert!(!mm.is_degenerate(), "product factor is nondegenerate");
        assert_eq!(rf.var_sn(3).expect("var"), ratio(13, 16), "Var(S_3) is 13/16");
        assert_eq!(rf.var_sn(1).expect("var"), ratio(3, 16), "Var(S_1) is the variance");
    }

    #[test]
    fn difference_factor_is_exactly_degenerate() {
        // f(x1, x2) = x2 - x1: table (0, 1, -1, 0).
        let rf = bernoulli_half_factor(&[0, 1, -1, 0]);
        let mm = rf.moments().expect("moments");
        assert!(mm.sigma2.is_zero(), "sigma^2 is the rational zero");
        assert_eq!(mm.variance, ratio(1, 2), "variance is 1/2");
        match rf.decompose().expect("decompose") {
            RationalCoboundary::Degenerate { mu, potential } => {
                assert!(mu.is_zero(), "mean is zero");
                assert_eq!(
                    potential.values(),
                    &[ratio(0, 1), ratio(1, 1)],
                    "potential is g(x) = x with g(0) = 0"
                );
            }
            RationalCoboundary::Nondegenerate { .. } => {
                panic!("difference factor must be degenerate")
            }
        }
        // Var(S_n) = 2 Var(g) for every n >= 1.
        assert_eq!(rf.var_sn(7).expect("var"), ratio(1, 2), "telescoping variance is flat");
    }

    #[test]
    fn drifted_square_potential_on_three_atoms() {
        // f(x1, x2) = x2^2 - x1^2 + 3 over uniform {0, 1, 2}.
        let atoms = vec![Scalar::Int(0), Scalar::Int(1), Scalar::Int(2)];
        let probs = vec![ratio(1, 3); 3];
        let mut table = Vec::new();
        for x1 in 0i64..3 {
            for x2 in 0i64..3 {
                table.push(ratio(x2 * x2 - x1 * x1 + 3, 1));
            }
        }
        let rf = RationalFactor::new(2, atoms, probs, table).expect("factor");
        match rf.decompose().expect("decompose") {
            RationalCoboundary::Degenerate { mu, potential } => {
                assert_eq!(mu, ratio(3, 1), "drift is 3");
                assert_eq!(
                    potential.values(),
                    &[ratio(0, 1), ratio(1, 1), ratio(4, 1)],
                    "potential is g(x) = x^2"
                );
            }
            RationalCoboundary::Nondegenerate { .. } => panic!("coboundary must be degenerate"),
        }
    }

    #[test]
    fn witness_is_closed_and_replays() {
        let rf = bernoulli_half_factor(&[0, 0, 0, 1]);
        let result = rf.decompose().expect("decompose");
        let witness = result.witness().expect("product factor is nondegenerate");
        assert!(witness.is_closed(), "walk returns to its starting window");
        assert!(!witness.centered_sum.is_zero(), "centered sum is nonzero");
        assert_eq!(witness.replay(&rf), witness.centered_sum, "replay reproduces the sum");
    }

    #[test]
    fn tiny_perturbations_flip_only_the_rational_verdict() {
        // Perturb the degenerate difference factor by eps * x1 * x2 with
        // eps = 2^-40, far below the floating tolerance. The float pipeline
        // clamps; the rational pipeline resolves the perturbation.
        let eps = ratio(1, 1 << 40);
        let atoms = vec![Scalar::Int(0), Scalar::Int(1)];
        let probs = vec![ratio(1, 2), ratio(1, 2)];
        let table = vec![
            ratio(0, 1),
            ratio(1, 1),
            ratio(-1, 1),
            eps.clone(),
        ];
        let rf = RationalFactor::new(2, atoms, probs, table).expect("factor");
        let mm = rf.moments().expect("moments");
        assert!(!mm.sigma2.is_zero(), "rational sigma^2 sees the perturbation");
        assert!(!rf.decompose().expect("decompose").is_degenerate(), "rational verdict flips");

        let entries = vec![0.0, 1.0, -1.0, (0.5f64).powi(40)];
        let bf = BlockFactor::table(2, vec![Scalar::Int(0), Scalar::Int(1)], entries)
            .expect("float factor");
        let src = SourceDistribution::bernoulli_half();
        let float_mm = exact_moments(&bf, &src).expect("float moments");
        assert_eq!(float_mm.sigma2, 0.0, "float sigma^2 clamps below tolerance");
        let float_verdict = coboundary_decompose(&bf, &src).expect("float decompose");
        assert!(float_verdict.is_degenerate(), "float verdict stays degenerate");
    }

    #[test]
    fn verdicts_match_the_float_pipeline_on_integer_tables() {
        let tables: [&[i64]; 6] = [
            &[0, 0, 0, 1],
            &[0, 1, -1, 0],
            &[1, 1, 1, 1],
            &[2, -1, 3, 0],
            &[0, 2, -2, 0],
            &[1, -3, 2, 2],
        ];
        let src = SourceDistribution::bernoulli_half();
        for table in tables {
            let rf = bernoulli_half_factor(table);
            let entries: Vec<f64> = table.iter().map(|t| *t as f64).collect();
            let bf = BlockFactor::table(2, vec![Scalar::Int(0), Scalar::Int(1)], entries)
                .expect("float factor");
            let float_mm = exact_moments(&bf, &src).expect("float moments");
            let mm = rf.moments().expect("rational moments");
            let float_verdict = coboundary_decompose(&bf, &src).expect("float decompose");
            let verdict = rf.decompose().expect("rational decompose");
            assert_eq!(
                mm.sigma2.is_zero(),
                float_mm.sigma2 == 0.0,
                "sigma^2 verdicts disagree on {table:?}"
            );
            assert_eq!(
                verdict.is_degenerate(),
                float_verdict.is_degenerate(),
                "decomposition verdicts disagree on {table:?}"
            );
            assert_eq!(
                verdict.is_degenerate(),
                mm.sigma2.is_zero(),
                "the two rational routes disagree on {table:?}"
            );
        }
    }

    #[test]
    fn conversion_from_float_factor_renormalizes() {
        // 0.3 and 0.7 are not dyadic, so their exact conversions miss 1; the
        // renormalized probabilities must sum to 1 exactly.
        let bf = BlockFactor::table(
            2,
            vec![Scalar::Real(0.0), Scalar::Real(1.0)],
            vec![0.0, 1.0, -1.0, 0.0],
        )
        .expect("float factor");
        let src = SourceDistribution::finite_discrete(vec![
            (Scalar::Real(0.0), 0.3),
            (Scalar::Real(1.0), 0.7),
        ])
        .expect("source");
        let rf = RationalFactor::from_block_factor(&bf, &src).expect("conversion");
        let total: BigRational = rf.probs().iter().sum();
        assert_eq!(total, ratio(1, 1), "probabilities renormalize to 1");
        assert!(rf.moments().expect("moments").sigma2.is_zero(), "still a coboundary");
    }

    #[test]
    fn single_letter_windows_work() {
        // ell = 1: degenerate iff constant.
        let atoms = vec![Scalar::Int(0), Scalar::Int(1)];
        let probs = vec![ratio(1, 2), ratio(1, 2)];
        let constant =
            RationalFactor::new(1, atoms.clone(), probs.clone(), vec![ratio(5, 1); 2])
                .expect("factor");
        assert!(constant.decompose().expect("decompose").is_degenerate(), "constant telescopes");
        assert!(constant.moments().expect("moments").sigma2.is_zero(), "constant has sigma 0");
        let identity =
            RationalFactor::new(1, atoms, probs, vec![ratio(0, 1), ratio(1, 1)]).expect("factor");
        assert_eq!(
            identity.moments().expect("moments").sigma2,
            ratio(1, 4),
            "Bernoulli identity has sigma^2 = 1/4"
        );
        assert!(!identity.decompose().expect("decompose").is_degenerate(), "identity varies");
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let atoms = vec![Scalar::Int(0), Scalar::Int(1)];
        let probs = vec![ratio(1, 2), ratio(1, 2)];
        let err = RationalFactor::new(2, atoms.clone(), probs.clone(), vec![ratio(0, 1); 3])
            .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "wrong table size is rejected");
        let err = RationalFactor::new(
            2,
            atoms.clone(),
            vec![ratio(1, 2), ratio(1, 3)],
            vec![ratio(0, 1); 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "probabilities must sum to 1");
        let err = RationalFactor::new(
            2,
            vec![Scalar::Int(0), Scalar::Int(0)],
            probs,
            vec![ratio(0, 1); 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invalid(_)), "duplicate atoms are rejected");
    }
}
