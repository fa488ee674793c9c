//! Degeneracy decision for block factors over finite alphabets.
//!
//! The asymptotic variance of a block-factor sequence vanishes exactly when
//! the centered factor telescopes, that is, when there is a potential `g` on
//! windows of length `ell - 1` with
//!
//! ```text
//! f(x_1, ..., x_ell) - mu = g(x_2, ..., x_ell) - g(x_1, ..., x_{ell-1}).
//! ```
//!
//! [`coboundary_decompose`] decides this constructively: it builds the
//! directed window graph (vertices are `(ell-1)`-windows, edges are
//! `ell`-windows with weight `f - mu`), assigns potentials along a traversal
//! tree, and either returns the potential table or a closed walk whose
//! centered weights do not sum to zero. Such a walk is a checkable
//! certificate of a positive asymptotic variance, because every closed walk
//! under a potential telescopes to exactly zero.
//!
//! For continuous sources no general decision is attempted. Two one-sided
//! tools remain: [`rc2_witness_check`] certifies positivity from two
//! configurations that share their boundary windows but reach different
//! sums, and [`cesaro_coboundary_estimate`] estimates the potential of a
//! factor that is known (or suspected) to telescope.

use std::collections::VecDeque;

use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::moments::{exact_mean, for_each_index_window, IndexEvaluator};
use crate::rng::run_replicas;
use crate::source::{Scalar, SourceDistribution, Value};
use crate::stats::{mean_and_se, NeumaierSum};
use crate::Result;

/// Potential table on `(ell-1)`-windows, in mixed-radix order with the last
/// coordinate fastest. The traversal root is pinned to zero, so the table is
/// one representative of the gauge class `g + const`.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    arity: usize,
    atoms: Vec<Scalar>,
    values: Vec<f64>,
}

impl PotentialTable {
    /// Number of source values the potential reads (`ell - 1`).
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Alphabet the windows are made of.
    pub fn alphabet(&self) -> &[Scalar] {
        &self.atoms
    }

    /// All potential values, indexed by window code.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Potential of a window given as atom indices.
    pub fn eval_indices(&self, window: &[usize]) -> f64 {
        assert_eq!(window.len(), self.arity, "window arity mismatch");
        let code = window.iter().fold(0usize, |c, &i| c * self.atoms.len() + i);
        self.values[code]
    }

    /// Potential of a window given as source values.
    pub fn evaluate(&self, window: &[Value]) -> Result<f64> {
        if window.len() != self.arity {
            return Err(Error::Arity { got: window.len(), expected: self.arity });
        }
        let mut idx = Vec::with_capacity(self.arity);
        for v in window {
            let i = self
                .atoms
                .iter()
                .position(|a| scalar_matches(v, a))
                .ok_or_else(|| Error::UnknownAtom { value: v.to_string() })?;
            idx.push(i);
        }
        Ok(self.eval_indices(&idx))
    }

    /// Every window in code order, for reporting.
    pub fn windows(&self) -> Vec<Vec<Scalar>> {
        let mut out = Vec::with_capacity(self.values.len());
        if self.arity == 0 {
            out.push(Vec::new());
            return out;
        }
        for_each_index_window(self.atoms.len(), self.arity, |w| {
            out.push(w.iter().map(|&i| self.atoms[i]).collect());
        });
        out
    }
}

fn scalar_matches(v: &Value, a: &Scalar) -> bool {
    match (v, a) {
        (Value::Int(i), Scalar::Int(j)) => i == j,
        (Value::Real(x), Scalar::Real(y)) => x == y,
        (Value::Int(i), Scalar::Real(y)) => *i as f64 == *y,
        (Value::Real(x), Scalar::Int(j)) => *x == *j as f64,
        (Value::Tuple(_), _) => false,
    }
}

impl Serialize for PotentialTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            window: Vec<Scalar>,
            value: f64,
        }
        let entries: Vec<Entry> = self
            .windows()
            .into_iter()
            .zip(self.values.iter())
            .map(|(window, &value)| Entry { window, value })
            .collect();
        let mut st = s.serialize_struct("PotentialTable", 2)?;
        st.serialize_field("arity", &self.arity)?;
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

/// Closed walk in the window graph whose centered block sums do not vanish.
///
/// The walk visits `n` overlapping `ell`-windows over `n + ell - 1` symbols
/// whose first and last `ell - 1` symbols coincide. If the factor admitted a
/// potential, the centered sum along any such walk would telescope to zero,
/// so `centered_sum != 0` certifies a positive asymptotic variance. The
/// certificate is independently checkable through [`CycleWitness::replay`].
#[derive(Debug, Clone)]
pub struct CycleWitness {
    ell: usize,
    atoms: Vec<Scalar>,
    symbols: Vec<usize>,
    /// Number of blocks along the walk.
    pub n: usize,
    /// Exact mean the blocks are centered by.
    pub mu: f64,
    /// Sum of `f - mu` over the walk's blocks.
    pub centered_sum: f64,
    /// Absolute defect of the worst edge found during validation.
    pub violation: f64,
}

impl CycleWitness {
    /// Block length of the factor the walk was built for.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// The walk's symbols as source values, length `n + ell - 1`.
    pub fn symbols(&self) -> Vec<Scalar> {
        self.symbols.iter().map(|&i| self.atoms[i]).collect()
    }

    /// The walk as its sequence of `ell`-windows.
    pub fn windows(&self) -> Vec<Vec<Scalar>> {
        (0..self.n)
            .map(|i| self.symbols[i..i + self.ell].iter().map(|&j| self.atoms[j]).collect())
            .collect()
    }

    /// True when the first and last `ell - 1` symbols coincide.
    pub fn is_closed(&self) -> bool {
        let m = self.ell - 1;
        self.symbols[..m] == self.symbols[self.symbols.len() - m..]
    }

    /// Recomputes the centered sum from scratch through the factor.
    pub fn replay(&self, bf: &BlockFactor) -> Result<f64> {
        if bf.ell() != self.ell {
            return Err(Error::Arity { got: bf.ell(), expected: self.ell });
        }
        let values: Vec<Value> =
            self.symbols.iter().map(|&i| Value::scalar(self.atoms[i])).collect();
        let mut acc = NeumaierSum::new();
        for i in 0..self.n {
            acc.add(bf.evaluate(&values[i..i + self.ell])? - self.mu);
        }
        Ok(acc.total())
    }
}

impl Serialize for CycleWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycleWitness", 6)?;
        st.serialize_field("ell", &self.ell)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("mu", &self.mu)?;
        st.serialize_field("centered_sum", &self.centered_sum)?;
        st.serialize_field("violation", &self.violation)?;
        st.serialize_field("windows", &self.windows())?;
        st.end()
    }
}

/// Outcome of the degeneracy decision.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CoboundaryResult {
    /// The centered factor telescopes; `potential` realizes it and the
    /// asymptotic variance is zero.
    Degenerate { mu: f64, potential: PotentialTable },
    /// No potential exists; `witness` certifies a positive asymptotic
    /// variance.
    Nondegenerate { witness: CycleWitness },
}

impl CoboundaryResult {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, CoboundaryResult::Degenerate { .. })
    }

    pub fn mu(&self) -> Option<f64> {
        match self {
            CoboundaryResult::Degenerate { mu, .. } => Some(*mu),
            CoboundaryResult::Nondegenerate { .. } => None,
        }
    }

    pub fn potential(&self) -> Option<&PotentialTable> {
        match self {
            CoboundaryResult::Degenerate { potential, .. } => Some(potential),
            CoboundaryResult::Nondegenerate { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&CycleWitness> {
        match self {
            CoboundaryResult::Degenerate { .. } => None,
            CoboundaryResult::Nondegenerate { witness } => Some(witness),
        }
    }
}

/// Options for the decomposition.
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Maximum number of graph elements (vertices plus edge visits) to touch.
    pub budget: u64,
    /// Absolute tolerance for the edge consistency test.
    pub tolerance: f64,
    /// Window code of the traversal root; its potential is pinned to zero.
    /// Changing the root changes the traversal order and shifts a degenerate
    /// potential by a constant, nothing else.
    pub root: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { budget: 50_000_000, tolerance: crate::DEFAULT_TOLERANCE, root: 0 }
    }
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

/// Symbols fed along the traversal tree from the root to `x`.
fn tree_path(parent: &[Option<(usize, usize)>], mut x: usize) -> Vec<usize> {
    let mut rev = Vec::new();
    while let Some((p, a)) = parent[x] {
        rev.push(a);
        x = p;
    }
    rev.reverse();
    rev
}

fn walk_centered_sum(
    ev: &mut IndexEvaluator,
    symbols: &[usize],
    ell: usize,
    mu: f64,
) -> Result<(usize, f64)> {
    if symbols.len() < ell {
        return Ok((0, 0.0));
    }
    let n = symbols.len() + 1 - ell;
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        acc.add(ev.eval(&symbols[i..i + ell])? - mu);
    }
    Ok((n, acc.total()))
}

/// Decides degeneracy with the default budget, tolerance, and root.
pub fn coboundary_decompose(
    bf: &BlockFactor,
    src: &SourceDistribution,
) -> Result<CoboundaryResult> {
    coboundary_decompose_with(bf, src, &DecomposeOptions::default())
}

/// Decides whether the centered factor telescopes, returning either the
/// potential table with the mean or a cycle witness.
///
/// Source atoms carry strictly positive probability by construction, so
/// every window is supported and the window graph is strongly connected; the
/// traversal therefore reaches every vertex from any root and a degenerate
/// potential is unique up to one global additive constant.
pub fn coboundary_decompose_with(
    bf: &BlockFactor,
    src: &SourceDistribution,
    opts: &DecomposeOptions,
) -> Result<CoboundaryResult> {
    bf.validate_for(src)?;
    let atoms: Vec<Scalar> = src
        .atoms()
        .ok_or_else(|| {
            Error::unsupported(
                "degeneracy decision needs a finite alphabet; for continuous sources use \
                 rc2_witness_check or cesaro_coboundary_estimate",
            )
        })?
        .iter()
        .map(|a| a.value)
        .collect();
    let k = atoms.len();
    let ell = bf.ell();

    let vertex_count = checked_pow(k, ell - 1);
    let edge_count = checked_pow(k, ell);
    let needed = vertex_count.saturating_add(edge_count.saturating_mul(2));
    if needed > opts.budget as u128 {
        return Err(Error::Budget { needed, budget: opts.budget });
    }
    let vertex_count = vertex_count as usize;
    if opts.root >= vertex_count {
        return Err(Error::invalid(format!(
            "root window code {} out of range (have {} windows)",
            opts.root, vertex_count
        )));
    }

    let mu = exact_mean(bf, src, opts.budget)?;
    let mut ev = IndexEvaluator::new(bf, src)?;

    // Traversal tree: potentials propagate along first-visit edges, which
    // therefore satisfy the edge identity exactly.
    let mut g = vec![f64::NAN; vertex_count];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; vertex_count];
    let mut queue = VecDeque::new();
    g[opts.root] = 0.0;
    queue.push_back(opts.root);
    let shift = if ell >= 2 { checked_pow(k, ell - 2) as usize } else { 1 };
    let mut edge_window = vec![0usize; ell];
    while let Some(u) = queue.pop_front() {
        let u_syms = decode(u, k, ell - 1);
        edge_window[..ell - 1].copy_from_slice(&u_syms);
        for a in 0..k {
            let next = if ell == 1 { 0 } else { (u % shift) * k + a };
            if g[next].is_nan() {
                edge_window[ell - 1] = a;
                let w = ev.eval(&edge_window)? - mu;
                g[next] = g[u] + w;
                parent[next] = Some((u, a));
                queue.push_back(next);
            }
        }
    }

    // Validation pass over every edge; track the worst defect.
    let mut worst: Option<(f64, usize, usize, usize)> = None;
    let mut eval_err = None;
    for_each_index_window(k, ell, |w| {
        if eval_err.is_some() {
            return;
        }
        let from = encode(&w[..ell - 1], k);
        let to = encode(&w[1..], k);
        match ev.eval(w) {
            Ok(f) => {
                let defect = (g[to] - g[from] - (f - mu)).abs();
                if worst.as_ref().is_none_or(|(d, _, _, _)| defect > *d) {
                    worst = Some((defect, from, to, w[ell - 1]));
                }
            }
            Err(e) => eval_err = Some(e),
        }
    });
    if let Some(e) = eval_err {
        return Err(e);
    }
    let (violation, from, to, last_sym) = worst.expect("graph has at least one edge");

    if violation <= opts.tolerance {
        return Ok(CoboundaryResult::Degenerate {
            mu,
            potential: PotentialTable { arity: ell - 1, atoms, values: g },
        });
    }

    // Close the worst edge into a cycle through tree edges. The two
    // candidate walks below share every edge except the violating one, so
    // their centered sums differ by exactly the defect and the larger one is
    // at least half of it.
    let root_syms = decode(opts.root, k, ell - 1);
    let mut walk_a = root_syms.clone();
    walk_a.extend(tree_path(&parent, from));
    walk_a.push(last_sym);
    walk_a.extend(&root_syms);
    let mut walk_b = root_syms.clone();
    walk_b.extend(tree_path(&parent, to));
    walk_b.extend(&root_syms);

    let (n_a, c_a) = walk_centered_sum(&mut ev, &walk_a, ell, mu)?;
    let (n_b, c_b) = walk_centered_sum(&mut ev, &walk_b, ell, mu)?;
    let (mut n, mut centered_sum, mut symbols) =
        if n_b == 0 || c_a.abs() >= c_b.abs() { (n_a, c_a, walk_a) } else { (n_b, c_b, walk_b) };

    // The walk sum can sit between tolerance/2 and tolerance when the worst
    // defect barely clears the threshold; traversing the cycle again doubles
    // the sum, so a couple of rounds always push it past the tolerance.
    let mut rounds = 0;
    while centered_sum.abs() <= opts.tolerance && rounds < 8 {
        let tail: Vec<usize> = symbols[ell - 1..].to_vec();
        symbols.extend(tail);
        let (nn, cc) = walk_centered_sum(&mut ev, &symbols, ell, mu)?;
        n = nn;
        centered_sum = cc;
        rounds += 1;
    }

    Ok(CoboundaryResult::Nondegenerate {
        witness: CycleWitness { ell, atoms, symbols, n, mu, centered_sum, violation },
    })
}

/// Outcome of comparing two configurations that share boundary windows.
#[derive(Debug, Clone, Serialize)]
pub struct Rc2Witness {
    /// True when the two sums differ beyond the tolerance, certifying a
    /// positive asymptotic variance.
    pub differs: bool,
    /// Block sum over the configuration with `middle_a`.
    pub s_a: f64,
    /// Block sum over the configuration with `middle_b`.
    pub s_b: f64,
    /// Number of blocks in each configuration.
    pub n: usize,
    /// Tolerance the comparison used.
    pub tolerance: f64,
}

/// Evaluates the block sum on two full configurations that agree on their
/// first and last `ell - 1` values and differ only in between.
///
/// When the centered factor telescopes, the sum depends on the boundary
/// windows alone, so `differs = true` certifies a positive asymptotic
/// variance. The converse direction is not decided here.
///
/// Windows containing continuous values are only accepted for factors
/// declared locally constant, because a certificate at isolated points is
/// worthless for a factor that varies in any neighbourhood of them.
pub fn rc2_witness_check(
    bf: &BlockFactor,
    boundary_left: &[Value],
    boundary_right: &[Value],
    middle_a: &[Value],
    middle_b: &[Value],
) -> Result<Rc2Witness> {
    let ell = bf.ell();
    let m = ell - 1;
    if boundary_left.len() != m {
        return Err(Error::Arity { got: boundary_left.len(), expected: m });
    }
    if boundary_right.len() != m {
        return Err(Error::Arity { got: boundary_right.len(), expected: m });
    }
    if middle_a.len() != middle_b.len() || middle_a.is_empty() {
        return Err(Error::invalid("middles must have equal, positive length"));
    }
    let continuous = boundary_left
        .iter()
        .chain(boundary_right)
        .chain(middle_a)
        .chain(middle_b)
        .any(|v| !matches!(v, Value::Int(_)));
    if continuous && !bf.is_locally_constant() {
        return Err(Error::unsupported(
            "witness checks on continuous values need a factor declared locally constant",
        ));
    }

    let mut config: Vec<Value> = Vec::with_capacity(2 * m + middle_a.len());
    let mut sum_for = |middle: &[Value]| -> Result<f64> {
        config.clear();
        config.extend_from_slice(boundary_left);
        config.extend_from_slice(middle);
        config.extend_from_slice(boundary_right);
        let n = config.len() + 1 - ell;
        let mut acc = NeumaierSum::new();
        for i in 0..n {
            acc.add(bf.evaluate(&config[i..i + ell])?);
        }
        Ok(acc.total())
    };
    let s_a = sum_for(middle_a)?;
    let s_b = sum_for(middle_b)?;
    let n = middle_a.len() + m;
    let tolerance = crate::DEFAULT_TOLERANCE;
    Ok(Rc2Witness { differs: (s_a - s_b).abs() > tolerance, s_a, s_b, n, tolerance })
}

/// Monte Carlo estimate of a potential value.
#[derive(Debug, Clone, Serialize)]
pub struct CesaroEstimate {
    /// Estimate of `g(window) - E g`.
    pub estimate: f64,
    /// Standard error, including the amplified uncertainty of an estimated
    /// mean when no exact mean is available.
    pub std_error: f64,
    /// Mean used for centering.
    pub mu: f64,
    /// Standard error of the mean; zero when the mean is exact or declared.
    pub mu_std_error: f64,
    /// Averaging depth.
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
}

/// Estimates `g(window) - E g` for a telescoping factor by Monte Carlo.
///
/// Each replica pins the window as the final `ell - 1` source values after
/// `n + 1` fresh draws and averages the centered suffix sums
/// `(n+1)^{-1} sum_{j=k-n}^{k} sum_{i=j}^{k} (X_i - mu)` with `k = n + 1`.
/// For a telescoping factor every suffix long enough to clear the window
/// overlap has expectation exactly `g(window) - E g`; the overlap terms
/// contribute a bias of order `ell / n` (zero for `ell <= 2`).
///
/// The mean is resolved in this order: a declared factor mean, the exact
/// mean for finite alphabets, and otherwise a side-stream estimate whose
/// uncertainty enters the reported standard error amplified by the run
/// length `(n + 2) / 2`. With an estimated mean, precision at depth `n`
/// costs on the order of `n^2` extra samples; prefer declaring the mean.
pub fn cesaro_coboundary_estimate(
    bf: &BlockFactor,
    src: &SourceDistribution,
    window: &[Value],
    n: usize,
    reps: u64,
    seed: u64,
) -> Result<CesaroEstimate> {
    bf.validate_for(src)?;
    let ell = bf.ell();
    if window.len() != ell - 1 {
        return Err(Error::Arity { got: window.len(), expected: ell - 1 });
    }
    if n < ell {
        return Err(Error::invalid("averaging depth must be at least the block length"));
    }
    if reps < 2 {
        return Err(Error::invalid("need at least 2 replicas"));
    }

    let (mu, mu_std_error) = match bf.known_mean() {
        Some(mu) => (mu, 0.0),
        None if src.atoms().is_some() => (exact_mean(bf, src, 50_000_000)?, 0.0),
        None => {
            let samples: Vec<Result<f64>> = run_replicas(seed, reps, reps as usize, |_, rng| {
                let mut draws = Vec::with_capacity(ell);
                crate::path::draw_into(src, rng, ell, &mut draws);
                bf.evaluate(&draws)
            });
            let values = samples.into_iter().collect::<Result<Vec<f64>>>()?;
            mean_and_se(&values)
        }
    };

    let k = n + 1;
    let replicas: Vec<Result<f64>> = run_replicas(seed, 0, reps as usize, |_, rng| {
        let mut draws = Vec::with_capacity(k + ell - 1);
        crate::path::draw_into(src, rng, k, &mut draws);
        draws.extend_from_slice(window);
        let mut suffix = NeumaierSum::new();
        let mut total = NeumaierSum::new();
        for i in (0..k).rev() {
            suffix.add(bf.evaluate(&draws[i..i + ell])? - mu);
            total.add(suffix.total());
        }
        Ok(total.total() / (n + 1) as f64)
    });
    let values = replicas.into_iter().collect::<Result<Vec<f64>>>()?;
    let (estimate, se_mc) = mean_and_se(&values);
    let amplification = (n + 2) as f64 / 2.0;
    let std_error = (se_mc * se_mc + (amplification * mu_std_error).powi(2)).sqrt();
    Ok(CesaroEstimate { estimate, std_error, mu, mu_std_error, n, reps, seed })
}
