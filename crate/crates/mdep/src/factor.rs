use crate::error::Error;
use crate::source::{Scalar, SourceDistribution, Value};
use crate::trees::{binary::BinaryTree, bst, gw, ordered::OrderedTree, LinearSubtreeStatistic};
use crate::Result;
use std::fmt;
use std::sync::Arc;

/// A measurable function of `ell` consecutive source draws.
///
/// Applying the factor at every offset of an i.i.d. source sequence yields a
/// stationary (ell-1)-dependent sequence. Finite-alphabet factors are dense
/// tables indexed by atom windows; continuous-source factors come from a
/// small named catalog or a host-supplied closure.
#[derive(Clone)]
pub struct BlockFactor {
    ell: usize,
    kind: FactorKind,
    known_mean: Option<f64>,
    locally_constant: bool,
}

#[derive(Clone)]
pub(crate) enum FactorKind {
    /// Dense table over atom windows, mixed-radix with the last coordinate
    /// fastest: the window (i_1, ..., i_ell) of atom indices maps to
    /// `((i_1 * K + i_2) * K + ...) + i_ell`.
    Table {
        atom_values: Vec<Scalar>,
        entries: Vec<f64>,
    },
    /// The signed-modulus pair difference over a (uniform, normal) composite
    /// source; see [`BlockFactor::rn_example`].
    RnExample,
    /// Linear combination of fringe-subtree indicators for binary search
    /// trees grown from uniforms.
    BstFringe(LinearSubtreeStatistic<BinaryTree>),
    /// Centered linear combination of degree-window indicators for
    /// conditioned Galton-Watson trees: `f(window) - alpha * window[0] + beta`.
    GwFringe {
        stat: LinearSubtreeStatistic<OrderedTree>,
        alpha: f64,
        beta: f64,
    },
    /// Host-supplied closure.
    Host { name: String, f: HostFn },
}

/// Signature of a host-supplied window evaluator.
pub(crate) type HostFn = Arc<dyn Fn(&[Value]) -> Result<f64> + Send + Sync>;

impl BlockFactor {
    /// Dense-table factor over a finite alphabet. `entries` must have length
    /// `atom_values.len().pow(ell)` and is indexed mixed-radix with the last
    /// window coordinate fastest.
    pub fn table(ell: usize, atom_values: Vec<Scalar>, entries: Vec<f64>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if atom_values.is_empty() {
            return Err(Error::invalid("a table factor needs at least one atom"));
        }
        let k = atom_values.len();
        let expected = k
            .checked_pow(u32::try_from(ell).map_err(|_| Error::invalid("window length too large"))?)
            .ok_or_else(|| Error::invalid("table size overflows"))?;
        if entries.len() != expected {
            return Err(Error::invalid(format!(
                "table has {} entries, expected {k}^{ell} = {expected}",
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("table entries must be finite"));
        }
        Ok(BlockFactor {
            ell,
            kind: FactorKind::Table { atom_values, entries },
            known_mean: None,
            locally_constant: true,
        })
    }

    /// Table factor whose atom values are taken from `src`.
    pub fn table_for_source(
        ell: usize,
        src: &SourceDistribution,
        entries: Vec<f64>,
    ) -> Result<Self> {
        let atoms = src
            .atoms()
            .ok_or_else(|| Error::domain("table factors need a finite-discrete source"))?;
        Self::table(ell, atoms.iter().map(|a| a.value).collect(), entries)
    }

    /// The window function X_k = Y_{k+1} - Y_k with Y_k = sign(U_k - U_{k+1}) |N_k|
    /// over a composite source with one uniform and one standard normal
    /// coordinate per draw. The sequence is a 3-block factor, 2-dependent,
    /// mean zero, and degenerate: partial sums are differences of two
    /// standard normals.
    pub fn rn_example() -> Self {
        BlockFactor {
            ell: 3,
            kind: FactorKind::RnExample,
            known_mean: Some(0.0),
            locally_constant: false,
        }
    }

    /// Fringe-subtree statistic for binary search trees as a block factor
    /// over the continuous uniform source. The window length is
    /// `max pattern size + 2`: each indicator reads one boundary value on
    /// each side of its pattern window.
    pub fn bst_fringe(stat: LinearSubtreeStatistic<BinaryTree>) -> Self {
        let ell = stat.max_size() + 2;
        BlockFactor {
            ell,
            kind: FactorKind::BstFringe(stat),
            known_mean: None,
            locally_constant: true,
        }
    }

    /// Centered degree-window statistic for conditioned Galton-Watson trees:
    /// `sum_j a_j 1{window starts with T_j} - alpha * window[0] + beta`.
    /// `alpha` and `beta` normally come from [`gw::gw_alpha_beta`], which
    /// makes the factor mean zero and asymptotically uncorrelated with the
    /// degree sum.
    pub fn gw_fringe(
        stat: LinearSubtreeStatistic<OrderedTree>,
        alpha: f64,
        beta: f64,
    ) -> Self {
        let ell = stat.max_size();
        BlockFactor {
            ell,
            kind: FactorKind::GwFringe { stat, alpha, beta },
            known_mean: None,
            locally_constant: true,
        }
    }

    /// Host-supplied window function. The closure sees exactly `ell` values.
    pub fn from_fn<F>(ell: usize, name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[Value]) -> Result<f64> + Send + Sync + 'static,
    {
        if ell == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        Ok(BlockFactor {
            ell,
            kind: FactorKind::Host { name: name.into(), f: Arc::new(f) },
            known_mean: None,
            locally_constant: false,
        })
    }

    /// Declares the exact mean E f, enabling estimators that must center the
    /// sequence on sources where the mean cannot be enumerated.
    pub fn with_known_mean(mut self, mean: f64) -> Self {
        self.known_mean = Some(mean);
        self
    }

    /// Declares that the factor is constant on a neighbourhood of every
    /// window it is evaluated at (e.g. it depends only on order patterns).
    /// Fixed-configuration witness checks on continuous sources require this.
    pub fn with_locally_constant(mut self, yes: bool) -> Self {
        self.locally_constant = yes;
        self
    }

    /// Window length.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Dependence range m = ell - 1.
    pub fn m(&self) -> usize {
        self.ell - 1
    }

    pub fn known_mean(&self) -> Option<f64> {
        self.known_mean
    }

    pub fn is_locally_constant(&self) -> bool {
        self.locally_constant
    }

    /// Short label for reports.
    pub fn label(&self) -> String {
        match &self.kind {
            FactorKind::Table { .. } => "table".into(),
            FactorKind::RnExample => "rn-example".into(),
            FactorKind::BstFringe(stat) => format!("bst-fringe[{}]", stat.labels().join(";")),
            FactorKind::GwFringe { stat, .. } => {
                format!("gw-fringe[{}]", stat.labels().join(";"))
            }
            FactorKind::Host { name, .. } => format!("host[{name}]"),
        }
    }

    /// Checks that the factor can be driven by `src`.
    pub fn validate_for(&self, src: &SourceDistribution) -> Result<()> {
        match (&self.kind, src) {
            (FactorKind::Table { atom_values, .. }, SourceDistribution::FiniteDiscrete { atoms, .. }) => {
                if atoms.len() != atom_values.len()
                    || atoms.iter().zip(atom_values).any(|(a, v)| a.value != *v)
                {
                    return Err(Error::domain(
                        "table atom values do not match the source atoms",
                    ));
                }
                Ok(())
            }
            (FactorKind::Table { .. }, _) => {
                Err(Error::domain("table factors need a finite-discrete source"))
            }
            (FactorKind::RnExample, SourceDistribution::Composite { components }) => {
                use crate::source::Component::*;
                if components.as_slice() == [Uniform01, StdNormal] {
                    Ok(())
                } else {
                    Err(Error::domain(
                        "the rn-example factor needs a (uniform, normal) composite source",
                    ))
                }
            }
            (FactorKind::RnExample, _) => Err(Error::domain(
                "the rn-example factor needs a (uniform, normal) composite source",
            )),
            (FactorKind::BstFringe(_), SourceDistribution::ContinuousUniform) => Ok(()),
            (FactorKind::BstFringe(_), _) => Err(Error::domain(
                "fringe-subtree factors for search trees need the continuous uniform source",
            )),
            (FactorKind::GwFringe { .. }, SourceDistribution::FiniteDiscrete { atoms, .. }) => {
                if atoms.iter().all(|a| matches!(a.value, Scalar::Int(_))) {
                    Ok(())
                } else {
                    Err(Error::domain("degree-window factors need integer atoms"))
                }
            }
            (FactorKind::GwFringe { .. }, _) => Err(Error::domain(
                "degree-window factors need a finite-discrete integer source",
            )),
            (FactorKind::Host { .. }, _) => Ok(()),
        }
    }

    /// Evaluates the factor on one window of source values.
    pub fn evaluate(&self, window: &[Value]) -> Result<f64> {
        if window.len() != self.ell {
            return Err(Error::Arity { got: window.len(), expected: self.ell });
        }
        match &self.kind {
            FactorKind::Table { atom_values, entries } => {
                let k = atom_values.len();
                let mut code = 0usize;
                for v in window {
                    let want = match v {
                        Value::Int(x) => Scalar::Int(*x),
                        Value::Real(x) => Scalar::Real(*x),
                        Value::Tuple(_) => {
                            return Err(Error::UnknownAtom { value: v.to_string() })
                        }
                    };
                    let idx = atom_values
                        .iter()
                        .position(|a| *a == want)
                        .ok_or_else(|| Error::UnknownAtom { value: v.to_string() })?;
                    code = code * k + idx;
                }
                Ok(entries[code])
            }
            FactorKind::RnExample => rn_window_value(window),
            FactorKind::BstFringe(stat) => bst::stat_window_value(stat, window),
            FactorKind::GwFringe { stat, alpha, beta } => {
                gw::stat_window_value(stat, *alpha, *beta, window)
            }
            FactorKind::Host { f, .. } => f(window),
        }
    }

    /// Table lookup by atom indices; callers must have validated the window.
    pub(crate) fn eval_indices(&self, idx_window: &[usize]) -> f64 {
        match &self.kind {
            FactorKind::Table { atom_values, entries } => {
                let k = atom_values.len();
                let mut code = 0usize;
                for &i in idx_window {
                    debug_assert!(i < k);
                    code = code * k + i;
                }
                entries[code]
            }
            _ => unreachable!("eval_indices is only defined for table factors"),
        }
    }

    pub(crate) fn table_entries(&self) -> Option<&[f64]> {
        match &self.kind {
            FactorKind::Table { entries, .. } => Some(entries),
            _ => None,
        }
    }
}

impl fmt::Debug for BlockFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockFactor")
            .field("ell", &self.ell)
            .field("kind", &self.label())
            .field("known_mean", &self.known_mean)
            .field("locally_constant", &self.locally_constant)
            .finish()
    }
}

/// sign with sign(0) = 0.
pub(crate) fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn pair(v: &Value) -> Result<(f64, f64)> {
    let coords = v.as_tuple()?;
    if coords.len() != 2 {
        return Err(Error::domain("expected (uniform, normal) pairs"));
    }
    Ok((coords[0], coords[1]))
}

fn rn_window_value(window: &[Value]) -> Result<f64> {
    let (ua, xa) = pair(&window[0])?;
    let (ub, xb) = pair(&window[1])?;
    let (uc, _) = pair(&window[2])?;
    Ok(sign(ub - uc) * xb.abs() - sign(ua - ub) * xa.abs())
}

/// The potential underlying [`BlockFactor::rn_example`]: g(a, b) =
/// sign(a_u - b_u) |a_x| on a window of two composite draws. The factor
/// telescopes as g(suffix) - g(prefix) along every path.
pub fn rn_example_potential(window: &[Value]) -> Result<f64> {
    if window.len() != 2 {
        return Err(Error::Arity { got: window.len(), expected: 2 });
    }
    let (ua, xa) = pair(&window[0])?;
    let (ub, _) = pair(&window[1])?;
    Ok(sign(ua - ub) * xa.abs())
}
