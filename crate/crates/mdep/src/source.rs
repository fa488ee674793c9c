use crate::error::Error;
use crate::Result;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::{Serialize, SerializeSeq, Serializer};
use std::fmt;

/// An atom value of a finite-discrete source: integer or real.
///
/// A single source must use one kind throughout; mixing integer and real
/// atoms is rejected at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Int(i64),
    Real(f64),
}

impl Scalar {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Scalar::Int(v) => v as f64,
            Scalar::Real(v) => v,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Real(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Scalar::Int(v) => s.serialize_i64(v),
            Scalar::Real(v) => s.serialize_f64(v),
        }
    }
}

/// One draw of the source sequence.
///
/// Finite-discrete sources draw their atom values, the continuous uniform
/// source draws reals in (0,1), and composite sources draw tuples with one
/// coordinate per declared component.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Tuple(Vec<f64>),
}

impl Value {
    pub fn as_real(&self) -> Result<f64> {
        match self {
            Value::Real(v) => Ok(*v),
            Value::Int(v) => Ok(*v as f64),
            Value::Tuple(_) => Err(Error::domain("expected a scalar value, got a tuple")),
        }
    }

    pub fn as_int(&self) -> Result<i64> {
        match self {
            Value::Int(v) => Ok(*v),
            _ => Err(Error::domain("expected an integer value")),
        }
    }

    pub fn as_tuple(&self) -> Result<&[f64]> {
        match self {
            Value::Tuple(v) => Ok(v),
            _ => Err(Error::domain("expected a tuple value")),
        }
    }

    pub fn scalar(s: Scalar) -> Value {
        match s {
            Scalar::Int(v) => Value::Int(v),
            Scalar::Real(v) => Value::Real(v),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Tuple(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Real(v) => s.serialize_f64(*v),
            Value::Tuple(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
        }
    }
}

/// An atom of a finite-discrete source: a value with strictly positive
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub value: Scalar,
    pub prob: f64,
}

/// One coordinate of a composite source draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// Uniform on the open interval (0,1).
    Uniform01,
    /// Standard normal.
    StdNormal,
}

/// The i.i.d. law of the underlying source sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceDistribution {
    /// Finitely many atoms, each with strictly positive probability.
    FiniteDiscrete { atoms: Vec<Atom>, cumulative: Vec<f64> },
    /// Uniform on (0,1).
    ContinuousUniform,
    /// Independent standard coordinates, one per component.
    Composite { components: Vec<Component> },
}

const PROB_SUM_TOLERANCE: f64 = 1e-12;

impl SourceDistribution {
    /// Builds a finite-discrete source from (value, probability) pairs.
    ///
    /// Probabilities must lie in (0,1] and sum to 1 within 1e-12; values
    /// must be pairwise distinct and all of the same kind.
    pub fn finite_discrete(pairs: Vec<(Scalar, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("a finite-discrete source needs at least one atom"));
        }
        let all_int = pairs.iter().all(|(v, _)| matches!(v, Scalar::Int(_)));
        let all_real = pairs.iter().all(|(v, _)| matches!(v, Scalar::Real(_)));
        if !all_int && !all_real {
            return Err(Error::invalid("atom values must be all integers or all reals"));
        }
        let mut sum = 0.0;
        for (value, prob) in &pairs {
            if !prob.is_finite() || *prob <= 0.0 || *prob > 1.0 {
                return Err(Error::invalid(format!(
                    "atom probability {prob} for value {value} is outside (0, 1]"
                )));
            }
            if let Scalar::Real(v) = value {
                if !v.is_finite() {
                    return Err(Error::invalid("atom values must be finite"));
                }
            }
            sum += prob;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "atom probabilities sum to {sum}, expected 1 within {PROB_SUM_TOLERANCE}"
            )));
        }
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if pairs[i].0 == pairs[j].0 {
                    return Err(Error::invalid(format!(
                        "duplicate atom value {}",
                        pairs[i].0
                    )));
                }
            }
        }
        let mut cumulative = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for (_, p) in &pairs {
            acc += p;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        let atoms = pairs
            .into_iter()
            .map(|(value, prob)| Atom { value, prob })
            .collect();
        Ok(SourceDistribution::FiniteDiscrete { atoms, cumulative })
    }

    /// Uniform distribution on the integer values 0..k-1.
    pub fn uniform_ints(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("alphabet size must be positive"));
        }
        let p = 1.0 / k as f64;
        Self::finite_discrete((0..k).map(|v| (Scalar::Int(v as i64), p)).collect())
    }

    /// Bernoulli(1/2) on {0, 1}.
    pub fn bernoulli_half() -> Self {
        Self::uniform_ints(2).expect("two atoms with probability 1/2 are valid")
    }

    /// Uniform on (0,1).
    pub fn continuous_uniform() -> Self {
        SourceDistribution::ContinuousUniform
    }

    /// Composite source drawing one coordinate per component.
    pub fn composite(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("a composite source needs at least one component"));
        }
        Ok(SourceDistribution::Composite { components })
    }

    /// Number of atoms; None for continuous and composite sources.
    pub fn atom_count(&self) -> Option<usize> {
        match self {
            SourceDistribution::FiniteDiscrete { atoms, .. } => Some(atoms.len()),
            _ => None,
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match self {
            SourceDistribution::FiniteDiscrete { atoms, .. } => Some(atoms),
            _ => None,
        }
    }

    /// Index of `value` among the atoms.
    pub fn atom_index(&self, value: &Value) -> Result<usize> {
        let atoms = self
            .atoms()
            .ok_or_else(|| Error::domain("atom lookup on a non-discrete source"))?;
        let want = match value {
            Value::Int(v) => Scalar::Int(*v),
            Value::Real(v) => Scalar::Real(*v),
            Value::Tuple(_) => {
                return Err(Error::UnknownAtom { value: value.to_string() });
            }
        };
        atoms
            .iter()
            .position(|a| a.value == want)
            .ok_or_else(|| Error::UnknownAtom { value: value.to_string() })
    }

    /// Draws one value.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Value {
        match self {
            SourceDistribution::FiniteDiscrete { atoms, .. } => {
                Value::scalar(atoms[self.draw_index_unchecked(rng)].value)
            }
            SourceDistribution::ContinuousUniform => Value::Real(draw_open_unit(rng)),
            SourceDistribution::Composite { components } => {
                let coords = components
                    .iter()
                    .map(|c| match c {
                        Component::Uniform01 => draw_open_unit(rng),
                        Component::StdNormal => rng.sample(StandardNormal),
                    })
                    .collect();
                Value::Tuple(coords)
            }
        }
    }

    /// Draws an atom index; panics if the source is not finite-discrete.
    pub(crate) fn draw_index_unchecked<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            SourceDistribution::FiniteDiscrete { cumulative, .. } => {
                let u: f64 = rng.random();
                match cumulative.iter().position(|c| u < *c) {
                    Some(i) => i,
                    None => cumulative.len() - 1,
                }
            }
            _ => panic!("draw_index on a non-discrete source"),
        }
    }

    /// Human-readable kind label used in reports.
    pub fn kind_label(&self) -> &'static str {
        match self {
            SourceDistribution::FiniteDiscrete { .. } => "finite-discrete",
            SourceDistribution::ContinuousUniform => "continuous-uniform",
            SourceDistribution::Composite { .. } => "composite",
        }
    }
}

/// Uniform draw from the open interval (0,1); never returns 0.
fn draw_open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
