//! JSON factor specifications: a source, a window length, and either an
//! explicit table or a named factor from the catalog.
//!
//! Table form, with the table in mixed-radix window order (last coordinate
//! fastest):
//!
//! ```json
//! {"source": {"kind": "uniform-ints", "k": 2}, "ell": 2, "table": [0, 0, 0, 1]}
//! ```
//!
//! Named forms: `{"factor": "rn-example"}` (brings its own composite
//! source), `{"factor": "bst", "trees": [{"tree": "100", "coeff": 1.0}]}`
//! over the continuous uniform source, and `{"factor": "gw", "trees":
//! [{"tree": "2,0,0"}], "offspring": {"preset": "poisson1"}}` over the
//! offspring source. Offspring laws are `{"p": [p0, p1, ...]}` or
//! `{"preset": "poisson1" | "geom-half", "truncate": k}`.

use serde::Deserialize;

use crate::error::Error;
use crate::factor::BlockFactor;
use crate::source::{Atom, Component, Scalar, SourceDistribution};
use crate::trees::binary::BinaryTree;
use crate::trees::bst::bst_fringe_factor;
use crate::trees::gw::{gw_factor, OffspringDistribution};
use crate::trees::ordered::OrderedTree;
use crate::trees::LinearSubtreeStatistic;
use crate::Result;

/// A parsed factor specification: the block factor, the source it runs on,
/// and the tree-statistic ingredients when the factor came from a tree form.
#[derive(Debug, Clone)]
pub struct ParsedSpec {
    pub factor: BlockFactor,
    pub source: SourceDistribution,
    /// Offspring law, present for `"factor": "gw"` specs.
    pub offspring: Option<OffspringDistribution>,
    /// Degree-sequence statistic, present for `"factor": "gw"` specs.
    pub gw_stat: Option<LinearSubtreeStatistic<OrderedTree>>,
    /// Search-tree statistic, present for `"factor": "bst"` specs.
    pub bst_stat: Option<LinearSubtreeStatistic<BinaryTree>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    source: Option<SourceSpec>,
    ell: Option<usize>,
    table: Option<Vec<f64>>,
    factor: Option<String>,
    trees: Option<Vec<TreeTerm>>,
    offspring: Option<OffspringSpec>,
    known_mean: Option<f64>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum SourceSpec {
    Finite { atoms: Vec<AtomSpec> },
    UniformInts { k: usize },
    Uniform01,
    Composite { components: Vec<String> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    value: serde_json::Value,
    prob: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeTerm {
    tree: String,
    #[serde(default = "one")]
    coeff: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OffspringSpec {
    p: Option<Vec<f64>>,
    preset: Option<String>,
    truncate: Option<u32>,
}

fn scalar_of(v: &serde_json::Value) -> Result<Scalar> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Scalar::Int(i))
            } else if let Some(x) = n.as_f64() {
                Ok(Scalar::Real(x))
            } else {
                Err(Error::Parse(format!("atom value {n} does not fit a 64-bit number")))
            }
        }
        other => Err(Error::Parse(format!("atom value must be a number, got {other}"))),
    }
}

fn build_source(spec: &SourceSpec) -> Result<SourceDistribution> {
    match spec {
        SourceSpec::Finite { atoms } => {
            let pairs: Vec<(Scalar, f64)> = atoms
                .iter()
                .map(|a| Ok((scalar_of(&a.value)?, a.prob)))
                .collect::<Result<_>>()?;
            SourceDistribution::finite_discrete(pairs)
        }
        SourceSpec::UniformInts { k } => SourceDistribution::uniform_ints(*k),
        SourceSpec::Uniform01 => Ok(SourceDistribution::continuous_uniform()),
        SourceSpec::Composite { components } => {
            let parts: Vec<Component> = components
                .iter()
                .map(|c| match c.as_str() {
                    "uniform01" => Ok(Component::Uniform01),
                    "std-normal" => Ok(Component::StdNormal),
                    other => Err(Error::Parse(format!(
                        "unknown component {other:?}; known: uniform01, std-normal"
                    ))),
                })
                .collect::<Result<_>>()?;
            SourceDistribution::composite(parts)
        }
    }
}

fn build_offspring(spec: &OffspringSpec) -> Result<OffspringDistribution> {
    match (&spec.p, &spec.preset) {
        (Some(_), Some(_)) => Err(Error::Parse(
            "offspring takes either \"p\" or \"preset\", not both".into(),
        )),
        (Some(p), None) => {
            if spec.truncate.is_some() {
                return Err(Error::Parse(
                    "\"truncate\" only applies to offspring presets".into(),
                ));
            }
            OffspringDistribution::finite(p.clone())
        }
        (None, Some(name)) => match spec.truncate {
            Some(t) => OffspringDistribution::preset_with_truncation(name, t),
            None => OffspringDistribution::preset(name),
        },
        (None, None) => Err(Error::Parse(
            "offspring needs a \"p\" table or a \"preset\" name".into(),
        )),
    }
}

fn reject<T>(present: &Option<T>, field: &str, form: &str) -> Result<()> {
    if present.is_some() {
        return Err(Error::Parse(format!("{field:?} does not apply to {form}")));
    }
    Ok(())
}

/// Parses a factor specification from JSON text.
pub fn parse_spec(text: &str) -> Result<ParsedSpec> {
    let spec: FileSpec = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("invalid factor specification: {e}")))?;
    match spec.factor.as_deref() {
        None => {
            let source_spec = spec
                .source
                .as_ref()
                .ok_or_else(|| Error::Parse("a table spec needs a \"source\"".into()))?;
            let ell = spec
                .ell
                .ok_or_else(|| Error::Parse("a table spec needs \"ell\"".into()))?;
            let table = spec
                .table
                .clone()
                .ok_or_else(|| Error::Parse("a table spec needs a \"table\"".into()))?;
            reject(&spec.trees, "trees", "a table spec")?;
            reject(&spec.offspring, "offspring", "a table spec")?;
            let source = build_source(source_spec)?;
            let atoms: Vec<Scalar> = source
                .atoms()
                .ok_or_else(|| Error::Parse("table factors need a finite source".into()))?
                .iter()
                .map(|a: &Atom| a.value)
                .collect();
            let mut factor = BlockFactor::table(ell, atoms, table)?;
            if let Some(mean) = spec.known_mean {
                factor = factor.with_known_mean(mean);
            }
            factor.validate_for(&source)?;
            Ok(ParsedSpec { factor, source, offspring: None, gw_stat: None, bst_stat: None })
        }
        Some("rn-example") => {
            reject(&spec.source, "source", "the rn-example factor")?;
            reject(&spec.ell, "ell", "the rn-example factor")?;
            reject(&spec.table, "table", "the rn-example factor")?;
            reject(&spec.trees, "trees", "the rn-example factor")?;
            reject(&spec.offspring, "offspring", "the rn-example factor")?;
            reject(&spec.known_mean, "known_mean", "the rn-example factor")?;
            let source =
                SourceDistribution::composite(vec![Component::Uniform01, Component::StdNormal])?;
            Ok(ParsedSpec {
                factor: BlockFactor::rn_example(),
                source,
                offspring: None,
                gw_stat: None,
                bst_stat: None,
            })
        }
        Some("bst") => {
            reject(&spec.source, "source", "bst factors")?;
            reject(&spec.ell, "ell", "bst factors")?;
            reject(&spec.table, "table", "bst factors")?;
            reject(&spec.offspring, "offspring", "bst factors")?;
            reject(&spec.known_mean, "known_mean", "bst factors")?;
            let terms = spec
                .trees
                .as_ref()
                .ok_or_else(|| Error::Parse("bst factors need \"trees\"".into()))?;
            let parsed: Vec<(BinaryTree, f64)> = terms
                .iter()
                .map(|t| Ok((BinaryTree::decode(&t.tree)?, t.coeff)))
                .collect::<Result<_>>()?;
            let stat = LinearSubtreeStatistic::new(parsed)?;
            Ok(ParsedSpec {
                factor: bst_fringe_factor(&stat),
                source: SourceDistribution::continuous_uniform(),
                offspring: None,
                gw_stat: None,
                bst_stat: Some(stat),
            })
        }
        Some("gw") => {
            reject(&spec.source, "source", "gw factors")?;
            reject(&spec.ell, "ell", "gw factors")?;
            reject(&spec.table, "table", "gw factors")?;
            reject(&spec.known_mean, "known_mean", "gw factors")?;
            let terms = spec
                .trees
                .as_ref()
                .ok_or_else(|| Error::Parse("gw factors need \"trees\"".into()))?;
            let off_spec = spec
                .offspring
                .as_ref()
                .ok_or_else(|| Error::Parse("gw factors need an \"offspring\" law".into()))?;
            let parsed: Vec<(OrderedTree, f64)> = terms
                .iter()
                .map(|t| Ok((OrderedTree::parse(&t.tree)?, t.coeff)))
                .collect::<Result<_>>()?;
            let stat = LinearSubtreeStatistic::new(parsed)?;
            let offspring = build_offspring(off_spec)?;
            let factor = gw_factor(&stat, &offspring)?;
            let source = offspring.as_source()?;
            Ok(ParsedSpec {
                factor,
                source,
                offspring: Some(offspring),
                gw_stat: Some(stat),
                bst_stat: None,
            })
        }
        Some(other) => Err(Error::Parse(format!(
            "unknown factor {other:?}; known: rn-example, bst, gw, or a table spec"
        ))),
    }
}

/// Reads and parses a factor specification file.
pub fn parse_spec_path(path: &std::path::Path) -> Result<ParsedSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_spec_parses() {
        let spec = parse_spec(
            r#"{"source": {"kind": "uniform-ints", "k": 2}, "ell": 2, "table": [0, 0, 0, 1]}"#,
        )
        .expect("valid spec");
        assert_eq!(spec.factor.ell(), 2, "window length comes through");
        let mm = crate::moments::exact_moments(&spec.factor, &spec.source).expect("moments");
        assert!((mm.sigma2 - 0.3125).abs() < 1e-15, "product factor sigma^2 is 5/16");
    }

    #[test]
    fn finite_source_atoms_keep_their_number_type() {
        let spec = parse_spec(
            r#"{
                "source": {"kind": "finite", "atoms": [
                    {"value": 0, "prob": 0.25}, {"value": 1, "prob": 0.5},
                    {"value": 2, "prob": 0.25}
                ]},
                "ell": 1,
                "table": [1, 0, 0],
                "known_mean": 0.25
            }"#,
        )
        .expect("valid spec");
        assert_eq!(spec.factor.known_mean(), Some(0.25), "known mean is applied");
        let atoms = spec.source.atoms().expect("finite source");
        assert_eq!(atoms[2].value, Scalar::Int(2), "integer JSON numbers become Int atoms");
    }

    #[test]
    fn rn_example_brings_its_source() {
        let spec = parse_spec(r#"{"factor": "rn-example"}"#).expect("valid spec");
        assert_eq!(spec.factor.ell(), 3, "the example reads three draws");
        assert!(spec.source.atoms().is_none(), "composite source has no atoms");
        let err = parse_spec(r#"{"factor": "rn-example", "ell": 3}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "extra fields are rejected");
    }

    #[test]
    fn bst_spec_builds_the_fringe_factor() {
        let spec = parse_spec(r#"{"factor": "bst", "trees": [{"tree": "100"}]}"#)
            .expect("valid spec");
        assert_eq!(spec.factor.ell(), 3, "leaf statistic reads windows of three");
        let stat = spec.bst_stat.expect("statistic is kept");
        assert_eq!(stat.coeffs(), &[1.0], "coefficient defaults to 1");
    }

    #[test]
    fn gw_spec_builds_factor_offspring_and_source() {
        let spec = parse_spec(
            r#"{
                "factor": "gw",
                "trees": [{"tree": "0", "coeff": 2.0}],
                "offspring": {"p": [0.25, 0.5, 0.25]}
            }"#,
        )
        .expect("valid spec");
        assert_eq!(spec.factor.ell(), 1, "leaf statistic reads single degrees");
        assert_eq!(spec.factor.known_mean(), Some(0.0), "centered factor declares mean 0");
        let off = spec.offspring.expect("offspring is kept");
        assert_eq!(off.support(), vec![0, 1, 2], "table offspring law");
        assert_eq!(spec.source.atoms().expect("finite").len(), 3, "source mirrors the law");

        let preset = parse_spec(
            r#"{
                "factor": "gw",
                "trees": [{"tree": "2,0,0"}],
                "offspring": {"preset": "geom-half", "truncate": 10}
            }"#,
        )
        .expect("valid spec");
        let off = preset.offspring.expect("offspring");
        assert!(off.truncated_mass() > 0.0, "preset truncation is recorded");
        assert_eq!(off.probs().len(), 11, "truncation bounds the table");
    }

    #[test]
    fn mistakes_get_field_level_messages() {
        let err = parse_spec(r#"{"ell": 2, "table": [0, 0, 0, 1]}"#).unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("source")),
            "missing source names the field, got {err:?}"
        );
        let err = parse_spec(r#"{"factor": "gw", "trees": [{"tree": "0"}]}"#).unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("offspring")),
            "missing offspring names the field, got {err:?}"
        );
        let err = parse_spec(
            r#"{"factor": "gw", "trees": [{"tree": "0"}],
                "offspring": {"p": [0.5, 0.5], "preset": "poisson1"}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("not both")),
            "conflicting offspring forms are rejected, got {err:?}"
        );
        let err = parse_spec(r#"{"factor": "zeta"}"#).unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.contains("zeta")), "unknown factor named");
        let err = parse_spec(r#"{"source": {"kind": "uniform01"}}"#).unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("ell")),
            "a bare source is missing the table fields, got {err:?}"
        );
        let err = parse_spec(r#"{"source": {"kind": "uniform01"}, "ell": 2, "tabel": [0]}"#)
            .unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("tabel")),
            "typos surface through unknown-field errors, got {err:?}"
        );
        let err = parse_spec(
            r#"{"source": {"kind": "uniform01"}, "ell": 2, "table": [0, 1, -1, 0]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("finite")),
            "continuous sources cannot carry tables, got {err:?}"
        );
    }

    #[test]
    fn composite_source_components_parse() {
        let spec = parse_spec(
            r#"{
                "source": {"kind": "composite", "components": ["uniform01", "std-normal"]},
                "ell": 1,
                "table": [0.0]
            }"#,
        )
        .unwrap_err();
        assert!(
            matches!(&spec, Error::Parse(m) if m.contains("finite")),
            "composite sources reject tables, got {spec:?}"
        );
        let err = parse_spec(
            r#"{"source": {"kind": "composite", "components": ["cauchy"]},
                "ell": 1, "table": [0.0]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(&err, Error::Parse(m) if m.contains("cauchy")),
            "unknown components are named, got {err:?}"
        );
    }
}
