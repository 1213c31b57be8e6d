//! Built-in problem specifications: named field/function pairs with known
//! certification outcomes, usable as regression anchors and CLI shortcuts.

use crate::certifier::{CertifyConfig, Conclusion, HypothesisName};
use crate::error::{Error, Result};
use crate::expr::ParsedFunction;
use crate::field::VectorField;
use crate::flow::IntegratorConfig;
use crate::inequality::RhsMode;
use serde::{Deserialize, Serialize};

/// A complete problem statement: a vector field, a scalar function, and the
/// disc on which to certify. Serializable so the CLI can load it from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dimension: usize,
    /// One expression per component, in the variables `x1..xn`.
    pub field_components: Vec<String>,
    pub scalar_function: String,
    /// Value to use for `f` at the origin when the expression itself is
    /// undefined there (e.g. removable singularities).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_origin_value: Option<f64>,
    pub radius: f64,
    /// Inequality constant to verify; estimated from samples when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_c: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Integrator overrides for flow-based commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
}

fn default_seed() -> u64 {
    42
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if self.field_components.len() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "expected {} field components, got {}",
                self.dimension,
                self.field_components.len()
            )));
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidInput("radius must be positive and finite".into()));
        }
        if let Some(c) = self.constant_c {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::InvalidInput("constant_c must be positive and finite".into()));
            }
        }
        if let Some(cfg) = &self.integrator {
            cfg.validate()?;
        }
        Ok(())
    }

    pub fn field(&self) -> Result<VectorField> {
        let refs: Vec<&str> = self.field_components.iter().map(String::as_str).collect();
        VectorField::parse(&refs)
    }

    pub fn function(&self) -> Result<ParsedFunction> {
        let f = crate::expr::parse(&self.scalar_function, self.dimension)?;
        Ok(match self.scalar_origin_value {
            Some(v) => f.with_origin_value(v),
            None => f,
        })
    }

    /// Certification options derived from this spec; everything not stated
    /// here keeps its default.
    pub fn certify_config(&self) -> CertifyConfig {
        CertifyConfig {
            radius: self.radius,
            constant_c: self.constant_c,
            seed: self.seed,
            ..Default::default()
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        self.integrator.clone().unwrap_or_default()
    }

    pub fn rhs(&self) -> RhsMode {
        RhsMode::FunctionValue
    }

    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        let spec: ProblemSpec = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("bad problem spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// The conclusion a catalog entry is known to produce, compared by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedConclusion {
    MustVanish,
    HypothesisFailed { hypothesis: HypothesisName },
    Inconclusive,
}

impl ExpectedConclusion {
    pub fn matches(&self, conclusion: &Conclusion) -> bool {
        match (self, conclusion) {
            (ExpectedConclusion::MustVanish, Conclusion::MustVanish) => true,
            (
                ExpectedConclusion::HypothesisFailed { hypothesis: want },
                Conclusion::HypothesisFailed { hypothesis: got },
            ) => want == got,
            (ExpectedConclusion::Inconclusive, Conclusion::Inconclusive { .. }) => true,
            _ => false,
        }
    }
}

/// A named, documented problem with its known outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: ProblemSpec,
    pub expected: ExpectedConclusion,
    /// Why the outcome is what it is.
    pub note: String,
}

fn entry(
    name: &str,
    dimension: usize,
    field: &[&str],
    f: &str,
    origin: Option<f64>,
    radius: f64,
    constant_c: Option<f64>,
    expected: ExpectedConclusion,
    note: &str,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        spec: ProblemSpec {
            dimension,
            field_components: field.iter().map(|s| s.to_string()).collect(),
            scalar_function: f.to_string(),
            scalar_origin_value: origin,
            radius,
            constant_c,
            seed: 42,
            integrator: None,
        },
        expected,
        note: note.to_string(),
    }
}

/// All built-in entries, alphabetical by name.
pub fn entries() -> Vec<CatalogEntry> {
    let mut list = vec![
        entry(
            "cubic-overshoot-1d",
            1,
            &["x1 - 2*x1^3"],
            "x1^2",
            None,
            1.0,
            None,
            ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::InnerProduct },
            "the field points back inward past |x| = 1/sqrt(2), so <h(x), x> \
             turns negative inside the unit disc",
        ),
        entry(
            "flat-bump-1d",
            1,
            &["x1"],
            "exp(-1/(x1^2))",
            Some(0.0),
            0.5,
            None,
            ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::Constant },
            "the classic flat-at-zero function; |x·f'| / |f| = 2/x^2 is \
             unbounded, so no finite constant works",
        ),
        entry(
            "linear-sink-2d",
            2,
            &["-x1", "-x2"],
            "x1^2 + x2^2",
            None,
            1.0,
            None,
            ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::Spectrum },
            "both eigenvalues are negative: the origin attracts forward \
             orbits instead of repelling them",
        ),
        entry(
            "power-2c-1d",
            1,
            &["x1"],
            "x1^2",
            None,
            1.0,
            Some(2.0),
            ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::Flatness },
            "|x·f'| = 2|f| exactly, so c = 2 is sharp; x^2 is certifiably \
             not flat at order 2, which is what the criterion predicts",
        ),
        entry(
            "radial-zero-2d",
            2,
            &["x1", "x2"],
            "0",
            None,
            1.0,
            None,
            ExpectedConclusion::MustVanish,
            "the radial field with the zero function: every hypothesis holds \
             and the conclusion is witnessed exactly",
        ),
        entry(
            "rotation-2d",
            2,
            &["x2", "-x1"],
            "x1^2 + x2^2",
            None,
            1.0,
            None,
            ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::Spectrum },
            "purely imaginary spectrum: the origin is not hyperbolic and the \
             criterion does not apply",
        ),
        entry(
            "steep-power-1d",
            1,
            &["x1"],
            "x1^9",
            None,
            1.0,
            None,
            ExpectedConclusion::Inconclusive,
            "x^9 decays too fast for the probe to flag any order up to 8 as \
             non-flat, yet too slowly to pass the tolerance: the probe \
             honestly reports that it cannot resolve",
        ),
    ];
    list.sort_by(|a, b| a.name.cmp(&b.name));
    list
}

/// Looks up a built-in entry by exact name.
pub fn lookup(name: &str) -> Option<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_sorted_and_unique() {
        let names: Vec<String> = entries().iter().map(|e| e.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 7);
    }

    #[test]
    fn every_spec_validates_and_parses() {
        for e in entries() {
            e.spec.validate().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            let field = e.spec.field().unwrap();
            let f = e.spec.function().unwrap();
            assert_eq!(field.dimension, e.spec.dimension, "{}", e.name);
            assert_eq!(f.arity, e.spec.dimension, "{}", e.name);
        }
    }

    #[test]
    fn lookup_hits_and_misses() {
        assert!(lookup("flat-bump-1d").is_some());
        assert!(lookup("no-such-entry").is_none());
    }

    #[test]
    fn zero_entry_certifies_as_expected() {
        let e = lookup("radial-zero-2d").unwrap();
        let cert = crate::certifier::certify_gs(
            &e.spec.field().unwrap(),
            &e.spec.function().unwrap(),
            &e.spec.certify_config(),
        )
        .unwrap();
        assert!(e.expected.matches(&cert.conclusion), "{:?}", cert.conclusion);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let e = lookup("flat-bump-1d").unwrap();
        let json = serde_json::to_string(&e.spec).unwrap();
        let back = ProblemSpec::from_json(&json).unwrap();
        assert_eq!(back, e.spec);
    }

    #[test]
    fn spec_json_rejects_bad_shapes() {
        let bad = r#"{"dimension": 2, "field_components": ["x1"], "scalar_function": "0", "radius": 1.0}"#;
        assert!(ProblemSpec::from_json(bad).is_err());
        let bad_radius = r#"{"dimension": 1, "field_components": ["x1"], "scalar_function": "0", "radius": -1.0}"#;
        assert!(ProblemSpec::from_json(bad_radius).is_err());
    }

    #[test]
    fn expected_conclusion_matching() {
        let e = ExpectedConclusion::HypothesisFailed { hypothesis: HypothesisName::Constant };
        assert!(e.matches(&Conclusion::HypothesisFailed {
            hypothesis: HypothesisName::Constant
        }));
        assert!(!e.matches(&Conclusion::MustVanish));
        assert!(ExpectedConclusion::Inconclusive
            .matches(&Conclusion::Inconclusive { reason: "any".into() }));
    }
}
