//! Problem-source resolution and error-to-exit-code mapping shared by the
//! subcommands. A problem comes from exactly one of: a JSON spec file, a
//! built-in catalog entry, or inline `--field`/`--dim`/`--f` expressions.

use clap::Args;
use gscert_core::catalog::{self, ProblemSpec};
use gscert_core::error::Error;
use std::path::PathBuf;

/// A failed run: carries the process exit code and a message for stderr.
///
/// Exit codes: 2 for input and validation problems, 3 for numerical or
/// runtime failures. (0 is success; 4 marks an inconclusive certificate.)
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::Arity { .. }
            | Error::InvalidInput(_)
            | Error::InsufficientSamples { .. } => 2,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

/// Where the problem comes from, plus per-run overrides.
#[derive(Args, Debug)]
pub struct ProblemArgs {
    /// Load the problem from a JSON spec file
    #[arg(long, value_name = "FILE", conflicts_with_all = ["catalog", "field"])]
    pub spec: Option<PathBuf>,

    /// Use a built-in catalog entry (run `gscert catalog` to list them)
    #[arg(long, alias = "catalog-f", value_name = "NAME", conflicts_with = "field")]
    pub catalog: Option<String>,

    /// Inline field components: comma-separated expressions in x1..xn
    #[arg(long, value_name = "EXPRS", requires = "dim", allow_hyphen_values = true)]
    pub field: Option<String>,

    /// Dimension of the inline problem
    #[arg(long, value_name = "N")]
    pub dim: Option<usize>,

    /// Scalar function to certify (overrides the spec's function)
    #[arg(long = "f", value_name = "EXPR", allow_hyphen_values = true)]
    pub function: Option<String>,

    /// Value of f at the origin, for removable singularities there
    #[arg(long, value_name = "VALUE", allow_negative_numbers = true)]
    pub origin_value: Option<f64>,

    /// Disc radius around the origin (overrides the spec)
    #[arg(long, value_name = "R")]
    pub radius: Option<f64>,

    /// Inequality constant c (overrides the spec; estimated when absent)
    #[arg(long, value_name = "C")]
    pub constant_c: Option<f64>,
}

impl ProblemArgs {
    /// Resolves to a validated spec with both expressions parse-checked,
    /// so malformed input fails here with a usage exit code.
    pub fn resolve(&self) -> Result<ProblemSpec, Failure> {
        let mut spec = if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::usage(format!("cannot read {}: {e}", path.display()))
            })?;
            ProblemSpec::from_json(&text)?
        } else if let Some(name) = &self.catalog {
            catalog::lookup(name)
                .ok_or_else(|| {
                    Failure::usage(format!(
                        "unknown catalog entry `{name}`; run `gscert catalog` to list"
                    ))
                })?
                .spec
        } else if self.field.is_some() || (self.function.is_some() && self.dim.is_some()) {
            let dimension = self.dim.ok_or_else(|| {
                Failure::usage("inline problems need --dim alongside --field/--f")
            })?;
            // With `--f` but no `--field`, probe the function against the
            // radial field x' = x, which satisfies every flow hypothesis.
            let components = match &self.field {
                Some(field) => field.split(',').map(|s| s.trim().to_string()).collect(),
                None => (1..=dimension).map(|i| format!("x{i}")).collect(),
            };
            ProblemSpec {
                dimension,
                field_components: components,
                scalar_function: "0".to_string(),
                scalar_origin_value: None,
                radius: 1.0,
                constant_c: None,
                seed: 42,
                integrator: None,
            }
        } else {
            return Err(Failure::usage(
                "no problem given: use --catalog NAME, --spec FILE, or --field EXPRS --dim N",
            ));
        };
        if let Some(f) = &self.function {
            spec.scalar_function = f.clone();
        }
        if let Some(v) = self.origin_value {
            spec.scalar_origin_value = Some(v);
        }
        if let Some(r) = self.radius {
            spec.radius = r;
        }
        if let Some(c) = self.constant_c {
            spec.constant_c = Some(c);
        }
        spec.validate()?;
        spec.field()?;
        spec.function()?;
        Ok(spec)
    }
}

/// Parses a comma-separated coordinate list of the expected dimension.
pub fn parse_point(text: &str, dimension: usize) -> Result<Vec<f64>, Failure> {
    let coords: Result<Vec<f64>, _> =
        text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let coords =
        coords.map_err(|e| Failure::usage(format!("bad coordinate in `{text}`: {e}")))?;
    if coords.len() != dimension {
        return Err(Failure::usage(format!(
            "point `{text}` has {} coordinates, problem dimension is {dimension}",
            coords.len()
        )));
    }
    Ok(coords)
}
