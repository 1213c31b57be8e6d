//! Vector fields, Jacobians, and singular-point analysis.

use crate::error::{Error, Result};
use crate::expr::ParsedFunction;
use crate::linalg::{self, Matrix};
use crate::report::ComplexNumber;
use crate::sample::{self, SamplerConfig};
use serde::{Deserialize, Serialize};

/// Default tolerance for deciding hyperbolicity and for the singular-point
/// residual check in [`classify_singularity`].
pub const DEFAULT_HYPERBOLIC_TOL: f64 = 1e-9;

/// A vector field on R^n given componentwise by expressions in `x1..xn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub dimension: usize,
    pub components: Vec<ParsedFunction>,
}

/// The Jacobian matrix of a field at a point. All entries are finite.
pub type JacobianMatrix = Matrix;

impl VectorField {
    /// Builds a field from component source texts.
    pub fn parse(sources: &[&str]) -> Result<Self> {
        let dimension = sources.len();
        if dimension == 0 {
            return Err(Error::InvalidInput("a field needs at least one component".into()));
        }
        let components = sources
            .iter()
            .map(|s| crate::expr::parse(s, dimension))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { dimension, components })
    }

    pub fn from_components(components: Vec<ParsedFunction>) -> Result<Self> {
        let dimension = components.len();
        if dimension == 0 {
            return Err(Error::InvalidInput("a field needs at least one component".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.arity != dimension) {
            return Err(Error::InvalidInput(format!(
                "component `{}` has arity {}, field has dimension {}",
                bad.source_text, bad.arity, dimension
            )));
        }
        Ok(VectorField { dimension, components })
    }

    /// Evaluates the field at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.evaluate(point)).collect()
    }

    /// All n^2 symbolic partials, row i = gradient of component i.
    pub fn jacobian_functions(&self) -> Result<Vec<Vec<ParsedFunction>>> {
        self.components
            .iter()
            .map(|c| (1..=self.dimension).map(|v| c.differentiate(v)).collect())
            .collect()
    }

    /// `<field(x), x>` at `point`.
    pub fn inner_product_with_position(&self, point: &[f64]) -> Result<f64> {
        let v = self.evaluate(point)?;
        Ok(v.iter().zip(point.iter()).map(|(a, b)| a * b).sum())
    }
}

/// Evaluator for the derivative of a scalar function along a field,
/// `(X·f)(x) = sum_i X_i(x) ∂f/∂x_i (x)`, with the symbolic partials
/// computed once at construction so repeated evaluation is cheap.
#[derive(Debug, Clone)]
pub struct DirectionalDerivative {
    components: Vec<ParsedFunction>,
    partials: Vec<ParsedFunction>,
}

impl DirectionalDerivative {
    pub fn new(field: &VectorField, f: &ParsedFunction) -> Result<Self> {
        if f.arity != field.dimension {
            return Err(Error::InvalidInput(format!(
                "function arity {} does not match field dimension {}",
                f.arity, field.dimension
            )));
        }
        let partials = (1..=f.arity)
            .map(|v| f.differentiate(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(DirectionalDerivative {
            components: field.components.clone(),
            partials,
        })
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for (c, d) in self.components.iter().zip(self.partials.iter()) {
            sum += c.evaluate(point)? * d.evaluate(point)?;
        }
        Ok(sum)
    }
}

/// Jacobian of `field` at `point`, from exact symbolic partials.
pub fn jacobian_at(field: &VectorField, point: &[f64]) -> Result<JacobianMatrix> {
    let n = field.dimension;
    let partials = field.jacobian_functions()?;
    let mut m = Matrix::zeros(n);
    for (i, row) in partials.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            m[(i, j)] = p.evaluate(point)?;
        }
    }
    Ok(m)
}

/// How the eigenvalue real parts of a singular point sit relative to the
/// hyperbolicity tolerance band around zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Every real part below `-tol`.
    HyperbolicSink,
    /// Every real part above `+tol`.
    HyperbolicSource,
    /// Mixed signs, all real parts outside the band.
    HyperbolicSaddle,
    /// Some real part within the band.
    NonHyperbolic,
}

/// Eigenvalue report for a singular point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by descending real part, ties by descending imaginary part.
    pub eigenvalues: Vec<ComplexNumber>,
    pub min_real_part: f64,
    pub max_real_part: f64,
    pub classification: Classification,
    pub tolerance_used: f64,
}

/// Classifies the singular point of `field` at `point`.
///
/// `tol` plays two roles: the residual bound for accepting `point` as a
/// singularity (`|field(point)| <= tol` scaled by the Jacobian magnitude),
/// and the half-width of the band around zero inside which a real part
/// counts as non-hyperbolic.
pub fn classify_singularity(
    field: &VectorField,
    point: &[f64],
    tol: f64,
) -> Result<SpectrumReport> {
    let residual = sample::norm(&field.evaluate(point)?);
    let jac = jacobian_at(field, point)?;
    let scale = jac.max_abs().max(1.0);
    if residual > tol * scale {
        return Err(Error::NotASingularity { residual_norm: residual });
    }
    let eigs = linalg::eigenvalues(&jac)?;
    let min_real_part = eigs.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let max_real_part = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let classification = if min_real_part < -tol && max_real_part < -tol {
        Classification::HyperbolicSink
    } else if min_real_part > tol && max_real_part > tol {
        Classification::HyperbolicSource
    } else if eigs.iter().any(|l| l.re.abs() <= tol) {
        Classification::NonHyperbolic
    } else {
        Classification::HyperbolicSaddle
    };
    Ok(SpectrumReport {
        eigenvalues: eigs.into_iter().map(ComplexNumber::from).collect(),
        min_real_part,
        max_real_part,
        classification,
        tolerance_used: tol,
    })
}

/// Newton iteration for a zero of `field` starting from `guess`.
///
/// Stops when `|field(p)| <= tol`; fails with [`Error::Convergence`] after
/// `max_iter` steps or [`Error::SingularJacobian`] if a linear solve pivots
/// on a negligible entry.
pub fn find_singularity(
    field: &VectorField,
    guess: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let mut p = guess.to_vec();
    let partials = field.jacobian_functions()?;
    let n = field.dimension;
    for _ in 0..max_iter {
        let value = field.evaluate(&p)?;
        if sample::norm(&value) <= tol {
            return Ok(p);
        }
        let mut jac = Matrix::zeros(n);
        for (i, row) in partials.iter().enumerate() {
            for (j, d) in row.iter().enumerate() {
                jac[(i, j)] = d.evaluate(&p)?;
            }
        }
        let step = jac.solve(&value)?;
        for i in 0..n {
            p[i] -= step[i];
        }
    }
    let residual = sample::norm(&field.evaluate(&p)?);
    Err(Error::Convergence {
        iterations: max_iter,
        message: format!("newton stalled with |field| = {residual:e}"),
    })
}

/// Result of a sampled sign check over a punctured disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub samples_checked: usize,
    /// Minimum of the checked quantity over all samples.
    pub min_inner_product: f64,
    /// A point attaining the minimum (lexicographically smallest on ties).
    pub attaining_point: Vec<f64>,
    /// True when the minimum is strictly positive.
    pub verdict: bool,
}

/// Checks `<field(x), x> > 0` over the punctured disc of `radius`.
pub fn inner_product_positivity(
    field: &VectorField,
    radius: f64,
    config: &SamplerConfig,
) -> Result<PositivityReport> {
    sampled_positivity(radius, config, field.dimension, |p| {
        field.inner_product_with_position(p)
    })
}

/// Shared sampling loop: minimizes `value` over the disc samples.
pub(crate) fn sampled_positivity<F>(
    radius: f64,
    config: &SamplerConfig,
    dim: usize,
    value: F,
) -> Result<PositivityReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let shells = sample::disc_shells(dim, radius, config);
    let mut samples_checked = 0usize;
    let mut min_value = f64::INFINITY;
    let mut attaining: Vec<f64> = Vec::new();
    for shell in &shells {
        for p in &shell.points {
            let v = value(p)?;
            samples_checked += 1;
            if v < min_value || (v == min_value && sample::lex_less(p, &attaining)) {
                min_value = v;
                attaining = p.clone();
            }
        }
    }
    if samples_checked == 0 {
        return Err(Error::InvalidInput("sampler produced no points".into()));
    }
    Ok(PositivityReport {
        samples_checked,
        min_inner_product: min_value,
        attaining_point: attaining,
        verdict: min_value > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_field(n: usize) -> VectorField {
        let sources: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = sources.iter().map(|s| s.as_str()).collect();
        VectorField::parse(&refs).unwrap()
    }

    #[test]
    fn jacobian_of_identity_field() {
        let f = identity_field(3);
        let j = jacobian_at(&f, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(j, Matrix::identity(3));
    }

    #[test]
    fn jacobian_of_rotation_field() {
        let f = VectorField::parse(&["x2", "-x1"]).unwrap();
        let j = jacobian_at(&f, &[0.3, -0.7]).unwrap();
        assert_eq!(j.rows(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn jacobian_of_cubic() {
        let f = VectorField::parse(&["x1^3"]).unwrap();
        let j = jacobian_at(&f, &[2.0]).unwrap();
        assert!((j[(0, 0)] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn classify_source_sink_nonhyperbolic() {
        let source = classify_singularity(&identity_field(2), &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(source.classification, Classification::HyperbolicSource);
        assert!((source.min_real_part - 1.0).abs() < 1e-12);

        let sink_field = VectorField::parse(&["-x1", "-x2"]).unwrap();
        let sink = classify_singularity(&sink_field, &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(sink.classification, Classification::HyperbolicSink);

        let rot = VectorField::parse(&["x2", "-x1"]).unwrap();
        let spinning = classify_singularity(&rot, &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(spinning.classification, Classification::NonHyperbolic);

        let saddle_field = VectorField::parse(&["x1", "-x2"]).unwrap();
        let saddle = classify_singularity(&saddle_field, &[0.0, 0.0], 1e-9).unwrap();
        assert_eq!(saddle.classification, Classification::HyperbolicSaddle);
    }

    #[test]
    fn classify_rejects_regular_points() {
        let err = classify_singularity(&identity_field(1), &[0.5], 1e-9).unwrap_err();
        match err {
            Error::NotASingularity { residual_norm } => {
                assert!((residual_norm - 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn newton_finds_roots_of_cubic() {
        let f = VectorField::parse(&["x1^3 - x1"]).unwrap();
        // basin of the root at 0
        let root = find_singularity(&f, &[0.3], 1e-12, 100).unwrap();
        assert!(root[0].abs() < 1e-10);
        // basin of the root at 1
        let root = find_singularity(&f, &[1.4], 1e-12, 100).unwrap();
        assert!((root[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn newton_2d_shifted_zero() {
        let f = VectorField::parse(&["x1 - 1", "x2 + 2"]).unwrap();
        let root = find_singularity(&f, &[0.0, 0.0], 1e-12, 50).unwrap();
        assert!((root[0] - 1.0).abs() < 1e-12);
        assert!((root[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn newton_reports_singular_jacobian() {
        // x1^2 + 1 never vanishes and its derivative is zero at the guess,
        // so the first Newton solve pivots on nothing
        let f = VectorField::parse(&["x1^2 + 1"]).unwrap();
        assert_eq!(
            find_singularity(&f, &[0.0], 1e-12, 10).unwrap_err(),
            Error::SingularJacobian
        );
    }

    #[test]
    fn positivity_of_identity_field() {
        let report =
            inner_product_positivity(&identity_field(2), 1.0, &SamplerConfig::default()).unwrap();
        assert!(report.verdict);
        // <x, x> = r^2, minimized on the smallest shell
        assert!((report.min_inner_product - 1e-6).abs() < 1e-12);
        assert_eq!(report.samples_checked, 16 * 128);
    }

    #[test]
    fn positivity_catches_overshoot() {
        // x - 2x^3 turns against the position for |x| > 1/sqrt(2)
        let f = VectorField::parse(&["x1 - 2*x1^3"]).unwrap();
        let report = inner_product_positivity(&f, 1.0, &SamplerConfig::default()).unwrap();
        assert!(!report.verdict);
        assert!(report.min_inner_product < 0.0);
        assert!((report.attaining_point[0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_respects_seed() {
        let f = VectorField::parse(&["x1 + 0.1*x2", "x2"]).unwrap();
        let a = inner_product_positivity(&f, 1.0, &SamplerConfig::with_seed(1)).unwrap();
        let b = inner_product_positivity(&f, 1.0, &SamplerConfig::with_seed(1)).unwrap();
        assert_eq!(a, b);
    }
}
