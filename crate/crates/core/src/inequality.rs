//! Differential-inequality machinery: sampling `|X·f| / |f|`, estimating
//! the best inequality constant over a disc, and verifying Gronwall-type
//! exponential bounds along orbits.

use crate::error::{Error, Result};
use crate::expr::ParsedFunction;
use crate::field::{DirectionalDerivative, VectorField};
use crate::flow::{Orbit, OrbitDirection};
use crate::sample::{self, SamplerConfig};
use serde::{Deserialize, Serialize};

/// Default floor below which `|f|` is treated as numerically zero.
pub const DEFAULT_F_FLOOR: f64 = 1e-300;

/// Derivative of `f` along `field` at a single point.
pub fn derive_along(field: &VectorField, f: &ParsedFunction, point: &[f64]) -> Result<f64> {
    DirectionalDerivative::new(field, f)?.eval(point)
}

/// One sampled evaluation of the inequality `|X·f| <= c·|f|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSample {
    pub point: Vec<f64>,
    pub f_value: f64,
    pub xf_value: f64,
    /// `|X·f| / denominator`, or `None` when the denominator fell below the
    /// floor (the sample is unusable for a ratio).
    pub ratio: Option<f64>,
}

/// What the right-hand side of the inequality divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMode {
    /// `|X·f| <= c·|f(x)|` — the form with a vanishing conclusion.
    FunctionValue,
    /// `|X·f| <= c·|x|` — exploratory variant; no vanishing claim.
    PointNorm,
}

/// Per-shell supremum of the sampled ratio; `None` when no sample in that
/// shell produced a finite ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusSup {
    pub radius: f64,
    pub sup: Option<f64>,
}

/// Result of [`estimate_inequality_constant`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    /// Supremum of the ratio over all usable samples.
    pub c_hat: f64,
    /// The sample attaining `c_hat` (lexicographically smallest point on ties).
    pub attaining: DerivativeSample,
    /// Samples where `|f|` fell below the floor while `|X·f|` did not — the
    /// inequality is unsatisfiable there for any finite constant.
    pub flagged: usize,
    /// Largest radius first; exposes divergence as the radius shrinks.
    pub per_radius_sup: Vec<RadiusSup>,
}

/// Estimates the smallest workable constant `c` in `|X·f| <= c·|f|` by
/// sampling the punctured disc of `radius` shell by shell.
pub fn estimate_inequality_constant(
    field: &VectorField,
    f: &ParsedFunction,
    radius: f64,
    config: &SamplerConfig,
    floor: f64,
) -> Result<ConstantEstimate> {
    estimate_inequality_constant_with_rhs(field, f, radius, config, floor, RhsMode::FunctionValue)
}

/// [`estimate_inequality_constant`] with an explicit right-hand-side mode.
pub fn estimate_inequality_constant_with_rhs(
    field: &VectorField,
    f: &ParsedFunction,
    radius: f64,
    config: &SamplerConfig,
    floor: f64,
    rhs: RhsMode,
) -> Result<ConstantEstimate> {
    let collected = collect_ratio_samples(field, f, radius, config, floor, rhs)?;
    match collected.best {
        Some(attaining) => Ok(ConstantEstimate {
            c_hat: attaining.ratio.unwrap(),
            attaining,
            flagged: collected.flagged,
            per_radius_sup: collected.per_radius_sup,
        }),
        None => Err(Error::NoValidSamples),
    }
}

/// Raw output of the ratio-sampling sweep, kept even when no sample yields
/// a finite ratio (the certifier needs the flagged count and `sup|f|`).
pub(crate) struct RatioSamples {
    pub per_radius_sup: Vec<RadiusSup>,
    pub flagged: usize,
    pub best: Option<DerivativeSample>,
    /// Supremum of `|f|` over every sampled point.
    pub f_sup: f64,
}

pub(crate) fn collect_ratio_samples(
    field: &VectorField,
    f: &ParsedFunction,
    radius: f64,
    config: &SamplerConfig,
    floor: f64,
    rhs: RhsMode,
) -> Result<RatioSamples> {
    let dd = DirectionalDerivative::new(field, f)?;
    let mut flagged = 0usize;
    let mut per_radius_sup = Vec::new();
    let mut best: Option<DerivativeSample> = None;
    let mut f_sup = 0.0f64;
    for shell in sample::disc_shells(field.dimension, radius, config) {
        let mut shell_sup: Option<f64> = None;
        for point in &shell.points {
            let f_value = f.evaluate(point)?;
            let xf_value = dd.eval(point)?;
            f_sup = f_sup.max(f_value.abs());
            let denom = match rhs {
                RhsMode::FunctionValue => f_value.abs(),
                RhsMode::PointNorm => sample::norm(point),
            };
            let ratio = if denom >= floor {
                Some(xf_value.abs() / denom)
            } else {
                if xf_value.abs() >= floor {
                    flagged += 1;
                }
                None
            };
            let s = DerivativeSample {
                point: point.clone(),
                f_value,
                xf_value,
                ratio,
            };
            if let Some(r) = s.ratio {
                shell_sup = Some(shell_sup.map_or(r, |old: f64| old.max(r)));
                let replace = match &best {
                    None => true,
                    Some(b) => {
                        let br = b.ratio.unwrap();
                        r > br || (r == br && sample::lex_less(&s.point, &b.point))
                    }
                };
                if replace {
                    best = Some(s);
                }
            }
        }
        per_radius_sup.push(RadiusSup { radius: shell.radius, sup: shell_sup });
    }
    Ok(RatioSamples { per_radius_sup, flagged, best, f_sup })
}

/// Time-dependent coefficient in a Gronwall bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Beta {
    Constant { value: f64 },
    /// A function of `t` (arity 1).
    TimeFunction { function: ParsedFunction },
}

impl Beta {
    fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Beta::Constant { value } => Ok(*value),
            Beta::TimeFunction { function } => function.evaluate(&[t]),
        }
    }
}

/// Integral bound `u(t_k) <= u0 · exp(∫_{t_0}^{t_k} beta)`, the integral
/// computed by composite Simpson on each grid interval refined 4x.
pub fn gronwall_bound(u0: f64, beta: &Beta, times: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::InvalidInput("gronwall bound needs at least one time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("gronwall times must be strictly increasing".into()));
    }
    if let Beta::TimeFunction { function } = beta {
        if function.arity != 1 {
            return Err(Error::InvalidInput(format!(
                "beta must be a function of t alone, has arity {}",
                function.arity
            )));
        }
    }
    let mut bounds = Vec::with_capacity(times.len());
    let mut integral = 0.0f64;
    bounds.push(u0);
    for w in times.windows(2) {
        integral += simpson_4(beta, w[0], w[1])?;
        bounds.push(u0 * integral.exp());
    }
    Ok(bounds)
}

/// Composite Simpson over `[a, b]` split into 4 subintervals.
fn simpson_4(beta: &Beta, a: f64, b: f64) -> Result<f64> {
    let h = (b - a) / 4.0;
    let weights = [1.0, 4.0, 2.0, 4.0, 1.0];
    let mut sum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        sum += w * beta.eval(a + h * i as f64)?;
    }
    Ok(sum * h / 3.0)
}

/// Two-sided Gronwall check `|f(orbit)| <= |f(x0)|·e^{c·t}` along an orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub c: f64,
    pub slack: f64,
    pub times: Vec<f64>,
    /// `f` evaluated along the orbit (signed).
    pub observed: Vec<f64>,
    /// `|observed[0]| · e^{c·t}` on the same grid.
    pub bound: Vec<f64>,
    /// Largest value of `|observed| - bound`.
    pub max_violation: f64,
    pub verdict: bool,
}

impl GronwallReport {
    /// Summary triple used by the CLI (`{c, max_violation, verdict}`).
    pub fn summary(&self) -> GronwallSummary {
        GronwallSummary {
            c: self.c,
            max_violation: self.max_violation,
            verdict: self.verdict,
        }
    }

    /// `(t, observed, bound)` rows for CSV emission.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.times
            .iter()
            .zip(self.observed.iter())
            .zip(self.bound.iter())
            .map(|((t, o), b)| [*t, *o, *b])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallSummary {
    pub c: f64,
    pub max_violation: f64,
    pub verdict: bool,
}

/// Verifies the exponential bound `|f| <= |f(x0)|·e^{c·t}` at every orbit
/// sample, allowing `slack` of absolute violation.
pub fn verify_gronwall_along_orbit(
    orbit: &Orbit,
    f: &ParsedFunction,
    c: f64,
    slack: f64,
) -> Result<GronwallReport> {
    if orbit.states.is_empty() {
        return Err(Error::InvalidInput("orbit has no samples".into()));
    }
    let observed = orbit
        .states
        .iter()
        .map(|s| f.evaluate(s))
        .collect::<Result<Vec<f64>>>()?;
    let u0 = observed[0].abs();
    let bound = if orbit.times.len() == 1 {
        vec![u0]
    } else {
        gronwall_bound(u0, &Beta::Constant { value: c }, &orbit.times)?
    };
    let max_violation = observed
        .iter()
        .zip(bound.iter())
        .map(|(o, b)| o.abs() - b)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GronwallReport {
        c,
        slack,
        times: orbit.times.clone(),
        observed,
        bound,
        max_violation,
        verdict: max_violation <= slack,
    })
}

/// The one-dimensional radial substitution `u(t) = f(x0·e^t)`: reports the
/// grid, the values, and how far centered differences of `u` drift from
/// the exact `u'(t) = x0·e^t·f'(x0·e^t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSubstitution {
    pub t_grid: Vec<f64>,
    pub u_values: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Builds the radial substitution for `f` on `[x0, x0 + delta]`, sampled
/// over `grid_size` points in `t`.
pub fn radial_substitution(
    f: &ParsedFunction,
    x0: f64,
    delta: f64,
    grid_size: usize,
) -> Result<RadialSubstitution> {
    if f.arity != 1 {
        return Err(Error::InvalidInput(format!(
            "radial substitution needs a one-variable function, got arity {}",
            f.arity
        )));
    }
    if x0 <= 0.0 || delta <= 0.0 {
        return Err(Error::InvalidInput("radial substitution needs x0 > 0 and delta > 0".into()));
    }
    if grid_size < 3 {
        return Err(Error::InvalidInput("grid_size must be at least 3".into()));
    }
    let t_end = ((x0 + delta) / x0).ln();
    let h = t_end / (grid_size - 1) as f64;
    let df = f.differentiate(1)?;
    let t_grid: Vec<f64> = (0..grid_size).map(|k| k as f64 * h).collect();
    let u_values = t_grid
        .iter()
        .map(|t| f.evaluate(&[x0 * t.exp()]))
        .collect::<Result<Vec<f64>>>()?;
    let mut max_discrepancy = 0.0f64;
    for k in 1..grid_size - 1 {
        let fd = (u_values[k + 1] - u_values[k - 1]) / (2.0 * h);
        let x = x0 * t_grid[k].exp();
        let exact = x * df.evaluate(&[x])?;
        max_discrepancy = max_discrepancy.max((fd - exact).abs());
    }
    Ok(RadialSubstitution { t_grid, u_values, max_discrepancy })
}

/// Checks the chain rule `d/dt f(orbit(t)) = ±(X·f)(orbit(t))` by centered
/// differences on a uniform-grid orbit. Returns the max discrepancy over
/// interior samples. Backward orbits compare against `-(X·f)`.
pub fn chain_rule_check(field: &VectorField, f: &ParsedFunction, orbit: &Orbit) -> Result<f64> {
    if orbit.times.len() < 3 {
        return Err(Error::InvalidInput("chain-rule check needs at least 3 samples".into()));
    }
    let dt0 = orbit.times[1] - orbit.times[0];
    for w in orbit.times.windows(2) {
        if ((w[1] - w[0]) - dt0).abs() > 1e-9 * dt0.abs() {
            return Err(Error::InvalidInput(
                "chain-rule check needs a uniform time grid".into(),
            ));
        }
    }
    let sign = match orbit.direction {
        OrbitDirection::Forward => 1.0,
        OrbitDirection::Backward => -1.0,
    };
    let dd = DirectionalDerivative::new(field, f)?;
    let g: Vec<f64> = orbit
        .states
        .iter()
        .map(|s| f.evaluate(s))
        .collect::<Result<Vec<f64>>>()?;
    let mut max_disc = 0.0f64;
    for k in 1..g.len() - 1 {
        let fd = (g[k + 1] - g[k - 1]) / (orbit.times[k + 1] - orbit.times[k - 1]);
        let exact = sign * dd.eval(&orbit.states[k])?;
        max_disc = max_disc.max((fd - exact).abs());
    }
    Ok(max_disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{integrate, IntegratorConfig, Method};

    fn field_1d(src: &str) -> VectorField {
        VectorField::parse(&[src]).unwrap()
    }

    #[test]
    fn derive_along_polynomial() {
        // X = x d/dx on f = x^2: X·f = 2x^2 = 18 at x = 3
        let f = crate::expr::parse("x1^2", 1).unwrap();
        assert!((derive_along(&field_1d("x1"), &f, &[3.0]).unwrap() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn derive_along_constant_is_zero() {
        let f = crate::expr::parse("5", 2).unwrap();
        let field = VectorField::parse(&["x2", "-x1"]).unwrap();
        assert_eq!(derive_along(&field, &f, &[0.3, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn derive_along_flat_bump() {
        // X = x d/dx on f = e^{-1/x^2}: X·f = (2/x^2)·f; at x = 0.1 that is 200·f
        let f = crate::expr::parse("exp(-1/(x1^2))", 1).unwrap();
        let xf = derive_along(&field_1d("x1"), &f, &[0.1]).unwrap();
        let want = 200.0 * f.evaluate(&[0.1]).unwrap();
        assert!((xf - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn constant_estimate_for_square() {
        // |x·2x| / |x^2| = 2 exactly everywhere
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let est = estimate_inequality_constant(
            &field_1d("x1"),
            &f,
            1.0,
            &SamplerConfig::default(),
            DEFAULT_F_FLOOR,
        )
        .unwrap();
        assert!((est.c_hat - 2.0).abs() <= 1e-12);
        assert_eq!(est.flagged, 0);
        assert_eq!(est.per_radius_sup.len(), 16);
        for rs in &est.per_radius_sup {
            assert!((rs.sup.unwrap() - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_estimate_diverges_for_flat_function() {
        let f = crate::expr::parse("exp(-1/(x1^2))", 1).unwrap();
        let cfg = SamplerConfig {
            explicit_radii: Some(vec![0.5, 0.2, 0.1, 0.05]),
            ..Default::default()
        };
        let est =
            estimate_inequality_constant(&field_1d("x1"), &f, 0.5, &cfg, DEFAULT_F_FLOOR).unwrap();
        // sup of the ratio at radius r is 2/r^2
        for rs in &est.per_radius_sup {
            let want = 2.0 / (rs.radius * rs.radius);
            let got = rs.sup.unwrap();
            assert!(
                (got - want).abs() <= 1e-9 * want,
                "radius {}: sup {got} vs {want}",
                rs.radius
            );
        }
        // global sup comes from the smallest radius
        assert!((est.c_hat - 800.0).abs() <= 1e-6);
    }

    #[test]
    fn constant_estimate_underflow_shells_have_no_sup() {
        // far below x ~ 0.038, e^{-1/x^2} underflows to zero: 0/0 samples
        // are skipped silently, leaving shells with no finite ratio
        let f = crate::expr::parse("exp(-1/(x1^2))", 1).unwrap();
        let est = estimate_inequality_constant(
            &field_1d("x1"),
            &f,
            0.5,
            &SamplerConfig::default(),
            DEFAULT_F_FLOOR,
        )
        .unwrap();
        assert_eq!(est.flagged, 0);
        assert!(est.per_radius_sup.iter().any(|rs| rs.sup.is_none()));
        assert!(est.per_radius_sup.first().unwrap().sup.is_some());
    }

    #[test]
    fn zero_function_has_no_valid_samples() {
        let f = crate::expr::parse("0", 1).unwrap();
        let err = estimate_inequality_constant(
            &field_1d("x1"),
            &f,
            1.0,
            &SamplerConfig::default(),
            DEFAULT_F_FLOOR,
        )
        .unwrap_err();
        assert_eq!(err, Error::NoValidSamples);
    }

    #[test]
    fn flagged_samples_where_f_tiny_but_xf_not() {
        // with an artificially huge floor, x^2 gets flagged where
        // |f| < floor <= |X·f| = 2|f| ... i.e. floor/2 <= f < floor
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let est = estimate_inequality_constant(
            &field_1d("x1"),
            &f,
            1.0,
            &SamplerConfig::default(),
            0.1,
        )
        .unwrap();
        assert!(est.flagged > 0);
        assert!((est.c_hat - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn point_norm_rhs_never_flags() {
        let f = crate::expr::parse("exp(-1/(x1^2))", 1).unwrap();
        let est = estimate_inequality_constant_with_rhs(
            &field_1d("x1"),
            &f,
            0.5,
            &SamplerConfig::default(),
            DEFAULT_F_FLOOR,
            RhsMode::PointNorm,
        )
        .unwrap();
        assert_eq!(est.flagged, 0);
        // |X·f|/|x| = (2/x^3)·e^{-1/x^2} -> 0 as x -> 0: tiny everywhere
        assert!(est.c_hat < 1.0);
    }

    #[test]
    fn gronwall_bound_constant_beta() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let b = gronwall_bound(1.0, &Beta::Constant { value: 2.0 }, &times).unwrap();
        for (t, v) in times.iter().zip(b.iter()) {
            let want = (2.0 * t).exp();
            assert!((v - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn gronwall_bound_zero_cases() {
        let times = [0.0, 0.5, 1.0];
        let zero_u0 = gronwall_bound(0.0, &Beta::Constant { value: 3.0 }, &times).unwrap();
        assert!(zero_u0.iter().all(|v| *v == 0.0));
        let zero_beta = gronwall_bound(1.0, &Beta::Constant { value: 0.0 }, &times).unwrap();
        assert!(zero_beta.iter().all(|v| (*v - 1.0).abs() <= 1e-15));
    }

    #[test]
    fn gronwall_bound_time_dependent_beta() {
        // beta(t) = t: integral t^2/2; Simpson is exact for linear integrands
        let beta = Beta::TimeFunction { function: crate::expr::parse("x1", 1).unwrap() };
        let times: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
        let b = gronwall_bound(2.0, &beta, &times).unwrap();
        for (t, v) in times.iter().zip(b.iter()) {
            let want = 2.0 * (t * t / 2.0).exp();
            assert!((v - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn gronwall_equality_case_along_orbit() {
        // x' = x, f = x^2: f(orbit(t)) = f(x0)e^{2t} exactly
        let config = IntegratorConfig { t_max: 1.0, escape_radius: 10.0, ..Default::default() };
        let orbit = integrate(&field_1d("x1"), &[0.1], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let report = verify_gronwall_along_orbit(&orbit, &f, 2.0, 1e-7).unwrap();
        assert!(report.verdict);
        for (o, b) in report.observed.iter().zip(report.bound.iter()) {
            assert!((o.abs() - b).abs() <= 1e-8 * b.max(1e-30), "{o} vs {b}");
        }
    }

    #[test]
    fn gronwall_detects_undersized_constant() {
        let config = IntegratorConfig { t_max: 1.0, escape_radius: 10.0, ..Default::default() };
        let orbit = integrate(&field_1d("x1"), &[0.1], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let report = verify_gronwall_along_orbit(&orbit, &f, 1.9, 1e-7).unwrap();
        assert!(!report.verdict);
        // at t = 1 the gap is 0.01(e^2 - e^{1.9}) ≈ 7.03e-3
        let want = 0.01 * (2.0f64.exp() - 1.9f64.exp());
        assert!((report.max_violation - want).abs() <= 1e-6);
    }

    #[test]
    fn gronwall_zero_function_stays_zero() {
        let config = IntegratorConfig { t_max: 1.0, escape_radius: 10.0, ..Default::default() };
        let orbit = integrate(&field_1d("x1"), &[0.1], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("0", 1).unwrap();
        let report = verify_gronwall_along_orbit(&orbit, &f, 5.0, 0.0).unwrap();
        assert!(report.verdict);
        assert!(report.observed.iter().all(|o| *o == 0.0));
        assert!(report.bound.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn radial_substitution_identity_function() {
        // f = x: u(t) = x0 e^t, u' = u; on [1, e] the discrepancy is pure
        // finite-difference error, O(h^2)
        let f = crate::expr::parse("x1", 1).unwrap();
        let rs = radial_substitution(&f, 1.0, std::f64::consts::E - 1.0, 1000).unwrap();
        assert!((rs.t_grid.last().unwrap() - 1.0).abs() < 1e-12);
        assert!((rs.u_values[0] - 1.0).abs() < 1e-15);
        assert!(rs.max_discrepancy <= 1e-6, "discrepancy {}", rs.max_discrepancy);
    }

    #[test]
    fn radial_substitution_cubic() {
        let f = crate::expr::parse("x1^3", 1).unwrap();
        let rs = radial_substitution(&f, 0.5, 0.5, 1000).unwrap();
        // u(t) = 0.125 e^{3t}
        for (t, u) in rs.t_grid.iter().zip(rs.u_values.iter()) {
            let want = 0.125 * (3.0 * t).exp();
            assert!((u - want).abs() <= 1e-12 * want);
        }
        assert!(rs.max_discrepancy <= 1e-5);
    }

    #[test]
    fn radial_substitution_flat_bump_log_slope() {
        // u'(0)/u(0) = x0 f'(x0)/f(x0) = 2/x0^2 = 200 at x0 = 0.1
        let f = crate::expr::parse("exp(-1/(x1^2))", 1).unwrap();
        let rs = radial_substitution(&f, 0.1, 0.1, 2000).unwrap();
        let h = rs.t_grid[1] - rs.t_grid[0];
        let slope = (rs.u_values[1] - rs.u_values[0]) / h / rs.u_values[0];
        assert!((slope - 200.0).abs() / 200.0 <= 0.1, "slope {slope}");
    }

    #[test]
    fn chain_rule_along_decaying_orbit() {
        let config = IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-3 },
            t_max: 1.0,
            escape_radius: 10.0,
            ..Default::default()
        };
        let orbit = integrate(&field_1d("-x1"), &[1.0], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let disc = chain_rule_check(&field_1d("-x1"), &f, &orbit).unwrap();
        assert!(disc <= 1e-5, "discrepancy {disc}");
    }

    #[test]
    fn chain_rule_constant_function() {
        let config = IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-2 },
            t_max: 1.0,
            escape_radius: 10.0,
            ..Default::default()
        };
        let orbit = integrate(&field_1d("-x1"), &[1.0], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("7", 1).unwrap();
        let disc = chain_rule_check(&field_1d("-x1"), &f, &orbit).unwrap();
        assert!(disc <= 1e-12);
    }

    #[test]
    fn chain_rule_2d_rotation() {
        let field = VectorField::parse(&["x2", "-x1"]).unwrap();
        let config = IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-3 },
            t_max: 2.0,
            escape_radius: 10.0,
            ..Default::default()
        };
        let orbit = integrate(&field, &[1.0, 0.0], &config, OrbitDirection::Forward).unwrap();
        // f = x1·x2 varies along rotation orbits
        let f = crate::expr::parse("x1*x2", 2).unwrap();
        let disc = chain_rule_check(&field, &f, &orbit).unwrap();
        assert!(disc <= 1e-5, "discrepancy {disc}");
    }

    #[test]
    fn chain_rule_backward_flips_sign() {
        let config = IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-3 },
            t_max: 1.0,
            escape_radius: 10.0,
            ..Default::default()
        };
        let orbit = integrate(&field_1d("x1"), &[0.1], &config, OrbitDirection::Backward).unwrap();
        let f = crate::expr::parse("x1^2", 1).unwrap();
        let disc = chain_rule_check(&field_1d("x1"), &f, &orbit).unwrap();
        assert!(disc <= 1e-6, "discrepancy {disc}");
    }

    #[test]
    fn chain_rule_rejects_nonuniform_grid() {
        let config = IntegratorConfig { t_max: 1.0, escape_radius: 10.0, ..Default::default() };
        let orbit = integrate(&field_1d("-x1"), &[1.0], &config, OrbitDirection::Forward).unwrap();
        let f = crate::expr::parse("x1^2", 1).unwrap();
        // adaptive grids are not uniform
        assert!(matches!(
            chain_rule_check(&field_1d("-x1"), &f, &orbit),
            Err(Error::InvalidInput(_))
        ));
    }
}
