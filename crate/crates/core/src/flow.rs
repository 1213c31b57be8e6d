//! Orbit integration along vector fields.
//!
//! Two integrators: classical fixed-step RK4, and the adaptive
//! Runge-Kutta-Fehlberg 4(5) embedded pair with per-component error
//! control. Orbits terminate on one of four events: time budget reached,
//! convergence to a singular point (a dwell window of states collapsing
//! below the convergence radius), leaving the escape disc (located by
//! bisection inside the crossing step), or adaptive step underflow.

use crate::error::{Error, Result};
use crate::field::{self, DirectionalDerivative, PositivityReport, VectorField};
use crate::expr::ParsedFunction;
use crate::sample::{self, SamplerConfig};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Method {
    FixedRk4 {
        step: f64,
    },
    AdaptiveRk45 {
        rel_tol: f64,
        abs_tol: f64,
        min_step: f64,
        max_step: f64,
    },
}

impl Default for Method {
    fn default() -> Self {
        Method::AdaptiveRk45 {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            min_step: 1e-12,
            max_step: 1.0,
        }
    }
}

/// Integration run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Method,
    /// Time budget (orbit parameter runs over `[0, t_max]`).
    pub t_max: f64,
    /// Orbits terminate on reaching this norm.
    pub escape_radius: f64,
    /// Radius of the dwell window for convergence detection.
    pub convergence_radius: f64,
    /// Number of consecutive states that must collapse before the orbit is
    /// declared convergent.
    pub convergence_dwell: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::default(),
            t_max: 10.0,
            escape_radius: 1.0,
            convergence_radius: 1e-7,
            convergence_dwell: 8,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("escape_radius", self.escape_radius)?;
        positive("convergence_radius", self.convergence_radius)?;
        if self.convergence_dwell < 2 {
            return Err(Error::InvalidInput("convergence_dwell must be at least 2".into()));
        }
        match self.method {
            Method::FixedRk4 { step } => positive("step", step),
            Method::AdaptiveRk45 { rel_tol, abs_tol, min_step, max_step } => {
                positive("rel_tol", rel_tol)?;
                positive("abs_tol", abs_tol)?;
                positive("min_step", min_step)?;
                positive("max_step", max_step)?;
                if min_step >= max_step {
                    return Err(Error::InvalidInput(format!(
                        "min_step {min_step} must be below max_step {max_step}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Which time direction the orbit parameter advances in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitDirection {
    Forward,
    /// Integrates `x' = -X(x)`; times still increase from 0, so
    /// `states[k]` approximates the flow at `-times[k]`.
    Backward,
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTMax,
    ConvergedToSingularity,
    LeftDomain,
    StepUnderflow,
}

impl Termination {
    pub fn reason(&self) -> &'static str {
        match self {
            Termination::ReachedTMax => "reached_t_max",
            Termination::ConvergedToSingularity => "converged_to_singularity",
            Termination::LeftDomain => "left_domain",
            Termination::StepUnderflow => "step_underflow",
        }
    }

    pub fn from_reason(reason: &str) -> Result<Self> {
        match reason {
            "reached_t_max" => Ok(Termination::ReachedTMax),
            "converged_to_singularity" => Ok(Termination::ConvergedToSingularity),
            "left_domain" => Ok(Termination::LeftDomain),
            "step_underflow" => Ok(Termination::StepUnderflow),
            other => Err(Error::InvalidInput(format!("unknown termination reason `{other}`"))),
        }
    }
}

/// An integrated orbit: `states[k]` is the solution at `times[k]`, with
/// `times` strictly increasing from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub direction: OrbitDirection,
    pub termination: Termination,
    /// Refined singular point, present when the orbit converged.
    pub limit_point: Option<Vec<f64>>,
    /// Convergence radius of the run that produced this orbit (fits use it
    /// as a noise floor).
    pub convergence_radius: f64,
}

impl Orbit {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("orbits always hold the initial sample")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("orbits always hold the initial sample")
    }
}

/// Hard cap on integration loop turns, to bound pathological configs.
const MAX_LOOP_TURNS: usize = 10_000_000;

/// Integrates the orbit of `field` from `x0`.
///
/// Backward orbits integrate the negated field, so they trace the flow in
/// reverse while the recorded times stay non-negative.
pub fn integrate(
    field: &VectorField,
    x0: &[f64],
    config: &IntegratorConfig,
    direction: OrbitDirection,
) -> Result<Orbit> {
    config.validate()?;
    if x0.len() != field.dimension {
        return Err(Error::InvalidInput(format!(
            "initial point has {} coordinates, field dimension is {}",
            x0.len(),
            field.dimension
        )));
    }
    let sign = match direction {
        OrbitDirection::Forward => 1.0,
        OrbitDirection::Backward => -1.0,
    };
    let rhs = |y: &[f64]| -> Result<Vec<f64>> {
        Ok(field.evaluate(y)?.into_iter().map(|v| sign * v).collect())
    };

    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let finish = |times: Vec<f64>, states: Vec<Vec<f64>>, termination, limit_point| Orbit {
        times,
        states,
        direction,
        termination,
        limit_point,
        convergence_radius: config.convergence_radius,
    };

    if sample::norm(x0) >= config.escape_radius {
        return Ok(finish(times, states, Termination::LeftDomain, None));
    }

    let mut dwell: VecDeque<Vec<f64>> = VecDeque::with_capacity(config.convergence_dwell);
    dwell.push_back(x0.to_vec());

    let mut t = 0.0f64;
    let mut y = x0.to_vec();
    let mut h = match config.method {
        Method::FixedRk4 { step } => step,
        Method::AdaptiveRk45 { max_step, .. } => max_step.min(config.t_max).min(1e-2),
    };
    // fixed-step times are built multiplicatively so the grid stays uniform
    // to within an ulp however long the orbit runs
    let mut steps_taken = 0u64;

    for _ in 0..MAX_LOOP_TURNS {
        if config.t_max - t <= config.t_max * 1e-15 {
            return Ok(finish(times, states, Termination::ReachedTMax, None));
        }

        // one accepted step
        let (h_used, y_new, h_next, t_new) = match config.method {
            Method::FixedRk4 { step } => {
                let remaining = config.t_max - t;
                let (h_eff, t_new) = if remaining <= step * (1.0 + 1e-9) {
                    (remaining, config.t_max)
                } else {
                    (step, (steps_taken + 1) as f64 * step)
                };
                let y_new = rk4_step(&rhs, &y, h_eff)?;
                (h_eff, y_new, step, t_new)
            }
            Method::AdaptiveRk45 { rel_tol, abs_tol, min_step, max_step } => {
                let mut h_cur = h.min(config.t_max - t);
                loop {
                    let (y5, err) = rkf45_step(&rhs, &y, h_cur)?;
                    let mut err_norm_sq = 0.0;
                    for i in 0..y.len() {
                        let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
                        let e = err[i] / scale;
                        err_norm_sq += e * e;
                    }
                    let err_norm = (err_norm_sq / y.len() as f64).sqrt();
                    if err_norm <= 1.0 {
                        let grow = if err_norm == 0.0 {
                            5.0
                        } else {
                            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        let h_next = (h_cur * grow).clamp(min_step, max_step);
                        break (h_cur, y5, h_next, t + h_cur);
                    }
                    if h_cur <= min_step * (1.0 + 1e-12) {
                        return Ok(finish(times, states, Termination::StepUnderflow, None));
                    }
                    let shrink = (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.5);
                    h_cur = (h_cur * shrink).max(min_step);
                }
            }
        };

        // escape check, with the crossing located by bisection on the step size
        if sample::norm(&y_new) >= config.escape_radius {
            let (tau, y_exit) = locate_escape(&rhs, &y, h_used, config.escape_radius, &config.method)?;
            times.push(t + tau);
            states.push(y_exit);
            return Ok(finish(times, states, Termination::LeftDomain, None));
        }

        steps_taken += 1;
        t = t_new;
        y = y_new;
        h = h_next;
        times.push(t);
        states.push(y.clone());

        // convergence check over the dwell window
        if dwell.len() == config.convergence_dwell {
            dwell.pop_front();
        }
        dwell.push_back(y.clone());
        if dwell.len() == config.convergence_dwell {
            let half = config.convergence_radius / 2.0;
            let collapsed = dwell.iter().all(|s| distance(s, &y) <= half);
            if collapsed {
                let limit = refine_limit(field, &y, half);
                return Ok(finish(
                    times,
                    states,
                    Termination::ConvergedToSingularity,
                    Some(limit),
                ));
            }
        }
    }
    Err(Error::Convergence {
        iterations: MAX_LOOP_TURNS,
        message: "integration loop budget exhausted".into(),
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Newton-refines the detected limit point; falls back to the raw state if
/// refinement fails or wanders outside the dwell half-radius.
fn refine_limit(field: &VectorField, state: &[f64], half_radius: f64) -> Vec<f64> {
    match field::find_singularity(field, state, 1e-13, 50) {
        Ok(refined) if distance(&refined, state) <= half_radius => refined,
        _ => state.to_vec(),
    }
}

fn rk4_step<F>(rhs: &F, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let k1 = rhs(y)?;
    let k2 = rhs(&combine(y, &[(h / 2.0, &k1)]))?;
    let k3 = rhs(&combine(y, &[(h / 2.0, &k2)]))?;
    let k4 = rhs(&combine(y, &[(h, &k3)]))?;
    let mut out = y.to_vec();
    for i in 0..n {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// One Runge-Kutta-Fehlberg 4(5) step. Returns the fifth-order solution
/// and the embedded error estimate (difference of the two orders).
fn rkf45_step<F>(rhs: &F, y: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let k1 = rhs(y)?;
    let k2 = rhs(&combine(y, &[(h * 0.25, &k1)]))?;
    let k3 = rhs(&combine(y, &[(h * 3.0 / 32.0, &k1), (h * 9.0 / 32.0, &k2)]))?;
    let k4 = rhs(&combine(
        y,
        &[
            (h * 1932.0 / 2197.0, &k1),
            (h * -7200.0 / 2197.0, &k2),
            (h * 7296.0 / 2197.0, &k3),
        ],
    ))?;
    let k5 = rhs(&combine(
        y,
        &[
            (h * 439.0 / 216.0, &k1),
            (h * -8.0, &k2),
            (h * 3680.0 / 513.0, &k3),
            (h * -845.0 / 4104.0, &k4),
        ],
    ))?;
    let k6 = rhs(&combine(
        y,
        &[
            (h * -8.0 / 27.0, &k1),
            (h * 2.0, &k2),
            (h * -3544.0 / 2565.0, &k3),
            (h * 1859.0 / 4104.0, &k4),
            (h * -11.0 / 40.0, &k5),
        ],
    ))?;
    let mut y5 = y.to_vec();
    let mut err = vec![0.0; n];
    for i in 0..n {
        let fourth = 25.0 / 216.0 * k1[i]
            + 1408.0 / 2565.0 * k3[i]
            + 2197.0 / 4104.0 * k4[i]
            - 0.2 * k5[i];
        let fifth = 16.0 / 135.0 * k1[i]
            + 6656.0 / 12825.0 * k3[i]
            + 28561.0 / 56430.0 * k4[i]
            - 9.0 / 50.0 * k5[i]
            + 2.0 / 55.0 * k6[i];
        y5[i] += h * fifth;
        err[i] = h * (fifth - fourth);
    }
    Ok((y5, err))
}

fn combine(y: &[f64], terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (w, k) in terms {
        for i in 0..out.len() {
            out[i] += w * k[i];
        }
    }
    out
}

/// Bisects the step size inside a crossing step until the endpoint sits on
/// the escape sphere (from outside). Returns `(tau, state)`.
fn locate_escape<F>(
    rhs: &F,
    y0: &[f64],
    h: f64,
    escape_radius: f64,
    method: &Method,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let single_step = |tau: f64| -> Result<Vec<f64>> {
        match method {
            Method::FixedRk4 { .. } => rk4_step(rhs, y0, tau),
            Method::AdaptiveRk45 { .. } => Ok(rkf45_step(rhs, y0, tau)?.0),
        }
    };
    let mut lo = 0.0f64;
    let mut hi = h;
    let mut y_hi = single_step(hi)?;
    for _ in 0..80 {
        if hi - lo <= h * 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = single_step(mid)?;
        if sample::norm(&y_mid) >= escape_radius {
            hi = mid;
            y_hi = y_mid;
        } else {
            lo = mid;
        }
        if (sample::norm(&y_hi) - escape_radius).abs() <= 1e-12 * escape_radius {
            break;
        }
    }
    Ok((hi, y_hi))
}

/// Exponential contraction fit `|state - a| <= theta·e^{-lambda t}·|x0 - a|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkRateFit {
    pub theta: f64,
    pub lambda: f64,
    pub rms_log_residual: f64,
    pub samples_used: usize,
    /// Samples discarded for coinciding exactly with the limit point.
    pub samples_excluded: usize,
}

/// Samples retained by [`fit_sink_rate`]: the first 20% are dropped as
/// transient, and samples within 10x the orbit's convergence radius of `a`
/// are dropped as noise floor. Returns `(t, distance)` pairs.
pub fn sink_fit_retention(orbit: &Orbit, a: &[f64]) -> (Vec<(f64, f64)>, usize) {
    let floor = 10.0 * orbit.convergence_radius;
    let skip = orbit.times.len() / 5;
    let mut excluded = 0usize;
    let mut retained = Vec::new();
    for (i, (t, state)) in orbit.times.iter().zip(orbit.states.iter()).enumerate() {
        let d = distance(state, a);
        if d == 0.0 {
            excluded += 1;
            continue;
        }
        if i < skip || d <= floor {
            continue;
        }
        retained.push((*t, d));
    }
    (retained, excluded)
}

/// Least-squares fit of `ln|state - a|` against `t` on the retained
/// samples of a convergent orbit. `lambda` is the negated slope; `theta`
/// is lifted just enough that the bound holds on every retained sample.
pub fn fit_sink_rate(orbit: &Orbit, a: &[f64]) -> Result<SinkRateFit> {
    if orbit.termination != Termination::ConvergedToSingularity {
        return Err(Error::InvalidInput(format!(
            "sink-rate fit needs a convergent orbit, got {}",
            orbit.termination.reason()
        )));
    }
    let nonzero = orbit
        .states
        .iter()
        .filter(|s| distance(s, a) > 0.0)
        .count();
    if nonzero < 10 {
        return Err(Error::InsufficientSamples { have: nonzero, need: 10 });
    }
    let (retained, excluded) = sink_fit_retention(orbit, a);
    if retained.len() < 10 {
        if excluded > 0 {
            return Err(Error::DegenerateOrbit { excluded });
        }
        return Err(Error::InsufficientSamples { have: retained.len(), need: 10 });
    }

    let n = retained.len() as f64;
    let (mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0);
    for (t, d) in &retained {
        let l = d.ln();
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
    }
    let denom = n * stt - st * st;
    if denom <= 0.0 {
        return Err(Error::InsufficientSamples { have: retained.len(), need: 10 });
    }
    let slope = (n * stl - st * sl) / denom;
    let intercept = (sl - slope * st) / n;
    let lambda = -slope;
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!(
            "orbit does not contract: fitted rate {lambda}"
        )));
    }

    let mut max_res = f64::NEG_INFINITY;
    let mut sum_sq = 0.0;
    for (t, d) in &retained {
        let res = d.ln() - (slope * t + intercept);
        max_res = max_res.max(res);
        sum_sq += res * res;
    }
    let d0 = distance(&orbit.states[0], a);
    if d0 == 0.0 {
        return Err(Error::DegenerateOrbit { excluded: excluded.max(1) });
    }
    // lift the intercept by the worst residual so the bound covers every
    // retained sample exactly
    let theta = (intercept + max_res).exp() / d0;
    Ok(SinkRateFit {
        theta,
        lambda,
        rms_log_residual: (sum_sq / n).sqrt(),
        samples_used: retained.len(),
        samples_excluded: excluded,
    })
}

/// One end of a maximal interval of definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalEnd {
    /// The orbit leaves the escape disc at this time.
    Finite { t: f64 },
    /// The orbit converges to a singularity, so it is defined for all time
    /// in this direction.
    Unbounded,
    /// The run ended (time budget or step underflow) without resolving the
    /// question; `t_reached` is how far it got.
    Undetermined { t_reached: f64 },
}

/// Estimated maximal interval of definition around `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalIntervalEstimate {
    pub t_minus: IntervalEnd,
    pub t_plus: IntervalEnd,
}

/// Integrates in both directions and reports where the orbit leaves the
/// escape disc or whether it converges (hence exists for all time).
pub fn maximal_interval_estimate(
    field: &VectorField,
    x0: &[f64],
    config: &IntegratorConfig,
) -> Result<MaximalIntervalEstimate> {
    let classify = |orbit: &Orbit, sign: f64| match orbit.termination {
        Termination::LeftDomain => IntervalEnd::Finite { t: sign * orbit.final_time() },
        Termination::ConvergedToSingularity => IntervalEnd::Unbounded,
        Termination::ReachedTMax | Termination::StepUnderflow => {
            IntervalEnd::Undetermined { t_reached: sign * orbit.final_time() }
        }
    };
    let forward = integrate(field, x0, config, OrbitDirection::Forward)?;
    let backward = integrate(field, x0, config, OrbitDirection::Backward)?;
    Ok(MaximalIntervalEstimate {
        t_minus: classify(&backward, -1.0),
        t_plus: classify(&forward, 1.0),
    })
}

/// Checks that `V` decreases along the field near the origin: samples the
/// punctured disc and reports positivity of `-(X·V)`.
///
/// Precondition, checked against the same samples: `V(0)` must not exceed
/// any sampled value of `V` (local-minimum candidate).
pub fn lyapunov_check(
    field: &VectorField,
    v: &ParsedFunction,
    radius: f64,
    config: &SamplerConfig,
) -> Result<PositivityReport> {
    let dd = DirectionalDerivative::new(field, v)?;
    let origin = vec![0.0; field.dimension];
    let v0 = v.evaluate(&origin)?;
    let mut v_min = f64::INFINITY;
    for shell in sample::disc_shells(field.dimension, radius, config) {
        for p in &shell.points {
            v_min = v_min.min(v.evaluate(p)?);
        }
    }
    if v_min < v0 - 1e-12 * (1.0 + v0.abs()) {
        return Err(Error::NotALocalMinimum { v0, v_min });
    }
    field::sampled_positivity(radius, config, field.dimension, |p| Ok(-dd.eval(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_1d(src: &str) -> VectorField {
        VectorField::parse(&[src]).unwrap()
    }

    fn adaptive(t_max: f64, escape: f64) -> IntegratorConfig {
        IntegratorConfig { t_max, escape_radius: escape, ..Default::default() }
    }

    #[test]
    fn decay_reaches_e_inverse() {
        let orbit = integrate(&field_1d("-x1"), &[1.0], &adaptive(1.0, 10.0), OrbitDirection::Forward)
            .unwrap();
        assert_eq!(orbit.termination, Termination::ReachedTMax);
        assert_eq!(orbit.final_time(), 1.0);
        let err = (orbit.final_state()[0] - (-1.0f64).exp()).abs();
        assert!(err <= 1e-8, "error {err:e}");
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = (-1.0f64).exp();
        let error_at = |step: f64| {
            let config = IntegratorConfig {
                method: Method::FixedRk4 { step },
                ..adaptive(1.0, 10.0)
            };
            let orbit =
                integrate(&field_1d("-x1"), &[1.0], &config, OrbitDirection::Forward).unwrap();
            (orbit.final_state()[0] - exact).abs()
        };
        let (e1, e2, e3) = (error_at(1e-2), error_at(5e-3), error_at(2.5e-3));
        let (r1, r2) = (e1 / e2, e2 / e3);
        assert!((12.0..=20.0).contains(&r1), "halving ratio {r1}");
        assert!((12.0..=20.0).contains(&r2), "halving ratio {r2}");
    }

    #[test]
    fn expanding_orbit_escapes_at_log_time() {
        // x' = x from 0.01 crosses |x| = 1 at t = ln(100)
        let orbit = integrate(&field_1d("x1"), &[0.01], &adaptive(10.0, 1.0), OrbitDirection::Forward)
            .unwrap();
        assert_eq!(orbit.termination, Termination::LeftDomain);
        assert!(sample::norm(orbit.final_state()) >= 1.0);
        assert!((orbit.final_time() - 100.0f64.ln()).abs() <= 1e-6);
    }

    #[test]
    fn contracting_orbit_converges() {
        let orbit = integrate(&field_1d("-x1"), &[0.5], &adaptive(40.0, 10.0), OrbitDirection::Forward)
            .unwrap();
        assert_eq!(orbit.termination, Termination::ConvergedToSingularity);
        let limit = orbit.limit_point.as_ref().unwrap();
        assert!(sample::norm(limit) <= 1e-7);
        // the final dwell states all sit within the convergence radius of the limit
        let dwell = 8;
        for s in orbit.states.iter().rev().take(dwell) {
            assert!(distance(s, limit) <= 1e-7);
        }
    }

    #[test]
    fn orbit_started_at_singularity_stays_there() {
        let orbit = integrate(&field_1d("x1"), &[0.0], &adaptive(5.0, 1.0), OrbitDirection::Forward)
            .unwrap();
        assert_eq!(orbit.termination, Termination::ConvergedToSingularity);
        assert!(orbit.states.iter().all(|s| s[0] == 0.0));
        assert_eq!(orbit.limit_point.as_deref(), Some(&[0.0][..]));
    }

    #[test]
    fn backward_integrates_negated_field() {
        // backward orbit of x' = x contracts toward 0
        let orbit = integrate(&field_1d("x1"), &[0.5], &adaptive(40.0, 1.0), OrbitDirection::Backward)
            .unwrap();
        assert_eq!(orbit.termination, Termination::ConvergedToSingularity);
    }

    #[test]
    fn forward_backward_duality() {
        let field = VectorField::parse(&["x2", "-x1 + 0.1*x2"]).unwrap();
        let x0 = [0.3, -0.2];
        let config = adaptive(2.0, 100.0);
        let back = integrate(&field, &x0, &config, OrbitDirection::Backward).unwrap();
        assert_eq!(back.termination, Termination::ReachedTMax);
        let round =
            integrate(&field, back.final_state(), &config, OrbitDirection::Forward).unwrap();
        assert!(distance(round.final_state(), &x0) <= 1e-6);
    }

    #[test]
    fn semigroup_on_aligned_grids() {
        let config = IntegratorConfig {
            method: Method::FixedRk4 { step: 1e-3 },
            ..adaptive(0.5, 100.0)
        };
        let field = VectorField::parse(&["-x2", "x1"]).unwrap();
        let first = integrate(&field, &[1.0, 0.0], &config, OrbitDirection::Forward).unwrap();
        let second =
            integrate(&field, first.final_state(), &config, OrbitDirection::Forward).unwrap();
        let whole = integrate(
            &field,
            &[1.0, 0.0],
            &IntegratorConfig { t_max: 1.0, ..config.clone() },
            OrbitDirection::Forward,
        )
        .unwrap();
        assert!(distance(second.final_state(), whole.final_state()) <= 1e-7);
    }

    #[test]
    fn step_underflow_surfaces_as_termination() {
        // finite-time blow-up: x' = x^2 from 1 blows up at t = 1
        let config = IntegratorConfig {
            method: Method::AdaptiveRk45 {
                rel_tol: 1e-9,
                abs_tol: 1e-12,
                min_step: 1e-6,
                max_step: 1.0,
            },
            t_max: 2.0,
            escape_radius: f64::MAX / 4.0,
            ..Default::default()
        };
        let orbit =
            integrate(&field_1d("x1^2"), &[1.0], &config, OrbitDirection::Forward);
        // either the step collapses or evaluation overflows; both are
        // acceptable surfacings, but with this floor the step collapses first
        let orbit = orbit.unwrap();
        assert_eq!(orbit.termination, Termination::StepUnderflow);
        assert!(orbit.final_time() < 2.0);
    }

    #[test]
    fn fit_recovers_contraction_rate() {
        let orbit =
            integrate(&field_1d("-2*x1"), &[1.0], &adaptive(40.0, 10.0), OrbitDirection::Forward)
                .unwrap();
        let fit = fit_sink_rate(&orbit, &[0.0]).unwrap();
        assert!((fit.lambda - 2.0).abs() <= 1e-3, "lambda {}", fit.lambda);
        assert!(fit.theta >= 0.98 && fit.theta <= 1.05, "theta {}", fit.theta);
        assert!(fit.rms_log_residual <= 1e-6);
        // bound holds on every retained sample by construction
        let (retained, _) = sink_fit_retention(&orbit, &[0.0]);
        assert!(retained.len() >= 10);
        for (t, d) in retained {
            assert!(fit.theta * (-fit.lambda * t).exp() * 1.0 >= d * (1.0 - 1e-9));
        }
    }

    #[test]
    fn fit_rejects_short_orbits() {
        let mut orbit =
            integrate(&field_1d("-x1"), &[0.5], &adaptive(40.0, 10.0), OrbitDirection::Forward)
                .unwrap();
        orbit.times.truncate(5);
        orbit.states.truncate(5);
        assert!(matches!(
            fit_sink_rate(&orbit, &[0.0]),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn fit_rejects_non_convergent_orbits() {
        let orbit = integrate(&field_1d("-x1"), &[1.0], &adaptive(1.0, 10.0), OrbitDirection::Forward)
            .unwrap();
        assert!(matches!(fit_sink_rate(&orbit, &[0.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn maximal_interval_both_ways() {
        // x' = x from 0.01: escapes forward at ln(100), unbounded backward
        let est =
            maximal_interval_estimate(&field_1d("x1"), &[0.01], &adaptive(40.0, 1.0)).unwrap();
        match est.t_plus {
            IntervalEnd::Finite { t } => assert!((t - 100.0f64.ln()).abs() <= 1e-6),
            other => panic!("expected finite escape, got {other:?}"),
        }
        assert_eq!(est.t_minus, IntervalEnd::Unbounded);
    }

    #[test]
    fn maximal_interval_at_singularity() {
        let est =
            maximal_interval_estimate(&field_1d("x1"), &[0.0], &adaptive(5.0, 1.0)).unwrap();
        assert_eq!(est.t_plus, IntervalEnd::Unbounded);
        assert_eq!(est.t_minus, IntervalEnd::Unbounded);
    }

    #[test]
    fn maximal_interval_sink_forward() {
        let est =
            maximal_interval_estimate(&field_1d("-x1"), &[0.5], &adaptive(60.0, 1.0)).unwrap();
        assert_eq!(est.t_plus, IntervalEnd::Unbounded);
        match est.t_minus {
            IntervalEnd::Finite { t } => {
                assert!(t < 0.0);
                assert!((t + 0.5f64.recip().ln().abs()).abs() <= 1e-6, "t_minus {t}");
            }
            other => panic!("expected finite backward escape, got {other:?}"),
        }
    }

    #[test]
    fn lyapunov_norm_decreases_for_sink() {
        let field = VectorField::parse(&["-x1", "-x2"]).unwrap();
        let v = crate::expr::parse("x1^2 + x2^2", 2).unwrap();
        let report = lyapunov_check(&field, &v, 1.0, &SamplerConfig::default()).unwrap();
        assert!(report.verdict);
        // -Y·V = 2|x|^2, minimized on the smallest shell
        assert!((report.min_inner_product - 2e-6).abs() <= 1e-18);
    }

    #[test]
    fn lyapunov_rejects_bad_candidate() {
        let field = VectorField::parse(&["-x1"]).unwrap();
        // V = -x^2 has a maximum at the origin
        let v = crate::expr::parse("-x1^2", 1).unwrap();
        assert!(matches!(
            lyapunov_check(&field, &v, 1.0, &SamplerConfig::default()),
            Err(Error::NotALocalMinimum { .. })
        ));
    }

    #[test]
    fn lyapunov_fails_for_source() {
        let field = VectorField::parse(&["x1", "x2"]).unwrap();
        let v = crate::expr::parse("x1^2 + x2^2", 2).unwrap();
        let report = lyapunov_check(&field, &v, 1.0, &SamplerConfig::default()).unwrap();
        assert!(!report.verdict);
    }

    #[test]
    fn norm_monotone_along_sink_orbit() {
        let field = VectorField::parse(&["-x1", "-x2"]).unwrap();
        let orbit =
            integrate(&field, &[0.6, -0.3], &adaptive(30.0, 10.0), OrbitDirection::Forward).unwrap();
        let mut last = f64::INFINITY;
        for s in &orbit.states {
            let n = sample::norm(s);
            assert!(n <= last + 1e-9);
            last = n;
        }
    }
}
