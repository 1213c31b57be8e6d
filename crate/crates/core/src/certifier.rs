//! The certification pipeline: probes flatness at a point, checks the four
//! hypotheses of the vanishing criterion in order (spectrum, inner product,
//! inequality constant, flatness), and assembles a machine-readable
//! certificate with the resulting conclusion. Also builds the power-law
//! lower-bound witness that explains *why* a non-flat function cannot
//! satisfy the hypotheses.

use crate::error::{Error, Result};
use crate::expr::ParsedFunction;
use crate::field::{
    classify_singularity, inner_product_positivity, Classification, PositivityReport,
    SpectrumReport,
};
use crate::flow::{fit_sink_rate, integrate, IntegratorConfig, OrbitDirection, Termination};
use crate::inequality::{collect_ratio_samples, RadiusSup, RhsMode};
use crate::sample::{self, SamplerConfig};
use crate::field::VectorField;
use serde::{Deserialize, Serialize};

/// Verdict for a single flatness order, judged over shrinking radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlatStatus {
    /// Ratio non-increasing over the last three radii and below tolerance.
    Flat,
    /// Ratio non-decreasing over the last three radii and above tolerance.
    NotFlat,
    /// Trend and tolerance disagree; more resolution would be needed.
    Inconclusive,
}

/// Table of `sup |f| / r^k` over shrinking radii, with a per-order verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    /// Probed radii, largest first.
    pub radii: Vec<f64>,
    pub k_max: u32,
    pub flat_tol: f64,
    /// `sup |f|` over the sampled directions at each radius.
    pub sup_f: Vec<f64>,
    /// `ratio_table[i][k] = sup_f[i] / radii[i]^k`.
    pub ratio_table: Vec<Vec<f64>>,
    /// Verdict per order `k = 0..=k_max`.
    pub per_k: Vec<FlatStatus>,
    pub overall: FlatStatus,
}

impl FlatnessReport {
    /// `(radius, k, ratio)` rows for CSV emission, radius-major.
    pub fn rows(&self) -> Vec<(f64, u32, f64)> {
        let mut out = Vec::with_capacity(self.radii.len() * (self.k_max as usize + 1));
        for (i, r) in self.radii.iter().enumerate() {
            for k in 0..=self.k_max {
                out.push((*r, k, self.ratio_table[i][k as usize]));
            }
        }
        out
    }

    pub fn is_flat_at(&self, k: u32) -> bool {
        self.per_k.get(k as usize).copied() == Some(FlatStatus::Flat)
    }
}

/// Default radius ladder for probes: 16 log-spaced shells spanning three
/// decades below `radius`.
pub fn default_probe_radii(radius: f64) -> Vec<f64> {
    sample::log_spaced(radius, radius * 1e-3, 16)
}

/// Samples `sup_{|u|=1} |f(r·u)| / r^k` over the given radii and judges the
/// decay of each order `k <= k_max`.
///
/// A column is [`FlatStatus::Flat`] when it is non-increasing over the last
/// three radii *and* ends below `flat_tol`; [`FlatStatus::NotFlat`] when it
/// is non-decreasing over the last three radii and ends at or above
/// `flat_tol`; anything else is [`FlatStatus::Inconclusive`]. The overall
/// verdict is `NotFlat` if any column is, `Flat` if all columns are, and
/// `Inconclusive` otherwise.
pub fn flatness_probe(
    f: &ParsedFunction,
    radii: &[f64],
    k_max: u32,
    directions: usize,
    seed: u64,
    flat_tol: f64,
) -> Result<FlatnessReport> {
    if radii.is_empty() {
        return Err(Error::InvalidInput("flatness probe needs at least one radius".into()));
    }
    if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(Error::InvalidInput("flatness radii must be positive and finite".into()));
    }
    if directions == 0 {
        return Err(Error::InvalidInput("flatness probe needs at least one direction".into()));
    }
    let mut radii: Vec<f64> = radii.to_vec();
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let dirs = sample::unit_directions(f.arity, directions, seed);
    let mut sup_f = Vec::with_capacity(radii.len());
    let mut ratio_table = Vec::with_capacity(radii.len());
    let mut point = vec![0.0; f.arity];
    for r in &radii {
        let mut sup = 0.0f64;
        for u in &dirs {
            for (p, ui) in point.iter_mut().zip(u.iter()) {
                *p = r * ui;
            }
            sup = sup.max(f.evaluate(&point)?.abs());
        }
        let row: Vec<f64> = (0..=k_max).map(|k| sup / r.powi(k as i32)).collect();
        sup_f.push(sup);
        ratio_table.push(row);
    }
    let per_k: Vec<FlatStatus> = (0..=k_max as usize)
        .map(|k| {
            let col: Vec<f64> = ratio_table.iter().map(|row| row[k]).collect();
            column_status(&col, flat_tol)
        })
        .collect();
    let overall = if per_k.contains(&FlatStatus::NotFlat) {
        FlatStatus::NotFlat
    } else if per_k.iter().all(|s| *s == FlatStatus::Flat) {
        FlatStatus::Flat
    } else {
        FlatStatus::Inconclusive
    };
    Ok(FlatnessReport {
        radii,
        k_max,
        flat_tol,
        sup_f,
        ratio_table,
        per_k,
        overall,
    })
}

fn column_status(col: &[f64], flat_tol: f64) -> FlatStatus {
    if col.len() < 3 {
        return FlatStatus::Inconclusive;
    }
    let tail = &col[col.len() - 3..];
    let non_increasing = tail[0] >= tail[1] && tail[1] >= tail[2];
    let non_decreasing = tail[0] <= tail[1] && tail[1] <= tail[2];
    let last = tail[2];
    if non_increasing && last < flat_tol {
        FlatStatus::Flat
    } else if non_decreasing && last >= flat_tol {
        FlatStatus::NotFlat
    } else {
        FlatStatus::Inconclusive
    }
}

/// Which hypothesis of the vanishing criterion failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisName {
    Spectrum,
    InnerProduct,
    Constant,
    Flatness,
}

/// Outcome of a certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conclusion {
    /// All hypotheses verified numerically; the criterion forces `f ≡ 0`
    /// on the disc, and the samples agree.
    MustVanish,
    /// A hypothesis failed; no vanishing conclusion follows.
    HypothesisFailed { hypothesis: HypothesisName },
    /// Nothing failed outright, but the evidence does not support a verdict.
    Inconclusive { reason: String },
}

/// Spectrum hypothesis: the origin is a singular point whose linearization
/// has all eigenvalue real parts positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub passed: bool,
    /// Absent when the origin failed the singularity residual test.
    pub report: Option<SpectrumReport>,
    pub note: Option<String>,
}

/// Inner-product hypothesis: `<field(x), x> > 0` on the punctured disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerProductCheck {
    pub passed: bool,
    pub report: PositivityReport,
}

/// Where the inequality constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    UserSupplied,
    /// Supremum of the sampled ratio over the outermost shell.
    LargestRadiusBand,
}

/// Constant hypothesis: `|X·f| <= c·|f|` across all sampled shells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub passed: bool,
    /// True when no sample produced a finite ratio and none was flagged;
    /// the hypothesis holds vacuously (e.g. `f ≡ 0` on the disc).
    pub vacuous: bool,
    pub c_used: Option<f64>,
    pub source: ConstantSource,
    /// Supremum of the sampled ratio over the whole disc.
    pub global_sup: Option<f64>,
    /// Samples with `|f|` below the floor but `|X·f|` above it.
    pub flagged: usize,
    pub per_radius_sup: Vec<RadiusSup>,
    pub note: Option<String>,
}

/// Flatness hypothesis: every order up to `k_max` decays below tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessCheck {
    pub passed: bool,
    pub report: FlatnessReport,
}

/// Power-law lower bound `|f(x)| >= k·|x|^(c/λ)` along an orbit running
/// from the witness point `q` toward the origin. Its existence is what
/// makes flatness impossible for a non-vanishing `f` under the other
/// hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBound {
    pub q: Vec<f64>,
    /// Fitted contraction rate of the orbit toward the origin.
    pub lambda: f64,
    /// Fitted overshoot factor of the contraction bound.
    pub theta: f64,
    /// `c / lambda`.
    pub exponent: f64,
    /// `|f(q)| / |q|^exponent`.
    pub k_const: f64,
    pub checked_points: usize,
    /// Minimum of `|f(x)| - k·|x|^exponent` over the checked points.
    pub min_margin: f64,
}

/// Floor below which `|f(q)|` is unusable as a witness value.
const WITNESS_F_FLOOR: f64 = 1e-300;

/// Builds a lower-bound witness for `|X·f| <= c·|f|` on the disc.
///
/// Starts just inside the boundary along a seeded direction, runs the flow
/// backward (toward the origin, which the spectrum hypothesis makes a
/// backward-time sink), picks the first orbit state `q` with
/// `|q| <= radius / 10`, and checks `|f| >= k·|x|^(c/λ)` with
/// `k = |f(q)| / |q|^(c/λ)` at every later state. Returns the bound and
/// `(t, k·|x|^e, |f(x)|)` rows, time measured from `q`.
pub fn lower_bound_witness(
    field: &VectorField,
    f: &ParsedFunction,
    radius: f64,
    c: f64,
    seed: u64,
) -> Result<(WitnessBound, Vec<[f64; 3]>)> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidInput("witness radius must be positive and finite".into()));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidInput("witness constant must be positive and finite".into()));
    }
    let dim = field.dimension;
    let direction = sample::unit_directions(dim, 1, seed).remove(0);
    let start: Vec<f64> = direction.iter().map(|u| 0.9 * radius * u).collect();
    let config = IntegratorConfig {
        t_max: 40.0,
        escape_radius: 2.0 * radius,
        convergence_radius: radius * 1e-7,
        ..Default::default()
    };
    let orbit = integrate(field, &start, &config, OrbitDirection::Backward)?;
    if orbit.termination == Termination::LeftDomain {
        return Err(Error::WitnessUnavailable {
            reason: "backward orbit escaped instead of approaching the origin".into(),
        });
    }
    let q_idx = orbit
        .states
        .iter()
        .position(|s| sample::norm(s) <= radius / 10.0)
        .ok_or_else(|| Error::WitnessUnavailable {
            reason: "backward orbit never reached a tenth of the radius".into(),
        })?;
    let q = orbit.states[q_idx].clone();
    let fq = f.evaluate(&q)?.abs();
    if fq < WITNESS_F_FLOOR {
        return Err(Error::WitnessUnavailable {
            reason: "function vanishes numerically at the witness point".into(),
        });
    }
    let origin = vec![0.0; dim];
    let fit = fit_sink_rate(&orbit, &origin).map_err(|e| Error::WitnessUnavailable {
        reason: format!("contraction-rate fit failed: {e}"),
    })?;
    let exponent = c / fit.lambda;
    let k_const = fq / sample::norm(&q).powf(exponent);
    let t_q = orbit.times[q_idx];
    let mut rows = Vec::new();
    let mut min_margin = f64::INFINITY;
    for i in q_idx..orbit.states.len() {
        let s = &orbit.states[i];
        let r = sample::norm(s);
        if r == 0.0 {
            continue;
        }
        let lhs = k_const * r.powf(exponent);
        let rhs = f.evaluate(s)?.abs();
        min_margin = min_margin.min(rhs - lhs);
        rows.push([orbit.times[i] - t_q, lhs, rhs]);
    }
    if rows.is_empty() {
        return Err(Error::WitnessUnavailable {
            reason: "no orbit points available past the witness point".into(),
        });
    }
    Ok((
        WitnessBound {
            q,
            lambda: fit.lambda,
            theta: fit.theta,
            exponent,
            k_const,
            checked_points: rows.len(),
            min_margin,
        },
        rows,
    ))
}

/// Options for [`certify_gs`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Radius of the disc around the origin.
    pub radius: f64,
    /// Inequality constant to verify; derived from the outermost shell
    /// when absent.
    pub constant_c: Option<f64>,
    pub seed: u64,
    /// Band half-width for the spectrum classification.
    pub hyperbolic_tol: f64,
    /// Threshold for flatness ratios and for `sup |f| ≈ 0`.
    pub flat_tol: f64,
    /// Highest flatness order probed.
    pub k_max: u32,
    /// Floor below which `|f|` counts as numerically zero.
    pub f_floor: f64,
    /// Right-hand side of the inequality.
    pub rhs: RhsMode,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            radius: 1.0,
            constant_c: None,
            seed: 42,
            hyperbolic_tol: crate::field::DEFAULT_HYPERBOLIC_TOL,
            flat_tol: 1e-12,
            k_max: 8,
            f_floor: crate::inequality::DEFAULT_F_FLOOR,
            rhs: RhsMode::FunctionValue,
        }
    }
}

impl CertifyConfig {
    fn sampler(&self) -> SamplerConfig {
        SamplerConfig { seed: self.seed, ..Default::default() }
    }
}

/// Full machine-readable result of a certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsCertificate {
    pub dimension: usize,
    pub field_components: Vec<String>,
    pub scalar_function: String,
    pub seed: u64,
    pub radius: f64,
    pub rhs: RhsMode,
    pub hypothesis_spectrum: SpectrumCheck,
    pub hypothesis_inner_product: InnerProductCheck,
    pub hypothesis_constant: ConstantCheck,
    pub hypothesis_flatness: FlatnessCheck,
    /// Supremum of `|f|` over every sampled point of the disc.
    pub f_sup_on_domain: Option<f64>,
    pub witness: Option<WitnessBound>,
    pub conclusion: Conclusion,
}

/// Runs the four hypothesis checks in order (spectrum, inner product,
/// constant, flatness) and draws a conclusion.
///
/// The conclusion is the first failed hypothesis if any; `Inconclusive`
/// when the flatness probe cannot resolve, when the right-hand side is
/// `|x|` (which supports no vanishing claim), or when every hypothesis
/// passes yet the sampled `sup |f|` is not numerically zero; and
/// `MustVanish` otherwise.
pub fn certify_gs(
    field: &VectorField,
    f: &ParsedFunction,
    config: &CertifyConfig,
) -> Result<GsCertificate> {
    if f.arity != field.dimension {
        return Err(Error::InvalidInput(format!(
            "function arity {} does not match field dimension {}",
            f.arity, field.dimension
        )));
    }
    if config.radius <= 0.0 || !config.radius.is_finite() {
        return Err(Error::InvalidInput("radius must be positive and finite".into()));
    }
    let sampler = config.sampler();
    let origin = vec![0.0; field.dimension];

    let hypothesis_spectrum = match classify_singularity(field, &origin, config.hyperbolic_tol) {
        Ok(report) => {
            let passed = report.classification == Classification::HyperbolicSource;
            let note = (!passed).then(|| {
                format!(
                    "origin classified as {:?}; need all eigenvalue real parts positive",
                    report.classification
                )
            });
            SpectrumCheck { passed, report: Some(report), note }
        }
        Err(Error::NotASingularity { residual_norm }) => SpectrumCheck {
            passed: false,
            report: None,
            note: Some(format!(
                "origin is not a singular point: |field(0)| = {residual_norm:.3e}"
            )),
        },
        Err(e) => return Err(e),
    };

    let inner_report = inner_product_positivity(field, config.radius, &sampler)?;
    let hypothesis_inner_product =
        InnerProductCheck { passed: inner_report.verdict, report: inner_report };

    let ratios = collect_ratio_samples(
        field,
        f,
        config.radius,
        &sampler,
        config.f_floor,
        config.rhs,
    )?;
    let global_sup = ratios.best.as_ref().map(|b| b.ratio.unwrap());
    let hypothesis_constant = build_constant_check(
        config.constant_c,
        global_sup,
        ratios.flagged,
        ratios.per_radius_sup.clone(),
    );

    let flat_report = flatness_probe(
        f,
        &default_probe_radii(config.radius),
        config.k_max,
        sampler.directions_per_dim * field.dimension,
        config.seed,
        config.flat_tol,
    )?;
    let hypothesis_flatness = FlatnessCheck {
        passed: flat_report.overall == FlatStatus::Flat,
        report: flat_report,
    };

    let conclusion = if !hypothesis_spectrum.passed {
        Conclusion::HypothesisFailed { hypothesis: HypothesisName::Spectrum }
    } else if !hypothesis_inner_product.passed {
        Conclusion::HypothesisFailed { hypothesis: HypothesisName::InnerProduct }
    } else if !hypothesis_constant.passed {
        Conclusion::HypothesisFailed { hypothesis: HypothesisName::Constant }
    } else if hypothesis_flatness.report.overall == FlatStatus::NotFlat {
        Conclusion::HypothesisFailed { hypothesis: HypothesisName::Flatness }
    } else if hypothesis_flatness.report.overall == FlatStatus::Inconclusive {
        Conclusion::Inconclusive {
            reason: format!(
                "flatness probe could not resolve all orders up to {} at tolerance {:.1e}",
                hypothesis_flatness.report.k_max, hypothesis_flatness.report.flat_tol
            ),
        }
    } else if config.rhs == RhsMode::PointNorm {
        Conclusion::Inconclusive {
            reason: "right-hand side |x| supports no vanishing conclusion".into(),
        }
    } else if ratios.f_sup <= config.flat_tol {
        Conclusion::MustVanish
    } else {
        Conclusion::Inconclusive {
            reason: format!(
                "all hypotheses pass numerically yet sup |f| = {:.3e} is not zero; \
                 a hypothesis must fail between samples",
                ratios.f_sup
            ),
        }
    };

    let witness = if hypothesis_spectrum.passed
        && hypothesis_constant.passed
        && !hypothesis_constant.vacuous
        && ratios.f_sup > config.flat_tol
    {
        hypothesis_constant.c_used.and_then(|c| {
            lower_bound_witness(field, f, config.radius, c, config.seed)
                .ok()
                .map(|(bound, _)| bound)
        })
    } else {
        None
    };

    Ok(GsCertificate {
        dimension: field.dimension,
        field_components: field.components.iter().map(|c| c.source_text.clone()).collect(),
        scalar_function: f.source_text.clone(),
        seed: config.seed,
        radius: config.radius,
        rhs: config.rhs,
        hypothesis_spectrum,
        hypothesis_inner_product,
        hypothesis_constant,
        hypothesis_flatness,
        f_sup_on_domain: Some(ratios.f_sup),
        witness,
        conclusion,
    })
}

/// Relative slack applied when comparing the sampled supremum against `c`,
/// absorbing rounding in the ratio computation.
const CONSTANT_REL_SLACK: f64 = 1e-9;

fn build_constant_check(
    user_c: Option<f64>,
    global_sup: Option<f64>,
    flagged: usize,
    per_radius_sup: Vec<RadiusSup>,
) -> ConstantCheck {
    let source = if user_c.is_some() {
        ConstantSource::UserSupplied
    } else {
        ConstantSource::LargestRadiusBand
    };
    match global_sup {
        Some(sup) => {
            let c_used = user_c.or_else(|| {
                // outermost shell with any finite ratio
                per_radius_sup.iter().find_map(|rs| rs.sup)
            });
            match c_used {
                Some(c) => {
                    let passed = flagged == 0 && sup <= c * (1.0 + CONSTANT_REL_SLACK);
                    let note = (!passed).then(|| {
                        if flagged > 0 {
                            format!(
                                "{flagged} samples have |f| below the floor but |X·f| above it"
                            )
                        } else {
                            format!("sampled ratio reaches {sup:.6e}, exceeding c = {c:.6e}")
                        }
                    });
                    ConstantCheck {
                        passed,
                        vacuous: false,
                        c_used: Some(c),
                        source,
                        global_sup: Some(sup),
                        flagged,
                        per_radius_sup,
                        note,
                    }
                }
                None => unreachable!("global sup exists, so some shell has a finite ratio"),
            }
        }
        None => {
            let vacuous = flagged == 0;
            let note = Some(if vacuous {
                "no sample produced a finite ratio; the inequality holds vacuously".to_string()
            } else {
                format!("{flagged} samples have |f| below the floor but |X·f| above it")
            });
            ConstantCheck {
                passed: vacuous,
                vacuous,
                c_used: user_c,
                source,
                global_sup: None,
                flagged,
                per_radius_sup,
                note,
            }
        }
    }
}

/// Sampled check of the one-dimensional vanishing criterion on `(0, radius]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// `f(0) = 0` numerically while every sample on `(0, radius]` is nonzero.
    pub right_isolated_zero: bool,
    /// `|x·f'(x)| <= c·|f(x)|` at every sample.
    pub inequality_holds: bool,
    /// How far `|f(x)| >= k·x^c` fails over the samples, with `k` anchored
    /// at the innermost nonzero sample; `None` when no anchor exists.
    pub lower_bound_violation: Option<f64>,
}

/// Checks the one-dimensional criterion: a function with a right-isolated
/// zero at 0 satisfying `|x·f'| <= c·|f|` obeys the power lower bound
/// `|f(x)| >= k·x^c`, so it cannot be flat — and a flat `f` satisfying the
/// inequality must vanish.
pub fn theorem1_check(
    f: &ParsedFunction,
    c: f64,
    radius: f64,
    n_samples: usize,
) -> Result<Theorem1Report> {
    if f.arity != 1 {
        return Err(Error::InvalidInput(format!(
            "one-dimensional check needs arity 1, got {}",
            f.arity
        )));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidInput("radius must be positive and finite".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let floor = WITNESS_F_FLOOR;
    let xs = sample::log_spaced(radius, radius * 1e-3, n_samples);
    let df = f.differentiate(1)?;
    let f0 = f.evaluate(&[0.0])?;
    let mut values = Vec::with_capacity(xs.len());
    let mut inequality_holds = true;
    for x in &xs {
        let fx = f.evaluate(&[*x])?;
        let xfp = x * df.evaluate(&[*x])?;
        if fx.abs() >= floor {
            if xfp.abs() > c * fx.abs() * (1.0 + CONSTANT_REL_SLACK) {
                inequality_holds = false;
            }
        } else if xfp.abs() >= floor {
            inequality_holds = false;
        }
        values.push(fx);
    }
    let right_isolated_zero = f0.abs() <= floor && values.iter().all(|v| v.abs() > 0.0);
    // anchor the power bound at the innermost sample where f is usable
    let anchor = xs
        .iter()
        .zip(values.iter())
        .rev()
        .find(|(_, v)| v.abs() >= floor);
    let lower_bound_violation = anchor.map(|(q, fq)| {
        let k = fq.abs() / q.powf(c);
        let mut worst = 0.0f64;
        for (x, v) in xs.iter().zip(values.iter()) {
            if x >= q {
                worst = worst.max(k * x.powf(c) - v.abs());
            }
        }
        worst
    });
    Ok(Theorem1Report {
        right_isolated_zero,
        inequality_holds,
        lower_bound_violation,
    })
}
