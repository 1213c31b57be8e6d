//! Subcommand implementations. Each handler builds a JSON report and
//! returns it together with the exit code to use on success; plot-ready
//! CSV files go into the `--emit-plot-data` directory as a side effect.

use crate::problem::{parse_point, Failure};
use crate::{
    AnalyzeArgs, CatalogArgs, CertifyArgs, CommonOpts, DirectionArg, FlatnessArgs, FlowArgs,
    GronwallArgs, MethodArg,
};
use gscert_core::catalog::{self, ProblemSpec};
use gscert_core::certifier::{self, Conclusion};
use gscert_core::field::{self, PositivityReport, SpectrumReport};
use gscert_core::flow::{
    self, IntegratorConfig, MaximalIntervalEstimate, Method, Orbit, OrbitDirection, SinkRateFit,
};
use gscert_core::inequality::{self, GronwallReport};
use gscert_core::report;
use gscert_core::sample::SamplerConfig;
use serde::Serialize;
use std::path::Path;

/// What a successful handler hands back to `main`.
pub struct CommandOutput {
    pub json: String,
    pub exit: u8,
}

fn emit<T: Serialize>(common: &CommonOpts, value: &T, exit: u8) -> CommandOutput {
    CommandOutput { json: report::to_json_indented(value, common.json_indent), exit }
}

fn write_plot(dir: &Path, file: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(file);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

fn no_plot_data(common: &CommonOpts, command: &str) -> Result<(), Failure> {
    if common.emit_plot_data.is_some() {
        return Err(Failure::usage(format!("`{command}` has no plot data to emit")));
    }
    Ok(())
}

fn resolved_seed(common: &CommonOpts, spec: &ProblemSpec) -> u64 {
    common.seed.unwrap_or(spec.seed)
}

fn sampler(common: &CommonOpts, spec: &ProblemSpec) -> SamplerConfig {
    SamplerConfig { seed: resolved_seed(common, spec), ..Default::default() }
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    command: &'a str,
    seed: u64,
    problem: &'a ProblemSpec,
    spectrum: SpectrumReport,
    inner_product: PositivityReport,
}

/// Classifies the origin of the field and checks `<X(x), x> > 0` on the
/// punctured disc.
pub fn analyze(common: &CommonOpts, args: &AnalyzeArgs) -> Result<CommandOutput, Failure> {
    no_plot_data(common, "analyze")?;
    let spec = args.problem.resolve()?;
    let field = spec.field()?;
    let origin = vec![0.0; spec.dimension];
    let spectrum = field::classify_singularity(&field, &origin, common.tol_hyperbolic)?;
    let inner_product =
        field::inner_product_positivity(&field, spec.radius, &sampler(common, &spec))?;
    let out = AnalyzeReport {
        command: "analyze",
        seed: resolved_seed(common, &spec),
        problem: &spec,
        spectrum,
        inner_product,
    };
    Ok(emit(common, &out, 0))
}

#[derive(Serialize)]
struct FlowReport<'a> {
    command: &'a str,
    seed: u64,
    problem: &'a ProblemSpec,
    x0: &'a [f64],
    direction: &'a str,
    integrator: &'a IntegratorConfig,
    termination: &'a str,
    samples: usize,
    t_final: f64,
    final_state: Vec<f64>,
    limit_point: Option<Vec<f64>>,
    sink_fit: Option<SinkRateFit>,
    maximal_interval: MaximalIntervalEstimate,
}

fn flow_config(spec: &ProblemSpec, args: &FlowArgs) -> IntegratorConfig {
    let mut config = spec.integrator_config();
    if spec.integrator.is_none() {
        // The library default escape disc (radius 1) is meant for in-disc
        // certification; orbits launched from the rim need headroom.
        config.escape_radius = 10.0 * spec.radius;
    }
    match args.method {
        Some(MethodArg::Rk4) => config.method = Method::FixedRk4 { step: args.step },
        Some(MethodArg::Rk45) => config.method = Method::default(),
        None => {}
    }
    if let Some(t) = args.t_max {
        config.t_max = t;
    }
    if let Some(r) = args.escape_radius {
        config.escape_radius = r;
    }
    config
}

/// Integrates one orbit and reports how it ends, with a contraction-rate
/// fit when it converges and a maximal-interval estimate either way.
pub fn flow(common: &CommonOpts, args: &FlowArgs) -> Result<CommandOutput, Failure> {
    let spec = args.problem.resolve()?;
    let field = spec.field()?;
    let x0 = parse_point(&args.x0, spec.dimension)?;
    let config = flow_config(&spec, args);
    let direction = match args.direction {
        DirectionArg::Forward => OrbitDirection::Forward,
        DirectionArg::Backward => OrbitDirection::Backward,
    };
    let orbit = flow::integrate(&field, &x0, &config, direction)?;
    let sink_fit = sink_fit_for(&orbit);
    let maximal_interval = flow::maximal_interval_estimate(&field, &x0, &config)?;
    if let Some(dir) = &common.emit_plot_data {
        write_plot(dir, "orbit.csv", &report::orbit_to_csv(&orbit))?;
    }
    let out = FlowReport {
        command: "flow",
        seed: resolved_seed(common, &spec),
        problem: &spec,
        x0: &x0,
        direction: match args.direction {
            DirectionArg::Forward => "forward",
            DirectionArg::Backward => "backward",
        },
        integrator: &config,
        termination: orbit.termination.reason(),
        samples: orbit.times.len(),
        t_final: orbit.final_time(),
        final_state: orbit.final_state().to_vec(),
        limit_point: orbit.limit_point.clone(),
        sink_fit,
        maximal_interval,
    };
    Ok(emit(common, &out, 0))
}

fn sink_fit_for(orbit: &Orbit) -> Option<SinkRateFit> {
    let limit = orbit.limit_point.as_ref()?;
    flow::fit_sink_rate(orbit, limit).ok()
}

/// Runs the full four-hypothesis certificate. Exit code 4 marks an
/// inconclusive run; a definite conclusion (either way) exits 0.
pub fn certify(common: &CommonOpts, args: &CertifyArgs) -> Result<CommandOutput, Failure> {
    let spec = args.problem.resolve()?;
    let field = spec.field()?;
    let f = spec.function()?;
    let mut config = spec.certify_config();
    config.seed = resolved_seed(common, &spec);
    config.hyperbolic_tol = common.tol_hyperbolic;
    config.flat_tol = common.flat_tol;
    config.k_max = args.kmax;
    config.rhs = args.rhs.into();
    let cert = certifier::certify_gs(&field, &f, &config)?;
    if let Some(dir) = &common.emit_plot_data {
        let flat = &cert.hypothesis_flatness.report;
        write_plot(dir, "flatness.csv", &report::flatness_to_csv(&flat.radii, &flat.ratio_table))?;
        let rows: Vec<(f64, Option<f64>)> = cert
            .hypothesis_constant
            .per_radius_sup
            .iter()
            .map(|r| (r.radius, r.sup))
            .collect();
        write_plot(dir, "ratio_sup.csv", &report::radius_sup_to_csv(&rows))?;
        if cert.witness.is_some() {
            // The certificate keeps only the witness summary; recompute the
            // series (deterministic for a fixed seed) for plotting.
            if let Some(c) = cert.hypothesis_constant.c_used {
                let (_, series) =
                    certifier::lower_bound_witness(&field, &f, config.radius, c, config.seed)?;
                write_plot(dir, "witness.csv", &report::series_to_csv("t,lhs,rhs", &series))?;
            }
        }
    }
    let exit = match cert.conclusion {
        Conclusion::Inconclusive { .. } => 4,
        _ => 0,
    };
    Ok(emit(common, &cert, exit))
}

#[derive(Serialize)]
struct FlatnessCliReport<'a> {
    command: &'a str,
    seed: u64,
    problem: &'a ProblemSpec,
    report: certifier::FlatnessReport,
}

/// Probes `sup |f| / r^k` on shrinking shells for every order up to
/// `--kmax`. Always exits 0 when the probe itself succeeds; the verdict
/// lives in the JSON.
pub fn flatness(common: &CommonOpts, args: &FlatnessArgs) -> Result<CommandOutput, Failure> {
    let spec = args.problem.resolve()?;
    let f = spec.function()?;
    let radii = match &args.radii {
        Some(text) => {
            let parsed: Result<Vec<f64>, _> =
                text.split(',').map(|s| s.trim().parse::<f64>()).collect();
            parsed.map_err(|e| Failure::usage(format!("bad radius in `{text}`: {e}")))?
        }
        None => certifier::default_probe_radii(spec.radius),
    };
    let seed = resolved_seed(common, &spec);
    let probe = certifier::flatness_probe(
        &f,
        &radii,
        args.kmax,
        64 * spec.dimension,
        seed,
        common.flat_tol,
    )?;
    if let Some(dir) = &common.emit_plot_data {
        write_plot(dir, "flatness.csv", &report::flatness_to_csv(&probe.radii, &probe.ratio_table))?;
    }
    let out = FlatnessCliReport { command: "flatness", seed, problem: &spec, report: probe };
    Ok(emit(common, &out, 0))
}

#[derive(Serialize)]
struct GronwallCliReport<'a> {
    command: &'a str,
    seed: u64,
    problem: &'a ProblemSpec,
    x0: &'a [f64],
    c_source: &'a str,
    termination: &'a str,
    report: GronwallReport,
}

/// Integrates forward from `--x0` and checks `|f(x(t))| <= |f(x0)|·e^(ct)`
/// along the orbit. The verdict is reported, not turned into an exit code.
pub fn gronwall(common: &CommonOpts, args: &GronwallArgs) -> Result<CommandOutput, Failure> {
    let spec = args.problem.resolve()?;
    let field = spec.field()?;
    let f = spec.function()?;
    let x0 = parse_point(&args.x0, spec.dimension)?;
    let (c, c_source) = match (args.c, spec.constant_c) {
        (Some(c), _) => (c, "user"),
        (None, Some(c)) => (c, "spec"),
        (None, None) => {
            let estimate = inequality::estimate_inequality_constant(
                &field,
                &f,
                spec.radius,
                &sampler(common, &spec),
                inequality::DEFAULT_F_FLOOR,
            )?;
            (estimate.c_hat, "estimated")
        }
    };
    let mut config = spec.integrator_config();
    config.t_max = args.t_max;
    config.escape_radius = args.escape_radius.unwrap_or(10.0 * spec.radius);
    let orbit = flow::integrate(&field, &x0, &config, OrbitDirection::Forward)?;
    let bound = inequality::verify_gronwall_along_orbit(&orbit, &f, c, args.slack)?;
    if let Some(dir) = &common.emit_plot_data {
        write_plot(dir, "gronwall.csv", &report::series_to_csv("t,observed,bound", &bound.rows()))?;
    }
    let out = GronwallCliReport {
        command: "gronwall",
        seed: resolved_seed(common, &spec),
        problem: &spec,
        x0: &x0,
        c_source,
        termination: orbit.termination.reason(),
        report: bound,
    };
    Ok(emit(common, &out, 0))
}

#[derive(Serialize)]
struct CatalogSummary {
    name: String,
    dimension: usize,
    field_components: Vec<String>,
    scalar_function: String,
    expected: catalog::ExpectedConclusion,
    note: String,
}

/// Lists the built-in problems, or prints one entry in full.
pub fn catalog_cmd(common: &CommonOpts, args: &CatalogArgs) -> Result<CommandOutput, Failure> {
    no_plot_data(common, "catalog")?;
    match &args.name {
        Some(name) => {
            let entry = catalog::lookup(name).ok_or_else(|| {
                Failure::usage(format!(
                    "unknown catalog entry `{name}`; run `gscert catalog` to list"
                ))
            })?;
            Ok(emit(common, &entry, 0))
        }
        None => {
            let list: Vec<CatalogSummary> = catalog::entries()
                .into_iter()
                .map(|e| CatalogSummary {
                    name: e.name,
                    dimension: e.spec.dimension,
                    field_components: e.spec.field_components.clone(),
                    scalar_function: e.spec.scalar_function.clone(),
                    expected: e.expected,
                    note: e.note,
                })
                .collect();
            Ok(emit(common, &list, 0))
        }
    }
}
