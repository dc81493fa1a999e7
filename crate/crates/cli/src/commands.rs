use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};

use hopf_core::billiard::{estimate_delta_billiard, DEFAULT_SAMPLES, DEFAULT_WINDOW};
use hopf_core::billiard_bounds::TOL_ISO;
use hopf_core::conformal_metric::{curvature_field, eval_field, field_norms, POS_MARGIN};
use hopf_core::curves::{build_curve_with, curve_invariants, CurveOptions, DEFAULT_TOL_GB};
use hopf_core::geodesic_bounds::{bound_general, optimize_alpha};
use hopf_core::geodesic_sim::{estimate_delta_geodesic_windows_with, DEFAULT_TOL};
use hopf_core::identities::{billiard_identities, IdentityOptions};
use hopf_core::sampling::PhaseGrid;
use hopf_core::{bounds_for_curve, CurveSpec, PsiSpec, SampledCurve, TrigPoly};

use crate::error::{CliError, CliResult};
use crate::report::{load_json, to_value, InputFile, Inputs};

/// Everything a subcommand contributes to its report.
pub struct Output {
    pub inputs: Inputs,
    pub tolerances: Value,
    pub outputs: Value,
    pub workers: usize,
    /// Set when an identity check failed; the report is still written.
    pub failure: Option<String>,
}

impl Output {
    fn new(inputs: Inputs, tolerances: Value, outputs: Value) -> Self {
        Self { inputs, tolerances, outputs, workers: 1, failure: None }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Curve specification (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Boundary sample count.
    #[arg(long, default_value_t = hopf_core::curves::DEFAULT_SAMPLES)]
    pub curve_samples: usize,
    /// Gauss-Bonnet residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL_GB)]
    pub tol_gb: f64,
}

impl CurveArgs {
    fn load(&self) -> CliResult<(SampledCurve, InputFile)> {
        load_curve(&self.spec, self.curve_samples, self.tol_gb)
    }

    fn tolerances(&self) -> Value {
        json!({ "gauss_bonnet": self.tol_gb, "isoperimetric": TOL_ISO })
    }
}

pub fn load_curve(path: &std::path::Path, samples: usize, tol_gb: f64) -> CliResult<(SampledCurve, InputFile)> {
    let (spec, file) = load_json::<CurveSpec>(path)?;
    let curve = build_curve_with(&spec, &CurveOptions { n_samples: samples, tol_gb })?;
    Ok((curve, file))
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Conformal factor as a trigonometric polynomial (JSON).
    #[arg(long)]
    pub metric: PathBuf,
    /// Grid points per axis (power of two, at least 32).
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct CurveInfoArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Boundary sample count.
    #[arg(long, default_value_t = hopf_core::curves::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_TOL_GB)]
    pub tol_gb: f64,
}

pub fn curve_info(a: &CurveInfoArgs) -> CliResult<Output> {
    let (c, file) = load_curve(&a.spec, a.samples, a.tol_gb)?;
    let inv = curve_invariants(&c);
    let outputs = json!({
        "surface": c.kind,
        "invariants": inv,
        "in_hemisphere": c.in_hemisphere,
        "area_residual": (inv.area - inv.area_independent).abs(),
    });
    let inputs = Inputs { files: vec![file], resolution: json!({ "curve_samples": a.samples }), ..Default::default() };
    Ok(Output::new(inputs, json!({ "gauss_bonnet": a.tol_gb }), outputs))
}

pub fn billiard_bound(a: &CurveArgs) -> CliResult<Output> {
    let (c, file) = a.load()?;
    let report = bounds_for_curve(&c)?;
    let inputs = Inputs { files: vec![file], resolution: json!({ "curve_samples": a.curve_samples }), ..Default::default() };
    Ok(Output::new(inputs, a.tolerances(), to_value(&report)))
}

#[derive(Debug, Args)]
pub struct BilliardDeltaArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Bounces on each side of the sampled point.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; never changes the result.
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
}

pub fn billiard_delta(a: &BilliardDeltaArgs) -> CliResult<Output> {
    let (c, file) = a.curve.load()?;
    let bounds = bounds_for_curve(&c)?;
    let est = estimate_delta_billiard(&c, a.window, a.samples, a.seed, a.workers)?;
    let outputs = json!({
        "estimate": est,
        "bounds": bounds,
        "best_bound": bounds.best,
        "consistent": est.delta_hat >= bounds.best - 2.0 * est.stderr,
    });
    let inputs = Inputs {
        files: vec![file],
        resolution: json!({ "curve_samples": a.curve.curve_samples }),
        seed: Some(a.seed),
        parameters: json!({ "window": a.window, "samples": a.samples }),
    };
    let mut out = Output::new(inputs, a.curve.tolerances(), outputs);
    out.workers = a.workers;
    Ok(out)
}

#[derive(Debug, Args)]
pub struct BilliardVerifyArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Chords drawn for the Santaló check.
    #[arg(long, default_value_t = 100_000)]
    pub chord_samples: u64,
    /// Random chords and phase points for the derivative and Jacobian checks.
    #[arg(long, default_value_t = 100)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Quadrature nodes along the boundary.
    #[arg(long, default_value_t = 2048)]
    pub quad_s: usize,
    /// Gauss-Legendre nodes in angle.
    #[arg(long, default_value_t = 48)]
    pub quad_phi: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_measure: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_moment: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_derivative: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol_sum_rule: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_jacobian: f64,
    /// Santaló acceptance band in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub sigmas: f64,
}

pub fn billiard_verify(a: &BilliardVerifyArgs) -> CliResult<Output> {
    let (c, file) = a.curve.load()?;
    let opts = IdentityOptions {
        grid: PhaseGrid { n_s: a.quad_s, n_phi: a.quad_phi },
        chord_samples: a.chord_samples,
        probes: a.probes,
        seed: a.seed,
        tol_measure: a.tol_measure,
        tol_moment: a.tol_moment,
        tol_derivative: a.tol_derivative,
        tol_sum_rule: a.tol_sum_rule,
        tol_jacobian: a.tol_jacobian,
        sigmas: a.sigmas,
    };
    let rows = billiard_identities(&c, &opts)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} residual {:e} exceeds {:e}", r.name, r.residual, r.tolerance))
        .collect();
    let outputs = json!({ "identities": rows, "passed": failed.is_empty() });
    let inputs = Inputs {
        files: vec![file],
        resolution: json!({
            "curve_samples": a.curve.curve_samples,
            "quadrature": opts.grid,
            "chord_samples": a.chord_samples,
            "probes": a.probes,
        }),
        seed: Some(a.seed),
        ..Default::default()
    };
    let mut tolerances = a.curve.tolerances();
    tolerances["identities"] = json!({
        "measure": a.tol_measure,
        "moment": a.tol_moment,
        "derivative": a.tol_derivative,
        "sum_rule": a.tol_sum_rule,
        "jacobian": a.tol_jacobian,
        "santalo_sigmas": a.sigmas,
    });
    let mut out = Output::new(inputs, tolerances, outputs);
    out.failure = (!failed.is_empty()).then(|| failed.join("; "));
    Ok(out)
}

fn load_metric(a: &MetricArgs) -> CliResult<(TrigPoly, InputFile)> {
    let (poly, file) = load_json::<TrigPoly>(&a.metric)?;
    poly.validate()?;
    Ok((poly, file))
}

fn metric_inputs(a: &MetricArgs, file: InputFile) -> Inputs {
    Inputs { files: vec![file], resolution: json!({ "grid": a.grid }), ..Default::default() }
}

fn metric_tolerances() -> Value {
    json!({ "positivity_margin": POS_MARGIN, "trace_consistency": 1e-6 })
}

fn range(values: &[f64]) -> Value {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!([lo, hi])
}

pub fn torus_curvature(a: &MetricArgs) -> CliResult<Output> {
    let (poly, file) = load_metric(a)?;
    let field = eval_field(&poly, a.grid)?;
    let curv = curvature_field(&field)?;
    let norms = field_norms(&field, &curv, &PsiSpec::Power { alpha: 1.0 })?;
    let mut outputs = json!({
        "n": curv.n,
        "curv_sup_grid": curv.curv_sup_grid,
        "curv_sup": norms.curv_sup,
        "vol_g": norms.vol_g,
        "trace_residual": curv.trace_residual,
        "f_range": range(&field.f_grid),
    });
    if let Some(k) = &curv.k_grid {
        outputs["gauss_curvature_range"] = range(k);
        let total = field.integrate(k.iter().zip(&field.f_grid).map(|(k, f)| k * f));
        outputs["total_curvature"] = json!(total);
    }
    if let Some(s) = &curv.scal_grid {
        outputs["scalar_curvature_range"] = range(s);
    }
    Ok(Output::new(metric_inputs(a, file), metric_tolerances(), outputs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl AlphaRange {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

pub fn parse_alpha_range(s: &str) -> Result<AlphaRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(format!("expected LO:HI:STEPS, got {s:?}"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = (num(lo)?, num(hi)?);
    let steps = steps.trim().parse::<usize>().map_err(|e| format!("{steps:?}: {e}"))?;
    if steps == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(format!("need finite LO ≤ HI and STEPS ≥ 1, got {s:?}"));
    }
    Ok(AlphaRange { lo, hi, steps })
}

#[derive(Debug, Args)]
#[group(id = "weight", required = true, multiple = false, args = ["alpha", "alpha_scan"])]
pub struct TorusBoundArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Exponent of the weight ψ = f^α.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Scan α over LO:HI:STEPS and report the best admissible value.
    #[arg(long, value_parser = parse_alpha_range)]
    pub alpha_scan: Option<AlphaRange>,
}

pub fn torus_bound(a: &TorusBoundArgs) -> CliResult<Output> {
    let (poly, file) = load_metric(&a.metric)?;
    let field = eval_field(&poly, a.metric.grid)?;
    let curv = curvature_field(&field)?;
    let (outputs, parameters) = match (a.alpha, a.alpha_scan) {
        (Some(alpha), None) => {
            let report = bound_general(&field, &curv, &PsiSpec::Power { alpha })?;
            (to_value(&report), json!({ "alpha": alpha }))
        }
        (None, Some(r)) => {
            let scan = optimize_alpha(&field, &curv, &r.values())?;
            (to_value(&scan), json!({ "alpha_scan": { "lo": r.lo, "hi": r.hi, "steps": r.steps } }))
        }
        _ => return Err(CliError::Input("give exactly one of --alpha and --alpha-scan".into())),
    };
    let mut inputs = metric_inputs(&a.metric, file);
    inputs.parameters = parameters;
    Ok(Output::new(inputs, metric_tolerances(), outputs))
}

#[derive(Debug, Args)]
pub struct TorusDeltaArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Half-length of the arclength window around each sampled point.
    #[arg(long)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    /// Exponent of the weight used for the bound comparison.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Local error tolerance of the geodesic integrator.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

pub fn torus_delta(a: &TorusDeltaArgs) -> CliResult<Output> {
    let (poly, file) = load_metric(&a.metric)?;
    if poly.n != 2 {
        return Err(CliError::Input(format!("geodesic simulation needs a 2-torus, got n = {}", poly.n)));
    }
    let field = eval_field(&poly, a.metric.grid)?;
    let curv = curvature_field(&field)?;
    let bound = bound_general(&field, &curv, &PsiSpec::Power { alpha: a.alpha })?;
    let est = estimate_delta_geodesic_windows_with(&poly, &[a.horizon], a.samples, a.seed, a.workers, a.tol)?.remove(0);
    let outputs = json!({
        "estimate": est,
        "bound": bound,
        "consistent": est.delta_hat >= bound.delta_lb - 2.0 * est.stderr,
    });
    let mut inputs = metric_inputs(&a.metric, file);
    inputs.seed = Some(a.seed);
    inputs.parameters = json!({ "horizon": a.horizon, "samples": a.samples, "alpha": a.alpha });
    let mut tolerances = metric_tolerances();
    tolerances["integrator"] = json!(a.tol);
    let mut out = Output::new(inputs, tolerances, outputs);
    out.workers = a.workers;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_ranges() {
        let r = parse_alpha_range("0.5:2:4").unwrap();
        assert_eq!(r.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_alpha_range("1:1:1").unwrap().values(), vec![1.0]);
        for bad in ["1:2", "2:1:3", "0:1:0", "a:1:2", "0:1:2:3"] {
            assert!(parse_alpha_range(bad).is_err(), "{bad}");
        }
    }
}
