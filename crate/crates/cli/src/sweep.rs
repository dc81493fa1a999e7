use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use hopf_core::billiard::estimate_delta_billiard;
use hopf_core::conformal_metric::{curvature_field, eval_field};
use hopf_core::curves::{build_curve, Harmonic, DEFAULT_SAMPLES, DEFAULT_TOL_GB};
use hopf_core::geodesic_bounds::{bound_general, default_alpha_grid, optimize_alpha, DEFAULT_ALPHA_STEPS};
use hopf_core::geodesic_sim::estimate_delta_geodesic;
use hopf_core::{bounds_for_curve, CurveSpec, DeltaEstimate, PsiSpec, TrigPoly};

use crate::commands::Output;
use crate::error::{CliError, CliResult};
use crate::report::{load_json, sha256_hex, Inputs};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range { from: f64, to: f64, steps: usize },
}

impl Values {
    fn expand(&self) -> CliResult<Vec<f64>> {
        let v = match *self {
            Values::List(ref v) => v.clone(),
            Values::Range { from, to, steps: 1 } if from == to => vec![from],
            Values::Range { from, to, steps } if steps >= 2 => {
                (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
            }
            Values::Range { .. } => return Err(CliError::Input("a range needs at least 2 steps".into())),
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Input("sweep values must be finite and non-empty".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct BilliardDelta {
    pub window: usize,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TorusDelta {
    pub horizon: f64,
    pub samples: u64,
    pub seed: u64,
}

fn two() -> usize {
    2
}

fn grid() -> usize {
    256
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepConfig {
    /// Ellipses with semi-axes `(a, b)`, sweeping `a`.
    Ellipse {
        #[serde(default = "one")]
        b: f64,
        a: Values,
        curve_samples: Option<usize>,
        delta: Option<BilliardDelta>,
    },
    /// Support function `c0 + amplitude·cos(harmonic·θ)`, sweeping the amplitude.
    SupportFourier {
        c0: f64,
        harmonic: u32,
        amplitude: Values,
        curve_samples: Option<usize>,
        delta: Option<BilliardDelta>,
    },
    /// Factor `c0 + amplitude·cos(2πk·x_axis)`, sweeping the amplitude.
    TorusCosine {
        #[serde(default = "two")]
        n: usize,
        #[serde(default = "one")]
        c0: f64,
        #[serde(default)]
        axis: usize,
        k: i64,
        amplitude: Values,
        #[serde(default = "grid")]
        grid: usize,
        alpha_steps: Option<usize>,
        delta: Option<TorusDelta>,
    },
}

#[derive(Debug, Serialize)]
struct BilliardRow {
    parameter: f64,
    perimeter: f64,
    area: f64,
    k_min: f64,
    b1: Option<f64>,
    b2_strong: Option<f64>,
    b2_weak: Option<f64>,
    b3: Option<f64>,
    b4: Option<f64>,
    best: f64,
    delta_hat: Option<f64>,
    stderr: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TorusRow {
    parameter: f64,
    curv_sup: f64,
    vol_g: f64,
    delta_lb_alpha2: f64,
    alpha_star: f64,
    delta_lb_star: f64,
    delta_hat: Option<f64>,
    stderr: Option<f64>,
}

fn split(est: Option<DeltaEstimate>) -> (Option<f64>, Option<f64>) {
    est.map_or((None, None), |e| (Some(e.delta_hat), Some(e.stderr)))
}

fn billiard_rows(
    specs: impl Iterator<Item = (f64, CurveSpec)>,
    samples: usize,
    delta: Option<&BilliardDelta>,
    workers: usize,
) -> CliResult<Vec<BilliardRow>> {
    specs
        .map(|(parameter, spec)| {
            let c = build_curve(&spec, samples)?;
            let r = bounds_for_curve(&c)?;
            let est = delta.map(|d| estimate_delta_billiard(&c, d.window, d.samples, d.seed, workers)).transpose()?;
            let (delta_hat, stderr) = split(est);
            Ok(BilliardRow {
                parameter,
                perimeter: r.perimeter,
                area: r.area,
                k_min: r.k_min,
                b1: r.b1,
                b2_strong: r.b2_strong,
                b2_weak: r.b2_weak,
                b3: r.b3,
                b4: r.b4,
                best: r.best,
                delta_hat,
                stderr,
            })
        })
        .collect()
}

fn write_csv<T: Serialize>(rows: &[T], out: &Path) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Input(format!("writing CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(format!("writing CSV: {e}")))?;
    std::fs::write(out, &bytes).map_err(|source| CliError::Io { path: out.display().to_string(), source })?;
    Ok(bytes)
}

pub fn run_sweep(config: &Path, out: &Path, workers: usize) -> CliResult<Output> {
    let (cfg, file) = load_json::<SweepConfig>(config)?;
    let (bytes, rows, seed) = match &cfg {
        SweepConfig::Ellipse { b, a, curve_samples, delta } => {
            let specs = a.expand()?.into_iter().map(|a| (a, CurveSpec::ellipse(a, *b)));
            let rows = billiard_rows(specs, curve_samples.unwrap_or(DEFAULT_SAMPLES), delta.as_ref(), workers)?;
            (write_csv(&rows, out)?, rows.len(), delta.as_ref().map(|d| d.seed))
        }
        SweepConfig::SupportFourier { c0, harmonic, amplitude, curve_samples, delta } => {
            let specs = amplitude.expand()?.into_iter().map(|amp| {
                (amp, CurveSpec::support_fourier(*c0, vec![Harmonic { m: *harmonic, a: amp, b: 0.0 }]))
            });
            let rows = billiard_rows(specs, curve_samples.unwrap_or(DEFAULT_SAMPLES), delta.as_ref(), workers)?;
            (write_csv(&rows, out)?, rows.len(), delta.as_ref().map(|d| d.seed))
        }
        SweepConfig::TorusCosine { n, c0, axis, k, amplitude, grid, alpha_steps, delta } => {
            let alphas = default_alpha_grid(*n, alpha_steps.unwrap_or(DEFAULT_ALPHA_STEPS));
            let rows = amplitude
                .expand()?
                .into_iter()
                .map(|amp| {
                    let poly = TrigPoly::cosine(*n, *c0, *axis, *k, amp);
                    poly.validate()?;
                    let field = eval_field(&poly, *grid)?;
                    let curv = curvature_field(&field)?;
                    let at2 = bound_general(&field, &curv, &PsiSpec::Power { alpha: 2.0 })?;
                    let scan = optimize_alpha(&field, &curv, &alphas)?;
                    let est = match delta {
                        Some(d) if *n == 2 => {
                            Some(estimate_delta_geodesic(&poly, d.horizon, d.samples, d.seed, workers)?)
                        }
                        Some(_) => return Err(CliError::Input("geodesic simulation needs n = 2".into())),
                        None => None,
                    };
                    let (delta_hat, stderr) = split(est);
                    Ok(TorusRow {
                        parameter: amp,
                        curv_sup: at2.curv_sup,
                        vol_g: at2.vol_g,
                        delta_lb_alpha2: at2.delta_lb,
                        alpha_star: scan.alpha_star,
                        delta_lb_star: scan.delta_lb_star,
                        delta_hat,
                        stderr,
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            (write_csv(&rows, out)?, rows.len(), delta.as_ref().map(|d| d.seed))
        }
    };
    let outputs = json!({
        "csv": { "path": out.display().to_string(), "sha256": sha256_hex(&bytes), "rows": rows },
    });
    let resolution = match &cfg {
        SweepConfig::Ellipse { curve_samples, .. } | SweepConfig::SupportFourier { curve_samples, .. } => {
            json!({ "curve_samples": curve_samples.unwrap_or(DEFAULT_SAMPLES) })
        }
        SweepConfig::TorusCosine { grid, .. } => json!({ "grid": grid }),
    };
    let inputs = Inputs { files: vec![file], resolution, seed, ..Default::default() };
    let tolerances = json!({ "gauss_bonnet": DEFAULT_TOL_GB });
    Ok(Output { inputs, tolerances, outputs, workers, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_expand() {
        assert_eq!(Values::Range { from: 1.0, to: 2.0, steps: 3 }.expand().unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(Values::List(vec![0.1]).expand().unwrap(), vec![0.1]);
        assert!(Values::Range { from: 1.0, to: 2.0, steps: 1 }.expand().is_err());
        assert!(Values::List(vec![]).expand().is_err());
    }

    #[test]
    fn configs_parse() {
        let e: SweepConfig = serde_json::from_str(r#"{"family":"ellipse","a":{"from":1,"to":2,"steps":5}}"#).unwrap();
        assert!(matches!(e, SweepConfig::Ellipse { b, .. } if b == 1.0));
        let t: SweepConfig =
            serde_json::from_str(r#"{"family":"torus_cosine","k":1,"amplitude":[0.1,0.3]}"#).unwrap();
        assert!(matches!(t, SweepConfig::TorusCosine { n: 2, grid: 256, .. }));
    }
}
