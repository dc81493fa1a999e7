//! Residual table of exact identities satisfied by a billiard table: phase-space
//! moments, Santaló's chord formula, generating-function derivatives and area
//! preservation of the billiard map.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::billiard::{billiard_step, chord_length, generating_derivatives, PhasePoint};
use crate::curves::SampledCurve;
use crate::error::Result;
use crate::sampling::{draw_billiard_point, phase_integral_billiard, PhaseGrid, SeededStream};
use crate::SurfaceKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityOptions {
    pub grid: PhaseGrid,
    pub chord_samples: u64,
    pub probes: usize,
    pub seed: u64,
    pub tol_measure: f64,
    pub tol_moment: f64,
    pub tol_derivative: f64,
    pub tol_sum_rule: f64,
    pub tol_jacobian: f64,
    /// Santaló passes when the estimate is within this many standard errors.
    pub sigmas: f64,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            grid: PhaseGrid { n_s: 2048, n_phi: 48 },
            chord_samples: 100_000,
            probes: 100,
            seed: 0,
            tol_measure: 1e-10,
            tol_moment: 1e-8,
            tol_derivative: 1e-6,
            tol_sum_rule: 1e-12,
            tol_jacobian: 1e-6,
            sigmas: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub name: String,
    pub value: f64,
    pub target: f64,
    /// Absolute residual, or the worst one over probes.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityRow {
    fn new(name: &str, value: f64, target: f64, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, residual, tolerance, passed: residual <= tolerance }
    }
}

pub fn billiard_identities(c: &SampledCurve, opts: &IdentityOptions) -> Result<Vec<IdentityRow>> {
    let p = c.perimeter;
    let mut rows = Vec::new();

    let mu = phase_integral_billiard(c, |_, _| Ok(1.0), opts.grid)?;
    rows.push(IdentityRow::new("measure", mu, 2.0 * p, (mu - 2.0 * p).abs(), opts.tol_measure));
    let sin = phase_integral_billiard(c, |_, phi| Ok(phi.sin()), opts.grid)?;
    let target = PI * p / 2.0;
    rows.push(IdentityRow::new("sin_moment", sin, target, (sin - target).abs(), opts.tol_moment));
    let ks = phase_integral_billiard(c, |s, phi| Ok(c.curvature_at(s) * phi.sin()), opts.grid)?;
    let target = PI / 2.0 * (TAU - c.kind.kappa() as f64 * c.area);
    rows.push(IdentityRow::new("curvature_moment", ks, target, (ks - target).abs(), opts.tol_moment));

    let (est, se) = santalo(c, opts.chord_samples, opts.seed)?;
    let target = TAU * c.area;
    rows.push(IdentityRow::new("santalo", est, target, (est - target).abs(), opts.sigmas * se));

    let mut stream = SeededStream::new(opts.seed, u64::MAX);
    let (mut worst_fd, mut worst_sum) = (0.0f64, 0.0f64);
    for _ in 0..opts.probes {
        let x = stream.uniform() * p;
        let y = x + (0.05 + 0.9 * stream.uniform()) * p;
        let g = generating_derivatives(c, x, y)?;
        let fd = derivatives_by_differences(c, x, y);
        for (a, b) in [g.l1, g.l2, g.l11, g.l12, g.l22].iter().zip(fd) {
            worst_fd = worst_fd.max((a - b).abs() / a.abs().max(1.0));
        }
        if c.kind == SurfaceKind::Flat {
            let (sx, sy) = ((1.0 - g.l1 * g.l1).sqrt(), (1.0 - g.l2 * g.l2).sqrt());
            let rhs = (sx + sy).powi(2) / g.l - c.curvature_at(x) * sx - c.curvature_at(y) * sy;
            worst_sum = worst_sum.max((g.l11 + 2.0 * g.l12 + g.l22 - rhs).abs());
        }
    }
    rows.push(IdentityRow::new("generating_derivatives", worst_fd, 0.0, worst_fd, opts.tol_derivative));
    if c.kind == SurfaceKind::Flat {
        rows.push(IdentityRow::new("second_derivative_sum", worst_sum, 0.0, worst_sum, opts.tol_sum_rule));
    }

    let mut worst_jac = 0.0f64;
    for _ in 0..opts.probes {
        let s = stream.uniform() * p;
        let phi = 0.05 + (PI - 0.1) * stream.uniform();
        worst_jac = worst_jac.max((jacobian(c, s, phi.cos())? - 1.0).abs());
    }
    rows.push(IdentityRow::new("jacobian", 1.0 + worst_jac, 1.0, worst_jac, opts.tol_jacobian));
    Ok(rows)
}

/// Monte Carlo estimate of `∫ L dμ` and its standard error.
pub fn santalo(c: &SampledCurve, samples: u64, seed: u64) -> Result<(f64, f64)> {
    let mut stream = SeededStream::new(seed, 0);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        let u = draw_billiard_point(c, &mut stream);
        let l = billiard_step(c, u)?.1.length;
        sum += l;
        sum2 += l * l;
    }
    let n = samples.max(1) as f64;
    let mean = sum / n;
    let sd = (sum2 / n - mean * mean).max(0.0).sqrt();
    let mass = 2.0 * c.perimeter;
    Ok((mean * mass, sd * mass / n.sqrt()))
}

/// `[L₁, L₂, L₁₁, L₁₂, L₂₂]` from Richardson-extrapolated central differences of the chord length.
pub fn derivatives_by_differences(c: &SampledCurve, x: f64, y: f64) -> [f64; 5] {
    let l = |a: f64, b: f64| chord_length(c, a, b);
    let first = |g: &dyn Fn(f64) -> f64, h: f64| {
        let d = |h: f64| (g(h) - g(-h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    };
    let second = |g: &dyn Fn(f64) -> f64, h: f64| {
        let d = |h: f64| (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    };
    let h1 = 1e-4 * c.perimeter;
    let h2 = 2e-3 * c.perimeter;
    let mixed = |h: f64| (l(x + h, y + h) - l(x + h, y - h) - l(x - h, y + h) + l(x - h, y - h)) / (4.0 * h * h);
    [
        first(&|e| l(x + e, y), h1),
        first(&|e| l(x, y + e), h1),
        second(&|e| l(x + e, y), h2),
        (4.0 * mixed(h2 / 2.0) - mixed(h2)) / 3.0,
        second(&|e| l(x, y + e), h2),
    ]
}

/// Determinant of the billiard map's derivative in `(s, cos φ)` coordinates.
pub fn jacobian(c: &SampledCurve, s: f64, cos_phi: f64) -> Result<f64> {
    let p = c.perimeter;
    let h = 1e-5;
    let map = |s: f64, c0: f64| -> Result<(f64, f64)> {
        let (v, _) = billiard_step(c, PhasePoint::new(s, c0.acos()))?;
        Ok((v.s, v.phi.cos()))
    };
    let unwrap = |d: f64| d - p * (d / p).round();
    let (sp, cp) = map(s + h, cos_phi)?;
    let (sm, cm) = map(s - h, cos_phi)?;
    let (tp, dp) = map(s, cos_phi + h)?;
    let (tm, dm) = map(s, cos_phi - h)?;
    let a = unwrap(sp - sm) / (2.0 * h);
    let b = unwrap(tp - tm) / (2.0 * h);
    let cc = (cp - cm) / (2.0 * h);
    let d = (dp - dm) / (2.0 * h);
    Ok(a * d - b * cc)
}
