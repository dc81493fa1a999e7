//! Closed-form lower bounds on the measure of non-minimal billiard orbits,
//! driven by the perimeter `P`, enclosed area `A` and minimal geodesic
//! curvature `k_min` of the table.
//!
//! Every bound carries the isoperimetric defect of its surface as a factor,
//! so each vanishes exactly on round discs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curves::SampledCurve;
use crate::error::{Error, Result};
use crate::geometry::SurfaceKind;

/// Relative tolerance on the isoperimetric defect, measured against `P²`.
pub const TOL_ISO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFlags {
    /// The table lies in an open hemisphere (sphere only).
    pub in_hemisphere: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Applicability {
    pub bound: String,
    pub applicable: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub surface: SurfaceKind,
    #[serde(rename = "P")]
    pub perimeter: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub k_min: f64,
    pub b2_strong: Option<f64>,
    pub b2_weak: Option<f64>,
    pub b1: Option<f64>,
    pub b3: Option<f64>,
    pub b4: Option<f64>,
    pub best: f64,
    pub applicability: Vec<Applicability>,
}

impl BoundReport {
    fn present(&self) -> impl Iterator<Item = f64> + '_ {
        [self.b2_strong, self.b2_weak, self.b1, self.b3, self.b4].into_iter().flatten()
    }
}

fn defect(surface: SurfaceKind, p: f64, a: f64) -> f64 {
    let four_pi_a = 4.0 * PI * a;
    match surface {
        SurfaceKind::Flat => p * p - four_pi_a,
        SurfaceKind::Sphere => p * p + a * a - four_pi_a,
        SurfaceKind::Hyperbolic => p * p - a * a - four_pi_a,
    }
}

fn entry(bound: &str, applicable: bool, reason: impl Into<String>) -> Applicability {
    Applicability { bound: bound.to_string(), applicable, reason: reason.into() }
}

pub fn evaluate_billiard_bounds(
    surface: SurfaceKind,
    perimeter: f64,
    area: f64,
    k_min: f64,
    flags: BoundFlags,
) -> Result<BoundReport> {
    let (p, a) = (perimeter, area);
    if !(p > 0.0 && a > 0.0 && k_min > 0.0) || !(p.is_finite() && a.is_finite() && k_min.is_finite()) {
        return Err(Error::Domain(format!("need P, A, k_min > 0, got P = {p}, A = {a}, k_min = {k_min}")));
    }
    let raw = defect(surface, p, a);
    let tol = TOL_ISO * p * p;
    if raw < -tol {
        return Err(Error::InconsistentInvariants(format!(
            "isoperimetric inequality violated on {}: defect {raw:e} with P = {p}, A = {a}",
            surface.name()
        )));
    }
    let d = raw.max(0.0);

    let mut report = BoundReport {
        surface,
        perimeter: p,
        area: a,
        k_min,
        b2_strong: None,
        b2_weak: None,
        b1: None,
        b3: None,
        b4: None,
        best: 0.0,
        applicability: Vec::new(),
    };
    let mut notes = Vec::new();
    match surface {
        SurfaceKind::Flat => {
            report.b2_strong = Some(PI * d / (4.0 * p * (p + (4.0 * PI * a).sqrt())));
            report.b2_weak = Some(PI * d / (8.0 * p * p));
            report.b1 = Some(d * k_min / (8.0 * p));
            for b in ["b2_strong", "b2_weak", "b1"] {
                notes.push(entry(b, true, "planar table"));
            }
        }
        SurfaceKind::Sphere => {
            if flags.in_hemisphere {
                let root = (p * p + (2.0 * PI - a).powi(2)).sqrt();
                report.b3 = Some(PI / (2.0 * (1.0 / k_min).atan()) * d / (p * (2.0 * PI + root)));
                notes.push(entry("b3", true, "table lies in an open hemisphere"));
            } else {
                notes.push(entry("b3", false, "table not contained in an open hemisphere"));
            }
        }
        SurfaceKind::Hyperbolic => {
            let under = (2.0 * PI + a).powi(2) - p * p;
            if !(under >= 0.0) {
                return Err(Error::InconsistentInvariants(format!(
                    "hyperbolic table violates P ≤ 2π + A: P = {p}, A = {a}"
                )));
            }
            if k_min > 1.0 {
                let scale = PI / (2.0 * (1.0 / k_min).atanh());
                report.b4 = Some(scale * d / (p * (2.0 * PI + under.sqrt())));
                notes.push(entry("b4", true, "convex with respect to horocycles"));
            } else {
                notes.push(entry("b4", false, format!("needs k_min > 1, got {k_min}")));
            }
        }
    }
    report.applicability = notes;
    report.best = report.present().fold(0.0, f64::max);
    Ok(report)
}

/// Bounds from the invariants of a built curve.
pub fn bounds_for_curve(c: &SampledCurve) -> Result<BoundReport> {
    evaluate_billiard_bounds(c.kind, c.perimeter, c.area, c.k_min, BoundFlags { in_hemisphere: c.in_hemisphere })
}
