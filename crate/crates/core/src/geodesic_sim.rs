//! Geodesic flow of `g = f·g₀` on `T²` in arclength, with the scalar Jacobi
//! equation `J'' + K J = 0` carried along, conjugate-point detection and a
//! Monte Carlo estimate of the fraction of the unit tangent bundle not
//! swept by geodesics free of conjugate points.
//!
//! Positions and coordinate velocities `v` are integrated together; with
//! `u = ½ log f` the geodesic equation reads `v' = −2(∇u·v) v + |v|² ∇u`
//! and unit speed means `f |v|² = 1`.

use std::f64::consts::PI;
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::billiard::{DeltaEstimate, Window};
use crate::conformal_metric::{gauss_curvature_from, TrigPoly};
use crate::error::{Error, Result};
use crate::geometry::JacobiState;
use crate::ode::{Dopri5, Step};
use crate::sampling::{draw_liouville_2d, SeededStream};

pub const DEFAULT_TOL: f64 = 1e-10;
const ZERO_BISECTIONS: usize = 60;
const CHART_SWITCH: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    /// Position reduced to the fundamental domain.
    pub x: [f64; 2],
    /// Euclidean direction angle of the velocity.
    pub phi: f64,
    pub t: f64,
    pub j: f64,
    pub jp: f64,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    pub max_energy_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub found: bool,
    pub first_pair: Option<(f64, f64)>,
    /// Zeros of the Jacobi field started at `−T`, the starting zero included.
    pub zeros: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiReport {
    /// Times where `ω = J'/J` blows up, the starting one included.
    pub blowups: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Flow<'a> {
    metric: &'a TrigPoly,
}

impl Flow<'_> {
    fn validate(metric: &TrigPoly) -> Result<()> {
        if metric.n != 2 {
            return Err(Error::Domain(format!("geodesic simulation needs n = 2, got n = {}", metric.n)));
        }
        metric.validate()
    }

    #[inline]
    fn accel(&self, x: [f64; 2], v: [f64; 2]) -> ([f64; 2], f64, f64) {
        let (f, g, h) = self.metric.jet2(x);
        let du = [g[0] / (2.0 * f), g[1] / (2.0 * f)];
        let dot = du[0] * v[0] + du[1] * v[1];
        let vv = v[0] * v[0] + v[1] * v[1];
        let a = [-2.0 * dot * v[0] + vv * du[0], -2.0 * dot * v[1] + vv * du[1]];
        let k = gauss_curvature_from(f, g[0] * g[0] + g[1] * g[1], h[0] + h[2]);
        (a, k, f)
    }

    fn jacobi_rhs(&self, y: &[f64; 6]) -> [f64; 6] {
        let (a, k, _) = self.accel([y[0], y[1]], [y[2], y[3]]);
        [y[2], y[3], a[0], a[1], y[5], -k * y[4]]
    }

    /// Riccati variable in either chart: `ω' = −ω² − K` or, for `η = 1/ω`, `η' = 1 + K η²`.
    fn riccati_rhs(&self, y: &[f64; 5], inverted: bool) -> [f64; 5] {
        let (a, k, _) = self.accel([y[0], y[1]], [y[2], y[3]]);
        let w = y[4];
        let dw = if inverted { 1.0 + k * w * w } else { -w * w - k };
        [y[2], y[3], a[0], a[1], dw]
    }

    fn energy(&self, y: &[f64]) -> f64 {
        self.metric.value(&[y[0], y[1]]) * (y[2] * y[2] + y[3] * y[3])
    }

    fn initial(&self, x: [f64; 2], phi: f64) -> [f64; 4] {
        let s = 1.0 / self.metric.value(&x).sqrt();
        [x[0], x[1], s * phi.cos(), s * phi.sin()]
    }

    fn wrap(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].rem_euclid(self.metric.period(0)), x[1].rem_euclid(self.metric.period(1))]
    }

    /// Position and velocity after flowing backward for arclength `len`.
    fn rewind(&self, x: [f64; 2], phi: f64, len: f64, tol: f64) -> Result<[f64; 4]> {
        let p = self.initial(x, phi + PI);
        let y0 = [p[0], p[1], p[2], p[3], 0.0, 0.0];
        let (_, y) = Dopri5::with_tolerance(tol).integrate(
            |_, y| self.jacobi_rhs(y),
            0.0,
            y0,
            len,
            |_| ControlFlow::Continue(()),
        )?;
        Ok([y[0], y[1], -y[2], -y[3]])
    }
}

fn check_horizon(len: f64) -> Result<()> {
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::Domain(format!("arclength horizon must be positive, got {len}")));
    }
    Ok(())
}

fn with_context<T>(r: Result<T>, x0: [f64; 2], phi0: f64) -> Result<T> {
    r.map_err(|e| match e {
        Error::Integration(msg) => Error::Integration(format!("{msg} (geodesic from x = {x0:?}, φ = {phi0})")),
        other => other,
    })
}

/// Integrates the unit-speed geodesic from `(x0, φ0)` over `[0, len]` with the
/// Jacobi field started at `jacobi`, recording the state after every step.
pub fn integrate_geodesic_with(
    metric: &TrigPoly,
    x0: [f64; 2],
    phi0: f64,
    len: f64,
    tol: f64,
    jacobi: JacobiState,
) -> Result<Trajectory> {
    Flow::validate(metric)?;
    check_horizon(len)?;
    let flow = Flow { metric };
    let p = flow.initial(x0, phi0);
    let y0 = [p[0], p[1], p[2], p[3], jacobi.j, jacobi.jp];
    let state = |t: f64, y: &[f64; 6]| GeodesicState {
        x: flow.wrap([y[0], y[1]]),
        phi: y[3].atan2(y[2]),
        t,
        j: y[4],
        jp: y[5],
        omega: (y[4] != 0.0).then(|| y[5] / y[4]),
    };
    let mut states = vec![state(0.0, &y0)];
    let mut defect = 0.0f64;
    let res = Dopri5::with_tolerance(tol).integrate(
        |_, y| flow.jacobi_rhs(y),
        0.0,
        y0,
        len,
        |step: &Step<6>| {
            defect = defect.max((flow.energy(&step.y1) - 1.0).abs());
            states.push(state(step.t1(), &step.y1));
            ControlFlow::Continue(())
        },
    );
    with_context(res, x0, phi0)?;
    Ok(Trajectory { states, max_energy_defect: defect })
}

pub fn integrate_geodesic(metric: &TrigPoly, x0: [f64; 2], phi0: f64, len: f64, tol: f64) -> Result<Trajectory> {
    integrate_geodesic_with(metric, x0, phi0, len, tol, JacobiState::new(0.0, 1.0))
}

/// Refines a sign change of component `i` inside a step by bisection on the dense output.
fn refine_zero<const D: usize>(step: &Step<D>, i: usize) -> f64 {
    let (mut lo, mut hi) = (step.t0, step.t1());
    let s_lo = step.y0[i].signum();
    for _ in 0..ZERO_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if step.dense_component(i, mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn conjugate_scan(
    metric: &TrigPoly,
    x0: [f64; 2],
    phi0: f64,
    horizon: f64,
    tol: f64,
    stop_at_first: bool,
) -> Result<ConjugateReport> {
    Flow::validate(metric)?;
    check_horizon(horizon)?;
    let flow = Flow { metric };
    let start = with_context(flow.rewind(x0, phi0, horizon, tol), x0, phi0)?;
    let y0 = [start[0], start[1], start[2], start[3], 0.0, 1.0];
    let mut zeros = vec![-horizon];
    let res = Dopri5::with_tolerance(tol).integrate(
        |_, y| flow.jacobi_rhs(y),
        -horizon,
        y0,
        horizon,
        |step: &Step<6>| {
            if step.y0[4] > 0.0 && step.y1[4] <= 0.0 || step.y0[4] < 0.0 && step.y1[4] >= 0.0 {
                zeros.push(refine_zero(step, 4));
                if stop_at_first {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        },
    );
    with_context(res, x0, phi0)?;
    let found = zeros.len() >= 2;
    let first_pair = found.then(|| (zeros[0], zeros[1]));
    Ok(ConjugateReport { found, first_pair, zeros })
}

/// Conjugate points on the geodesic segment of arclength `[−T, T]` through `(x0, φ0)`.
///
/// The Jacobi field vanishing at `−T` vanishes again inside the window exactly
/// when the segment carries a conjugate pair.
pub fn has_conjugate_points(metric: &TrigPoly, x0: [f64; 2], phi0: f64, horizon: f64) -> Result<ConjugateReport> {
    conjugate_scan(metric, x0, phi0, horizon, DEFAULT_TOL, false)
}

pub fn has_conjugate_points_with(
    metric: &TrigPoly,
    x0: [f64; 2],
    phi0: f64,
    horizon: f64,
    tol: f64,
) -> Result<ConjugateReport> {
    conjugate_scan(metric, x0, phi0, horizon, tol, false)
}

/// Blowup times of `ω = J'/J` over `[−T, T]`, integrating the Riccati equation
/// itself and switching to `η = 1/ω` whenever `|ω|` grows large.
pub fn riccati_blowups(metric: &TrigPoly, x0: [f64; 2], phi0: f64, horizon: f64, tol: f64) -> Result<RiccatiReport> {
    Flow::validate(metric)?;
    check_horizon(horizon)?;
    let flow = Flow { metric };
    let start = with_context(flow.rewind(x0, phi0, horizon, tol), x0, phi0)?;
    let mut y = [start[0], start[1], start[2], start[3], 0.0];
    let mut inverted = true;
    let mut t = -horizon;
    let mut blowups = vec![-horizon];
    while t < horizon {
        let mut switch = false;
        let res = Dopri5::with_tolerance(tol).integrate(
            |_, y| flow.riccati_rhs(y, inverted),
            t,
            y,
            horizon,
            |step: &Step<5>| {
                let (a, b) = (step.y0[4], step.y1[4]);
                if inverted && step.t0 > -horizon && (a > 0.0 && b <= 0.0 || a < 0.0 && b >= 0.0) {
                    blowups.push(refine_zero(step, 4));
                }
                if b.abs() > CHART_SWITCH {
                    switch = true;
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            },
        );
        let (t1, y1) = with_context(res, x0, phi0)?;
        t = t1;
        y = y1;
        if switch {
            y[4] = 1.0 / y[4];
            inverted = !inverted;
        }
    }
    Ok(RiccatiReport { blowups })
}

/// Largest residual of `ω' + ω² + K = 0` for `ω = J'/J`, with `ω'` from
/// differentiating the dense output, at step midpoints away from zeros of `J`.
pub fn riccati_residual(metric: &TrigPoly, x0: [f64; 2], phi0: f64, horizon: f64, tol: f64) -> Result<f64> {
    Flow::validate(metric)?;
    check_horizon(horizon)?;
    let flow = Flow { metric };
    let start = with_context(flow.rewind(x0, phi0, horizon, tol), x0, phi0)?;
    let y0 = [start[0], start[1], start[2], start[3], 0.0, 1.0];
    let mut worst = 0.0f64;
    let res = Dopri5::with_tolerance(tol).integrate(
        |_, y| flow.jacobi_rhs(y),
        -horizon,
        y0,
        horizon,
        |step: &Step<6>| {
            let tm = step.t0 + 0.5 * step.h;
            let ym = step.dense(tm);
            let w = ym[5] / ym[4];
            let same_sign = step.y0[4] * step.y1[4] > 0.0;
            if same_sign && (w * step.h).abs() < 0.1 {
                let omega = |t: f64| step.dense_component(5, t) / step.dense_component(4, t);
                let d = 0.25 * step.h;
                let d1 = (omega(tm + d) - omega(tm - d)) / (2.0 * d);
                let d2 = (omega(tm + 0.5 * d) - omega(tm - 0.5 * d)) / d;
                let dw = (4.0 * d2 - d1) / 3.0;
                let (_, k, _) = flow.accel([ym[0], ym[1]], [ym[2], ym[3]]);
                worst = worst.max((dw + w * w + k).abs() / (1.0 + w * w + k.abs()));
            }
            ControlFlow::Continue(())
        },
    );
    with_context(res, x0, phi0)?;
    Ok(worst)
}

/// Hit counts per horizon over `samples` Liouville-distributed unit vectors.
/// Sample `i` uses stream `i` of `seed`, so counts do not depend on `workers`.
pub fn estimate_delta_geodesic_windows(
    metric: &TrigPoly,
    horizons: &[f64],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<DeltaEstimate>> {
    estimate_delta_geodesic_windows_with(metric, horizons, samples, seed, workers, DEFAULT_TOL)
}

/// As [`estimate_delta_geodesic_windows`] with an explicit integrator tolerance.
pub fn estimate_delta_geodesic_windows_with(
    metric: &TrigPoly,
    horizons: &[f64],
    samples: u64,
    seed: u64,
    workers: usize,
    tol: f64,
) -> Result<Vec<DeltaEstimate>> {
    Flow::validate(metric)?;
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::Domain(format!("integrator tolerance {tol} outside (0, 1e-2)")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if horizons.is_empty() {
        return Err(Error::Domain("need at least one horizon".into()));
    }
    for &h in horizons {
        check_horizon(h)?;
    }
    let periods = [metric.period(0), metric.period(1)];
    let envelope = metric.envelope();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let counts = pool.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut stream = SeededStream::new(seed, i);
                let (x, phi) = draw_liouville_2d(&periods, envelope, |x| metric.value(x), &mut stream);
                horizons
                    .iter()
                    .map(|&h| conjugate_scan(metric, x, phi, h, tol, true).map(|r| r.found))
                    .collect::<Result<Vec<bool>>>()
            })
            .try_fold(
                || vec![0u64; horizons.len()],
                |mut acc, flags| {
                    for (a, f) in acc.iter_mut().zip(flags?) {
                        *a += f as u64;
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(|| vec![0u64; horizons.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
    })?;
    horizons
        .iter()
        .zip(counts)
        .map(|(&h, hits)| DeltaEstimate::from_counts(hits, samples, Window::Arclength(h), seed))
        .collect()
}

pub fn estimate_delta_geodesic(
    metric: &TrigPoly,
    horizon: f64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<DeltaEstimate> {
    Ok(estimate_delta_geodesic_windows(metric, &[horizon], samples, seed, workers)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn test_factor() -> TrigPoly {
        TrigPoly::cosine(2, 1.0, 0, 1, 0.3)
    }

    #[test]
    fn flat_geodesics_are_straight() {
        let flat = TrigPoly::constant(2, 1.0);
        let tr = integrate_geodesic(&flat, [0.1, 0.2], 0.7, 5.0, DEFAULT_TOL).unwrap();
        let last = tr.states.last().unwrap();
        assert!((last.t - 5.0).abs() < 1e-15);
        assert!((last.j - 5.0).abs() < 1e-12 && (last.jp - 1.0).abs() < 1e-12);
        let expect = [(0.1 + 5.0 * 0.7f64.cos()).rem_euclid(1.0), (0.2 + 5.0 * 0.7f64.sin()).rem_euclid(1.0)];
        assert!((last.x[0] - expect[0]).abs() < 1e-12 && (last.x[1] - expect[1]).abs() < 1e-12);
        assert!(!has_conjugate_points(&flat, [0.3, 0.3], 1.0, 20.0).unwrap().found);
    }

    #[test]
    fn constant_scaling_halves_coordinate_speed() {
        let four = TrigPoly::constant(2, 4.0);
        let tr = integrate_geodesic(&four, [0.0, 0.0], 0.0, 1.0, DEFAULT_TOL).unwrap();
        assert!((tr.states.last().unwrap().x[0] - 0.5).abs() < 1e-12);
        assert!(tr.max_energy_defect < 1e-14);
    }

    #[test]
    fn energy_is_conserved() {
        let tr = integrate_geodesic(&test_factor(), [0.13, 0.4], 0.9, 100.0, DEFAULT_TOL).unwrap();
        assert!(tr.max_energy_defect < 1e-8, "defect {}", tr.max_energy_defect);
    }

    #[test]
    fn positive_curvature_line_has_conjugate_points() {
        // along x₁ = 0 the geodesic stays put and K ≡ 0.3·4π²/(2·1.3²)
        let rep = has_conjugate_points(&test_factor(), [0.0, 0.2], FRAC_PI_2, 3.0).unwrap();
        assert!(rep.found);
        let k: f64 = 0.3 * 4.0 * PI * PI / (2.0 * 1.69);
        let (a, b) = rep.first_pair.unwrap();
        assert!((b - a - PI / k.sqrt()).abs() < 1e-8);
        for w in rep.zeros.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn riccati_blowups_match_jacobi_zeros() {
        let rep = has_conjugate_points(&test_factor(), [0.05, 0.2], 1.3, 10.0).unwrap();
        let ric = riccati_blowups(&test_factor(), [0.05, 0.2], 1.3, 10.0, DEFAULT_TOL).unwrap();
        assert_eq!(rep.zeros.len(), ric.blowups.len());
        for (a, b) in rep.zeros.iter().zip(&ric.blowups) {
            assert!((a - b).abs() < 1e-6);
        }
        let r = riccati_residual(&test_factor(), [0.05, 0.2], 1.3, 10.0, DEFAULT_TOL).unwrap();
        assert!(r < 1e-6, "residual {r:e}");
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(integrate_geodesic(&test_factor(), [0.0, 0.0], 0.0, 0.0, DEFAULT_TOL).is_err());
        assert!(integrate_geodesic(&TrigPoly::constant(3, 1.0), [0.0, 0.0], 0.0, 1.0, DEFAULT_TOL).is_err());
        assert!(estimate_delta_geodesic(&test_factor(), 5.0, 0, 1, 1).is_err());
    }

    #[test]
    fn flat_delta_is_zero() {
        let est = estimate_delta_geodesic(&TrigPoly::constant(2, 1.0), 50.0, 1000, 3, 1).unwrap();
        assert_eq!(est.hits, 0);
        assert_eq!(est.window, Window::Arclength(50.0));
    }
}
