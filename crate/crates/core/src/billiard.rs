//! The billiard map, its generating function, discrete Jacobi fields and
//! Monte Carlo detection of non-minimal orbits.
//!
//! Phase coordinates are `(s, φ)`: arclength along the boundary and the
//! inward angle measured from the positive tangent. The generating function
//! is the chord length `L(x, y)`; on a surface of curvature `κ` its second
//! derivatives are
//!
//! ```text
//! L11 = sin²φ ct_κ(L) − k(x) sin φ
//! L22 = sin²ψ ct_κ(L) − k(y) sin ψ
//! L12 = sin φ sin ψ / sn_κ(L)
//! ```
//!
//! with `ct_κ = cs_κ / sn_κ` (`1/L`, `cot L`, `coth L`). A configuration is
//! an m-configuration when the tridiagonal second variation built from these
//! is negative definite on every sub-segment.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{Frame, SampledCurve};
use crate::error::{Error, Result};
use crate::geometry::{direction_towards, distance_unchecked, JacobiState, SurfaceKind, Vec3};
use crate::sampling::{confidence_interval, draw_billiard_point, SeededStream, RNG_ID};

const BRACKET_HALVINGS: usize = 12;
const MAX_NEWTON: usize = 60;
pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub s: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(s: f64, phi: f64) -> Self {
        Self { s, phi }
    }

    /// Time-reversal involution `(s, φ) ↦ (s, π − φ)`.
    pub fn flip(self) -> Self {
        Self { s: self.s, phi: PI - self.phi }
    }

    fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi < PI) || !self.s.is_finite() {
            return Err(Error::Domain(format!("phase point needs finite s and 0 < φ < π, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordData {
    pub length: f64,
    /// Outgoing angle at the start point.
    pub phi: f64,
    /// Angle between the chord and the tangent at the end point.
    pub psi: f64,
    pub s_x: f64,
    pub s_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenDerivatives {
    pub l: f64,
    pub l1: f64,
    pub l2: f64,
    pub l11: f64,
    pub l12: f64,
    pub l22: f64,
}

/// Symmetric tridiagonal second variation over the interior points of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SecondVariation {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Pivots of the `LDLᵀ` factorization, without pivoting.
    pub fn ldl_pivots(&self) -> Vec<f64> {
        let mut piv = Vec::with_capacity(self.diag.len());
        for (i, &c) in self.diag.iter().enumerate() {
            let d = if i == 0 { c } else { c - self.offdiag[i - 1].powi(2) / piv[i - 1] };
            piv.push(d);
        }
        piv
    }

    pub fn is_negative_definite(&self) -> bool {
        let mut prev = 0.0;
        for (i, &c) in self.diag.iter().enumerate() {
            let d = if i == 0 { c } else { c - self.offdiag[i - 1].powi(2) / prev };
            if !(d < 0.0) {
                return false;
            }
            prev = d;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// Billiard window: `N` bounces before and after the sampled point.
    Bounces(usize),
    /// Geodesic window: arclength `T` before and after the sampled point.
    Arclength(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub hits: u64,
    pub samples: u64,
    pub window: Window,
    pub seed: u64,
    pub rng: String,
}

impl DeltaEstimate {
    pub(crate) fn from_counts(hits: u64, samples: u64, window: Window, seed: u64) -> Result<Self> {
        let ci = confidence_interval(hits, samples)?;
        Ok(Self {
            delta_hat: ci.delta_hat,
            stderr: ci.stderr,
            ci95: ci.ci95,
            hits,
            samples,
            window,
            seed,
            rng: RNG_ID.to_string(),
        })
    }
}

/// One chord of an orbit or configuration, with what the second variation needs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Chord {
    pub len: f64,
    pub sin_left: f64,
    pub sin_right: f64,
    pub k_left: f64,
    pub k_right: f64,
}

impl Chord {
    #[inline]
    fn l11(&self, kind: SurfaceKind) -> f64 {
        self.sin_left * self.sin_left * kind.ct(self.len) - self.k_left * self.sin_left
    }

    #[inline]
    fn l22(&self, kind: SurfaceKind) -> f64 {
        self.sin_right * self.sin_right * kind.ct(self.len) - self.k_right * self.sin_right
    }

    #[inline]
    fn l12(&self, kind: SurfaceKind) -> f64 {
        self.sin_left * self.sin_right / kind.sn(self.len)
    }
}

struct Hit {
    frame: Frame,
    len: f64,
    psi: f64,
    sin_phi: f64,
    sin_psi: f64,
}

/// Shoots the geodesic leaving `from` at inward angle `phi` and finds where it meets the boundary again.
fn shoot(c: &SampledCurve, from: &Frame, phi: f64) -> Result<Hit> {
    let kind = c.kind;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let p = from.pos;
    let d = from.tangent * cos_phi + from.normal * sin_phi;
    let plane = p.cross(&d);
    // g < 0 between the start and the exit point, g > 0 after it
    let g = |t: f64| -> f64 {
        let q = c.position_at_t(t);
        match kind {
            SurfaceKind::Flat => d.x * (q.y - p.y) - d.y * (q.x - p.x),
            _ => plane.dot(&q),
        }
    };
    let dg = |t: f64| -> (f64, f64) {
        let (q, dq) = c.position_d1_at_t(t);
        match kind {
            SurfaceKind::Flat => (d.x * (q.y - p.y) - d.y * (q.x - p.x), d.x * dq.y - d.y * dq.x),
            _ => (plane.dot(&q), plane.dot(&dq)),
        }
    };

    let mut lo = from.t;
    let mut hi = from.t + TAU;
    for _ in 0..BRACKET_HALVINGS {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..MAX_NEWTON {
        let (val, der) = dg(t);
        if val < 0.0 {
            lo = t;
        } else if val > 0.0 {
            hi = t;
        } else {
            converged = true;
            break;
        }
        let mut next = t - val / der;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - t).abs();
        t = next;
        if step <= 1e-15 * t.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::RootFinder(format!(
            "no convergence shooting from t = {} at φ = {phi}: bracket [{lo}, {hi}]",
            from.t
        )));
    }

    let frame = c.frame_at_t(t.rem_euclid(TAU));
    let q = frame.pos;
    let (len, d_in) = match kind {
        SurfaceKind::Flat => ((q - p).norm(), d),
        _ => (distance_unchecked(kind, &p, &q), -direction_towards(kind, &q, &p)),
    };
    let cos_psi = kind.dot(&d_in, &frame.tangent);
    let sin_psi = -kind.dot(&d_in, &frame.normal);
    if !(sin_psi > 0.0 && len > 0.0) {
        return Err(Error::RootFinder(format!(
            "degenerate chord from t = {} at φ = {phi}: length {len:e}, sin ψ = {sin_psi:e}",
            from.t
        )));
    }
    Ok(Hit { frame, len, psi: sin_psi.atan2(cos_psi), sin_phi, sin_psi })
}

/// The billiard map `T`.
pub fn billiard_step(c: &SampledCurve, u: PhasePoint) -> Result<(PhasePoint, ChordData)> {
    u.validate()?;
    let s_x = c.reduce(u.s);
    let from = c.frame_at_s(s_x);
    let hit = shoot(c, &from, u.phi)?;
    let s_y = c.s_of_t(hit.frame.t);
    Ok((
        PhasePoint { s: s_y, phi: hit.psi },
        ChordData { length: hit.len, phi: u.phi, psi: hit.psi, s_x, s_y },
    ))
}

/// `T⁻¹ = R ∘ T ∘ R` with `R` the flip `(s, φ) ↦ (s, π − φ)`.
pub fn billiard_step_inverse(c: &SampledCurve, u: PhasePoint) -> Result<PhasePoint> {
    let (v, _) = billiard_step(c, u.flip())?;
    Ok(v.flip())
}

/// Chords of the orbit segment from `T^{-back}(u)` to `T^{fwd}(u)`, in order.
pub(crate) fn orbit_chords(c: &SampledCurve, u: PhasePoint, back: usize, fwd: usize) -> Result<Vec<Chord>> {
    u.validate()?;
    let start = c.frame_at_s(u.s);
    let mut chords = Vec::with_capacity(back + fwd);

    let (mut frame, mut phi) = (start, PI - u.phi);
    for _ in 0..back {
        let hit = shoot(c, &frame, phi)?;
        chords.push(Chord {
            len: hit.len,
            sin_left: hit.sin_psi,
            sin_right: hit.sin_phi,
            k_left: hit.frame.k,
            k_right: frame.k,
        });
        frame = hit.frame;
        phi = hit.psi;
    }
    chords.reverse();

    let (mut frame, mut phi) = (start, u.phi);
    for _ in 0..fwd {
        let hit = shoot(c, &frame, phi)?;
        chords.push(Chord {
            len: hit.len,
            sin_left: hit.sin_phi,
            sin_right: hit.sin_psi,
            k_left: frame.k,
            k_right: hit.frame.k,
        });
        frame = hit.frame;
        phi = hit.psi;
    }
    Ok(chords)
}

/// Propagates the discrete Jacobi field `ξ` with `ξ_0 = 0, ξ_1 = 1` along the
/// chords (chord `j` joins points `j` and `j + 1`) and reports whether it
/// vanishes again, i.e. reaches `ξ ≤ 0` at some later point.
pub(crate) fn field_vanishes_again(kind: SurfaceKind, chords: &[Chord]) -> bool {
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    for p in 1..chords.len() {
        let c = chords[p - 1].l22(kind) + chords[p].l11(kind);
        let next = -(chords[p - 1].l12(kind) * prev + c * cur) / chords[p].l12(kind);
        if !(next > 0.0) {
            return true;
        }
        prev = cur / next;
        cur = 1.0;
    }
    false
}

/// Discrete Jacobi field values `ξ_0 = 0, ξ_1 = 1, …, ξ_n` along a chord sequence (unnormalized).
pub(crate) fn jacobi_field_values(kind: SurfaceKind, chords: &[Chord]) -> Vec<f64> {
    let mut xi = vec![0.0, 1.0];
    for p in 1..chords.len() {
        let c = chords[p - 1].l22(kind) + chords[p].l11(kind);
        let next = -(chords[p - 1].l12(kind) * xi[p - 1] + c * xi[p]) / chords[p].l12(kind);
        xi.push(next);
    }
    xi
}

/// Window test: `true` when the Jacobi field started at bounce `−N` vanishes
/// again before bounce `N`, so that the second variation of the orbit segment
/// `T^{−N}(u) … T^{N}(u)` is not negative definite and `u` is not on an m-orbit.
pub fn classify_m_window(c: &SampledCurve, u: PhasePoint, n: usize) -> Result<bool> {
    Ok(classify_m_windows(c, u, &[n])?[0])
}

/// [`classify_m_window`] for several window sizes from one orbit computation.
pub fn classify_m_windows(c: &SampledCurve, u: PhasePoint, windows: &[usize]) -> Result<Vec<bool>> {
    let n_max = windows.iter().copied().max().unwrap_or(0);
    if windows.iter().any(|&n| n < 2) || windows.is_empty() {
        return Err(Error::Domain(format!("windows must be at least 2 bounces, got {windows:?}")));
    }
    let chords = orbit_chords(c, u, n_max, n_max)?;
    Ok(windows
        .iter()
        .map(|&n| field_vanishes_again(c.kind, &chords[n_max - n..n_max + n]))
        .collect())
}

/// Jacobi field values `ξ_{−N} … ξ_N` for the window around `u`.
pub fn window_jacobi_field(c: &SampledCurve, u: PhasePoint, n: usize) -> Result<Vec<f64>> {
    let chords = orbit_chords(c, u, n, n)?;
    Ok(jacobi_field_values(c.kind, &chords))
}

/// Boundary arclengths `s_{−N}, …, s_N` of the orbit segment around `u`.
pub fn orbit_configuration(c: &SampledCurve, u: PhasePoint, n: usize) -> Result<Vec<f64>> {
    let mut back = Vec::with_capacity(n);
    let mut v = u;
    for _ in 0..n {
        v = billiard_step_inverse(c, v)?;
        back.push(v.s);
    }
    back.reverse();
    back.push(c.reduce(u.s));
    let mut v = u;
    for _ in 0..n {
        v = billiard_step(c, v)?.0;
        back.push(v.s);
    }
    Ok(back)
}

fn chord_between(c: &SampledCurve, s_x: f64, s_y: f64) -> Result<(Chord, GenDerivatives)> {
    let kind = c.kind;
    let fx = c.frame_at_s(s_x);
    let fy = c.frame_at_s(s_y);
    let (p, q) = (fx.pos, fy.pos);
    let len = match kind {
        SurfaceKind::Flat => (q - p).norm(),
        _ => distance_unchecked(kind, &p, &q),
    };
    if !(len > 1e-13) {
        return Err(Error::Domain(format!("coincident boundary points at s = {s_x}, {s_y}")));
    }
    let d: Vec3 = direction_towards(kind, &p, &q);
    let d_in: Vec3 = -direction_towards(kind, &q, &p);
    let (cos_phi, sin_phi) = (kind.dot(&d, &fx.tangent), kind.dot(&d, &fx.normal));
    let (cos_psi, sin_psi) = (kind.dot(&d_in, &fy.tangent), -kind.dot(&d_in, &fy.normal));
    let chord = Chord { len, sin_left: sin_phi, sin_right: sin_psi, k_left: fx.k, k_right: fy.k };
    let der = GenDerivatives {
        l: len,
        l1: -cos_phi,
        l2: cos_psi,
        l11: chord.l11(kind),
        l12: chord.l12(kind),
        l22: chord.l22(kind),
    };
    Ok((chord, der))
}

/// First and second derivatives of the chord length `L(s_x, s_y)` in closed form.
///
/// The planar case is the classical one; on the sphere and hyperbolic plane
/// `1/L` becomes `cot L` / `coth L` and `L` in `L12` becomes `sin L` / `sinh L`.
pub fn generating_derivatives(c: &SampledCurve, s_x: f64, s_y: f64) -> Result<GenDerivatives> {
    Ok(chord_between(c, s_x, s_y)?.1)
}

/// Chord length between two boundary points.
pub fn chord_length(c: &SampledCurve, s_x: f64, s_y: f64) -> f64 {
    let p = c.frame_at_s(s_x).pos;
    let q = c.frame_at_s(s_y).pos;
    distance_unchecked(c.kind, &p, &q)
}

/// Lens-type focusing jump of a beam reflecting off the boundary.
pub fn reflect_jacobi(state: JacobiState, k: f64, phi: f64) -> Result<JacobiState> {
    if !(k > 0.0) || !(phi > 0.0 && phi < PI) {
        return Err(Error::Domain(format!("reflection needs k > 0 and 0 < φ < π, got k = {k}, φ = {phi}")));
    }
    Ok(JacobiState { j: state.j, jp: state.jp - 2.0 * k / phi.sin() * state.j })
}

/// Second variation of the configuration `s_list` and whether it is negative definite.
///
/// The plane uses the closed-form derivatives. On the sphere and the
/// hyperbolic plane the entries are central finite differences of the
/// two-chord sums (step `1e-5·P`, one Richardson extrapolation).
pub fn second_variation(c: &SampledCurve, s_list: &[f64]) -> Result<(SecondVariation, bool)> {
    if s_list.len() < 3 {
        return Err(Error::Domain(format!("second variation needs at least 3 points, got {}", s_list.len())));
    }
    let p = c.perimeter;
    for w in s_list.windows(2) {
        let gap = (w[1] - w[0]).rem_euclid(p);
        if gap.min(p - gap) < 1e-12 * p {
            return Err(Error::Domain(format!("consecutive configuration points coincide at s = {}", w[0])));
        }
    }
    let m = s_list.len() - 2;
    let mut diag = Vec::with_capacity(m);
    let mut offdiag = Vec::with_capacity(m.saturating_sub(1));
    match c.kind {
        SurfaceKind::Flat => {
            let ders: Vec<GenDerivatives> =
                s_list.windows(2).map(|w| generating_derivatives(c, w[0], w[1])).collect::<Result<_>>()?;
            for i in 1..=m {
                diag.push(ders[i - 1].l22 + ders[i].l11);
                if i < m {
                    offdiag.push(ders[i].l12);
                }
            }
        }
        _ => {
            let h = 1e-5 * p;
            let len = |a: f64, b: f64| chord_length(c, a, b);
            for i in 1..=m {
                let (a, x, b) = (s_list[i - 1], s_list[i], s_list[i + 1]);
                let two = |y: f64| len(a, y) + len(y, b);
                let second = |h: f64| (two(x + h) - 2.0 * two(x) + two(x - h)) / (h * h);
                diag.push((4.0 * second(h) - second(2.0 * h)) / 3.0);
                if i < m {
                    let mixed = |h: f64| {
                        (len(x + h, b + h) - len(x + h, b - h) - len(x - h, b + h) + len(x - h, b - h)) / (4.0 * h * h)
                    };
                    offdiag.push((4.0 * mixed(h) - mixed(2.0 * h)) / 3.0);
                }
            }
        }
    }
    let sv = SecondVariation { diag, offdiag };
    let neg = sv.is_negative_definite();
    Ok((sv, neg))
}

/// Sign-change test on an arbitrary configuration: the Jacobi field started
/// at the first point vanishes again before the last.
pub fn configuration_field_vanishes(c: &SampledCurve, s_list: &[f64]) -> Result<bool> {
    if s_list.len() < 3 {
        return Err(Error::Domain("configuration needs at least 3 points".into()));
    }
    let chords: Vec<Chord> = s_list.windows(2).map(|w| chord_between(c, w[0], w[1]).map(|x| x.0)).collect::<Result<_>>()?;
    Ok(field_vanishes_again(c.kind, &chords))
}

fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Hit counts per window over `samples` phase points drawn from `sin φ ds dφ`.
/// Sample `i` uses stream `i` of `seed`, so counts do not depend on `workers`.
pub fn estimate_delta_billiard_windows(
    c: &SampledCurve,
    windows: &[usize],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<DeltaEstimate>> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if windows.is_empty() || windows.iter().any(|&n| n < 2) {
        return Err(Error::Domain(format!("windows must be at least 2 bounces, got {windows:?}")));
    }
    let counts = run_pool(workers, || {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut stream = SeededStream::new(seed, i);
                let u = draw_billiard_point(c, &mut stream);
                classify_m_windows(c, u, windows)
            })
            .try_fold(
                || vec![0u64; windows.len()],
                |mut acc, flags| {
                    for (a, f) in acc.iter_mut().zip(flags?) {
                        *a += f as u64;
                    }
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(|| vec![0u64; windows.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
    })??;
    windows
        .iter()
        .zip(counts)
        .map(|(&n, hits)| DeltaEstimate::from_counts(hits, samples, Window::Bounces(n), seed))
        .collect()
}

pub fn estimate_delta_billiard(c: &SampledCurve, n: usize, samples: u64, seed: u64, workers: usize) -> Result<DeltaEstimate> {
    Ok(estimate_delta_billiard_windows(c, &[n], samples, seed, workers)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{build_curve, CurveSpec};
    use crate::geometry::jacobi_flight;
    use std::f64::consts::FRAC_PI_2;

    fn circle() -> SampledCurve {
        build_curve(&CurveSpec::unit_circle(), 1024).unwrap()
    }

    #[test]
    fn circle_diameter() {
        let c = circle();
        let (v, ch) = billiard_step(&c, PhasePoint::new(0.0, FRAC_PI_2)).unwrap();
        assert!((v.s - PI).abs() < 1e-12);
        assert!((v.phi - FRAC_PI_2).abs() < 1e-12);
        assert!((ch.length - 2.0).abs() < 1e-12);
    }

    #[test]
    fn circle_chord_subtends_twice_the_angle() {
        let c = circle();
        let (v, ch) = billiard_step(&c, PhasePoint::new(0.0, PI / 3.0)).unwrap();
        assert!((v.s - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((v.phi - PI / 3.0).abs() < 1e-12);
        assert!((ch.length - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn circle_diameter_derivatives() {
        let c = circle();
        let g = generating_derivatives(&c, 0.0, PI).unwrap();
        assert!((g.l - 2.0).abs() < 1e-12);
        assert!((g.l11 + 0.5).abs() < 1e-12);
        assert!((g.l12 - 0.5).abs() < 1e-12);
        assert!((g.l22 + 0.5).abs() < 1e-12);
        assert!((g.l11 + 2.0 * g.l12 + g.l22).abs() < 1e-12);
    }

    #[test]
    fn derivative_identity_is_algebraic() {
        let c = build_curve(&CurveSpec::ellipse(2.0, 1.0), 1024).unwrap();
        for (sx, sy) in [(0.1, 3.0), (1.0, 7.5), (4.0, 5.2)] {
            let g = generating_derivatives(&c, sx, sy).unwrap();
            let (sp, ss) = ((-g.l1).acos().sin(), g.l2.acos().sin());
            let rhs = (sp + ss).powi(2) / g.l - c.curvature_at(sx) * sp - c.curvature_at(sy) * ss;
            assert!((g.l11 + 2.0 * g.l12 + g.l22 - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn coincident_points_rejected() {
        let c = circle();
        assert!(matches!(generating_derivatives(&c, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(second_variation(&c, &[0.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn circle_diametral_second_variation() {
        let c = circle();
        let (sv, neg) = second_variation(&c, &[0.0, PI, TAU]).unwrap();
        assert_eq!(sv.size(), 1);
        assert!((sv.diag[0] + 1.0).abs() < 1e-12);
        assert!(neg);
    }

    #[test]
    fn mirror_equation_on_the_plane() {
        // point source at distance a = 1 before a diametral reflection off the unit circle
        let a = 1.0;
        let s = jacobi_flight(SurfaceKind::Flat, JacobiState::new(0.0, 1.0), a).unwrap();
        let r = reflect_jacobi(s, 1.0, FRAC_PI_2).unwrap();
        let b = -r.j / r.jp;
        assert!((b - 1.0).abs() < 1e-15);
        assert!((1.0 / a + 1.0 / b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reflection_keeps_rays_through_the_point() {
        let r = reflect_jacobi(JacobiState::new(0.0, 0.7), 3.0, 0.4).unwrap();
        assert_eq!(r, JacobiState::new(0.0, 0.7));
        assert!(reflect_jacobi(JacobiState::new(1.0, 0.0), -1.0, 0.4).is_err());
        assert!(reflect_jacobi(JacobiState::new(1.0, 0.0), 1.0, PI).is_err());
    }

    #[test]
    fn mirror_equation_on_the_sphere() {
        // beam from a boundary point of a geodesic circle of radius r along a diameter
        for r in [0.3, 0.7, 1.2] {
            let k = 1.0 / f64::tan(r);
            let s = jacobi_flight(SurfaceKind::Sphere, JacobiState::new(0.0, 1.0), 2.0 * r).unwrap();
            let out = reflect_jacobi(s, k, FRAC_PI_2).unwrap();
            // zero of J(t) = j cos t + jp sin t
            let b = (-out.j).atan2(out.jp).rem_euclid(PI);
            let expected = (2.0 * k - 1.0 / (2.0 * r).tan()).recip().atan().rem_euclid(PI);
            assert!((b - expected).abs() < 1e-12, "r = {r}");
            // cot-form mirror equation
            assert!((1.0 / (2.0 * r).tan() + 1.0 / b.tan() - 2.0 * k).abs() < 1e-10);
        }
    }

    #[test]
    fn mirror_equation_on_the_hyperbolic_plane() {
        let r: f64 = 0.8;
        let k = 1.0 / r.tanh();
        let s = jacobi_flight(SurfaceKind::Hyperbolic, JacobiState::new(0.0, 1.0), 2.0 * r).unwrap();
        let out = reflect_jacobi(s, k, FRAC_PI_2).unwrap();
        // J(t) = j cosh t + jp sinh t vanishes where tanh t = −j/jp
        let b = (-out.j / out.jp).atanh();
        assert!((1.0 / (2.0 * r).tanh() + 1.0 / b.tanh() - 2.0 * k).abs() < 1e-10);
    }

    #[test]
    fn circle_orbits_are_minimal() {
        let c = circle();
        for (s, phi) in [(0.0, 0.3), (1.0, 1.2), (2.0, FRAC_PI_2), (5.0, 2.9)] {
            assert!(!classify_m_window(&c, PhasePoint::new(s, phi), 16).unwrap());
        }
    }

    #[test]
    fn ellipse_minor_axis_orbit_is_not_minimal() {
        let c = build_curve(&CurveSpec::ellipse(2.0, 1.0), 2048).unwrap();
        let top = PhasePoint::new(c.perimeter / 4.0, FRAC_PI_2);
        assert!(classify_m_window(&c, top, 16).unwrap());
        let cfg = orbit_configuration(&c, top, 2).unwrap();
        let (_, neg) = second_variation(&c, &cfg).unwrap();
        assert!(!neg);
    }

    #[test]
    fn window_size_is_validated() {
        let c = circle();
        assert!(classify_m_window(&c, PhasePoint::new(0.0, 1.0), 1).is_err());
        assert!(classify_m_window(&c, PhasePoint::new(0.0, 0.0), 4).is_err());
    }

    #[test]
    fn circle_delta_is_zero() {
        let c = circle();
        let est = estimate_delta_billiard(&c, 16, 2_000, 5, 1).unwrap();
        assert_eq!(est.hits, 0);
        assert_eq!(est.delta_hat, 0.0);
        assert_eq!(est.window, Window::Bounces(16));
    }

    #[test]
    fn ldl_matches_known_matrix() {
        let sv = SecondVariation { diag: vec![-2.0, -2.0, -2.0], offdiag: vec![1.0, 1.0] };
        assert!(sv.is_negative_definite());
        let piv = sv.ldl_pivots();
        assert!((piv[2] + 4.0 / 3.0).abs() < 1e-15);
        let sv = SecondVariation { diag: vec![-1.0, -1.0], offdiag: vec![1.0] };
        assert!(!sv.is_negative_definite());
    }
}
