//! Closed strictly convex boundary curves on the model surfaces.
//!
//! A curve is kept in its analytic parametrization `t ∈ [0, 2π)` together
//! with a spectrally accurate arclength map `s(t)` (Fourier series of the
//! parametric speed). Positions, tangents and curvature at any arclength are
//! evaluated exactly from the parametrization after inverting `s(t)` by a
//! bracketed Newton iteration; the uniform-arclength sample arrays are kept
//! for inspection and fast lookup.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SurfaceKind, SurfacePoint, TangentDir, Vec3};

/// Minimum number of arclength samples accepted by [`build_curve`].
pub const MIN_SAMPLES: usize = 256;
pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_TOL_GB: f64 = 1e-6;
/// Curves on the sphere must stay this far inside the hemisphere of their center.
pub const HEMISPHERE_MARGIN: f64 = 1e-3;
const CONVEXITY_OVERSAMPLING: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub m: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// `c0 + Σ a_m cos mθ + b_m sin mθ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigSeries {
    pub c0: f64,
    #[serde(default)]
    pub terms: Vec<Harmonic>,
}

impl TrigSeries {
    pub fn constant(c0: f64) -> Self {
        Self { c0, terms: Vec::new() }
    }

    /// Value and first three derivatives.
    pub fn eval(&self, theta: f64) -> [f64; 4] {
        let mut out = [self.c0, 0.0, 0.0, 0.0];
        for h in &self.terms {
            let m = h.m as f64;
            let (s, c) = (m * theta).sin_cos();
            let v = h.a * c + h.b * s;
            let dv = m * (h.b * c - h.a * s);
            out[0] += v;
            out[1] += dv;
            out[2] -= m * m * v;
            out[3] -= m * m * dv;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveShape {
    /// `(a cos t, b sin t)`, planar only.
    Ellipse { a: f64, b: f64 },
    /// Planar curve with support function `h(θ) = c0 + Σ_{m≥2} a_m cos mθ + b_m sin mθ`.
    SupportFourier {
        c0: f64,
        #[serde(default)]
        harmonics: Vec<Harmonic>,
    },
    /// Geodesic circle of radius `r` about the model origin.
    GeodesicCircle { r: f64 },
    /// Polar graph `θ ↦ exp_center(ρ(θ) e(θ))` on the sphere or hyperbolic plane.
    RadialGraph {
        #[serde(default)]
        center: Option<SurfacePoint>,
        rho: TrigSeries,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub surface: SurfaceKind,
    #[serde(flatten)]
    pub shape: CurveShape,
}

impl CurveSpec {
    pub fn ellipse(a: f64, b: f64) -> Self {
        Self { surface: SurfaceKind::Flat, shape: CurveShape::Ellipse { a, b } }
    }

    pub fn support_fourier(c0: f64, harmonics: Vec<Harmonic>) -> Self {
        Self { surface: SurfaceKind::Flat, shape: CurveShape::SupportFourier { c0, harmonics } }
    }

    pub fn unit_circle() -> Self {
        Self::support_fourier(1.0, Vec::new())
    }

    pub fn geodesic_circle(surface: SurfaceKind, r: f64) -> Self {
        Self { surface, shape: CurveShape::GeodesicCircle { r } }
    }

    pub fn radial_graph(surface: SurfaceKind, center: Option<SurfacePoint>, rho: TrigSeries) -> Self {
        Self { surface, shape: CurveShape::RadialGraph { center, rho } }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CurveOptions {
    pub n_samples: usize,
    pub tol_gb: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self { n_samples: DEFAULT_SAMPLES, tol_gb: DEFAULT_TOL_GB }
    }
}

/// Center point with an oriented orthonormal tangent basis there.
#[derive(Debug, Clone, Copy)]
struct CenterFrame {
    c: Vec3,
    e1: Vec3,
    e2: Vec3,
}

impl CenterFrame {
    fn new(kind: SurfaceKind, center: &SurfacePoint) -> Result<Self> {
        center.validate(kind)?;
        let c = center.0;
        let e1 = match kind {
            SurfaceKind::Flat => Vec3::new(1.0, 0.0, 0.0),
            _ => {
                let seed = if c.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                let v = kind.project_tangent(&c, &seed);
                v / kind.norm(&v)
            }
        };
        let e2 = kind.left_normal(&c, &e1);
        Ok(Self { c, e1, e2 })
    }
}

#[derive(Debug, Clone)]
enum Param {
    Ellipse { a: f64, b: f64 },
    Support { h: TrigSeries },
    Radial { kind: SurfaceKind, frame: CenterFrame, rho: TrigSeries, circle: Option<f64> },
}

/// Position and its first two parameter derivatives.
#[derive(Debug, Clone, Copy)]
struct Jet {
    pos: Vec3,
    d1: Vec3,
    d2: Vec3,
}

impl Param {
    fn jet(&self, t: f64) -> Jet {
        match self {
            Param::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                Jet {
                    pos: Vec3::new(a * c, b * s, 0.0),
                    d1: Vec3::new(-a * s, b * c, 0.0),
                    d2: Vec3::new(-a * c, -b * s, 0.0),
                }
            }
            Param::Support { h } => {
                let [h0, h1, h2, h3] = h.eval(t);
                let (s, c) = t.sin_cos();
                let u = Vec3::new(c, s, 0.0);
                let up = Vec3::new(-s, c, 0.0);
                let rho = h0 + h2;
                Jet { pos: u * h0 + up * h1, d1: up * rho, d2: up * (h1 + h3) - u * rho }
            }
            Param::Radial { kind, frame, rho, .. } => {
                let [r0, r1, r2, _] = rho.eval(t);
                let kappa = kind.kappa() as f64;
                let (cs, sn) = (kind.cs(r0), kind.sn(r0));
                let (s, c) = t.sin_cos();
                let e = frame.e1 * c + frame.e2 * s;
                let ep = frame.e2 * c - frame.e1 * s;
                let pos = frame.c * cs + e * sn;
                let d1 = frame.c * (-kappa * sn * r1) + e * (cs * r1) + ep * sn;
                let d2 = frame.c * (-kappa * (cs * r1 * r1 + sn * r2))
                    + e * (cs * r2 - kappa * sn * r1 * r1 - sn)
                    + ep * (2.0 * cs * r1);
                Jet { pos, d1, d2 }
            }
        }
    }

    fn curvature(&self, kind: SurfaceKind, t: f64, jet: &Jet) -> f64 {
        match self {
            Param::Ellipse { a, b } => {
                let (s, c) = t.sin_cos();
                a * b / (a * a * s * s + b * b * c * c).powf(1.5)
            }
            Param::Support { h } => {
                let [h0, _, h2, _] = h.eval(t);
                1.0 / (h0 + h2)
            }
            Param::Radial { circle: Some(r), .. } => kind.ct(*r),
            Param::Radial { .. } => {
                let speed = kind.norm(&jet.d1);
                let num = match kind {
                    SurfaceKind::Flat => jet.d1.x * jet.d2.y - jet.d1.y * jet.d2.x,
                    _ => jet.pos.dot(&jet.d1.cross(&jet.d2)),
                };
                num / (speed * speed * speed)
            }
        }
    }
}

/// `s(t) = c0·t + Σ (α_k sin kt + β_k (1 − cos kt)) / k` for speed `c0 + Σ α_k cos kt + β_k sin kt`.
#[derive(Debug, Clone)]
struct ArcLength {
    c0: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ArcLength {
    fn from_speed_samples(speed: &[f64]) -> Self {
        let m = speed.len();
        let c0 = speed.iter().sum::<f64>() / m as f64;
        let table: Vec<(f64, f64)> = (0..m).map(|j| (TAU * j as f64 / m as f64).sin_cos()).collect();
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut quiet = 0;
        for k in 1..m / 2 {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in speed.iter().enumerate() {
                let (s, c) = table[(k * j) % m];
                a += v * c;
                b += v * s;
            }
            a *= 2.0 / m as f64;
            b *= 2.0 / m as f64;
            alpha.push(a);
            beta.push(b);
            if a.abs() + b.abs() < 1e-16 * c0 {
                quiet += 1;
                if quiet >= 8 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        while !alpha.is_empty() && alpha.last().unwrap().abs() + beta.last().unwrap().abs() < 1e-16 * c0 {
            alpha.pop();
            beta.pop();
        }
        Self { c0, alpha, beta }
    }

    fn perimeter(&self) -> f64 {
        TAU * self.c0
    }

    /// Arclength and speed at `t ∈ [0, 2π]`.
    fn eval(&self, t: f64) -> (f64, f64) {
        let (s1, c1) = t.sin_cos();
        let (mut sk, mut ck) = (s1, c1);
        let mut s = self.c0 * t;
        let mut v = self.c0;
        for (i, (a, b)) in self.alpha.iter().zip(&self.beta).enumerate() {
            let k = (i + 1) as f64;
            s += (a * sk + b * (1.0 - ck)) / k;
            v += a * ck + b * sk;
            let next_s = sk * c1 + ck * s1;
            ck = ck * c1 - sk * s1;
            sk = next_s;
        }
        (s, v)
    }

    /// Inverts `s(t)` on the bracket `[lo, hi]`, which must contain the answer.
    fn invert(&self, s: f64, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
        let mut t = guess.clamp(lo, hi);
        for _ in 0..100 {
            let (st, v) = self.eval(t);
            let r = st - s;
            if r > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let mut next = t - r / v;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - t).abs();
            t = next;
            if step <= 4.0 * f64::EPSILON * t.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON {
                break;
            }
        }
        t
    }
}

/// Point, unit tangent, inward (left) unit normal and geodesic curvature at a parameter value.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub t: f64,
    pub pos: Vec3,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub k: f64,
}

#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub kind: SurfaceKind,
    pub spec: CurveSpec,
    pub n_samples: usize,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub points: Vec<SurfacePoint>,
    pub tangents: Vec<TangentDir>,
    pub k: Vec<f64>,
    pub perimeter: f64,
    pub area: f64,
    pub k_min: f64,
    /// `∫ k ds − (2π − κA)`.
    pub gb_residual: f64,
    /// Containment in an open hemisphere (always `false` off the sphere).
    pub in_hemisphere: bool,
    param: Param,
    arclength: ArcLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveInvariants {
    pub perimeter: f64,
    pub area: f64,
    pub k_min: f64,
    pub gb_residual: f64,
    pub total_curvature: f64,
    /// Area recomputed by an independent route: Green's theorem on the plane,
    /// Gauss–Bonnet from `∫ k ds` on the curved surfaces.
    pub area_independent: f64,
}

pub fn build_curve(spec: &CurveSpec, n_samples: usize) -> Result<SampledCurve> {
    build_curve_with(spec, &CurveOptions { n_samples, ..CurveOptions::default() })
}

pub fn build_curve_with(spec: &CurveSpec, opts: &CurveOptions) -> Result<SampledCurve> {
    let n = opts.n_samples;
    if n < MIN_SAMPLES {
        return Err(Error::Domain(format!("n_samples must be at least {MIN_SAMPLES}, got {n}")));
    }
    let kind = spec.surface;
    let (param, mut in_hemisphere) = make_param(spec)?;

    // strict convexity and containment on an oversampled parameter grid
    let fine = CONVEXITY_OVERSAMPLING * n;
    for i in 0..fine {
        let t = TAU * i as f64 / fine as f64;
        if let Param::Support { h } = &param {
            let [h0, _, h2, _] = h.eval(t);
            if !(h0 + h2 > 0.0) {
                return Err(Error::NotConvex { parameter: t, curvature: 1.0 / (h0 + h2) });
            }
            continue;
        }
        let jet = param.jet(t);
        let k = param.curvature(kind, t, &jet);
        if !(k > 0.0) {
            return Err(Error::NotConvex { parameter: t, curvature: k });
        }
        if let Param::Radial { rho, .. } = &param {
            let r = rho.eval(t)[0];
            if kind == SurfaceKind::Sphere && r >= FRAC_PI_2 - HEMISPHERE_MARGIN {
                return Err(Error::OutsideHemisphere { parameter: t, radius: r });
            }
        }
    }
    if kind == SurfaceKind::Sphere {
        if let Param::Radial { circle: None, .. } = &param {
            in_hemisphere = true;
        }
    }

    // arclength map and quadratures on the uniform parameter grid
    let dt = TAU / n as f64;
    let mut speed = Vec::with_capacity(n);
    let mut total_k = 0.0;
    for j in 0..n {
        let t = dt * j as f64;
        let jet = param.jet(t);
        let v = kind.norm(&jet.d1);
        speed.push(v);
        total_k += param.curvature(kind, t, &jet) * v;
    }
    total_k *= dt;
    let arclength = ArcLength::from_speed_samples(&speed);
    let perimeter = arclength.perimeter();

    let area = match (&spec.shape, kind) {
        (CurveShape::Ellipse { a, b }, _) => PI * a * b,
        (CurveShape::SupportFourier { c0, harmonics }, _) => {
            PI * c0 * c0
                + 0.5 * PI * harmonics.iter().map(|h| (1.0 - (h.m as f64).powi(2)) * (h.a * h.a + h.b * h.b)).sum::<f64>()
        }
        (CurveShape::GeodesicCircle { r }, SurfaceKind::Flat) => PI * r * r,
        (CurveShape::GeodesicCircle { r }, SurfaceKind::Sphere) => TAU * (1.0 - r.cos()),
        (CurveShape::GeodesicCircle { r }, SurfaceKind::Hyperbolic) => TAU * (r.cosh() - 1.0),
        (CurveShape::RadialGraph { rho, .. }, _) => radial_area(kind, rho, n),
    };
    let gb_residual = total_k - (TAU - kind.kappa() as f64 * area);
    if !(gb_residual.abs() <= opts.tol_gb) {
        return Err(Error::GaussBonnet { residual: gb_residual, tolerance: opts.tol_gb });
    }

    let mut curve = SampledCurve {
        kind,
        spec: spec.clone(),
        n_samples: n,
        s_grid: Vec::with_capacity(n),
        t_grid: Vec::with_capacity(n),
        points: Vec::with_capacity(n),
        tangents: Vec::with_capacity(n),
        k: Vec::with_capacity(n),
        perimeter,
        area,
        k_min: f64::INFINITY,
        gb_residual,
        in_hemisphere,
        param,
        arclength,
    };
    let ds = perimeter / n as f64;
    let mut prev_t = 0.0;
    for j in 0..n {
        let s = ds * j as f64;
        let t = if j == 0 { 0.0 } else { curve.arclength.invert(s, prev_t, TAU, TAU * s / perimeter) };
        prev_t = t;
        let f = curve.frame_at_t(t);
        curve.s_grid.push(s);
        curve.t_grid.push(t);
        curve.points.push(SurfacePoint(f.pos));
        curve.tangents.push(TangentDir(f.tangent));
        curve.k.push(f.k);
    }
    curve.k_min = curve.refined_k_min();
    Ok(curve)
}

fn make_param(spec: &CurveSpec) -> Result<(Param, bool)> {
    let kind = spec.surface;
    let flat_only = |name: &str| -> Result<()> {
        if kind != SurfaceKind::Flat {
            return Err(Error::Domain(format!("{name} curves are defined on the flat surface only")));
        }
        Ok(())
    };
    let finite = |x: f64, what: &str| -> Result<()> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must be finite")))
        }
    };
    match &spec.shape {
        CurveShape::Ellipse { a, b } => {
            flat_only("ellipse")?;
            finite(*a, "a")?;
            finite(*b, "b")?;
            if !(*a >= *b && *b > 0.0) {
                return Err(Error::Domain(format!("ellipse needs a ≥ b > 0, got a = {a}, b = {b}")));
            }
            Ok((Param::Ellipse { a: *a, b: *b }, false))
        }
        CurveShape::SupportFourier { c0, harmonics } => {
            flat_only("support-function")?;
            finite(*c0, "c0")?;
            for h in harmonics {
                if h.m < 2 {
                    return Err(Error::Domain(format!("support harmonics need m ≥ 2, got m = {}", h.m)));
                }
                finite(h.a, "harmonic coefficient")?;
                finite(h.b, "harmonic coefficient")?;
            }
            let h = TrigSeries { c0: *c0, terms: harmonics.clone() };
            Ok((Param::Support { h }, false))
        }
        CurveShape::GeodesicCircle { r } => {
            finite(*r, "r")?;
            if !(*r > 0.0) {
                return Err(Error::Domain(format!("geodesic circle radius must be positive, got {r}")));
            }
            if kind == SurfaceKind::Sphere && *r >= FRAC_PI_2 {
                return Err(Error::Domain(format!("spherical circle radius must be below π/2, got {r}")));
            }
            let frame = CenterFrame::new(kind, &kind.origin())?;
            let param = Param::Radial { kind, frame, rho: TrigSeries::constant(*r), circle: Some(*r) };
            Ok((param, kind == SurfaceKind::Sphere))
        }
        CurveShape::RadialGraph { center, rho } => {
            if kind == SurfaceKind::Flat {
                return Err(Error::Domain("radial graphs are defined on the sphere and hyperbolic plane".into()));
            }
            finite(rho.c0, "rho.c0")?;
            for h in &rho.terms {
                finite(h.a, "rho coefficient")?;
                finite(h.b, "rho coefficient")?;
            }
            let frame = CenterFrame::new(kind, &center.unwrap_or_else(|| kind.origin()))?;
            let min_rho = rho.c0 - rho.terms.iter().map(|h| h.a.hypot(h.b)).sum::<f64>();
            if !(min_rho > 0.0) {
                return Err(Error::Domain(format!("radial function may reach zero (lower bound {min_rho})")));
            }
            Ok((Param::Radial { kind, frame, rho: rho.clone(), circle: None }, false))
        }
    }
}

fn radial_area(kind: SurfaceKind, rho: &TrigSeries, n: usize) -> f64 {
    let dt = TAU / n as f64;
    let sum: f64 = (0..n)
        .map(|j| {
            let r = rho.eval(dt * j as f64)[0];
            match kind {
                SurfaceKind::Flat => 0.5 * r * r,
                SurfaceKind::Sphere => 1.0 - r.cos(),
                SurfaceKind::Hyperbolic => r.cosh() - 1.0,
            }
        })
        .sum();
    sum * dt
}

impl SampledCurve {
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub(crate) fn frame_at_t(&self, t: f64) -> Frame {
        let jet = self.param.jet(t);
        let speed = self.kind.norm(&jet.d1);
        let tangent = jet.d1 / speed;
        let normal = self.kind.left_normal(&jet.pos, &tangent);
        let k = self.param.curvature(self.kind, t, &jet);
        Frame { t, pos: jet.pos, tangent, normal, k }
    }

    pub(crate) fn position_at_t(&self, t: f64) -> Vec3 {
        self.param.jet(t).pos
    }

    /// Position and parameter derivative.
    pub(crate) fn position_d1_at_t(&self, t: f64) -> (Vec3, Vec3) {
        let jet = self.param.jet(t);
        (jet.pos, jet.d1)
    }

    /// Reduces an arclength into `[0, P)`.
    pub fn reduce(&self, s: f64) -> f64 {
        let r = s.rem_euclid(self.perimeter);
        if r >= self.perimeter {
            0.0
        } else {
            r
        }
    }

    /// Arclength of parameter `t` (any real), reduced into `[0, P)`.
    pub(crate) fn s_of_t(&self, t: f64) -> f64 {
        let tr = t.rem_euclid(TAU);
        self.reduce(self.arclength.eval(tr).0)
    }

    /// Parameter in `[0, 2π)` of arclength `s` (any real).
    pub(crate) fn t_of_s(&self, s: f64) -> f64 {
        let s = self.reduce(s);
        let n = self.n_samples;
        let ds = self.perimeter / n as f64;
        let idx = ((s / ds) as usize).min(n - 1);
        let lo = self.t_grid[idx];
        let hi = if idx + 1 < n { self.t_grid[idx + 1] } else { TAU };
        let frac = (s - self.s_grid[idx]) / ds;
        let t = self.arclength.invert(s, lo, hi, lo + frac * (hi - lo));
        if t >= TAU {
            0.0
        } else {
            t
        }
    }

    pub(crate) fn frame_at_s(&self, s: f64) -> Frame {
        self.frame_at_t(self.t_of_s(s))
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.frame_at_s(s).k
    }

    fn refined_k_min(&self) -> f64 {
        let (j, _) = self
            .k
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &k)| if k < acc.1 { (i, k) } else { acc });
        let n = self.n_samples;
        let lo = if j == 0 { self.t_grid[n - 1] - TAU } else { self.t_grid[j - 1] };
        let hi = if j + 1 < n { self.t_grid[j + 1] } else { TAU };
        let k_at = |t: f64| self.frame_at_t(t).k;
        let (mut a, mut b) = (lo, hi);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (k_at(x1), k_at(x2));
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = k_at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = k_at(x2);
            }
        }
        self.k[j].min(f1).min(f2)
    }
}

pub fn curve_invariants(c: &SampledCurve) -> CurveInvariants {
    let n = c.n_samples;
    let dt = TAU / n as f64;
    let mut total_k = 0.0;
    let mut green = 0.0;
    for j in 0..n {
        let t = dt * j as f64;
        let jet = c.param.jet(t);
        total_k += c.param.curvature(c.kind, t, &jet) * c.kind.norm(&jet.d1);
        green += jet.pos.x * jet.d1.y - jet.pos.y * jet.d1.x;
    }
    total_k *= dt;
    let area_independent = match c.kind {
        SurfaceKind::Flat => 0.5 * green * dt,
        kind => (TAU - total_k) / kind.kappa() as f64,
    };
    CurveInvariants {
        perimeter: c.perimeter,
        area: c.area,
        k_min: c.k_min,
        gb_residual: total_k - (TAU - c.kind.kappa() as f64 * c.area),
        total_curvature: total_k,
        area_independent,
    }
}

/// Position, unit tangent and curvature at arclength `s` (reduced mod `P`).
pub fn point_frame_at(c: &SampledCurve, s: f64) -> (SurfacePoint, TangentDir, f64) {
    let f = c.frame_at_s(s);
    (SurfacePoint(f.pos), TangentDir(f.tangent), f.k)
}
