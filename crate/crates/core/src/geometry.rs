//! Kernels for the three constant-curvature model surfaces.
//!
//! Every point is stored as a 3-vector:
//!
//! * `Flat`: `(x, y, 0)` in the Euclidean plane,
//! * `Sphere`: a unit vector in R³,
//! * `Hyperbolic`: a point of the upper sheet of the hyperboloid
//!   `x² + y² − z² = −1`, `z > 0`, with the Minkowski form `(+, +, −)`.
//!
//! Orientation is fixed so that the left normal of a unit tangent `t` at `p`
//! is `(−t_y, t_x)` on the plane, `p × t` on the sphere and `J(p × t)` on the
//! hyperboloid, where `J = diag(1, 1, −1)`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const MODEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Flat,
    Sphere,
    Hyperbolic,
}

impl SurfaceKind {
    /// Gaussian curvature of the model surface.
    pub fn kappa(self) -> i32 {
        match self {
            SurfaceKind::Flat => 0,
            SurfaceKind::Sphere => 1,
            SurfaceKind::Hyperbolic => -1,
        }
    }

    pub fn origin(self) -> SurfacePoint {
        match self {
            SurfaceKind::Flat => SurfacePoint(Vec3::zeros()),
            SurfaceKind::Sphere | SurfaceKind::Hyperbolic => SurfacePoint(Vec3::new(0.0, 0.0, 1.0)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Flat => "flat",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Hyperbolic => "hyperbolic",
        }
    }

    /// Model bilinear form.
    #[inline]
    pub fn dot(self, u: &Vec3, v: &Vec3) -> f64 {
        match self {
            SurfaceKind::Flat | SurfaceKind::Sphere => u.dot(v),
            SurfaceKind::Hyperbolic => u.x * v.x + u.y * v.y - u.z * v.z,
        }
    }

    /// Generalized sine `sn_κ(L)`: the Jacobi field with `J(0) = 0, J'(0) = 1`.
    #[inline]
    pub fn sn(self, len: f64) -> f64 {
        match self {
            SurfaceKind::Flat => len,
            SurfaceKind::Sphere => len.sin(),
            SurfaceKind::Hyperbolic => len.sinh(),
        }
    }

    /// Generalized cosine `cs_κ(L)`: the Jacobi field with `J(0) = 1, J'(0) = 0`.
    #[inline]
    pub fn cs(self, len: f64) -> f64 {
        match self {
            SurfaceKind::Flat => 1.0,
            SurfaceKind::Sphere => len.cos(),
            SurfaceKind::Hyperbolic => len.cosh(),
        }
    }

    /// `cs_κ / sn_κ`: the Hessian of the distance function across a geodesic of length `L`.
    #[inline]
    pub fn ct(self, len: f64) -> f64 {
        match self {
            SurfaceKind::Flat => 1.0 / len,
            SurfaceKind::Sphere => 1.0 / len.tan(),
            SurfaceKind::Hyperbolic => 1.0 / len.tanh(),
        }
    }

    /// Left unit normal of the unit tangent `t` at `p`.
    #[inline]
    pub fn left_normal(self, p: &Vec3, t: &Vec3) -> Vec3 {
        match self {
            SurfaceKind::Flat => Vec3::new(-t.y, t.x, 0.0),
            SurfaceKind::Sphere => p.cross(t),
            SurfaceKind::Hyperbolic => {
                let c = p.cross(t);
                Vec3::new(c.x, c.y, -c.z)
            }
        }
    }

    /// Projects an ambient vector onto the tangent plane at `p`.
    #[inline]
    pub fn project_tangent(self, p: &Vec3, v: &Vec3) -> Vec3 {
        match self {
            SurfaceKind::Flat => Vec3::new(v.x, v.y, 0.0),
            SurfaceKind::Sphere => v - p * p.dot(v),
            SurfaceKind::Hyperbolic => v + p * self.dot(p, v),
        }
    }

    #[inline]
    pub(crate) fn norm(self, v: &Vec3) -> f64 {
        self.dot(v, v).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SurfacePoint(pub Vec3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TangentDir(pub Vec3);

impl SurfacePoint {
    pub fn planar(x: f64, y: f64) -> Self {
        SurfacePoint(Vec3::new(x, y, 0.0))
    }

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        SurfacePoint(Vec3::new(x, y, z))
    }

    pub fn validate(&self, kind: SurfaceKind) -> Result<()> {
        let v = &self.0;
        if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
            return Err(Error::InvalidCoordinates(format!("non-finite point {v:?}")));
        }
        match kind {
            SurfaceKind::Flat => {
                if v.z != 0.0 {
                    return Err(Error::InvalidCoordinates(format!("planar point with z = {}", v.z)));
                }
            }
            SurfaceKind::Sphere => {
                let r = (v.norm_squared() - 1.0).abs();
                if r > MODEL_TOL {
                    return Err(Error::InvalidCoordinates(format!("|p|² − 1 = {r:e} on the sphere")));
                }
            }
            SurfaceKind::Hyperbolic => {
                let scale = v.norm_squared().max(1.0);
                let r = (kind.dot(v, v) + 1.0).abs();
                if r > MODEL_TOL * scale || v.z <= 0.0 {
                    return Err(Error::InvalidCoordinates(format!(
                        "point {v:?} is not on the upper hyperboloid sheet (residual {r:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl TangentDir {
    pub fn planar(x: f64, y: f64) -> Self {
        TangentDir(Vec3::new(x, y, 0.0))
    }

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        TangentDir(Vec3::new(x, y, z))
    }

    pub fn validate(&self, kind: SurfaceKind, at: &SurfacePoint) -> Result<()> {
        let d = &self.0;
        let p = &at.0;
        let scale = p.norm_squared().max(1.0).sqrt() * d.norm().max(1.0);
        let unit = (kind.dot(d, d) - 1.0).abs();
        if unit > MODEL_TOL * scale * scale {
            return Err(Error::InvalidCoordinates(format!("direction not unit: residual {unit:e}")));
        }
        let tangency = match kind {
            SurfaceKind::Flat => d.z.abs(),
            _ => kind.dot(p, d).abs(),
        };
        if tangency > MODEL_TOL * scale {
            return Err(Error::InvalidCoordinates(format!("direction not tangent: residual {tangency:e}")));
        }
        Ok(())
    }
}

/// Transversal Jacobi field value and its arclength derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiState {
    pub j: f64,
    pub jp: f64,
}

impl JacobiState {
    pub fn new(j: f64, jp: f64) -> Self {
        Self { j, jp }
    }

    pub fn wronskian(&self, other: &JacobiState) -> f64 {
        self.j * other.jp - other.j * self.jp
    }
}

#[inline]
pub(crate) fn advance_unchecked(kind: SurfaceKind, p: &Vec3, d: &Vec3, s: f64) -> (Vec3, Vec3) {
    match kind {
        SurfaceKind::Flat => (p + d * s, *d),
        SurfaceKind::Sphere => {
            let (sn, cs) = s.sin_cos();
            (p * cs + d * sn, d * cs - p * sn)
        }
        SurfaceKind::Hyperbolic => {
            let (sn, cs) = (s.sinh(), s.cosh());
            (p * cs + d * sn, p * sn + d * cs)
        }
    }
}

/// Point and parallel-transported direction after arclength `s` along the geodesic from `(p, d)`.
pub fn geodesic_advance(
    kind: SurfaceKind,
    p: &SurfacePoint,
    d: &TangentDir,
    s: f64,
) -> Result<(SurfacePoint, TangentDir)> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite arclength {s}")));
    }
    p.validate(kind)?;
    d.validate(kind, p)?;
    let (q, e) = advance_unchecked(kind, &p.0, &d.0, s);
    Ok((SurfacePoint(q), TangentDir(e)))
}

#[inline]
pub(crate) fn distance_unchecked(kind: SurfaceKind, p: &Vec3, q: &Vec3) -> f64 {
    match kind {
        SurfaceKind::Flat => (q - p).norm(),
        SurfaceKind::Sphere => p.cross(q).norm().atan2(p.dot(q)),
        SurfaceKind::Hyperbolic => {
            let diff = q - p;
            2.0 * (0.5 * kind.norm(&diff)).asinh()
        }
    }
}

pub fn geodesic_distance(kind: SurfaceKind, p: &SurfacePoint, q: &SurfacePoint) -> Result<f64> {
    p.validate(kind)?;
    q.validate(kind)?;
    if kind == SurfaceKind::Sphere && (p.0 + q.0).norm() < 1e-12 {
        return Err(Error::Domain("antipodal points have no unique geodesic distance".into()));
    }
    Ok(distance_unchecked(kind, &p.0, &q.0))
}

/// Initial unit direction at `p` of the minimizing geodesic towards `q`.
#[inline]
pub(crate) fn direction_towards(kind: SurfaceKind, p: &Vec3, q: &Vec3) -> Vec3 {
    let v = match kind {
        SurfaceKind::Flat => q - p,
        _ => kind.project_tangent(p, q),
    };
    v / kind.norm(&v)
}

/// Free flight of a Jacobi field over length `len`: solves `J'' + κ J = 0`.
pub fn jacobi_flight(kind: SurfaceKind, state: JacobiState, len: f64) -> Result<JacobiState> {
    if !(len >= 0.0) || !len.is_finite() {
        return Err(Error::Domain(format!("flight length must be finite and non-negative, got {len}")));
    }
    if !(state.j.is_finite() && state.jp.is_finite()) {
        return Err(Error::Domain("non-finite Jacobi state".into()));
    }
    let JacobiState { j, jp } = state;
    Ok(match kind {
        SurfaceKind::Flat => JacobiState::new(j + len * jp, jp),
        SurfaceKind::Sphere => {
            let (s, c) = len.sin_cos();
            JacobiState::new(j * c + jp * s, -j * s + jp * c)
        }
        SurfaceKind::Hyperbolic => {
            let (s, c) = (len.sinh(), len.cosh());
            JacobiState::new(j * c + jp * s, j * s + jp * c)
        }
    })
}
