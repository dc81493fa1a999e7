//! Lower bounds on `δ` for conformally flat torus metrics, weighted by a
//! positive function `ψ` of the conformal factor.
//!
//! With `Ψ(f) = ψ'(4/f − ψ'/ψ)` on `T²` and
//! `Ψ(f) = f^{n/2−1} ψ'(4/f − ψ'/ψ) + (n−2) f^{n/2−3} ψ` on `Tⁿ`, `n > 2`:
//!
//! ```text
//! n = 2:  δ ≥ π I / (4 ‖K‖ ‖ψ(f)‖ Vol_g)
//! n > 2:  δ ≥ (n−1) ω_{n−1} I / (4n ‖Ric‖ ‖ψ(f)‖ Vol_g),    I = ∫ Ψ(f) |∇f|² dx
//! ```
//!
//! For `ψ = f^α` the weight collapses to `α(4−α) f^{α−2}` on `T²` and
//! `((n−2) + α(4−α)) f^{n/2−3+α}` on `Tⁿ`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal_metric::{field_norms, polished_max, sphere_area, CurvatureField, FieldNorms, MetricField};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA_STEPS: usize = 64;

type PsiFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Weight function `ψ`, as a power of `f` or a callback returning `(ψ(f), ψ'(f))`.
#[derive(Clone)]
pub enum PsiSpec {
    Power { alpha: f64 },
    Custom { name: String, eval: PsiFn },
}

impl fmt::Debug for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl PsiSpec {
    pub fn custom(name: impl Into<String>, eval: impl Fn(f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        PsiSpec::Custom { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn describe(&self) -> String {
        match self {
            PsiSpec::Power { alpha } => format!("f^{alpha}"),
            PsiSpec::Custom { name, .. } => name.clone(),
        }
    }

    fn pair(&self, f: f64) -> (f64, f64) {
        match self {
            PsiSpec::Power { alpha } => (f.powf(*alpha), alpha * f.powf(alpha - 1.0)),
            PsiSpec::Custom { eval, .. } => eval(f),
        }
    }

    pub fn value(&self, f: f64) -> Result<f64> {
        let v = self.pair(f).0;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("ψ({f}) = {v} is not positive")));
        }
        Ok(v)
    }

    /// Admissibility of a power weight in dimension `n`.
    pub fn admissible(&self, n: usize) -> bool {
        match self {
            PsiSpec::Power { alpha } if n == 2 => *alpha > 0.0 && *alpha < 4.0,
            PsiSpec::Power { alpha } => (n as f64 - 2.0) + alpha * (4.0 - alpha) > 0.0,
            PsiSpec::Custom { .. } => true,
        }
    }
}

/// `Ψ(f)` from `ψ` and `ψ'`.
pub fn capital_psi(n: usize, psi: &PsiSpec, f: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!("conformal factor must be positive, got {f}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    let (v, d) = psi.pair(f);
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("ψ({f}) = {v} is not positive")));
    }
    let core = d * (4.0 / f - d / v);
    if n == 2 {
        Ok(core)
    } else {
        let h = n as f64 / 2.0;
        Ok(f.powf(h - 1.0) * core + (n as f64 - 2.0) * f.powf(h - 3.0) * v)
    }
}

/// Closed form of `Ψ` for `ψ = f^α`.
pub fn capital_psi_power(n: usize, alpha: f64, f: f64) -> f64 {
    let a4 = alpha * (4.0 - alpha);
    if n == 2 {
        a4 * f.powf(alpha - 2.0)
    } else {
        let nf = n as f64;
        ((nf - 2.0) + a4) * f.powf(nf / 2.0 - 3.0 + alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicBoundReport {
    pub n: usize,
    pub psi: String,
    pub capital_psi_integral: f64,
    pub curv_sup: f64,
    pub psi_sup: f64,
    pub vol_g: f64,
    pub delta_lb: f64,
    pub grid: usize,
    pub warnings: Vec<String>,
}

fn grad_sq(field: &MetricField, idx: usize) -> f64 {
    field.grad(idx).iter().map(|g| g * g).sum()
}

fn assemble(field: &MetricField, integral: f64, norms: FieldNorms, psi: String) -> Result<GeodesicBoundReport> {
    let n = field.n();
    let FieldNorms { curv_sup, psi_sup, vol_g } = norms;
    let delta_lb = if curv_sup == 0.0 {
        if integral != 0.0 {
            return Err(Error::InconsistentInvariants(format!(
                "curvature vanishes but the weighted gradient integral is {integral:e}"
            )));
        }
        0.0
    } else {
        let prefactor = if n == 2 {
            std::f64::consts::PI
        } else {
            (n as f64 - 1.0) * sphere_area(n) / n as f64
        };
        (prefactor * integral / (4.0 * curv_sup * psi_sup * vol_g)).max(0.0)
    };
    let mut warnings = Vec::new();
    if delta_lb > 1.0 {
        warnings.push(format!("delta_lb = {delta_lb} exceeds 1"));
    }
    Ok(GeodesicBoundReport {
        n,
        psi,
        capital_psi_integral: integral,
        curv_sup,
        psi_sup,
        vol_g,
        delta_lb,
        grid: field.m,
        warnings,
    })
}

fn check_psi(field: &MetricField, psi: &PsiSpec) -> Result<()> {
    if !psi.admissible(field.n()) {
        return Err(Error::Domain(format!("ψ = {} is not admissible in dimension {}", psi.describe(), field.n())));
    }
    Ok(())
}

/// General evaluation through `ψ` and `ψ'`.
pub fn bound_general(field: &MetricField, curv: &CurvatureField, psi: &PsiSpec) -> Result<GeodesicBoundReport> {
    check_psi(field, psi)?;
    let norms = field_norms(field, curv, psi)?;
    bound_with_norms(field, psi, norms)
}

fn bound_with_norms(field: &MetricField, psi: &PsiSpec, norms: FieldNorms) -> Result<GeodesicBoundReport> {
    let n = field.n();
    let mut sum = 0.0;
    for (idx, &f) in field.f_grid.iter().enumerate() {
        sum += capital_psi(n, psi, f)? * grad_sq(field, idx);
    }
    assemble(field, sum * field.cell_volume(), norms, psi.describe())
}

/// Evaluation for `ψ = f^α` through the closed-form weight.
pub fn bound_power(field: &MetricField, curv: &CurvatureField, alpha: f64) -> Result<GeodesicBoundReport> {
    let psi = PsiSpec::Power { alpha };
    check_psi(field, &psi)?;
    let norms = field_norms(field, curv, &psi)?;
    let n = field.n();
    let integral = field.integrate(
        field.f_grid.iter().enumerate().map(|(idx, &f)| capital_psi_power(n, alpha, f) * grad_sq(field, idx)),
    );
    assemble(field, integral, norms, psi.describe())
}

/// `π ∫|∇f|² dx / (‖K‖ ‖f‖² ∫f dx)`: the two-dimensional bound at `α = 2`.
pub fn bound_quadratic_2d(field: &MetricField, curv: &CurvatureField) -> Result<f64> {
    if field.n() != 2 {
        return Err(Error::Domain(format!("needs n = 2, got n = {}", field.n())));
    }
    let norms = field_norms(field, curv, &PsiSpec::Power { alpha: 1.0 })?;
    if norms.curv_sup == 0.0 {
        return Ok(0.0);
    }
    let grad_int = field.integrate((0..field.len()).map(|i| grad_sq(field, i)));
    let f_int = field.integrate(field.f_grid.iter().copied());
    Ok(std::f64::consts::PI * grad_int / (norms.curv_sup * norms.psi_sup * norms.psi_sup * f_int))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub alpha_star: f64,
    pub delta_lb_star: f64,
    pub entries: Vec<GeodesicBoundReport>,
    pub alphas: Vec<f64>,
}

/// Default grid over the meaningful range: `(0, 2]` for `n = 2`, `[0, 2]` for `n ≥ 3`.
pub fn default_alpha_grid(n: usize, steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    if n == 2 {
        (1..=steps).map(|i| 2.0 * i as f64 / steps as f64).collect()
    } else if steps == 1 {
        vec![2.0]
    } else {
        (0..steps).map(|i| 2.0 * i as f64 / (steps - 1) as f64).collect()
    }
}

/// Scans `ψ = f^α` over `alphas` (admissible values only); ties go to the smallest `α`.
pub fn optimize_alpha(field: &MetricField, curv: &CurvatureField, alphas: &[f64]) -> Result<AlphaScan> {
    let n = field.n();
    let mut grid: Vec<f64> =
        alphas.iter().copied().filter(|&a| a.is_finite() && PsiSpec::Power { alpha: a }.admissible(n)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::Domain(format!("no admissible α among {alphas:?} for n = {n}")));
    }
    let base = field_norms(field, curv, &PsiSpec::Power { alpha: 1.0 })?;
    let (f_min, f_max) = extreme_factor(field)?;
    let mut entries = Vec::with_capacity(grid.len());
    let (mut alpha_star, mut best) = (grid[0], f64::NEG_INFINITY);
    for &alpha in &grid {
        let psi = PsiSpec::Power { alpha };
        let psi_sup = if alpha >= 0.0 { f_max.powf(alpha) } else { f_min.powf(alpha) };
        let report = bound_with_norms(field, &psi, FieldNorms { psi_sup, ..base })?;
        if report.delta_lb > best {
            best = report.delta_lb;
            alpha_star = alpha;
        }
        entries.push(report);
    }
    Ok(AlphaScan { alpha_star, delta_lb_star: best, entries, alphas: grid })
}

/// Polished minimum and maximum of `f`.
fn extreme_factor(field: &MetricField) -> Result<(f64, f64)> {
    let p = &field.poly;
    if p.is_constant() {
        return Ok((p.c0, p.c0));
    }
    let f_max = polished_max(field, &field.f_grid, &|x| p.value(x));
    let neg: Vec<f64> = field.f_grid.iter().map(|f| -f).collect();
    let f_min = -polished_max(field, &neg, &|x| -p.value(x));
    Ok((f_min, f_max))
}
