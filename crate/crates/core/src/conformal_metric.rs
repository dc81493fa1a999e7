//! Conformally flat metrics `g = f·g₀` on a rectangular torus `Tⁿ`, with `f`
//! a positive trigonometric polynomial.
//!
//! Derivatives of `f` are exact term by term, so curvature is known in closed
//! form everywhere. With `u = ½ log f`:
//!
//! ```text
//! K    = −(f Δf − |∇f|²) / (2 f³)                                   (n = 2)
//! Ric  = −(n−2)(Hess u − du⊗du) − (Δu + (n−2)|∇u|²) g₀
//! Scal = (1−n) f⁻² Δf + (1−n)(n−6)/4 · f⁻³ |∇f|²
//! ```

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic_bounds::PsiSpec;

pub const POS_MARGIN: f64 = 1e-6;
const VALIDATION_OVERSAMPLE: usize = 8;
const MAX_VALIDATION_POINTS: usize = 1 << 22;
const TRACE_TOL: f64 = 1e-6;
const POLISH_STARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub freq: Vec<i64>,
    pub a: f64,
    pub b: f64,
}

/// `f(x) = c0 + Σ a cos θ + b sin θ` with `θ = 2π Σ freq_i x_i / period_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub n: usize,
    /// Per-axis periods; empty means all ones.
    #[serde(default)]
    pub periods: Vec<f64>,
    pub c0: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

/// Value, gradient and packed upper-triangular Hessian of `f` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJet {
    pub f: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl PointJet {
    pub fn hess_entry(&self, n: usize, i: usize, j: usize) -> f64 {
        self.hess[packed_index(n, i.min(j), i.max(j))]
    }

    pub fn laplacian(&self, n: usize) -> f64 {
        (0..n).map(|i| self.hess_entry(n, i, i)).sum()
    }

    pub fn grad_sq(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum()
    }
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + j
}

fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl TrigPoly {
    pub fn constant(n: usize, c0: f64) -> Self {
        Self { n, periods: Vec::new(), c0, terms: Vec::new() }
    }

    /// `c0 + Σ a cos(2π k x_axis)`-style single-axis cosine factor, common in tests.
    pub fn cosine(n: usize, c0: f64, axis: usize, k: i64, a: f64) -> Self {
        let mut freq = vec![0; n];
        freq[axis] = k;
        Self { n, periods: Vec::new(), c0, terms: vec![TrigTerm { freq, a, b: 0.0 }] }
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.periods.get(axis).copied().unwrap_or(1.0)
    }

    pub fn periods_vec(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.period(i)).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.a == 0.0 && t.b == 0.0)
    }

    fn wave_vectors(&self) -> Vec<Vec<f64>> {
        self.terms
            .iter()
            .map(|t| t.freq.iter().enumerate().map(|(i, &k)| TAU * k as f64 / self.period(i)).collect())
            .collect()
    }

    /// Upper bound `c0 + Σ √(a² + b²)` on `f`.
    pub fn envelope(&self) -> f64 {
        self.c0 + self.terms.iter().map(|t| t.a.hypot(t.b)).sum::<f64>()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut f = self.c0;
        for t in &self.terms {
            let theta: f64 = t.freq.iter().enumerate().map(|(i, &k)| TAU * k as f64 * x[i] / self.period(i)).sum();
            let (s, c) = theta.sin_cos();
            f += t.a * c + t.b * s;
        }
        f
    }

    pub fn jet(&self, x: &[f64]) -> PointJet {
        let n = self.n;
        let mut jet = PointJet { f: self.c0, grad: vec![0.0; n], hess: vec![0.0; packed_len(n)] };
        for t in &self.terms {
            let w: Vec<f64> = t.freq.iter().enumerate().map(|(i, &k)| TAU * k as f64 / self.period(i)).collect();
            accumulate(&mut jet, n, t, &w, x);
        }
        jet
    }

    /// Value, gradient and Hessian on the plane, without allocation.
    pub fn jet2(&self, x: [f64; 2]) -> (f64, [f64; 2], [f64; 3]) {
        let (p0, p1) = (self.period(0), self.period(1));
        let mut f = self.c0;
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for t in &self.terms {
            let w0 = TAU * t.freq[0] as f64 / p0;
            let w1 = TAU * t.freq[1] as f64 / p1;
            let (s, c) = (w0 * x[0] + w1 * x[1]).sin_cos();
            let val = t.a * c + t.b * s;
            let der = t.b * c - t.a * s;
            f += val;
            g[0] += w0 * der;
            g[1] += w1 * der;
            h[0] -= w0 * w0 * val;
            h[1] -= w0 * w1 * val;
            h[2] -= w1 * w1 * val;
        }
        (f, g, h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {}", self.n)));
        }
        if !self.periods.is_empty() && self.periods.len() != self.n {
            return Err(Error::Domain(format!("expected {} periods, got {}", self.n, self.periods.len())));
        }
        if self.periods.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Domain(format!("periods must be positive and finite: {:?}", self.periods)));
        }
        if !self.c0.is_finite() {
            return Err(Error::Domain("c0 must be finite".into()));
        }
        for t in &self.terms {
            if t.freq.len() != self.n {
                return Err(Error::Domain(format!("frequency {:?} has wrong dimension", t.freq)));
            }
            if t.freq.iter().all(|&k| k == 0) {
                return Err(Error::Domain("zero frequency vector; fold it into c0".into()));
            }
            if !(t.a.is_finite() && t.b.is_finite()) {
                return Err(Error::Domain(format!("non-finite coefficients in term {t:?}")));
            }
        }
        self.check_positive()
    }

    fn check_positive(&self) -> Result<()> {
        let lower = self.c0 - self.terms.iter().map(|t| t.a.hypot(t.b)).sum::<f64>();
        if lower >= POS_MARGIN {
            return Ok(());
        }
        let max_freq: Vec<i64> =
            (0..self.n).map(|i| self.terms.iter().map(|t| t.freq[i].abs()).max().unwrap_or(0)).collect();
        let per_axis_cap = (MAX_VALIDATION_POINTS as f64).powf(1.0 / self.n as f64).floor() as usize;
        let counts: Vec<usize> = max_freq
            .iter()
            .map(|&k| (VALIDATION_OVERSAMPLE * 2 * (k as usize).max(1)).max(16).min(per_axis_cap.max(2)))
            .collect();
        let total: usize = counts.iter().product();
        let periods = self.periods_vec();
        let (min, at) = (0..total)
            .into_par_iter()
            .map(|idx| {
                let x = grid_point(idx, &counts, &periods);
                (self.value(&x), idx)
            })
            .reduce(|| (f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        if min < POS_MARGIN {
            return Err(Error::NonPositiveFactor { min, location: grid_point(at, &counts, &periods) });
        }
        Ok(())
    }
}

fn accumulate(jet: &mut PointJet, n: usize, t: &TrigTerm, w: &[f64], x: &[f64]) {
    let theta: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
    let (s, c) = theta.sin_cos();
    let val = t.a * c + t.b * s;
    let der = t.b * c - t.a * s;
    jet.f += val;
    for i in 0..n {
        jet.grad[i] += w[i] * der;
        for j in i..n {
            jet.hess[packed_index(n, i, j)] -= w[i] * w[j] * val;
        }
    }
}

/// Coordinates of flat index `idx` on a row-major grid (last axis fastest).
fn grid_point(mut idx: usize, counts: &[usize], periods: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; counts.len()];
    for axis in (0..counts.len()).rev() {
        let i = idx % counts[axis];
        idx /= counts[axis];
        x[axis] = periods[axis] * i as f64 / counts[axis] as f64;
    }
    x
}

/// `f` and its derivatives on a uniform `mⁿ` grid.
#[derive(Debug, Clone)]
pub struct MetricField {
    pub poly: TrigPoly,
    pub m: usize,
    pub f_grid: Vec<f64>,
    /// `n` entries per point.
    pub grad_grid: Vec<f64>,
    /// Packed upper triangle, `n(n+1)/2` entries per point.
    pub hess_grid: Vec<f64>,
    pub laplacian_grid: Vec<f64>,
}

impl MetricField {
    pub fn n(&self) -> usize {
        self.poly.n
    }

    pub fn len(&self) -> usize {
        self.f_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_grid.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        grid_point(idx, &vec![self.m; self.n()], &self.poly.periods_vec())
    }

    pub fn grad(&self, idx: usize) -> &[f64] {
        let n = self.n();
        &self.grad_grid[idx * n..(idx + 1) * n]
    }

    pub fn hess(&self, idx: usize, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.hess_grid[idx * packed_len(n) + packed_index(n, i.min(j), i.max(j))]
    }

    pub fn cell_volume(&self) -> f64 {
        self.poly.periods_vec().iter().map(|p| p / self.m as f64).product()
    }

    /// Uniform-grid rule for `∫ g dx` over the fundamental domain.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        values.sum::<f64>() * self.cell_volume()
    }

    pub fn jet_at(&self, x: &[f64]) -> PointJet {
        self.poly.jet(x)
    }
}

pub fn eval_field(p: &TrigPoly, m: usize) -> Result<MetricField> {
    if m < 32 || !m.is_power_of_two() {
        return Err(Error::Domain(format!("grid resolution must be a power of two ≥ 32, got {m}")));
    }
    p.validate()?;
    let n = p.n;
    let total = m
        .checked_pow(n as u32)
        .filter(|t| t.checked_mul(packed_len(n) + n + 2).is_some_and(|b| b <= 1 << 31))
        .ok_or_else(|| Error::Domain(format!("grid {m}^{n} is too large")))?;
    let counts = vec![m; n];
    let periods = p.periods_vec();
    let waves = p.wave_vectors();
    let jets: Vec<PointJet> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let x = grid_point(idx, &counts, &periods);
            let mut jet = PointJet { f: p.c0, grad: vec![0.0; n], hess: vec![0.0; packed_len(n)] };
            for (t, w) in p.terms.iter().zip(&waves) {
                accumulate(&mut jet, n, t, w, &x);
            }
            jet
        })
        .collect();
    let mut field = MetricField {
        poly: p.clone(),
        m,
        f_grid: Vec::with_capacity(total),
        grad_grid: Vec::with_capacity(total * n),
        hess_grid: Vec::with_capacity(total * packed_len(n)),
        laplacian_grid: Vec::with_capacity(total),
    };
    for jet in jets {
        field.laplacian_grid.push(jet.laplacian(n));
        field.f_grid.push(jet.f);
        field.grad_grid.extend_from_slice(&jet.grad);
        field.hess_grid.extend_from_slice(&jet.hess);
    }
    Ok(field)
}

#[inline]
pub fn gauss_curvature_from(f: f64, grad_sq: f64, lap: f64) -> f64 {
    -(f * lap - grad_sq) / (2.0 * f * f * f)
}

/// Gaussian curvature at an arbitrary point of a 2-torus.
pub fn gauss_curvature_at(p: &TrigPoly, x: [f64; 2]) -> f64 {
    let (f, g, h) = p.jet2(x);
    gauss_curvature_from(f, g[0] * g[0] + g[1] * g[1], h[0] + h[2])
}

pub fn gauss_curvature(field: &MetricField) -> Result<Vec<f64>> {
    if field.n() != 2 {
        return Err(Error::Domain(format!("Gaussian curvature needs n = 2, got n = {}", field.n())));
    }
    Ok((0..field.len())
        .map(|i| {
            let g = field.grad(i);
            gauss_curvature_from(field.f_grid[i], g[0] * g[0] + g[1] * g[1], field.laplacian_grid[i])
        })
        .collect())
}

/// Ricci tensor (packed upper triangle, coordinate components) and scalar curvature from a jet.
pub fn ricci_and_scalar_from(n: usize, jet: &PointJet) -> (Vec<f64>, f64) {
    let nf = n as f64;
    let f = jet.f;
    let du: Vec<f64> = jet.grad.iter().map(|g| g / (2.0 * f)).collect();
    let du_sq: f64 = du.iter().map(|d| d * d).sum();
    let lap_f = jet.laplacian(n);
    let grad_sq = jet.grad_sq();
    let lap_u = lap_f / (2.0 * f) - grad_sq / (2.0 * f * f);
    let mut ric = vec![0.0; packed_len(n)];
    for i in 0..n {
        for j in i..n {
            let hess_u = jet.hess_entry(n, i, j) / (2.0 * f) - 2.0 * du[i] * du[j];
            let mut r = -(nf - 2.0) * (hess_u - du[i] * du[j]);
            if i == j {
                r -= lap_u + (nf - 2.0) * du_sq;
            }
            ric[packed_index(n, i, j)] = r;
        }
    }
    let scal = (1.0 - nf) * lap_f / (f * f) + (1.0 - nf) * (nf - 6.0) / 4.0 * grad_sq / (f * f * f);
    (ric, scal)
}

fn trace_residual(n: usize, f: f64, ric: &[f64], scal: f64) -> f64 {
    let tr: f64 = (0..n).map(|i| ric[packed_index(n, i, i)]).sum();
    (tr / f - scal).abs() / scal.abs().max(1.0)
}

/// Largest `|Ric(v, v)|` over `g`-unit vectors: spectral radius of `Ric / f`.
pub fn ricci_norm(n: usize, f: f64, ric: &[f64]) -> f64 {
    let m = DMatrix::from_fn(n, n, |i, j| ric[packed_index(n, i.min(j), i.max(j))]);
    let eig = SymmetricEigen::new(m).eigenvalues;
    eig.iter().fold(0.0f64, |acc, e| acc.max(e.abs())) / f
}

/// Packed Ricci grid (`n(n+1)/2` per point) and scalar curvature grid.
pub fn ricci_and_scalar(field: &MetricField) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = field.n();
    if n < 3 {
        return Err(Error::Domain(format!("Ricci/scalar path needs n ≥ 3, got n = {n}")));
    }
    let per = packed_len(n);
    let mut ric_grid = Vec::with_capacity(field.len() * per);
    let mut scal_grid = Vec::with_capacity(field.len());
    let mut worst = 0.0f64;
    for idx in 0..field.len() {
        let jet = PointJet {
            f: field.f_grid[idx],
            grad: field.grad(idx).to_vec(),
            hess: field.hess_grid[idx * per..(idx + 1) * per].to_vec(),
        };
        let (ric, scal) = ricci_and_scalar_from(n, &jet);
        worst = worst.max(trace_residual(n, jet.f, &ric, scal));
        ric_grid.extend_from_slice(&ric);
        scal_grid.push(scal);
    }
    if !(worst <= TRACE_TOL) {
        return Err(Error::InconsistentInvariants(format!("trace(Ric)/f differs from Scal by {worst:e}")));
    }
    Ok((ric_grid, scal_grid))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField {
    pub n: usize,
    /// Gaussian curvature per grid point (n = 2).
    pub k_grid: Option<Vec<f64>>,
    /// Packed Ricci tensor per grid point (n ≥ 3).
    pub ric_grid: Option<Vec<f64>>,
    pub scal_grid: Option<Vec<f64>>,
    /// Grid maximum of `|K|` or of the Ricci norm.
    pub curv_sup_grid: f64,
    /// Largest relative `|trace(Ric)/f − Scal|` over the grid (0 for n = 2).
    pub trace_residual: f64,
    pub vol_g: f64,
}

/// Pointwise curvature norm: `|K|` for n = 2, the Ricci norm otherwise.
pub fn curvature_norm_at(p: &TrigPoly, x: &[f64]) -> f64 {
    if p.n == 2 {
        gauss_curvature_at(p, [x[0], x[1]]).abs()
    } else {
        let jet = p.jet(x);
        let (ric, _) = ricci_and_scalar_from(p.n, &jet);
        ricci_norm(p.n, jet.f, &ric)
    }
}

pub fn volume(field: &MetricField) -> f64 {
    let half_n = field.n() as f64 / 2.0;
    field.integrate(field.f_grid.iter().map(|f| f.powf(half_n)))
}

pub fn curvature_field(field: &MetricField) -> Result<CurvatureField> {
    let n = field.n();
    let vol_g = volume(field);
    if n == 2 {
        let k = gauss_curvature(field)?;
        let sup = k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(CurvatureField {
            n,
            k_grid: Some(k),
            ric_grid: None,
            scal_grid: None,
            curv_sup_grid: sup,
            trace_residual: 0.0,
            vol_g,
        })
    } else {
        let (ric, scal) = ricci_and_scalar(field)?;
        let per = packed_len(n);
        let mut sup = 0.0f64;
        let mut resid = 0.0f64;
        for idx in 0..field.len() {
            let r = &ric[idx * per..(idx + 1) * per];
            let f = field.f_grid[idx];
            sup = sup.max(ricci_norm(n, f, r));
            resid = resid.max(trace_residual(n, f, r, scal[idx]));
        }
        Ok(CurvatureField {
            n,
            k_grid: None,
            ric_grid: Some(ric),
            scal_grid: Some(scal),
            curv_sup_grid: sup,
            trace_residual: resid,
            vol_g,
        })
    }
}

impl CurvatureField {
    /// Per-point curvature norm on the grid.
    pub fn norm_grid(&self, field: &MetricField) -> Vec<f64> {
        match (&self.k_grid, &self.ric_grid) {
            (Some(k), _) => k.iter().map(|v| v.abs()).collect(),
            (None, Some(ric)) => {
                let n = self.n;
                let per = packed_len(n);
                (0..field.len()).map(|i| ricci_norm(n, field.f_grid[i], &ric[i * per..(i + 1) * per])).collect()
            }
            _ => Vec::new(),
        }
    }
}

/// Compass search for a local maximum of `g`, starting at `x` with step `h` per axis.
fn compass_max(g: &dyn Fn(&[f64]) -> f64, mut x: Vec<f64>, mut h: Vec<f64>, periods: &[f64]) -> f64 {
    let mut best = g(&x);
    let floor: Vec<f64> = periods.iter().map(|p| p * 1e-13).collect();
    while h.iter().zip(&floor).any(|(a, b)| a > b) {
        let mut moved = false;
        for axis in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[axis] = (y[axis] + sign * h[axis]).rem_euclid(periods[axis]);
                let v = g(&y);
                if v > best {
                    best = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            for s in h.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    best
}

/// Grid maximum of `values`, refined by local search from the largest grid local maxima.
pub fn polished_max(field: &MetricField, values: &[f64], g: &dyn Fn(&[f64]) -> f64) -> f64 {
    let m = field.m;
    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let periods = field.poly.periods_vec();
    let step: Vec<f64> = periods.iter().map(|p| p / m as f64).collect();
    let mut best = grid_max;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for &idx in order.iter() {
        if starts.len() >= POLISH_STARTS {
            break;
        }
        let x = field.point(idx);
        let far = starts.iter().all(|s| {
            s.iter().zip(&x).zip(&periods).any(|((a, b), p)| {
                let d = (a - b).rem_euclid(*p);
                d.min(p - d) > 2.0 * p / m as f64
            })
        });
        if far {
            starts.push(x);
        }
    }
    for x in starts {
        best = best.max(compass_max(g, x, step.clone(), &periods));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldNorms {
    pub curv_sup: f64,
    pub psi_sup: f64,
    pub vol_g: f64,
}

/// `‖K‖` or `‖Ric‖`, `sup ψ(f)` and `Vol(Tⁿ, g)`.
///
/// Suprema start from the grid and are refined off-grid by local search, so
/// they do not depend on whether an extremum falls on a node.
pub fn field_norms(field: &MetricField, curv: &CurvatureField, psi: &PsiSpec) -> Result<FieldNorms> {
    let p = &field.poly;
    let curv_sup = if p.is_constant() {
        curv.curv_sup_grid
    } else {
        let values = curv.norm_grid(field);
        polished_max(field, &values, &|x| curvature_norm_at(p, x)).max(curv.curv_sup_grid)
    };
    let psi_vals: Vec<f64> = field.f_grid.iter().map(|&f| psi.value(f)).collect::<Result<_>>()?;
    let psi_sup = if p.is_constant() {
        psi_vals[0]
    } else {
        polished_max(field, &psi_vals, &|x| psi.value(p.value(x)).unwrap_or(f64::NEG_INFINITY))
    };
    Ok(FieldNorms { curv_sup, psi_sup, vol_g: curv.vol_g })
}

/// Area of the unit sphere `S^{n−1} ⊂ Rⁿ`: `2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere_area needs n ≥ 1");
    // Γ(n/2) by the half-integer recursion
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_factor() -> TrigPoly {
        TrigPoly::cosine(2, 1.0, 0, 1, 0.3)
    }

    #[test]
    fn constant_factor_is_flat() {
        let field = eval_field(&TrigPoly::constant(2, 1.0), 32).unwrap();
        assert!(field.grad_grid.iter().all(|&g| g == 0.0));
        assert!(field.laplacian_grid.iter().all(|&g| g == 0.0));
        let curv = curvature_field(&field).unwrap();
        assert_eq!(curv.curv_sup_grid, 0.0);
        let norms = field_norms(&field, &curv, &PsiSpec::Power { alpha: 2.0 }).unwrap();
        assert_eq!(norms.curv_sup, 0.0);
        assert!((norms.vol_g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resolution_is_validated() {
        assert!(eval_field(&test_factor(), 16).is_err());
        assert!(eval_field(&test_factor(), 48).is_err());
    }

    #[test]
    fn nonpositive_factor_reports_location() {
        let p = TrigPoly::cosine(2, 1.0, 0, 1, 1.2);
        match eval_field(&p, 32).unwrap_err() {
            Error::NonPositiveFactor { min, location } => {
                assert!(min < 0.0);
                assert!((location[0] - 0.5).abs() < 0.1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn malformed_polys_rejected() {
        let mut p = test_factor();
        p.terms[0].freq = vec![0, 0];
        assert!(p.validate().is_err());
        let mut p = test_factor();
        p.periods = vec![1.0];
        assert!(p.validate().is_err());
        assert!(TrigPoly::constant(1, 1.0).validate().is_err());
    }

    #[test]
    fn gradient_matches_closed_form() {
        let field = eval_field(&test_factor(), 256).unwrap();
        for idx in [0, 17, 300, 40_000] {
            let x = field.point(idx);
            let expect = -0.6 * PI * (TAU * x[0]).sin();
            assert!((field.grad(idx)[0] - expect).abs() < 1e-13);
            assert_eq!(field.grad(idx)[1], 0.0);
        }
    }

    #[test]
    fn mixed_hessian_entry() {
        let p = TrigPoly { n: 2, periods: vec![], c0: 1.0, terms: vec![TrigTerm { freq: vec![1, 1], a: 0.1, b: 0.0 }] };
        let field = eval_field(&p, 32).unwrap();
        for idx in [3, 77, 1000] {
            let x = field.point(idx);
            let expect = -0.4 * PI * PI * (TAU * (x[0] + x[1])).cos();
            assert!((field.hess(idx, 0, 1) - expect).abs() < 1e-13);
            assert_eq!(field.hess(idx, 0, 1), field.hess(idx, 1, 0));
            let tr = field.hess(idx, 0, 0) + field.hess(idx, 1, 1);
            assert!((field.laplacian_grid[idx] - tr).abs() < 1e-12);
        }
    }

    #[test]
    fn jet2_agrees_with_general_jet() {
        let p = TrigPoly {
            n: 2,
            periods: vec![1.0, 2.0],
            c0: 2.0,
            terms: vec![TrigTerm { freq: vec![1, -2], a: 0.3, b: 0.2 }, TrigTerm { freq: vec![0, 3], a: -0.1, b: 0.4 }],
        };
        let x = [0.37, 1.21];
        let j = p.jet(&x);
        let (f, g, h) = p.jet2(x);
        assert!((f - j.f).abs() < 1e-15);
        assert!((g[0] - j.grad[0]).abs() < 1e-13 && (g[1] - j.grad[1]).abs() < 1e-13);
        assert!((h[1] - j.hess_entry(2, 1, 0)).abs() < 1e-12);
    }

    #[test]
    fn scalar_curvature_at_dimension_six() {
        let p = TrigPoly::cosine(6, 1.0, 2, 1, 0.2);
        let jet = p.jet(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let (ric, scal) = ricci_and_scalar_from(6, &jet);
        assert!((scal + 5.0 * jet.laplacian(6) / (jet.f * jet.f)).abs() < 1e-12);
        assert!(trace_residual(6, jet.f, &ric, scal) < 1e-12);
    }

    #[test]
    fn flat_three_torus_has_zero_ricci() {
        let field = eval_field(&TrigPoly::constant(3, 1.0), 32).unwrap();
        let (ric, scal) = ricci_and_scalar(&field).unwrap();
        assert!(ric.iter().all(|&r| r == 0.0) && scal.iter().all(|&s| s == 0.0));
        assert!(gauss_curvature(&field).is_err());
        assert!(ricci_and_scalar(&eval_field(&test_factor(), 32).unwrap()).is_err());
    }

    #[test]
    fn psi_sup_and_volume_of_test_factor() {
        let field = eval_field(&test_factor(), 64).unwrap();
        let curv = curvature_field(&field).unwrap();
        let norms = field_norms(&field, &curv, &PsiSpec::Power { alpha: 2.0 }).unwrap();
        assert!((norms.psi_sup - 1.69).abs() < 1e-12);
        assert!((norms.vol_g - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polishing_finds_off_grid_maximum() {
        // maximum of f at x₁ = 0.3, far from any node of the 32-grid
        let p = TrigPoly { n: 2, periods: vec![], c0: 1.0, terms: vec![TrigTerm { freq: vec![1, 0], a: (TAU * 0.3).cos() * 0.3, b: (TAU * 0.3).sin() * 0.3 }] };
        let field = eval_field(&p, 32).unwrap();
        let curv = curvature_field(&field).unwrap();
        let norms = field_norms(&field, &curv, &PsiSpec::Power { alpha: 1.0 }).unwrap();
        assert!((norms.psi_sup - 1.3).abs() < 1e-12);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - TAU).abs() < 1e-15);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn metric_json_round_trip() {
        let text = r#"{"n": 2, "c0": 1.0, "terms": [{"freq": [1, 0], "a": 0.3, "b": 0.0}]}"#;
        let p: TrigPoly = serde_json::from_str(text).unwrap();
        assert_eq!(p, test_factor());
        assert_eq!(p.periods_vec(), vec![1.0, 1.0]);
    }
}
