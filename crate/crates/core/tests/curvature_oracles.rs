use std::f64::consts::PI;

use hopf_core::conformal_metric::{
    curvature_field, eval_field, field_norms, gauss_curvature, MetricField, TrigPoly, TrigTerm,
};
use hopf_core::geodesic_bounds::PsiSpec;

fn mixed() -> TrigPoly {
    TrigPoly {
        n: 2,
        periods: vec![1.0, 2.0],
        c0: 1.2,
        terms: vec![TrigTerm { freq: vec![1, 1], a: 0.2, b: 0.1 }, TrigTerm { freq: vec![0, 3], a: -0.15, b: 0.05 }],
    }
}

/// Richardson-extrapolated central differences of `g` along `axis` at step `h`.
fn fd(g: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64, second: bool) -> f64 {
    let shifted = |d: f64| {
        let mut y = x.to_vec();
        y[axis] += d;
        g(&y)
    };
    let at = |h: f64| {
        if second {
            (shifted(h) - 2.0 * g(x) + shifted(-h)) / (h * h)
        } else {
            (shifted(h) - shifted(-h)) / (2.0 * h)
        }
    };
    (4.0 * at(h) - at(2.0 * h)) / 3.0
}

fn max_over_grid(field: &MetricField, g: impl Fn(usize) -> f64) -> f64 {
    (0..field.len()).map(g).fold(0.0, f64::max)
}

#[test]
fn derivative_grids_match_finite_differences() {
    let p = mixed();
    let field = eval_field(&p, 64).unwrap();
    let f = |x: &[f64]| p.value(x);
    let h = 1.0 / 64.0;
    let grad = max_over_grid(&field, |i| {
        let x = field.point(i);
        (0..2).map(|a| (fd(&f, &x, a, h, false) - field.grad(i)[a]).abs()).fold(0.0, f64::max)
    });
    let hess = max_over_grid(&field, |i| {
        let x = field.point(i);
        (0..2).map(|a| (fd(&f, &x, a, h, true) - field.hess(i, a, a)).abs()).fold(0.0, f64::max)
    });
    assert!(grad < 1e-4 && hess < 5e-3, "grad {grad:e}, hess {hess:e}");
}

#[test]
fn finite_difference_error_shrinks_at_fourth_order() {
    let p = mixed();
    let f = |x: &[f64]| p.value(x);
    let x = [0.31, 0.77];
    let exact = p.jet(&x).grad[0];
    let e1 = (fd(&f, &x, 0, 1.0 / 32.0, false) - exact).abs();
    let e2 = (fd(&f, &x, 0, 1.0 / 64.0, false) - exact).abs();
    let order = (e1 / e2).log2();
    assert!(order > 3.5, "observed order {order}");
}

#[test]
fn log_laplacian_expansion_matches_second_differences() {
    let p = mixed();
    let field = eval_field(&p, 128).unwrap();
    let k = gauss_curvature(&field).unwrap();
    let logf = |x: &[f64]| p.value(x).ln();
    let h = 1e-3;
    let worst = max_over_grid(&field, |i| {
        let x = field.point(i);
        let lap = fd(&logf, &x, 0, h, true) + fd(&logf, &x, 1, h, true);
        (k[i] + lap / (2.0 * field.f_grid[i])).abs()
    });
    assert!(worst < 1e-6, "worst {worst:e}");
}

#[test]
fn total_curvature_vanishes() {
    for p in [mixed(), TrigPoly::cosine(2, 1.0, 1, 2, 0.4)] {
        let field = eval_field(&p, 128).unwrap();
        let k = gauss_curvature(&field).unwrap();
        let total = field.integrate(k.iter().zip(&field.f_grid).map(|(k, f)| k * f));
        assert!(total.abs() < 1e-8, "{total:e}");
    }
}

#[test]
fn curvature_sup_is_stable_under_refinement() {
    for p in [mixed(), TrigPoly::cosine(2, 1.0, 0, 1, 0.3), TrigPoly::cosine(3, 1.0, 0, 1, 0.2)] {
        let sup = |m: usize| {
            let field = eval_field(&p, m).unwrap();
            let curv = curvature_field(&field).unwrap();
            field_norms(&field, &curv, &PsiSpec::Power { alpha: 1.0 }).unwrap().curv_sup
        };
        let (a, b) = if p.n == 2 { (sup(64), sup(128)) } else { (sup(32), sup(64)) };
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

#[test]
fn test_factor_curvature_extremes() {
    let field = eval_field(&TrigPoly::cosine(2, 1.0, 0, 1, 0.3), 256).unwrap();
    let curv = curvature_field(&field).unwrap();
    // K(½) = −0.3·4π² / (2·0.7²), the most negative value
    let expect = 0.3 * 4.0 * PI * PI / (2.0 * 0.49);
    assert!((curv.curv_sup_grid - expect).abs() < 1e-12);
    let norms = field_norms(&field, &curv, &PsiSpec::Power { alpha: 2.0 }).unwrap();
    assert!((norms.curv_sup - expect).abs() < 1e-12);
}
