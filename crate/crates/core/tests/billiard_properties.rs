use std::f64::consts::PI;

use hopf_core::billiard::{
    billiard_step, billiard_step_inverse, classify_m_windows, estimate_delta_billiard, generating_derivatives,
    orbit_configuration, second_variation, window_jacobi_field, PhasePoint,
};
use hopf_core::curves::{build_curve, CurveSpec, Harmonic, SampledCurve, TrigSeries};
use hopf_core::sampling::{draw_billiard_point, SeededStream};
use hopf_core::SurfaceKind;
use proptest::prelude::*;
use std::sync::OnceLock;

fn ellipse() -> &'static SampledCurve {
    static C: OnceLock<SampledCurve> = OnceLock::new();
    C.get_or_init(|| build_curve(&CurveSpec::ellipse(2.0, 1.0), 2048).unwrap())
}

fn sphere_table() -> &'static SampledCurve {
    static C: OnceLock<SampledCurve> = OnceLock::new();
    C.get_or_init(|| {
        let rho = TrigSeries { c0: 0.6, terms: vec![Harmonic { m: 2, a: 0.04, b: 0.0 }] };
        build_curve(&CurveSpec::radial_graph(SurfaceKind::Sphere, None, rho), 2048).unwrap()
    })
}

fn hyperbolic_table() -> &'static SampledCurve {
    static C: OnceLock<SampledCurve> = OnceLock::new();
    C.get_or_init(|| {
        let rho = TrigSeries { c0: 0.7, terms: vec![Harmonic { m: 3, a: 0.0, b: 0.02 }] };
        build_curve(&CurveSpec::radial_graph(SurfaceKind::Hyperbolic, None, rho), 2048).unwrap()
    })
}

fn arc_gap(c: &SampledCurve, a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(c.perimeter);
    d.min(c.perimeter - d)
}

#[test]
fn curved_second_variation_matches_closed_form() {
    for c in [sphere_table(), hyperbolic_table()] {
        let cfg = orbit_configuration(c, PhasePoint::new(0.4, 1.1), 3).unwrap();
        let (sv, _) = second_variation(c, &cfg).unwrap();
        for i in 1..cfg.len() - 1 {
            let left = generating_derivatives(c, cfg[i - 1], cfg[i]).unwrap();
            let right = generating_derivatives(c, cfg[i], cfg[i + 1]).unwrap();
            assert!((sv.diag[i - 1] - (left.l22 + right.l11)).abs() < 1e-5, "{:?}", c.kind);
            if i < cfg.len() - 2 {
                assert!((sv.offdiag[i - 1] - right.l12).abs() < 1e-5);
            }
        }
    }
}

#[test]
fn first_derivatives_are_reflection_angles() {
    let c = ellipse();
    let (v, chord) = billiard_step(c, PhasePoint::new(1.3, 0.8)).unwrap();
    let g = generating_derivatives(c, chord.s_x, chord.s_y).unwrap();
    assert!((g.l1 + 0.8f64.cos()).abs() < 1e-12);
    assert!((g.l2 - v.phi.cos()).abs() < 1e-12);
    assert!((g.l - chord.length).abs() < 1e-12);
}

#[test]
fn windows_are_nested() {
    let c = ellipse();
    let mut stream = SeededStream::new(9, 0);
    for _ in 0..200 {
        let u = draw_billiard_point(c, &mut stream);
        let flags = classify_m_windows(c, u, &[2, 4, 8, 16]).unwrap();
        for w in flags.windows(2) {
            assert!(!w[0] || w[1], "flag lost when the window grew at {u:?}");
        }
    }
}

#[test]
fn jacobi_field_sign_matches_flag() {
    let c = ellipse();
    let top = PhasePoint::new(c.perimeter / 4.0, PI / 2.0);
    let xi = window_jacobi_field(c, top, 4).unwrap();
    assert_eq!(xi[0], 0.0);
    assert!(xi[1..].iter().any(|&x| x <= 0.0));
    let side = PhasePoint::new(0.0, PI / 2.0);
    let xi = window_jacobi_field(c, side, 4).unwrap();
    assert_eq!(xi.len(), 9);
}

#[test]
fn estimate_is_reproducible() {
    let c = ellipse();
    let a = estimate_delta_billiard(c, 8, 500, 123, 1).unwrap();
    let b = estimate_delta_billiard(c, 8, 500, 123, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.ci95.0 <= a.delta_hat && a.delta_hat <= a.ci95.1);
}

fn tables() -> [&'static SampledCurve; 3] {
    [ellipse(), sphere_table(), hyperbolic_table()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_is_reversible(which in 0usize..3, s in 0.0f64..1.0, phi in 0.02f64..(PI - 0.02)) {
        let c = tables()[which];
        let u = PhasePoint::new(s * c.perimeter, phi);
        let (v, _) = billiard_step(c, u).unwrap();
        let back = billiard_step_inverse(c, v).unwrap();
        prop_assert!(arc_gap(c, back.s, u.s) < 1e-10);
        prop_assert!((back.phi - u.phi).abs() < 1e-10);
    }

    #[test]
    fn step_stays_in_phase_space(which in 0usize..3, s in 0.0f64..1.0, phi in 1e-3f64..(PI - 1e-3)) {
        let c = tables()[which];
        let (v, chord) = billiard_step(c, PhasePoint::new(s * c.perimeter, phi)).unwrap();
        prop_assert!(v.s >= 0.0 && v.s < c.perimeter);
        prop_assert!(v.phi > 0.0 && v.phi < PI);
        prop_assert!(chord.length > 0.0);
    }

    #[test]
    fn chord_length_is_symmetric(which in 0usize..3, a in 0.0f64..1.0, b in 0.05f64..0.95) {
        let c = tables()[which];
        let (x, y) = (a * c.perimeter, (a + b) * c.perimeter);
        let g = generating_derivatives(c, x, y).unwrap();
        let h = generating_derivatives(c, y, x).unwrap();
        prop_assert!((g.l - h.l).abs() < 1e-12);
        prop_assert!((g.l12 - h.l12).abs() < 1e-9);
        prop_assert!((g.l11 - h.l22).abs() < 1e-9);
        prop_assert!(g.l12 > 0.0);
    }
}
