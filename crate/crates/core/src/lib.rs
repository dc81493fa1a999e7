//! Numerical laboratory for quantitative Hopf rigidity.
//!
//! Two families of systems are covered:
//!
//! * convex billiards on the plane, the sphere and the hyperbolic plane
//!   ([`curves`], [`billiard`], [`billiard_bounds`]);
//! * geodesic flows of conformally flat metrics `g = f·g₀` on the torus
//!   ([`conformal_metric`], [`geodesic_bounds`], [`geodesic_sim`]).
//!
//! For each, closed-form lower bounds on the fraction `δ` of phase space not
//! filled by minimal orbits are evaluated and compared against Monte Carlo
//! estimates obtained by detecting conjugate points along sampled orbits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard;
pub mod billiard_bounds;
pub mod conformal_metric;
pub mod curves;
pub mod error;
pub mod geodesic_bounds;
pub mod geodesic_sim;
pub mod geometry;
pub mod identities;
pub mod ode;
pub mod quadrature;
pub mod sampling;

pub use billiard::{ChordData, DeltaEstimate, PhasePoint, Window};
pub use billiard_bounds::{bounds_for_curve, evaluate_billiard_bounds, BoundFlags, BoundReport};
pub use conformal_metric::{CurvatureField, MetricField, TrigPoly};
pub use curves::{build_curve, CurveSpec, SampledCurve};
pub use error::{Error, Result};
pub use geodesic_bounds::{GeodesicBoundReport, PsiSpec};
pub use geometry::{JacobiState, SurfaceKind, SurfacePoint, TangentDir};
