//! Maximal-intersection (MI), John and Loewner ellipses of centrally
//! symmetric planar convex bodies under the symmetric difference metric.
//!
//! Among all ellipses of a fixed area `lambda` between the John and
//! Loewner areas of a body `K`, a unique one maximizes `area(E cap K)`,
//! and equivalently best approximates `K` in the symmetric difference
//! metric. This crate computes that ellipse together with the machinery
//! around it: radial-function bodies ([`body`]), the ellipse family and
//! its charts ([`conic`]), boundary crossing analysis ([`intersect`]),
//! closed-form first/second derivatives of the intersection function with
//! quasiconcavity certificates ([`variation`]), the extremal ellipses
//! ([`extremal`]), the MI solver and probes ([`solver`]), MI-position
//! tests with balanced isotropic measures ([`position`]), and independent
//! brute-force oracles ([`oracle`]).
//!
//! All geometry is generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the `F64`-suffixed aliases below are the concrete
//! types most callers want.

pub mod body;
pub mod conic;
pub mod extremal;
pub mod fixtures;
pub mod geom;
pub mod intersect;
pub mod oracle;
pub mod position;
pub mod quad;
pub mod sample;
pub mod scalar;
pub mod solver;
pub mod variation;

pub use body::{BodyError, BodySpec, ConvexBody, ImplicitCoeffs};
pub use conic::{CenteredEllipse, EllipseSpec};
pub use extremal::{john_ellipse, loewner_ellipse, ExtremalKind, ExtremalResult};
pub use intersect::{
    find_crossings, intersection_area, intersection_profile, symdiff_distance, Containment,
    CrossError, Crossing, CrossingSet, Parity,
};
pub use oracle::{
    clip_area, fd_derivative, grid_search_mi, mc_area, mc_intersection_area, OracleEstimate,
    OracleMethod,
};
pub use position::{
    check_mi_position, converse_counterexample_check, isotropic_weights, IsotropicMeasure,
    MiPositionReport, PositionError,
};
pub use scalar::Real;
pub use solver::{
    displaced_center_check, mi_ellipse, mi_family, quasiconcavity_probe, MIResult, SolveError,
    SolveOptions,
};
pub use variation::{
    deriv1, deriv2, deriv2_lower_bound, f_gap, g_form, key_certificate, pair_profile, residual_d,
    IntersectionProfile, KeyCertificate, VariationError,
};

/// Concrete double-precision aliases.
pub type BodyF64 = body::ConvexBody<f64>;
pub type EllipseF64 = conic::CenteredEllipse<f64>;
pub type CrossingSetF64 = intersect::CrossingSet<f64>;
pub type MIResultF64 = solver::MIResult<f64>;
pub type Vec2F64 = geom::Vec2<f64>;
pub type Mat2F64 = geom::Mat2<f64>;
