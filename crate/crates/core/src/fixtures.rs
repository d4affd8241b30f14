//! Built-in regression bodies shared by the test suites and the CLI.

use crate::body::{ConvexBody, ImplicitCoeffs};
use crate::geom::Vec2;
use crate::scalar::{real, Real};

/// Quartic-level-set body in maximal-intersection position (the `fig1`
/// fixture of the CLI): its boundary crosses the unit circle at eight
/// points forming a quarter-turn-invariant set, while the body itself has
/// no linear symmetry beyond central symmetry.
pub fn fig1_coeffs<T: Real>() -> ImplicitCoeffs<T> {
    ImplicitCoeffs {
        x2: real(1.355),
        xy: real(-0.58),
        y2: real(1.005),
        x4: real(-0.1264),
        x3y: real(0.58),
        x2y2: real(-1.041),
        xy3: real(0.58),
        y4: real(0.2236),
    }
}

pub fn fig1_body<T: Real>() -> ConvexBody<T> {
    ConvexBody::from_implicit(fig1_coeffs(), 2048).expect("fig1 fixture is a valid convex body")
}

/// Square with corners `(+-1, +-1)`.
pub fn square_body<T: Real>() -> ConvexBody<T> {
    rectangle_body(real(1.0), real(1.0))
}

/// Axis-aligned rectangle `[-w, w] x [-h, h]`.
pub fn rectangle_body<T: Real>(w: T, h: T) -> ConvexBody<T> {
    ConvexBody::from_polygon(&[
        Vec2::new(w, h),
        Vec2::new(-w, h),
        Vec2::new(-w, -h),
        Vec2::new(w, -h),
    ])
    .expect("rectangle vertices are valid")
}

/// The wide thin rectangle `[-10, 10] x [-1/2, 1/2]` used as a truncated
/// strip stand-in in the regression suites.
pub fn strip_body<T: Real>() -> ConvexBody<T> {
    rectangle_body(real(10.0), real(0.5))
}
