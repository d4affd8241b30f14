//! Origin-centered ellipses of prescribed area.
//!
//! The standard family `E_t = { e^t x^2 + e^{-t} y^2 <= 1 }` (all of area
//! pi) is the `phi = 0` slice; a general member is specified by a
//! log-aspect `t`, a rotation `phi` and an area, or equivalently by its
//! positive-definite quadratic form `Q` with `E = { x : x^T Q x <= 1 }`.

use serde::{Deserialize, Serialize};

use crate::geom::{Mat2, Vec2};
use crate::scalar::{real, Real};

/// Origin-centered ellipse `{ x : x^T Q x <= 1 }` of area `pi / sqrt(det Q)`.
///
/// Stored coordinates are canonical: `t >= 0`, `phi` in `[0, pi)`, and
/// `phi = 0` whenever `t = 0` (the `(t, phi)` chart double-covers the
/// ellipse space via `(t, phi) ~ (-t, phi + pi/2)`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenteredEllipse<T> {
    t: T,
    phi: T,
    area: T,
    form: Mat2<T>,
}

impl<T: Real> CenteredEllipse<T> {
    /// Ellipse with log-aspect `t`, axis rotation `phi`, and given area.
    pub fn new(t: T, phi: T, area: T) -> Self {
        assert!(
            area > T::zero() && area.is_finite(),
            "ellipse area must be positive"
        );
        let (t, phi) = canonicalize(t, phi);
        let scale = T::PI() / area;
        let r = Mat2::rotation(phi);
        let form = r * Mat2::diag(t.exp() * scale, (-t).exp() * scale) * r.transpose();
        Self { t, phi, area, form }
    }

    /// Member `E_t` of the standard area-pi family.
    pub fn standard(t: T) -> Self {
        Self::new(t, T::zero(), T::PI())
    }

    /// Unit disk.
    pub fn unit_disk() -> Self {
        Self::standard(T::zero())
    }

    /// Recover `(t, phi, area)` from a symmetric positive-definite form.
    pub fn from_form(q: Mat2<T>) -> Self {
        assert!(
            q.is_symmetric(T::tol(1e-9) * (T::one() + q.a.abs() + q.d.abs())),
            "form must be symmetric"
        );
        let det = q.det();
        assert!(det > T::zero(), "form must be positive definite");
        let area = T::PI() / det.sqrt();
        let (l_max, l_min, phi_max) = q.sym_eigen();
        // larger eigenvalue <-> shorter axis <-> t > 0 along its direction
        let t = (l_max / l_min).ln() * real::<T>(0.5);
        Self::new(t, phi_max, area)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn area(&self) -> T {
        self.area
    }

    pub fn form(&self) -> Mat2<T> {
        self.form
    }

    /// Semi-axis lengths `(along phi, along phi + pi/2)`.
    pub fn semi_axes(&self) -> (T, T) {
        let scale = self.area / T::PI();
        let a = (scale * (-self.t).exp()).sqrt();
        let b = (scale * self.t.exp()).sqrt();
        (a, b)
    }

    /// Squared radial function `rho(theta)`: for the standard member this is
    /// `1 / (e^t cos^2 theta + e^{-t} sin^2 theta)`.
    pub fn radial_sq(&self, theta: T) -> T {
        T::one() / self.form.quad_form(Vec2::unit(theta))
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        self.form.quad_form(p) <= T::one()
    }

    /// Support function value in unit direction `u`.
    pub fn support(&self, u: Vec2<T>) -> T {
        let qi = self.form.inverse().expect("form is positive definite");
        qi.quad_form(u).sqrt()
    }

    /// Frame change onto the unit disk: returns `(L, s)` with `det L = 1`
    /// such that `x -> s * L x` maps this ellipse onto the unit disk.
    pub fn normalize_to_disk(&self) -> (Mat2<T>, T) {
        // symmetric square root of Q maps the ellipse onto the disk
        let r = Mat2::rotation(self.phi);
        let scale = T::PI() / self.area;
        let sqrt_q =
            r * Mat2::diag(
                (self.t.exp() * scale).sqrt(),
                ((-self.t).exp() * scale).sqrt(),
            ) * r.transpose();
        let s = sqrt_q.det().sqrt();
        (sqrt_q.scale(T::one() / s), s)
    }

    /// Full normalizing map `s * L` as a single matrix.
    pub fn normalizing_map(&self) -> Mat2<T> {
        let (l, s) = self.normalize_to_disk();
        l.scale(s)
    }
}

fn canonicalize<T: Real>(t: T, phi: T) -> (T, T) {
    let pi = T::PI();
    let half_pi = pi * real::<T>(0.5);
    let (mut t, mut phi) = if t < T::zero() {
        (-t, phi + half_pi)
    } else {
        (t, phi)
    };
    phi %= pi;
    if phi < T::zero() {
        phi += pi;
    }
    if t <= T::epsilon() * real::<T>(4.0) {
        t = t.max(T::zero());
        if t == T::zero() {
            phi = T::zero();
        }
    }
    (t, phi)
}

/// JSON form `{"t":..., "phi":..., "area":...}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct EllipseSpec {
    pub t: f64,
    pub phi: f64,
    pub area: f64,
}

impl<T: Real> CenteredEllipse<T> {
    pub fn from_spec(spec: &EllipseSpec) -> Self {
        Self::new(real(spec.t), real(spec.phi), real(spec.area))
    }

    pub fn to_spec(&self) -> EllipseSpec {
        EllipseSpec {
            t: self.t.to_f64().unwrap(),
            phi: self.phi.to_f64().unwrap(),
            area: self.area.to_f64().unwrap(),
        }
    }
}
