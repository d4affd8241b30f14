//! Small fixed-size linear algebra: plane vectors and 2x2 matrices.
//!
//! The crate only ever needs 2x2 operations (products, inverses, symmetric
//! eigendecompositions, exponentials of traceless matrices), so these are
//! written out explicitly instead of pulling in a general matrix library.

use crate::scalar::{real, Real};

/// Plane vector.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn unit(theta: T) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product `self x o`.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> std::ops::Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> std::ops::Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> std::ops::Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(x: T, y: T) -> Self {
        Self::new(x, T::zero(), T::zero(), y)
    }

    /// Counterclockwise rotation by `phi`.
    pub fn rotation(phi: T) -> Self {
        let (s, c) = phi.sin_cos();
        Self::new(c, -s, s, c)
    }

    pub fn det(self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn apply(self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn inverse(self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let inv = T::one() / det;
        Some(Self::new(
            self.d * inv,
            -self.b * inv,
            -self.c * inv,
            self.a * inv,
        ))
    }

    /// Quadratic form `v^T M v`.
    pub fn quad_form(self, v: Vec2<T>) -> T {
        v.dot(self.apply(v))
    }

    pub fn is_symmetric(self, tol: T) -> bool {
        (self.b - self.c).abs() <= tol
    }

    /// Eigendecomposition of a symmetric matrix: returns
    /// `(l_max, l_min, phi)` where `phi` in `[0, pi)` is the angle of the
    /// eigenvector for the larger eigenvalue.
    pub fn sym_eigen(self) -> (T, T, T) {
        let half = real::<T>(0.5);
        let mean = (self.a + self.d) * half;
        let delta = (self.a - self.d) * half;
        let off = (self.b + self.c) * half;
        let disc = (delta * delta + off * off).sqrt();
        let l_max = mean + disc;
        let l_min = mean - disc;
        let phi = if disc <= T::epsilon() * (T::one() + mean.abs()) {
            T::zero()
        } else {
            // eigenvector of l_max; pick the better-conditioned expression
            let v = if delta >= T::zero() {
                Vec2::new(delta + disc, off)
            } else {
                Vec2::new(off, disc - delta)
            };
            let mut ang = v.angle();
            if ang < T::zero() {
                ang += T::PI();
            }
            if ang >= T::PI() {
                ang -= T::PI();
            }
            ang
        };
        (l_max, l_min, phi)
    }

    /// Matrix exponential of a traceless matrix (`a + d = 0`).
    ///
    /// For traceless `X`, `X^2 = -det(X) I`, so the exponential has the
    /// closed form `cosh(m) I + sinh(m)/m X` with `m = sqrt(-det X)`
    /// (trigonometric branch when `det X > 0`). The result has determinant 1.
    pub fn exp_traceless(self) -> Self {
        let q = -self.det();
        let tiny = T::epsilon() * real::<T>(16.0);
        let (c, s_over_m) = if q > tiny {
            let m = q.sqrt();
            (m.cosh(), m.sinh() / m)
        } else if q < -tiny {
            let m = (-q).sqrt();
            (m.cos(), m.sin() / m)
        } else {
            (T::one(), T::one())
        };
        Self::new(
            c + s_over_m * self.a,
            s_over_m * self.b,
            s_over_m * self.c,
            c + s_over_m * self.d,
        )
    }
}

impl<T: Real> std::ops::Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// Signed area of a polygon (shoelace formula); positive for
/// counterclockwise orientation.
pub fn polygon_signed_area<T: Real>(vertices: &[Vec2<T>]) -> T {
    let half = real::<T>(0.5);
    let mut acc = T::zero();
    for (k, &v) in vertices.iter().enumerate() {
        let w = vertices[(k + 1) % vertices.len()];
        acc += v.cross(w);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_and_inverse() {
        let r = Mat2::<f64>::rotation(0.7);
        let ri = r.inverse().unwrap();
        let p = r * ri;
        assert!((p.a - 1.0).abs() < 1e-15 && (p.d - 1.0).abs() < 1e-15);
        assert!(p.b.abs() < 1e-15 && p.c.abs() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sym_eigen_recovers_rotation() {
        let phi = 1.1_f64;
        let r = Mat2::rotation(phi);
        let q = r * Mat2::diag(3.0, 0.5) * r.transpose();
        let (l1, l2, ang) = q.sym_eigen();
        assert!((l1 - 3.0).abs() < 1e-12);
        assert!((l2 - 0.5).abs() < 1e-12);
        assert!((ang - phi).abs() < 1e-12);
    }

    #[test]
    fn exp_traceless_has_unit_det() {
        let x = Mat2::new(0.3_f64, -0.2, 0.5, -0.3);
        let e = x.exp_traceless();
        assert!((e.det() - 1.0).abs() < 1e-14);
        // hyperbolic branch against scalar exp: diag(t, -t)
        let d = Mat2::new(0.4_f64, 0.0, 0.0, -0.4).exp_traceless();
        assert!((d.a - 0.4_f64.exp()).abs() < 1e-15);
        assert!((d.d - (-0.4_f64).exp()).abs() < 1e-15);
        // rotation branch: [[0, -t], [t, 0]] -> rotation by t
        let r = Mat2::new(0.0_f64, -0.9, 0.9, 0.0).exp_traceless();
        let rr = Mat2::rotation(0.9);
        assert!((r.a - rr.a).abs() < 1e-15 && (r.b - rr.b).abs() < 1e-15);
    }

    #[test]
    fn shoelace_square() {
        let v = [
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
        ];
        assert_eq!(polygon_signed_area(&v), 4.0);
    }
}
