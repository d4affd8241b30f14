//! First and second derivatives of the intersection function at the
//! normalized frame, the `(sigma, omega)` crossing reparameterization, the
//! `f`/`g` lower-bound machinery and the stationarity residual `D`.
//!
//! With crossings `zeta_j = e^{i xi_j}` (enters at odd 1-based `j`):
//!
//! ```text
//!  I'(0) = 1/2 sum_{j<=2n} (-1)^j sin 2 xi_j
//! -I''(0) = 1/4 sum_{j<=2n} [ (-1)^j sin 4 xi_j + (1 + cos 4 xi_j) / tan alpha_j ]
//!       D = sum_{j odd} zeta_j^2 - sum_{j even} zeta_j^2      (all 4n terms)
//! ```
//!
//! `deriv2` returns the signed `I''(0)` itself, not the negated quantity
//! appearing on the left of the second formula.

use num_complex::Complex;
use thiserror::Error;

use crate::intersect::CrossingSet;
use crate::scalar::{real, Real};

/// Minimum admissible crossing angle for second-derivative evaluation.
const MIN_ALPHA: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("crossing set contains tangencies; derivatives are unreliable")]
    TangencyPresent,
    #[error("crossing set is empty")]
    NoCrossings,
    #[error("crossing angle {0} is too close to zero")]
    DegenerateAngle(f64),
    #[error("argument {0} outside the domain")]
    DomainError(f64),
}

/// Derived pair parameters of a crossing set: `sigma_i = xi_2i + xi_{2i-1}`,
/// `omega_i = xi_2i - xi_{2i-1}` for `i = 1..n` (the second half repeats
/// with `sigma_{i+n} = sigma_i + 2pi`, `omega_{i+n} = omega_i`), plus the
/// stationarity residual `D`.
#[derive(Clone, Debug)]
pub struct IntersectionProfile<T> {
    pub sigma: Vec<T>,
    pub omega: Vec<T>,
    pub d: Complex<T>,
}

fn require_transverse<T: Real>(cs: &CrossingSet<T>) -> Result<(), VariationError> {
    if cs.is_empty() {
        return Err(VariationError::NoCrossings);
    }
    if cs.has_tangency() {
        return Err(VariationError::TangencyPresent);
    }
    Ok(())
}

/// First derivative `I'(0)` of the intersection function.
pub fn deriv1<T: Real>(cs: &CrossingSet<T>) -> Result<T, VariationError> {
    require_transverse(cs)?;
    let quarter = real::<T>(0.25);
    let two = real::<T>(2.0);
    let mut acc = T::zero();
    for (j0, c) in cs.crossings().iter().enumerate() {
        let sign = if j0 % 2 == 0 { -T::one() } else { T::one() };
        acc += sign * (two * c.xi).sin();
    }
    Ok(acc * quarter)
}

/// Second derivative `I''(0)` (signed).
pub fn deriv2<T: Real>(cs: &CrossingSet<T>) -> Result<T, VariationError> {
    require_transverse(cs)?;
    let four = real::<T>(4.0);
    let alpha_min = T::tol(MIN_ALPHA);
    let mut acc = T::zero();
    for (j0, c) in cs.crossings().iter().enumerate() {
        if c.alpha < alpha_min {
            return Err(VariationError::DegenerateAngle(
                c.alpha.to_f64().unwrap_or(0.0),
            ));
        }
        let sign = if j0 % 2 == 0 { -T::one() } else { T::one() };
        let four_xi = four * c.xi;
        acc += sign * four_xi.sin() + (T::one() + four_xi.cos()) / c.alpha.tan();
    }
    // acc/8 is -I''(0) over all 4n crossings
    Ok(-acc / real::<T>(8.0))
}

/// Stationarity residual `D`; vanishes exactly at maximal-intersection
/// stationarity. Rotating the body by `phi` turns the first derivative
/// into `-Im(e^{2 i phi} D) / 4`.
pub fn residual_d<T: Real>(cs: &CrossingSet<T>) -> Result<Complex<T>, VariationError> {
    require_transverse(cs)?;
    Ok(residual_d_unchecked(cs))
}

/// `D` evaluated from crossing positions even when tangency flags are set
/// (the first-derivative formula remains valid at quasitransverse contact;
/// only second-derivative data becomes unreliable).
pub fn residual_d_lenient<T: Real>(cs: &CrossingSet<T>) -> Result<Complex<T>, VariationError> {
    if cs.is_empty() {
        return Err(VariationError::NoCrossings);
    }
    Ok(residual_d_unchecked(cs))
}

fn residual_d_unchecked<T: Real>(cs: &CrossingSet<T>) -> Complex<T> {
    let two = real::<T>(2.0);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (j0, c) in cs.crossings().iter().enumerate() {
        let z2 = Complex::from_polar(T::one(), two * c.xi);
        if j0 % 2 == 0 {
            acc += z2; // odd 1-based index: enter
        } else {
            acc -= z2;
        }
    }
    acc
}

/// Reduced `(sigma, omega)` parameters and residual of a transverse set.
pub fn pair_profile<T: Real>(
    cs: &CrossingSet<T>,
) -> Result<IntersectionProfile<T>, VariationError> {
    require_transverse(cs)?;
    let cr = cs.crossings();
    let n = cr.len() / 4;
    let mut sigma = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for i in 0..n {
        let lo = cr[2 * i].xi;
        let hi = cr[2 * i + 1].xi;
        sigma.push(hi + lo);
        omega.push(hi - lo);
    }
    Ok(IntersectionProfile {
        sigma,
        omega,
        d: residual_d_unchecked(cs),
    })
}

/// `f(omega) = cot(omega/2) - sin(omega)` on `(0, pi)`; decreasing on
/// `(0, 2pi/3]`, crosses `sin` at `pi/3`, and `min f > -0.31`.
pub fn f_gap<T: Real>(omega: T) -> Result<T, VariationError> {
    if !(omega > T::zero() && omega < T::PI()) {
        return Err(VariationError::DomainError(omega.to_f64().unwrap_or(0.0)));
    }
    let half = real::<T>(0.5);
    Ok((omega * half).tan().recip() - omega.sin())
}

/// `g(omega, sigma) = sin(omega) sin^2(sigma) + f(omega) cos^2(sigma)`.
pub fn g_form<T: Real>(omega: T, sigma: T) -> Result<T, VariationError> {
    let f = f_gap(omega)?;
    let c = sigma.cos();
    let s = sigma.sin();
    Ok(omega.sin() * s * s + f * c * c)
}

/// Lower bound `sum_i g(omega_i, sigma_i) <= -I''(0)`, valid whenever the
/// crossing set comes from a convex body (the angle bound
/// `alpha <= omega/2` is what makes it true).
pub fn deriv2_lower_bound<T: Real>(profile: &IntersectionProfile<T>) -> T {
    profile
        .omega
        .iter()
        .zip(&profile.sigma)
        .map(|(&w, &s)| g_form(w, s).unwrap_or(T::zero()))
        .sum()
}

/// Evaluable positivity certificate for `max{|I'(0)|, -I''(0)}` under the
/// area hypothesis `eps <= I(0) <= min{pi, area K} - eps`.
#[derive(Clone, Copy, Debug)]
pub struct KeyCertificate<T> {
    pub d1: T,
    pub d2: T,
    pub bound: T,
    pub hypothesis_ok: bool,
    pub positive: bool,
}

pub fn key_certificate<T: Real>(
    cs: &CrossingSet<T>,
    intersection: T,
    body_area: T,
    eps: T,
) -> Result<KeyCertificate<T>, VariationError> {
    let d1 = deriv1(cs)?;
    let d2 = deriv2(cs)?;
    let bound = deriv2_lower_bound(&pair_profile(cs)?);
    let cap = T::PI().min(body_area) - eps;
    let hypothesis_ok = intersection >= eps && intersection <= cap;
    let positive = d1.abs().max(-d2) > T::zero();
    Ok(KeyCertificate {
        d1,
        d2,
        bound,
        hypothesis_ok,
        positive,
    })
}
