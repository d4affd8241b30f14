//! Maximal-intersection position testing and balanced isotropic measures
//! on the crossing points.
//!
//! A transverse body is in MI position exactly when the parity-signed sum
//! of squared crossing points vanishes: `sum_odd zeta_j^2 = sum_even
//! zeta_j^2` (writing the plane as complex numbers). A 4-crossing body can
//! never be stationary; an 8-crossing body is stationary iff its crossing
//! set is invariant under a quarter turn. At stationarity the origin lies
//! in the convex hull of the squares, which yields a balanced isotropic
//! measure supported on the crossings. The converse fails: the 12-point
//! configuration checked by [`converse_counterexample_check`] carries a
//! balanced isotropic measure while `D != 0`.

use num_complex::Complex;
use thiserror::Error;

use crate::body::ConvexBody;
use crate::conic::CenteredEllipse;
use crate::geom::Vec2;
use crate::intersect::{find_crossings, CrossError, Crossing, CrossingSet, Parity};
use crate::scalar::{real, Real};
use crate::variation::residual_d_lenient;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PositionError {
    #[error("boundary is tangent to the unit circle; MI-position test needs transversality")]
    TangencyPresent,
    #[error("boundary does not meet the unit circle")]
    NoCrossings,
    #[error("crossing set is not stationary (|D| = {0})")]
    NotStationary(f64),
    #[error("numerical hull of the squared crossings does not contain the origin")]
    InfeasibleHull,
    #[error(transparent)]
    Crossing(#[from] CrossError),
}

/// Outcome of the MI-position test against the unit disk.
#[derive(Clone, Debug)]
pub struct MiPositionReport<T> {
    pub is_mi: bool,
    /// `|D|` over the crossing set.
    pub residual: T,
    /// Worst angular deviation of the crossing set from quarter-turn
    /// invariance (small iff the set maps into itself under rotation by
    /// `pi/2`).
    pub quarter_turn_residual: T,
    pub crossings: CrossingSet<T>,
}

/// Test whether the unit disk is an MI ellipse for the body.
pub fn check_mi_position<T: Real>(
    body: &ConvexBody<T>,
    tol: T,
) -> Result<MiPositionReport<T>, PositionError> {
    let cs = find_crossings(body, &CenteredEllipse::unit_disk(), T::tol(1e-12))?;
    if cs.is_empty() {
        return Err(PositionError::NoCrossings);
    }
    if cs.has_tangency() {
        return Err(PositionError::TangencyPresent);
    }
    let d = residual_d_lenient(&cs).map_err(|_| PositionError::NoCrossings)?;
    let residual = d.norm();
    // a 4-crossing configuration can never be stationary
    let is_mi = cs.n() >= 2 && residual <= tol;
    let quarter_turn_residual = quarter_turn_residual(&cs);
    Ok(MiPositionReport {
        is_mi,
        residual,
        quarter_turn_residual,
        crossings: cs,
    })
}

fn quarter_turn_residual<T: Real>(cs: &CrossingSet<T>) -> T {
    let half_pi = T::FRAC_PI_2();
    let two_pi = T::PI() + T::PI();
    let mut worst = T::zero();
    for c in cs.crossings() {
        let target = (c.xi + half_pi) % two_pi;
        let best = cs
            .crossings()
            .iter()
            .map(|o| {
                let mut gap = (o.xi - target).abs() % two_pi;
                if gap > T::PI() {
                    gap = two_pi - gap;
                }
                gap
            })
            .fold(T::infinity(), |a, b| a.min(b));
        worst = worst.max(best);
    }
    worst
}

/// Discrete measure on unit vectors.
#[derive(Clone, Debug)]
pub struct IsotropicMeasure<T> {
    pub support: Vec<Vec2<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> IsotropicMeasure<T> {
    pub fn uniform(support: Vec<Vec2<T>>) -> Self {
        let w = T::one() / real::<T>(support.len() as f64);
        let weights = vec![w; support.len()];
        Self { support, weights }
    }

    /// `| sum p_j zeta_j |` (zero for a balanced measure).
    pub fn balanced_residual(&self) -> T {
        let mut acc = Vec2::new(T::zero(), T::zero());
        for (p, &w) in self.support.iter().zip(&self.weights) {
            acc = acc + p.scale(w);
        }
        acc.norm()
    }

    /// Worst deviation of `sum p_j <zeta_j, v>^2` from `1/2` over a fan of
    /// unit test directions (`c = 1/2` in the plane).
    pub fn isotropy_residual(&self, directions: usize) -> T {
        let half = real::<T>(0.5);
        let mut worst = T::zero();
        for k in 0..directions {
            let v = Vec2::unit(T::PI() * real::<T>(k as f64) / real::<T>(directions as f64));
            let mut acc = T::zero();
            for (p, &w) in self.support.iter().zip(&self.weights) {
                let dot = p.dot(v);
                acc += w * dot * dot;
            }
            worst = worst.max((acc - half).abs());
        }
        worst
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

/// Construct a balanced isotropic measure supported on the crossings of a
/// stationary set by writing the origin as a convex combination of the
/// squared crossing points.
pub fn isotropic_weights<T: Real>(
    cs: &CrossingSet<T>,
    tol: T,
) -> Result<IsotropicMeasure<T>, PositionError> {
    if cs.is_empty() {
        return Err(PositionError::NoCrossings);
    }
    if cs.has_tangency() {
        return Err(PositionError::TangencyPresent);
    }
    let d = residual_d_lenient(cs).map_err(|_| PositionError::NoCrossings)?;
    if d.norm() > tol || cs.n() < 2 {
        return Err(PositionError::NotStationary(
            d.norm().to_f64().unwrap_or(f64::NAN),
        ));
    }

    let cr = cs.crossings();
    let half_count = cr.len() / 2;
    let two = real::<T>(2.0);
    // distinct squares: the antipodal partner repeats them
    let squares: Vec<Vec2<T>> = cr[..half_count]
        .iter()
        .map(|c| {
            let z = Complex::from_polar(T::one(), two * c.xi);
            Vec2::new(z.re, z.im)
        })
        .collect();

    let q = convex_weights_for_origin(&squares)?;

    // split each square weight over its antipodal crossing pair
    let half = real::<T>(0.5);
    let mut weights = vec![T::zero(); cr.len()];
    for (k, &w) in q.iter().enumerate() {
        weights[k] = w * half;
        weights[k + half_count] = w * half;
    }
    let support = cr.iter().map(|c| c.point()).collect();
    Ok(IsotropicMeasure { support, weights })
}

/// Express the origin as a convex combination of unit vectors, by pairs of
/// near-antipodal points or by enumerating triangles containing the
/// origin (exact at this scale; no LP needed).
fn convex_weights_for_origin<T: Real>(points: &[Vec2<T>]) -> Result<Vec<T>, PositionError> {
    let m = points.len();
    let half = real::<T>(0.5);
    let pair_tol = T::tol(1e-9);

    let mut best_pair: Option<(usize, usize, T)> = None;
    for a in 0..m {
        for b in (a + 1)..m {
            let gap = (points[a] + points[b]).norm();
            if best_pair.map(|(_, _, g)| gap < g).unwrap_or(true) {
                best_pair = Some((a, b, gap));
            }
        }
    }
    if let Some((a, b, gap)) = best_pair {
        if gap <= pair_tol {
            let mut w = vec![T::zero(); m];
            w[a] = half;
            w[b] = half;
            return Ok(w);
        }
    }

    // triangles: keep the best-conditioned feasible one
    let mut best: Option<(usize, usize, usize, [T; 3], T)> = None;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                if let Some(bary) = triangle_weights(points[a], points[b], points[c]) {
                    let score = bary[0].min(bary[1]).min(bary[2]);
                    if best.map(|(_, _, _, _, s)| score > s).unwrap_or(true) {
                        best = Some((a, b, c, bary, score));
                    }
                }
            }
        }
    }
    match best {
        Some((a, b, c, bary, score)) if score >= -T::tol(1e-12) => {
            let mut w = vec![T::zero(); m];
            w[a] = bary[0].max(T::zero());
            w[b] = bary[1].max(T::zero());
            w[c] = bary[2].max(T::zero());
            let total = w.iter().copied().sum::<T>();
            for x in w.iter_mut() {
                *x /= total;
            }
            Ok(w)
        }
        _ => Err(PositionError::InfeasibleHull),
    }
}

/// Barycentric coordinates of the origin in triangle `(a, b, c)`, if the
/// triangle is nondegenerate.
fn triangle_weights<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> Option<[T; 3]> {
    let det = (b - a).cross(c - a);
    if det.abs() <= T::epsilon() * real::<T>(16.0) {
        return None;
    }
    // signed areas of the sub-triangles spanned with the origin
    let wa = b.cross(c) / det;
    let wb = c.cross(a) / det;
    let wc = a.cross(b) / det;
    Some([wa, wb, wc])
}

/// Parity sums and measure residuals of the quarter-turn-invariant
/// 12-point configuration `{ e^{i k pi/2}, e^{i(k pi/2 +- eps)} : k < 4 }`.
/// The uniform measure on it is balanced and isotropic for every `eps`,
/// yet the configuration is stationary only at the single value
/// `eps = pi/6`: existence of a balanced isotropic measure does not imply
/// MI position.
#[derive(Clone, Debug)]
pub struct ConverseReport<T> {
    pub odd_sum: Complex<T>,
    pub even_sum: Complex<T>,
    pub d: Complex<T>,
    pub balanced_residual: T,
    pub isotropy_residual: T,
}

pub fn converse_counterexample_check<T: Real>(eps: T) -> ConverseReport<T> {
    assert!(
        eps > T::zero() && eps < T::FRAC_PI_4(),
        "eps must lie in (0, pi/4)"
    );
    let half_pi = T::FRAC_PI_2();
    let two_pi = T::PI() + T::PI();
    let mut angles = Vec::with_capacity(12);
    for k in 0..4 {
        let base = half_pi * real::<T>(k as f64);
        for off in [-eps, T::zero(), eps] {
            let mut a = (base + off) % two_pi;
            if a < T::zero() {
                a += two_pi;
            }
            angles.push(a);
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let crossings: Vec<Crossing<T>> = angles
        .iter()
        .enumerate()
        .map(|(k, &xi)| Crossing {
            xi,
            parity: if k % 2 == 0 {
                Parity::Enter
            } else {
                Parity::Exit
            },
            alpha: T::FRAC_PI_4(),
            tangency: false,
        })
        .collect();
    let cs = CrossingSet::synthetic(crossings).expect("12-point set is a valid configuration");

    let two = real::<T>(2.0);
    let mut odd_sum = Complex::new(T::zero(), T::zero());
    let mut even_sum = Complex::new(T::zero(), T::zero());
    for (j0, c) in cs.crossings().iter().enumerate() {
        let z2 = Complex::from_polar(T::one(), two * c.xi);
        if j0 % 2 == 0 {
            odd_sum += z2;
        } else {
            even_sum += z2;
        }
    }

    let measure = IsotropicMeasure::uniform(cs.crossings().iter().map(|c| c.point()).collect());
    ConverseReport {
        odd_sum,
        even_sum,
        d: odd_sum - even_sum,
        balanced_residual: measure.balanced_residual(),
        isotropy_residual: measure.isotropy_residual(16),
    }
}
