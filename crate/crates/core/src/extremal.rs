//! John (maximal inscribed) and Loewner (minimal circumscribed) centered
//! ellipses.
//!
//! Central symmetry makes both optimal ellipses origin-centered, so the
//! circumscribed problem reduces to a centered minimum-area enclosing
//! ellipse of boundary samples, solved by a Frank-Wolfe / multiplicative
//! weights iteration with away steps (Khachiyan-style, specialized to the
//! fixed-center case where the KKT condition is `x^T M(u)^{-1} x <= 2`).
//! The inscribed ellipse is obtained by polar duality: the John ellipse is
//! the polar of the Loewner ellipse of the polar body.

use thiserror::Error;

use crate::body::ConvexBody;
use crate::conic::CenteredEllipse;
use crate::geom::{Mat2, Vec2};
use crate::scalar::{real, Real};

/// Boundary samples used by the weight iteration.
const SAMPLE_POINTS: usize = 720;
/// Verification grid.
const VERIFY_POINTS: usize = 2880;
const MAX_MVEE_ITER: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremalError {
    #[error("ellipsoid iteration failed to converge within {0} steps")]
    IterationLimit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremalKind {
    John,
    Loewner,
}

#[derive(Clone, Debug)]
pub struct ExtremalResult<T> {
    pub ellipse: CenteredEllipse<T>,
    pub kind: ExtremalKind,
    /// Complementarity residual of the weight iteration plus any
    /// containment correction applied during verification.
    pub optimality_gap: T,
}

/// Minimal-area centered ellipse containing the body.
///
/// A Khachiyan-style multiplicative-weights pass over a 720-point boundary
/// sample produces the shape estimate; a cyclic golden-section polish on
/// the `(t, phi)` shape chart against the exact radial profile then
/// removes the sampling bias, and containment is verified on a finer grid.
pub fn loewner_ellipse<T: Real>(
    body: &ConvexBody<T>,
    tol: T,
) -> Result<ExtremalResult<T>, ExtremalError> {
    let mut pts = body.boundary_points(SAMPLE_POINTS);
    if let Some(vertices) = body.polygon_vertices() {
        pts.extend_from_slice(vertices);
    }
    let mvee_tol = tol.max(T::tol(1e-6));
    let (q, _gap) = centered_mvee(&pts, mvee_tol)?;
    let shape = CenteredEllipse::from_form(q);
    let (t, phi, area) = polish_shape(body, shape.t(), shape.phi(), Extremum::Max);
    let candidate = CenteredEllipse::new(t, phi, area);

    // verify containment on the finer grid and rescale to fit
    let q = candidate.form();
    let mut worst = T::zero();
    for p in body.boundary_points(VERIFY_POINTS) {
        worst = worst.max(q.quad_form(p));
    }
    let fitted = if worst > T::one() {
        q.scale(T::one() / worst)
    } else {
        q
    };
    Ok(ExtremalResult {
        ellipse: CenteredEllipse::from_form(fitted),
        kind: ExtremalKind::Loewner,
        optimality_gap: (worst - T::one()).abs() + POLISH_TOL_BOUND.to_t(),
    })
}

/// Maximal-area centered ellipse inscribed in the body: polar duality
/// against the Loewner problem of the polar body gives the shape, the same
/// chart polish sharpens it.
pub fn john_ellipse<T: Real>(
    body: &ConvexBody<T>,
    tol: T,
) -> Result<ExtremalResult<T>, ExtremalError> {
    let pts = polar_boundary_points(body, SAMPLE_POINTS);
    let mvee_tol = tol.max(T::tol(1e-6));
    let (q_polar, _gap) = centered_mvee(&pts, mvee_tol)?;
    let q = q_polar
        .inverse()
        .expect("polar Loewner form is positive definite");
    let shape = CenteredEllipse::from_form(q);
    let (t, phi, area) = polish_shape(body, shape.t(), shape.phi(), Extremum::Min);
    let candidate = CenteredEllipse::new(t, phi, area);

    // inscription check: ellipse radius must not exceed the body radius
    let q = candidate.form();
    let mut worst = T::one();
    for k in 0..VERIFY_POINTS {
        let th = real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(VERIFY_POINTS as f64);
        let rho = T::one() / q.quad_form(Vec2::unit(th));
        worst = worst.max(rho / body.radial(th));
    }
    let fitted = if worst > T::one() { q.scale(worst) } else { q };
    Ok(ExtremalResult {
        ellipse: CenteredEllipse::from_form(fitted),
        kind: ExtremalKind::John,
        optimality_gap: (worst - T::one()).abs() + POLISH_TOL_BOUND.to_t(),
    })
}

/// Contribution of the chart polish to the reported optimality gap.
struct PolishBound(f64);
const POLISH_TOL_BOUND: PolishBound = PolishBound(1e-9);
impl PolishBound {
    fn to_t<T: Real>(&self) -> T {
        T::tol(self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Extremum {
    /// circumscribed problem: minimize the worst-case ratio
    Max,
    /// inscribed problem: maximize the best-case ratio
    Min,
}

/// Both extremal problems reduce to optimizing
/// `area(t, phi) = pi * ext_theta G(theta) * (e^t cos^2(theta - phi) + e^-t sin^2(theta - phi))`
/// over the two shape parameters: `ext = max` gives the smallest
/// circumscribed area of that shape, `ext = min` the largest inscribed
/// one. The inner extremum is scanned on a dense cached profile and
/// sharpened by parabolic interpolation away from radial kinks.
fn polish_shape<T: Real>(body: &ConvexBody<T>, t0: T, phi0: T, ext: Extremum) -> (T, T, T) {
    let m = 4096usize;
    let step = T::PI() / real::<T>(m as f64);
    let profile: Vec<(T, T, T, T)> = (0..m)
        .map(|k| {
            let th = step * real::<T>(k as f64);
            let (s, c) = th.sin_cos();
            (body.radial(th), c * c, s * c, s * s)
        })
        .collect();
    // angles where G kinks: parabolic refinement is skipped near them
    let breaks = body.breakpoints();
    let near_break = |k: usize| -> bool {
        let th = step * real::<T>(k as f64);
        breaks
            .iter()
            .any(|&b| (b - th).abs() < step + step || (b - th).abs() > T::PI() - step - step)
    };
    // exact kink values participate in the scan directly
    let extra: Vec<(T, T, T, T)> = breaks
        .iter()
        .map(|&th| {
            let (s, c) = th.sin_cos();
            (body.radial(th), c * c, s * c, s * s)
        })
        .collect();

    let objective = |t: T, phi: T| -> T {
        let (sp, cp) = phi.sin_cos();
        let et = t.exp();
        let emt = (-t).exp();
        // w(theta) = e^t cos^2(theta-phi) + e^-t sin^2(theta-phi)
        // expanded over the cached cos/sin products of theta
        let wa = et * cp * cp + emt * sp * sp;
        let wb = (et - emt) * sp * cp * real::<T>(2.0);
        let wc = et * sp * sp + emt * cp * cp;
        let value = |row: &(T, T, T, T)| row.0 * (wa * row.1 + wb * row.2 + wc * row.3);
        let sign = match ext {
            Extremum::Max => T::one(),
            Extremum::Min => -T::one(),
        };
        let vals: Vec<T> = profile.iter().map(|row| sign * value(row)).collect();
        // the extremum may be contested by several contact leaves: refine
        // every local optimum of the scan and keep the best refined value
        let mut best = T::neg_infinity();
        for k in 0..m {
            let v = vals[k];
            let prev = vals[(k + m - 1) % m];
            let next = vals[(k + 1) % m];
            if v < prev || v < next {
                continue;
            }
            let mut refined = v;
            if !near_break(k) {
                let denom = prev - (v + v) + next;
                if denom.abs() > T::epsilon() * (T::one() + v.abs()) {
                    let half = real::<T>(0.5);
                    let s = half * (prev - next) / denom;
                    if s.abs() <= T::one() {
                        refined = v - real::<T>(0.25) * (prev - next) * s;
                    }
                }
            }
            best = best.max(refined);
        }
        for row in &extra {
            best = best.max(sign * value(row));
        }
        sign * best * T::PI()
    };

    // Nelder-Mead on the two chart coordinates (the objective has shallow
    // diagonal valleys that defeat coordinate-wise searches)
    let sign = match ext {
        Extremum::Max => T::one(),
        Extremum::Min => -T::one(),
    };
    let f = |p: (T, T)| sign * objective(p.0, p.1);
    let (t, phi) = nelder_mead(&f, (t0, phi0), real(0.05), T::tol(5e-8), 400);
    (t, phi, objective(t, phi))
}

/// Standard Nelder-Mead in two dimensions; stops when the simplex diameter
/// falls below `xtol`.
fn nelder_mead<T: Real>(
    f: &impl Fn((T, T)) -> T,
    start: (T, T),
    scale: T,
    xtol: T,
    max_iter: usize,
) -> (T, T) {
    let mut simplex = [
        start,
        (start.0 + scale, start.1),
        (start.0, start.1 + scale),
    ];
    let mut values = [f(simplex[0]), f(simplex[1]), f(simplex[2])];

    let half = real::<T>(0.5);
    let two = real::<T>(2.0);
    for _ in 0..max_iter {
        // order best -> worst
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let (b, m, w) = (order[0], order[1], order[2]);

        let diam = simplex_diameter(&simplex);
        if diam <= xtol {
            break;
        }

        let centroid = (
            (simplex[b].0 + simplex[m].0) * half,
            (simplex[b].1 + simplex[m].1) * half,
        );
        let reflect = (
            centroid.0 + (centroid.0 - simplex[w].0),
            centroid.1 + (centroid.1 - simplex[w].1),
        );
        let fr = f(reflect);
        if fr < values[b] {
            let expand = (
                centroid.0 + two * (centroid.0 - simplex[w].0),
                centroid.1 + two * (centroid.1 - simplex[w].1),
            );
            let fe = f(expand);
            if fe < fr {
                simplex[w] = expand;
                values[w] = fe;
            } else {
                simplex[w] = reflect;
                values[w] = fr;
            }
        } else if fr < values[m] {
            simplex[w] = reflect;
            values[w] = fr;
        } else {
            let contract = (
                centroid.0 + half * (simplex[w].0 - centroid.0),
                centroid.1 + half * (simplex[w].1 - centroid.1),
            );
            let fc = f(contract);
            if fc < values[w] {
                simplex[w] = contract;
                values[w] = fc;
            } else {
                // shrink toward the best vertex
                for k in [m, w] {
                    simplex[k] = (
                        simplex[b].0 + half * (simplex[k].0 - simplex[b].0),
                        simplex[b].1 + half * (simplex[k].1 - simplex[b].1),
                    );
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    let mut best = 0usize;
    for k in 1..3 {
        if values[k] < values[best] {
            best = k;
        }
    }
    simplex[best]
}

fn simplex_diameter<T: Real>(s: &[(T, T); 3]) -> T {
    let d = |a: (T, T), b: (T, T)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    d(s[0], s[1]).max(d(s[1], s[2])).max(d(s[0], s[2]))
}

/// Boundary points of the polar body `K* = { y : <x, y> <= 1 on K }`,
/// including the exact polar vertices dual to polygon edges.
fn polar_boundary_points<T: Real>(body: &ConvexBody<T>, n: usize) -> Vec<Vec2<T>> {
    let mut pts: Vec<Vec2<T>> = (0..n)
        .map(|k| {
            let th = real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(n as f64);
            let u = Vec2::unit(th);
            u.scale(T::one() / body.support(u))
        })
        .collect();
    if let Some(vertices) = body.polygon_vertices() {
        let m = vertices.len();
        for k in 0..m {
            let a = vertices[k];
            let b = vertices[(k + 1) % m];
            // dual vertex: <y, a> = <y, b> = 1
            if let Some(inv) = Mat2::new(a.x, a.y, b.x, b.y).inverse() {
                pts.push(inv.apply(Vec2::new(T::one(), T::one())));
            }
        }
    }
    pts
}

/// Centered minimum-volume enclosing ellipse of a point set: returns a
/// form `Q` with `x^T Q x <= 1` for all points, at relative area optimality
/// `tol`, together with the complementarity residual.
fn centered_mvee<T: Real>(points: &[Vec2<T>], tol: T) -> Result<(Mat2<T>, T), ExtremalError> {
    let n = points.len();
    assert!(n >= 2, "need at least two points");
    let two = real::<T>(2.0);

    // initial support: the extreme point along x, then the extreme point
    // along its perpendicular; keeps the active set small from the start
    let j1 = (0..n)
        .max_by(|&a, &b| points[a].x.abs().partial_cmp(&points[b].x.abs()).unwrap())
        .unwrap();
    let perp = Vec2::new(-points[j1].y, points[j1].x);
    let j2 = (0..n)
        .max_by(|&a, &b| {
            points[a]
                .dot(perp)
                .abs()
                .partial_cmp(&points[b].dot(perp).abs())
                .unwrap()
        })
        .unwrap();
    let mut u = vec![T::zero(); n];
    let half = real::<T>(0.5);
    if j1 == j2 {
        return Err(ExtremalError::IterationLimit(0));
    }
    u[j1] = half;
    u[j2] = half;
    let mut m = scatter(points, &u);

    let mut gap = T::infinity();
    for _ in 0..MAX_MVEE_ITER {
        let minv = match m.inverse() {
            Some(v) => v,
            None => return Err(ExtremalError::IterationLimit(MAX_MVEE_ITER)),
        };
        let mut w_max = T::neg_infinity();
        let mut j_max = 0usize;
        let mut w_min = T::infinity();
        let mut j_min = 0usize;
        for (k, p) in points.iter().enumerate() {
            let w = minv.quad_form(*p);
            if w > w_max {
                w_max = w;
                j_max = k;
            }
            if u[k] > T::zero() && w < w_min {
                w_min = w;
                j_min = k;
            }
        }
        gap = w_max / two - T::one();
        // the area bound only needs the primal gap: returned/optimal <= 1 + gap
        if gap <= tol {
            break;
        }
        let deficit = T::one() - w_min / two;

        let (j, beta, full_drop) = if gap >= deficit {
            // toward step: w_max > 2, the line optimum lies in (0, 1)
            let beta = (w_max - two) / (two * (w_max - T::one()));
            if beta <= T::epsilon() {
                break;
            }
            (j_max, beta, false)
        } else {
            // away step: the line optimum (w-2)/(2(w-1)) is only valid on
            // the negative side (it flips sign for w < 1); clamp it so the
            // weight stays nonnegative, possibly dropping the point
            let drop = -u[j_min] / (T::one() - u[j_min]).max(T::epsilon());
            let denom = two * (w_min - T::one());
            let line = if denom.abs() > T::epsilon() {
                (w_min - two) / denom
            } else {
                T::neg_infinity()
            };
            if line < T::zero() && line > drop {
                (j_min, line, false)
            } else {
                (j_min, drop, true)
            }
        };

        for weight in u.iter_mut() {
            *weight *= T::one() - beta;
        }
        u[j] += beta;
        if full_drop {
            u[j] = T::zero();
        }
        let p = points[j];
        let outer = Mat2::new(p.x * p.x, p.x * p.y, p.x * p.y, p.y * p.y);
        m = Mat2::new(
            m.a * (T::one() - beta) + beta * outer.a,
            m.b * (T::one() - beta) + beta * outer.b,
            m.c * (T::one() - beta) + beta * outer.c,
            m.d * (T::one() - beta) + beta * outer.d,
        );
    }
    if !gap.is_finite() {
        return Err(ExtremalError::IterationLimit(MAX_MVEE_ITER));
    }

    let minv = m
        .inverse()
        .ok_or(ExtremalError::IterationLimit(MAX_MVEE_ITER))?;
    let q_raw = minv.scale(T::one() / two);
    // rescale so every input point is inside
    let mut worst = T::zero();
    for p in points {
        worst = worst.max(q_raw.quad_form(*p));
    }
    Ok((q_raw.scale(T::one() / worst), gap.max(T::zero())))
}

fn scatter<T: Real>(points: &[Vec2<T>], u: &[T]) -> Mat2<T> {
    let mut m = Mat2::new(T::zero(), T::zero(), T::zero(), T::zero());
    for (p, &w) in points.iter().zip(u) {
        m.a += w * p.x * p.x;
        m.b += w * p.x * p.y;
        m.c += w * p.x * p.y;
        m.d += w * p.y * p.y;
    }
    m
}
