//! The maximal-intersection ellipse of prescribed area, the interpolating
//! family between the John and Loewner ellipses, and the quasiconcavity /
//! displaced-center probes.
//!
//! The two-parameter space of centered ellipses of area `lambda` is always
//! charted at the current iterate: normalizing the iterate to the unit
//! disk makes the derivative formulas of [`crate::variation`] exact, and
//! the chart gradient is `(-Im D / 4, +Re D / 4)` (the second component's
//! orientation is pinned by a finite-difference calibration test). Far
//! from stationarity the solver runs Armijo-backtracked ascent on the
//! intersection area; once `|D|` is small it switches to a damped Newton
//! iteration on `D` itself, whose crossing-based evaluation is far less
//! noisy than area quadrature.

use rayon::prelude::*;
use thiserror::Error;

use crate::body::ConvexBody;
use crate::conic::CenteredEllipse;
use crate::extremal::{john_ellipse, loewner_ellipse, ExtremalError};
use crate::geom::{Mat2, Vec2};
use crate::intersect::{
    find_crossings, intersection_area, intersection_area_with_rtol, intersection_profile,
    CrossError, CrossingSet,
};
use crate::oracle::{clip_area, polygonize_ellipse};
use crate::scalar::{real, Real};
use crate::variation::{deriv2, residual_d_lenient, VariationError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("lambda {lambda} outside the admissible range [{john}, {loewner}]")]
    LambdaOutOfRange {
        lambda: f64,
        john: f64,
        loewner: f64,
    },
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Extremal(#[from] ExtremalError),
    #[error(transparent)]
    Crossing(#[from] CrossError),
    #[error(transparent)]
    Variation(#[from] VariationError),
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions<T> {
    /// Stationarity target on `|D|`.
    pub tol: T,
    /// Chart step below which the iteration is considered stalled.
    pub step_min: T,
    pub max_iter: usize,
    /// Armijo acceptance constant and backtracking shrink factor.
    pub armijo: T,
    pub shrink: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-7),
            step_min: T::tol(1e-10),
            max_iter: 500,
            armijo: real(0.1),
            shrink: real(0.5),
        }
    }
}

/// Solution record for one maximal-intersection problem.
#[derive(Clone, Debug)]
pub struct MIResult<T> {
    pub ellipse: CenteredEllipse<T>,
    pub intersection: T,
    /// `|D|` at the solution.
    pub residual: T,
    /// Second derivative of the normalized intersection function along the
    /// two chart axes at the solution (non-positive at a maximum).
    pub concavity: (T, T),
    pub iterations: usize,
}

/// Threshold on `|D|` below which the Newton phase takes over.
const NEWTON_ENTER: f64 = 1e-2;
/// Finite-difference step for the chart Jacobian of `D`.
const JACOBIAN_STEP: f64 = 1e-5;

/// Compute the unique maximal-intersection ellipse of area `lambda`.
pub fn mi_ellipse<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    opts: &SolveOptions<T>,
) -> Result<MIResult<T>, SolveError> {
    let john = john_ellipse(body, T::tol(1e-8))?;
    let loewner = loewner_ellipse(body, T::tol(1e-8))?;
    mi_ellipse_with_sandwich(body, lambda, opts, &john.ellipse, &loewner.ellipse)
}

fn mi_ellipse_with_sandwich<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    opts: &SolveOptions<T>,
    john: &CenteredEllipse<T>,
    loewner: &CenteredEllipse<T>,
) -> Result<MIResult<T>, SolveError> {
    let (aj, al) = (john.area(), loewner.area());
    let slack = T::tol(1e-9) * al;
    if lambda < aj - slack || lambda > al + slack {
        return Err(SolveError::LambdaOutOfRange {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
            john: aj.to_f64().unwrap_or(f64::NAN),
            loewner: al.to_f64().unwrap_or(f64::NAN),
        });
    }
    // at the sandwich endpoints the extremal ellipses are the answers
    let endpoint_tol = T::tol(1e-12) * al;
    if (lambda - aj).abs() <= endpoint_tol {
        return Ok(endpoint_result(body, john));
    }
    if (lambda - al).abs() <= endpoint_tol {
        return Ok(endpoint_result(body, loewner));
    }
    // degenerate sandwich (the body is an ellipse up to tolerance): every
    // admissible area pins the same shape
    if al - aj <= T::tol(1e-8) * al {
        let e = CenteredEllipse::new(john.t(), john.phi(), lambda);
        return Ok(endpoint_result(body, &e));
    }

    let frac = (lambda - aj) / (al - aj);
    let shape = if frac <= real(0.5) { john } else { loewner };
    let init = CenteredEllipse::new(shape.t(), shape.phi(), lambda);
    solve_from(body, lambda, init, opts)
}

fn endpoint_result<T: Real>(body: &ConvexBody<T>, e: &CenteredEllipse<T>) -> MIResult<T> {
    MIResult {
        ellipse: *e,
        intersection: intersection_area(body, e),
        residual: T::zero(),
        concavity: (T::zero(), T::zero()),
        iterations: 0,
    }
}

/// Warm-startable core iteration.
fn solve_from<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    init: CenteredEllipse<T>,
    opts: &SolveOptions<T>,
) -> Result<MIResult<T>, SolveError> {
    let mut cur = init;
    let newton_enter = T::tol(NEWTON_ENTER);
    let mut iterations = 0usize;

    while iterations < opts.max_iter {
        iterations += 1;
        let cs = find_crossings(body, &cur, T::tol(1e-12))?;
        if cs.is_empty() {
            // containment: the intersection sits on its trivial plateau
            return Ok(MIResult {
                ellipse: cur,
                intersection: intersection_area(body, &cur),
                residual: T::zero(),
                concavity: (T::zero(), T::zero()),
                iterations,
            });
        }
        let d = residual_d_lenient(&cs)?;
        let dnorm = d.norm();
        if dnorm <= opts.tol {
            return finish(body, lambda, cur, cs, iterations);
        }

        let step = if dnorm <= newton_enter {
            match newton_step(body, &cur, (d.re, d.im))? {
                Some(s) => Some(s),
                None if cs.has_tangency() => golden_step(body, &cur)?,
                None => ascent_step(body, lambda, &cur, (d.re, d.im), opts)?,
            }
        } else if cs.has_tangency() {
            golden_step(body, &cur)?
        } else {
            ascent_step(body, lambda, &cur, (d.re, d.im), opts)?
        };

        match step {
            Some((next, step_len)) => {
                cur = next;
                if step_len <= opts.step_min {
                    let cs = find_crossings(body, &cur, T::tol(1e-12))?;
                    let resid = residual_d_lenient(&cs).map(|d| d.norm())?;
                    if resid <= opts.tol * real(10.0) {
                        return finish(body, lambda, cur, cs, iterations);
                    }
                    return Err(SolveError::NoConvergence {
                        iterations,
                        residual: resid.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
            None => {
                return Err(SolveError::NoConvergence {
                    iterations,
                    residual: dnorm.to_f64().unwrap_or(f64::NAN),
                })
            }
        }
    }
    Err(SolveError::NoConvergence {
        iterations,
        residual: f64::NAN,
    })
}

fn finish<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    ellipse: CenteredEllipse<T>,
    cs: CrossingSet<T>,
    iterations: usize,
) -> Result<MIResult<T>, SolveError> {
    let residual = residual_d_lenient(&cs)?.norm();
    let quarter = T::FRAC_PI_4();
    let concavity = if cs.is_transverse() {
        (deriv2(&cs)?, deriv2(&cs.rotated(-quarter)?)?)
    } else {
        // tangency at the solution: probe curvature by finite differences
        let h = T::tol(1e-3);
        let probe = |axis: ChartAxis| -> T {
            let ip = eval_chart(body, &ellipse, axis.direction(h));
            let im = eval_chart(body, &ellipse, axis.direction(-h));
            let i0 = tight_area(body, &ellipse);
            (ip - (i0 + i0) + im) / (h * h) * (T::PI() / lambda)
        };
        (probe(ChartAxis::Aspect), probe(ChartAxis::Diagonal))
    };
    Ok(MIResult {
        ellipse,
        intersection: intersection_area(body, &ellipse),
        residual,
        concavity,
        iterations,
    })
}

#[derive(Clone, Copy)]
enum ChartAxis {
    /// stretch along x/y (the standard family direction)
    Aspect,
    /// stretch along the diagonals
    Diagonal,
}

impl ChartAxis {
    fn direction<T: Real>(self, eta: T) -> (T, T) {
        match self {
            ChartAxis::Aspect => (eta, T::zero()),
            ChartAxis::Diagonal => (T::zero(), eta),
        }
    }
}

/// Ellipse at chart point `(a, b)` of the frame centered at `base`.
fn chart_ellipse<T: Real>(base: &CenteredEllipse<T>, p: (T, T)) -> CenteredEllipse<T> {
    let f = base.normalizing_map();
    let h = Mat2::new(p.0, p.1, p.1, -p.0).exp_traceless();
    let q = f.transpose() * h * f;
    CenteredEllipse::from_form(q)
}

fn eval_chart<T: Real>(body: &ConvexBody<T>, base: &CenteredEllipse<T>, p: (T, T)) -> T {
    tight_area(body, &chart_ellipse(base, p))
}

fn tight_area<T: Real>(body: &ConvexBody<T>, e: &CenteredEllipse<T>) -> T {
    intersection_area_with_rtol(body, e, T::tol(1e-12))
}

/// Armijo-backtracked gradient ascent step. Returns the accepted iterate
/// and the chart step length, or `None` when no improving step exists.
fn ascent_step<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    cur: &CenteredEllipse<T>,
    d: (T, T),
    opts: &SolveOptions<T>,
) -> Result<Option<(CenteredEllipse<T>, T)>, SolveError> {
    let quarter = real::<T>(0.25);
    let g = (-d.1 * quarter, d.0 * quarter);
    let gnorm = (g.0 * g.0 + g.1 * g.1).sqrt();
    let dir = (g.0 / gnorm, g.1 / gnorm);
    let scale = lambda / T::PI();

    let i0 = intersection_area(body, cur);
    let mut eta = real::<T>(0.25).min(real::<T>(4.0) * gnorm);
    while eta > opts.step_min {
        let cand = chart_ellipse(cur, (dir.0 * eta, dir.1 * eta));
        let i1 = intersection_area(body, &cand);
        if i1 >= i0 + opts.armijo * eta * gnorm * scale {
            return Ok(Some((cand, eta)));
        }
        eta *= opts.shrink;
    }
    // signal a stalled line search by a zero-length step on the gradient ray
    let cand = chart_ellipse(cur, (dir.0 * opts.step_min, dir.1 * opts.step_min));
    Ok(Some((cand, opts.step_min)))
}

/// Damped Newton step on `D` as a function of the chart point, with a
/// finite-difference Jacobian. `D` is computed from crossing positions, so
/// its noise floor is orders of magnitude below area quadrature.
fn newton_step<T: Real>(
    body: &ConvexBody<T>,
    cur: &CenteredEllipse<T>,
    d0: (T, T),
) -> Result<Option<(CenteredEllipse<T>, T)>, SolveError> {
    let h = T::tol(JACOBIAN_STEP);
    let eval = |p: (T, T)| -> Result<(T, T), SolveError> {
        let e = chart_ellipse(cur, p);
        let cs = find_crossings(body, &e, T::tol(1e-13))?;
        let d = residual_d_lenient(&cs)?;
        Ok((d.re, d.im))
    };
    let two_h = h + h;
    let dp = eval((h, T::zero()))?;
    let dm = eval((-h, T::zero()))?;
    let ep = eval((T::zero(), h))?;
    let em = eval((T::zero(), -h))?;
    let j = Mat2::new(
        (dp.0 - dm.0) / two_h,
        (ep.0 - em.0) / two_h,
        (dp.1 - dm.1) / two_h,
        (ep.1 - em.1) / two_h,
    );
    let ji = match j.inverse() {
        Some(v) => v,
        None => return Ok(None),
    };
    let full = ji.apply(Vec2::new(-d0.0, -d0.1));
    let d0n = (d0.0 * d0.0 + d0.1 * d0.1).sqrt();

    // backtrack on |D| itself
    let mut damp = T::one();
    for _ in 0..12 {
        let p = (full.x * damp, full.y * damp);
        let cand = chart_ellipse(cur, p);
        let cs = find_crossings(body, &cand, T::tol(1e-13))?;
        if let Ok(d1) = residual_d_lenient(&cs) {
            if d1.norm() < d0n {
                let len = (p.0 * p.0 + p.1 * p.1).sqrt();
                return Ok(Some((cand, len)));
            }
        }
        damp *= real(0.5);
    }
    Ok(None)
}

/// Derivative-free fallback used when tangency flags make `D` unreliable:
/// a golden-section sweep along each chart axis.
fn golden_step<T: Real>(
    body: &ConvexBody<T>,
    cur: &CenteredEllipse<T>,
) -> Result<Option<(CenteredEllipse<T>, T)>, SolveError> {
    let mut base = *cur;
    let mut moved = T::zero();
    for axis in [ChartAxis::Aspect, ChartAxis::Diagonal] {
        let f = |eta: T| eval_chart(body, &base, axis.direction(eta));
        let span = real::<T>(0.05);
        let eta = golden_max(&f, -span, span, T::tol(1e-9));
        if eta.abs() > T::zero() {
            base = chart_ellipse(&base, axis.direction(eta));
            moved += eta.abs();
        }
    }
    Ok(Some((base, moved)))
}

fn golden_max<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, xtol: T) -> T {
    let resp = real::<T>(2.0) - real::<T>(1.618_033_988_749_895);
    let mut x1 = a + resp * (b - a);
    let mut x2 = b - resp * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if (b - a).abs() <= xtol {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + resp * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - resp * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 {
        x1
    } else {
        x2
    }
}

/// Sweep of MI ellipses for `steps` areas uniformly spanning the sandwich
/// `[area(John), area(Loewner)]`: a sequential pass at loose tolerance
/// produces warm starts, the final full-tolerance solves run in parallel.
pub fn mi_family<T: Real>(
    body: &ConvexBody<T>,
    steps: usize,
    opts: &SolveOptions<T>,
) -> Result<Vec<(T, MIResult<T>)>, SolveError> {
    assert!(steps >= 2, "family needs at least 2 steps");
    let john = john_ellipse(body, T::tol(1e-8))?;
    let loewner = loewner_ellipse(body, T::tol(1e-8))?;
    let (aj, al) = (john.ellipse.area(), loewner.ellipse.area());

    let lambdas: Vec<T> = (0..steps)
        .map(|k| aj + (al - aj) * real::<T>(k as f64) / real::<T>((steps - 1) as f64))
        .collect();

    // degenerate sandwich: the whole family is one shape
    if al - aj <= T::tol(1e-8) * al {
        return Ok(lambdas
            .into_iter()
            .map(|lambda| {
                let e = CenteredEllipse::new(john.ellipse.t(), john.ellipse.phi(), lambda);
                (lambda, endpoint_result(body, &e))
            })
            .collect());
    }

    // warm-start pass
    let loose = SolveOptions {
        tol: T::tol(1e-4),
        max_iter: 200,
        ..*opts
    };
    let mut warm: Vec<CenteredEllipse<T>> = Vec::with_capacity(steps);
    let mut prev_shape = (john.ellipse.t(), john.ellipse.phi());
    for (k, &lambda) in lambdas.iter().enumerate() {
        if k == 0 || k == steps - 1 {
            warm.push(CenteredEllipse::new(prev_shape.0, prev_shape.1, lambda));
            continue;
        }
        let init = CenteredEllipse::new(prev_shape.0, prev_shape.1, lambda);
        match solve_from(body, lambda, init, &loose) {
            Ok(r) => {
                prev_shape = (r.ellipse.t(), r.ellipse.phi());
                warm.push(r.ellipse);
            }
            Err(_) => warm.push(init),
        }
    }

    lambdas
        .par_iter()
        .zip(warm.par_iter())
        .enumerate()
        .map(|(k, (&lambda, start))| {
            let result = if k == 0 {
                Ok(endpoint_result(body, &john.ellipse))
            } else if k == steps - 1 {
                Ok(endpoint_result(body, &loewner.ellipse))
            } else {
                solve_from(body, lambda, *start, opts)
            };
            result.map(|r| (lambda, r))
        })
        .collect()
}

/// Grid report for the displaced-center test: among center offsets `v`
/// with `|v| <= 0.5`, the intersection with the optimal ellipse is largest
/// at `v = 0`.
#[derive(Clone, Debug)]
pub struct DisplacedCenterReport<T> {
    pub best_offset: Vec2<T>,
    pub best_area: T,
    pub center_area: T,
    pub grid: usize,
    pub cell: T,
}

pub fn displaced_center_check<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    grid: usize,
) -> Result<DisplacedCenterReport<T>, SolveError> {
    assert!(grid >= 3, "offset grid needs at least 3 nodes per axis");
    let mi = mi_ellipse(body, lambda, &SolveOptions::default())?;
    let body_poly = body.boundary_points(512);
    let ellipse_poly = polygonize_ellipse(&mi.ellipse, 512);

    let radius = real::<T>(0.5);
    let cell = (radius + radius) / real::<T>((grid - 1) as f64);
    let offsets: Vec<Vec2<T>> = (0..grid * grid)
        .map(|idx| {
            let i = idx / grid;
            let j = idx % grid;
            Vec2::new(
                -radius + cell * real::<T>(i as f64),
                -radius + cell * real::<T>(j as f64),
            )
        })
        .filter(|v| v.norm() <= radius + T::epsilon())
        .collect();

    let areas: Vec<(Vec2<T>, T)> = offsets
        .par_iter()
        .map(|&v| {
            let shifted: Vec<Vec2<T>> = ellipse_poly.iter().map(|&p| p + v).collect();
            (v, clip_area(&body_poly, &shifted).value)
        })
        .collect();

    let shifted_center: Vec<Vec2<T>> = ellipse_poly.clone();
    let center_area = clip_area(&body_poly, &shifted_center).value;
    let (best_offset, best_area) = areas
        .into_iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("offset grid is nonempty");

    Ok(DisplacedCenterReport {
        best_offset,
        best_area,
        center_area,
        grid,
        cell,
    })
}

/// Quasiconcavity probe along one chart line.
#[derive(Clone, Debug)]
pub struct QuasiconcavityReport<T> {
    pub samples: Vec<(T, T)>,
    /// Index triples `(i, j, k)` with `I(t_j) <= min(I(t_i), I(t_k)) + tol`
    /// inside an admissible run.
    pub violations: Vec<(usize, usize, usize)>,
    pub argmax: T,
    /// Nondecreasing before the argmax and nonincreasing after (within
    /// tolerance), over the admissible sub-range.
    pub unimodal_ok: bool,
}

/// Sample `I` along the standard family conjugated by `frame` (a
/// unimodular direction frame) and scan for strict-quasiconcavity
/// violations on the sub-range where `I < min(pi, area K) - 1e-6`.
pub fn quasiconcavity_probe<T: Real>(
    body: &ConvexBody<T>,
    frame: Mat2<T>,
    t_range: (T, T),
    steps: usize,
) -> QuasiconcavityReport<T> {
    assert!(steps >= 3, "probe needs at least 3 samples");
    let inv = frame.inverse().expect("direction frame must be invertible");
    let transformed = body.apply_linear(inv);
    let samples = intersection_profile(&transformed, t_range, steps);

    let cap = T::PI().min(body.area()) - T::tol(1e-6);
    let admissible: Vec<bool> = samples.iter().map(|&(_, v)| v < cap).collect();
    let tol = T::tol(1e-9);

    // contiguous admissible runs
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (k, &ok) in admissible.iter().enumerate() {
        match (ok, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, samples.len()));
    }

    let mut violations = Vec::new();
    for &(lo, hi) in &runs {
        for i in lo..hi {
            for j in (i + 1)..hi {
                for k in (j + 1)..hi {
                    let m = samples[i].1.min(samples[k].1);
                    if samples[j].1 <= m + tol {
                        violations.push((i, j, k));
                    }
                }
            }
        }
    }

    let argmax_idx = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut unimodal_ok = true;
    for w in samples[..=argmax_idx].windows(2) {
        if admissible_pair(&admissible, &samples, w) && w[1].1 < w[0].1 - tol {
            unimodal_ok = false;
        }
    }
    for w in samples[argmax_idx..].windows(2) {
        if admissible_pair(&admissible, &samples, w) && w[1].1 > w[0].1 + tol {
            unimodal_ok = false;
        }
    }

    QuasiconcavityReport {
        argmax: samples[argmax_idx].0,
        samples,
        violations,
        unimodal_ok,
    }
}

fn admissible_pair<T: Real>(admissible: &[bool], samples: &[(T, T)], w: &[(T, T)]) -> bool {
    let find = |t: T| samples.iter().position(|&(s, _)| s == t);
    match (find(w[0].0), find(w[1].0)) {
        (Some(i), Some(j)) => admissible[i] && admissible[j],
        _ => false,
    }
}
