//! Crossings between a body boundary and an ellipse, and the associated
//! intersection / symmetric-difference areas.
//!
//! All crossing analysis happens in the normalized frame where the ellipse
//! is the unit disk: the boundary crossings are the roots of
//! `G(theta) - 1`, they come in `4n` antipodal pairs with strictly
//! alternating enter/exit parity, and the crossing angle satisfies
//! `|G'(xi)| = 2 tan(alpha)`.

use rayon::prelude::*;
use thiserror::Error;

use crate::body::ConvexBody;
use crate::conic::CenteredEllipse;
use crate::geom::{Mat2, Vec2};
use crate::quad::adaptive_simpson_with_breakpoints;
use crate::scalar::{real, Real};

/// Scan resolution over a full turn (design default).
const SCAN_INTERVALS: usize = 4096;
/// Bisection iteration cap per root.
const BISECT_MAX_ITER: usize = 80;
/// `|G'|` below this flags a (near-)tangency.
const TANGENCY_THRESHOLD: f64 = 1e-4;
/// Default relative accuracy of intersection areas.
pub const DEFAULT_AREA_RTOL: f64 = 1e-8;
/// Grid nodes kept on internally transformed bodies.
const NORM_GRID: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrossError {
    #[error("sign pattern inconsistent at scan resolution near theta = {0}")]
    UnresolvedRoot(f64),
}

/// Whether the boundary enters or exits the unit disk at a crossing, in
/// counterclockwise traversal. Enters carry odd 1-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Enter,
    Exit,
}

#[derive(Clone, Copy, Debug)]
pub struct Crossing<T> {
    /// Angle of the crossing on the unit circle, in `[0, 2pi)`.
    pub xi: T,
    pub parity: Parity,
    /// Non-oriented crossing angle in `(0, pi/2)`.
    pub alpha: T,
    /// Set when `|G'(xi)|` falls below the tangency threshold.
    pub tangency: bool,
}

impl<T: Real> Crossing<T> {
    /// Crossing point `zeta = e^{i xi}` on the unit circle.
    pub fn point(&self) -> Vec2<T> {
        Vec2::unit(self.xi)
    }
}

/// Containment classification when the boundaries do not meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    BodyInsideEllipse,
    EllipseInsideBody,
}

/// Cyclically ordered crossings in the normalized frame, anchored so that
/// index 0 is the enter-crossing of smallest angle `>= 0`.
#[derive(Clone, Debug)]
pub struct CrossingSet<T> {
    crossings: Vec<Crossing<T>>,
    /// Grazing contacts (no sign change), angles only.
    grazing: Vec<T>,
    /// Full map from original coordinates to the normalized frame.
    frame: Mat2<T>,
    containment: Option<Containment>,
}

impl<T: Real> CrossingSet<T> {
    pub fn crossings(&self) -> &[Crossing<T>] {
        &self.crossings
    }

    /// Quarter count `n`; the total number of crossings is `4n`.
    pub fn n(&self) -> usize {
        self.crossings.len() / 4
    }

    pub fn is_empty(&self) -> bool {
        self.crossings.is_empty()
    }

    pub fn containment(&self) -> Option<Containment> {
        self.containment
    }

    pub fn frame(&self) -> Mat2<T> {
        self.frame
    }

    /// True when no crossing is flagged tangent and no grazing contact was
    /// detected.
    pub fn is_transverse(&self) -> bool {
        !self.crossings.is_empty()
            && self.grazing.is_empty()
            && self.crossings.iter().all(|c| !c.tangency)
    }

    pub fn has_tangency(&self) -> bool {
        !self.grazing.is_empty() || self.crossings.iter().any(|c| c.tangency)
    }

    pub fn grazing(&self) -> &[T] {
        &self.grazing
    }

    /// The same crossing configuration seen from a body rotated by
    /// `-delta` (every `xi_j` shifts by `delta`), re-anchored.
    pub fn rotated(&self, delta: T) -> Result<Self, CrossError> {
        let two_pi = T::PI() + T::PI();
        let shifted = self
            .crossings
            .iter()
            .map(|c| {
                let mut xi = (c.xi + delta) % two_pi;
                if xi < T::zero() {
                    xi += two_pi;
                }
                Crossing { xi, ..*c }
            })
            .collect();
        let mut set = Self::synthetic(shifted)?;
        set.frame = self.frame;
        set.grazing = self.grazing.clone();
        Ok(set)
    }

    /// Build a crossing set directly from crossing data (identity frame).
    ///
    /// The list must describe a valid configuration: sorted angles in
    /// `[0, 2pi)`, count divisible by 4, strictly alternating parity,
    /// antipodal pairing, with the mirror partner carrying equal parity.
    /// The list is re-anchored at the first enter-crossing.
    pub fn synthetic(mut crossings: Vec<Crossing<T>>) -> Result<Self, CrossError> {
        crossings.sort_by(|a, b| a.xi.partial_cmp(&b.xi).unwrap());
        if crossings.is_empty() || crossings.len() % 4 != 0 {
            return Err(CrossError::UnresolvedRoot(0.0));
        }
        let first_enter = crossings
            .iter()
            .position(|c| c.parity == Parity::Enter)
            .ok_or(CrossError::UnresolvedRoot(0.0))?;
        crossings.rotate_left(first_enter);
        let m = crossings.len();
        let pair_tol = T::tol(1e-9);
        for j in 0..m {
            let expect = if j % 2 == 0 {
                Parity::Enter
            } else {
                Parity::Exit
            };
            if crossings[j].parity != expect {
                return Err(CrossError::UnresolvedRoot(
                    crossings[j].xi.to_f64().unwrap(),
                ));
            }
            let partner = &crossings[(j + m / 2) % m];
            let gap = (partner.xi - crossings[j].xi).abs() % (T::PI() + T::PI());
            if (gap - T::PI()).abs() > pair_tol {
                return Err(CrossError::UnresolvedRoot(
                    crossings[j].xi.to_f64().unwrap(),
                ));
            }
        }
        Ok(Self {
            crossings,
            grazing: Vec::new(),
            frame: Mat2::identity(),
            containment: None,
        })
    }
}

/// Find all crossings between `partial K` and the ellipse boundary.
///
/// `tol` is the bisection width target for crossing angles (radians).
pub fn find_crossings<T: Real>(
    body: &ConvexBody<T>,
    ellipse: &CenteredEllipse<T>,
    tol: T,
) -> Result<CrossingSet<T>, CrossError> {
    let frame = ellipse.normalizing_map();
    let normalized = body.apply_linear_with_grid(frame, NORM_GRID);
    let g = |th: T| normalized.radial(th);

    let scan = scan_half_turn(&g, tol)?;
    if scan.roots.is_empty() && scan.grazing.is_empty() {
        let containment = if g(T::zero()) >= T::one() {
            Containment::EllipseInsideBody
        } else {
            Containment::BodyInsideEllipse
        };
        return Ok(CrossingSet {
            crossings: Vec::new(),
            grazing: Vec::new(),
            frame,
            containment: Some(containment),
        });
    }

    // antipodal mirror: same parity, xi + pi
    let mut all: Vec<(T, Parity)> = Vec::with_capacity(scan.roots.len() * 2);
    for &(xi, parity) in &scan.roots {
        all.push((xi, parity));
        all.push((xi + T::PI(), parity));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if all.len() % 4 != 0 {
        return Err(CrossError::UnresolvedRoot(
            all.first().map(|r| r.0.to_f64().unwrap()).unwrap_or(0.0),
        ));
    }
    // parity must strictly alternate around the circle
    for w in all.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(CrossError::UnresolvedRoot(w[1].0.to_f64().unwrap()));
        }
    }
    if all.len() >= 2 && all[0].1 == all[all.len() - 1].1 {
        return Err(CrossError::UnresolvedRoot(all[0].0.to_f64().unwrap()));
    }
    // anchor index 0 at the first enter
    let first_enter = all
        .iter()
        .position(|r| r.1 == Parity::Enter)
        .ok_or(CrossError::UnresolvedRoot(0.0))?;
    all.rotate_left(first_enter);

    let fd_step = T::epsilon().cbrt();
    let tangency_cut = T::tol(TANGENCY_THRESHOLD);
    let crossings = all
        .into_iter()
        .map(|(xi, parity)| {
            let dg = (g(xi + fd_step) - g(xi - fd_step)) / (fd_step + fd_step);
            let alpha = (dg.abs() * real::<T>(0.5)).atan();
            Crossing {
                xi,
                parity,
                alpha,
                tangency: dg.abs() < tangency_cut,
            }
        })
        .collect();

    let mut grazing: Vec<T> = Vec::with_capacity(scan.grazing.len() * 2);
    for &t in &scan.grazing {
        grazing.push(t);
        grazing.push(t + T::PI());
    }

    Ok(CrossingSet {
        crossings,
        grazing,
        frame,
        containment: None,
    })
}

struct ScanOutcome<T> {
    /// roots in `[0, pi)` with parity (Enter = G decreasing through 1)
    roots: Vec<(T, Parity)>,
    /// grazing contacts in `[0, pi)`
    grazing: Vec<T>,
}

/// Scan `G - 1` for sign changes over one half-turn and refine each root by
/// bisection.
fn scan_half_turn<T: Real>(g: &impl Fn(T) -> T, tol: T) -> Result<ScanOutcome<T>, CrossError> {
    let m = SCAN_INTERVALS / 2;
    let step = T::PI() / real::<T>(m as f64);
    let ztol = T::epsilon() * real::<T>(64.0);

    let mut h: Vec<T> = Vec::with_capacity(m);
    for k in 0..m {
        h.push(g(step * real::<T>(k as f64)) - T::one());
    }

    // reject degenerate contact along an arc
    let mut zero_run = 0usize;
    for k in 0..m {
        if h[k].abs() <= ztol {
            zero_run += 1;
            if zero_run >= 2 {
                return Err(CrossError::UnresolvedRoot(
                    (step * real::<T>(k as f64)).to_f64().unwrap(),
                ));
            }
        } else {
            zero_run = 0;
        }
    }

    let mut roots = Vec::new();
    let mut grazing = Vec::new();
    for k in 0..m {
        let a = step * real::<T>(k as f64);
        let ha = h[k];
        let hb = h[(k + 1) % m];
        if ha.abs() <= ztol {
            // node sits on the circle: classify from the neighbors
            let prev = h[(k + m - 1) % m];
            if prev * hb < T::zero() {
                let parity = if prev > T::zero() {
                    Parity::Enter
                } else {
                    Parity::Exit
                };
                roots.push((a, parity));
            } else {
                grazing.push(a);
            }
            continue;
        }
        if hb.abs() <= ztol || ha * hb > T::zero() {
            continue;
        }
        let b = a + step;
        let xi = bisect(g, a, b, ha > T::zero(), tol);
        let parity = if ha > T::zero() {
            Parity::Enter
        } else {
            Parity::Exit
        };
        roots.push((xi, parity));
    }
    Ok(ScanOutcome { roots, grazing })
}

fn bisect<T: Real>(g: &impl Fn(T) -> T, mut a: T, mut b: T, decreasing: bool, tol: T) -> T {
    let half = real::<T>(0.5);
    for _ in 0..BISECT_MAX_ITER {
        if (b - a).abs() <= tol {
            break;
        }
        let mid = (a + b) * half;
        let hm = g(mid) - T::one();
        let mid_high = hm > T::zero();
        if mid_high == decreasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) * half
}

/// Area of `K` intersected with the ellipse, by adaptive polar quadrature
/// in the normalized frame with forced subdivision at every crossing.
pub fn intersection_area<T: Real>(body: &ConvexBody<T>, ellipse: &CenteredEllipse<T>) -> T {
    intersection_area_with_rtol(body, ellipse, T::tol(DEFAULT_AREA_RTOL))
}

pub fn intersection_area_with_rtol<T: Real>(
    body: &ConvexBody<T>,
    ellipse: &CenteredEllipse<T>,
    rtol: T,
) -> T {
    let frame = ellipse.normalizing_map();
    let normalized = body.apply_linear_with_grid(frame, NORM_GRID);
    let g = |th: T| normalized.radial(th);

    // breakpoints: crossings (lenient scan) plus radial kinks of the body
    let mut breaks = lenient_roots(&g);
    breaks.extend(normalized.breakpoints());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let cap = T::PI().min(normalized.area());
    let tol = (rtol * cap).max(T::epsilon() * real::<T>(16.0));
    let one = T::one();
    let integrand = |th: T| g(th).min(one);
    let norm_area = adaptive_simpson_with_breakpoints(&integrand, T::zero(), T::PI(), &breaks, tol);
    norm_area * ellipse.area() / T::PI()
}

/// Crossing angles for quadrature purposes only: no parity bookkeeping, no
/// failure modes.
fn lenient_roots<T: Real>(g: &impl Fn(T) -> T) -> Vec<T> {
    let m = SCAN_INTERVALS / 2;
    let step = T::PI() / real::<T>(m as f64);
    let mut prev = g(T::zero()) - T::one();
    let mut roots = Vec::new();
    for k in 1..=m {
        let th = step * real::<T>(k as f64);
        let cur = g(th.min(T::PI() - T::epsilon())) - T::one();
        if prev * cur < T::zero() {
            roots.push(bisect(g, th - step, th, prev > T::zero(), T::tol(1e-12)));
        }
        prev = cur;
    }
    roots
}

/// Symmetric difference `d_sym(K, E) = area K + area E - 2 area(K cap E)`.
pub fn symdiff_distance<T: Real>(body: &ConvexBody<T>, ellipse: &CenteredEllipse<T>) -> T {
    body.area() + ellipse.area() - real::<T>(2.0) * intersection_area(body, ellipse)
}

/// Direct evaluation of `d_sym` as the polar integral of `|G - rho|` in the
/// original frame; used to cross-check [`symdiff_distance`].
pub fn symdiff_distance_integral<T: Real>(body: &ConvexBody<T>, ellipse: &CenteredEllipse<T>) -> T {
    let g = |th: T| body.radial(th) - ellipse.radial_sq(th);
    let mut breaks: Vec<T> = {
        let gg = |th: T| body.radial(th) / ellipse.radial_sq(th);
        lenient_roots(&gg)
    };
    breaks.extend(body.breakpoints());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = body.area() + ellipse.area();
    let tol = T::tol(1e-9) * scale;
    let integrand = |th: T| g(th).abs();
    adaptive_simpson_with_breakpoints(&integrand, T::zero(), T::PI(), &breaks, tol)
}

/// Sample the intersection function `I_K(t) = area(E_t cap K)` along the
/// standard family.
pub fn intersection_profile<T: Real>(
    body: &ConvexBody<T>,
    t_range: (T, T),
    steps: usize,
) -> Vec<(T, T)> {
    assert!(steps >= 2, "profile needs at least 2 samples");
    let (lo, hi) = t_range;
    let ts: Vec<T> = (0..steps)
        .map(|k| lo + (hi - lo) * real::<T>(k as f64) / real::<T>((steps - 1) as f64))
        .collect();
    ts.into_par_iter()
        .map(|t| {
            let e = CenteredEllipse::standard(t);
            (t, intersection_area(body, &e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexBody;
    use std::f64::consts::PI;

    fn rect_strip() -> ConvexBody<f64> {
        ConvexBody::from_polygon(&[
            Vec2::new(10.0, 0.5),
            Vec2::new(-10.0, 0.5),
            Vec2::new(-10.0, -0.5),
            Vec2::new(10.0, -0.5),
        ])
        .unwrap()
    }

    fn square() -> ConvexBody<f64> {
        ConvexBody::from_polygon(&[
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
        ])
        .unwrap()
    }

    #[test]
    fn rect_strip_crossings() {
        let cs = find_crossings(&rect_strip(), &CenteredEllipse::unit_disk(), 1e-13).unwrap();
        assert_eq!(cs.crossings().len(), 4);
        assert_eq!(cs.n(), 1);
        let expected = [PI / 6.0, 5.0 * PI / 6.0, 7.0 * PI / 6.0, 11.0 * PI / 6.0];
        for (c, &xi) in cs.crossings().iter().zip(&expected) {
            assert!((c.xi - xi).abs() < 1e-10, "xi {} vs {}", c.xi, xi);
            assert!((c.alpha - PI / 3.0).abs() < 1e-9);
            assert!(!c.tangency);
        }
        assert_eq!(cs.crossings()[0].parity, Parity::Enter);
        assert_eq!(cs.crossings()[1].parity, Parity::Exit);
        assert_eq!(cs.crossings()[2].parity, Parity::Enter);
        assert!(cs.is_transverse());
    }

    #[test]
    fn parity_alternation_and_antipodal_pairing() {
        let body = rect_strip().perturb_general_position(0.03, 5);
        let cs = find_crossings(&body, &CenteredEllipse::unit_disk(), 1e-12).unwrap();
        let cr = cs.crossings();
        let n2 = cr.len() / 2;
        for j in 0..cr.len() {
            let expect = if j % 2 == 0 {
                Parity::Enter
            } else {
                Parity::Exit
            };
            assert_eq!(cr[j].parity, expect);
        }
        for j in 0..n2 {
            let d = (cr[j + n2].xi - cr[j].xi - PI).abs();
            assert!(d < 1e-12, "antipodal pairing off by {d}");
            assert_eq!(cr[j].parity, cr[j + n2].parity);
        }
    }

    #[test]
    fn small_disk_is_contained() {
        let samples = vec![0.81_f64; 64];
        let small = ConvexBody::from_radial_samples(&samples).unwrap();
        let cs = find_crossings(&small, &CenteredEllipse::unit_disk(), 1e-12).unwrap();
        assert!(cs.is_empty());
        assert_eq!(cs.containment(), Some(Containment::BodyInsideEllipse));

        let big = ConvexBody::from_radial_samples(&vec![1.21_f64; 64]).unwrap();
        let cs = find_crossings(&big, &CenteredEllipse::unit_disk(), 1e-12).unwrap();
        assert_eq!(cs.containment(), Some(Containment::EllipseInsideBody));
    }

    #[test]
    fn intersection_area_disk_disk() {
        let disk = ConvexBody::from_radial_samples(&vec![1.0_f64; 64]).unwrap();
        let a = intersection_area(&disk, &CenteredEllipse::unit_disk());
        assert!((a - PI).abs() < 1e-8);
    }

    #[test]
    fn intersection_area_rect_strip() {
        // circular slab: 2 (b sqrt(1-b^2) + arcsin b) with b = 1/2
        let expect = 2.0 * (0.5 * (0.75_f64).sqrt() + 0.5_f64.asin());
        let a = intersection_area(&rect_strip(), &CenteredEllipse::unit_disk());
        assert!((a - expect).abs() < 1e-8, "{a} vs {expect}");
    }

    #[test]
    fn symdiff_square_vs_disk() {
        let d = symdiff_distance(&square(), &CenteredEllipse::unit_disk());
        assert!((d - (4.0 - PI)).abs() < 1e-8);
        let direct = symdiff_distance_integral(&square(), &CenteredEllipse::unit_disk());
        assert!((d - direct).abs() < 1e-7);
    }

    #[test]
    fn symdiff_rect_strip() {
        let expect = 20.0 + PI - 2.0 * 1.9132229549810364;
        let d = symdiff_distance(&rect_strip(), &CenteredEllipse::unit_disk());
        assert!((d - expect).abs() < 1e-7);
    }

    #[test]
    fn profile_symmetry_for_disk() {
        let disk = ConvexBody::from_radial_samples(&vec![1.0_f64; 64]).unwrap();
        let prof = intersection_profile(&disk, (-1.0, 1.0), 3);
        assert_eq!(prof.len(), 3);
        assert!((prof[0].1 - prof[2].1).abs() < 1e-9);
        assert!(prof.iter().all(|(_, v)| v.is_finite()));
        // square profile is symmetric under t -> -t as well
        let sq = square();
        let p = intersection_profile(&sq, (-0.8, 0.8), 5);
        assert!((p[0].1 - p[4].1).abs() < 1e-7);
        assert!((p[1].1 - p[3].1).abs() < 1e-7);
    }

    #[test]
    fn area_bounded_by_min_and_unimodular_equivariance() {
        let body = rect_strip();
        let e = CenteredEllipse::new(0.4, 0.3, 2.0);
        let i = intersection_area(&body, &e);
        assert!(i <= body.area().min(e.area()) + 1e-9);

        let l = Mat2::new(1.0, 0.7, 0.0, 1.0);
        let lb = body.apply_unimodular(l).unwrap();
        // ellipse form transforms as Q -> L^{-T} Q L^{-1}
        let li = l.inverse().unwrap();
        let q2 = li.transpose() * e.form() * li;
        let le = CenteredEllipse::from_form(q2);
        let i2 = intersection_area(&lb, &le);
        assert!((i - i2).abs() < 1e-8, "{i} vs {i2}");
    }
}
