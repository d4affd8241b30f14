//! Independent brute-force references for the analytic paths.
//!
//! Nothing here shares numeric machinery with the analytic code: areas
//! come from hit-or-miss Monte Carlo or convex polygon clipping, the
//! intersection function is integrated by a uniform composite Simpson rule
//! in the original frame (no normalization, no adaptive subdivision, no
//! crossing detection), and optima are located by exhaustive grid search.
//! Agreement between the two sides is therefore evidence rather than
//! tautology.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::body::ConvexBody;
use crate::conic::CenteredEllipse;
use crate::geom::{polygon_signed_area, Mat2, Vec2};
use crate::scalar::{real, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    Mc,
    Clip,
    Fd,
    Grid,
}

/// A reference value with its standard error (zero for deterministic
/// oracles).
#[derive(Clone, Copy, Debug)]
pub struct OracleEstimate<T> {
    pub value: T,
    pub sigma: T,
    pub method: OracleMethod,
}

/// Monte Carlo samples per deterministic reduction chunk.
const MC_CHUNK: usize = 1 << 16;
/// Composite-Simpson intervals for the finite-difference oracle.
const FD_SIMPSON_INTERVALS: usize = 1 << 16;

/// Hit-or-miss area estimate of `{ p : pred(p) }` inside the box
/// `[lo.x, hi.x] x [lo.y, hi.y]`.
///
/// Sampling is chunked with one counter-based RNG stream per chunk and the
/// hit counts are reduced in chunk order, so the result is reproducible
/// per `(seed, samples)` regardless of thread count.
pub fn mc_area<T: Real, F>(
    pred: &F,
    lo: Vec2<T>,
    hi: Vec2<T>,
    samples: usize,
    seed: u64,
) -> OracleEstimate<T>
where
    F: Fn(Vec2<T>) -> bool + Sync,
{
    assert!(samples >= 10_000, "too few samples for a useful estimate");
    let chunks: Vec<(u64, usize)> = (0..samples.div_ceil(MC_CHUNK))
        .map(|c| (c as u64, MC_CHUNK.min(samples - c * MC_CHUNK)))
        .collect();
    let hits: usize = chunks
        .par_iter()
        .map(|&(stream, count)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut h = 0usize;
            for _ in 0..count {
                let x = real::<T>(rng.gen::<f64>());
                let y = real::<T>(rng.gen::<f64>());
                let p = Vec2::new(lo.x + (hi.x - lo.x) * x, lo.y + (hi.y - lo.y) * y);
                if pred(p) {
                    h += 1;
                }
            }
            h
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();

    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let n = real::<T>(samples as f64);
    let p_hat = real::<T>(hits as f64) / n;
    OracleEstimate {
        value: box_area * p_hat,
        sigma: box_area * (p_hat * (T::one() - p_hat) / n).sqrt(),
        method: OracleMethod::Mc,
    }
}

/// Monte Carlo estimate of `area(K cap E)`.
pub fn mc_intersection_area<T: Real>(
    body: &ConvexBody<T>,
    ellipse: &CenteredEllipse<T>,
    samples: usize,
    seed: u64,
) -> OracleEstimate<T> {
    let r_body = body.bounding_radius();
    let (a, b) = ellipse.semi_axes();
    let r = r_body.min(a.max(b) * real::<T>(1.01));
    let lo = Vec2::new(-r, -r);
    let hi = Vec2::new(r, r);
    let pred = |p: Vec2<T>| body.contains(p) && ellipse.contains(p);
    mc_area(&pred, lo, hi, samples, seed)
}

/// Exact (to rounding) intersection area of two convex polygons via
/// Sutherland-Hodgman clipping.
pub fn clip_area<T: Real>(subject: &[Vec2<T>], clip: &[Vec2<T>]) -> OracleEstimate<T> {
    let mut poly: Vec<Vec2<T>> = subject.to_vec();
    let m = clip.len();
    for k in 0..m {
        if poly.is_empty() {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % m];
        poly = clip_halfplane(&poly, a, b);
    }
    let value = if poly.len() < 3 {
        T::zero()
    } else {
        polygon_signed_area(&poly)
    };
    OracleEstimate {
        value,
        sigma: T::zero(),
        method: OracleMethod::Clip,
    }
}

/// Keep the part of `poly` on the left of the directed edge `a -> b`.
fn clip_halfplane<T: Real>(poly: &[Vec2<T>], a: Vec2<T>, b: Vec2<T>) -> Vec<Vec2<T>> {
    let edge = b - a;
    let side = |p: Vec2<T>| edge.cross(p - a);
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let s = poly[i];
        let e = poly[(i + 1) % n];
        let ss = side(s);
        let se = side(e);
        let s_in = ss >= T::zero();
        let e_in = se >= T::zero();
        match (s_in, e_in) {
            (true, true) => out.push(e),
            (true, false) | (false, true) => {
                let denom = ss - se;
                if denom.abs() > T::epsilon() {
                    let t = ss / denom;
                    out.push(Vec2::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t));
                }
                if e_in {
                    out.push(e);
                }
            }
            (false, false) => {}
        }
    }
    out
}

/// Inscribed polygon of an ellipse with `n` vertices (counterclockwise).
pub fn polygonize_ellipse<T: Real>(e: &CenteredEllipse<T>, n: usize) -> Vec<Vec2<T>> {
    let (a, b) = e.semi_axes();
    let rot = Mat2::rotation(e.phi());
    (0..n)
        .map(|k| {
            let psi = real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(n as f64);
            rot.apply(Vec2::new(a * psi.cos(), b * psi.sin()))
        })
        .collect()
}

/// Intersection function `I(t) = area(E_t cap K)` integrated by a uniform
/// composite Simpson rule in the original frame. Intervals where the
/// boundary crosses the ellipse (the integrand kinks) are re-integrated by
/// a dense trapezoid sub-slicing, which brings the kink error below the
/// finite-difference noise floor.
pub fn area_along_standard_family<T: Real>(body: &ConvexBody<T>, t: T) -> T {
    let n = FD_SIMPSON_INTERVALS;
    let h = T::PI() / real::<T>(n as f64);
    let et = t.exp();
    let emt = (-t).exp();
    let gap = |th: T| {
        let (s, c) = th.sin_cos();
        body.radial(th) - T::one() / (et * c * c + emt * s * s)
    };
    let integrand = |th: T| {
        let (s, c) = th.sin_cos();
        let rho = T::one() / (et * c * c + emt * s * s);
        body.radial(th).min(rho)
    };

    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    let half = real::<T>(0.5);
    let mut acc = integrand(T::zero()) + integrand(T::PI());
    for k in 1..n {
        let w = if k % 2 == 1 { four } else { two };
        acc += w * integrand(h * real::<T>(k as f64));
    }
    let mut total = acc * h / real::<T>(3.0);

    // locate kink panels (Simpson panels span two intervals)
    let slices = 512usize;
    let mut prev = gap(T::zero());
    for p in 0..n / 2 {
        let a = h * real::<T>((2 * p) as f64);
        let b = a + h + h;
        let end = gap(b);
        let mid = gap(a + h);
        if prev * mid < T::zero() || mid * end < T::zero() {
            // replace the panel's Simpson value by dense trapezoids
            let fa = integrand(a);
            let fm = integrand(a + h);
            let fb = integrand(b);
            let panel = (fa + four * fm + fb) * h / real::<T>(3.0);
            let sh = (b - a) / real::<T>(slices as f64);
            let mut fine = (integrand(a) + integrand(b)) * half;
            for q in 1..slices {
                fine += integrand(a + sh * real::<T>(q as f64));
            }
            total += fine * sh - panel;
        }
        prev = end;
    }
    total
}

/// Central finite differences of the intersection function at `t = 0`.
pub fn fd_derivative<T: Real>(body: &ConvexBody<T>, order: usize, h: T) -> OracleEstimate<T> {
    assert!(h > T::zero(), "step must be positive");
    let value = match order {
        1 => {
            let ip = area_along_standard_family(body, h);
            let im = area_along_standard_family(body, -h);
            (ip - im) / (h + h)
        }
        2 => {
            let ip = area_along_standard_family(body, h);
            let i0 = area_along_standard_family(body, T::zero());
            let im = area_along_standard_family(body, -h);
            (ip - (i0 + i0) + im) / (h * h)
        }
        _ => panic!("finite differences implemented for orders 1 and 2"),
    };
    OracleEstimate {
        value,
        sigma: T::zero(),
        method: OracleMethod::Fd,
    }
}

/// Exhaustive `(t, phi)` grid search for the maximal-intersection ellipse
/// of area `lambda`, with one refinement pass around the best cell.
#[derive(Clone, Debug)]
pub struct GridSearchResult<T> {
    pub estimate: OracleEstimate<T>,
    /// Refined argmax in canonical coordinates (`t >= 0`).
    pub best_t: T,
    pub best_phi: T,
    /// Refined cell half-diagonal `(dt, dphi)`.
    pub cell: (T, T),
    /// Whether the near-optimal superlevel set (`1e-4` below the best
    /// value) on the coarse grid is a single connected component, after
    /// gluing the chart identifications `phi ~ phi + pi` and
    /// `(t, phi) ~ (-t, phi + pi/2)`.
    pub connected: bool,
}

/// Angular table resolution for grid-search area evaluation.
const GRID_TABLE: usize = 4096;

pub fn grid_search_mi<T: Real>(
    body: &ConvexBody<T>,
    lambda: T,
    t_span: (T, T),
    grid: usize,
) -> GridSearchResult<T> {
    assert!(grid >= 21, "grid search needs at least 21 nodes per axis");
    // dense radial table once; trapezoid over the table per cell
    let m = GRID_TABLE;
    let step = T::PI() / real::<T>(m as f64);
    let table: Vec<(T, T, T)> = (0..m)
        .map(|k| {
            let th = step * real::<T>(k as f64);
            let (s, c) = th.sin_cos();
            (body.radial(th), c, s)
        })
        .collect();
    let scale = lambda / T::PI();
    let value_at = |t: T, phi: T| -> T {
        // area(K cap E(t, phi, lambda)) = integral over [0, pi) of
        // min(G, 1/(u^T Q u)) with Q the ellipse form
        let q = form_entries(t, phi, scale);
        let mut acc = T::zero();
        for &(g, c, s) in &table {
            let denom = q.0 * c * c + (q.1 + q.1) * c * s + q.2 * s * s;
            acc += g.min(T::one() / denom);
        }
        acc * step
    };

    let (t_lo, t_hi) = t_span;
    let nt = grid;
    // an even phi count makes the quarter-turn chart gluing land exactly
    // on grid columns
    let nphi = grid + (grid % 2);
    let dt = (t_hi - t_lo) / real::<T>((nt - 1) as f64);
    let dphi = T::PI() / real::<T>(nphi as f64);

    let cells: Vec<(usize, usize)> = (0..nt)
        .flat_map(|i| (0..nphi).map(move |j| (i, j)))
        .collect();
    let values: Vec<T> = cells
        .par_iter()
        .map(|&(i, j)| value_at(t_lo + dt * real::<T>(i as f64), dphi * real::<T>(j as f64)))
        .collect();

    let (best_idx, best_val) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let (bi, bj) = cells[best_idx];

    let connected = superlevel_connected(&values, nt, nphi, t_lo, dt, best_val - T::tol(1e-4));

    // refinement pass over +-1.5 coarse cells around the argmax
    let rt_lo = t_lo + dt * (real::<T>(bi as f64) - real::<T>(1.5));
    let rt_hi = t_lo + dt * (real::<T>(bi as f64) + real::<T>(1.5));
    let rp_lo = dphi * (real::<T>(bj as f64) - real::<T>(1.5));
    let rdt = (rt_hi - rt_lo) / real::<T>((nt - 1) as f64);
    let rdphi = dphi * real::<T>(3.0) / real::<T>((nphi - 1) as f64);
    let refined: Vec<T> = cells
        .par_iter()
        .map(|&(i, j)| {
            value_at(
                rt_lo + rdt * real::<T>(i as f64),
                rp_lo + rdphi * real::<T>(j as f64),
            )
        })
        .collect();
    let (ridx, rval) = refined
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .unwrap();
    let (ri, rj) = cells[ridx];
    let mut best_t = rt_lo + rdt * real::<T>(ri as f64);
    let mut best_phi = rp_lo + rdphi * real::<T>(rj as f64);
    // canonical chart coordinates
    if best_t < T::zero() {
        best_t = -best_t;
        best_phi += T::FRAC_PI_2();
    }
    best_phi %= T::PI();
    if best_phi < T::zero() {
        best_phi += T::PI();
    }

    GridSearchResult {
        estimate: OracleEstimate {
            value: rval.max(best_val),
            sigma: T::zero(),
            method: OracleMethod::Grid,
        },
        best_t,
        best_phi,
        cell: (rdt, rdphi),
        connected,
    }
}

fn form_entries<T: Real>(t: T, phi: T, area_scale: T) -> (T, T, T) {
    // entries of R_phi diag(e^t, e^-t) R_phi^T / area_scale
    let (s, c) = phi.sin_cos();
    let et = t.exp() / area_scale;
    let emt = (-t).exp() / area_scale;
    (
        et * c * c + emt * s * s,
        (et - emt) * s * c,
        et * s * s + emt * c * c,
    )
}

/// Union-find connectivity of the superlevel set `{ value >= threshold }`
/// on the `(t, phi)` grid, with `phi` wrapping modulo `pi` and cells glued
/// to their `(-t, phi + pi/2)` mirrors when the grid is symmetric.
fn superlevel_connected<T: Real>(
    values: &[T],
    nt: usize,
    nphi: usize,
    t_lo: T,
    dt: T,
    threshold: T,
) -> bool {
    let idx = |i: usize, j: usize| i * nphi + j;
    let inside: Vec<bool> = values.iter().map(|&v| v >= threshold).collect();
    let mut parent: Vec<usize> = (0..values.len()).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    fn union(parent: &mut [usize], a: usize, b: usize) {
        let ra = find(parent, a);
        let rb = find(parent, b);
        if ra != rb {
            parent[ra] = rb;
        }
    }

    for i in 0..nt {
        for j in 0..nphi {
            if !inside[idx(i, j)] {
                continue;
            }
            if i + 1 < nt && inside[idx(i + 1, j)] {
                union(&mut parent, idx(i, j), idx(i + 1, j));
            }
            let jn = (j + 1) % nphi;
            if inside[idx(i, jn)] {
                union(&mut parent, idx(i, j), idx(i, jn));
            }
            // chart double-cover: (t, phi) ~ (-t, phi + pi/2)
            let t = t_lo + dt * real::<T>(i as f64);
            let mirror_t = -t;
            let fi = ((mirror_t - t_lo) / dt).round();
            if let Some(mi) = fi.to_usize() {
                if mi < nt
                    && (t_lo + dt * real::<T>(mi as f64) - mirror_t).abs() <= dt * T::tol(1e-6)
                    && nphi % 2 == 0
                {
                    let mj = (j + nphi / 2) % nphi;
                    if inside[idx(mi, mj)] {
                        union(&mut parent, idx(i, j), idx(mi, mj));
                    }
                }
            }
        }
    }

    let mut root = None;
    for (k, &is_in) in inside.iter().enumerate() {
        if is_in {
            let r = find(&mut parent, k);
            match root {
                None => root = Some(r),
                Some(r0) if r0 != r => return false,
                _ => {}
            }
        }
    }
    true
}
