//! Centrally symmetric planar convex bodies with a uniform radial-function
//! view `r^2 = G(theta)`, `G(theta + pi) = G(theta)`.
//!
//! Three source representations are supported: polygons, sublevel sets of
//! even bivariate polynomials (degree <= 4), and sampled radial grids.
//! All of them evaluate through [`ConvexBody::radial`]; linear images of
//! non-polygon sources are handled by composing the query direction with
//! the inverse map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{polygon_signed_area, Mat2, Vec2};
use crate::quad::adaptive_simpson_with_breakpoints;
use crate::scalar::{real, Real};

/// Default number of radial grid samples on `[0, pi)`.
pub const DEFAULT_GRID: usize = 2048;

/// Number of boundary samples used by the convexity validation.
const CONVEXITY_SAMPLES: usize = 360;

/// Bisection bracket and iteration cap for implicit-polynomial rays.
const RAY_R_LO: f64 = 1e-6;
const RAY_R_HI: f64 = 1e6;
const RAY_MAX_ITER: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BodyError {
    #[error("polygon needs at least 4 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex list is not centrally symmetric (max deviation {0})")]
    NotCentrallySymmetric(f64),
    #[error("body fails the convexity check (worst slack {0})")]
    NotConvex(f64),
    #[error("no boundary root on the ray theta = {0}")]
    RayRootNotFound(f64),
    #[error("matrix determinant {0} is not 1")]
    NotUnimodular(f64),
    #[error("radial samples must be positive and finite")]
    InvalidRadialSamples,
}

/// Coefficients of an even bivariate polynomial
/// `p(x,y) = x2*x^2 + xy*xy + y2*y^2 + x4*x^4 + x3y*x^3y + x2y2*x^2y^2 + xy3*xy^3 + y4*y^4`;
/// the body is the component of `{p <= 1}` around the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImplicitCoeffs<T> {
    pub x2: T,
    pub xy: T,
    pub y2: T,
    pub x4: T,
    pub x3y: T,
    pub x2y2: T,
    pub xy3: T,
    pub y4: T,
}

impl<T: Real> ImplicitCoeffs<T> {
    pub fn quadratic(x2: T, xy: T, y2: T) -> Self {
        let z = T::zero();
        Self {
            x2,
            xy,
            y2,
            x4: z,
            x3y: z,
            x2y2: z,
            xy3: z,
            y4: z,
        }
    }

    pub fn eval(&self, p: Vec2<T>) -> T {
        let (x, y) = (p.x, p.y);
        let x2 = x * x;
        let y2 = y * y;
        self.x2 * x2
            + self.xy * x * y
            + self.y2 * y2
            + self.x4 * x2 * x2
            + self.x3y * x2 * x * y
            + self.x2y2 * x2 * y2
            + self.xy3 * x * y2 * y
            + self.y4 * y2 * y2
    }
}

/// Periodic monotone cubic interpolant (Fritsch-Butland slopes) for radial
/// samples on the uniform grid `theta_k = k*pi/n`.
#[derive(Clone, Debug)]
pub struct RadialInterp<T> {
    values: Vec<T>,
    slopes: Vec<T>,
    step: T,
}

impl<T: Real> RadialInterp<T> {
    pub fn new(values: Vec<T>) -> Self {
        let n = values.len();
        let step = T::PI() / real::<T>(n as f64);
        let two = real::<T>(2.0);
        let mut secants = Vec::with_capacity(n);
        for k in 0..n {
            secants.push((values[(k + 1) % n] - values[k]) / step);
        }
        let mut slopes = Vec::with_capacity(n);
        for k in 0..n {
            let prev = secants[(k + n - 1) % n];
            let next = secants[k];
            // harmonic-mean slope limiter keeps the interpolant monotone
            // between nodes and kills overshoot at extrema
            let m = if prev * next <= T::zero() {
                T::zero()
            } else {
                two * prev * next / (prev + next)
            };
            slopes.push(m);
        }
        Self {
            values,
            slopes,
            step,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Evaluate at `theta` reduced mod `pi`.
    pub fn eval(&self, theta: T) -> T {
        let n = self.values.len();
        let t = wrap_half_turn(theta) / self.step;
        let mut k = t.floor().to_usize().unwrap_or(0);
        if k >= n {
            k = n - 1;
        }
        let s = t - real::<T>(k as f64);
        let kn = (k + 1) % n;
        let (y0, y1) = (self.values[k], self.values[kn]);
        let (m0, m1) = (self.slopes[k], self.slopes[kn]);
        let s2 = s * s;
        let s3 = s2 * s;
        let two = real::<T>(2.0);
        let three = real::<T>(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        h00 * y0 + h10 * self.step * m0 + h01 * y1 + h11 * self.step * m1
    }

    /// Exact integral of the interpolant over one period `[0, pi)`.
    pub fn integral(&self) -> T {
        let n = self.values.len();
        let half = real::<T>(0.5);
        let twelfth = T::one() / real::<T>(12.0);
        let mut acc = T::zero();
        for k in 0..n {
            let kn = (k + 1) % n;
            acc += self.step * (self.values[k] + self.values[kn]) * half
                + self.step * self.step * (self.slopes[k] - self.slopes[kn]) * twelfth;
        }
        acc
    }
}

/// Underlying exact representation of a body, always queried through a
/// composed linear map.
#[derive(Clone, Debug)]
pub enum BodySource<T> {
    Polygon(Vec<Vec2<T>>),
    Implicit(ImplicitCoeffs<T>),
    Radial(RadialInterp<T>),
}

/// Centrally symmetric planar convex body.
///
/// Immutable after construction; all evaluation methods are `&self` and
/// safe to call concurrently.
#[derive(Clone, Debug)]
pub struct ConvexBody<T> {
    source: BodySource<T>,
    /// linear map applied to the source body (identity for polygons, whose
    /// vertices are mapped eagerly)
    map: Mat2<T>,
    inv_map: Mat2<T>,
    /// vertex angles in increasing order on `[0, 2pi)`, polygon sources only
    vertex_angles: Vec<T>,
    grid: Vec<T>,
    area: T,
}

impl<T: Real> ConvexBody<T> {
    /// Build from a counterclockwise, centrally symmetric convex vertex
    /// list `v_{k+m} = -v_k` (vertex count `2m`).
    pub fn from_polygon(vertices: &[Vec2<T>]) -> Result<Self, BodyError> {
        Self::from_polygon_with_grid(vertices, DEFAULT_GRID)
    }

    pub fn from_polygon_with_grid(vertices: &[Vec2<T>], n: usize) -> Result<Self, BodyError> {
        let count = vertices.len();
        if count < 4 {
            return Err(BodyError::TooFewVertices(count));
        }
        if count % 2 != 0 {
            return Err(BodyError::NotCentrallySymmetric(f64::INFINITY));
        }
        let m = count / 2;
        let scale = vertices.iter().fold(T::zero(), |acc, v| acc.max(v.norm()));
        let mut worst_span = T::zero();
        for k in 0..m {
            let dev = (vertices[k] + vertices[k + m]).norm();
            worst_span = worst_span.max(dev);
        }
        let sym_tol = T::tol(1e-9) * (T::one() + scale);
        if worst_span > sym_tol {
            return Err(BodyError::NotCentrallySymmetric(
                worst_span.to_f64().unwrap_or(f64::NAN),
            ));
        }

        // convexity and counterclockwise orientation via edge cross products
        let conv_tol = T::tol(1e-9) * (T::one() + scale * scale);
        let mut worst = T::infinity();
        for k in 0..count {
            let a = vertices[k];
            let b = vertices[(k + 1) % count];
            let c = vertices[(k + 2) % count];
            if (b - a).norm() <= T::epsilon() * scale {
                return Err(BodyError::NotConvex(0.0));
            }
            worst = worst.min((b - a).cross(c - b));
        }
        if worst < -conv_tol {
            return Err(BodyError::NotConvex(worst.to_f64().unwrap_or(f64::NAN)));
        }
        if polygon_signed_area(vertices) <= T::zero() {
            return Err(BodyError::NotConvex(f64::NEG_INFINITY));
        }

        let mut body = Self {
            source: BodySource::Polygon(vertices.to_vec()),
            map: Mat2::identity(),
            inv_map: Mat2::identity(),
            vertex_angles: Vec::new(),
            grid: Vec::new(),
            area: T::zero(),
        };
        body.index_polygon();
        body.finish(n)?;
        body.area = polygon_signed_area(body.polygon_vertices().unwrap());
        Ok(body)
    }

    /// Build from an even polynomial sublevel set `{p <= 1}`; each grid ray
    /// is solved by bisection.
    pub fn from_implicit(coeffs: ImplicitCoeffs<T>, resolution: usize) -> Result<Self, BodyError> {
        let mut body = Self {
            source: BodySource::Implicit(coeffs),
            map: Mat2::identity(),
            inv_map: Mat2::identity(),
            vertex_angles: Vec::new(),
            grid: Vec::new(),
            area: T::zero(),
        };
        // verify every grid ray has a bounded root before anything else
        let n = resolution.max(8);
        for k in 0..n {
            let theta = T::PI() * real::<T>(k as f64) / real::<T>(n as f64);
            if body.try_radial(theta).is_none() {
                return Err(BodyError::RayRootNotFound(
                    theta.to_f64().unwrap_or(f64::NAN),
                ));
            }
        }
        body.finish(n)?;
        body.area = body.quadrature_area();
        Ok(body)
    }

    /// Build from `G` samples on the uniform grid over `[0, pi)`.
    pub fn from_radial_samples(samples: &[T]) -> Result<Self, BodyError> {
        if samples.len() < 8 {
            return Err(BodyError::InvalidRadialSamples);
        }
        if samples.iter().any(|g| !g.is_finite() || *g <= T::zero()) {
            return Err(BodyError::InvalidRadialSamples);
        }
        let n = samples.len();
        let mut body = Self {
            source: BodySource::Radial(RadialInterp::new(samples.to_vec())),
            map: Mat2::identity(),
            inv_map: Mat2::identity(),
            vertex_angles: Vec::new(),
            grid: Vec::new(),
            area: T::zero(),
        };
        body.finish(n)?;
        body.area = body.quadrature_area();
        Ok(body)
    }

    /// Squared radial function `G(theta)`; exactly `pi`-periodic.
    pub fn radial(&self, theta: T) -> T {
        self.try_radial(theta)
            .expect("radial evaluation failed on a validated body")
    }

    fn try_radial(&self, theta: T) -> Option<T> {
        match &self.source {
            BodySource::Polygon(v) => Some(self.polygon_radial(v, theta)),
            BodySource::Implicit(c) => {
                let u = Vec2::unit(wrap_half_turn(theta));
                let w = self.inv_map.apply(u);
                let wn = w.norm();
                let g0 = implicit_ray_root(c, w.scale(T::one() / wn))?;
                Some(g0 / (wn * wn))
            }
            BodySource::Radial(interp) => {
                let u = Vec2::unit(wrap_half_turn(theta));
                let w = self.inv_map.apply(u);
                let wn2 = w.norm_sq();
                Some(interp.eval(w.angle()) / wn2)
            }
        }
    }

    fn polygon_radial(&self, vertices: &[Vec2<T>], theta: T) -> T {
        let t = wrap_half_turn(theta);
        let u = Vec2::unit(t);
        // locate the sector [angle_k, angle_{k+1}) containing t
        let angles = &self.vertex_angles;
        let n = angles.len();
        let idx = match angles.binary_search_by(|a| a.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(0) => n - 1,
            Err(i) => i - 1,
        };
        let a = vertices[idx];
        let b = vertices[(idx + 1) % n];
        let r = a.cross(b) / u.cross(b - a);
        r * r
    }

    /// Cached area `= (1/2) integral of G over [0, 2pi)`.
    pub fn area(&self) -> T {
        self.area
    }

    fn quadrature_area(&self) -> T {
        match &self.source {
            // exact integral of the interpolant, scaled by the map
            BodySource::Radial(interp) if self.map_is_identity() => interp.integral(),
            _ => {
                let tol = T::tol(1e-10) * (T::one() + self.grid_max());
                let breaks = self.breakpoints();
                adaptive_simpson_with_breakpoints(
                    &|th| self.radial(th),
                    T::zero(),
                    T::PI(),
                    &breaks,
                    tol,
                )
            }
        }
    }

    fn map_is_identity(&self) -> bool {
        self.map == Mat2::identity()
    }

    /// Angles in `[0, pi)` where `G` is not smooth (polygon vertex rays).
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.source {
            BodySource::Polygon(_) => {
                let mut b: Vec<T> = self
                    .vertex_angles
                    .iter()
                    .map(|&a| wrap_half_turn(a))
                    .collect();
                b.sort_by(|p, q| p.partial_cmp(q).unwrap());
                b.dedup_by(|p, q| (*p - *q).abs() <= T::epsilon() * real::<T>(8.0));
                b
            }
            _ => Vec::new(),
        }
    }

    /// Apply a volume-preserving linear map.
    pub fn apply_unimodular(&self, l: Mat2<T>) -> Result<Self, BodyError> {
        let det = l.det();
        if (det - T::one()).abs() > T::tol(1e-12) {
            return Err(BodyError::NotUnimodular(det.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.apply_linear(l))
    }

    /// Apply an orientation-preserving invertible linear map; areas scale
    /// by `det L`. Central symmetry and convexity are preserved.
    pub fn transformed(&self, l: Mat2<T>) -> Result<Self, BodyError> {
        let det = l.det();
        if !(det > T::zero() && det.is_finite()) {
            return Err(BodyError::NotUnimodular(det.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.apply_linear(l))
    }

    /// Apply an arbitrary invertible linear map (areas scale by `|det|`).
    pub(crate) fn apply_linear(&self, l: Mat2<T>) -> Self {
        self.apply_linear_with_grid(l, self.grid.len())
    }

    /// As [`Self::apply_linear`] but resampling only `n` grid nodes; the
    /// normalized frames built inside the crossing and area routines query
    /// `radial` directly and only need a coarse grid for bounds.
    pub(crate) fn apply_linear_with_grid(&self, l: Mat2<T>, n: usize) -> Self {
        let inv = l.inverse().expect("linear map must be invertible");
        let mut out = match &self.source {
            BodySource::Polygon(v) => {
                let mapped: Vec<Vec2<T>> = v.iter().map(|&p| l.apply(p)).collect();
                let mut b = Self {
                    source: BodySource::Polygon(mapped),
                    map: Mat2::identity(),
                    inv_map: Mat2::identity(),
                    vertex_angles: Vec::new(),
                    grid: Vec::new(),
                    area: T::zero(),
                };
                b.index_polygon();
                b
            }
            _ => Self {
                source: self.source.clone(),
                map: l * self.map,
                inv_map: self.inv_map * inv,
                vertex_angles: Vec::new(),
                grid: Vec::new(),
                area: T::zero(),
            },
        };
        out.resample_grid(n.max(16));
        out.area = self.area * l.det().abs();
        out
    }

    /// Deterministic pseudorandom unimodular perturbation within `magnitude`
    /// of the identity; used to push bodies into general position.
    pub fn perturb_general_position(&self, magnitude: T, seed: u64) -> Self {
        assert!(
            magnitude >= T::zero() && magnitude <= real::<T>(0.05),
            "perturbation magnitude must lie in [0, 0.05]"
        );
        if magnitude == T::zero() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || real::<T>(rng.gen_range(-1.0..1.0));
        // traceless generator -> exact unimodular exponential
        let x = Mat2::new(draw(), draw(), draw(), T::zero());
        let x = Mat2::new(x.a, x.b, x.c, -x.a);
        let l = x.scale(magnitude).exp_traceless();
        self.apply_linear(l)
    }

    /// Point membership test through the source representation.
    pub fn contains(&self, p: Vec2<T>) -> bool {
        match &self.source {
            BodySource::Polygon(v) => {
                let n = v.len();
                for k in 0..n {
                    let a = v[k];
                    let b = v[(k + 1) % n];
                    if (b - a).cross(p - a) < T::zero() {
                        return false;
                    }
                }
                true
            }
            BodySource::Implicit(c) => {
                let w = self.inv_map.apply(p);
                if c.eval(w) > T::one() {
                    return false;
                }
                // restrict {p <= 1} to its bounded component around the
                // origin: along a ray the polynomial is A s + B s^2 in
                // s = r^2, so for B < 0 membership also requires staying
                // below the profile peak at s = A / (2|B|)
                let r2 = w.norm_sq();
                if r2 == T::zero() {
                    return true;
                }
                let u = w.scale(T::one() / r2.sqrt());
                let a = c.x2 * u.x * u.x + c.xy * u.x * u.y + c.y2 * u.y * u.y;
                let b = c.x4 * u.x.powi(4)
                    + c.x3y * u.x.powi(3) * u.y
                    + c.x2y2 * u.x * u.x * u.y * u.y
                    + c.xy3 * u.x * u.y.powi(3)
                    + c.y4 * u.y.powi(4);
                b >= T::zero() || r2 <= a / -(b + b)
            }
            BodySource::Radial(interp) => {
                let w = self.inv_map.apply(p);
                w.norm_sq() <= interp.eval(w.angle())
            }
        }
    }

    /// Boundary point at polar angle `theta`.
    pub fn boundary_point(&self, theta: T) -> Vec2<T> {
        Vec2::unit(theta).scale(self.radial(theta).sqrt())
    }

    /// `n` boundary points at uniform angles over `[0, 2pi)`.
    pub fn boundary_points(&self, n: usize) -> Vec<Vec2<T>> {
        (0..n)
            .map(|k| {
                let th = real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(n as f64);
                self.boundary_point(th)
            })
            .collect()
    }

    /// Support function `h(u) = max_{x in K} <x, u>` for unit `u`.
    pub fn support(&self, u: Vec2<T>) -> T {
        match &self.source {
            BodySource::Polygon(v) => v
                .iter()
                .fold(T::neg_infinity(), |acc, &p| acc.max(p.dot(u))),
            _ => {
                // dense scan over the grid, then a parabolic refinement
                let n = self.grid.len();
                let dot_at = |k: usize| -> T {
                    let th = T::PI() * real::<T>((k % n) as f64) / real::<T>(n as f64);
                    let p = Vec2::unit(th).scale(self.grid[k % n].sqrt());
                    p.dot(u).abs() // central symmetry: +-p both in K
                };
                let mut best = T::neg_infinity();
                let mut best_k = 0;
                for k in 0..n {
                    let d = dot_at(k);
                    if d > best {
                        best = d;
                        best_k = k;
                    }
                }
                let f0 = dot_at((best_k + n - 1) % n);
                let f1 = best;
                let f2 = dot_at((best_k + 1) % n);
                let denom = f0 - real::<T>(2.0) * f1 + f2;
                if denom.abs() <= T::epsilon() * (T::one() + f1) {
                    return f1;
                }
                let half = real::<T>(0.5);
                let s = half * (f0 - f2) / denom;
                let s = s.max(-T::one()).min(T::one());
                // quadratic model through the three samples
                f1 - real::<T>(0.25) * (f0 - f2) * s
            }
        }
    }

    /// Radius of a centered disk containing the body (with a small margin).
    pub fn bounding_radius(&self) -> T {
        let gmax = self.grid_max();
        gmax.sqrt() * real::<T>(1.01)
    }

    fn grid_max(&self) -> T {
        self.grid.iter().fold(T::zero(), |a, &g| a.max(g))
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn source(&self) -> &BodySource<T> {
        &self.source
    }

    pub fn polygon_vertices(&self) -> Option<&[Vec2<T>]> {
        match &self.source {
            BodySource::Polygon(v) => Some(v),
            _ => None,
        }
    }

    fn index_polygon(&mut self) {
        let two_pi = real::<T>(2.0) * T::PI();
        if let BodySource::Polygon(v) = &mut self.source {
            // rotate the vertex list so angles increase from the smallest
            let angles: Vec<T> = v
                .iter()
                .map(|p| {
                    let mut a = p.angle();
                    if a < T::zero() {
                        a += two_pi;
                    }
                    a
                })
                .collect();
            let start = angles
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            v.rotate_left(start);
            let mut rotated = angles;
            rotated.rotate_left(start);
            self.vertex_angles = rotated;
        }
    }

    fn resample_grid(&mut self, n: usize) {
        self.grid = (0..n)
            .map(|k| {
                let th = T::PI() * real::<T>(k as f64) / real::<T>(n as f64);
                self.radial(th)
            })
            .collect();
    }

    /// Sample the grid and run the validation suite.
    fn finish(&mut self, n: usize) -> Result<(), BodyError> {
        self.resample_grid(n.max(8));
        self.validate()
    }

    fn validate(&self) -> Result<(), BodyError> {
        if self.grid.iter().any(|g| !g.is_finite() || *g <= T::zero()) {
            return Err(BodyError::NotConvex(f64::NAN));
        }
        // support-line test: every sampled boundary point lies inside every
        // half-plane spanned by a sampled boundary edge
        let m = CONVEXITY_SAMPLES;
        let pts: Vec<Vec2<T>> = (0..m)
            .map(|k| {
                let th = real::<T>(2.0) * T::PI() * real::<T>(k as f64) / real::<T>(m as f64);
                self.boundary_point(th)
            })
            .collect();
        let scale = pts.iter().fold(T::zero(), |a, p| a.max(p.norm()));
        let slack = T::tol(1e-9) * (T::one() + scale * scale);
        let mut worst = T::infinity();
        for k in 0..m {
            let a = pts[k];
            let edge = pts[(k + 1) % m] - a;
            for &p in &pts {
                worst = worst.min(edge.cross(p - a));
            }
        }
        if worst < -slack {
            return Err(BodyError::NotConvex(worst.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }
}

/// Reduce an angle to `[0, pi)` using the exact float remainder.
pub fn wrap_half_turn<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let mut r = theta % pi;
    if r < T::zero() {
        r += pi;
    }
    if r >= pi {
        r = T::zero();
    }
    r
}

/// Solve `p(r * u) = 1` along the unit ray `u` by bisection; returns `r^2`.
///
/// Along a ray the polynomial is `q(s) = A s + B s^2` in `s = r^2`, which
/// pins down a sign-change bracket exactly: for `B < 0` the profile peaks
/// at `s = A / (2|B|)` and a boundary root exists iff the peak value
/// reaches 1; for `B >= 0` the profile is convex and geometric bracket
/// growth is safe.
fn implicit_ray_root<T: Real>(coeffs: &ImplicitCoeffs<T>, u: Vec2<T>) -> Option<T> {
    let (ux, uy) = (u.x, u.y);
    let a = coeffs.x2 * ux * ux + coeffs.xy * ux * uy + coeffs.y2 * uy * uy;
    let b = coeffs.x4 * ux.powi(4)
        + coeffs.x3y * ux.powi(3) * uy
        + coeffs.x2y2 * ux * ux * uy * uy
        + coeffs.xy3 * ux * uy.powi(3)
        + coeffs.y4 * uy.powi(4);

    let residual = |r: T| coeffs.eval(u.scale(r)) - T::one();
    let lo = real::<T>(RAY_R_LO);
    let top = real::<T>(RAY_R_HI);
    if residual(lo) >= T::zero() {
        return None;
    }

    let tiny = T::epsilon() * real::<T>(16.0);
    let hi = if b < -tiny {
        if a <= T::zero() {
            return None;
        }
        let s_peak = a / (-(b + b));
        let q_peak = a * s_peak + b * s_peak * s_peak;
        if q_peak < T::one() {
            return None;
        }
        s_peak.sqrt()
    } else {
        let mut hi = lo * real::<T>(2.0);
        while residual(hi) < T::zero() {
            hi *= real::<T>(2.0);
            if hi > top {
                return None;
            }
        }
        hi
    };

    let tol = T::tol(1e-12);
    let half = real::<T>(0.5);
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..RAY_MAX_ITER {
        let mid = (lo + hi) * half;
        let f = residual(mid);
        if f.abs() <= tol || (hi - lo) <= T::epsilon() * mid {
            return Some(mid * mid);
        }
        if f < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = (lo + hi) * half;
    Some(mid * mid)
}

// ---------------------------------------------------------------------------
// JSON interchange
// ---------------------------------------------------------------------------

/// JSON form of a body:
/// `{"type":"polygon","vertices":[[x,y],...]}`,
/// `{"type":"implicit","coeffs":{"x2":..,"xy":..,...}}`, or
/// `{"type":"radial","samples":[...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Polygon { vertices: Vec<[f64; 2]> },
    Implicit { coeffs: ImplicitCoeffsSpec },
    Radial { samples: Vec<f64> },
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ImplicitCoeffsSpec {
    #[serde(default)]
    pub x2: f64,
    #[serde(default)]
    pub xy: f64,
    #[serde(default)]
    pub y2: f64,
    #[serde(default)]
    pub x4: f64,
    #[serde(default)]
    pub x3y: f64,
    #[serde(default)]
    pub x2y2: f64,
    #[serde(default)]
    pub xy3: f64,
    #[serde(default)]
    pub y4: f64,
}

impl<T: Real> ConvexBody<T> {
    pub fn from_spec(spec: &BodySpec, resolution: usize) -> Result<Self, BodyError> {
        match spec {
            BodySpec::Polygon { vertices } => {
                let v: Vec<Vec2<T>> = vertices
                    .iter()
                    .map(|p| Vec2::new(real(p[0]), real(p[1])))
                    .collect();
                Self::from_polygon_with_grid(&v, resolution)
            }
            BodySpec::Implicit { coeffs } => {
                let c = ImplicitCoeffs {
                    x2: real(coeffs.x2),
                    xy: real(coeffs.xy),
                    y2: real(coeffs.y2),
                    x4: real(coeffs.x4),
                    x3y: real(coeffs.x3y),
                    x2y2: real(coeffs.x2y2),
                    xy3: real(coeffs.xy3),
                    y4: real(coeffs.y4),
                };
                Self::from_implicit(c, resolution)
            }
            BodySpec::Radial { samples } => {
                let s: Vec<T> = samples.iter().map(|&g| real(g)).collect();
                Self::from_radial_samples(&s)
            }
        }
    }

    /// Serializable view of the body. Polygon sources round-trip exactly;
    /// mapped implicit/radial sources are exported as radial samples.
    pub fn to_spec(&self) -> BodySpec {
        match &self.source {
            BodySource::Polygon(v) => BodySpec::Polygon {
                vertices: v
                    .iter()
                    .map(|p| [p.x.to_f64().unwrap(), p.y.to_f64().unwrap()])
                    .collect(),
            },
            BodySource::Implicit(c) if self.map_is_identity() => BodySpec::Implicit {
                coeffs: ImplicitCoeffsSpec {
                    x2: c.x2.to_f64().unwrap(),
                    xy: c.xy.to_f64().unwrap(),
                    y2: c.y2.to_f64().unwrap(),
                    x4: c.x4.to_f64().unwrap(),
                    x3y: c.x3y.to_f64().unwrap(),
                    x2y2: c.x2y2.to_f64().unwrap(),
                    xy3: c.xy3.to_f64().unwrap(),
                    y4: c.y4.to_f64().unwrap(),
                },
            },
            _ => BodySpec::Radial {
                samples: self.grid.iter().map(|g| g.to_f64().unwrap()).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square() -> ConvexBody<f64> {
        ConvexBody::from_polygon(&[
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.0, -1.0),
        ])
        .unwrap()
    }

    fn rect_strip() -> ConvexBody<f64> {
        ConvexBody::from_polygon(&[
            Vec2::new(10.0, 0.5),
            Vec2::new(-10.0, 0.5),
            Vec2::new(-10.0, -0.5),
            Vec2::new(10.0, -0.5),
        ])
        .unwrap()
    }

    #[test]
    fn square_radial_values() {
        let b = square();
        assert!((b.radial(0.0) - 1.0).abs() < 1e-12);
        assert!((b.radial(PI / 4.0) - 2.0).abs() < 1e-12);
        assert!((b.area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rect_strip_radial() {
        let b = rect_strip();
        assert!((b.radial(PI / 2.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_polygon_rejected() {
        let r = ConvexBody::<f64>::from_polygon(&[
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(-1.0, -1.0),
            Vec2::new(1.2, -1.0),
        ]);
        assert!(matches!(r, Err(BodyError::NotCentrallySymmetric(_))));
    }

    #[test]
    fn nonconvex_polygon_rejected() {
        let r = ConvexBody::<f64>::from_polygon(&[
            Vec2::new(2.0, 0.0),
            Vec2::new(0.1, 0.1),
            Vec2::new(0.0, 2.0),
            Vec2::new(-2.0, 0.0),
            Vec2::new(-0.1, -0.1),
            Vec2::new(0.0, -2.0),
        ]);
        assert!(matches!(r, Err(BodyError::NotConvex(_))));
    }

    #[test]
    fn too_few_vertices() {
        let r = ConvexBody::<f64>::from_polygon(&[Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)]);
        assert!(matches!(r, Err(BodyError::TooFewVertices(2))));
    }

    #[test]
    fn unit_disk_from_implicit() {
        let disk = ConvexBody::<f64>::from_implicit(ImplicitCoeffs::quadratic(1.0, 0.0, 1.0), 512)
            .unwrap();
        for k in 0..32 {
            let th = PI * k as f64 / 32.0;
            assert!((disk.radial(th) - 1.0).abs() < 1e-11);
        }
        assert!((disk.area() - PI).abs() < 1e-9);
    }

    #[test]
    fn degenerate_strip_has_no_root() {
        // p = y^2: the horizontal ray never reaches the level set
        let r = ConvexBody::<f64>::from_implicit(ImplicitCoeffs::quadratic(0.0, 0.0, 1.0), 256);
        assert!(matches!(r, Err(BodyError::RayRootNotFound(_))));
    }

    #[test]
    fn radial_is_half_turn_periodic() {
        let b = rect_strip();
        for k in 0..720 {
            let th = PI * k as f64 / 720.0;
            let a = b.radial(th);
            let c = b.radial(th + PI);
            // exact up to the rounding of `th + pi` itself
            assert!((a - c).abs() <= 1e-12 * (1.0 + a), "theta {th}: {a} vs {c}");
            assert!(a > 0.0);
        }
    }

    #[test]
    fn unimodular_preserves_area() {
        let b = square();
        let l = Mat2::new(1.0, 1.0, 0.0, 1.0); // shear, det 1
        let sheared = b.apply_unimodular(l).unwrap();
        assert!((sheared.area() - 4.0).abs() < 1e-9);
        let bad = Mat2::new(2.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            b.apply_unimodular(bad),
            Err(BodyError::NotUnimodular(_))
        ));
    }

    #[test]
    fn diag_map_of_disk_matches_standard_ellipse() {
        let disk = ConvexBody::<f64>::from_implicit(ImplicitCoeffs::quadratic(1.0, 0.0, 1.0), 512)
            .unwrap();
        let t = 0.6_f64;
        let l = Mat2::diag((t / 2.0).exp(), (-t / 2.0).exp());
        let img = disk.apply_unimodular(l).unwrap();
        // image of the disk is E_{-t}: G = 1/(e^{-t} cos^2 + e^{t} sin^2)
        for k in 0..64 {
            let th = PI * k as f64 / 64.0;
            let expect = 1.0 / ((-t).exp() * th.cos().powi(2) + t.exp() * th.sin().powi(2));
            assert!((img.radial(th) - expect).abs() < 1e-9);
        }
        assert!((img.area() - PI).abs() < 1e-9);
    }

    #[test]
    fn perturbation_is_deterministic_and_trivial_at_zero() {
        let b = square();
        let p0 = b.perturb_general_position(0.0, 7);
        assert!((p0.radial(0.3) - b.radial(0.3)).abs() == 0.0);
        let p1 = b.perturb_general_position(0.01, 42);
        let p2 = b.perturb_general_position(0.01, 42);
        for k in 0..64 {
            let th = PI * k as f64 / 64.0;
            assert_eq!(p1.radial(th), p2.radial(th));
        }
        assert!((p1.area() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn radial_samples_round_trip() {
        let samples: Vec<f64> = (0..256)
            .map(|k| {
                let th = PI * k as f64 / 256.0;
                1.0 + 0.1 * (2.0 * th).cos()
            })
            .collect();
        let b = ConvexBody::from_radial_samples(&samples).unwrap();
        for (k, &s) in samples.iter().enumerate() {
            let th = PI * k as f64 / 256.0;
            assert!((b.radial(th) - s).abs() < 1e-13);
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = BodySpec::Polygon {
            vertices: vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: BodySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let body = ConvexBody::<f64>::from_spec(&spec, 256).unwrap();
        assert_eq!(body.to_spec(), spec);

        let imp: BodySpec =
            serde_json::from_str(r#"{"type":"implicit","coeffs":{"x2":1.0,"y2":1.0}}"#).unwrap();
        let disk = ConvexBody::<f64>::from_spec(&imp, 256).unwrap();
        assert!((disk.area() - PI).abs() < 1e-9);
    }
}
