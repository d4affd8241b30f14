//! Deterministic random generators for centrally symmetric convex bodies
//! and unimodular maps, used by the property and acceptance suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::{ConvexBody, ImplicitCoeffs};
use crate::geom::{Mat2, Vec2};
use crate::scalar::{real, Real};

/// Smooth body from a low-order trigonometric radial perturbation of the
/// unit disk, rescaled so that `G` straddles 1 (the boundary crosses the
/// unit circle). Convexity is enforced by shrinking the perturbation until
/// validation passes.
pub fn random_trig_body<T: Real>(seed: u64, roughness: f64) -> ConvexBody<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (1..=3)
        .map(|k| {
            let scale = roughness / (k * k) as f64;
            (
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            )
        })
        .collect();
    let mut shrink = 1.0;
    for _ in 0..12 {
        let samples: Vec<T> = (0..512)
            .map(|m| {
                let th = std::f64::consts::PI * m as f64 / 512.0;
                let mut g = 1.0;
                for (k, &(a, b)) in coeffs.iter().enumerate() {
                    let freq = 2.0 * (k + 1) as f64;
                    g += shrink * (a * (freq * th).cos() + b * (freq * th).sin());
                }
                real(g)
            })
            .collect();
        let lo = samples.iter().cloned().fold(T::infinity(), T::min);
        let hi = samples.iter().cloned().fold(T::zero(), T::max);
        if lo > T::zero() {
            let norm = (lo * hi).sqrt();
            let rescaled: Vec<T> = samples.iter().map(|&g| g / norm).collect();
            if let Ok(body) = ConvexBody::from_radial_samples(&rescaled) {
                return body;
            }
        }
        shrink *= 0.6;
    }
    ConvexBody::from_radial_samples(&[real::<T>(1.0); 512]).expect("unit disk samples are valid")
}

/// Smooth strictly convex body as a random quartic sublevel perturbation
/// of the unit disk.
pub fn random_quartic_body<T: Real>(seed: u64, roughness: f64) -> ConvexBody<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut shrink = 1.0;
    for _ in 0..12 {
        let dq = 0.3 * roughness * shrink;
        let d4 = 0.2 * roughness * shrink;
        let coeffs = ImplicitCoeffs {
            x2: real(1.0 + dq * draws[0]),
            xy: real(dq * draws[1]),
            y2: real(1.0 + dq * draws[2]),
            x4: real(d4 * draws[3]),
            x3y: real(d4 * draws[4]),
            x2y2: real(d4 * draws[5]),
            xy3: real(d4 * draws[6]),
            y4: real(d4 * draws[7]),
        };
        if let Ok(body) = ConvexBody::from_implicit(coeffs, 512) {
            return body;
        }
        shrink *= 0.6;
    }
    ConvexBody::from_implicit(
        ImplicitCoeffs::quadratic(real(1.0), real(0.0), real(1.0)),
        512,
    )
    .expect("unit disk level set is valid")
}

/// Centrally symmetric convex polygon with `2m` vertices on a trig-radius
/// profile.
pub fn random_polygon_body<T: Real>(seed: u64, m: usize) -> ConvexBody<T> {
    let m = m.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.35..0.35)).collect();
    let (a1, b1, a2) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let mut amp = 0.22;
    for _ in 0..12 {
        let vertices: Vec<Vec2<T>> = (0..2 * m)
            .map(|k| {
                let half = k % m;
                let th = std::f64::consts::PI * (half as f64 + jitter[half] + 0.5) / m as f64
                    + if k >= m { std::f64::consts::PI } else { 0.0 };
                let r = 1.0
                    + amp * (a1 * (2.0 * th).cos() + b1 * (2.0 * th).sin())
                    + 0.5 * amp * a2 * (4.0 * th).cos();
                Vec2::new(real(r * th.cos()), real(r * th.sin()))
            })
            .collect();
        if let Ok(body) = ConvexBody::from_polygon_with_grid(&vertices, 1024) {
            return body;
        }
        amp *= 0.6;
    }
    // regular polygon fallback
    let vertices: Vec<Vec2<T>> = (0..2 * m)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / m as f64;
            Vec2::new(real(th.cos()), real(th.sin()))
        })
        .collect();
    ConvexBody::from_polygon_with_grid(&vertices, 1024).expect("regular polygon is valid")
}

/// Random unimodular matrix within `magnitude` of the identity.
pub fn random_unimodular<T: Real>(seed: u64, magnitude: f64) -> Mat2<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(-1.0..1.0);
    let b = rng.gen_range(-1.0..1.0);
    let c = rng.gen_range(-1.0..1.0);
    Mat2::new(
        real(a * magnitude),
        real(b * magnitude),
        real(c * magnitude),
        real(-a * magnitude),
    )
    .exp_traceless()
}

/// Rescale a body so that `pi` lies strictly between its John and Loewner
/// areas: multiplying lengths by `s` scales both extremal areas by `s^2`,
/// and `s^2 = pi / sqrt(area_J * area_L)` centers the sandwich at `pi`
/// geometrically.
pub fn scale_into_pi_sandwich<T: Real>(
    body: &ConvexBody<T>,
    john_area: T,
    loewner_area: T,
) -> ConvexBody<T> {
    let s2 = T::PI() / (john_area * loewner_area).sqrt();
    let s = s2.sqrt();
    // uniform scaling is not unimodular; compose two maps that are, then
    // fix the determinant through the radial-sample constructor
    let scaled: Vec<T> = (0..512)
        .map(|k| {
            let th = T::PI() * real::<T>(k as f64) / real::<T>(512.0);
            body.radial(th) * s * s
        })
        .collect();
    ConvexBody::from_radial_samples(&scaled).expect("scaled body stays convex")
}
