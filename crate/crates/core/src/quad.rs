//! Adaptive Simpson quadrature used by the analytic paths.
//!
//! The brute-force reference paths in [`crate::oracle`] deliberately use
//! different integration code (uniform composite rules), so agreement
//! between the two is meaningful evidence.

use crate::scalar::{real, Real};

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let half = real::<T>(0.5);
    let m = (a + b) * half;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Adaptive Simpson with forced subdivision at the given sorted interior
/// breakpoints. `tol` is split across segments proportionally to length.
pub fn adaptive_simpson_with_breakpoints<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: T,
) -> T {
    let mut nodes = Vec::with_capacity(breakpoints.len() + 2);
    nodes.push(a);
    for &x in breakpoints {
        if x > a && x < b {
            nodes.push(x);
        }
    }
    nodes.push(b);
    nodes.sort_by(|p, q| p.partial_cmp(q).unwrap());
    nodes.dedup_by(|p, q| (*p - *q).abs() <= T::epsilon() * real::<T>(4.0));

    let span = b - a;
    let mut total = T::zero();
    for w in nodes.windows(2) {
        let seg_tol = tol * (w[1] - w[0]).abs() / span;
        total += adaptive_simpson(f, w[0], w[1], seg_tol.max(T::epsilon()));
    }
    total
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / real::<T>(6.0) * (fa + real::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
) -> T {
    let half = real::<T>(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= real::<T>(15.0) * tol {
        return left + right + err / real::<T>(15.0);
    }
    let ht = tol * half;
    recurse(f, a, m, fa, flm, fm, left, ht, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, ht, depth - 1)
}
