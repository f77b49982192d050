//! Shared quadrature kernels: composite Simpson, adaptive Simpson, and a
//! fixed 4-point Gauss–Legendre rule for short smooth segments.

use crate::error::{Error, Result};

/// 4-point Gauss–Legendre nodes on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];

/// Weights paired with [`GL4_NODES`].
pub const GL4_WEIGHTS: [f64; 4] = [
    0.34785484513745385,
    0.6521451548625461,
    0.6521451548625461,
    0.34785484513745385,
];

/// Integrate `f` over `[a, b]` with the 4-point Gauss–Legendre rule
/// (exact for polynomials of degree ≤ 7).
pub fn gauss_legendre_4<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Simpson rule with `n` subintervals (`n` is rounded up to even).
pub fn composite_simpson<F: Fn(f64) -> f64 + Sync>(f: F, a: f64, b: f64, n: usize) -> f64 {
    use rayon::prelude::*;

    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    // Chunked fixed-order reduction: deterministic regardless of thread count.
    const CHUNK: usize = 4096;
    let chunks: Vec<f64> = (0..n + 1)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|idx| {
            let mut s = 0.0;
            for &i in idx {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * f(a + i as f64 * h);
            }
            s
        })
        .collect();
    chunks.iter().sum::<f64>() * h / 3.0
}

fn simpson_slice(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_slice(a, fa, m, fm, flm);
    let right = simpson_slice(m, fm, b, fb, frm);
    let delta = left + right - whole;
    // Standard Richardson acceptance test for Simpson halving. The width
    // floor (a few hundred ulps) also accepts: below it the halving
    // difference is pure roundoff and can sit above a tolerance that was
    // cut in half at every level, so the test would never pass.
    if delta.abs() <= 15.0 * tol || (b - a).abs() <= 1e-13 * (a.abs() + b.abs() + 1.0) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "adaptive simpson depth exhausted on [{a}, {b}], residual {:.3e}",
            delta.abs()
        )));
    }
    let l = adaptive_rec(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)?;
    let r = adaptive_rec(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Fails with [`Error::Quadrature`] if the recursion depth is
/// exhausted before the local error test passes.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature("non-finite integration bounds".into()));
    }
    // Pre-split into a prime number of panels so periodic integrands cannot
    // alias against the dyadic probe points of the recursion (a single-panel
    // start accepts cos(40x) on [0, 2pi] as a constant).
    const PANELS: u32 = 13;
    let tol = tol.max(f64::MIN_POSITIVE) / f64::from(PANELS);
    let mut total = 0.0;
    for j in 0..PANELS {
        let lo = a + (b - a) * f64::from(j) / f64::from(PANELS);
        let hi = if j + 1 == PANELS {
            b
        } else {
            a + (b - a) * f64::from(j + 1) / f64::from(PANELS)
        };
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = simpson_slice(lo, fa, hi, fb, fm);
        total += adaptive_rec(&f, lo, fa, hi, fb, fm, whole, tol, 48)?;
    }
    Ok(total)
}
