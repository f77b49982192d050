//! Ramanujan sums c_q(a), the triangular Fejér weight S(a) = max(0, h − |a|),
//! and the exact identities connecting them.
//!
//! Every quantity here has two independent evaluation routes:
//!
//! * c_q(a) via the Möbius divisor form Σ_{d | (q, a)} d μ(q/d) and via the
//!   defining exponential sum over residues coprime to q;
//! * Σ_{a ≡ 0 (d)} S(a) in closed form h²/d + d {h/d}(1 − {h/d}) and by
//!   direct summation (also in exact rational arithmetic);
//! * Σ_a S(a) c_q(a) in closed form 1_{q=1} h² + Σ_{d|q} d² μ(q/d) {h/d}(1 − {h/d})
//!   and by direct summation;
//! * the Fejér transform Σ_{|a|<h} (h − |a|) e(ja/q), which for integer h
//!   equals the manifestly nonnegative square |Σ_{0≤m<h} e(jm/q)|².
//!
//! The q-sum Σ_q c_q(a)/q² is the singular series of the binary correlation
//! problem; it converges to σ_{-1}(a)·6/π².

use crate::error::{Error, Result};
use num_rational::Ratio;

/// Exact rational scalar used by the exact-mode Fejér identities.
pub type Rational = Ratio<i64>;

/// Möbius function μ(n) by trial division.
pub fn mobius(n: u64) -> i64 {
    assert!(n >= 1, "mobius requires n >= 1");
    let mut n = n;
    let mut mu = 1i64;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0; // squarefull
            }
            mu = -mu;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Euler totient φ(n) by trial division.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi requires n >= 1");
    let mut n = n;
    let mut phi = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Ramanujan sum c_q(a) via the Möbius divisor form
/// Σ_{d | q, d | a} d μ(q/d). Exact integer arithmetic; c_q(0) = φ(q),
/// and c_q is even in a.
pub fn ramanujan_mobius(q: u64, a: i64) -> Result<i64> {
    if q == 0 {
        return Err(Error::Domain("ramanujan_mobius requires q >= 1".into()));
    }
    let a_abs = a.unsigned_abs();
    // d must divide q, and divide a (every d divides 0).
    let bound = if a_abs == 0 { q } else { gcd(q, a_abs) };
    let mut sum = 0i64;
    let mut d = 1u64;
    while d * d <= bound {
        if bound % d == 0 {
            sum += d as i64 * mobius(q / d);
            let e = bound / d;
            if e != d {
                sum += e as i64 * mobius(q / e);
            }
        }
        d += 1;
    }
    Ok(sum)
}

/// Ramanujan sum c_q(a) via the defining exponential sum
/// Σ_{1≤j≤q, (j,q)=1} e^{2πi j a / q}.
///
/// The imaginary part must vanish (within 1e-9 · q) and the real part must
/// be within 1e-6 of an integer; otherwise an internal consistency error is
/// returned. The rounded integer is the result.
pub fn ramanujan_expsum(q: u64, a: i64) -> Result<i64> {
    if q == 0 {
        return Err(Error::Domain("ramanujan_expsum requires q >= 1".into()));
    }
    let mut re = 0.0f64;
    let mut im = 0.0f64;
    let tau = 2.0 * std::f64::consts::PI;
    for j in 1..=q {
        if gcd(j, q) == 1 {
            // Reduce j*a mod q in integers first: keeps the phase argument small.
            let r = (j as i128 * a as i128).rem_euclid(q as i128) as f64;
            let (s, c) = (tau * r / q as f64).sin_cos();
            re += c;
            im += s;
        }
    }
    if im.abs() > 1e-9 * q as f64 {
        return Err(Error::Consistency(format!(
            "c_{q}({a}) exponential sum has imaginary part {im:.3e}"
        )));
    }
    let rounded = re.round();
    if (re - rounded).abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "c_{q}({a}) exponential sum {re} is not near an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Fejér weight S(a) = max(0, h − |a|).
#[inline]
pub fn fejer_weight(h: f64, a: i64) -> f64 {
    (h - a.unsigned_abs() as f64).max(0.0)
}

/// Closed form for Σ_{a ≡ 0 (mod d)} S(a) = h²/d + d {h/d}(1 − {h/d}).
pub fn fejer_sum_multiples(h: f64, d: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("fejer_sum_multiples requires d >= 1".into()));
    }
    if h <= 0.0 {
        return Err(Error::Domain("fejer_sum_multiples requires h > 0".into()));
    }
    let df = d as f64;
    let frac = (h / df).fract();
    Ok(h * h / df + df * frac * (1.0 - frac))
}

/// Direct summation companion of [`fejer_sum_multiples`]:
/// S(0) + 2 Σ_{b≥1, bd<h} (h − bd).
pub fn fejer_sum_multiples_direct(h: f64, d: u64) -> Result<f64> {
    if d == 0 || h <= 0.0 {
        return Err(Error::Domain("fejer_sum_multiples_direct domain".into()));
    }
    let mut sum = h;
    let mut b = 1u64;
    loop {
        let m = (b * d) as f64;
        if m >= h {
            break;
        }
        sum += 2.0 * (h - m);
        b += 1;
    }
    Ok(sum)
}

/// Exact-rational closed form of Σ_{a ≡ 0 (d)} S(a) for rational h.
pub fn fejer_sum_multiples_exact(h: Rational, d: u64) -> Result<Rational> {
    if d == 0 || h <= Ratio::from_integer(0) {
        return Err(Error::Domain("fejer_sum_multiples_exact domain".into()));
    }
    let d_rat = Rational::from_integer(d as i64);
    let r = h / d_rat;
    let frac = r - r.floor();
    Ok(h * h / d_rat + d_rat * frac * (Rational::from_integer(1) - frac))
}

/// Exact-rational direct summation of Σ_{a ≡ 0 (d)} S(a).
pub fn fejer_sum_multiples_direct_exact(h: Rational, d: u64) -> Result<Rational> {
    if d == 0 || h <= Ratio::from_integer(0) {
        return Err(Error::Domain("fejer_sum_multiples_direct_exact domain".into()));
    }
    let mut sum = h;
    let mut b = 1i64;
    loop {
        let m = Rational::from_integer(b * d as i64);
        if m >= h {
            break;
        }
        sum += (h - m) * Ratio::from_integer(2);
        b += 1;
    }
    Ok(sum)
}

/// Closed form for Σ_a S(a) c_q(a)
/// = 1_{q=1} h² + Σ_{d | q} d² μ(q/d) {h/d}(1 − {h/d}).
pub fn fejer_ramanujan_sum(h: f64, q: u64) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("fejer_ramanujan_sum requires q >= 1".into()));
    }
    if h <= 0.0 {
        return Err(Error::Domain("fejer_ramanujan_sum requires h > 0".into()));
    }
    let mut sum = if q == 1 { h * h } else { 0.0 };
    for d in 1..=q {
        if q % d == 0 {
            let frac = (h / d as f64).fract();
            sum += (d * d) as f64 * mobius(q / d) as f64 * frac * (1.0 - frac);
        }
    }
    Ok(sum)
}

/// Direct summation companion of [`fejer_ramanujan_sum`]:
/// Σ_{|a| < h} S(a) c_q(a), using the Möbius form of c_q.
pub fn fejer_ramanujan_sum_direct(h: f64, q: u64) -> Result<f64> {
    if q == 0 || h <= 0.0 {
        return Err(Error::Domain("fejer_ramanujan_sum_direct domain".into()));
    }
    let phi = euler_phi(q) as f64;
    let mut sum = h * phi; // a = 0 term: S(0) c_q(0) = h φ(q)
    let mut a = 1i64;
    while (a as f64) < h {
        let c = ramanujan_mobius(q, a)? as f64;
        sum += 2.0 * (h - a as f64) * c;
        a += 1;
    }
    Ok(sum)
}

/// Fejér transform Σ_{|a| < h} (h − |a|) e^{2πi j a / q} for integer h.
///
/// Evaluates both the direct weighted sum and the square
/// |Σ_{0≤m<h} e^{2πi j m / q}|²; they must agree within 1e-9 (relative to
/// the magnitude), and the returned squared form is nonnegative by
/// construction.
pub fn fejer_transform(h: u64, q: u64, j: i64) -> Result<f64> {
    if q == 0 {
        return Err(Error::Domain("fejer_transform requires q >= 1".into()));
    }
    if h == 0 {
        return Err(Error::Domain("fejer_transform requires h >= 1".into()));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let phase = |num: i128| -> (f64, f64) {
        let r = num.rem_euclid(q as i128) as f64;
        (tau * r / q as f64).sin_cos()
    };

    // Direct triangular-weight sum; the imaginary part cancels by a ↔ -a.
    let mut direct = h as f64;
    for a in 1..h {
        let (_, c) = phase(j as i128 * a as i128);
        direct += 2.0 * (h - a) as f64 * c;
    }

    // Exponential-sum square.
    let mut re = 0.0;
    let mut im = 0.0;
    for m in 0..h {
        let (s, c) = phase(j as i128 * m as i128);
        re += c;
        im += s;
    }
    let square = re * re + im * im;

    let tol = 1e-9 * (1.0 + square.abs().max(direct.abs()));
    if (direct - square).abs() > tol {
        return Err(Error::Consistency(format!(
            "fejer transform mismatch at h={h}, q={q}, j={j}: direct {direct}, square {square}"
        )));
    }
    Ok(square)
}

/// Truncated singular series Σ_{q ≤ q_cutoff} c_q(a) / q².
pub fn singular_series(a: i64, q_cutoff: u64) -> Result<f64> {
    if a == 0 {
        return Err(Error::Domain(
            "singular_series requires a != 0 (the q-sum diverges at a = 0)".into(),
        ));
    }
    if q_cutoff == 0 {
        return Err(Error::Domain("singular_series requires q_cutoff >= 1".into()));
    }
    let mut sum = 0.0;
    for q in 1..=q_cutoff {
        sum += ramanujan_mobius(q, a)? as f64 / (q * q) as f64;
    }
    Ok(sum)
}

/// Limit of the singular series: σ_{-1}(a) / ζ(2) = (Σ_{d|a} 1/d) · 6/π².
pub fn singular_series_limit(a: i64) -> Result<f64> {
    if a == 0 {
        return Err(Error::Domain("singular_series_limit requires a != 0".into()));
    }
    let a = a.unsigned_abs();
    let mut sigma = 0.0;
    let mut d = 1u64;
    while d * d <= a {
        if a % d == 0 {
            sigma += 1.0 / d as f64;
            let e = a / d;
            if e != d {
                sigma += 1.0 / e as f64;
            }
        }
        d += 1;
    }
    Ok(sigma * 6.0 / (std::f64::consts::PI * std::f64::consts::PI))
}
