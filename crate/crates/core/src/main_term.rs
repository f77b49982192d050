//! Main terms for long divisor sums and shifted correlations.
//!
//! * [`residue_polynomial`]: the polynomial P_{k-1} with
//!   x·P_{k-1}(log x) = Res_{s=1} ζ(s)^k x^s / s, so Σ_{n≤x} d_k(n) ≈
//!   x·P_{k-1}(log x).
//! * [`expected_short_sum`]: the expected value of a short window sum
//!   Σ_{t<n≤t+h} d_k(n), taken as the difference of long-sum main terms —
//!   exact telescoping over adjacent windows by construction.
//! * [`RkProvider`] implementations supplying the coefficients C_j(q) of the
//!   correlation density polynomial R_k(q, log t) = Σ_j C_j(q) ·
//!   log^{ -1-j }(t)/(-1-j)! for j = -k..-1 (they depend on q but not on the
//!   shift a).
//! * [`p2k2_main`]: the resulting main term of Σ_{n≤x} d_k(n) d_k(n+a),
//!   ∫_0^x Σ_{q≤Q} c_q(a)/q² R_k²(q, log t) dt, with the q-sum truncated at
//!   a cutoff and the t-integral done by adaptive quadrature after the
//!   substitution t = e^v (the integrand is smooth in log t).

use crate::error::{Error, Result};
use crate::laurent::{zeta_laurent, LaurentSeries, EULER_GAMMA};
use crate::quad::adaptive_simpson;
use crate::ramanujan::ramanujan_mobius;
use std::collections::BTreeMap;
use std::path::Path;

/// Largest k for which the Laurent data of ζ^k is wired up.
pub const MAX_K: u32 = 6;

/// Polynomial P(L) = Σ p_i L^i attached to a long-sum main term x·P(log x).
#[derive(Debug, Clone, PartialEq)]
pub struct MainTermPolynomial {
    k: u32,
    /// Ascending coefficients p_0 .. p_{k-1}.
    coeffs: Vec<f64>,
}

impl MainTermPolynomial {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Ascending coefficients (constant term first).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate P(l) by Horner's rule.
    pub fn eval(&self, l: f64) -> f64 {
        horner(&self.coeffs, l)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// The polynomial P_{k-1} with x·P_{k-1}(log x) = Res_{s=1} ζ(s)^k x^s / s.
///
/// Writing ζ(s)^k = Σ_j c_j (s−1)^j, x^s = x Σ_i log^i x (s−1)^i / i! and
/// 1/s = Σ_m (−1)^m (s−1)^m, the residue collects
/// P(L) = Σ_{j=1..k} c_{−j} Σ_{i=0}^{j−1} (−1)^{j−1−i} L^i / i!.
/// The leading coefficient is 1/(k−1)!.
pub fn residue_polynomial(k: u32) -> Result<MainTermPolynomial> {
    let series = checked_zeta_laurent(k)?;
    let mut coeffs = vec![0.0; k as usize];
    for j in 1..=k as i32 {
        let c = series.coeff(-j);
        let mut inv_fact = 1.0;
        for i in 0..j {
            if i > 0 {
                inv_fact /= i as f64;
            }
            let sign = if (j - 1 - i) % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[i as usize] += c * sign * inv_fact;
        }
    }
    Ok(MainTermPolynomial { k, coeffs })
}

/// The density polynomial R(L) = d/dx [x P(log x)] = Σ_{j=1..k} c_{−j}
/// L^{j−1}/(j−1)!, i.e. the q = 1 correlation density. Returned as an
/// [`RkPolynomial`] with q = 1.
pub fn density_polynomial(k: u32) -> Result<RkPolynomial> {
    let series = checked_zeta_laurent(k)?;
    let mut coeffs = vec![0.0; k as usize];
    let mut inv_fact = 1.0;
    for m in 0..k as usize {
        if m > 0 {
            inv_fact /= m as f64;
        }
        coeffs[m] = series.coeff(-(m as i32) - 1) * inv_fact;
    }
    Ok(RkPolynomial { k, q: 1, coeffs })
}

fn checked_zeta_laurent(k: u32) -> Result<LaurentSeries> {
    if k == 0 || k > MAX_K {
        return Err(Error::Domain(format!(
            "residue data available for 1 <= k <= {MAX_K}, got {k}"
        )));
    }
    zeta_laurent(k, 12)
}

/// Expected value of the short window sum Σ_{t<n≤t+h} d_k(n), defined as the
/// difference of long-sum main terms (t+h)P(log(t+h)) − tP(log t).
pub fn expected_short_sum(k: u32, t: f64, h: f64) -> Result<f64> {
    if !(t > 0.0) || !(h >= 0.0) {
        return Err(Error::Domain(format!(
            "expected_short_sum requires t > 0 and h >= 0, got t={t}, h={h}"
        )));
    }
    let poly = residue_polynomial(k)?;
    Ok(expected_short_sum_with(&poly, t, h))
}

/// Hot-path variant of [`expected_short_sum`] with a prebuilt polynomial.
#[inline]
pub fn expected_short_sum_with(poly: &MainTermPolynomial, t: f64, h: f64) -> f64 {
    let upper = t + h;
    upper * poly.eval(upper.ln()) - t * poly.eval(t.ln())
}

/// Correlation density polynomial R_k(q, L) of degree k−1 in L = log t.
#[derive(Debug, Clone, PartialEq)]
pub struct RkPolynomial {
    k: u32,
    q: u64,
    /// Ascending coefficients; coeffs[m] = C_{−(m+1)}(q) / m!.
    coeffs: Vec<f64>,
}

impl RkPolynomial {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, l: f64) -> f64 {
        horner(&self.coeffs, l)
    }

    /// Coefficients of R², ascending, degree 2(k−1).
    pub fn square_coefficients(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in self.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    }
}

/// Source of the q-dependent coefficients C_j(q), j = −k..−1, of R_k(q, L).
///
/// These coefficients are only unconditionally pinned down at q = 1 (from
/// the Laurent data of ζ^k); beyond that they are supplied either by the
/// classical k = 2 formula or by a user table, and results that depend on
/// them should be labelled accordingly (see [`RkProvider::conjectural`]).
pub trait RkProvider: Sync {
    /// Short stable identifier echoed into reports.
    fn id(&self) -> &str;

    /// C_j(q) for j ∈ −k..=−1.
    fn coefficient(&self, k: u32, q: u64, j: i32) -> Result<f64>;

    /// Whether (k, q) is inside this provider's domain.
    fn supports(&self, k: u32, q: u64) -> bool;

    /// Largest q supported for this k, if bounded.
    fn max_q(&self, k: u32) -> Option<u64>;

    /// True when the supplied coefficients go beyond what the q = 1 Laurent
    /// data pins down, i.e. the main term is conjectural.
    fn conjectural(&self, k: u32) -> bool {
        k >= 3
    }
}

/// Provider valid only at q = 1: C_j(1) is the Laurent coefficient of ζ^k.
#[derive(Debug, Clone, Copy, Default)]
pub struct Q1ZetaProvider;

impl RkProvider for Q1ZetaProvider {
    fn id(&self) -> &str {
        "q1-zeta"
    }

    fn coefficient(&self, k: u32, q: u64, j: i32) -> Result<f64> {
        if q != 1 {
            return Err(Error::Provider {
                provider: self.id().into(),
                k,
                q,
            });
        }
        if j < -(k as i32) || j > -1 {
            return Err(Error::Domain(format!("coefficient index j={j} outside -k..-1")));
        }
        Ok(checked_zeta_laurent(k)?.coeff(j))
    }

    fn supports(&self, k: u32, q: u64) -> bool {
        q == 1 && k >= 1 && k <= MAX_K
    }

    fn max_q(&self, _k: u32) -> Option<u64> {
        Some(1)
    }
}

/// Classical binary (k = 2) provider: R_2(q, L) = L + 2γ − 2 log q,
/// so C_{−2}(q) = 1 and C_{−1}(q) = 2γ − 2 log q for every q ≥ 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryClassicalProvider;

impl RkProvider for BinaryClassicalProvider {
    fn id(&self) -> &str {
        "binary-classical"
    }

    fn coefficient(&self, k: u32, q: u64, j: i32) -> Result<f64> {
        if k != 2 || q == 0 {
            return Err(Error::Provider {
                provider: self.id().into(),
                k,
                q,
            });
        }
        match j {
            -2 => Ok(1.0),
            -1 => Ok(2.0 * EULER_GAMMA - 2.0 * (q as f64).ln()),
            _ => Err(Error::Domain(format!("coefficient index j={j} outside -2..-1"))),
        }
    }

    fn supports(&self, k: u32, q: u64) -> bool {
        k == 2 && q >= 1
    }

    fn max_q(&self, _k: u32) -> Option<u64> {
        None
    }

    fn conjectural(&self, _k: u32) -> bool {
        false
    }
}

/// Provider backed by a user-supplied coefficient table keyed by (k, q, j).
#[derive(Debug, Clone, Default)]
pub struct TableProvider {
    entries: BTreeMap<(u32, u64, i32), f64>,
}

impl TableProvider {
    pub fn from_records(records: impl IntoIterator<Item = (u32, u64, i32, f64)>) -> TableProvider {
        let mut entries = BTreeMap::new();
        for (k, q, j, c) in records {
            entries.insert((k, q, j), c);
        }
        TableProvider { entries }
    }

    /// Load a CSV table with columns `k,q,j,C` (a leading header row is
    /// allowed and skipped).
    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<TableProvider> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Format(format!(
                    "coefficient table line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            if lineno == 0 && fields[0].parse::<u32>().is_err() {
                continue; // header row
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::Format(format!(
                        "coefficient table line {}: bad {what} value '{s}'",
                        lineno + 1
                    ))
                })
            };
            let k = parse(fields[0], "k")? as u32;
            let q = parse(fields[1], "q")? as u64;
            let j = fields[2].parse::<i32>().map_err(|_| {
                Error::Format(format!(
                    "coefficient table line {}: bad j value '{}'",
                    lineno + 1,
                    fields[2]
                ))
            })?;
            let c = parse(fields[3], "C")?;
            entries.insert((k, q, j), c);
        }
        if entries.is_empty() {
            return Err(Error::Format("coefficient table has no data rows".into()));
        }
        Ok(TableProvider { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl RkProvider for TableProvider {
    fn id(&self) -> &str {
        "user-table"
    }

    fn coefficient(&self, k: u32, q: u64, j: i32) -> Result<f64> {
        self.entries
            .get(&(k, q, j))
            .copied()
            .ok_or_else(|| Error::Provider {
                provider: self.id().into(),
                k,
                q,
            })
    }

    fn supports(&self, k: u32, q: u64) -> bool {
        (1..=k as i32).all(|j| self.entries.contains_key(&(k, q, -j)))
    }

    fn max_q(&self, k: u32) -> Option<u64> {
        self.entries
            .keys()
            .filter(|(kk, _, _)| *kk == k)
            .map(|(_, q, _)| *q)
            .max()
    }

    fn conjectural(&self, _k: u32) -> bool {
        true
    }
}

/// Assemble R_k(q, ·) from a provider: coeffs[m] = C_{−(m+1)}(q)/m!.
pub fn rk_polynomial(k: u32, q: u64, provider: &dyn RkProvider) -> Result<RkPolynomial> {
    if k == 0 || k > MAX_K {
        return Err(Error::Domain(format!(
            "rk_polynomial supports 1 <= k <= {MAX_K}, got {k}"
        )));
    }
    if q == 0 {
        return Err(Error::Domain("rk_polynomial requires q >= 1".into()));
    }
    let mut coeffs = vec![0.0; k as usize];
    let mut inv_fact = 1.0;
    for m in 0..k as usize {
        if m > 0 {
            inv_fact /= m as f64;
        }
        coeffs[m] = provider.coefficient(k, q, -(m as i32) - 1)? * inv_fact;
    }
    Ok(RkPolynomial { k, q, coeffs })
}

/// Exact ∫_0^x log^m t dt = x Σ_{i=0}^m (−1)^{m−i} (m!/i!) log^i x.
///
/// Closed form used both as the quadrature oracle in tests and by the
/// dispersion fast paths.
pub fn log_power_integral(x: f64, m: u32) -> f64 {
    assert!(x >= 0.0, "log_power_integral requires x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    let l = x.ln();
    let mut term = 1.0; // m!/i! for i = m
    let mut acc = l.powi(m as i32);
    let mut sign = -1.0;
    for i in (0..m).rev() {
        term *= (i + 1) as f64;
        acc += sign * term * l.powi(i as i32);
        sign = -sign;
    }
    x * acc
}

/// Exact ∫_{lo}^{hi} R²(log t) dt via [`log_power_integral`].
pub fn density_square_integral(poly: &RkPolynomial, lo: f64, hi: f64) -> f64 {
    let sq = poly.square_coefficients();
    let mut acc = 0.0;
    for (m, c) in sq.iter().enumerate() {
        acc += c * (log_power_integral(hi, m as u32) - log_power_integral(lo, m as u32));
    }
    acc
}

/// Breakdown of a [`p2k2_main`] evaluation.
#[derive(Debug, Clone)]
pub struct P2k2Breakdown {
    pub value: f64,
    pub q_cutoff: u64,
    /// Diagnostic envelope for the dropped q > q_cutoff tail:
    /// max R_k² · Σ_{q>Q} d(q)/q², using |c_q(a)| ≤ σ_1((a, q)) ≤ q d(q)
    /// only through the crude divisor bound. Not a certified error bound.
    pub tail_bound: f64,
}

/// Main term of the shifted correlation Σ_{n≤x} d_k(n) d_k(n+a):
/// ∫_0^x Σ_{q≤q_cutoff} c_q(a)/q² · R_k²(q, log t) dt.
///
/// The t-integral runs through the substitution t = e^v (smooth in
/// log t) with adaptive Simpson to absolute tolerance 1e-11 · x per q.
/// Provider-domain errors propagate: the q = 1 provider rejects any
/// q_cutoff ≥ 2, which is how (k ≥ 3, q ≥ 2) requests without a user table
/// are refused.
pub fn p2k2_main(
    k: u32,
    a: i64,
    x: f64,
    q_cutoff: u64,
    provider: &dyn RkProvider,
) -> Result<f64> {
    Ok(p2k2_main_detailed(k, a, x, q_cutoff, provider)?.value)
}

/// As [`p2k2_main`], returning the truncation diagnostics too.
pub fn p2k2_main_detailed(
    k: u32,
    a: i64,
    x: f64,
    q_cutoff: u64,
    provider: &dyn RkProvider,
) -> Result<P2k2Breakdown> {
    if a == 0 {
        return Err(Error::Domain(
            "p2k2_main requires a != 0 (no singular series at a = 0)".into(),
        ));
    }
    if !(x >= 2.0) {
        return Err(Error::Domain(format!("p2k2_main requires x >= 2, got {x}")));
    }
    if q_cutoff == 0 {
        return Err(Error::Domain("p2k2_main requires q_cutoff >= 1".into()));
    }
    let mut value = 0.0;
    let mut max_rk_sq = 0.0f64;
    for q in 1..=q_cutoff {
        let c_q = ramanujan_mobius(q, a)? as f64;
        let poly = rk_polynomial(k, q, provider)?;
        max_rk_sq = max_rk_sq.max(polynomial_sup_square(&poly, x));
        if c_q == 0.0 {
            continue;
        }
        let integral = density_integral_quadrature(&poly, x)?;
        value += c_q / (q * q) as f64 * integral;
    }
    // Envelope for the dropped tail: sum_{q>Q} d(q)/q^2 <= ~2(log Q + 2)/Q.
    let q = q_cutoff as f64;
    let tail_bound = max_rk_sq * x * 2.0 * (q.ln() + 2.0) / q;
    Ok(P2k2Breakdown {
        value,
        q_cutoff,
        tail_bound,
    })
}

/// ∫_0^x R²(log t) dt = ∫_{-∞}^{log x} R²(v) e^v dv by adaptive Simpson,
/// with the lower limit truncated where e^v · poly is negligible.
fn density_integral_quadrature(poly: &RkPolynomial, x: f64) -> Result<f64> {
    let upper = x.ln();
    let lower = upper.min(0.0) - 60.0;
    let f = |v: f64| {
        let r = poly.eval(v);
        r * r * v.exp()
    };
    adaptive_simpson(f, lower, upper, 1e-11 * x.max(1.0))
}

/// Loose sup of R² over t ∈ [1, x] (dense sampling; envelope only).
fn polynomial_sup_square(poly: &RkPolynomial, x: f64) -> f64 {
    let l_max = x.ln().max(0.0);
    let mut sup = 0.0f64;
    for i in 0..=64 {
        let l = l_max * i as f64 / 64.0;
        let r = poly.eval(l);
        sup = sup.max(r * r);
    }
    sup * 1.05
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::STIELTJES;
    use approx::assert_abs_diff_eq;

    #[test]
    fn residue_polynomial_k1_k2() {
        // k=1: P = 1 (main term x).
        let p1 = residue_polynomial(1).unwrap();
        assert_eq!(p1.coefficients(), &[1.0]);
        // k=2: P(L) = L + 2 gamma - 1.
        let p2 = residue_polynomial(2).unwrap();
        assert_eq!(p2.degree(), 1);
        assert_abs_diff_eq!(p2.coefficients()[0], 2.0 * EULER_GAMMA - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.coefficients()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn residue_polynomial_k3_and_leading() {
        // k=3: P(L) = L^2/2 + (3g-1)L + (1 - 3g + 3g^2 - 3g_1).
        let g = EULER_GAMMA;
        let g1 = STIELTJES[1];
        let p3 = residue_polynomial(3).unwrap();
        assert_abs_diff_eq!(p3.coefficients()[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p3.coefficients()[1], 3.0 * g - 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            p3.coefficients()[0],
            1.0 - 3.0 * g + 3.0 * g * g - 3.0 * g1,
            epsilon = 1e-14
        );
        // Leading coefficient 1/(k-1)! for all supported k.
        let mut fact = 1.0;
        for k in 1..=MAX_K {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let p = residue_polynomial(k).unwrap();
            assert_abs_diff_eq!(
                p.coefficients()[k as usize - 1],
                1.0 / fact,
                epsilon = 1e-12
            );
        }
        assert!(matches!(residue_polynomial(7), Err(Error::Domain(_))));
        assert!(matches!(residue_polynomial(0), Err(Error::Domain(_))));
    }

    #[test]
    fn short_sum_telescopes_exactly() {
        // M(t,h1) + M(t+h1,h2) = M(t,h1+h2) bit-for-bit: both sides reduce
        // to the same two long-sum evaluations.
        for k in 1..=4 {
            let poly = residue_polynomial(k).unwrap();
            for &(t, h1, h2) in &[(10.0, 5.0, 7.0), (1234.5, 0.25, 99.75), (2.0, 1.0, 1.0)] {
                let lhs = expected_short_sum_with(&poly, t, h1)
                    + expected_short_sum_with(&poly, t + h1, h2);
                let rhs = expected_short_sum_with(&poly, t, h1 + h2);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn density_is_derivative_of_main_term() {
        // R(1, log x) = d/dx [x P(log x)]: check with central differences.
        for k in 1..=4 {
            let p = residue_polynomial(k).unwrap();
            let r = density_polynomial(k).unwrap();
            for &x in &[10.0f64, 1e3, 1e6] {
                let eps = x * 1e-6;
                let g = |u: f64| u * p.eval(u.ln());
                let fd = (g(x + eps) - g(x - eps)) / (2.0 * eps);
                assert_abs_diff_eq!(r.eval(x.ln()), fd, epsilon = 1e-5 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn providers_expose_expected_polynomials() {
        // q1 provider at k=2: R = L + 2 gamma.
        let r = rk_polynomial(2, 1, &Q1ZetaProvider).unwrap();
        assert_abs_diff_eq!(r.coefficients()[0], 2.0 * EULER_GAMMA, epsilon = 1e-15);
        assert_abs_diff_eq!(r.coefficients()[1], 1.0, epsilon = 1e-15);
        // Binary-classical at q=3: R = L + 2 gamma - 2 log 3.
        let r3 = rk_polynomial(2, 3, &BinaryClassicalProvider).unwrap();
        assert_abs_diff_eq!(
            r3.coefficients()[0],
            2.0 * EULER_GAMMA - 2.0 * 3.0f64.ln(),
            epsilon = 1e-15
        );
        // They agree at q = 1.
        let rb1 = rk_polynomial(2, 1, &BinaryClassicalProvider).unwrap();
        for (a, b) in r.coefficients().iter().zip(rb1.coefficients()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        // Provider domain errors.
        assert!(matches!(
            rk_polynomial(2, 2, &Q1ZetaProvider),
            Err(Error::Provider { .. })
        ));
        assert!(matches!(
            rk_polynomial(3, 2, &BinaryClassicalProvider),
            Err(Error::Provider { .. })
        ));
        assert!(!Q1ZetaProvider.conjectural(2));
        assert!(Q1ZetaProvider.conjectural(3));
        assert!(!BinaryClassicalProvider.conjectural(2));
    }

    #[test]
    fn table_provider_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("coeffs.csv");
        std::fs::write(
            &path,
            "k,q,j,C\n3,1,-3,1.0\n3,1,-2,1.7316\n3,1,-1,1.2190\n3,2,-3,0.5\n3,2,-2,0.25\n3,2,-1,0.125\n",
        )
        .unwrap();
        let table = TableProvider::from_csv_path(&path).unwrap();
        assert_eq!(table.len(), 6);
        assert!(table.supports(3, 2));
        assert!(!table.supports(3, 3));
        assert_eq!(table.max_q(3), Some(2));
        let r = rk_polynomial(3, 2, &table).unwrap();
        // coeffs[2] = C_{-3}/2! = 0.25, coeffs[1] = C_{-2}/1! = 0.25, coeffs[0] = C_{-1}.
        assert_abs_diff_eq!(r.coefficients()[2], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.coefficients()[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.coefficients()[0], 0.125, epsilon = 1e-15);
        // Malformed rows are rejected.
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "3,1,-3\n").unwrap();
        assert!(matches!(
            TableProvider::from_csv_path(&bad),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn log_power_integral_closed_form() {
        // m=0: x; m=1: x log x - x; m=2: x(log^2 x - 2 log x + 2).
        for &x in &[0.5f64, 2.0, 10.0, 1e5] {
            let l = x.ln();
            assert_abs_diff_eq!(log_power_integral(x, 0), x, epsilon = 1e-12 * x);
            assert_abs_diff_eq!(log_power_integral(x, 1), x * l - x, epsilon = 1e-12 * x.max(1.0));
            assert_abs_diff_eq!(
                log_power_integral(x, 2),
                x * (l * l - 2.0 * l + 2.0),
                epsilon = 1e-11 * x.max(1.0)
            );
        }
    }

    #[test]
    fn p2k2_k1_is_x() {
        // k=1, q_cutoff=1: the main term of sum_{n<=x} 1·1 = x.
        for &x in &[100.0f64, 1e4, 1e6] {
            let v = p2k2_main(1, 1, x, 1, &Q1ZetaProvider).unwrap();
            assert_abs_diff_eq!(v, x, epsilon = 1e-9 * x);
        }
    }

    #[test]
    fn p2k2_quadrature_matches_closed_form() {
        // The adaptive quadrature route must agree with the exact
        // log-power closed form of the same integrand.
        let x = 5.0e4;
        for a in [1i64, 2, 6] {
            let quad = p2k2_main(2, a, x, 40, &BinaryClassicalProvider).unwrap();
            let mut closed = 0.0;
            for q in 1..=40u64 {
                let c = ramanujan_mobius(q, a).unwrap() as f64;
                if c == 0.0 {
                    continue;
                }
                let poly = rk_polynomial(2, q, &BinaryClassicalProvider).unwrap();
                closed += c / (q * q) as f64 * density_square_integral(&poly, 0.0, x);
            }
            assert_abs_diff_eq!(quad, closed, epsilon = 1e-7 * closed.abs());
        }
    }

    #[test]
    fn p2k2_domain_and_provider_errors() {
        assert!(matches!(
            p2k2_main(2, 0, 100.0, 10, &BinaryClassicalProvider),
            Err(Error::Domain(_))
        ));
        // q=1 provider refuses any q_cutoff >= 2 (k >= 3 without a table).
        assert!(matches!(
            p2k2_main(3, 1, 100.0, 2, &Q1ZetaProvider),
            Err(Error::Provider { .. })
        ));
        // ... but the q-truncated variant works.
        assert!(p2k2_main(3, 1, 100.0, 1, &Q1ZetaProvider).is_ok());
    }

    #[test]
    fn long_sum_fit_small_scale() {
        // |sum_{n<=x} d_k(n) - x P(log x)| within the loose envelopes at
        // x = 1e4 (the larger x values run in the acceptance suite).
        let x: f64 = 1e4;
        let table2 = crate::sieve::sieve_dk(2, 10_000).unwrap();
        let sum2: u64 = (1..=10_000).map(|n| table2.value(n)).sum();
        let p2 = residue_polynomial(2).unwrap();
        let err2 = (sum2 as f64 - x * p2.eval(x.ln())).abs();
        assert!(err2 <= 10.0 * x.powf(1.0 / 3.0) * x.ln(), "err2 = {err2}");

        let table3 = crate::sieve::sieve_dk(3, 10_000).unwrap();
        let sum3: u64 = (1..=10_000).map(|n| table3.value(n)).sum();
        let p3 = residue_polynomial(3).unwrap();
        let err3 = (sum3 as f64 - x * p3.eval(x.ln())).abs();
        assert!(err3 <= 10.0 * x.powf(2.0 / 3.0) * x.ln().powi(2), "err3 = {err3}");
    }
}
