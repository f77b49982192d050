//! Shifted correlation sums C_k(x, a) = Σ_{n≤x} d_k(n) d_k(n+a).
//!
//! Two evaluation routes: exact integer accumulation per shift, and a
//! fast-convolution route that computes every lag at once from one real-input
//! FFT pair and then rounds back to integers, refusing to round when the
//! floating-point result is not clearly pinned to an integer.

use crate::error::{Error, Result};
use crate::main_term::{p2k2_main, RkProvider};
use crate::sieve::DivisorTable;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

/// How to evaluate the correlation sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMode {
    /// Exact integer accumulation, O(x) per shift.
    Direct,
    /// One FFT cross-correlation for all shifts, rounded back to integers.
    Fft,
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationMode::Direct => write!(f, "direct"),
            CorrelationMode::Fft => write!(f, "fft"),
        }
    }
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<CorrelationMode> {
        match s {
            "direct" => Ok(CorrelationMode::Direct),
            "fft" => Ok(CorrelationMode::Fft),
            other => Err(Error::Format(format!(
                "unknown correlation mode '{other}' (expected direct|fft)"
            ))),
        }
    }
}

/// Correlation values C_k(x, a) over a contiguous shift range, optionally
/// with the remainders Δ_k(x, a) = C_k(x, a) − main term attached.
#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    k: u32,
    x: u64,
    shift_lo: u64,
    shift_hi: u64,
    mode: CorrelationMode,
    values: Vec<u64>,
    deltas: Option<Vec<f64>>,
    provider_id: Option<String>,
    conjectural: bool,
}

impl CorrelationSeries {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn shifts(&self) -> RangeInclusive<u64> {
        self.shift_lo..=self.shift_hi
    }

    pub fn mode(&self) -> CorrelationMode {
        self.mode
    }

    /// C_k(x, a); panics if `a` is outside the computed shift range.
    pub fn value(&self, a: u64) -> u64 {
        assert!(
            a >= self.shift_lo && a <= self.shift_hi,
            "shift {a} outside computed range {}..={}",
            self.shift_lo,
            self.shift_hi
        );
        self.values[(a - self.shift_lo) as usize]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Δ_k(x, a), if a main-term provider has been attached.
    pub fn delta(&self, a: u64) -> Option<f64> {
        self.deltas
            .as_ref()
            .map(|d| d[(a - self.shift_lo) as usize])
    }

    pub fn deltas(&self) -> Option<&[f64]> {
        self.deltas.as_deref()
    }

    pub fn provider_id(&self) -> Option<&str> {
        self.provider_id.as_deref()
    }

    /// True when the attached main term rests on coefficients beyond the
    /// unconditional q = 1 Laurent data.
    pub fn conjectural(&self) -> bool {
        self.conjectural
    }

    /// Fill the remainders Δ_k(x, a) = C_k(x, a) − main(k, a, x, q_cutoff)
    /// from the given coefficient provider. Requires every shift ≥ 1 (there
    /// is no singular-series main term at a = 0).
    pub fn with_deltas(mut self, provider: &dyn RkProvider, q_cutoff: u64) -> Result<Self> {
        if self.shift_lo == 0 {
            return Err(Error::Domain(
                "remainders are defined for shifts a >= 1 only; drop a = 0 first".into(),
            ));
        }
        let k = self.k;
        let x = self.x as f64;
        let deltas = (self.shift_lo..=self.shift_hi)
            .into_par_iter()
            .map(|a| {
                let main = p2k2_main(k, a as i64, x, q_cutoff, provider)?;
                Ok(self.values[(a - self.shift_lo) as usize] as f64 - main)
            })
            .collect::<Result<Vec<f64>>>()?;
        self.deltas = Some(deltas);
        self.provider_id = Some(provider.id().to_string());
        self.conjectural = provider.conjectural(k);
        Ok(self)
    }
}

/// Compute C_k(x, a) = Σ_{n≤x} d_k(n) d_k(n+a) for every a in `shifts`.
///
/// Requires the table to cover n ≤ x + max(shifts).
pub fn correlate(
    table: &DivisorTable,
    x: u64,
    shifts: RangeInclusive<u64>,
    mode: CorrelationMode,
) -> Result<CorrelationSeries> {
    let (lo, hi) = (*shifts.start(), *shifts.end());
    if x == 0 || lo > hi {
        return Err(Error::Domain(format!(
            "correlate requires x >= 1 and a non-empty shift range, got x={x}, shifts={lo}..={hi}"
        )));
    }
    let needed = x + hi;
    if needed > table.n_max() {
        return Err(Error::Range {
            needed,
            have: table.n_max(),
        });
    }
    let values = match mode {
        CorrelationMode::Direct => correlate_direct(table.values(), x, lo, hi),
        CorrelationMode::Fft => correlate_fft(table.values(), x, lo, hi)?,
    };
    Ok(CorrelationSeries {
        k: table.k(),
        x,
        shift_lo: lo,
        shift_hi: hi,
        mode,
        values,
        deltas: None,
        provider_id: None,
        conjectural: false,
    })
}

/// Exact route: one pass per shift, 128-bit accumulation.
fn correlate_direct(v: &[u64], x: u64, lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi)
        .into_par_iter()
        .map(|a| {
            let a = a as usize;
            let x = x as usize;
            let mut acc: u128 = 0;
            // `v` is indexed by n directly (slot 0 is a placeholder).
            for n in 1..=x {
                acc += v[n] as u128 * v[n + a] as u128;
            }
            // Correlation sums at the supported table sizes fit u64; the
            // accumulator is u128 only to make the overflow check explicit.
            u64::try_from(acc).expect("correlation sum exceeds u64")
        })
        .collect()
}

/// FFT route: all lags 0..=hi from one complex FFT via two-for-one real
/// packing, then integer rounding with a precision guard.
fn correlate_fft(v: &[u64], x: u64, lo: u64, hi: u64) -> Result<Vec<u64>> {
    let x = x as usize;
    let n_full = x + hi as usize; // w covers n = 1..=x+hi
    let len = (n_full + 1).next_power_of_two();

    // z[n] = u[n] + i·w[n] with u the x-truncated sequence, w the full one.
    // Index n holds d_k(n); slot 0 stays empty.
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for n in 1..=n_full {
        let w = v[n] as f64; // `v` is indexed by n directly
        let u = if n <= x { w } else { 0.0 };
        buf[n] = Complex::new(u, w);
    }

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);

    // Unpack the two real spectra and form the cross spectrum conj(U)·W.
    let mut spectrum = vec![Complex::new(0.0, 0.0); len];
    for f in 0..len {
        let zf = buf[f];
        let zc = buf[(len - f) % len].conj();
        let u_f = (zf + zc) * 0.5;
        let w_f = (zf - zc) * Complex::new(0.0, -0.5); // divide by 2i
        spectrum[f] = u_f.conj() * w_f;
    }
    planner.plan_fft_inverse(len).process(&mut spectrum);

    let inv_len = 1.0 / len as f64;
    let raw: Vec<f64> = (lo..=hi)
        .map(|a| spectrum[a as usize].re * inv_len)
        .collect();
    round_counts(&raw, lo)
}

/// Round raw floating-point correlation values to exact integers.
///
/// The guard rejects anything farther than 0.25 from an integer: stricter
/// than the 0.5 rounding radius, so marginal precision surfaces as an error
/// rather than a silently wrong count.
fn round_counts(raw: &[f64], lo: u64) -> Result<Vec<u64>> {
    raw.iter()
        .enumerate()
        .map(|(i, &r)| {
            let rounded = r.round();
            let distance = (r - rounded).abs();
            if distance > 0.25 || rounded < 0.0 {
                return Err(Error::FftPrecision {
                    lag: lo + i as u64,
                    distance,
                });
            }
            Ok(rounded as u64)
        })
        .collect()
}
