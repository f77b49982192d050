//! Moments of ζ on and off the critical line, the smoothed correlation
//! moment with a C^∞ bump weight, and the exponent-bookkeeping report that
//! places the divisor-correlation statistic next to the moment it bounds.

use crate::error::{Error, Result};
use crate::main_term::RkProvider;
use crate::quad::{adaptive_simpson, composite_simpson};
use crate::selberg::{g_tilde, DoubleAverageReport, GridSpec};
use crate::sieve::DivisorTable;
use crate::zeta::{zeta_critical, zeta_line, ZETA_T_CEILING};
use rayon::prelude::*;

/// Largest k accepted by the moment quadratures (|ζ|^{2k} stays well inside
/// f64 range for desk-scale heights).
pub const MAX_MOMENT_K: u32 = 8;

/// One moment quadrature I_k(σ, T) = ∫_0^T |ζ(σ+it)|^{2k} dt.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub k: u32,
    pub sigma: f64,
    /// Upper integration limit T.
    pub t_max: f64,
    /// Simpson value at the finer (half) step — the reported estimate.
    pub value: f64,
    /// Effective quadrature step actually used (after the 1/log(2+T)
    /// oscillation scaling of the requested step).
    pub step: f64,
    /// |coarse − fine| Richardson comparison between the two runs.
    pub error_estimate: f64,
}

fn validate_moment_args(k: u32, t_max: f64, step: f64) -> Result<()> {
    if k == 0 || k > MAX_MOMENT_K {
        return Err(Error::Domain(format!(
            "moment order must be in 1..={MAX_MOMENT_K}, got {k}"
        )));
    }
    if !(t_max >= 0.0) || t_max > ZETA_T_CEILING {
        return Err(Error::Domain(format!(
            "moment height must lie in [0, {ZETA_T_CEILING:e}], got {t_max}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    Ok(())
}

/// Shared Simpson driver: integrate `f` over [0, T] at the oscillation-scaled
/// step and at half that step; report the fine value and the gap.
fn moment_quadrature<F: Fn(f64) -> f64 + Sync>(
    k: u32,
    sigma: f64,
    t_max: f64,
    step: f64,
    f: F,
) -> MomentEstimate {
    // Mean zero spacing shrinks like 1/log t, so the step does too.
    let eff = step / (2.0 + t_max).ln();
    let n = (t_max / eff).ceil() as usize;
    let coarse = composite_simpson(&f, 0.0, t_max, n.max(2));
    let fine = composite_simpson(&f, 0.0, t_max, 2 * n.max(2));
    MomentEstimate {
        k,
        sigma,
        t_max,
        value: fine,
        step: eff,
        error_estimate: (coarse - fine).abs(),
    }
}

/// Absolute ζ accuracy requested per quadrature node; always achievable for
/// heights below [`ZETA_T_CEILING`], which `validate_moment_args` enforces.
const NODE_ACCURACY: f64 = 1e-6;

/// I_k(T) = ∫_0^T |ζ(1/2+it)|^{2k} dt by composite Simpson.
pub fn moment_on_line(k: u32, t_max: f64, step: f64) -> Result<MomentEstimate> {
    validate_moment_args(k, t_max, step)?;
    let p = k as i32;
    Ok(moment_quadrature(k, 0.5, t_max, step, move |t| {
        zeta_critical(t, NODE_ACCURACY)
            .expect("critical-line evaluation within the validated height range")
            .norm_sqr()
            .powi(p)
    }))
}

/// I_k(σ, T) = ∫_0^T |ζ(σ+it)|^{2k} dt for 1/2 < σ < 1.
pub fn moment_off_line(k: u32, sigma: f64, t_max: f64, step: f64) -> Result<MomentEstimate> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::Domain(format!(
            "off-line moment requires 1/2 < sigma < 1, got {sigma}"
        )));
    }
    validate_moment_args(k, t_max, step)?;
    let p = k as i32;
    Ok(moment_quadrature(k, sigma, t_max, step, move |t| {
        zeta_line(sigma, t, NODE_ACCURACY)
            .expect("off-line evaluation within the validated height range")
            .norm_sqr()
            .powi(p)
    }))
}

/// C^∞ bump weight: 0 outside (T/2, 2T), 1 on [3T/4, 4T/3], exp-based
/// smoothstep transitions in between. All derivatives scale like T^{−R}.
#[derive(Debug, Clone, Copy)]
pub struct BumpFunction {
    t_ref: f64,
}

/// g(u) = exp(−1/u) for u > 0, else 0: the standard C^∞ ramp germ.
fn ramp_germ(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smoothstep s(u) = g(u)/(g(u) + g(1−u)): 0 at u ≤ 0, 1 at u ≥ 1, C^∞.
fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = ramp_germ(u);
    a / (a + ramp_germ(1.0 - u))
}

impl BumpFunction {
    pub fn new(t_ref: f64) -> Result<BumpFunction> {
        if !(t_ref > 0.0 && t_ref.is_finite()) {
            return Err(Error::Domain(format!(
                "bump reference height must be positive, got {t_ref}"
            )));
        }
        Ok(BumpFunction { t_ref })
    }

    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    /// Open support interval (T/2, 2T).
    pub fn support(&self) -> (f64, f64) {
        (0.5 * self.t_ref, 2.0 * self.t_ref)
    }

    /// Closed plateau interval [3T/4, 4T/3] where the bump is exactly 1.
    pub fn plateau(&self) -> (f64, f64) {
        (0.75 * self.t_ref, 4.0 * self.t_ref / 3.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo || t >= hi {
            return 0.0;
        }
        let (p_lo, p_hi) = self.plateau();
        if t >= p_lo && t <= p_hi {
            return 1.0;
        }
        if t < p_lo {
            smoothstep((t - lo) / (p_lo - lo))
        } else {
            smoothstep((hi - t) / (hi - p_hi))
        }
    }

    /// ∫ φ, strictly between the plateau length 7T/12 and the support
    /// length 3T/2.
    pub fn integral(&self) -> Result<f64> {
        let (lo, hi) = self.support();
        adaptive_simpson(|t| self.eval(t), lo, hi, 1e-12 * self.t_ref)
    }
}

/// Smoothed correlation moment
/// (1/M)·Σ_{a≤h} Σ_{M<n≤M′} d_k(n) d_k(n+a) ∫ φ(t) e^{ita/n} dt
/// with h = M^{1+ε}/T, symmetrized over e^{±ita/n}.
#[derive(Debug, Clone)]
pub struct SmoothedMoment {
    pub k: u32,
    pub m: u64,
    pub m_prime: u64,
    pub t_ref: f64,
    pub epsilon: f64,
    /// Shift cap h = M^{1+ε}/T.
    pub h: f64,
    /// Largest shift actually summed, ⌊h⌋.
    pub a_max: u64,
    /// Real part of the symmetrized double sum (the estimate itself).
    pub value: f64,
    /// |imaginary part| left over after symmetrizing — a quadrature
    /// consistency diagnostic, small relative to |value| when healthy.
    pub imag_residual: f64,
    /// ∫ φ over its support.
    pub phi_integral: f64,
    /// The a = 0 contribution (1/M)·Σ_n d_k(n)²·∫φ.
    pub zero_shift_term: f64,
}

/// Evaluate the smoothed moment. The table must cover M′ + ⌊h⌋; the
/// oscillatory weight integrals are done by adaptive quadrature with the
/// e^{+iωt} and e^{−iωt} directions integrated independently (opposite
/// interval orientations), so the reported imaginary residual is a genuine
/// cross-check rather than an algebraic zero.
pub fn smoothed_moment(
    table: &DivisorTable,
    k: u32,
    m: u64,
    m_prime: u64,
    t_ref: f64,
    epsilon: f64,
) -> Result<SmoothedMoment> {
    if k != table.k() {
        return Err(Error::Consistency(format!(
            "table was sieved for k = {}, moment requested k = {k}",
            table.k()
        )));
    }
    if m < 2 || m_prime <= m {
        return Err(Error::Domain(format!(
            "smoothed moment requires 2 <= M < M', got M={m}, M'={m_prime}"
        )));
    }
    if !(t_ref >= 1.0 && t_ref.is_finite()) {
        return Err(Error::Domain(format!(
            "smoothed moment requires T >= 1, got {t_ref}"
        )));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let h = (m as f64).powf(1.0 + epsilon) / t_ref;
    let a_max = h.floor() as u64;
    let needed = m_prime + a_max;
    if needed > table.n_max() {
        return Err(Error::Range {
            needed,
            have: table.n_max(),
        });
    }

    let bump = BumpFunction::new(t_ref)?;
    let phi_integral = bump.integral()?;
    let values = table.values();
    let m_f = m as f64;

    // a = 0: the weight integral is ∫φ for every n.
    let d_square_sum: u128 = values[(m as usize + 1)..=(m_prime as usize)]
        .iter()
        .map(|&d| d as u128 * d as u128)
        .sum();
    let zero_shift_term = d_square_sum as f64 * phi_integral / m_f;

    let (t_lo, t_hi) = bump.support();
    let tol = 1e-10 * t_ref;
    // Independent ± quadratures: forward orientation for e^{+iωt}, reversed
    // parametrization u ↦ (t_lo + t_hi) − u for e^{−iωt}.
    let span = t_lo + t_hi;
    let per_shift: Result<Vec<(f64, f64)>> = (1..=a_max)
        .into_par_iter()
        .map(|a| {
            let mut re = 0.0;
            let mut im = 0.0;
            for n in (m + 1)..=m_prime {
                let w = values[n as usize] as f64 * values[(n + a) as usize] as f64;
                if w == 0.0 {
                    continue;
                }
                let omega = a as f64 / n as f64;
                let fwd_re =
                    adaptive_simpson(|t| bump.eval(t) * (omega * t).cos(), t_lo, t_hi, tol)?;
                let fwd_im =
                    adaptive_simpson(|t| bump.eval(t) * (omega * t).sin(), t_lo, t_hi, tol)?;
                let rev_re = adaptive_simpson(
                    |u| bump.eval(span - u) * (omega * (span - u)).cos(),
                    t_lo,
                    t_hi,
                    tol,
                )?;
                let rev_im = adaptive_simpson(
                    |u| -bump.eval(span - u) * (omega * (span - u)).sin(),
                    t_lo,
                    t_hi,
                    tol,
                )?;
                re += w * 0.5 * (fwd_re + rev_re);
                im += w * 0.5 * (fwd_im + rev_im);
            }
            Ok((re, im))
        })
        .collect();
    let per_shift = per_shift?;
    let shifted_re: f64 = per_shift.iter().map(|&(re, _)| re).sum();
    let shifted_im: f64 = per_shift.iter().map(|&(_, im)| im).sum();

    Ok(SmoothedMoment {
        k,
        m,
        m_prime,
        t_ref,
        epsilon,
        h,
        a_max,
        value: zero_shift_term + shifted_re / m_f,
        imag_residual: (shifted_im / m_f).abs(),
        phi_integral,
        zero_shift_term,
    })
}

/// One Carlson abscissa entry: the largest known θ_k with
/// I_k(σ, T) ≪ T for all σ > σ_k = (1 + θ_k)/2.
#[derive(Debug, Clone, Copy)]
pub struct CarlsonEntry {
    pub k: u32,
    pub theta: f64,
    pub sigma: f64,
}

/// Tabulated θ_k values (θ_k = 2σ_k − 1).
pub const CARLSON_TABLE: [CarlsonEntry; 3] = [
    CarlsonEntry {
        k: 3,
        theta: 1.0 / 6.0,
        sigma: (1.0 + 1.0 / 6.0) / 2.0,
    },
    CarlsonEntry {
        k: 4,
        theta: 1.0 / 4.0,
        sigma: (1.0 + 1.0 / 4.0) / 2.0,
    },
    CarlsonEntry {
        k: 5,
        theta: 11.0 / 30.0,
        sigma: (1.0 + 11.0 / 30.0) / 2.0,
    },
];

/// θ_k from [`CARLSON_TABLE`], if tabulated.
pub fn carlson_theta(k: u32) -> Option<f64> {
    CARLSON_TABLE
        .iter()
        .find(|e| e.k == k)
        .map(|e| e.theta)
}

/// Scale of the inner-sum tail neglected by the moment bound: T^{k/2−1}.
/// It stays O(T) only for k ≤ 4.
pub fn tail_figure(k: u32, t_ref: f64) -> f64 {
    t_ref.powf(k as f64 / 2.0 - 1.0)
}

/// Whether the tail figure is admissible (≪ T), i.e. k/2 ≤ 2.
pub fn tail_admissible(k: u32) -> bool {
    k <= 4
}

/// One M-grid row of the comparison report.
#[derive(Debug, Clone)]
pub struct TheoremGridRow {
    pub m: f64,
    pub m_prime: f64,
    pub report: DoubleAverageReport,
    /// G̃_k(M, T)/M.
    pub ratio: f64,
}

/// Side-by-side comparison of the moment I_k(T) with the shape
/// T·(1 + sup_M G̃_k(M,T)/M) that bounds it (implied constants unknown,
/// so this is a report, not an inequality assertion).
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub k: u32,
    pub t_ref: f64,
    pub epsilon: f64,
    pub q_cutoff: u64,
    pub moment: MomentEstimate,
    pub rows: Vec<TheoremGridRow>,
    /// T·(1 + max over the grid of G̃/M).
    pub rhs_shape: f64,
    /// T^{k/2−1}, the neglected-tail scale.
    pub tail_figure: f64,
    /// tail_figure ≪ T iff k ≤ 4.
    pub tail_admissible: bool,
    pub provider_id: String,
    pub conjectural: bool,
}

/// Number of M probes between T^{1+ε} and T^{k/2}/2.
const M_GRID_POINTS: usize = 4;

/// Assemble the comparison report: lhs = I_k(T) by quadrature, rhs shape
/// from the double-average statistic on a logarithmic M-grid inside
/// [T^{1+ε}, T^{k/2}] with M′ = 2M. The table must cover 2·M_max + H.
/// k ∈ {3, 4} is the intended regime; k = 2 runs as a degenerate
/// validation case (the M-window collapses to a point).
#[allow(clippy::too_many_arguments)]
pub fn theorem_report(
    table: &DivisorTable,
    k: u32,
    t_ref: f64,
    epsilon: f64,
    provider: &dyn RkProvider,
    q_cutoff: u64,
    grid: GridSpec,
    step: f64,
) -> Result<TheoremReport> {
    if !(2..=4).contains(&k) {
        return Err(Error::Domain(format!(
            "comparison report supports k in 2..=4, got {k}"
        )));
    }
    if !(t_ref >= 2.0 && t_ref.is_finite()) {
        return Err(Error::Domain(format!(
            "comparison report requires T >= 2, got {t_ref}"
        )));
    }
    let m_lo = t_ref.powf(1.0 + epsilon);
    let m_hi = (t_ref.powf(k as f64 / 2.0) / 2.0).max(m_lo);
    let m_values: Vec<f64> = if m_hi / m_lo <= 1.0 + 1e-12 {
        vec![m_lo]
    } else {
        let ratio = (m_hi / m_lo).ln();
        (0..M_GRID_POINTS)
            .map(|i| {
                if i == 0 {
                    m_lo
                } else if i == M_GRID_POINTS - 1 {
                    m_hi
                } else {
                    m_lo * (ratio * i as f64 / (M_GRID_POINTS - 1) as f64).exp()
                }
            })
            .collect()
    };

    let mut rows = Vec::with_capacity(m_values.len());
    for m in m_values {
        let m_prime = 2.0 * m;
        let report = g_tilde(
            table, k, m, m_prime, t_ref, epsilon, provider, q_cutoff, grid,
        )?;
        let ratio = report.g_tilde / m;
        rows.push(TheoremGridRow {
            m,
            m_prime,
            report,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let moment = moment_on_line(k, t_ref, step)?;

    Ok(TheoremReport {
        k,
        t_ref,
        epsilon,
        q_cutoff,
        moment,
        rows,
        rhs_shape: t_ref * (1.0 + max_ratio),
        tail_figure: tail_figure(k, t_ref),
        tail_admissible: tail_admissible(k),
        provider_id: provider.id().to_string(),
        conjectural: provider.conjectural(k),
    })
}
