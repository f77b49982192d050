//! Randomized structural invariants, checked over generated inputs.
//! Deterministic oracles (factorization, direct summation, reference
//! quadrature) are recomputed inside each property.

use dkzeta::correlation::{correlate, CorrelationMode};
use dkzeta::main_term::expected_short_sum;
use dkzeta::moments::BumpFunction;
use dkzeta::ramanujan::{
    euler_phi, fejer_sum_multiples, fejer_sum_multiples_direct, fejer_sum_multiples_direct_exact,
    fejer_sum_multiples_exact, fejer_transform, fejer_weight, ramanujan_mobius,
    singular_series, singular_series_limit, Rational,
};
use dkzeta::sieve::{dk_single, sieve_dk, DivisorTable};
use dkzeta::zeta::zeta_critical;
use proptest::prelude::*;
use std::sync::OnceLock;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Shared small tables (k = 1..4, n <= 3000) so properties don't re-sieve.
fn small_table(k: u32) -> &'static DivisorTable {
    static TABLES: OnceLock<[DivisorTable; 4]> = OnceLock::new();
    &TABLES.get_or_init(|| [1u32, 2, 3, 4].map(|k| sieve_dk(k, 3000).expect("sieve")))
        [(k - 1) as usize]
}

proptest! {
    // --- divisor tables -------------------------------------------------

    #[test]
    fn dk_single_is_multiplicative(m in 1u64..2000, n in 1u64..2000, k in 1u32..=6) {
        prop_assume!(gcd(m, n) == 1);
        prop_assert_eq!(dk_single(k, m * n), dk_single(k, m) * dk_single(k, n));
    }

    #[test]
    fn dk_at_primes_is_k(k in 1u32..=6, i in 0usize..10) {
        let p = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29][i];
        prop_assert_eq!(dk_single(k, p), k as u64);
    }

    #[test]
    fn sieve_matches_factorization(k in 1u32..=4, n in 1u64..=3000) {
        prop_assert_eq!(small_table(k).value(n), dk_single(k, n));
    }

    #[test]
    fn prefix_sums_accumulate_values(k in 1u32..=4, n in 1u64..=500) {
        let table = small_table(k);
        let pref = table.prefix_sums(500).unwrap();
        prop_assert_eq!(pref[0], 0);
        prop_assert_eq!(pref[n as usize] - pref[n as usize - 1], table.value(n));
    }

    #[test]
    fn max_value_is_the_running_maximum(k in 1u32..=4, upto in 1u64..=3000) {
        let table = small_table(k);
        let expected = (1..=upto).map(|n| table.value(n)).max().unwrap();
        prop_assert_eq!(table.max_value(upto), expected);
    }

    #[test]
    fn table_roundtrips_through_disk(k in 1u32..=4, n in 32u64..=800) {
        let table = sieve_dk(k, n).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.dktb");
        table.save(&path).unwrap();
        let loaded = DivisorTable::load(&path).unwrap();
        prop_assert_eq!(loaded.k(), table.k());
        prop_assert_eq!(loaded.n_max(), table.n_max());
        prop_assert_eq!(loaded.values(), table.values());
        prop_assert_eq!(loaded.checksum(), table.checksum());
    }

    // --- Ramanujan sums and the Fejér kernel ----------------------------

    #[test]
    fn ramanujan_depends_only_on_gcd(q in 1u64..=400, a in 1i64..=2000) {
        let g = gcd(a.unsigned_abs(), q) as i64;
        prop_assert_eq!(ramanujan_mobius(q, a).unwrap(), ramanujan_mobius(q, g).unwrap());
    }

    #[test]
    fn ramanujan_bounded_by_totient(q in 1u64..=400, a in -2000i64..=2000) {
        let c = ramanujan_mobius(q, a).unwrap();
        prop_assert!(c.unsigned_abs() <= euler_phi(q));
    }

    #[test]
    fn fejer_weight_is_even_and_capped(h in 0.0f64..300.0, a in -400i64..=400) {
        let w = fejer_weight(h, a);
        prop_assert_eq!(w, fejer_weight(h, -a));
        prop_assert!((0.0..=h.max(0.0)).contains(&w));
    }

    #[test]
    fn fejer_multiple_sum_matches_direct(h in 0.5f64..200.0, d in 1u64..=40) {
        let closed = fejer_sum_multiples(h, d).unwrap();
        let direct = fejer_sum_multiples_direct(h, d).unwrap();
        let scale = (h * h).max(1.0);
        prop_assert!((closed - direct).abs() <= 1e-9 * scale,
            "closed {} vs direct {}", closed, direct);
    }

    #[test]
    fn fejer_multiple_sum_exact_in_rational_mode(
        num in 1i64..=1200, den in 1i64..=8, d in 1u64..=40,
    ) {
        let h = Rational::new(num, den);
        prop_assert_eq!(
            fejer_sum_multiples_exact(h, d).unwrap(),
            fejer_sum_multiples_direct_exact(h, d).unwrap()
        );
    }

    #[test]
    fn fejer_transform_is_nonnegative(h in 1u64..=48, q in 1u64..=40, jr in 0u64..40) {
        let j = (jr % q) as i64;
        prop_assert!(fejer_transform(h, q, j).unwrap() >= -1e-9);
    }

    #[test]
    fn singular_series_tail_shrinks_like_1_over_q(a in 1i64..=100, q in 50u64..=400) {
        let truncated = singular_series(a, q).unwrap();
        let limit = singular_series_limit(a).unwrap();
        prop_assert!((truncated - limit).abs() <= 10.0 / q as f64,
            "gap {} at a={}, Q={}", (truncated - limit).abs(), a, q);
    }

    // --- main terms ------------------------------------------------------

    #[test]
    fn expected_short_sum_telescopes(
        k in 1u32..=4,
        t in 10.0f64..1e5,
        h1 in 0.1f64..50.0,
        h2 in 0.1f64..50.0,
    ) {
        let joined = expected_short_sum(k, t, h1 + h2).unwrap();
        let split = expected_short_sum(k, t, h1).unwrap()
            + expected_short_sum(k, t + h1, h2).unwrap();
        let scale = joined.abs().max(1.0);
        prop_assert!((joined - split).abs() <= 1e-9 * scale,
            "joined {} vs split {}", joined, split);
    }

    // --- correlations -----------------------------------------------------

    #[test]
    fn fft_correlation_equals_direct(k in 1u32..=3, x in 64u64..=2000, hi in 0u64..=24) {
        let table = small_table(k);
        let direct = correlate(table, x, 0..=hi, CorrelationMode::Direct).unwrap();
        let fft = correlate(table, x, 0..=hi, CorrelationMode::Fft).unwrap();
        prop_assert_eq!(direct.values(), fft.values());
    }

    #[test]
    fn zero_shift_correlation_is_the_square_sum(k in 1u32..=4, x in 16u64..=2500) {
        let table = small_table(k);
        let series = correlate(table, x, 0..=0, CorrelationMode::Direct).unwrap();
        let oracle: u64 = (1..=x).map(|n| table.value(n) * table.value(n)).sum();
        prop_assert_eq!(series.value(0), oracle);
    }

    // --- smooth weight and zeta -------------------------------------------

    #[test]
    fn bump_is_a_plateau_indicator(t_ref in 4.0f64..1e4, u in 0.0f64..2.5) {
        let bump = BumpFunction::new(t_ref).unwrap();
        let t = u * t_ref;
        let v = bump.eval(t);
        prop_assert!((0.0..=1.0).contains(&v), "phi({}) = {}", t, v);
        let (lo, hi) = bump.support();
        if t <= lo || t >= hi {
            prop_assert_eq!(v, 0.0);
        }
        let (plo, phi_hi) = bump.plateau();
        if (plo..=phi_hi).contains(&t) {
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn zeta_reflection_is_exact_conjugation(t in 0.1f64..900.0) {
        let plus = zeta_critical(t, 1e-6).unwrap();
        let minus = zeta_critical(-t, 1e-6).unwrap();
        prop_assert!((minus - plus.conj()).norm() <= 1e-12);
    }
}
