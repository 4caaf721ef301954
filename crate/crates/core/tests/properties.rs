use std::sync::OnceLock;

use num_complex::Complex;
use proptest::prelude::*;
use rmflab_core::expsum::{eval_grid_fft, eval_point, CoefficientFilter};
use rmflab_core::ntcore::{build_prime_table, ramanujan_sum_complex, Exponent, PrimeTable};
use rmflab_core::rmf::{resample_above_cutoff, RmfKind, RmfValues};
use rmflab_core::variance::{conditional_variance, covariance_z, rewrite_by_r, VarianceSpec};

fn table() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| build_prime_table(10_000).unwrap())
}

fn kind() -> impl Strategy<Value = RmfKind> {
    prop_oneof![Just(RmfKind::Steinhaus), Just(RmfKind::Rademacher)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_reconstructs(n in 1u64..=10_000) {
        let f = table().factorize(n).unwrap();
        prop_assert_eq!(f.product(), n);
        prop_assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(f.factors.iter().all(|&(p, e)| e >= 1 && table().is_prime(p)));
    }

    #[test]
    fn ramanujan_bound(q in 1u64..=300, n in -200i64..=200) {
        let c = ramanujan_sum_complex::<f64>(q, n);
        prop_assert!(c.im.abs() < 1e-10);
        prop_assert!(c.re.abs() <= num_integer::gcd(n.unsigned_abs(), q) as f64 + 1e-9);
    }

    #[test]
    fn tau_k_multiplicative(m in 1u64..=100, n in 1u64..=100, k in 1u32..=5) {
        prop_assume!(num_integer::gcd(m, n) == 1);
        let t = table();
        prop_assert_eq!(t.tau_k(m * n, k).unwrap(), t.tau_k(m, k).unwrap() * t.tau_k(n, k).unwrap());
    }

    #[test]
    fn exponent_thresholds_bracket(n in 2u64..=1_000_000_000, num in 1u32..=9, den in 2u32..=10) {
        prop_assume!(num < den);
        let a = Exponent::new(num, den).unwrap();
        let (lo, hi) = (a.floor_power(n), a.ceil_power(n));
        let big = |x: u64| num_bigint::BigUint::from(x).pow(a.den());
        let target = num_bigint::BigUint::from(n).pow(a.num());
        prop_assert!(big(lo) <= target && target < big(lo + 1));
        prop_assert!(hi == lo || hi == lo + 1);
        prop_assert!(big(hi) >= target);
    }

    #[test]
    fn multiplicativity(kind in kind(), seed in any::<u64>(), m in 1usize..=100, n in 1usize..=100) {
        let v = RmfValues::<f64>::sample(kind, 10_000, seed, table()).unwrap();
        let lhs = v.get(m * n);
        let rhs = v.get(m) * v.get(n);
        match kind {
            RmfKind::Steinhaus => prop_assert!((lhs - rhs).norm() < 1e-12),
            RmfKind::Rademacher if num_integer::gcd(m, n) == 1 => prop_assert_eq!(lhs, rhs),
            RmfKind::Rademacher => prop_assert!(lhs.re.abs() <= 1.0),
        }
    }

    #[test]
    fn rademacher_support(seed in any::<u64>(), n in 1usize..=10_000) {
        let v = RmfValues::<f64>::sample(RmfKind::Rademacher, n, seed, table()).unwrap();
        let z = v.get(n);
        prop_assert_eq!(z != Complex::new(0.0, 0.0), table().is_squarefree(n as u64).unwrap());
    }

    #[test]
    fn seed_determinism(kind in kind(), seed in any::<u64>(), n in 1usize..=3000) {
        let a = RmfValues::<f64>::sample(kind, n, seed, table()).unwrap();
        let b = RmfValues::<f64>::sample(kind, n, seed, table()).unwrap();
        prop_assert_eq!(a.coefficients(), b.coefficients());
    }

    #[test]
    fn resample_agrees_below_cutoff(seed in any::<u64>(), cutoff in 1usize..=500) {
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, 2000, seed, table()).unwrap();
        let w = resample_above_cutoff(&v, cutoff, seed ^ 0xabcdef, table()).unwrap();
        for &p in table().primes_between(2, cutoff as u64) {
            prop_assert_eq!(v.get(p as usize), w.get(p as usize));
        }
    }

    #[test]
    fn modulus_bounded_by_root_n(seed in any::<u64>(), n in 1usize..=2000, theta in 0.0f64..1.0) {
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, seed, table()).unwrap();
        let z = eval_point(&v, CoefficientFilter::All, theta, table()).unwrap();
        prop_assert!(z.norm() <= (n as f64).sqrt() + 1e-9);
    }

    #[test]
    fn variances_nonnegative_and_rewrite_exact(
        kind in kind(), seed in any::<u64>(), n in 2usize..=10_000, theta in 0.0f64..1.0
    ) {
        let v = RmfValues::<f64>::sample(kind, n, seed, table()).unwrap();
        let a = conditional_variance(&v, theta, VarianceSpec::upper_bound(kind), table()).unwrap();
        let b = rewrite_by_r(&v, theta, table()).unwrap();
        let c = conditional_variance(&v, theta, VarianceSpec::lower_bound(kind), table()).unwrap();
        prop_assert!(a >= 0.0 && c >= 0.0);
        prop_assert!((a - b).abs() <= 1e-10 * a.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn covariance_symmetric(seed in any::<u64>(), n in 2usize..=5000, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        prop_assume!(t1 != t2);
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, seed, table()).unwrap();
        let spec = VarianceSpec::lower_bound(RmfKind::Steinhaus);
        let x = covariance_z(&v, t1, t2, spec, table()).unwrap();
        let y = covariance_z(&v, t2, t1, spec, table()).unwrap();
        prop_assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn f32_path_tracks_f64() {
    let t = table();
    let n = 4096;
    let v64 = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, 12, t).unwrap();
    let v32 = RmfValues::<f32>::sample(RmfKind::Steinhaus, n, 12, t).unwrap();
    for m in 1..=n {
        let (a, b) = (v64.get(m), v32.get(m));
        assert!((a.re - b.re as f64).abs() < 1e-4 && (a.im - b.im as f64).abs() < 1e-4);
    }
    let g64 = eval_grid_fft(&v64, CoefficientFilter::All, 4 * n, t).unwrap();
    let g32 = eval_grid_fft(&v32, CoefficientFilter::All, 4 * n, t).unwrap();
    assert_eq!(g64.m, g32.m);
    let worst = g64
        .values
        .iter()
        .zip(&g32.values)
        .map(|(a, b)| (a - Complex::new(b.re as f64, b.im as f64)).norm())
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-3, "{worst}");
    let c64 = conditional_variance(&v64, 0.3, VarianceSpec::upper_bound(RmfKind::Steinhaus), t).unwrap();
    let c32 = conditional_variance(&v32, 0.3, VarianceSpec::upper_bound(RmfKind::Steinhaus), t).unwrap();
    assert!((c64 - c32 as f64).abs() < 1e-3 * c64.max(1.0));
}
