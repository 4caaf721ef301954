use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmflab_core::expsum::{
    build_discretization, default_q, discretization_iter, discretization_size, eval_grid_fft,
    eval_many, eval_point, filtered_coefficients, max_modulus, subsample_discretization,
    CoefficientFilter,
};
use rmflab_core::ntcore::{build_prime_table, Exponent, PrimeTable};
use rmflab_core::rmf::{RmfKind, RmfValues};
use rmflab_core::scalar::circle_distance;

/// Quadratic-time DFT with roots indexed by `(n·j) mod M`.
fn direct_dft(coeffs: &[(usize, Complex<f64>)], n: usize, m: usize) -> Vec<Complex<f64>> {
    let roots: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / m as f64;
            Complex::new(a.cos(), a.sin())
        })
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    (0..m)
        .map(|j| {
            let mut acc = Complex::new(0.0, 0.0);
            for &(k, a) in coeffs {
                acc += a * roots[(k * j) % m];
            }
            acc * scale
        })
        .collect()
}

fn table() -> PrimeTable {
    build_prime_table(10_000).unwrap()
}

#[test]
fn fft_matches_direct_dft() {
    let t = table();
    let sizes = [1usize, 2, 7, 100, 255, 1024, 2000, 4096];
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = sizes[seed as usize % sizes.len()];
        let kind = if seed % 2 == 0 { RmfKind::Steinhaus } else { RmfKind::Rademacher };
        let v = RmfValues::<f64>::sample(kind, n, seed, &t).unwrap();
        let g = eval_grid_fft(&v, CoefficientFilter::All, n + 1 + seed as usize, &t).unwrap();
        assert!(g.m >= g.requested_m);
        let coeffs = filtered_coefficients(&v, CoefficientFilter::All, &t).unwrap();
        let d = direct_dft(&coeffs, n, g.m);
        for (a, b) in g.values.iter().zip(&d) {
            worst = worst.max((a - b).norm());
        }
    }
    println!("max |fft - dft| = {worst:e}");
    assert!(worst < 1e-9);
}

#[test]
fn grid_matches_eval_point_on_grid() {
    let t = table();
    let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, 1024, 17, &t).unwrap();
    let g = eval_grid_fft(&v, CoefficientFilter::All, 4 * 1024, &t).unwrap();
    let j = (0.37 * g.m as f64).round() as usize;
    let direct = eval_point(&v, CoefficientFilter::All, g.theta(j), &t).unwrap();
    assert!((direct - g.values[j]).norm() < 1e-9);
    let many = eval_many(&v, CoefficientFilter::All, &[g.theta(j), 0.37], &t).unwrap();
    assert!((many[0] - g.values[j]).norm() < 1e-9);
    let at = eval_point(&v, CoefficientFilter::All, 0.37, &t).unwrap();
    assert!((many[1] - at).norm() < 1e-9);
    assert!(at.norm() <= (1024f64).sqrt());
}

#[test]
fn parseval() {
    let t = table();
    for seed in 0..20u64 {
        let n = 50 + 97 * seed as usize;
        for (kind, filter) in [
            (RmfKind::Steinhaus, CoefficientFilter::All),
            (RmfKind::Rademacher, CoefficientFilter::All),
            (RmfKind::Steinhaus, CoefficientFilter::RoughAtLeast(Exponent::FOUR_FIFTHS)),
        ] {
            let v = RmfValues::<f64>::sample(kind, n, seed, &t).unwrap();
            let g = eval_grid_fft(&v, filter, 3 * n, &t).unwrap();
            let lhs: f64 = g.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / g.m as f64;
            let rhs: f64 = filtered_coefficients(&v, filter, &t)
                .unwrap()
                .iter()
                .map(|(_, a)| a.norm_sqr())
                .sum::<f64>()
                / n as f64;
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn bernstein_sandwich_over_grid_and_d() {
    let t = table();
    for seed in 0..50u64 {
        let n = 64 + (seed as usize * 37) % 449;
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, seed, &t).unwrap();
        let reference = eval_grid_fft(&v, CoefficientFilter::All, 64 * n, &t).unwrap();
        let fine = reference.argmax().1;
        let mm = max_modulus(&v, CoefficientFilter::All, 4.0 * std::f64::consts::PI, &t).unwrap();
        // spacing 1/(64N) puts the true maximum below fine/(1 - π/64)
        assert!(mm.magnitude <= fine / (1.0 - std::f64::consts::PI / 64.0));
        assert!(fine <= 2.0 * mm.magnitude, "grid, seed {seed}");
        assert!(mm.magnitude <= (n as f64).sqrt() + 1e-9);
        let d = build_discretization(n, default_q(n)).unwrap();
        let thetas: Vec<f64> = d.iter().map(|p| p.theta).collect();
        let on_d = eval_many(&v, CoefficientFilter::All, &thetas, &t)
            .unwrap()
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(fine <= 2.0 * on_d, "D, seed {seed}: {fine} vs {on_d}");
    }
}

#[test]
fn rough_and_smooth_partition() {
    let t = table();
    for &n in &[2usize, 100, 128, 1000, 3125, 5000] {
        for alpha in [Exponent::FOUR_FIFTHS, Exponent::SIX_SEVENTHS, Exponent::new(1, 7).unwrap()] {
            let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, 3, &t).unwrap();
            let rough = filtered_coefficients(&v, CoefficientFilter::RoughAtLeast(alpha), &t).unwrap();
            let smooth = filtered_coefficients(&v, CoefficientFilter::SmoothAtMost(alpha), &t).unwrap();
            let mut all: Vec<usize> = rough.iter().chain(&smooth).map(|&(k, _)| k).collect();
            all.sort_unstable();
            assert_eq!(all, (1..=n).collect::<Vec<_>>());
            assert!(smooth.iter().any(|&(k, _)| k == 1));
            let threshold = (n as f64).powf(alpha.value());
            for &(k, _) in &rough {
                assert!(t.largest_prime_factor(k as u64).unwrap() as f64 >= threshold - 1e-9);
            }
            let theta = 0.2137;
            let total = eval_point(&v, CoefficientFilter::All, theta, &t).unwrap();
            let split = eval_point(&v, CoefficientFilter::RoughAtLeast(alpha), theta, &t).unwrap()
                + eval_point(&v, CoefficientFilter::SmoothAtMost(alpha), theta, &t).unwrap();
            assert!((total - split).norm() < 1e-12);
        }
    }
}

#[test]
fn discretization_members_and_coverage() {
    for &n in &[4usize, 64, 300] {
        let q = default_q(n);
        let pts = build_discretization(n, q).unwrap();
        let bound = 4.0 * std::f64::consts::PI * n as f64;
        for p in &pts {
            assert_eq!(num_integer::gcd(p.a, p.q), 1);
            assert!(1 <= p.a && p.a <= p.q);
            assert!(p.q as f64 <= q);
            assert!((p.j.unsigned_abs() as f64) <= bound / (p.q as f64 * q));
            assert!((0.0..1.0).contains(&p.theta));
        }
        assert!(pts.windows(2).all(|w| w[0].theta < w[1].theta));
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let thetas: Vec<f64> = pts.iter().map(|p| p.theta).collect();
        for _ in 0..10_000 {
            let x: f64 = rng.random();
            let i = thetas.partition_point(|&t| t < x);
            let near = [i.wrapping_sub(1), i, 0, thetas.len() - 1]
                .iter()
                .filter_map(|&k| thetas.get(k))
                .map(|&t| circle_distance(x - t))
                .fold(f64::INFINITY, f64::min);
            assert!(near <= 1.0 / bound, "N = {n}, θ = {x}");
        }
    }
}

#[test]
fn discretization_size_grows_linearly() {
    let mut ratios = Vec::new();
    for &n in &[1_000usize, 10_000, 100_000, 1_000_000] {
        let s = discretization_size(n, default_q(n)).unwrap();
        ratios.push(s as f64 / n as f64);
    }
    println!("|D|/N = {ratios:?}");
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.5);
}

#[test]
fn streaming_and_subsampling_agree_with_materialized() {
    let n = 200;
    let q = default_q(n);
    let full = build_discretization(n, q).unwrap();
    assert_eq!(discretization_iter(n, q).unwrap().count() as u64, discretization_size(n, q).unwrap());
    assert_eq!(full.len() as u64, discretization_size(n, q).unwrap());
    let sub = subsample_discretization(n, q, 500, 9).unwrap();
    assert_eq!(sub.len(), 500);
    assert_eq!(sub, subsample_discretization(n, q, 500, 9).unwrap());
    assert!(sub.iter().all(|p| full.iter().any(|f| f.theta == p.theta)));
    assert_eq!(subsample_discretization(n, q, usize::MAX, 0).unwrap(), full);
}

#[test]
fn rough_support_density() {
    let n = 1_000_000usize;
    let t = build_prime_table(n).unwrap();
    let v = RmfValues::<f64>::ones(n, &t).unwrap();
    let support = filtered_coefficients(&v, CoefficientFilter::RoughAtLeast(Exponent::FOUR_FIFTHS), &t)
        .unwrap()
        .len();
    // oracle: Σ_{p ≥ N^{4/5}} ⌊N/p⌋ by trial division
    let lo = Exponent::FOUR_FIFTHS.ceil_power(n as u64);
    let is_prime = |p: u64| p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0);
    let oracle: u64 = (lo..=n as u64).filter(|&p| is_prime(p)).map(|p| n as u64 / p).sum();
    assert_eq!(support as u64, oracle);
    let density = support as f64 / n as f64;
    let target = (5.0f64 / 4.0).ln();
    println!("rough support density {density:.5} vs log(5/4) = {target:.5}");
    assert!((density - target).abs() <= 0.05 * target, "{density} vs {target}");
}
