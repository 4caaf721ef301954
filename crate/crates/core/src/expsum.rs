//! Evaluation and maximization of `P_N(θ) = N^{-1/2} Σ_{n≤N} f(n) e(nθ)`,
//! optionally restricted by the largest prime factor of `n`, plus the two
//! finite sets of frequencies the bounds are proved over.

use num_complex::Complex;
use num_traits::Zero;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Result};
use crate::ntcore::{Exponent, PrimeTable};
use crate::rmf::RmfValues;
use crate::scalar::{turn, ComplexSum, Real};

/// Which `n ≤ N` contribute, by largest prime factor `P(n)`.
///
/// `RoughAtLeast(α)` keeps `P(n) ≥ N^α`; `SmoothAtMost(α)` keeps the
/// complement, so a prime exactly at `N^α` is rough. `P(1) = 1` makes `n = 1`
/// smooth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientFilter {
    All,
    RoughAtLeast(Exponent),
    SmoothAtMost(Exponent),
}

impl CoefficientFilter {
    /// Predicate on `P(n)` for sums of length `n_max`.
    pub fn admits_fn(self, n_max: usize) -> impl Fn(u64) -> bool {
        let t = match self {
            CoefficientFilter::All => 0,
            CoefficientFilter::RoughAtLeast(a) | CoefficientFilter::SmoothAtMost(a) => {
                a.ceil_power(n_max as u64)
            }
        };
        move |lpf| match self {
            CoefficientFilter::All => true,
            CoefficientFilter::RoughAtLeast(_) => lpf >= t,
            CoefficientFilter::SmoothAtMost(_) => lpf < t,
        }
    }

    pub fn label(self) -> String {
        match self {
            CoefficientFilter::All => "all".into(),
            CoefficientFilter::RoughAtLeast(a) => format!("rough>={a}"),
            CoefficientFilter::SmoothAtMost(a) => format!("smooth<={a}"),
        }
    }
}

/// `(n, f(n))` for every admitted `n ≤ N`, ascending.
pub fn filtered_coefficients<T: Real>(
    values: &RmfValues<T>,
    filter: CoefficientFilter,
    table: &PrimeTable,
) -> Result<Vec<(usize, Complex<T>)>> {
    let n = values.n();
    if n > table.limit() {
        return domain(format!("N = {n} exceeds sieve limit {}", table.limit()));
    }
    let admits = filter.admits_fn(n);
    let lpf = table.lpf_table();
    Ok((1..=n)
        .filter(|&m| admits(lpf[m] as u64))
        .map(|m| (m, values.get(m)))
        .collect())
}

fn inv_sqrt<T: Real>(n: usize) -> T {
    T::one() / T::of_usize(n).sqrt()
}

/// Direct compensated evaluation of the normalized sum at one frequency.
pub fn eval_point<T: Real>(
    values: &RmfValues<T>,
    filter: CoefficientFilter,
    theta: f64,
    table: &PrimeTable,
) -> Result<Complex<T>> {
    let coeffs = filtered_coefficients(values, filter, table)?;
    Ok(eval_sparse(&coeffs, theta) * inv_sqrt::<T>(values.n()))
}

/// Unnormalized `Σ a_n e(nθ)` over a sparse coefficient list.
pub fn eval_sparse<T: Real>(coeffs: &[(usize, Complex<T>)], theta: f64) -> Complex<T> {
    coeffs
        .iter()
        .map(|&(n, a)| a * turn::<T>(n as f64 * theta))
        .collect::<ComplexSum<T>>()
        .value()
}

/// Normalized sum at many frequencies, each by Horner's rule in `e(θ)`.
/// Parallel over frequencies; each entry is computed identically whatever
/// the thread count.
pub fn eval_many<T: Real>(
    values: &RmfValues<T>,
    filter: CoefficientFilter,
    thetas: &[f64],
    table: &PrimeTable,
) -> Result<Vec<Complex<T>>> {
    use rayon::prelude::*;
    let n = values.n();
    let coeffs = filtered_coefficients(values, filter, table)?;
    let mut dense = vec![Complex::<T>::zero(); n + 1];
    for &(k, a) in &coeffs {
        dense[k] = a;
    }
    let scale = inv_sqrt::<T>(n);
    Ok(thetas
        .par_iter()
        .map(|&theta| {
            let z = turn::<T>(theta);
            let mut acc = Complex::<T>::zero();
            for a in dense[1..].iter().rev() {
                acc = (acc + *a) * z;
            }
            acc * scale
        })
        .collect())
}

/// `Σ_{m ≤ len} f(m) e(m p θ)`, phases advanced by repeated multiplication.
#[inline]
pub fn prime_inner_sum<T: Real>(
    values: &RmfValues<T>,
    p: u64,
    len: usize,
    theta: f64,
) -> Complex<T> {
    let step = turn::<T>(p as f64 * theta);
    let mut phase = step;
    let mut acc = ComplexSum::new();
    for m in 1..=len {
        acc.add(values.get(m) * phase);
        phase = phase * step;
    }
    acc.value()
}

/// The rough part evaluated through `n = m·p`, `p = P(n) ≥ N^α`:
/// `N^{-1/2} Σ_{p ≥ N^α} f(p) Σ_{m ≤ N/p} f(m) e(mpθ)`.
///
/// For `α ≥ 1/2` every admitted `n` has a unique such split with `p ∤ m`, so
/// this equals [`eval_point`] with `RoughAtLeast(α)` for both models.
pub fn eval_rough_factored<T: Real>(
    values: &RmfValues<T>,
    alpha: Exponent,
    theta: f64,
    table: &PrimeTable,
) -> Result<Complex<T>> {
    if alpha.value() < 0.5 {
        return domain(format!("factored rough sum needs alpha >= 1/2, got {alpha}"));
    }
    let n = values.n();
    if n > table.limit() {
        return domain(format!("N = {n} exceeds sieve limit {}", table.limit()));
    }
    let lo = alpha.ceil_power(n as u64);
    let mut acc = ComplexSum::new();
    for &p in table.primes_between(lo, n as u64) {
        let inner = prime_inner_sum(values, p as u64, n / p as usize, theta);
        acc.add(values.get(p as usize) * inner);
    }
    Ok(acc.value() * inv_sqrt::<T>(n))
}

/// Normalized sum sampled on `θ_j = j/M`, `0 ≤ j < M`.
#[derive(Clone, Debug)]
pub struct GridEvaluation<T> {
    pub n: usize,
    /// Realized transform length (may exceed the request).
    pub m: usize,
    pub requested_m: usize,
    pub filter: CoefficientFilter,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> GridEvaluation<T> {
    pub fn theta(&self, j: usize) -> f64 {
        j as f64 / self.m as f64
    }

    /// `(index, modulus)` of the largest entry; ties go to the smallest index.
    pub fn argmax(&self) -> (usize, T) {
        let mut best = (0, T::neg_infinity());
        for (j, z) in self.values.iter().enumerate() {
            let r = z.norm();
            if r > best.1 {
                best = (j, r);
            }
        }
        best
    }
}

/// Smallest `2^a 3^b 5^c 7^d ≥ m`.
pub fn admissible_fft_len(m: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < 2 * m.max(1) {
        let mut p3 = p2;
        while p3 < 2 * m.max(1) {
            let mut p5 = p3;
            while p5 < 2 * m.max(1) {
                let mut p7 = p5;
                while p7 < 2 * m.max(1) {
                    if p7 >= m && p7 < best {
                        best = p7;
                    }
                    p7 *= 7;
                }
                p5 *= 5;
            }
            p3 *= 3;
        }
        p2 *= 2;
    }
    best
}

/// All `M` grid values by one zero-padded inverse transform.
pub fn eval_grid_fft<T: Real>(
    values: &RmfValues<T>,
    filter: CoefficientFilter,
    m: usize,
    table: &PrimeTable,
) -> Result<GridEvaluation<T>> {
    let n = values.n();
    if m < n + 1 {
        return domain(format!("grid size {m} must be at least N + 1 = {}", n + 1));
    }
    let realized = admissible_fft_len(m);
    let coeffs = filtered_coefficients(values, filter, table)?;
    let mut buf = vec![Complex::<T>::zero(); realized];
    for &(k, a) in &coeffs {
        buf[k] = a;
    }
    // inverse transform carries the e(+nj/M) sign
    let fft = FftPlanner::<T>::new().plan_fft_inverse(realized);
    fft.process(&mut buf);
    let scale = inv_sqrt::<T>(n);
    for z in &mut buf {
        *z = *z * scale;
    }
    Ok(GridEvaluation {
        n,
        m: realized,
        requested_m: m,
        filter,
        values: buf,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxModulus {
    pub theta_star: f64,
    pub magnitude: f64,
    pub grid_size: usize,
}

/// Grid maximum on `M ≥ ⌈oversample · N⌉` points.
///
/// With spacing at most `1/(4πN)` the true maximum over `[0, 1]` lies in
/// `[magnitude, 2·magnitude]`.
pub fn max_modulus<T: Real>(
    values: &RmfValues<T>,
    filter: CoefficientFilter,
    oversample: f64,
    table: &PrimeTable,
) -> Result<MaxModulus> {
    if !(oversample >= 4.0 * std::f64::consts::PI) {
        return domain(format!("oversample {oversample} < 4π"));
    }
    let m = ((oversample * values.n() as f64).ceil() as usize).max(values.n() + 1);
    let grid = eval_grid_fft(values, filter, m, table)?;
    let (j, r) = grid.argmax();
    Ok(MaxModulus {
        theta_star: grid.theta(j),
        magnitude: r.as_f64(),
        grid_size: grid.m,
    })
}

/// `θ = a/q + j/(4πN)` reduced mod 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationPoint {
    pub a: u64,
    pub q: u64,
    pub j: i64,
    pub theta: f64,
}

impl DiscretizationPoint {
    pub fn new(a: u64, q: u64, j: i64, n: usize) -> Self {
        let base = (a % q) as f64 / q as f64;
        let shift = j as f64 / (4.0 * std::f64::consts::PI * n as f64);
        let theta = (base + shift).rem_euclid(1.0);
        Self { a, q, j, theta }
    }
}

/// Points beyond this count are not materialized.
pub const DISCRETIZATION_CAP: u64 = 1 << 26;

/// `Q = 4π√N`, the choice used for the upper bound.
pub fn default_q(n: usize) -> f64 {
    4.0 * std::f64::consts::PI * (n as f64).sqrt()
}

fn check_q(n: usize, q_max: f64) -> Result<()> {
    if n == 0 {
        return domain("N must be positive");
    }
    let top = 4.0 * std::f64::consts::PI * n as f64;
    if !(q_max >= 2.0 && q_max <= top) {
        return domain(format!("Q = {q_max} outside [2, 4πN = {top}]"));
    }
    Ok(())
}

fn j_bound(n: usize, q: u64, q_max: f64) -> i64 {
    (4.0 * std::f64::consts::PI * n as f64 / (q as f64 * q_max)).floor() as i64
}

/// Streaming enumeration in `(q, a, j)` order; no sorting or deduplication.
pub fn discretization_iter(
    n: usize,
    q_max: f64,
) -> Result<impl Iterator<Item = DiscretizationPoint>> {
    check_q(n, q_max)?;
    let qs = 1..=(q_max.floor() as u64);
    Ok(qs.flat_map(move |q| {
        let jb = j_bound(n, q, q_max);
        (1..=q)
            .filter(move |&a| num_integer::gcd(a, q) == 1)
            .flat_map(move |a| (-jb..=jb).map(move |j| DiscretizationPoint::new(a, q, j, n)))
    }))
}

/// Exact `|𝒟|` before deduplication, `Σ_q φ(q)(2⌊4πN/(qQ)⌋ + 1)`.
pub fn discretization_size(n: usize, q_max: f64) -> Result<u64> {
    check_q(n, q_max)?;
    let top = q_max.floor() as u64;
    let mut total = 0u64;
    for q in 1..=top {
        let phi = (1..=q).filter(|&a| num_integer::gcd(a, q) == 1).count() as u64;
        total += phi * (2 * j_bound(n, q, q_max) as u64 + 1);
    }
    Ok(total)
}

/// The full set, deduplicated on reduced `θ` and sorted by `θ`.
pub fn build_discretization(n: usize, q_max: f64) -> Result<Vec<DiscretizationPoint>> {
    let size = discretization_size(n, q_max)?;
    if size > DISCRETIZATION_CAP {
        return resource(format!(
            "|D| = {size} exceeds {DISCRETIZATION_CAP}; use discretization_iter or subsampling"
        ));
    }
    let mut pts: Vec<_> = discretization_iter(n, q_max)?.collect();
    sort_dedup(&mut pts);
    Ok(pts)
}

fn sort_dedup(pts: &mut Vec<DiscretizationPoint>) {
    pts.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    pts.dedup_by(|x, y| x.theta == y.theta);
}

/// `count` members drawn uniformly without replacement from the streamed
/// enumeration, then sorted by `θ`. Returns the whole set when `count ≥ |𝒟|`.
pub fn subsample_discretization(
    n: usize,
    q_max: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<DiscretizationPoint>> {
    let size = discretization_size(n, q_max)?;
    if count as u64 >= size {
        return build_discretization(n, q_max);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<usize> = index::sample(&mut rng, size as usize, count).into_vec();
    picks.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let mut next = picks.iter().peekable();
    for (i, pt) in discretization_iter(n, q_max)?.enumerate() {
        match next.peek() {
            Some(&&k) if k == i => {
                out.push(pt);
                next.next();
            }
            Some(_) => {}
            None => break,
        }
    }
    sort_dedup(&mut out);
    Ok(out)
}

/// The lower-bound frequencies `{p_{r+i}/q : 1 ≤ i ≤ ⌊N^{1/8}⌋}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSetA {
    /// Smallest prime in `[√N, 2√N]`.
    pub q: u64,
    /// The first `⌊N^{1/8}⌋` primes exceeding `N^{1/7}`.
    pub numerators: Vec<u64>,
    pub thetas: Vec<f64>,
}

pub fn build_theta_set_a(n: usize, table: &PrimeTable) -> Result<ThetaSetA> {
    if n < 2 {
        return domain("N must be at least 2");
    }
    let n64 = n as u64;
    let sqrt_floor = num_integer::Roots::sqrt(&n64);
    let lo = if sqrt_floor * sqrt_floor == n64 {
        sqrt_floor
    } else {
        sqrt_floor + 1
    };
    let hi = num_integer::Roots::sqrt(&(4 * n64));
    let q = match table.primes_between(lo, hi).first() {
        Some(&q) => q as u64,
        None if hi > table.limit() as u64 => {
            return resource(format!("sieve limit {} below 2√N", table.limit()))
        }
        None => return domain(format!("no prime in [{lo}, {hi}]")),
    };
    let count = Exponent::new(1, 8)?.floor_power(n64) as usize;
    let start = Exponent::new(1, 7)?.floor_power(n64) + 1;
    let above: Vec<u64> = table
        .primes_between(start, u64::MAX)
        .iter()
        .take(count)
        .map(|&p| p as u64)
        .collect();
    if above.len() < count {
        return resource(format!(
            "sieve limit {} holds only {} primes above N^(1/7), need {count}",
            table.limit(),
            above.len()
        ));
    }
    let thetas = above
        .iter()
        .map(|&p| (p % q) as f64 / q as f64)
        .collect();
    Ok(ThetaSetA {
        q,
        numerators: above,
        thetas,
    })
}
