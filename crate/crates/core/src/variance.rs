//! Conditional variance and covariance of the large-prime part of the sum,
//! given the values of `f` on small integers.
//!
//! Writing `S_p(θ) = Σ_{m ≤ N/p} f(m) e(mpθ)`, the quadratic forms are
//! `c · Σ_{p ≥ N^α} |S_p(θ)|²` (Steinhaus) and `c · Σ (Re S_p(θ))²`
//! (Rademacher), with `c = 1/(2N)` or `1/N`.

use num_complex::Complex;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::expsum::{prime_inner_sum, DiscretizationPoint};
use crate::ntcore::{Exponent, PrimeTable};
use crate::rmf::{RmfKind, RmfValues};
use crate::scalar::{CompensatedSum, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `1/(2N)`
    Half,
    /// `1/N`
    Full,
}

impl Normalization {
    fn factor<T: Real>(self, n: usize) -> T {
        let n = T::of_usize(n);
        match self {
            Normalization::Half => T::one() / (n + n),
            Normalization::Full => T::one() / n,
        }
    }
}

/// Primes `N^α ≤ p ≤ N` enter the sum; the upper end is always `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarianceSpec {
    pub pmin_exponent: Exponent,
    pub normalization: Normalization,
    pub kind: RmfKind,
}

impl VarianceSpec {
    /// `(1/2N) Σ_{p > N^{6/7}}`, the lower-bound variance.
    pub fn lower_bound(kind: RmfKind) -> Self {
        Self {
            pmin_exponent: Exponent::SIX_SEVENTHS,
            normalization: Normalization::Half,
            kind,
        }
    }

    /// `(1/N) Σ_{p ≥ N^{4/5}}`, the upper-bound variance.
    pub fn upper_bound(kind: RmfKind) -> Self {
        Self {
            pmin_exponent: Exponent::FOUR_FIFTHS,
            normalization: Normalization::Full,
            kind,
        }
    }

    fn is_rewritable(&self) -> bool {
        self.pmin_exponent == Exponent::FOUR_FIFTHS && self.normalization == Normalization::Full
    }
}

#[inline]
fn square<T: Real>(kind: RmfKind, s: Complex<T>) -> T {
    match kind {
        RmfKind::Steinhaus => s.norm_sqr(),
        RmfKind::Rademacher => s.re * s.re,
    }
}

#[inline]
fn cross<T: Real>(kind: RmfKind, s1: Complex<T>, s2: Complex<T>) -> T {
    match kind {
        RmfKind::Steinhaus => s1.re * s2.re + s1.im * s2.im,
        RmfKind::Rademacher => s1.re * s2.re,
    }
}

fn check_inputs<T: Real>(
    values: &RmfValues<T>,
    kind: RmfKind,
    theta: f64,
    table: &PrimeTable,
) -> Result<()> {
    if values.kind() != kind {
        return domain(format!(
            "variance spec is {kind} but values are {}",
            values.kind()
        ));
    }
    if !(0.0..1.0).contains(&theta) {
        return domain(format!("theta = {theta} not in [0, 1)"));
    }
    if values.n() > table.limit() {
        return domain(format!(
            "N = {} exceeds sieve limit {}",
            values.n(),
            table.limit()
        ));
    }
    Ok(())
}

/// `c · Σ_{N^α ≤ p ≤ N} |S_p(θ)|²`, or `(Re S_p(θ))²` for Rademacher.
/// Primes are visited in ascending order.
pub fn conditional_variance<T: Real>(
    values: &RmfValues<T>,
    theta: f64,
    spec: VarianceSpec,
    table: &PrimeTable,
) -> Result<T> {
    check_inputs(values, spec.kind, theta, table)?;
    let n = values.n();
    let lo = spec.pmin_exponent.ceil_power(n as u64);
    let mut acc = CompensatedSum::new();
    for &p in table.primes_between(lo, n as u64) {
        let s = prime_inner_sum(values, p as u64, n / p as usize, theta);
        acc.add(square(spec.kind, s));
    }
    Ok(acc.value() * spec.normalization.factor(n))
}

/// The `(4/5, Full)` variance regrouped by inner length `r = ⌊N/p⌋`:
/// `(1/N) Σ_{r ≤ N^{1/5}} Σ_{N/(r+1) < p ≤ N/r, p ≥ N^{4/5}} |Σ_{m ≤ r} f(m) e(mpθ)|²`.
///
/// `r` runs downward so primes are met in ascending order and the result
/// agrees bit for bit with [`conditional_variance`].
pub fn rewrite_by_r<T: Real>(values: &RmfValues<T>, theta: f64, table: &PrimeTable) -> Result<T> {
    let kind = values.kind();
    check_inputs(values, kind, theta, table)?;
    let n = values.n() as u64;
    let floor_p = Exponent::FOUR_FIFTHS.ceil_power(n);
    let r_max = Exponent::ONE_FIFTH.floor_power(n);
    let mut acc = CompensatedSum::new();
    for r in (1..=r_max).rev() {
        let lo = (n / (r + 1) + 1).max(floor_p);
        let hi = n / r;
        for &p in table.primes_between(lo, hi) {
            let s = prime_inner_sum(values, p as u64, r as usize, theta);
            acc.add(square(kind, s));
        }
    }
    Ok(acc.value() * Normalization::Full.factor(values.n()))
}

/// `c · Σ_p Re(S_p(θ₁) conj S_p(θ₂))` (Steinhaus) or `c · Σ_p Re S_p(θ₁) Re S_p(θ₂)`
/// (Rademacher).
pub fn covariance_z<T: Real>(
    values: &RmfValues<T>,
    theta1: f64,
    theta2: f64,
    spec: VarianceSpec,
    table: &PrimeTable,
) -> Result<T> {
    if theta1 == theta2 {
        return domain("covariance needs distinct frequencies; use conditional_variance");
    }
    check_inputs(values, spec.kind, theta1, table)?;
    check_inputs(values, spec.kind, theta2, table)?;
    let n = values.n();
    let lo = spec.pmin_exponent.ceil_power(n as u64);
    let mut acc = CompensatedSum::new();
    for &p in table.primes_between(lo, n as u64) {
        let len = n / p as usize;
        let s1 = prime_inner_sum(values, p as u64, len, theta1);
        let s2 = prime_inner_sum(values, p as u64, len, theta2);
        acc.add(cross(spec.kind, s1, s2));
    }
    Ok(acc.value() * spec.normalization.factor(n))
}

/// `(1/2N) Σ_{p > N^{6/7}} #{m ≤ N/p : f(m) ≠ 0 possible}`: `⌊N/p⌋` for
/// Steinhaus, the exact squarefree count for Rademacher.
pub fn diagonal_term<T: Real>(n: usize, kind: RmfKind, table: &PrimeTable) -> Result<T> {
    if n < 2 {
        return domain("diagonal term needs N >= 2");
    }
    if n > table.limit() {
        return domain(format!("N = {n} exceeds sieve limit {}", table.limit()));
    }
    let lo = Exponent::SIX_SEVENTHS.ceil_power(n as u64);
    let primes = table.primes_between(lo, n as u64);
    let longest = primes.first().map_or(0, |&p| n / p as usize);
    // squarefree prefix counts up to the longest inner sum
    let mut sqfree = vec![0usize; longest + 1];
    for m in 1..=longest {
        sqfree[m] = sqfree[m - 1] + table.is_squarefree(m as u64)? as usize;
    }
    let mut acc = CompensatedSum::new();
    for &p in primes {
        let len = n / p as usize;
        let count = match kind {
            RmfKind::Steinhaus => len,
            RmfKind::Rademacher => sqfree[len],
        };
        acc.add(T::of_usize(count));
    }
    Ok(acc.value() * Normalization::Half.factor(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceMax {
    pub theta_star: f64,
    pub value: f64,
    /// Number of frequencies actually evaluated.
    pub evaluated: usize,
    pub subsample: Option<usize>,
}

/// Largest conditional variance over a frequency set, evaluated in parallel.
///
/// `(4/5, Full)` specs go through [`rewrite_by_r`]. With `subsample = Some(k)`
/// and `k` below the set size, `k` points are drawn without replacement using
/// `seed`. Ties resolve to the smallest `θ` whatever the schedule.
pub fn max_variance_over_d<T: Real>(
    values: &RmfValues<T>,
    points: &[DiscretizationPoint],
    spec: VarianceSpec,
    subsample: Option<usize>,
    seed: u64,
    table: &PrimeTable,
) -> Result<VarianceMax> {
    if points.is_empty() {
        return domain("frequency set is empty");
    }
    let chosen: Vec<&DiscretizationPoint> = match subsample {
        Some(0) => return domain("subsample size must be positive"),
        Some(k) if k < points.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = index::sample(&mut rng, points.len(), k).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| &points[i]).collect()
        }
        _ => points.iter().collect(),
    };
    let evaluate = |theta: f64| -> Result<T> {
        if spec.is_rewritable() && spec.kind == values.kind() {
            rewrite_by_r(values, theta, table)
        } else {
            conditional_variance(values, theta, spec, table)
        }
    };
    let scored: Vec<(f64, f64)> = chosen
        .par_iter()
        .map(|pt| evaluate(pt.theta).map(|v| (pt.theta, v.as_f64())))
        .collect::<Result<_>>()?;
    let mut best = scored[0];
    for &(theta, v) in &scored[1..] {
        if v > best.1 || (v == best.1 && theta < best.0) {
            best = (theta, v);
        }
    }
    Ok(VarianceMax {
        theta_star: best.0,
        value: best.1,
        evaluated: scored.len(),
        subsample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcore::build_prime_table;

    #[test]
    fn rewrite_at_200_is_bit_identical() {
        let t = build_prime_table(1000).unwrap();
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, 200, 11, &t).unwrap();
        let a = conditional_variance(&v, 1.0 / 3.0, VarianceSpec::upper_bound(RmfKind::Steinhaus), &t)
            .unwrap();
        let b = rewrite_by_r(&v, 1.0 / 3.0, &t).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn diagonal_small() {
        let t = build_prime_table(1000).unwrap();
        assert_eq!(diagonal_term::<f64>(10, RmfKind::Steinhaus, &t).unwrap(), 0.0);
        assert!(diagonal_term::<f64>(1, RmfKind::Steinhaus, &t).is_err());
    }

    #[test]
    fn covariance_rejects_equal_thetas() {
        let t = build_prime_table(1000).unwrap();
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, 100, 1, &t).unwrap();
        let s = VarianceSpec::lower_bound(RmfKind::Steinhaus);
        assert!(covariance_z(&v, 0.2, 0.2, s, &t).is_err());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let t = build_prime_table(1000).unwrap();
        let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, 100, 1, &t).unwrap();
        let s = VarianceSpec::lower_bound(RmfKind::Rademacher);
        assert!(conditional_variance(&v, 0.2, s, &t).is_err());
    }
}
