//! Deterministic number-theoretic kernels: a linear sieve, factorization,
//! divisor-type functions, Ramanujan sums and prime tail sums.
//!
//! [`PrimeTable`] is the single source of primality and factorization for the
//! whole crate; it is immutable after construction and can be shared freely
//! across threads.

mod exponent;

pub use exponent::Exponent;

use num_complex::Complex;

use crate::error::{domain, resource, Error, Result};
use crate::scalar::{turn_rational, CompensatedSum, ComplexSum, Real};

/// Default cap on the sieve limit.
pub const DEFAULT_LIMIT_CAP: usize = 1 << 31;

/// Primes up to `limit` with smallest- and largest-prime-factor tables.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: usize,
    primes: Vec<u32>,
    spf: Vec<u32>,
    lpf: Vec<u32>,
}

/// `n = ∏ p^e` with primes strictly ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn product(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product::<u64>()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Build a [`PrimeTable`] with the default memory cap.
pub fn build_prime_table(limit: usize) -> Result<PrimeTable> {
    PrimeTable::with_cap(limit, DEFAULT_LIMIT_CAP)
}

impl PrimeTable {
    pub fn new(limit: usize) -> Result<Self> {
        build_prime_table(limit)
    }

    /// Linear sieve; every composite is crossed out exactly once.
    pub fn with_cap(limit: usize, cap: usize) -> Result<Self> {
        if limit < 2 {
            return domain(format!("sieve limit {limit} < 2"));
        }
        if limit > cap {
            return resource(format!("sieve limit {limit} exceeds cap {cap}"));
        }
        let mut spf = vec![0u32; limit + 1];
        let mut primes: Vec<u32> = Vec::with_capacity(estimate_prime_count(limit));
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si {
                    break;
                }
                let m = i * p as usize;
                if m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        let mut lpf = vec![0u32; limit + 1];
        if limit >= 1 {
            lpf[1] = 1;
        }
        for n in 2..=limit {
            let p = spf[n] as usize;
            let rest = n / p;
            lpf[n] = if rest == 1 { p as u32 } else { lpf[rest] };
        }
        Ok(Self {
            limit,
            primes,
            spf,
            lpf,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 {
            return domain("argument must be positive");
        }
        if n > self.limit as u64 {
            return domain(format!("{n} exceeds sieve limit {}", self.limit));
        }
        Ok(n as usize)
    }

    /// Smallest prime factor of `n ≥ 2`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        let i = self.check(n)?;
        if i < 2 {
            return domain("spf is defined for n >= 2");
        }
        Ok(self.spf[i] as u64)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit as u64 && self.spf[n as usize] as u64 == n
    }

    /// `π(x)` for `x ≤ limit`.
    pub fn prime_pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| (p as u64) <= x)
    }

    /// Primes in the closed range `[lo, hi]`, clipped to the table.
    pub fn primes_between(&self, lo: u64, hi: u64) -> &[u32] {
        let a = self.primes.partition_point(|&p| (p as u64) < lo);
        let b = self.primes.partition_point(|&p| (p as u64) <= hi);
        if a >= b {
            &[]
        } else {
            &self.primes[a..b]
        }
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        let mut m = self.check(n)?;
        let mut factors = Vec::new();
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        Ok(Factorization { n, factors })
    }

    /// `P(n)`, with the convention `P(1) = 1`.
    pub fn largest_prime_factor(&self, n: u64) -> Result<u64> {
        let i = self.check(n)?;
        Ok(self.lpf[i] as u64)
    }

    /// Raw largest-prime-factor table, index `n` for `0 ≤ n ≤ limit`.
    pub fn lpf_table(&self) -> &[u32] {
        &self.lpf
    }

    /// Number of ordered `k`-tuples with product `n`.
    pub fn tau_k(&self, n: u64, k: u32) -> Result<u64> {
        if k == 0 {
            return domain("tau_k requires k >= 1");
        }
        let fac = self.factorize(n)?;
        let mut acc: u128 = 1;
        for &(_, e) in &fac.factors {
            acc = acc
                .checked_mul(binomial(e as u64 + k as u64 - 1, k as u64 - 1))
                .ok_or_else(|| Error::Resource(format!("tau_{k}({n}) overflows")))?;
        }
        u64::try_from(acc).map_err(|_| Error::Resource(format!("tau_{k}({n}) overflows")))
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        let fac = self.factorize(n)?;
        Ok(fac
            .factors
            .iter()
            .fold(n, |acc, &(p, _)| acc / p * (p - 1)))
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        let mut m = self.check(n)?;
        let mut last = 0usize;
        while m > 1 {
            let p = self.spf[m] as usize;
            if p == last {
                return Ok(false);
            }
            last = p;
            m /= p;
        }
        Ok(true)
    }

    /// `Λ(n)`: `log p` when `n = p^k`, else 0.
    pub fn von_mangoldt<T: Real>(&self, n: u64) -> Result<T> {
        let i = self.check(n)?;
        if i < 2 {
            return Ok(T::zero());
        }
        let p = self.spf[i] as usize;
        let mut m = i;
        while m % p == 0 {
            m /= p;
        }
        Ok(if m == 1 {
            T::of_usize(p).ln()
        } else {
            T::zero()
        })
    }

    /// `Σ_{N^α < p ≤ N} 1/p`.
    pub fn mertens_tail<T: Real>(&self, n: u64, alpha: Exponent) -> Result<T> {
        self.check(n)?;
        let lo = alpha.floor_power(n) + 1;
        let mut acc = CompensatedSum::new();
        for &p in self.primes_between(lo, n) {
            acc.add(T::one() / T::of_usize(p as usize));
        }
        Ok(acc.value())
    }
}

fn estimate_prime_count(limit: usize) -> usize {
    let x = limit as f64;
    (1.3 * x / x.ln().max(1.0)) as usize + 16
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `c_q(n) = Σ_{1≤b≤q, (b,q)=1} e(bn/q)` by direct summation.
pub fn ramanujan_sum_complex<T: Real>(q: u64, n: i64) -> Complex<T> {
    assert!(q >= 1, "ramanujan_sum requires q >= 1");
    let mut acc = ComplexSum::new();
    for b in 1..=q {
        if num_integer::gcd(b, q) == 1 {
            let bn = (b as i128 * n as i128).rem_euclid(q as i128) as i64;
            acc.add(turn_rational::<T>(bn, q));
        }
    }
    acc.value()
}

/// Real part of [`ramanujan_sum_complex`]; the imaginary part vanishes.
pub fn ramanujan_sum<T: Real>(q: u64, n: i64) -> T {
    ramanujan_sum_complex::<T>(q, n).re
}
