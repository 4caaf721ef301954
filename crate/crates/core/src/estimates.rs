//! Classical exponential-sum, sieve and moment bounds as executable checks.
//!
//! Each check returns a [`BoundReport`] comparing a computed quantity with the
//! bound expression taken with implicit constant one.

use std::collections::{BTreeMap, HashSet};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counter::counter_word;
use crate::error::{domain, resource, Result};
use crate::ntcore::PrimeTable;
use crate::rmf::{RmfKind, RmfValues};
use crate::scalar::{circle_distance, turn, turn_rational, CompensatedSum, ComplexSum, Real};

/// Default ceiling on `lhs/rhs` for bounds whose constant is unknown.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Whether the inequality this report documents held.
    pub holds: bool,
    pub parameters: BTreeMap<String, f64>,
}

impl BoundReport {
    fn new(lhs: f64, rhs: f64, holds: bool, parameters: &[(&str, f64)]) -> Self {
        let ratio = if rhs == 0.0 && lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            lhs,
            rhs,
            ratio,
            holds,
            parameters: parameters
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    /// `lhs ≤ rhs` with unit constant.
    fn plain(lhs: f64, rhs: f64, parameters: &[(&str, f64)]) -> Self {
        Self::new(lhs, rhs, lhs <= rhs, parameters)
    }

    pub fn within(&self, threshold: f64) -> bool {
        self.ratio.is_finite() && self.ratio < threshold
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.parameters.get(key).copied()
    }
}

fn check_limit(n: u64, table: &PrimeTable) -> Result<()> {
    if n > table.limit() as u64 {
        return domain(format!("{n} exceeds sieve limit {}", table.limit()));
    }
    Ok(())
}

/// Visits every prime power `p^k ≤ n` with `log p`.
fn for_prime_powers(n: u64, table: &PrimeTable, mut visit: impl FnMut(u64, f64)) {
    for &p in table.primes_between(2, n) {
        let p = p as u64;
        let lp = (p as f64).ln();
        let mut pk = p;
        loop {
            visit(pk, lp);
            match pk.checked_mul(p) {
                Some(next) if next <= n => pk = next,
                _ => break,
            }
        }
    }
}

/// `Σ_{n≤N} Λ(n) e(nβ)`.
pub fn lambda_exp_sum<T: Real>(n: u64, beta: f64, table: &PrimeTable) -> Result<Complex<T>> {
    check_limit(n, table)?;
    let mut acc = ComplexSum::new();
    for_prime_powers(n, table, |m, lp| {
        acc.add(turn::<T>(m as f64 * beta) * T::of(lp));
    });
    Ok(acc.value())
}

/// `Σ_{n≤N} Λ(n) e(na/q)` with phases reduced exactly.
fn lambda_exp_sum_rational(n: u64, a: i64, q: u64, table: &PrimeTable) -> Complex<f64> {
    let mut acc = ComplexSum::new();
    for_prime_powers(n, table, |m, lp| {
        let r = (m as i128 * a as i128).rem_euclid(q as i128) as i64;
        acc.add(turn_rational::<f64>(r, q) * lp);
    });
    acc.value()
}

/// `|Σ Λ(n) e(na/q)|` against `(N q^{-1/2} + N^{4/5} + N^{1/2} q^{1/2})(log N)⁴`.
pub fn davenport_report(n: u64, a: i64, q: u64, table: &PrimeTable) -> Result<BoundReport> {
    if q == 0 || n < 2 {
        return domain("need q >= 1 and N >= 2");
    }
    if num_integer::gcd(a.unsigned_abs(), q) != 1 {
        return domain(format!("gcd({a}, {q}) != 1"));
    }
    check_limit(n, table)?;
    let lhs = lambda_exp_sum_rational(n, a, q, table).norm();
    let (nf, qf) = (n as f64, q as f64);
    let rhs = (nf / qf.sqrt() + nf.powf(0.8) + (nf * qf).sqrt()) * nf.ln().powi(4);
    Ok(BoundReport::plain(
        lhs,
        rhs,
        &[("N", nf), ("a", a as f64), ("q", qf)],
    ))
}

/// `|Σ_{M'≤n≤2M} e(θ/(n+1))|` against `|θ|^{1/2} M^{-1/2} + M^{3/2} |θ|^{-1/2}`.
pub fn vdc_report(m: u64, m_prime: u64, theta: f64) -> Result<BoundReport> {
    if m == 0 {
        return domain("M must be positive");
    }
    if !(m..=2 * m).contains(&m_prime) {
        return domain(format!("M' = {m_prime} not in [{m}, {}]", 2 * m));
    }
    if theta == 0.0 || !theta.is_finite() {
        return domain("theta must be finite and nonzero");
    }
    let lhs = (m_prime..=2 * m)
        .map(|n| turn::<f64>(theta / (n + 1) as f64))
        .collect::<ComplexSum<f64>>()
        .value()
        .norm();
    let (mf, t) = (m as f64, theta.abs());
    let rhs = (t / mf).sqrt() + mf.powf(1.5) / t.sqrt();
    Ok(BoundReport::plain(
        lhs,
        rhs,
        &[("M", mf), ("M_prime", m_prime as f64), ("theta", theta)],
    ))
}

/// Primes `p ≡ a (mod q)` in `(x, x+y]` against `2y/(φ(q) log(y/q))`.
pub fn brun_titchmarsh_report(
    x: f64,
    y: f64,
    q: u64,
    a: i64,
    table: &PrimeTable,
) -> Result<BoundReport> {
    if !(x > 2.0) {
        return domain(format!("x = {x} must exceed 2"));
    }
    if q == 0 {
        return domain("q must be positive");
    }
    if !(y > q as f64) {
        return domain(format!("y = {y} must exceed q = {q}"));
    }
    let residue = a.rem_euclid(q as i64) as u64;
    if num_integer::gcd(residue, q) != 1 {
        return domain(format!("gcd({a}, {q}) != 1"));
    }
    let lo = x.floor() as u64 + 1;
    let hi = (x + y).floor() as u64;
    check_limit(hi, table)?;
    let lhs = table
        .primes_between(lo, hi)
        .iter()
        .filter(|&&p| p as u64 % q == residue)
        .count() as f64;
    let phi = table.euler_phi(q)? as f64;
    let rhs = 2.0 * y / (phi * (y / q as f64).ln());
    Ok(BoundReport::plain(
        lhs,
        rhs,
        &[("x", x), ("y", y), ("q", q as f64), ("a", a as f64)],
    ))
}

/// `Σ_{n≤N} τ_k(n)` against `N (log N)^{k-1}`; the ratio is the constant `C_k`.
pub fn divisor_sum_report(n: u64, k: u32, table: &PrimeTable) -> Result<BoundReport> {
    if n < 2 {
        return domain("N must be at least 2");
    }
    check_limit(n, table)?;
    let mut total = 0u128;
    for m in 1..=n {
        total += table.tau_k(m, k)? as u128;
    }
    let nf = n as f64;
    let rhs = nf * nf.ln().powi(k as i32 - 1);
    Ok(BoundReport::plain(
        total as f64,
        rhs,
        &[("N", nf), ("k", k as f64)],
    ))
}

/// Per-trial seed for Monte Carlo checks.
fn trial_seed(seed: u64, stream: u64, trial: usize) -> u64 {
    counter_word(seed, stream, trial as u64)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum<f64>>().value() / n;
    let ss = xs
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .collect::<CompensatedSum<f64>>()
        .value();
    let sd = if xs.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, sd / n.sqrt())
}

/// Monte Carlo `E|Σ a_n f(n)|^{2k}` against `(Σ τ_{2⌈k⌉-1}(n) |a_n|²)^k`.
///
/// `coeffs[i]` is `a_{i+1}`. Holds when `lhs − 3·stderr ≤ rhs`.
pub fn moment_bound_check(
    coeffs: &[Complex<f64>],
    k: f64,
    kind: RmfKind,
    trials: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<BoundReport> {
    if !(k >= 1.0) || !k.is_finite() {
        return domain(format!("k = {k} must be at least 1"));
    }
    if trials < 1000 {
        return domain(format!("trials = {trials} below 1000"));
    }
    if coeffs.is_empty() {
        return domain("coefficient sequence is empty");
    }
    let len = coeffs.len();
    check_limit(len as u64, table)?;
    let tau_index = 2 * k.ceil() as u32 - 1;
    let mut weight = CompensatedSum::new();
    for (i, a) in coeffs.iter().enumerate() {
        weight.add(table.tau_k(i as u64 + 1, tau_index)? as f64 * a.norm_sqr());
    }
    let rhs = weight.value().powf(k);
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = RmfValues::<f64>::sample(kind, len, trial_seed(seed, 1, t), table)?;
            let s = coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| a * f.get(i + 1))
                .collect::<ComplexSum<f64>>()
                .value();
            Ok(s.norm_sqr().powf(k))
        })
        .collect::<Result<_>>()?;
    let (lhs, se) = mean_and_stderr(&samples);
    let mut report = BoundReport::new(
        lhs,
        rhs,
        lhs - 3.0 * se <= rhs,
        &[
            ("k", k),
            ("trials", trials as f64),
            ("stderr", se),
            ("tau_index", tau_index as f64),
        ],
    );
    report.parameters.insert("kind".into(), kind.tag() as f64);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `m₁ m₄ = m₂ m₃`
    M1M4EqM2M3,
    /// `m₁ m₃ = m₂ m₄`
    M1M3EqM2M4,
}

/// Largest `r` accepted by the quadruple counts.
pub const QUADRUPLE_MAX_R: u64 = 512;

fn check_r(r: u64) -> Result<()> {
    if r == 0 {
        return domain("r must be positive");
    }
    if r > QUADRUPLE_MAX_R {
        return resource(format!("r = {r} exceeds {QUADRUPLE_MAX_R}"));
    }
    Ok(())
}

/// `#{(m₁,m₂,m₃,m₄) ∈ [1,r]⁴ : m₁≠m₂, m₃≠m₄, pairing}` by solving for `m₄`.
pub fn quadruple_count(r: u64, pairing: Pairing) -> Result<u64> {
    check_r(r)?;
    let mut count = 0u64;
    for m1 in 1..=r {
        for m2 in 1..=r {
            if m1 == m2 {
                continue;
            }
            for m3 in 1..=r {
                let (num, den) = match pairing {
                    Pairing::M1M4EqM2M3 => (m2 * m3, m1),
                    Pairing::M1M3EqM2M4 => (m1 * m3, m2),
                };
                if num % den == 0 {
                    let m4 = num / den;
                    if m4 <= r && m4 != m3 {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// The same count through `m₁ = a₁a₃, m₂ = a₁a₄, m₃ = a₂a₄, m₄ = a₂a₃`,
/// collecting images in a set since the map is not injective.
pub fn quadruple_count_vw(r: u64, pairing: Pairing) -> Result<u64> {
    check_r(r)?;
    let mut seen: HashSet<(u64, u64, u64, u64)> = HashSet::new();
    for a1 in 1..=r {
        for a2 in 1..=r {
            let cap = (r / a1).min(r / a2);
            for a3 in 1..=cap {
                for a4 in 1..=cap {
                    if a3 == a4 {
                        continue;
                    }
                    let (m1, m2, m3, m4) = (a1 * a3, a1 * a4, a2 * a4, a2 * a3);
                    // this parametrizes m₁m₃ = m₂m₄; swap the last pair otherwise
                    let quad = match pairing {
                        Pairing::M1M3EqM2M4 => (m1, m2, m3, m4),
                        Pairing::M1M4EqM2M3 => (m1, m2, m4, m3),
                    };
                    seen.insert(quad);
                }
            }
        }
    }
    Ok(seen.len() as u64)
}

/// Monte Carlo `E[Σ_{m₁≠m₂} f(m₁) conj f(m₂) · Σ_{m₃≠m₄} conj f(m₃) f(m₄)]` for
/// Steinhaus `f` on `[1, r]`, against the `m₁m₄ = m₂m₃` count.
///
/// Holds when the real part is within 4 standard errors of the count and
/// the imaginary part within 4 standard errors of zero.
pub fn orthogonality_mc(r: u64, trials: usize, seed: u64, table: &PrimeTable) -> Result<BoundReport> {
    if r > 128 {
        return resource(format!("r = {r} exceeds 128"));
    }
    if trials < 2 {
        return domain("need at least two trials");
    }
    let rhs = quadruple_count(r, Pairing::M1M4EqM2M3)? as f64;
    let len = r as usize;
    check_limit(r.max(2), table)?;
    let samples: Vec<Complex<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = RmfValues::<f64>::sample(RmfKind::Steinhaus, len, trial_seed(seed, 2, t), table)?;
            let total = f.coefficients().iter().sum::<Complex<f64>>();
            let diag: f64 = f.coefficients().iter().map(|z| z.norm_sqr()).sum();
            let x = total * total.conj() - diag;
            let y = total.conj() * total - diag;
            Ok(x * y)
        })
        .collect::<Result<_>>()?;
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let (lhs, se) = mean_and_stderr(&re);
    let (im_mean, im_se) = mean_and_stderr(&im);
    let holds = (lhs - rhs).abs() <= 4.0 * se && im_mean.abs() <= 4.0 * im_se.max(f64::EPSILON);
    Ok(BoundReport::new(
        lhs,
        rhs,
        holds,
        &[
            ("r", r as f64),
            ("trials", trials as f64),
            ("stderr", se),
            ("imag_mean", im_mean),
        ],
    ))
}

/// `|Σ_{k<L} e(kα)|` against `min(L, 1/(2‖α‖))`.
pub fn geometric_sum_report(l: u64, alpha: f64) -> BoundReport {
    let lhs = (0..l)
        .map(|k| turn::<f64>(k as f64 * alpha))
        .collect::<ComplexSum<f64>>()
        .value()
        .norm();
    let d = circle_distance(alpha);
    let rhs = if d == 0.0 {
        l as f64
    } else {
        (l as f64).min(1.0 / (2.0 * d))
    };
    let holds = lhs <= rhs * (1.0 + 1e-9) + 1e-9;
    BoundReport::new(lhs, rhs, holds, &[("L", l as f64), ("alpha", alpha)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcore::build_prime_table;

    #[test]
    fn quadruple_small_cases() {
        for p in [Pairing::M1M4EqM2M3, Pairing::M1M3EqM2M4] {
            assert_eq!(quadruple_count(1, p).unwrap(), 0);
            assert_eq!(quadruple_count(2, p).unwrap(), 2);
            assert_eq!(quadruple_count_vw(1, p).unwrap(), 0);
            assert_eq!(quadruple_count_vw(2, p).unwrap(), 2);
        }
        assert!(quadruple_count(513, Pairing::M1M3EqM2M4).is_err());
        assert!(quadruple_count(0, Pairing::M1M3EqM2M4).is_err());
    }

    #[test]
    fn brun_titchmarsh_examples() {
        let t = build_prime_table(10_000).unwrap();
        let r = brun_titchmarsh_report(10.5, 90.0, 1, 1, &t).unwrap();
        assert_eq!(r.lhs, 21.0);
        assert!(r.holds);
        let r = brun_titchmarsh_report(1000.0, 1000.0, 3, 1, &t).unwrap();
        assert!(r.holds);
        assert!(brun_titchmarsh_report(100.0, 3.0, 3, 1, &t).is_err());
        assert!(brun_titchmarsh_report(100.0, 30.0, 6, 2, &t).is_err());
    }

    #[test]
    fn geometric_examples() {
        let r = geometric_sum_report(10, 0.5);
        assert!(r.lhs < 1e-12 && r.rhs == 1.0 && r.holds);
        let r = geometric_sum_report(7, 3.0);
        assert!((r.lhs - 7.0).abs() < 1e-12 && r.rhs == 7.0 && r.holds);
    }

    #[test]
    fn vdc_rejects_bad_input() {
        assert!(vdc_report(10, 10, 0.0).is_err());
        assert!(vdc_report(10, 21, 1.0).is_err());
        assert!(vdc_report(10, 20, 5.0).unwrap().lhs <= 1.0 + 1e-12);
    }
}
