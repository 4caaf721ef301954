//! Rademacher and Steinhaus random multiplicative functions.
//!
//! Prime values are drawn from a counter-based generator keyed by
//! `(seed, p)`, so the value at a prime never depends on enumeration order.
//! That is what makes [`resample_above_cutoff`] reproducible: the small-prime
//! values survive untouched and the large primes get the draws a fresh
//! sample with the new seed would have produced.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::counter::CounterRng;
use crate::error::{domain, Error, Result};
use crate::ntcore::PrimeTable;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RmfKind {
    /// `f(p) = ±1`, `f(p^α) = 0` for `α ≥ 2`.
    Rademacher,
    /// `f(p)` uniform on the unit circle, completely multiplicative.
    Steinhaus,
}

impl RmfKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RmfKind::Rademacher => "rademacher",
            RmfKind::Steinhaus => "steinhaus",
        }
    }

    /// Tag byte used by the binary dump format.
    pub fn tag(self) -> u8 {
        match self {
            RmfKind::Rademacher => 0,
            RmfKind::Steinhaus => 1,
        }
    }

    fn from_tag(t: u8) -> Result<Self> {
        match t {
            0 => Ok(RmfKind::Rademacher),
            1 => Ok(RmfKind::Steinhaus),
            _ => Err(Error::Format(format!("unknown kind tag {t}"))),
        }
    }
}

impl fmt::Display for RmfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RmfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rademacher" => Ok(RmfKind::Rademacher),
            "steinhaus" => Ok(RmfKind::Steinhaus),
            other => domain(format!("unknown kind {other:?}")),
        }
    }
}

/// Values `f(p)` for every prime `p ≤ limit`.
///
/// Stored densely by `p`; entries at non-primes are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeAssignment<T> {
    kind: RmfKind,
    limit: usize,
    values: Vec<Complex<T>>,
}

impl<T: Real> PrimeAssignment<T> {
    pub fn kind(&self) -> RmfKind {
        self.kind
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `f(p)`, or `None` when `p` is not a prime within the limit.
    pub fn get(&self, p: u64) -> Option<Complex<T>> {
        let v = *self.values.get(p as usize)?;
        (v != Complex::new(T::zero(), T::zero())).then_some(v)
    }
}

fn draw<T: Real>(kind: RmfKind, rng: &mut CounterRng, p: u64) -> Complex<T> {
    match kind {
        RmfKind::Rademacher => {
            let s = if rng.word(p) >> 63 == 0 {
                T::one()
            } else {
                -T::one()
            };
            Complex::new(s, T::zero())
        }
        RmfKind::Steinhaus => {
            let angle = T::of(rng.unit(p)) * T::TAU();
            Complex::new(angle.cos(), angle.sin())
        }
    }
}

/// Independent draws `f(p)` for all primes `p ≤ limit`.
pub fn sample_prime_assignment<T: Real>(
    kind: RmfKind,
    limit: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<PrimeAssignment<T>> {
    if limit < 2 {
        return domain(format!("assignment limit {limit} < 2"));
    }
    if limit > table.limit() {
        return domain(format!(
            "assignment limit {limit} exceeds sieve limit {}",
            table.limit()
        ));
    }
    let mut rng = CounterRng::new(seed, 0);
    let mut values = vec![Complex::new(T::zero(), T::zero()); limit + 1];
    for &p in table.primes_between(2, limit as u64) {
        values[p as usize] = draw(kind, &mut rng, p as u64);
    }
    Ok(PrimeAssignment {
        kind,
        limit,
        values,
    })
}

/// A realization `f(1), …, f(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RmfValues<T> {
    kind: RmfKind,
    n: usize,
    // index 0 unused
    values: Vec<Complex<T>>,
    assignment: PrimeAssignment<T>,
    seed: u64,
}

impl<T: Real> RmfValues<T> {
    /// Sample prime values with `seed` and extend multiplicatively to `[1, n]`.
    pub fn sample(kind: RmfKind, n: usize, seed: u64, table: &PrimeTable) -> Result<Self> {
        let assignment = sample_prime_assignment(kind, n.max(2), seed, table)?;
        let mut v = extend(&assignment, n, table)?;
        v.seed = seed;
        Ok(v)
    }

    /// Wrap arbitrary coefficients `f(1..=n)` without checking multiplicativity.
    ///
    /// The assignment is read off the primes. Intended for fixtures (such as
    /// the all-ones function) and for reloading dumps.
    pub fn from_parts(
        kind: RmfKind,
        seed: u64,
        coefficients: Vec<Complex<T>>,
        table: &PrimeTable,
    ) -> Result<Self> {
        let n = coefficients.len();
        if n == 0 {
            return domain("need at least one coefficient");
        }
        if n > table.limit() {
            return domain(format!("N = {n} exceeds sieve limit {}", table.limit()));
        }
        let mut values = Vec::with_capacity(n + 1);
        values.push(Complex::new(T::zero(), T::zero()));
        values.extend(coefficients);
        let limit = n.max(2);
        let mut pv = vec![Complex::new(T::zero(), T::zero()); limit + 1];
        for &p in table.primes_between(2, n as u64) {
            pv[p as usize] = values[p as usize];
        }
        Ok(Self {
            kind,
            n,
            values,
            assignment: PrimeAssignment {
                kind,
                limit,
                values: pv,
            },
            seed,
        })
    }

    /// The all-ones coefficient sequence, a deterministic fixture.
    pub fn ones(n: usize, table: &PrimeTable) -> Result<Self> {
        Self::from_parts(
            RmfKind::Steinhaus,
            0,
            vec![Complex::new(T::one(), T::zero()); n],
            table,
        )
    }

    pub fn kind(&self) -> RmfKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &PrimeAssignment<T> {
        &self.assignment
    }

    /// `f(m)` for `1 ≤ m ≤ N`.
    #[inline]
    pub fn get(&self, m: usize) -> Complex<T> {
        debug_assert!(m >= 1 && m <= self.n);
        self.values[m]
    }

    /// `f(1), …, f(N)`.
    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.values[1..]
    }

    /// Coefficients indexed by `n`, with a zero at index 0.
    pub fn indexed(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Binary dump: magic `RMF1`, kind tag (u8), N (u64), seed (u64), then
    /// N pairs `(re, im)` as f64, all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[self.kind.tag()])?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for z in self.coefficients() {
            w.write_all(&z.re.as_f64().to_le_bytes())?;
            w.write_all(&z.im.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R, table: &PrimeTable) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let kind = RmfKind::from_tag(tag[0])?;
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let seed = u64::from_le_bytes(word);
        if n > table.limit() {
            return domain(format!("dump N = {n} exceeds sieve limit {}", table.limit()));
        }
        let mut coefficients = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            coefficients.push(Complex::new(T::of(re), T::of(im)));
        }
        Self::from_parts(kind, seed, coefficients, table)
    }
}

const MAGIC: &[u8; 4] = b"RMF1";

/// Multiplicative extension in O(N) via `f(n) = f(p^v) · f(n / p^v)`,
/// `p = spf(n)`.
pub fn extend<T: Real>(
    assignment: &PrimeAssignment<T>,
    n: usize,
    table: &PrimeTable,
) -> Result<RmfValues<T>> {
    if n == 0 {
        return domain("N must be positive");
    }
    if n > assignment.limit || n > table.limit() {
        return domain(format!(
            "N = {n} exceeds assignment limit {} or sieve limit {}",
            assignment.limit,
            table.limit()
        ));
    }
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut values = vec![zero; n + 1];
    values[1] = one;
    for i in 2..=n {
        let p = table.spf(i as u64)? as usize;
        let fp = assignment.values[p];
        let mut rest = i / p;
        let mut pv = p;
        while rest % p == 0 {
            rest /= p;
            pv *= p;
        }
        let f_pv = if pv == p {
            fp
        } else {
            match assignment.kind {
                RmfKind::Rademacher => zero,
                RmfKind::Steinhaus => values[pv / p] * fp,
            }
        };
        values[i] = if rest == 1 { f_pv } else { f_pv * values[rest] };
    }
    Ok(RmfValues {
        kind: assignment.kind,
        n,
        values,
        assignment: assignment.clone(),
        seed: 0,
    })
}

/// Keep `f(p)` for `p ≤ cutoff`, redraw every larger prime with `seed`, and
/// re-extend.
pub fn resample_above_cutoff<T: Real>(
    values: &RmfValues<T>,
    cutoff: usize,
    seed: u64,
    table: &PrimeTable,
) -> Result<RmfValues<T>> {
    if cutoff > values.n {
        return domain(format!("cutoff {cutoff} exceeds N = {}", values.n));
    }
    let mut assignment = values.assignment.clone();
    let mut rng = CounterRng::new(seed, 0);
    for &p in table.primes_between(cutoff as u64 + 1, assignment.limit as u64) {
        assignment.values[p as usize] = draw(assignment.kind, &mut rng, p as u64);
    }
    let mut out = extend(&assignment, values.n, table)?;
    out.seed = values.seed;
    Ok(out)
}
