use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A rational exponent `num/den` in `(0, 1)`, used for thresholds `N^α`.
///
/// Comparisons `p ≥ N^α` and `p > N^α` are decided exactly in integers,
/// so a prime sitting on the threshold is never misclassified by rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponent {
    num: u32,
    den: u32,
}

const MAX_DEN: u32 = 10_000;

impl Exponent {
    pub const SIX_SEVENTHS: Exponent = Exponent { num: 6, den: 7 };
    pub const FOUR_FIFTHS: Exponent = Exponent { num: 4, den: 5 };
    pub const ONE_FIFTH: Exponent = Exponent { num: 1, den: 5 };
    pub const ONE_HALF: Exponent = Exponent { num: 1, den: 2 };

    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || num >= den {
            return domain(format!("exponent {num}/{den} is not in (0,1)"));
        }
        let g = num_integer::gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    /// Best rational with denominator at most 10⁴ that reproduces `x` to 1e-12.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return domain(format!("exponent {x} is not in (0,1)"));
        }
        // continued fraction convergents
        let (mut h0, mut h1) = (0u64, 1u64);
        let (mut k0, mut k1) = (1u64, 0u64);
        let mut rem = x;
        for _ in 0..64 {
            let a = rem.floor();
            let ai = a as u64;
            let h2 = ai * h1 + h0;
            let k2 = ai * k1 + k0;
            if k2 > MAX_DEN as u64 {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            if (h1 as f64 / k1 as f64 - x).abs() < 1e-12 {
                return Self::new(h1 as u32, k1 as u32);
            }
            let frac = rem - a;
            if frac == 0.0 {
                break;
            }
            rem = 1.0 / frac;
        }
        domain(format!(
            "exponent {x} has no rational form with denominator <= {MAX_DEN}"
        ))
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `1 - α`.
    pub fn complement(self) -> Self {
        Self {
            num: self.den - self.num,
            den: self.den,
        }
    }

    /// `⌊n^α⌋`.
    pub fn floor_power(self, n: u64) -> u64 {
        if n <= 1 {
            return n;
        }
        let target = BigUint::from(n).pow(self.num);
        let fits = |t: u64| BigUint::from(t).pow(self.den) <= target;
        let mut t = (n as f64).powf(self.value()).floor() as u64;
        while t > 0 && !fits(t) {
            t -= 1;
        }
        while fits(t + 1) {
            t += 1;
        }
        t
    }

    /// Whether `n^α` is an integer.
    pub fn is_exact(self, n: u64) -> bool {
        let t = self.floor_power(n);
        BigUint::from(t).pow(self.den) == BigUint::from(n).pow(self.num)
    }

    /// Smallest integer `t` with `t ≥ n^α`.
    pub fn ceil_power(self, n: u64) -> u64 {
        let t = self.floor_power(n);
        if self.is_exact(n) {
            t
        } else {
            t + 1
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}
