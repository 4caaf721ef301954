//! Fast self-check of the arithmetic, the random model, the evaluators and
//! the inequality reports. Runs in a few seconds.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmflab_core::estimates::{
    brun_titchmarsh_report, davenport_report, divisor_sum_report, geometric_sum_report,
    moment_bound_check, orthogonality_mc, quadruple_count, quadruple_count_vw, vdc_report,
    Pairing, DEFAULT_RATIO_THRESHOLD,
};
use rmflab_core::expsum::{eval_grid_fft, eval_point, CoefficientFilter};
use rmflab_core::ntcore::ramanujan_sum;
use rmflab_core::variance::{conditional_variance, rewrite_by_r};
use rmflab_core::{build_prime_table, Exponent, PrimeTable, RmfKind, RmfValues, VarianceSpec};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Deliberate defects used to show that the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// `τ_k(n)` reported one too large for `n > 1`.
    TauKOffByOne,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tau-k-off-by-one" => Ok(Fault::TauKOffByOne),
            other => Err(format!("unknown fault {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Worst observed ratio, for inequality checks.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Suite {
    table: PrimeTable,
    fault: Option<Fault>,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn tau(&self, n: u64, k: u32) -> Result<u64> {
        let t = self.table.tau_k(n, k)?;
        Ok(match self.fault {
            Some(Fault::TauKOffByOne) if n > 1 => t + 1,
            _ => t,
        })
    }

    fn push(&mut self, name: &str, passed: bool, detail: String, ratio: Option<f64>) {
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            detail,
            ratio,
        });
    }

    /// Worst ratio over a family of reports; passes when all are within the threshold.
    fn ratios(&mut self, name: &str, reports: &[rmflab_core::estimates::BoundReport]) {
        let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let ok = reports.iter().all(|r| r.within(DEFAULT_RATIO_THRESHOLD));
        self.push(name, ok, format!("{} reports, worst ratio {worst:.4}", reports.len()), Some(worst));
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn run_verify(fault: Option<Fault>) -> Result<VerifyReport> {
    let mut s = Suite {
        table: build_prime_table(1_000_000)?,
        fault,
        checks: Vec::new(),
    };

    // arithmetic
    let mut bad = 0;
    for n in 1..=10_000u64 {
        if s.table.factorize(n)?.product() != n {
            bad += 1;
        }
    }
    s.push("factorize_reconstructs", bad == 0, format!("{bad} failures up to 10^4"), None);

    let mut bad = 0;
    for k in 1..=5 {
        for m in 1..=100u64 {
            for n in 1..=100u64 {
                if gcd(m, n) == 1 && s.tau(m * n, k)? != s.tau(m, k)? * s.tau(n, k)? {
                    bad += 1;
                }
            }
        }
    }
    s.push("tau_k_multiplicative", bad == 0, format!("{bad} coprime pairs disagree"), None);

    let mut bad = 0;
    for n in 1..=500u64 {
        let divisors = (1..=n).filter(|d| n % d == 0).count() as u64;
        let triples: u64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| (1..=n / d).filter(|e| (n / d) % e == 0).count() as u64)
            .sum();
        if s.tau(n, 1)? != 1 || s.tau(n, 2)? != divisors || s.tau(n, 3)? != triples {
            bad += 1;
        }
    }
    s.push("tau_k_enumeration", bad == 0, format!("{bad} of 500 disagree"), None);

    let mut bad = 0;
    for q in 1..=500u64 {
        let brute = (1..=q).filter(|&a| gcd(a, q) == 1).count() as u64;
        if s.table.euler_phi(q)? != brute {
            bad += 1;
        }
    }
    s.push("euler_phi", bad == 0, format!("{bad} of 500 disagree"), None);

    let mut worst = 0.0f64;
    for q in 1..=120u64 {
        for n in -120i64..=120 {
            let c: f64 = ramanujan_sum(q, n);
            let bound = gcd(n.unsigned_abs(), q).max(if n == 0 { q } else { 1 }) as f64;
            worst = worst.max(c.abs() / bound);
        }
    }
    s.push("ramanujan_bound", worst <= 1.0 + 1e-9, format!("max |c_q(n)|/gcd = {worst:.6}"), Some(worst));

    let tail: f64 = s.table.mertens_tail(1_000_000, Exponent::FOUR_FIFTHS)?;
    let expected = (5.0f64 / 4.0).ln();
    s.push(
        "mertens_tail",
        (tail - expected).abs() < 0.02,
        format!("sum 1/p over [N^(4/5), N] = {tail:.5}, log(5/4) = {expected:.5}"),
        None,
    );

    // random model
    let mut bad = 0;
    for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
        let f = RmfValues::<f64>::sample(kind, 10_000, 11, &s.table)?;
        for m in 1..=100usize {
            for n in 1..=10_000 / m {
                if gcd(m as u64, n as u64) == 1 && (f.get(m * n) - f.get(m) * f.get(n)).norm() > 1e-12 {
                    bad += 1;
                }
            }
        }
        for n in 1..=10_000usize {
            let z = f.get(n);
            let sf = s.table.is_squarefree(n as u64)?;
            let ok = match kind {
                RmfKind::Steinhaus => (z.norm() - 1.0).abs() < 1e-12,
                RmfKind::Rademacher if sf => z.im == 0.0 && z.re.abs() == 1.0,
                RmfKind::Rademacher => z == Complex::new(0.0, 0.0),
            };
            if !ok {
                bad += 1;
            }
        }
    }
    s.push("rmf_structure", bad == 0, format!("{bad} violations up to 10^4"), None);

    // evaluators
    let mut worst = 0.0f64;
    for (i, n) in [64usize, 257, 1000].into_iter().enumerate() {
        let f = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, 100 + i as u64, &s.table)?;
        let grid = eval_grid_fft(&f, CoefficientFilter::All, 4 * n + 3, &s.table)?;
        for j in (0..grid.m).step_by(grid.m / 17 + 1) {
            let direct = eval_point(&f, CoefficientFilter::All, grid.theta(j), &s.table)?;
            worst = worst.max((grid.values[j] - direct).norm());
        }
        let energy: f64 = grid.values.iter().map(|z| z.norm_sqr()).sum::<f64>() / grid.m as f64;
        worst = worst.max((energy - 1.0).abs());
    }
    s.push("fft_matches_direct", worst < 1e-9, format!("max deviation {worst:.3e}"), Some(worst));

    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
        for _ in 0..10 {
            let n = rng.random_range(100..20_000usize);
            let f = RmfValues::<f64>::sample(kind, n, rng.random(), &s.table)?;
            let theta: f64 = rng.random();
            let a: f64 = conditional_variance(&f, theta, VarianceSpec::upper_bound(kind), &s.table)?;
            let b: f64 = rewrite_by_r(&f, theta, &s.table)?;
            worst = worst.max((a - b).abs() / a.abs().max(1e-300));
        }
    }
    s.push("variance_rewrite", worst < 1e-12, format!("max relative gap {worst:.3e}"), Some(worst));

    // counting and inequalities
    let mut bad = 0;
    for r in [1u64, 2, 5, 16, 40] {
        for pairing in [Pairing::M1M4EqM2M3, Pairing::M1M3EqM2M4] {
            if quadruple_count(r, pairing)? != quadruple_count_vw(r, pairing)? {
                bad += 1;
            }
        }
    }
    s.push("quadruple_counts", bad == 0, format!("{bad} disagreements"), None);

    let mut reports = Vec::new();
    for n in [1_000u64, 100_000] {
        for q in [2u64, 3, 7, 30] {
            for a in 1..q as i64 {
                if gcd(a as u64, q) == 1 {
                    reports.push(davenport_report(n, a, q, &s.table)?);
                }
            }
        }
    }
    s.ratios("davenport", &reports);

    let reports = (1..=20)
        .map(|i| vdc_report(50 * i, 75 * i, 0.1 + 0.013 * i as f64))
        .collect::<rmflab_core::Result<Vec<_>>>()?;
    s.ratios("van_der_corput", &reports);

    let mut reports = Vec::new();
    for (x, y) in [(1000.0, 200.0), (100_000.0, 5_000.0), (500_000.0, 50_000.0)] {
        for (q, a) in [(1u64, 0i64), (3, 1), (10, 7)] {
            reports.push(brun_titchmarsh_report(x, y, q, a, &s.table)?);
        }
    }
    s.ratios("brun_titchmarsh", &reports);

    let reports: Vec<_> = (1..200)
        .map(|i| geometric_sum_report(1 + 7 * i, (i as f64 * 0.618_034) % 1.0))
        .collect();
    let all = reports.iter().all(|r| r.holds);
    let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    s.push("geometric_sum", all, format!("worst ratio {worst:.4}"), Some(worst));

    let report = divisor_sum_report(10_000, 3, &s.table)?;
    s.push(
        "divisor_sum_constant",
        report.ratio.is_finite() && report.ratio > 0.0,
        format!("C_3 = {:.4}", report.ratio),
        Some(report.ratio),
    );

    let ones = vec![Complex::new(1.0, 0.0); 101];
    let mut reports = Vec::new();
    for kind in [RmfKind::Steinhaus, RmfKind::Rademacher] {
        for k in [1.0, 2.0, 3.0] {
            reports.push(moment_bound_check(&ones, k, kind, 2000, 9, &s.table)?);
        }
    }
    let all = reports.iter().all(|r| r.holds);
    let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    s.push("moment_bound", all, format!("worst ratio {worst:.4}"), Some(worst));

    let report = orthogonality_mc(8, 20_000, 3, &s.table)?;
    s.push(
        "orthogonality",
        report.holds,
        format!("E|Σ f(m)|^4 off-diagonal {:.2} vs count {:.0}", report.lhs, report.rhs),
        Some(report.ratio),
    );

    let f = RmfValues::<f64>::sample(RmfKind::Steinhaus, 5000, 1, &s.table)?;
    let grid = eval_grid_fft(&f, CoefficientFilter::All, (4.0 * PI * 5000.0).ceil() as usize, &s.table)?;
    s.push(
        "grid_spacing",
        (grid.m as f64) >= 4.0 * PI * 5000.0,
        format!("grid of {} points", grid.m),
        None,
    );

    let passed = s.checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        passed,
        checks: s.checks,
    })
}
