use rmflab_core::scalar::CompensatedSum;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub threshold: Option<f64>,
    /// Fraction of values `≥ threshold`.
    pub fraction_above: Option<f64>,
}

/// Linear-interpolation quantile of sorted data (the default "type 7" rule).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl SummaryStats {
    /// `None` on empty input.
    pub fn from_values(values: &[f64], threshold: Option<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().copied().collect::<CompensatedSum<f64>>().value() / n as f64;
        let ss = values
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .collect::<CompensatedSum<f64>>()
            .value();
        let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        let fraction_above =
            threshold.map(|t| values.iter().filter(|&&x| x >= t).count() as f64 / n as f64);
        Some(Self {
            count: n,
            mean,
            sd,
            min: sorted[0],
            max: sorted[n - 1],
            q05: quantile(&sorted, 0.05),
            q50: quantile(&sorted, 0.5),
            q95: quantile(&sorted, 0.95),
            threshold,
            fraction_above,
        })
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// the standard normal.
pub fn ks_distance_normal(samples: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("valid parameters");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_type_seven() {
        let s = SummaryStats::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0], Some(3.0)).unwrap();
        assert_eq!(s.q50, 3.0);
        assert!((s.q05 - 1.2).abs() < 1e-12);
        assert!((s.q95 - 4.8).abs() < 1e-12);
        assert_eq!(s.fraction_above, Some(0.6));
        assert_eq!((s.min, s.max), (1.0, 5.0));
        assert!((s.sd - 2.5f64.sqrt()).abs() < 1e-12);
        assert!(SummaryStats::from_values(&[], None).is_none());
        let one = SummaryStats::from_values(&[2.0], None).unwrap();
        assert_eq!((one.sd, one.q05, one.q95), (0.0, 2.0, 2.0));
    }

    #[test]
    fn ks_examples() {
        assert!((ks_distance_normal(&[0.0]) - 0.5).abs() < 1e-12);
        assert!(ks_distance_normal(&[100.0]) <= 1.0);
        // quantile grid of the normal itself is close
        let normal = Normal::new(0.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..1000).map(|i| normal.inverse_cdf((i as f64 + 0.5) / 1000.0)).collect();
        assert!(ks_distance_normal(&grid) < 1e-3);
    }
}
