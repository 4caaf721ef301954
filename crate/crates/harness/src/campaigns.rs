//! Monte Carlo campaigns. Trials run in parallel; records are sorted by
//! `(N, trial)` before anything is aggregated or written, so the output
//! does not depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rmflab_core::counter::{counter_word, CounterRng};
use rmflab_core::expsum::{
    build_discretization, build_theta_set_a, default_q, eval_many, eval_rough_factored,
    max_modulus, subsample_discretization, CoefficientFilter, DiscretizationPoint,
};
use rmflab_core::variance::max_variance_over_d;
use rmflab_core::{build_prime_table, Error, Exponent, PrimeTable, RmfKind, RmfValues, VarianceSpec};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::records::{sort_records, write_json, write_records, TrialRecord};
use crate::seeds::{derive_seed, scan_collisions};
use crate::stats::{ks_distance_normal, SummaryStats};

pub const STAT_LOWER: &str = "max_over_sqrt_log";
pub const STAT_UPPER: &str = "rough_max_normalized";
pub const STAT_VARIANCE: &str = "variance_max_normalized";
pub const STAT_CLT_SAMPLE: &str = "sqrt2_re";
pub const STAT_KS: &str = "ks_distance";
pub const STAT_GAUSS: &str = "max";

/// Lower-bound constant: `4/29` (Steinhaus) or `4√6/(29π)` (Rademacher).
pub fn lower_bound_constant(kind: RmfKind) -> f64 {
    match kind {
        RmfKind::Steinhaus => 4.0 / 29.0,
        RmfKind::Rademacher => 4.0 * 6f64.sqrt() / (29.0 * PI),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistic: String,
    pub stats: SummaryStats,
}

/// Per-N maxima of a normalized statistic and their largest growth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub per_n_max: Vec<(usize, f64)>,
    /// `max_{i<j} s_j / s_i`.
    pub max_growth: f64,
    pub within_factor_two: bool,
    pub non_increasing: bool,
}

impl Trend {
    pub fn from_maxima(per_n_max: Vec<(usize, f64)>) -> Self {
        let mut max_growth = 0.0f64;
        for i in 0..per_n_max.len() {
            for j in i + 1..per_n_max.len() {
                max_growth = max_growth.max(per_n_max[j].1 / per_n_max[i].1);
            }
        }
        let non_increasing = per_n_max.windows(2).all(|w| w[1].1 <= w[0].1);
        Self {
            within_factor_two: max_growth <= 2.0,
            per_n_max,
            max_growth,
            non_increasing,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub experiment: Experiment,
    pub kind: String,
    pub config: ExperimentConfig,
    pub per_n: Vec<NSummary>,
    pub trend: Option<Trend>,
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct CampaignOutput {
    pub records: Vec<TrialRecord>,
    pub summary: CampaignSummary,
}

/// Per-(N, statistic) summaries, recomputed from records alone.
pub fn summarize(records: &[TrialRecord], thresholds: &BTreeMap<String, f64>) -> Vec<NSummary> {
    let mut groups: BTreeMap<(usize, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.n, r.statistic.clone()))
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .filter_map(|((n, statistic), values)| {
            let t = thresholds.get(&statistic).copied();
            SummaryStats::from_values(&values, t).map(|stats| NSummary { n, statistic, stats })
        })
        .collect()
}

/// Per-N maximum of `statistic` across trials.
pub fn per_n_max(records: &[TrialRecord], statistic: &str) -> Vec<(usize, f64)> {
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.statistic == statistic) {
        let e = out.entry(r.n).or_insert(f64::NEG_INFINITY);
        *e = e.max(r.value);
    }
    out.into_iter().collect()
}

fn expect(config: &ExperimentConfig, experiment: Experiment) -> Result<()> {
    if config.experiment != experiment {
        return Err(HarnessError::Config(format!(
            "config is for {}, not {experiment}",
            config.experiment
        )));
    }
    config.validate()
}

fn campaign_table(config: &ExperimentConfig) -> Result<PrimeTable> {
    let limit = config.n_values.iter().copied().max().unwrap_or(2).max(2);
    Ok(build_prime_table(limit)?)
}

fn tasks(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |t| (n, t)))
        .collect()
}

fn finish(
    config: &ExperimentConfig,
    mut records: Vec<TrialRecord>,
    thresholds: BTreeMap<String, f64>,
    trend_statistic: Option<&str>,
    extra: BTreeMap<String, f64>,
) -> CampaignOutput {
    sort_records(&mut records);
    let per_n = summarize(&records, &thresholds);
    let trend = trend_statistic.map(|s| Trend::from_maxima(per_n_max(&records, s)));
    CampaignOutput {
        summary: CampaignSummary {
            experiment: config.experiment,
            kind: kind_label(config),
            config: config.clone(),
            per_n,
            trend,
            extra,
        },
        records,
    }
}

fn kind_label(config: &ExperimentConfig) -> String {
    match config.experiment {
        Experiment::GaussMax => "gaussian".into(),
        _ => config.kind.as_str().into(),
    }
}

fn record(
    config: &ExperimentConfig,
    n: usize,
    trial: usize,
    seed: u64,
    statistic: &str,
    value: f64,
    aux: &[(&str, f64)],
) -> TrialRecord {
    TrialRecord {
        experiment: config.experiment,
        kind: kind_label(config),
        n,
        trial,
        seed,
        statistic: statistic.into(),
        value,
        aux: aux.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    }
}

/// Grid maximum of `|P_N|` over `ceil(4πN)` points divided by `√(log N)`.
pub fn run_lower_bound(config: &ExperimentConfig) -> Result<CampaignOutput> {
    expect(config, Experiment::LowerBound)?;
    scan_collisions(config.master_seed, &config.n_values, config.trials)?;
    let table = campaign_table(config)?;
    let records = tasks(config)
        .par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(config.master_seed, n, t);
            let v = RmfValues::<f64>::sample(config.kind, n, seed, &table)?;
            let mm = max_modulus(&v, CoefficientFilter::All, 4.0 * PI, &table)?;
            let ratio = mm.magnitude / (n as f64).ln().sqrt();
            Ok(record(config, n, t, seed, STAT_LOWER, ratio, &[("theta_star", mm.theta_star)]))
        })
        .collect::<Result<Vec<_>>>()?;
    let c = lower_bound_constant(config.kind);
    let thresholds = [(STAT_LOWER.to_string(), c)].into_iter().collect();
    let extra = [("constant".to_string(), c)].into_iter().collect();
    Ok(finish(config, records, thresholds, None, extra))
}

/// `𝒟` for one trial: complete, or `k` points drawn with a seed split off
/// the trial seed.
pub fn trial_points(n: usize, subsample: Option<usize>, seed: u64) -> Result<Vec<DiscretizationPoint>> {
    let q = default_q(n);
    Ok(match subsample {
        Some(k) => subsample_discretization(n, q, k, counter_word(seed, 1, 0))?,
        None => build_discretization(n, q)?,
    })
}

/// `max_{θ ∈ points} |N^{-1/2} Σ_{P(n) ≥ N^{4/5}} f(n) e(nθ)|`, ties to the smallest θ.
pub fn rough_max_over(
    values: &RmfValues<f64>,
    points: &[DiscretizationPoint],
    table: &PrimeTable,
) -> Result<(f64, f64)> {
    let scored = points
        .par_iter()
        .map(|p| {
            eval_rough_factored(values, Exponent::FOUR_FIFTHS, p.theta, table)
                .map(|z| (p.theta, z.norm()))
        })
        .collect::<rmflab_core::Result<Vec<_>>>()?;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for (theta, r) in scored {
        if r > best.1 || (r == best.1 && theta < best.0) {
            best = (theta, r);
        }
    }
    Ok(best)
}

fn steinhaus_only(config: &ExperimentConfig) -> Result<()> {
    if config.kind != RmfKind::Steinhaus {
        return Err(Error::Unsupported(format!(
            "{} supports only the Steinhaus model; the Rademacher analogue is an open problem",
            config.experiment
        ))
        .into());
    }
    Ok(())
}

/// Rough-part maximum over `𝒟` normalized by `(log N)^{7/4+ε}`.
pub fn run_upper_bound(config: &ExperimentConfig) -> Result<CampaignOutput> {
    expect(config, Experiment::UpperBound)?;
    steinhaus_only(config)?;
    scan_collisions(config.master_seed, &config.n_values, config.trials)?;
    let table = campaign_table(config)?;
    let exponent = 1.75 + config.epsilon;
    let records = tasks(config)
        .par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(config.master_seed, n, t);
            let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, seed, &table)?;
            let pts = trial_points(n, config.subsample, seed)?;
            let (theta, m) = rough_max_over(&v, &pts, &table)?;
            let stat = m / (n as f64).ln().powf(exponent);
            Ok(record(
                config,
                n,
                t,
                seed,
                STAT_UPPER,
                stat,
                &[
                    ("theta_star", theta),
                    ("points_evaluated", pts.len() as f64),
                    ("epsilon", config.epsilon),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(config, records, BTreeMap::new(), Some(STAT_UPPER), BTreeMap::new()))
}

/// One `f` per N (trial index `trials`), `trials` uniform frequencies
/// (trial indices `0..trials`), and the KS distance of `√2·Re P_N(Θ)` from
/// the standard normal, stored at trial index `trials`.
pub fn run_clt(config: &ExperimentConfig) -> Result<CampaignOutput> {
    expect(config, Experiment::Clt)?;
    scan_collisions(config.master_seed, &config.n_values, config.trials + 1)?;
    let table = campaign_table(config)?;
    let num_theta = config.trials;
    let mut records = Vec::new();
    for &n in &config.n_values {
        let f_seed = derive_seed(config.master_seed, n, num_theta);
        let v = RmfValues::<f64>::sample(config.kind, n, f_seed, &table)?;
        let seeds: Vec<u64> = (0..num_theta)
            .map(|i| derive_seed(config.master_seed, n, i))
            .collect();
        let thetas: Vec<f64> = seeds.iter().map(|&s| CounterRng::new(s, 0).unit(0)).collect();
        let values = eval_many(&v, CoefficientFilter::All, &thetas, &table)?;
        let xs: Vec<f64> = values.iter().map(|z| 2f64.sqrt() * z.re).collect();
        for i in 0..num_theta {
            records.push(record(config, n, i, seeds[i], STAT_CLT_SAMPLE, xs[i], &[("theta", thetas[i])]));
        }
        records.push(record(config, n, num_theta, f_seed, STAT_KS, ks_distance_normal(&xs), &[]));
    }
    Ok(finish(config, records, BTreeMap::new(), None, BTreeMap::new()))
}

/// Largest upper-bound conditional variance over `𝒟` normalized by
/// `(log N)^{5/2+ε}`.
pub fn run_variance_max(config: &ExperimentConfig) -> Result<CampaignOutput> {
    expect(config, Experiment::VarianceMax)?;
    steinhaus_only(config)?;
    scan_collisions(config.master_seed, &config.n_values, config.trials)?;
    let table = campaign_table(config)?;
    let exponent = 2.5 + config.epsilon;
    let spec = VarianceSpec::upper_bound(RmfKind::Steinhaus);
    let records = tasks(config)
        .par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(config.master_seed, n, t);
            let v = RmfValues::<f64>::sample(RmfKind::Steinhaus, n, seed, &table)?;
            let pts = trial_points(n, config.subsample, seed)?;
            let vm = max_variance_over_d(&v, &pts, spec, None, 0, &table)?;
            let stat = vm.value / (n as f64).ln().powf(exponent);
            Ok(record(
                config,
                n,
                t,
                seed,
                STAT_VARIANCE,
                stat,
                &[
                    ("theta_star", vm.theta_star),
                    ("points_evaluated", vm.evaluated as f64),
                    ("epsilon", config.epsilon),
                ],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(config, records, BTreeMap::new(), Some(STAT_VARIANCE), BTreeMap::new()))
}

/// How the maximum of `n` standard normals is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussSampler {
    /// `n` explicit draws.
    Direct,
    /// One draw from the exact law of the maximum, `Φ^{-1}(U^{1/n})`.
    OrderStatistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussMaxReport {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    /// `√((2−δ) log n)`
    pub threshold: f64,
    /// Empirical `P(max_i X_i ≤ threshold)`.
    pub probability: f64,
    pub stderr: f64,
    pub maxima: SummaryStats,
}

/// Equicorrelated maxima `max_i (√ε Z₀ + √(1−ε) Z_i)`, without the
/// parameter-window check of [`run_gauss_max`].
pub fn simulate_gauss_max(
    n: usize,
    epsilon: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    sampler: GaussSampler,
) -> Result<(GaussMaxReport, Vec<f64>)> {
    if n == 0 || trials == 0 {
        return Err(HarnessError::Config("n and trials must be positive".into()));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon = {epsilon} not in [0, 1)")).into());
    }
    if !(delta < 2.0) {
        return Err(Error::Domain(format!("delta = {delta} must be below 2")).into());
    }
    let normal = Normal::new(0.0, 1.0).expect("valid parameters");
    let (a, b) = (epsilon.sqrt(), (1.0 - epsilon).sqrt());
    let maxima: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n, t));
            let z0: f64 = rng.sample(StandardNormal);
            let top = match sampler {
                GaussSampler::Direct => (0..n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .fold(f64::NEG_INFINITY, f64::max),
                GaussSampler::OrderStatistic => {
                    // U^{1/n} = 1 - s with s = -expm1(ln U / n), and Φ^{-1}(1 - s) = -Φ^{-1}(s)
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let s = -(u.ln() / n as f64).exp_m1();
                    if s <= 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        -normal.inverse_cdf(s)
                    }
                }
            };
            a * z0 + b * top
        })
        .collect();
    let threshold = ((2.0 - delta) * (n as f64).ln()).sqrt();
    let below = maxima.iter().filter(|&&m| m <= threshold).count() as f64;
    let p = below / trials as f64;
    let report = GaussMaxReport {
        n,
        epsilon,
        delta,
        trials,
        threshold,
        probability: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        maxima: SummaryStats::from_values(&maxima, Some(threshold)).expect("nonempty"),
    };
    Ok((report, maxima))
}

/// Probability that the maximum of `n` equicorrelated standard normals stays
/// below `√((2−δ) log n)`. Requires `100ε ≤ δ ≤ 1/100`.
pub fn run_gauss_max(
    n: usize,
    epsilon: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<GaussMaxReport> {
    check_gauss_window(epsilon, delta)?;
    simulate_gauss_max(n, epsilon, delta, trials, seed, GaussSampler::OrderStatistic).map(|r| r.0)
}

fn check_gauss_window(epsilon: f64, delta: f64) -> Result<()> {
    if !(delta >= 100.0 * epsilon && delta <= 0.01) {
        return Err(Error::Domain(format!(
            "delta = {delta} outside [100·epsilon, 1/100] = [{}, 0.01]",
            100.0 * epsilon
        ))
        .into());
    }
    Ok(())
}

/// [`run_gauss_max`] for every `n` in the config, one record per trial.
pub fn run_gauss_max_campaign(config: &ExperimentConfig) -> Result<CampaignOutput> {
    expect(config, Experiment::GaussMax)?;
    check_gauss_window(config.epsilon, config.delta)?;
    let mut records = Vec::new();
    let mut extra = BTreeMap::new();
    for &n in &config.n_values {
        let (report, maxima) = simulate_gauss_max(
            n,
            config.epsilon,
            config.delta,
            config.trials,
            config.master_seed,
            GaussSampler::OrderStatistic,
        )?;
        extra.insert(format!("probability_n{n}"), report.probability);
        for (t, &m) in maxima.iter().enumerate() {
            records.push(record(
                config,
                n,
                t,
                derive_seed(config.master_seed, n, t),
                STAT_GAUSS,
                m,
                &[
                    ("threshold", report.threshold),
                    ("epsilon", config.epsilon),
                    ("delta", config.delta),
                ],
            ));
        }
    }
    Ok(finish(config, records, BTreeMap::new(), None, extra))
}

/// Fraction of `θ ∈ 𝒜` where the smooth part `P(n) < N^{6/7}` has modulus
/// below `(log N)^{1/10}`.
pub fn smooth_part_fraction(values: &RmfValues<f64>, table: &PrimeTable) -> Result<f64> {
    let set = build_theta_set_a(values.n(), table)?;
    let filter = CoefficientFilter::SmoothAtMost(Exponent::SIX_SEVENTHS);
    let zs = eval_many(values, filter, &set.thetas, table)?;
    let bound = (values.n() as f64).ln().powf(0.1);
    let small = zs.iter().filter(|z| z.norm() < bound).count();
    Ok(small as f64 / zs.len().max(1) as f64)
}

pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignOutput> {
    match config.experiment {
        Experiment::LowerBound => run_lower_bound(config),
        Experiment::UpperBound => run_upper_bound(config),
        Experiment::Clt => run_clt(config),
        Experiment::VarianceMax => run_variance_max(config),
        Experiment::GaussMax => run_gauss_max_campaign(config),
        Experiment::Verify => Err(HarnessError::Config("verify is not a campaign".into())),
    }
}

/// `results.csv` → `results.summary.json`.
pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "campaign".into());
    output.with_file_name(format!("{stem}.summary.json"))
}

/// Writes records to `config.output_path` and the summary beside it.
pub fn persist(config: &ExperimentConfig, output: &CampaignOutput) -> Result<()> {
    write_records(&config.output_path, config.format, config.experiment, &output.records)?;
    write_json(&summary_path(&config.output_path), &output.summary)
}
