use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rmflab::campaigns::{persist, run_campaign, summary_path};
use rmflab::config::{geometric_n_values, Experiment, ExperimentConfig, OutputFormat};
use rmflab::records::write_json;
use rmflab::verify::{run_verify, Fault};
use rmflab_core::RmfKind;

#[derive(Parser)]
#[command(name = "rmflab", version, about = "Monte Carlo experiments on random multiplicative functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid maximum of |P_N| over sqrt(log N).
    Lowerbound(CampaignArgs),
    /// Rough-part maximum over the rational discretization (Steinhaus only).
    Upperbound(CampaignArgs),
    /// Distribution of sqrt(2) Re P_N(Θ) over uniform Θ, with its KS distance.
    Clt(CampaignArgs),
    /// Largest conditional variance over the discretization (Steinhaus only).
    Variancemax(CampaignArgs),
    /// Maximum of n equicorrelated Gaussians against sqrt((2-δ) log n).
    Gaussmax(CampaignArgs),
    /// Fast invariant and inequality suite; nonzero exit on failure.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long, default_value = "steinhaus")]
    kind: RmfKind,
    #[arg(long, default_value_t = 1024)]
    n_min: usize,
    /// Defaults to --n-min.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    n_step_factor: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate this many points of the discretization instead of all of them.
    #[arg(long)]
    subsample: Option<usize>,
    /// Defaults to <experiment>.csv or <experiment>.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, env = "RMFLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "verify_report.json")]
    out: PathBuf,
    #[arg(long, env = "RMFLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, hide = true)]
    inject_fault: Option<Fault>,
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn campaign(experiment: Experiment, args: CampaignArgs) -> Result<(), String> {
    init_threads(args.threads)?;
    let n_max = args.n_max.unwrap_or(args.n_min);
    let n_values = geometric_n_values(args.n_min, n_max, args.n_step_factor).map_err(|e| e.to_string())?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let mut config = ExperimentConfig::new(experiment, args.kind, n_values, args.trials);
    config.epsilon = args.epsilon;
    config.delta = args.delta;
    config.master_seed = args.seed;
    config.subsample = args.subsample;
    config.format = format;
    config.output_path = args.out.unwrap_or_else(|| {
        let ext = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        PathBuf::from(format!("{experiment}.{ext}"))
    });
    let output = run_campaign(&config).map_err(|e| e.to_string())?;
    persist(&config, &output).map_err(|e| e.to_string())?;
    for s in &output.summary.per_n {
        println!(
            "N={:<9} {:<24} count={:<6} mean={:.6} sd={:.6} max={:.6}",
            s.n, s.statistic, s.stats.count, s.stats.mean, s.stats.sd, s.stats.max
        );
    }
    if let Some(trend) = &output.summary.trend {
        println!("max growth across N: {:.4}", trend.max_growth);
    }
    println!(
        "wrote {} and {}",
        config.output_path.display(),
        summary_path(&config.output_path).display()
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool, String> {
    init_threads(args.threads)?;
    let report = run_verify(args.inject_fault).map_err(|e| e.to_string())?;
    for c in &report.checks {
        println!("{} {:<24} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    write_json(&args.out, &report).map_err(|e| e.to_string())?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Lowerbound(a) => campaign(Experiment::LowerBound, a).map(|_| true),
        Command::Upperbound(a) => campaign(Experiment::UpperBound, a).map(|_| true),
        Command::Clt(a) => campaign(Experiment::Clt, a).map(|_| true),
        Command::Variancemax(a) => campaign(Experiment::VarianceMax, a).map(|_| true),
        Command::Gaussmax(a) => campaign(Experiment::GaussMax, a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
