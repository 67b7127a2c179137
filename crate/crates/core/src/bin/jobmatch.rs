use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use jobmatch::batch::{batch_match, save_batch_csv};
use jobmatch::fairness::{check_alert, parity_report, summary, write_parity_csv, GroupKey, DEFAULT_MAX_DISPARITY};
use jobmatch::learning::{load_model, save_model, ForestParams};
use jobmatch::pipeline::{company_tfidf, generate_dataset, load_inputs, train_model, Inputs, TrainOptions};
use jobmatch::scoring::ScoringConfig;
use jobmatch::service::{serve, AuditLog, Dataset, MatchService, AUTH_TOKEN_ENV};
use jobmatch::synthetic::{load_pairs_csv, GenParams};

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "jobmatch", version, about = "Candidate to company matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic candidates.csv, companies.csv and labeled pairs.csv
    Generate(GenerateArgs),
    /// Train and calibrate the forest on a pairs CSV
    Train(TrainArgs),
    /// Rank companies for every candidate and write a CSV
    Batch(BatchArgs),
    /// Batch match, then report recommendation rates per group
    Audit(AuditArgs),
    /// Run the HTTP matching service
    Serve(ServeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    candidates: usize,
    #[arg(long, default_value_t = 100)]
    companies: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "data")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Random-search budget; without it the default forest settings are used
    #[arg(long)]
    search: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    companies: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV cache for addresses geocoded via GEOCODER_URL
    #[arg(long)]
    geocode_cache: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "matches.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// disability_type or education_level
    #[arg(long, default_value = "disability_type")]
    group_key: GroupKey,
    #[arg(long, default_value_t = DEFAULT_MAX_DISPARITY)]
    max_disparity: f64,
    #[arg(long, default_value = "parity.csv")]
    out: PathBuf,
    /// Exit with status 3 when an alert is raised
    #[arg(long)]
    fail_on_alert: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "audit.jsonl")]
    audit_log: PathBuf,
}

fn load_config(path: Option<&PathBuf>) -> AnyResult<ScoringConfig> {
    Ok(match path {
        Some(p) => ScoringConfig::load(p)?,
        None => ScoringConfig::default(),
    })
}

fn load(input: &InputArgs) -> AnyResult<Inputs> {
    let inputs = load_inputs(&input.candidates, &input.companies, input.geocode_cache.as_deref())?;
    for (what, report) in [("candidates", &inputs.candidate_report), ("companies", &inputs.company_report)] {
        for r in &report.rejected {
            eprintln!("{what}: line {} {}: {}", r.line, r.field, r.reason);
        }
        eprintln!("{what}: {} accepted, {} rejected", report.accepted_count, report.rejected.len());
    }
    Ok(inputs)
}

fn generate(a: GenerateArgs) -> AnyResult<ExitCode> {
    let p = GenParams { n_candidates: a.candidates, n_companies: a.companies, seed: a.seed, noise: a.noise };
    let cfg = load_config(a.config.as_ref())?;
    let files = generate_dataset(&p, &cfg, &a.out_dir)?;
    println!(
        "wrote {}, {} and {} ({} pairs)",
        files.candidates.display(),
        files.companies.display(),
        files.pairs.display(),
        files.pair_count
    );
    Ok(ExitCode::SUCCESS)
}

fn train(a: TrainArgs) -> AnyResult<ExitCode> {
    let pairs = load_pairs_csv(&a.pairs)?;
    let opts = TrainOptions { params: ForestParams::default(), search_budget: a.search, seed: a.seed, workers: a.workers };
    let (bundle, summary) = train_model(&pairs, &opts)?;
    save_model(&bundle, &a.out)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    eprintln!("model written to {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn batch(a: BatchArgs) -> AnyResult<ExitCode> {
    let cfg = load_config(a.input.config.as_ref())?;
    let inputs = load(&a.input)?;
    let tfidf = company_tfidf(&inputs.companies)?;
    let report = batch_match(&inputs.candidates, &inputs.companies, &tfidf, &cfg, a.top_k, a.workers)?;
    save_batch_csv(&report, &a.out)?;
    println!(
        "{} pairs scored in {:.2}s on {} worker(s), wrote {}",
        report.pair_count,
        report.elapsed_secs,
        report.worker_count,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn audit(a: AuditArgs) -> AnyResult<ExitCode> {
    let cfg = load_config(a.input.config.as_ref())?;
    let inputs = load(&a.input)?;
    let tfidf = company_tfidf(&inputs.companies)?;
    let report = batch_match(&inputs.candidates, &inputs.companies, &tfidf, &cfg, a.top_k, a.workers)?;
    let results: Vec<_> = report.all_matches().cloned().collect();
    let parity = parity_report(&results, &inputs.candidates, a.group_key)?;
    let alerts = check_alert(&parity, a.max_disparity)?;
    write_parity_csv(&parity, std::fs::File::create(&a.out)?)?;
    println!("{}", summary(&parity, &alerts));
    Ok(if a.fail_on_alert && !alerts.is_empty() { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn serve_cmd(a: ServeArgs) -> AnyResult<ExitCode> {
    let token = match std::env::var(AUTH_TOKEN_ENV) {
        Ok(t) if !t.is_empty() => t,
        _ => return Err(format!("{AUTH_TOKEN_ENV} must be set to a non-empty token").into()),
    };
    let cfg = load_config(a.input.config.as_ref())?;
    let inputs = load(&a.input)?;
    let service = MatchService::new(cfg, AuditLog::open(&a.audit_log)?)?;
    service.load_dataset(Dataset::build(inputs.candidates, inputs.companies)?);
    if let Some(path) = &a.model {
        service.load_model(load_model(path)?);
    }
    let addr = SocketAddr::new(a.bind, a.port);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve(addr, Arc::new(service), &token))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Batch(a) => batch(a),
        Command::Audit(a) => audit(a),
        Command::Serve(a) => serve_cmd(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
