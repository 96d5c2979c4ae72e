//! Command-line front end: composing campaigns, mate verification, score
//! inspection, record/table analysis, and entropy diagnostics.
//!
//! Exit codes: 0 success, 1 contract error (bad arguments or inputs),
//! 2 I/O or network error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use qchess_core::chess::{parse_fen, prove_mate_in_n, MateVerdict};
use qchess_core::composer::Budget;
use qchess_core::entropy::{
    EntropySource, FallbackPolicy, MixRatio, MixedSource, PseudoSource, QuantumClient,
    QuantumClientConfig, QuantumSource,
};
use qchess_core::experiment::{
    analyze_records, build_table_report, run_experiment, write_report_files, EntropyProvider,
    ExperimentPlan, SetPlan,
};
use qchess_core::stats::parse_table;

/// Environment variable overriding the quantum endpoint (flags still win).
const ENDPOINT_ENV: &str = "QCHESS_QRNG_URL";

#[derive(Parser)]
#[command(
    name = "qchess",
    version,
    about = "Compose verified chess problems under a mixed pseudo/quantum entropy supply and compare output sets statistically"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a composing campaign and write record files plus a report
    Compose(ComposeArgs),
    /// Prove or refute a forced mate for a position
    Verify(PositionArgs),
    /// Print the aesthetic breakdown of a position's proven solution
    Score(PositionArgs),
    /// Recompute the report from record files or a delimited table
    Analyze(AnalyzeArgs),
    /// Fetch bytes from a quantum endpoint and print diagnostics
    EntropyTest(EntropyTestArgs),
}

#[derive(Args)]
struct ComposeArgs {
    /// Campaign plan (JSON); built-in defaults when omitted
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Output directory for record files and reports
    #[arg(long)]
    out: PathBuf,
    /// Override the plan's base seed (makes the run reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the plan's attempt budget per instance
    #[arg(long)]
    attempts: Option<u64>,
    /// Replace the plan's sets with a single set at this quantum mix ratio
    #[arg(long)]
    mix: Option<f64>,
    /// Quantum endpoint URL (overrides environment and plan)
    #[arg(long)]
    endpoint: Option<String>,
    /// Force offline entropy (seeded simulator on the quantum side)
    #[arg(long)]
    offline: bool,
}

#[derive(Args)]
struct PositionArgs {
    /// Position in FEN, White to move
    #[arg(long)]
    fen: String,
    /// Mate-search bound in White moves (1..=5)
    #[arg(long, default_value_t = 3)]
    depth: u8,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Record files to analyze
    #[arg(long, num_args = 1.., conflicts_with = "table")]
    records: Vec<PathBuf>,
    /// Delimited table (header row of labels, one column per set)
    #[arg(long)]
    table: Option<PathBuf>,
    /// Skip malformed record lines instead of failing
    #[arg(long)]
    permissive: bool,
    /// Also write report.json / report.txt here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyTestArgs {
    /// Endpoint URL; falls back to QCHESS_QRNG_URL
    #[arg(long)]
    endpoint: Option<String>,
    /// Bytes to fetch
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Fetch block size
    #[arg(long, default_value_t = 256)]
    block: usize,
    /// Request timeout in milliseconds
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
}

/// Contract failures exit 1, I/O and network failures exit 2.
enum CliError {
    Contract(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Contract(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Contract(m) | CliError::Io(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs, not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compose(args) => compose(args),
        Command::Verify(args) => verify(args),
        Command::Score(args) => score(args),
        Command::Analyze(args) => analyze(args),
        Command::EntropyTest(args) => entropy_test(args),
    }
}

fn compose(args: ComposeArgs) -> Result<(), CliError> {
    let mut plan = match &args.plan {
        Some(path) => {
            ExperimentPlan::from_json_file(path).map_err(|e| CliError::Contract(e.to_string()))?
        }
        None => ExperimentPlan::default(),
    };

    if let Some(seed) = args.seed {
        plan.base_seed = seed;
    }
    if let Some(attempts) = args.attempts {
        plan.budget = Budget::Attempts(attempts);
    }
    if let Some(p) = args.mix {
        let ratio = MixRatio::new(p).map_err(|e| CliError::Contract(e.to_string()))?;
        plan.sets = vec![SetPlan { label: format!("Mix{:02.0}", p * 100.0), mix_ratio: ratio }];
    }

    // Endpoint precedence: flag, then environment, then the plan itself.
    let endpoint = args
        .endpoint
        .clone()
        .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|v| !v.is_empty()));
    if args.offline {
        if !matches!(plan.entropy.provider, EntropyProvider::Replay { .. }) {
            plan.entropy.provider = EntropyProvider::Simulated;
        }
    } else if let Some(endpoint) = endpoint {
        plan.entropy.provider = EntropyProvider::Http { endpoint };
    }

    let report = run_experiment(&plan, &args.out).map_err(experiment_error)?;
    print!("{}", report.render_text());
    println!("\nrecord files and report written to {}", args.out.display());
    Ok(())
}

fn verify(args: PositionArgs) -> Result<(), CliError> {
    let pos = parse_fen(&args.fen).map_err(|e| CliError::Contract(e.to_string()))?;
    let verdict =
        prove_mate_in_n(&pos, args.depth).map_err(|e| CliError::Contract(e.to_string()))?;
    match verdict {
        MateVerdict::MateIn { k, key_moves, principal_variation } => {
            println!("mate_in_{k}");
            let keys: Vec<String> = key_moves.iter().map(|m| m.to_lan()).collect();
            println!("key_moves: {}", keys.join(" "));
            let pv: Vec<String> = principal_variation.iter().map(|m| m.to_lan()).collect();
            println!("pv: {}", pv.join(" "));
        }
        MateVerdict::NoForcedMate => println!("no_forced_mate"),
    }
    Ok(())
}

fn score(args: PositionArgs) -> Result<(), CliError> {
    let pos = parse_fen(&args.fen).map_err(|e| CliError::Contract(e.to_string()))?;
    let verdict =
        prove_mate_in_n(&pos, args.depth).map_err(|e| CliError::Contract(e.to_string()))?;
    if verdict == MateVerdict::NoForcedMate {
        return Err(CliError::Contract(format!(
            "no forced mate within {} moves; nothing to score",
            args.depth
        )));
    }
    let breakdown = qchess_core::aesthetics::score(&pos, &verdict)
        .map_err(|e| CliError::Contract(e.to_string()))?;
    if let MateVerdict::MateIn { k, .. } = &verdict {
        println!("mate_in_{k}");
    }
    println!("economy: {}", breakdown.economy);
    println!("sparsity: {}", breakdown.sparsity);
    println!("theme_bonus: {}", breakdown.theme_bonus);
    println!("total: {}", breakdown.total);
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let report = if let Some(table_path) = &args.table {
        let text = std::fs::read_to_string(table_path)
            .map_err(|e| CliError::Io(format!("{}: {e}", table_path.display())))?;
        let columns = parse_table::<f64>(&text).map_err(|e| CliError::Contract(e.to_string()))?;
        build_table_report(&columns).map_err(experiment_error)?
    } else if !args.records.is_empty() {
        analyze_records(&args.records, args.permissive).map_err(experiment_error)?
    } else {
        return Err(CliError::Contract(
            "analyze needs --records <files>... or --table <file>".into(),
        ));
    };
    print!("{}", report.render_text());
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
        write_report_files(&report, out).map_err(experiment_error)?;
        println!("\nreport written to {}", out.display());
    }
    Ok(())
}

fn entropy_test(args: EntropyTestArgs) -> Result<(), CliError> {
    let endpoint = args
        .endpoint
        .clone()
        .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|v| !v.is_empty()))
        .ok_or_else(|| {
            CliError::Contract(format!("no endpoint: pass --endpoint or set {ENDPOINT_ENV}"))
        })?;
    let block = args.block.clamp(1, 1024);
    let config = QuantumClientConfig {
        endpoint_url: endpoint.clone(),
        block_size: block,
        low_watermark: 0,
        request_timeout: Duration::from_millis(args.timeout_ms),
        fallback_policy: FallbackPolicy::Fail,
    };
    let mut client = QuantumClient::new(config).map_err(|e| CliError::Contract(e.to_string()))?;

    let mut bytes: Vec<u8> = Vec::with_capacity(args.n);
    let mut latencies_ms: Vec<f64> = Vec::new();
    while bytes.len() < args.n {
        let want = block.min(args.n - bytes.len());
        let started = Instant::now();
        let chunk = client
            .take_bytes(want)
            .map_err(|e| CliError::Io(format!("fetch from {endpoint} failed: {e}")))?;
        latencies_ms.push(started.elapsed().as_secs_f64() * 1e3);
        bytes.extend(chunk);
    }

    let mean_byte = bytes.iter().map(|&b| f64::from(b)).sum::<f64>() / bytes.len() as f64;
    let distinct = bytes.iter().collect::<std::collections::HashSet<_>>().len();
    let (lo, hi) = latencies_ms
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mean_latency = latencies_ms.iter().sum::<f64>() / latencies_ms.len() as f64;

    println!("endpoint: {endpoint}");
    println!(
        "fetched: {} bytes in {} requests (block {block})",
        bytes.len(),
        client.fetch_requests
    );
    println!("latency_ms: min {lo:.1} / mean {mean_latency:.1} / max {hi:.1}");
    println!("byte_mean: {mean_byte:.2} (uniform ideal 127.50)");
    println!("distinct_values: {distinct}/256");

    // Quick mix exercise at the recommended default ratio.
    let ratio = MixRatio::new(MixRatio::DEFAULT).expect("default ratio valid");
    let mut mix = MixedSource::new(
        PseudoSource::from_seed(0xD1A6),
        QuantumSource::new(Box::new(client)),
        ratio,
        FallbackPolicy::Fail,
    );
    const DRAWS: u64 = 2000;
    for _ in 0..DRAWS {
        mix.next_unit().map_err(|e| CliError::Io(format!("mixed draw failed: {e}")))?;
    }
    let stats = mix.stats();
    println!(
        "mix_check: p {:.2}, {} draws, quantum fraction {:.4} (quantum {}, pseudo {})",
        ratio.value(),
        DRAWS,
        stats.quantum_fraction(),
        stats.quantum_draws,
        stats.pseudo_draws
    );
    Ok(())
}

fn experiment_error(e: qchess_core::experiment::ExperimentError) -> CliError {
    use qchess_core::experiment::ExperimentError::*;
    match &e {
        Io { .. } => CliError::Io(e.to_string()),
        Records(inner) => match inner {
            qchess_core::composer::RecordFileError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        },
        Entropy(inner) => match inner {
            qchess_core::entropy::EntropyError::FetchFailed(_)
            | qchess_core::entropy::EntropyError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Contract(e.to_string()),
        },
        Plan(_) | Stats(_) => CliError::Contract(e.to_string()),
    }
}
