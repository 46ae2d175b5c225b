use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sentiscope::pipeline::{run, Command, Overrides, PipelineConfig};
use sentiscope::stats::{check_published_pairs, PublishedPair};
use sentiscope::{Error, FORMAT_VERSION, VERSION};

#[derive(Parser)]
#[command(
    name = "sentiscope",
    about = "Daily lexicon sentiment, structural breaks, lag regressions and a polarity classifier benchmark"
)]
#[command(
    disable_version_flag = true,
    subcommand_required = false,
    arg_required_else_help = true
)]
struct Cli {
    /// Print toolkit and report format versions.
    #[arg(long)]
    version: bool,

    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-document scores for every configured scorer.
    Score(RunArgs),
    /// Daily mean series, standardized series and emotion trends.
    Series(RunArgs),
    /// Breakpoint segmentations with BIC curves.
    Breaks(RunArgs),
    /// Lagged regressions of the market on each sentiment series.
    Lagreg(RunArgs),
    /// Mann-Whitney comparison of the two periods around the break.
    Periods(RunArgs),
    /// Naive Bayes and SVM benchmark on the labeled documents.
    Classify(RunArgs),
    /// Write synthetic tweets, quotes and labeled documents to the input paths.
    Simulate(RunArgs),
    /// Every report.
    All(RunArgs),
    /// Check printed (beta_std, r2) pairs for the r2 = beta_std^2 identity.
    Consistency {
        /// CSV with columns lexicon,k,beta_std,r2.
        #[arg(long)]
        pairs: PathBuf,
        /// Decimal places the figures were printed with.
        #[arg(long, default_value_t = 2)]
        decimals: u32,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory, replacing output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Classifier seed, replacing classify.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest lag, replacing lagreg.k_max.
    #[arg(long)]
    k_max: Option<usize>,
    /// Largest break count, replacing breaks.m_max.
    #[arg(long)]
    m_max: Option<usize>,
}

/// Writes a line to stdout; a closed pipe ends output quietly.
fn emit(line: &str) -> Result<(), Error> {
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run_command(command: Command, args: RunArgs) -> Result<(), Error> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    Overrides {
        out: args.out,
        seed: args.seed,
        k_max: args.k_max,
        m_max: args.m_max,
    }
    .apply(&mut cfg);
    let summary = run(command, &cfg)?;
    for f in &summary.files {
        emit(&summary.target.join(f).display().to_string())?;
    }
    if let Some(d) = summary.break_date {
        log::info!("period break date {d}");
    }
    Ok(())
}

fn consistency(pairs: PathBuf, decimals: u32) -> Result<(), Error> {
    let file = std::fs::File::open(&pairs).map_err(|_| Error::MissingPath(pairs.clone()))?;
    let rows = PublishedPair::read_csv(file)?;
    let report = check_published_pairs(&rows, decimals);
    emit(&serde_json::to_string_pretty(&report)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if cli.version {
        let _ = emit(&format!("sentiscope {VERSION} (report format {FORMAT_VERSION})"));
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.command else {
        return ExitCode::SUCCESS;
    };
    let result = match cmd {
        Cmd::Score(a) => run_command(Command::Score, a),
        Cmd::Series(a) => run_command(Command::Series, a),
        Cmd::Breaks(a) => run_command(Command::Breaks, a),
        Cmd::Lagreg(a) => run_command(Command::Lagreg, a),
        Cmd::Periods(a) => run_command(Command::Periods, a),
        Cmd::Classify(a) => run_command(Command::Classify, a),
        Cmd::Simulate(a) => run_command(Command::Simulate, a),
        Cmd::All(a) => run_command(Command::All, a),
        Cmd::Consistency { pairs, decimals } => consistency(pairs, decimals),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
