//! `symab`: batch front end for computing, relating and learning from
//! families of symmetry-induced partitions.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "symab", version, about = "Hierarchies of partitions induced by symmetry generators")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the partition family of a generator set and its hierarchy.
    Generate(GenerateArgs),
    /// Compare two partition files.
    Relate(RelateArgs),
    /// Run the teacher/student rule learner on a chord corpus.
    Learn(LearnArgs),
    /// Print the concept labels of every chord in a corpus.
    Label(LabelArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Dimension of the lattice (standard generators; default 2).
    #[arg(long)]
    pub n: Option<usize>,
    /// Lower window bound on every axis (default -tau).
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<i64>,
    /// Upper window bound on every axis (default tau).
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<i64>,
    /// Largest circulator period of the standard generators (default 2).
    #[arg(long)]
    pub tau: Option<u32>,
    /// Repeats needed before an expansion search stops.
    #[arg(long, default_value_t = 1)]
    pub delta_k: usize,
    /// Largest expansion factor searched.
    #[arg(long, default_value_t = 6)]
    pub max_k: usize,
    /// Skip subsets mixing circulator periods (default).
    #[arg(long, overrides_with = "no_prune")]
    pub prune: bool,
    /// Compute every subset.
    #[arg(long, overrides_with = "prune")]
    pub no_prune: bool,
    /// Fail when any entry is flagged approximate.
    #[arg(long)]
    pub strict: bool,
    /// Output directory.
    #[arg(long, default_value = "symab-out")]
    pub out: PathBuf,
    /// Generator set JSON file instead of the standard set.
    #[arg(long)]
    pub generators: Option<PathBuf>,
    /// Format of the hierarchy export.
    #[arg(long, value_enum, default_value_t = DagFormat::Dot)]
    pub format: DagFormat,
    /// Allow runs above the desk-scale work limit; alone, selects
    /// n = 4, tau = 12 on [-12, 12].
    #[arg(long)]
    pub full_run: bool,
    /// Report the schedule without computing.
    #[arg(long)]
    pub dry_run: bool,
    /// Fix the expansion factor from a search on [-tau, tau].
    #[arg(long)]
    pub calibrate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DagFormat {
    Dot,
    Json,
}

#[derive(Args, Debug)]
pub struct RelateArgs {
    pub p: PathBuf,
    pub q: PathBuf,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    /// Chord file: comma-separated MIDI numbers, one chord per line.
    #[arg(long)]
    pub chords: PathBuf,
    /// Family directory written by `generate`.
    #[arg(long)]
    pub family: PathBuf,
    /// Largest number of rules.
    #[arg(long, default_value_t = 10)]
    pub max_rules: usize,
    /// Stop once the widest gap (bits) is below this.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Offer the finest partition to the teacher as well.
    #[arg(long)]
    pub include_finest: bool,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub range_lo: i64,
    #[arg(long, default_value_t = 127, allow_negative_numbers = true)]
    pub range_hi: i64,
    /// Output directory for `trace.jsonl`.
    #[arg(long, default_value = "symab-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct LabelArgs {
    #[arg(long)]
    pub chords: PathBuf,
    /// Voices per chord.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub range_lo: i64,
    #[arg(long, default_value_t = 127, allow_negative_numbers = true)]
    pub range_hi: i64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Relate(args) => commands::relate(&args),
        Command::Learn(args) => commands::learn(&args),
        Command::Label(args) => commands::label(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
