use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use audiocons::harness::{emit_report, execute, Cache, ExperimentConfig, GroupStatus, RunArtifact, Stage};
use audiocons::transform::{default_grid, Category};

#[derive(Parser)]
#[command(name = "audiocons", version, about = "Distance-consistency diagnostics for audio embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Use the surrogate codec instead of the configured external one.
    #[arg(long, global = true)]
    skip_codec: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write transformed excerpts as WAV files.
    Transform,
    /// Compute features and embeddings into the cache.
    Encode,
    /// Write distance matrices.
    Distances,
    /// Compute consistency metrics and the long-format CSV.
    Consistency,
    /// Emit report files from the last completed run.
    Report,
    /// Full pipeline.
    Run,
    /// Print the default magnitude grids.
    Grids,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let Some(path) = &cli.config else {
        bail!("--config is required for this subcommand");
    };
    let mut config = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.seeds.root = seed;
    }
    if let Some(dir) = &cli.cache_dir {
        config.cache_dir = Some(dir.clone());
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    if cli.skip_codec {
        config.skip_codec = true;
    }
    config.validate()?;
    Ok(config)
}

fn print_grids() -> Result<()> {
    for c in Category::TRANSFORMS {
        let grid = default_grid(c)?;
        let values: Vec<String> = grid.magnitudes().iter().map(|m| format!("{m}")).collect();
        println!("{:<3} {:<8} {}", c.as_str(), c.unit(), values.join(" "));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let stage = match cli.command {
        Command::Grids => return print_grids(),
        Command::Report => {
            let config = load_config(cli)?;
            let artifact = RunArtifact::load(&config.output_dir)?;
            let files = emit_report(&artifact, &config.output_dir)?;
            println!("{}", files.consistency_csv.display());
            println!("{}", files.summary_json.display());
            for p in &files.plots {
                println!("{}", p.display());
            }
            return Ok(());
        }
        Command::Transform => Stage::Transform,
        Command::Encode => Stage::Encode,
        Command::Distances => Stage::Distances,
        Command::Consistency => Stage::Consistency,
        Command::Run => Stage::Report,
    };
    let config = load_config(cli)?;
    let cache = Cache::open(&config.cache_dir())?;
    let outcome = execute(&config, &cache, stage)?;
    for line in &outcome.log {
        eprintln!("{line}");
    }
    if let Some(a) = &outcome.artifact {
        println!("run {} -> {}", a.run_id, config.output_dir.display());
    }
    let failed = outcome.groups.iter().filter(|g| g.status == GroupStatus::Failed).count();
    if failed > 0 {
        eprintln!("{failed} group(s) failed; see run.log");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
