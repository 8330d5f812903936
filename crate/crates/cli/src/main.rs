//! `influence` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for bad input data or
//! config, 3 for internal failures (including output verification).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use influence_core::cluster::{fit, ClusterParams};
use influence_core::report::{
    cluster_outputs, read_numeric_table, write_influence_report, ReportOptions, RunManifest, OutputSet,
};
use influence_core::search::pipeline::{run_pipeline, PipelineConfig};
use influence_core::synth::{fixture_files, SynthParams, DEFAULT_HOUSEHOLDS, DEFAULT_SEED};
use influence_core::Error;

#[derive(Debug, Parser)]
#[command(name = "influence", version, about = "Cluster families with a studied feature and compare them with similar families without it")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Subtractive clustering of a numeric CSV table.
    Cluster(ClusterArgs),
    /// Run the six-step influence search described by a config file.
    Influence(InfluenceArgs),
    /// Generate seeded synthetic microdata, its schema and a pipeline config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// CSV file with a header row and numeric columns.
    #[arg(long, short)]
    input: PathBuf,
    /// Cluster radius r_a in normalized units.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    radius: f64,
    /// Quash factor: penalty radius is radius times this.
    #[arg(long, default_value_t = 1.25, allow_negative_numbers = true)]
    quash: f64,
    /// Accept ratio.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    accept: f64,
    /// Reject ratio.
    #[arg(long, default_value_t = 0.15, allow_negative_numbers = true)]
    reject: f64,
    /// Stop after this many centers.
    #[arg(long)]
    max_centers: Option<usize>,
    /// Directory for centers.csv, assignments.csv and manifest.json.
    #[arg(long, short, default_value = "cluster_out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct InfluenceArgs {
    /// Pipeline config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Report directory; overrides `report.output_dir` in the config.
    #[arg(long, short)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Store per-step durations in manifest.json (makes reruns differ).
    #[arg(long)]
    record_timings: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Random seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of households to generate.
    #[arg(long, visible_alias = "size", default_value_t = DEFAULT_HOUSEHOLDS)]
    households: usize,
    /// Directory for microdata.dat, schema.toml and influence.toml.
    #[arg(long, short, default_value = "synthetic")]
    out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Data(Error),
    Internal(Error),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Failure::Data(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Failure::Internal(e) => {
                eprintln!("internal error: {e}");
                ExitCode::from(3)
            }
        }
    }
}

/// Output-side failures are internal; everything else is about the input.
fn classify(e: Error) -> Failure {
    match e {
        Error::Verify(_) => Failure::Internal(e),
        e => Failure::Data(e),
    }
}

fn write_failure(e: Error) -> Failure {
    Failure::Internal(e)
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), Failure> {
    let params = ClusterParams {
        cluster_radius: args.radius,
        quash_factor: args.quash,
        accept_ratio: args.accept,
        reject_ratio: args.reject,
        max_centers: args.max_centers,
    };
    params.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (headers, data) = read_numeric_table(&args.input).map_err(Failure::Data)?;
    let model = fit(&data, &params).map_err(classify)?;

    let mut manifest = RunManifest::new("cluster", serde_json::to_value(&params).expect("params serialize"));
    manifest.add_inputs([args.input.as_path()]).map_err(Failure::Data)?;
    cluster_outputs(&headers, &model)
        .write(&args.out_dir, manifest)
        .map_err(write_failure)?;

    let sizes: Vec<String> = model.sizes().iter().map(usize::to_string).collect();
    println!("clusters: {}", model.n_clusters());
    println!("sizes: {}", sizes.join(" "));
    println!("written to {}", args.out_dir.display());
    Ok(())
}

fn cmd_influence(args: InfluenceArgs) -> Result<(), Failure> {
    if args.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let mut config = PipelineConfig::load(&args.config).map_err(Failure::Data)?;
    if let Some(dir) = args.out_dir {
        config.report.output_dir = dir;
    }
    let run = || run_pipeline(&config);
    let outcome = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Internal(Error::Config(e.to_string())))?
            .install(run),
        None => run(),
    }
    .map_err(classify)?;

    let options = ReportOptions {
        record_timings: args.record_timings,
    };
    let dir = &config.report.output_dir;
    let manifest = write_influence_report(dir, &config, &outcome, options).map_err(write_failure)?;

    let sizes: Vec<String> = outcome.clusters.sizes().iter().map(usize::to_string).collect();
    println!("N1: {}  N2: {}", outcome.cohorts.n1.len(), outcome.cohorts.n2.len());
    println!("clusters: {} (sizes {})", sizes.len(), sizes.join(" "));
    println!("flagged comparisons: {}", outcome.report.flagged().count());
    println!("{} files written to {}", manifest.outputs.len() + 1, dir.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let params = SynthParams {
        seed: args.seed,
        households: args.households,
    };
    let mut out = OutputSet::new();
    for (name, text) in fixture_files(&args.out_dir, &params) {
        out.add(name, text);
    }
    let snapshot = serde_json::json!({ "seed": params.seed, "households": params.households });
    out.write(&args.out_dir, RunManifest::new("synth", snapshot))
        .map_err(write_failure)?;
    println!(
        "{} households (seed {}) written to {}",
        params.households,
        params.seed,
        args.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = std::panic::catch_unwind(|| match cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Influence(a) => cmd_influence(a),
        Command::Synth(a) => cmd_synth(a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => f.report(),
        Err(_) => ExitCode::from(3),
    }
}
