//! Batch runner tying the loaders, partitioner, kernels, traffic model, and
//! trainer into reproducible command-line runs.

mod approx_cmd;
mod bench_cmd;
mod config;
mod partition_cmd;
mod traffic_cmd;
mod train_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "maxk",
    version,
    about = "Top-k sparsified graph aggregation: partitioning, kernels, traffic model, training"
)]
struct Cli {
    /// Optional key=value defaults file; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel kernel mode (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the edge-group plan for a graph and write it as an EGPL file.
    Partition(partition_cmd::PartitionArgs),
    /// Time the kernels on a graph and report counted traffic per k.
    Bench(bench_cmd::BenchArgs),
    /// Analytical traffic reports for the dense baseline and both kernels.
    Traffic(traffic_cmd::TrafficArgs),
    /// Full-batch training on a file-backed or synthetic dataset.
    Train(train_cmd::TrainArgs),
    /// Hidden-width sweep of the function-approximation demo.
    Approx(approx_cmd::ApproxArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: configuring {} threads: {e}", cli.threads);
            return ExitCode::FAILURE;
        }
    }
    let file_config = match config::FileConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Partition(args) => partition_cmd::run(args, &file_config, cli.threads),
        Command::Bench(args) => bench_cmd::run(args, &file_config, cli.threads),
        Command::Traffic(args) => traffic_cmd::run(args, &file_config, cli.threads),
        Command::Train(args) => train_cmd::run(args, &file_config, cli.threads),
        Command::Approx(args) => approx_cmd::run(args, &file_config, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
