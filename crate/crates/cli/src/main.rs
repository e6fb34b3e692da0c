mod args;
mod commands;
mod config;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Synth, SynthN};
use commands::Ctx;
use config::Config;
use error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    let config = Config::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(config.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
        log::debug!("worker pool already configured: {e}");
    }
    let ctx = Ctx { seed: cli.seed.or(config.seed).unwrap_or(0), jobs, config };
    match &cli.command {
        Command::GenBenchmark(a) => commands::gen_benchmark(&ctx, a),
        Command::ExportSft(a) => commands::export(&ctx, a),
        Command::Refine(a) => commands::refine(&ctx, a),
        Command::Baseline(a) => commands::baseline(&ctx, a),
        Command::Eval(e) => commands::eval(&ctx, e),
        Command::Quiz(q) => commands::quiz(&ctx, q),
        Command::Code(Synth::Synth { lines, out }) => commands::synth_code(&ctx, *lines, out),
        Command::Companies(SynthN::Synth { n, out }) => commands::synth_companies_cmd(&ctx, *n, out),
        Command::Detox(SynthN::Synth { n, out }) => commands::synth_detox_cmd(&ctx, *n, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind.exit_code()
        }
    }
}
