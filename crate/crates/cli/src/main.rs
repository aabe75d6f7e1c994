use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gram_moments_cli::commands::DEFAULT_COMPARE_SAMPLES;
use gram_moments_cli::{
    run, write_output, Command, GridSpec, OutputFormat, RunConfig, SpectrumSource,
};

/// Moments and eigenvalue densities of one-side correlated Gram matrices.
#[derive(Parser)]
#[command(name = "gram-moments", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Table of stable and baseline moments.
    Moments {
        #[command(flatten)]
        ensemble: Ensemble,
        /// Comma-separated moment orders.
        #[arg(long = "p", value_delimiter = ',', required = true)]
        p_list: Vec<u32>,
        #[command(flatten)]
        output: Output,
    },
    /// Truncated Laguerre density on a grid, optionally against a Monte Carlo sample.
    Density {
        #[command(flatten)]
        ensemble: Ensemble,
        /// Truncation order.
        #[arg(long = "K")]
        order: usize,
        /// Realizations for the empirical overlay (0 disables it).
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// MIN:MAX:POINTS; defaults to 512 points on [0, mean + 10 sd].
        #[arg(long)]
        grid: Option<GridSpec>,
        #[command(flatten)]
        output: Output,
    },
    /// Baseline, Monte Carlo and stable moments side by side.
    Compare {
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long = "p", value_delimiter = ',', required = true)]
        p_list: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_COMPARE_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Dump Monte Carlo eigenvalue draws (csv or binary).
    Sample {
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Ensemble {
    /// Number of columns n_t.
    #[arg(long = "nt")]
    n_t: usize,
    /// Number of rows q; taken from the spectrum file when omitted.
    #[arg(long)]
    q: Option<usize>,
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Forgetting factor of the exponential spectrum.
    #[arg(long)]
    xi: Option<f64>,
    /// File with the correlation eigenvalues.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Sub {
    fn into_run_config(self) -> RunConfig {
        let (command, ensemble, output, p_list, order, n_samples, seed, grid) = match self {
            Sub::Moments {
                ensemble,
                p_list,
                output,
            } => (Command::Moments, ensemble, output, p_list, None, 0, 0, None),
            Sub::Density {
                ensemble,
                order,
                samples,
                seed,
                grid,
                output,
            } => (
                Command::Density,
                ensemble,
                output,
                Vec::new(),
                Some(order),
                samples,
                seed,
                grid,
            ),
            Sub::Compare {
                ensemble,
                p_list,
                samples,
                seed,
                output,
            } => (
                Command::Compare,
                ensemble,
                output,
                p_list,
                None,
                samples,
                seed,
                None,
            ),
            Sub::Sample {
                ensemble,
                samples,
                seed,
                output,
            } => (
                Command::Sample,
                ensemble,
                output,
                Vec::new(),
                None,
                samples,
                seed,
                None,
            ),
        };
        let spectrum_source = match (ensemble.source.xi, ensemble.source.spectrum) {
            (Some(xi), _) => SpectrumSource::Xi(xi),
            (None, Some(path)) => SpectrumSource::File(path),
            (None, None) => unreachable!("clap requires one spectrum source"),
        };
        RunConfig {
            command,
            n_t: ensemble.n_t,
            q: ensemble.q.unwrap_or(0),
            spectrum_source,
            p_list,
            order,
            n_samples,
            seed,
            grid,
            output_format: output.format,
            output_path: output.out,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.command.into_run_config();
    let result = run(&config).and_then(|artifact| {
        write_output(config.output_path.as_deref(), &artifact.bytes)?;
        if config.output_format != OutputFormat::Json {
            for (key, value) in &artifact.diagnostics {
                eprintln!("# {key}: {value}");
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
