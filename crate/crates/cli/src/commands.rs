use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use gram_moments::{
    empirical_cdf, empirical_moment, fit_density, histogram_density, ks_distance,
    sample_eigenvalues, stable_moments_upto, uniform_grid, BaselineEngine, EnsembleConfig,
    StableEngine,
};
use serde_json::{Map, Value};

use crate::config::{Command, OutputFormat, RunConfig};
use crate::table::{json_number, Table, Values};

/// Default number of realizations for `compare`.
pub const DEFAULT_COMPARE_SAMPLES: usize = 100_000;

/// Baseline moments for `p_list`, or the reason the column is dropped.
struct BaselineColumn {
    values: Vec<Option<f64>>,
    warning: Vec<bool>,
}

fn baseline_column(
    config: &EnsembleConfig,
    p_list: &[u32],
    table: &mut Table,
) -> Option<BaselineColumn> {
    let engine = match BaselineEngine::new(config) {
        Ok(e) => e,
        Err(e) => {
            table.diagnostic("baseline_omitted", e.to_string());
            return None;
        }
    };
    let system = engine.system();
    table.diagnostic(
        "baseline_condition_estimate",
        json_number(system.condition_estimate()),
    );
    table.diagnostic(
        "baseline_inverse_residual",
        json_number(system.inverse_residual()),
    );
    if let Some(w) = system.warning() {
        table.diagnostic("baseline_warning", w.to_string());
    }
    let mut failures = Map::new();
    let mut column = BaselineColumn {
        values: Vec::new(),
        warning: Vec::new(),
    };
    for &p in p_list {
        match engine.moment(p) {
            Ok(flagged) => {
                column.values.push(Some(flagged.value));
                column.warning.push(flagged.warning.is_some());
            }
            Err(e) => {
                failures.insert(p.to_string(), e.to_string().into());
                column.values.push(None);
                column.warning.push(system.is_unstable());
            }
        }
    }
    if !failures.is_empty() {
        table.diagnostic("baseline_failures", Value::Object(failures));
    }
    Some(column)
}

fn stable_column(config: &EnsembleConfig, p_list: &[u32]) -> Result<Vec<f64>> {
    let mut engine = StableEngine::new(config);
    p_list
        .iter()
        .map(|&p| {
            engine
                .moment(p)
                .with_context(|| format!("stable moment of order {p}"))
        })
        .collect()
}

pub fn cmd_moments(run: &RunConfig) -> Result<Table> {
    let config = run.ensemble()?;
    let stable = stable_column(&config, &run.p_list)?;
    let mut table = Table::new();
    table.push(
        "p",
        Values::Int(run.p_list.iter().map(|&p| p as u64).collect()),
    );
    table.floats("stable", stable);
    if let Some(b) = baseline_column(&config, &run.p_list, &mut table) {
        table.push("baseline", Values::Float(b.values));
        table.push("baseline_condition_warning", Values::Bool(b.warning));
    }
    Ok(table)
}

pub fn cmd_compare(run: &RunConfig) -> Result<Table> {
    let config = run.ensemble()?;
    let stable = stable_column(&config, &run.p_list)?;
    let sample = sample_eigenvalues(&config, run.n_samples, run.seed)?;
    let mut table = Table::new();
    table.push(
        "p",
        Values::Int(run.p_list.iter().map(|&p| p as u64).collect()),
    );
    if let Some(b) = baseline_column(&config, &run.p_list, &mut table) {
        table.push("baseline", Values::Float(b.values));
        table.push("baseline_condition_warning", Values::Bool(b.warning));
    }
    let empirical: Vec<_> = run
        .p_list
        .iter()
        .map(|&p| empirical_moment(&sample, p))
        .collect();
    table.floats("empirical", empirical.iter().map(|e| e.estimate));
    table.floats(
        "empirical_stderr",
        empirical.iter().map(|e| e.standard_error),
    );
    table.floats("stable", stable);
    table.diagnostic("n_samples", run.n_samples);
    Ok(table)
}

pub fn cmd_density(run: &RunConfig) -> Result<Table> {
    let config = run.ensemble()?;
    let order = run.order.context("--K is required")?;
    let moments = stable_moments_upto(&config, order.max(2) as u32)?;
    let model = fit_density(&moments, order)?;
    let grid = match run.grid {
        Some(g) => uniform_grid(g.min, g.max, g.points),
        None => model.default_grid(),
    };
    let eval = model.tabulate(&grid);

    let mut table = Table::new();
    table.diagnostic("scale", json_number(model.scale()));
    table.diagnostic("shape", json_number(model.shape()));
    let bound = model
        .coefficient_error_bounds()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    table.diagnostic("coefficient_error_bound", json_number(bound));
    let min_pdf = eval.min_pdf();
    table.diagnostic("min_pdf", json_number(min_pdf));
    table.diagnostic(
        "clipped_points",
        eval.pdf.iter().filter(|&&v| v < 0.0).count(),
    );
    table.diagnostic(
        "cdf_check",
        match eval.check() {
            Ok(()) => "ok".to_string(),
            Err(e) => e.to_string(),
        },
    );
    table.diagnostic("tail_monotone", model.tail_check(4000).is_monotone());

    table.floats("lambda", grid.iter().copied());
    table.floats("pdf", eval.pdf.iter().map(|&v| v.max(0.0)));
    table.floats("cdf", eval.cdf.iter().copied());
    if run.n_samples > 0 {
        let sample = sample_eigenvalues(&config, run.n_samples, run.seed)?;
        table.floats(
            "empirical_cdf",
            grid.iter().map(|&x| empirical_cdf(&sample, x)),
        );
        table.floats("histogram", histogram_density(&sample, &grid));
        table.diagnostic("ks_distance", json_number(ks_distance(&model, &sample)));
        table.diagnostic("n_samples", run.n_samples);
    }
    Ok(table)
}

pub fn cmd_sample(run: &RunConfig) -> Result<Vec<u8>> {
    let config = run.ensemble()?;
    let sample = sample_eigenvalues(&config, run.n_samples, run.seed)?;
    let mut buf = Vec::new();
    match run.output_format {
        OutputFormat::Binary => sample.write_binary(&mut buf)?,
        _ => sample.write_csv(&mut buf)?,
    }
    Ok(buf)
}

fn meta(run: &RunConfig, config: &EnsembleConfig) -> Result<Map<String, Value>> {
    let mut meta = Map::new();
    meta.insert("run_config".into(), serde_json::to_value(run)?);
    meta.insert("version".into(), gram_moments::VERSION.into());
    meta.insert("seed".into(), run.seed.into());
    meta.insert(
        "spectrum".into(),
        config
            .spectrum()
            .values()
            .iter()
            .map(|&b| json_number(b))
            .collect(),
    );
    Ok(meta)
}

/// Output bytes of a run, plus the diagnostics for reporting elsewhere
/// when the format has no room for them.
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub diagnostics: Map<String, Value>,
}

pub fn run(run: &RunConfig) -> Result<Artifact> {
    run.validate()?;
    let table = match run.command {
        Command::Sample => {
            return Ok(Artifact {
                bytes: cmd_sample(run)?,
                diagnostics: Map::new(),
            });
        }
        Command::Moments => cmd_moments(run)?,
        Command::Compare => cmd_compare(run)?,
        Command::Density => cmd_density(run)?,
    };
    let mut bytes = Vec::new();
    match run.output_format {
        OutputFormat::Json => {
            let json = table.to_json(meta(run, &run.ensemble()?)?);
            serde_json::to_writer_pretty(&mut bytes, &json)?;
            bytes.push(b'\n');
        }
        _ => table.write_csv(&mut bytes)?,
    }
    Ok(Artifact {
        bytes,
        diagnostics: table.diagnostics,
    })
}

/// Writes the whole artifact at once, through a temporary file next to
/// `path` so a failed run never leaves a truncated file behind.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            fs::write(&tmp, bytes)
                .with_context(|| format!("writing {}", Path::new(&tmp).display()))?;
            fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}
