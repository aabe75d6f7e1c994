//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails or exceeds its time budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gram_moments::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BIN: &str = env!("CARGO_BIN_EXE_gram-moments");

type Outcome = std::result::Result<String, String>;
type Check = (&'static str, Duration, fn() -> Outcome);

fn config(q: usize) -> EnsembleConfig {
    validate_ensemble(3, q, exponential_spectrum(q, 0.85).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Spectrum of size `q` with every gap at least 1/16 of the largest value.
fn separated(rng: &mut ChaCha8Rng, q: usize) -> Spectrum {
    let mut values = vec![rng.random_range(0.05..2.0)];
    for _ in 1..q {
        let last = *values.last().unwrap();
        values.push(last + rng.random_range(1.0..2.0));
    }
    let scale = 10f64.powf(rng.random_range(-2.0..1.0)) / values.last().unwrap();
    Spectrum::new(values.into_iter().map(|v| v * scale).collect()).unwrap()
}

fn random_configs(seed: u64, count: usize, max_q: usize) -> Vec<EnsembleConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q = rng.random_range(1..=max_q);
            let n_t = rng.random_range(1..=q);
            validate_ensemble(n_t, q, separated(&mut rng, q)).unwrap()
        })
        .collect()
}

fn verdict(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

/// Table values are rounded; accept one unit in the last printed digit.
fn within_last_digit(got: f64, printed: &str) -> bool {
    let want: f64 = printed.parse().unwrap();
    let decimals = printed.split('.').nth(1).map_or(0, str::len);
    (got - want).abs() <= 10f64.powi(-(decimals as i32)) * (1.0 + 1e-9)
}

fn reference_table_stable() -> Outcome {
    let rows = [
        (5, 1, "0.5562"),
        (5, 5, "1.1032"),
        (5, 8, "5.3989"),
        (20, 1, "0.9612"),
        (20, 5, "4.7562"),
        (20, 8, "37.47"),
    ];
    let mut failures = Vec::new();
    for (q, p, printed) in rows {
        let got = stable_moment(&config(q), p).map_err(|e| e.to_string())?;
        if !within_last_digit(got, printed) {
            failures.push(format!("q={q} p={p}: {got} vs {printed}"));
        }
    }
    verdict(failures, "6 reference table entries checked".into())
}

fn reference_table_baseline() -> Outcome {
    let mut failures = Vec::new();
    for (p, printed) in [(1, "0.5563"), (5, "1.1029"), (8, "5.3799")] {
        let got = baseline_moment(&config(5), p).map_err(|e| e.to_string())?;
        if !within_last_digit(got.value, printed) {
            failures.push(format!("config1 p={p}: {:.6} vs {printed}", got.value));
        }
    }
    for p in [1, 5, 8] {
        let got = baseline_moment(&config(20), p).map_err(|e| e.to_string())?;
        let stable = stable_moment(&config(20), p).map_err(|e| e.to_string())?;
        match got.warning {
            Some(w) if w.condition > 1e12 => {}
            _ => failures.push(format!("config2 p={p}: no instability warning")),
        }
        if rel(got.value, stable) <= 0.1 {
            failures.push(format!(
                "config2 p={p}: deviation only {:.3}",
                rel(got.value, stable)
            ));
        }
    }
    verdict(
        failures,
        "config1 values, config2 warning and deviation".into(),
    )
}

fn empirical_agreement() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    pool.install(|| {
        let mut failures = Vec::new();
        let mut worst: f64 = 0.0;
        for q in [5, 20] {
            let cfg = config(q);
            let sample =
                sample_eigenvalues(&cfg, 100_000, 20_240_601).map_err(|e| e.to_string())?;
            for p in [1, 5, 8] {
                let e = empirical_moment(&sample, p);
                let z = (e.estimate - stable_moment(&cfg, p).unwrap()).abs() / e.standard_error;
                worst = worst.max(z);
                if z > 5.0 {
                    failures.push(format!("q={q} p={p}: {z:.2} standard errors"));
                }
            }
        }
        verdict(
            failures,
            format!("worst deviation {worst:.2} standard errors"),
        )
    })
}

fn residual_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for _ in 0..50 {
        let q = rng.random_range(1..=8);
        let spectrum = separated(&mut rng, q);
        assert!(spectrum.min_relative_gap() >= 0.05);
        let a = monic_coefficients(&spectrum);
        for tau in 0..=30 {
            let alpha = alpha_vector(&a, tau).map_err(|e| e.to_string())?;
            let target: Vec<f64> = spectrum
                .values()
                .iter()
                .map(|b| b.powi(tau as i32))
                .collect();
            let norm = target.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let err = spectrum
                .values()
                .iter()
                .zip(&target)
                .map(|(&b, t)| {
                    let lhs: f64 = alpha
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(l, x)| x * b.powi(l as i32))
                        .sum();
                    (lhs - t).abs()
                })
                .fold(0.0f64, f64::max)
                / norm;
            worst = worst.max(err);
            if err > 1e-8 {
                failures.push(format!("q={q} tau={tau}: {err:e}"));
            }
        }
    }
    verdict(
        failures,
        format!("50 spectra x 31 exponents, worst residual {worst:.1e}"),
    )
}

fn engine_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut accepted, mut worst) = (0, 0.0f64);
    let mut failures = Vec::new();
    while accepted < 50 {
        let q = rng.random_range(1..=8);
        let n_t = rng.random_range(1..=q);
        let cfg = validate_ensemble(n_t, q, separated(&mut rng, q)).unwrap();
        let engine = BaselineEngine::new(&cfg).map_err(|e| e.to_string())?;
        if engine.system().condition_estimate() >= 1e8 {
            continue;
        }
        accepted += 1;
        for p in 0..=10 {
            let b = engine.moment(p).map_err(|e| e.to_string())?.value;
            let s = stable_moment(&cfg, p).map_err(|e| e.to_string())?;
            let err = rel(s, b);
            worst = worst.max(err);
            if err > 1e-8 {
                failures.push(format!("q={q} n_t={n_t} p={p}: {err:e}"));
            }
        }
    }
    verdict(
        failures,
        format!("50 configs, worst relative gap {worst:.1e}"),
    )
}

fn trace_identity() -> Outcome {
    let mut configs = random_configs(6, 50, 30);
    configs.push(config(5));
    configs.push(config(20));
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for cfg in &configs {
        let err = rel(
            stable_moment(cfg, 1).map_err(|e| e.to_string())?,
            cfg.spectrum().trace(),
        );
        worst = worst.max(err);
        if err > 1e-10 {
            failures.push(format!("q={}: {err:e}", cfg.q()));
        }
    }
    verdict(
        failures,
        format!("{} configs, worst {worst:.1e}", configs.len()),
    )
}

fn density_fidelity() -> Outcome {
    let cfg = config(20);
    let table = stable_moments_upto(&cfg, 45).map_err(|e| e.to_string())?;
    let sample = sample_eigenvalues(&cfg, 100_000, 8).map_err(|e| e.to_string())?;
    let ks = |k| {
        fit_density(&table, k)
            .map(|m| ks_distance(&m, &sample))
            .map_err(|e| e.to_string())
    };
    let (k5, k30, k45) = (ks(5)?, ks(30)?, ks(45)?);
    let mut failures = Vec::new();
    if k30 > 0.02 {
        failures.push("K=30 above 0.02".to_string());
    }
    if k45 > 0.01 {
        failures.push("K=45 above 0.01".to_string());
    }
    if k45 >= k5 {
        failures.push("K=45 not better than K=5".to_string());
    }
    verdict(
        failures,
        format!("KS K=5 {k5:.4}, K=30 {k30:.4}, K=45 {k45:.4}"),
    )
}

fn moment_matching() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for q in [5, 20] {
        let table = stable_moments_upto(&config(q), 30).map_err(|e| e.to_string())?;
        let model = fit_density(&table, 30).map_err(|e| e.to_string())?;
        for p in 0..=10u32 {
            let got = expected_functional(&model, |x| x.powi(p as i32), model.tail_bound())
                .map_err(|e| e.to_string())?;
            let err = rel(got, table.get(p).unwrap());
            worst = worst.max(err);
            if err > 1e-4 {
                failures.push(format!("q={q} p={p}: {err:e}"));
            }
        }
    }
    verdict(failures, format!("worst relative error {worst:.1e}"))
}

fn exact_family() -> Outcome {
    let mut worst_delta: f64 = 0.0;
    let mut worst_pdf: f64 = 0.0;
    let mut failures = Vec::new();
    for (nu, c) in [
        (0.0f64, 1.0f64),
        (1.0, 1.0),
        (2.5, 0.7),
        (0.3, 2.0),
        (4.0, 0.25),
        (-0.4, 1.5),
    ] {
        let mut mu = vec![1.0];
        for p in 1..=10 {
            let prev = mu[p - 1];
            mu.push(prev * c * (nu + p as f64));
        }
        let model = fit_density(&MomentTable::from_sequence(Engine::External, mu), 10)
            .map_err(|e| e.to_string())?;
        let d = model.coefficients()[1..]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        let ln_norm = log_gamma(nu + 1.0).unwrap() + c.ln();
        let grid = uniform_grid(0.0, 20.0 * c * (nu + 1.0), 201);
        let p = grid[1..]
            .iter()
            .map(|&x| {
                let exact = (nu * (x / c).ln() - x / c - ln_norm).exp();
                (model.pdf(x) - exact).abs()
            })
            .fold(0.0f64, f64::max);
        worst_delta = worst_delta.max(d);
        worst_pdf = worst_pdf.max(p);
        if d > 1e-10 || p > 1e-10 {
            failures.push(format!("nu={nu} c={c}: delta {d:e}, pdf {p:e}"));
        }
    }
    verdict(
        failures,
        format!(
            "6 gamma families at K=10, worst delta {worst_delta:.1e}, worst pdf {worst_pdf:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &[
            "sample",
            "--nt",
            "3",
            "--q",
            "20",
            "--xi",
            "0.85",
            "--samples",
            "20000",
            "--seed",
            "42",
            "--format",
            "binary",
        ],
        &[
            "sample",
            "--nt",
            "3",
            "--q",
            "5",
            "--xi",
            "0.85",
            "--samples",
            "20000",
            "--seed",
            "42",
        ],
        &[
            "compare",
            "--nt",
            "3",
            "--q",
            "20",
            "--xi",
            "0.85",
            "--p",
            "0,1,5,8",
            "--samples",
            "100000",
            "--seed",
            "42",
            "--format",
            "json",
        ],
    ];
    let mut failures = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        let path = dir.path().join(format!("run{i}"));
        for _ in 0..2 {
            let status = Command::new(BIN)
                .args(*args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{} exited with {status}", args[0]));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            failures.push(format!("{} run {i} differs between invocations", args[0]));
        }
    }
    verdict(
        failures,
        "sample (binary, csv) and compare byte-identical across runs".into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 10] = [
        (
            "1 reference table, stable engine",
            Duration::from_secs(1),
            reference_table_stable,
        ),
        (
            "2 reference table, baseline engine",
            Duration::from_secs(1),
            reference_table_baseline,
        ),
        (
            "3 empirical agreement, 1e5 draws",
            Duration::from_secs(60),
            empirical_agreement,
        ),
        ("4 residual suite", Duration::from_secs(5), residual_suite),
        (
            "5 engine equivalence",
            Duration::from_secs(5),
            engine_equivalence,
        ),
        ("6 trace identity", Duration::from_secs(1), trace_identity),
        (
            "7 density fidelity (KS)",
            Duration::from_secs(90),
            density_fidelity,
        ),
        (
            "8 moment matching of the fit",
            Duration::from_secs(10),
            moment_matching,
        ),
        (
            "9 exact-family collapse",
            Duration::from_secs(1),
            exact_family,
        ),
        ("10 determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over time budget {budget:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
