mod common;

use common::*;
use gram_moments::*;
use proptest::prelude::*;

fn fits() -> Vec<(&'static str, DensityModel)> {
    let mut out = Vec::new();
    for (name, config) in [("config1", config1()), ("config2", config2())] {
        let table = stable_moments_upto(&config, 45).unwrap();
        for k in [5, 30, 45] {
            out.push((name, fit_density(&table, k).unwrap()));
        }
    }
    out
}

#[test]
fn fitted_density_reproduces_moments() {
    for (name, model) in fits() {
        let upper = model.tail_bound();
        for p in 0..=model.order().min(10) as u32 {
            let got = expected_functional(&model, |x| x.powi(p as i32), upper).unwrap();
            let want = model.source_moments().get(p).unwrap();
            assert!(
                rel_err(got, want) <= 1e-4,
                "{name} K={} p={p}: {got} vs {want}",
                model.order()
            );
        }
    }
}

#[test]
fn cdf_derivative_matches_pdf() {
    for (name, model) in fits() {
        let top = 3.0 * model.mean() + 10.0 * model.scale();
        for &x in &uniform_grid(0.0, top, 201)[1..] {
            let h = 1e-5 * x;
            let derivative = (model.cdf(x + h) - model.cdf(x - h)) / (2.0 * h);
            let err = (derivative - model.pdf(x)).abs();
            assert!(err <= 1e-5, "{name} K={} at {x}: {err:e}", model.order());
        }
    }
}

#[test]
fn cdf_routes_agree_at_low_order() {
    for (name, config) in [("config1", config1()), ("config2", config2())] {
        let model = fit_density(&stable_moments_upto(&config, 10).unwrap(), 10).unwrap();
        for &x in &uniform_grid(0.0, model.tail_bound(), 64) {
            let a = model.cdf(x);
            let b = model.cdf_gamma_series(x);
            assert!(
                (a - b).abs() <= 1e-9,
                "{name} K={} at {x}: {a} vs {b}",
                model.order()
            );
        }
    }
}

#[test]
fn density_decays_in_the_tail() {
    // Fails: the truncated expansions oscillate around zero beyond mean + 10σ.
    for (name, model) in fits().into_iter().filter(|(_, m)| m.order() >= 30) {
        let tail = model.tail_check(4000);
        assert!(
            tail.is_monotone(),
            "{name} K={}: density increases at {:?} (minimum {:e})",
            model.order(),
            tail.first_increase,
            tail.min_pdf
        );
    }
}

#[test]
fn low_order_fit_has_monotone_tail() {
    let table = stable_moments_upto(&config2(), 5).unwrap();
    assert!(fit_density(&table, 5)
        .unwrap()
        .tail_check(4000)
        .is_monotone());
}

#[test]
fn config1_density_is_normalized() {
    let table = stable_moments_upto(&config1(), 30).unwrap();
    let model = fit_density(&table, 30).unwrap();
    let mass = expected_functional(&model, |_| 1.0, model.tail_bound()).unwrap();
    assert!((mass - 1.0).abs() <= 1e-6, "{mass}");
    assert!((model.cdf(model.tail_bound()) - 1.0).abs() <= 1e-6);
}

#[test]
fn coefficients_match_high_precision_fit() {
    // δ_i of the K = 45 fit to config2, from 80-digit moments and arithmetic
    let reference = [
        (0, 2.1193182766714225e-1),
        (1, 0.0),
        (2, 0.0),
        (3, -4.368924448023059e-3),
        (5, 3.347845912482278e-3),
        (10, 6.541399283589555e-5),
        (20, 2.780893703206258e-4),
        (30, -1.2334788255951654e-4),
        (40, 3.3250222988819225e-5),
        (45, -2.2259898306692847e-5),
    ];
    let table = stable_moments_upto(&config2(), 45).unwrap();
    let model = fit_density(&table, 45).unwrap();
    for (i, want) in reference {
        let got = model.coefficients()[i];
        let tol = model.coefficient_error_bounds()[i] + 1e-10;
        assert!(
            (got - want).abs() <= tol,
            "delta_{i}: {got:e} vs {want:e} (tol {tol:e})"
        );
    }
}

#[test]
fn log_capacity_functional_matches_monte_carlo() {
    let config = config1();
    let model = fit_density(&stable_moments_upto(&config, 30).unwrap(), 30).unwrap();
    let predicted = expected_functional(&model, |x| (x + 1.0).log2(), model.tail_bound()).unwrap();

    let sample = sample_eigenvalues(&config, 1_000_000, 31).unwrap();
    let values: Vec<f64> = sample
        .eigenvalues()
        .iter()
        .map(|x| (x + 1.0).log2())
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        (predicted - mean).abs() <= 3.0 * se,
        "{predicted} vs {mean} ± {se}"
    );
}

#[test]
fn cdf_at_empirical_median_is_one_half() {
    let config = config2();
    let model = fit_density(&stable_moments_upto(&config, 45).unwrap(), 45).unwrap();
    let sample = sample_eigenvalues(&config, 1_000_000, 7).unwrap();
    let sorted = sample.sorted();
    let median = sorted[sorted.len() / 2];
    assert!((empirical_cdf(&sample, median) - 0.5).abs() <= 1.0 / (sorted.len() as f64).sqrt());
    assert!(
        (model.cdf(median) - 0.5).abs() <= 0.01,
        "{}",
        model.cdf(median)
    );
}

proptest! {
    #[test]
    fn gamma_moments_collapse_to_base_weight(nu in -0.5f64..5.0, c in 0.1f64..5.0, k in 0usize..=10) {
        let table = MomentTable::from_sequence(Engine::External, gamma_moments(nu, c, 10));
        let model = fit_density(&table, k).unwrap();
        prop_assert!((model.scale() - c).abs() <= 1e-12 * c);
        prop_assert!((model.shape() - nu).abs() <= 1e-10);
        for (i, d) in model.coefficients().iter().enumerate().skip(1) {
            prop_assert!(d.abs() <= 1e-10, "delta_{} = {:e}", i, d);
        }
    }

    #[test]
    fn first_two_coefficients_vanish(config in ensemble(10), k in 2usize..=20) {
        let model = fit_density(&stable_moments_upto(&config, 20).unwrap(), k).unwrap();
        let d0 = model.coefficients()[0];
        prop_assert!(model.coefficients()[1].abs() <= 1e-12 * d0);
        prop_assert!(model.coefficients()[2].abs() <= 1e-10 * d0);
    }

    #[test]
    fn cdf_is_zero_at_origin_and_bounded_by_mass(config in ensemble(6), k in 0usize..=12) {
        let model = fit_density(&stable_moments_upto(&config, 12).unwrap(), k).unwrap();
        prop_assert_eq!(model.cdf(0.0), 0.0);
        prop_assert!((model.cdf(model.tail_bound()) - 1.0).abs() <= 1e-6);
    }
}
