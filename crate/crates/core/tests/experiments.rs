use std::f64::consts::PI;

use approx::assert_relative_eq;
use homsim_core::coherence::ModelTag;
use homsim_core::experiments::{
    born_rule_check, detuning_map, eq3_vs_eq4_contrast, fit_gaussian_dip, fringe_extension,
    fringe_stationary_points, model_equivalence, reproduce_fig1d, run_scan, witness, CSV_HEADER,
};
use homsim_core::{HomError, Model, RunConfig, SpectralModel};

fn print_report(r: &homsim_core::ExperimentReport) {
    for c in &r.checks {
        println!("{:<45} {:>5} measured={:e} tol={:e}", c.name, c.passed, c.measured, c.tolerance);
    }
    for o in &r.observations {
        println!("  {} = {:e}", o.name, o.value);
    }
}

#[test]
fn bandwidth_sweep_analytic_landmarks() {
    let cfg = RunConfig {
        analytic: true,
        ..RunConfig::default()
    };
    let r = reproduce_fig1d(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    assert_eq!(r.curves.len(), 4);
    let full = r.curve(ModelTag::CoherenceAnalytic, 1.0).unwrap();
    let half = r.curve(ModelTag::CoherenceAnalytic, 0.5).unwrap();
    // στ = 2 sits at index 32 of the 65-point grid on [0, 4]
    assert_eq!(full.tau_grid[32], 2.0);
    assert_relative_eq!(full.values[32], 0.499_832_268_686_048_7, epsilon = 1e-15);
    assert_relative_eq!(half.values[32], 0.432_332_358_381_693_7, epsilon = 1e-15);
    let quarter = r.curve(ModelTag::CoherenceAnalytic, 0.25).unwrap();
    for (i, &t) in quarter.tau_grid.iter().enumerate() {
        if t > 0.0 && t < 2.0 {
            for other in &r.curves[..3] {
                assert!(quarter.values[i] < other.values[i]);
            }
        }
    }
}

#[test]
fn bandwidth_sweep_monte_carlo_agrees() {
    let r = reproduce_fig1d(&RunConfig::default()).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    assert_eq!(r.curves.len(), 8);
    let mc = r.curve(ModelTag::CoherenceShifted, 1.0).unwrap();
    assert_eq!(mc.values[0], 0.0);
    assert!(mc.std_errors[10] > 0.0);
}

#[test]
fn bandwidth_sweep_needs_saturation_range() {
    let cfg = RunConfig {
        tau_max: 1.0,
        analytic: true,
        ..RunConfig::default()
    };
    assert!(matches!(reproduce_fig1d(&cfg), Err(HomError::Argument(_))));
}

#[test]
fn born_rule_is_exact() {
    let cfg = RunConfig {
        n_pairs: 100,
        tau_max: 0.7,
        tau_steps: 8,
        ..RunConfig::default()
    };
    let r = born_rule_check(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    assert!(r.check("mean port intensity").unwrap().measured < 1e-12);
    let offset = RunConfig {
        mean_offset: 1.0,
        ..cfg
    };
    assert!(born_rule_check(&offset).is_err());
}

#[test]
fn contrast_landmarks() {
    let cfg = RunConfig {
        analytic: true,
        ..RunConfig::default()
    };
    let r = eq3_vs_eq4_contrast(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    let un = r.curve(ModelTag::CoherenceAnalyticUnshifted, 1.0).unwrap();
    assert_eq!(un.values[0], 1.0);
    // ½(1 + e⁻⁸), frozen from quadrature of pdf(x)·cos²(2x)
    assert_relative_eq!(un.values[32], 0.500_167_731_313_951_4, epsilon = 1e-15);

    let mc = eq3_vs_eq4_contrast(&RunConfig::default()).unwrap();
    print_report(&mc);
    assert!(mc.all_passed());
    assert_eq!(mc.curves.len(), 4);
}

#[test]
fn fringe_with_offset() {
    let cfg = RunConfig {
        mean_offset: 3.0,
        ..RunConfig::default()
    };
    let r = fringe_extension(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    let peaks = &r.curves[1];
    assert_relative_eq!(peaks.tau_grid[0], PI / 6.0, epsilon = 1e-15);
    assert_relative_eq!(peaks.values[0], 0.788_962_448_246_364_7, epsilon = 1e-14);
    assert!(peaks.values.iter().all(|&v| v > 0.5));
}

#[test]
fn fringe_vanishes_without_offset() {
    let r = fringe_extension(&RunConfig {
        analytic: true,
        ..RunConfig::default()
    })
    .unwrap();
    assert!(r.all_passed());
    assert!(r.check("monotone without offset").is_some());
}

#[test]
fn stationary_points_satisfy_derivative_condition() {
    let m = SpectralModel::new(1.0, 3.0, 1.0).unwrap();
    let roots = fringe_stationary_points(&m, 4.0);
    assert_eq!(roots.len(), 8);
    assert!(roots.iter().all(|&t| t > 0.0 && t <= 4.0));
    for (k, &t) in roots.iter().enumerate() {
        // finite-difference derivative of the closed form vanishes
        let f = |x: f64| 0.5 * (1.0 - (-2.0 * x * x).exp() * (6.0 * x).cos());
        let h = 1e-6;
        let d = (f(t + h) - f(t - h)) / (2.0 * h);
        assert!(d.abs() < 1e-8, "k={} t={t} d={d}", k + 1);
        assert!(t <= (k + 1) as f64 * PI / 6.0);
    }
}

#[test]
fn equivalence_after_mapping() {
    let cfg = RunConfig {
        model: Model::Fock,
        tau_steps: 33,
        ..RunConfig::default()
    };
    let r = model_equivalence(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    assert_eq!(r.curves[0].values[0], 0.0);
    assert_eq!(r.curves[1].values[0], 0.0);
}

#[test]
fn fit_recovers_known_width() {
    let tau: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
    let values: Vec<f64> = tau.iter().map(|t| 0.5 * (1.0 - (-1.7 * t * t).exp())).collect();
    let (k, res) = fit_gaussian_dip(&tau, &values).unwrap();
    assert_relative_eq!(k, 1.7, epsilon = 1e-12);
    assert!(res < 1e-14);
    assert!(fit_gaussian_dip(&[0.0, 1.0], &[0.0, 0.5]).is_err());
}

#[test]
fn witness_at_degeneracy() {
    let cfg = RunConfig {
        model: Model::Fock,
        tau_max: 10.0,
        ..RunConfig::default()
    };
    let r = witness(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
}

#[test]
fn witness_with_split() {
    let cfg = RunConfig {
        model: Model::Fock,
        tau_max: 10.0,
        center_split: 3.0,
        ..RunConfig::default()
    };
    let r = witness(&cfg).unwrap();
    print_report(&r);
    assert!(r.all_passed());
    let depth = |n: &str| r.observations.iter().find(|o| o.name == n).unwrap().value;
    assert!(depth("dip depth product") < 1.0);
    assert_relative_eq!(depth("dip depth entangled"), 1.0, epsilon = 1e-8);
}

#[test]
fn scan_reports_and_csv() {
    let cfg = RunConfig {
        analytic: true,
        tau_steps: 5,
        ..RunConfig::default()
    };
    let r = run_scan(&cfg).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(
        lines.next(),
        Some("0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,coherence-analytic,1.0000000000000000e0")
    );
    assert_eq!(csv.lines().count(), 6);
    assert!(!csv.contains('\r'));

    let fock = run_scan(&RunConfig {
        model: Model::Fock,
        ..cfg.clone()
    })
    .unwrap();
    assert_eq!(fock.curves[0].model_tag, ModelTag::Fock);
}

#[test]
fn report_json_round_trip() {
    let r = eq3_vs_eq4_contrast(&RunConfig {
        n_pairs: 1000,
        tau_steps: 9,
        ..RunConfig::default()
    })
    .unwrap();
    let json = serde_json::to_string(&r).unwrap();
    let back: homsim_core::ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}

#[test]
fn detuning_map_rows() {
    let cfg = RunConfig {
        tau_steps: 5,
        ..RunConfig::default()
    };
    let map = detuning_map(&cfg, 9).unwrap();
    assert_eq!(map.values.len(), 45);
    // the center row has δf = 0 and never leaves the dip
    assert!((0..5).all(|t| map.value(4, t) == 0.0));
    assert_eq!(map.weights[0], map.weights[8]);
    assert_eq!(map.to_csv().lines().count(), 46);
}
