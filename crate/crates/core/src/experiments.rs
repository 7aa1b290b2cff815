//! Scenario runners. Each returns an [`ExperimentReport`] whose checks carry
//! the measured value next to the tolerance it was held to.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coherence::{
    analytic_coincidence, output_intensities, pair_coincidence, scan, scan_ensemble,
    CoincidenceCurve, ModelTag,
};
use crate::config::{Model, RunConfig};
use crate::error::{HomError, Result};
use crate::fock::{
    coincidence_curve, coincidence_probability, make_product_state, witness_compare, FrequencyGrid,
    PairSpectrum, DEFAULT_SPAN_SIGMAS,
};
use crate::numeric::{compensated_sum, linspace};
use crate::spectra::{sample_pairs, sample_pairs_iid, SpectralModel};

/// Tolerance on the saturated plateau `|R − ½|` for `σ_eff·τ ≥ 2`.
pub const SATURATION_TOLERANCE: f64 = 1e-3;
/// Monte Carlo agreement, in standard errors.
pub const MC_SIGMAS: f64 = 5.0;
pub const SCALING_TOLERANCE: f64 = 1e-12;
pub const BORN_RULE_TOLERANCE: f64 = 1e-12;
/// Per-pair energy conservation, a few ulps of 2.
pub const ENERGY_TOLERANCE: f64 = 4.0 * f64::EPSILON;
pub const FIT_RESIDUAL_TOLERANCE: f64 = 1e-4;
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-6;
pub const REFINEMENT_TOLERANCE: f64 = 1e-4;
pub const FOCK_DIP_TOLERANCE: f64 = 1e-8;
pub const WITNESS_GAP_TOLERANCE: f64 = 1e-9;
pub const PLATEAU_TOLERANCE: f64 = 1e-6;
/// Delay, in units of 1/σ, treated as the distinguishable-photon limit.
pub const PLATEAU_DELAY_SIGMAS: f64 = 10.0;
/// Pump width used for the anticorrelated Fock state when none is given,
/// as a fraction of σ.
pub const DEFAULT_PUMP_FRACTION: f64 = 0.25;

pub const CSV_HEADER: &str = "tau,coincidence,std_error,model,bandwidth_ratio";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance`.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
        }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: measured > threshold,
            measured,
            tolerance: threshold,
        }
    }
}

/// A reported quantity that is documented but not held to a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub curves: Vec<CoincidenceCurve>,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub metadata: RunConfig,
}

impl ExperimentReport {
    fn new(name: &str, config: &RunConfig) -> Self {
        Self {
            name: name.to_string(),
            curves: Vec::new(),
            checks: Vec::new(),
            observations: Vec::new(),
            metadata: config.clone(),
        }
    }

    fn observe(&mut self, name: &str, value: f64) {
        self.observations.push(Observation {
            name: name.to_string(),
            value,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn curve(&self, tag: ModelTag, bandwidth_ratio: f64) -> Option<&CoincidenceCurve> {
        self.curves
            .iter()
            .find(|c| c.model_tag == tag && c.bandwidth_ratio == bandwidth_ratio)
    }

    /// One row per curve point under [`CSV_HEADER`]; LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for curve in &self.curves {
            for (tau, value, err) in curve.points() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    format_float(tau),
                    format_float(value),
                    format_float(err),
                    curve.model_tag,
                    format_float(curve.bandwidth_ratio)
                );
            }
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest `|mc − exact|` in units of the point's standard error. Points
/// with zero error must match exactly.
fn mc_deviation(mc: &CoincidenceCurve, exact: &CoincidenceCurve) -> f64 {
    mc.points()
        .zip(&exact.values)
        .map(|((_, v, e), x)| {
            let d = (v - x).abs();
            if e > 0.0 {
                d / e
            } else if d == 0.0 {
                0.0
            } else {
                f64::MAX
            }
        })
        .fold(0.0, f64::max)
}

fn analytic_curve(model: &SpectralModel, tau_grid: &[f64]) -> Result<CoincidenceCurve> {
    scan(model, tau_grid, 0, 0, true, true)
}

/// Single coincidence curve for the configured model.
pub fn run_scan(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let tau_grid = config.tau_grid();
    let mut report = ExperimentReport::new("scan", config);
    let curve = match config.model {
        Model::Coherence | Model::CoherenceUnshifted => {
            let shifted = config.model == Model::Coherence;
            scan(
                &config.spectral_model()?,
                &tau_grid,
                config.n_pairs,
                config.seed,
                shifted,
                config.analytic,
            )?
        }
        Model::Fock => {
            let spectrum = fock_spectrum(config);
            let grid = fock_grid(config, config.grid_points)?;
            coincidence_curve(&make_product_state(&grid, &spectrum)?, &tau_grid)?
        }
    };
    if config.model == Model::Coherence {
        report.checks.push(Check::at_most("zero-delay dip", curve.values[0], 0.0));
    }
    report.curves.push(curve);
    Ok(report)
}

fn fock_spectrum(config: &RunConfig) -> PairSpectrum {
    PairSpectrum {
        sigma: config.sigma,
        center_split: config.center_split,
        pump_sigma: config.pump_sigma,
    }
}

fn fock_grid(config: &RunConfig, points: usize) -> Result<FrequencyGrid> {
    FrequencyGrid::covering(config.sigma, config.center_split, DEFAULT_SPAN_SIGMAS, points)
}

/// Bandwidth-filtering family of shifted-model curves.
///
/// Landmark checks run on the closed form; with Monte Carlo enabled the
/// sampled curves are added and held to [`MC_SIGMAS`] standard errors.
pub fn reproduce_fig1d(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.mean_offset != 0.0 {
        return Err(HomError::Argument(
            "the bandwidth family is defined for zero mean offset".into(),
        ));
    }
    let tau_grid = config.tau_grid();
    let base = SpectralModel::centered(config.sigma)?.apply_filter(config.bandwidth_ratio)?;
    let mut ratios = config.ratios.clone();
    ratios.sort_by(|a, b| b.total_cmp(a));
    ratios.dedup();

    let mut report = ExperimentReport::new("sweep-bandwidth", config);
    let analytic: Vec<CoincidenceCurve> = ratios
        .iter()
        .map(|&r| analytic_curve(&base.apply_filter(r)?, &tau_grid))
        .collect::<Result<_>>()?;

    let zero_delay = analytic.iter().map(|c| c.values[0].abs()).fold(0.0, f64::max);
    report.checks.push(Check::at_most("zero-delay dip", zero_delay, 0.0));

    // plateau of the widest curve once σ_eff·τ >= 2
    let s_eff = base.effective_sigma();
    let full = analytic_curve(&base, &tau_grid)?;
    let saturation = full
        .points()
        .filter(|(t, _, _)| s_eff * t >= 2.0)
        .map(|(_, v, _)| (v - 0.5).abs())
        .fold(f64::NAN, f64::max);
    if saturation.is_nan() {
        return Err(HomError::Argument(format!(
            "tau-max must reach 2/σ_eff = {} to test saturation",
            2.0 / s_eff
        )));
    }
    report
        .checks
        .push(Check::at_most("saturation", saturation, SATURATION_TOLERANCE));

    let classical = analytic
        .iter()
        .flat_map(|c| c.values.iter().copied())
        .fold(f64::MIN, f64::max);
    report.checks.push(Check {
        name: "classical bound".into(),
        passed: classical < 0.5,
        measured: classical,
        tolerance: 0.5,
    });

    let scaling = ratios
        .iter()
        .zip(&analytic)
        .map(|(&r, curve)| {
            let rescaled: Vec<f64> = tau_grid.iter().map(|&t| analytic_coincidence(&base, r * t)).collect();
            max_abs_diff(&curve.values, &rescaled)
        })
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("scaling law", scaling, SCALING_TOLERANCE));

    // ratios are sorted wide to narrow; each narrower curve must sit strictly
    // below the wider one on (0, 2/σ)
    let window: Vec<usize> = tau_grid
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 0.0 && config.sigma * t < 2.0)
        .map(|(i, _)| i)
        .collect();
    if ratios.len() > 1 {
        let min_gap = analytic
            .windows(2)
            .flat_map(|w| window.iter().map(move |&i| w[0].values[i] - w[1].values[i]))
            .fold(f64::MAX, f64::min);
        report.checks.push(Check::above("bandwidth ordering", min_gap, 0.0));

        // first delay at which each curve is within the saturation tolerance;
        // narrower curves must get there no earlier
        let onset: Vec<Option<f64>> = analytic
            .iter()
            .map(|c| {
                c.points()
                    .find(|(_, v, _)| (v - 0.5).abs() < SATURATION_TOLERANCE)
                    .map(|(t, _, _)| t)
            })
            .collect();
        let violations = onset
            .windows(2)
            .filter(|w| match (w[0], w[1]) {
                (Some(wide), Some(narrow)) => narrow < wide,
                (None, Some(_)) => true,
                _ => false,
            })
            .count();
        report
            .checks
            .push(Check::at_most("slower saturation", violations as f64, 0.0));
        for (r, t) in ratios.iter().zip(&onset) {
            if let Some(t) = t {
                report.observe(&format!("saturation onset tau (ratio {r})"), *t);
            }
        }
    }

    if config.analytic {
        report.curves = analytic;
        return Ok(report);
    }

    let mut worst = 0.0_f64;
    let mut mc_above_bound = f64::MIN;
    let mut curves = Vec::with_capacity(2 * ratios.len());
    for (&r, exact) in ratios.iter().zip(analytic) {
        let model = base.apply_filter(r)?;
        let pairs = sample_pairs(&model, config.n_pairs, config.seed)?;
        let mc = scan_ensemble(&pairs, &tau_grid, true, model.bandwidth_ratio())?;
        worst = worst.max(mc_deviation(&mc, &exact));
        mc_above_bound = mc_above_bound.max(
            mc.points()
                .map(|(_, v, e)| v - 0.5 - MC_SIGMAS * e)
                .fold(f64::MIN, f64::max),
        );
        curves.push(exact);
        curves.push(mc);
    }
    report
        .checks
        .push(Check::at_most("monte carlo agreement", worst, MC_SIGMAS));
    report.checks.push(Check::at_most(
        "monte carlo classical bound",
        mc_above_bound,
        0.0,
    ));
    report.curves = curves;
    Ok(report)
}

/// Mean port intensities over an antithetic ensemble at every grid delay.
pub fn born_rule_check(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.mean_offset != 0.0 {
        return Err(HomError::Argument(
            "port uniformity needs a zero-mean detuning spectrum".into(),
        ));
    }
    let model = config.spectral_model()?;
    let pairs = sample_pairs(&model, config.n_pairs, config.seed)?;
    let mut report = ExperimentReport::new("born-rule", config);
    let n = pairs.len() as f64;

    let mut deviation = 0.0_f64;
    let mut energy = 0.0_f64;
    let mut zero_delay = 0.0_f64;
    for &tau in &config.tau_grid() {
        let intensities: Vec<_> = pairs.iter().map(|p| output_intensities(p, tau)).collect();
        let mean_a = compensated_sum(intensities.iter().map(|i| i.i_a)) / n;
        let mean_b = compensated_sum(intensities.iter().map(|i| i.i_b)) / n;
        deviation = deviation.max((mean_a - 1.0).abs()).max((mean_b - 1.0).abs());
        energy = intensities
            .iter()
            .map(|i| (i.total() - 2.0).abs())
            .fold(energy, f64::max);
        if tau == 0.0 {
            zero_delay = intensities
                .iter()
                .map(|i| (i.i_a - 1.0).abs().max((i.i_b - 1.0).abs()))
                .fold(0.0, f64::max);
        }
    }
    report
        .checks
        .push(Check::at_most("mean port intensity", deviation, BORN_RULE_TOLERANCE));
    report
        .checks
        .push(Check::at_most("energy conservation", energy, ENERGY_TOLERANCE));
    report
        .checks
        .push(Check::at_most("balanced at zero delay", zero_delay, 0.0));

    // i.i.d. control: deviation shrinks like 1/√n, reported only
    let control = sample_pairs_iid(&model, config.n_pairs, config.seed)?;
    let tau = config.tau_max;
    let mean_a = compensated_sum(control.iter().map(|p| output_intensities(p, tau).i_a)) / n;
    report.observe("iid control deviation at tau-max", (mean_a - 1.0).abs());
    report.observe("iid control 1/sqrt(n)", 1.0 / n.sqrt());
    Ok(report)
}

/// Unshifted (`cos²`) against shifted (`sin²`) coincidence.
pub fn eq3_vs_eq4_contrast(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let model = config.spectral_model()?;
    let tau_grid = config.tau_grid();
    let mut report = ExperimentReport::new("contrast", config);

    let unshifted = scan(&model, &tau_grid, 0, 0, false, true)?;
    let shifted = scan(&model, &tau_grid, 0, 0, true, true)?;
    report.checks.push(Check::at_most(
        "unshifted zero delay",
        (unshifted.values[0] - 1.0).abs(),
        0.0,
    ));
    report
        .checks
        .push(Check::at_most("shifted zero delay", shifted.values[0], 0.0));
    report.checks.push(Check::at_most(
        "zero-delay contrast",
        (shifted.values[0] - unshifted.values[0] + 1.0).abs(),
        0.0,
    ));
    let complement = unshifted
        .values
        .iter()
        .zip(&shifted.values)
        .map(|(u, s)| (u + s - 1.0).abs())
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("complementarity", complement, 1e-15));
    if model.mean_offset() == 0.0 {
        let floor = unshifted.values.iter().copied().fold(f64::MAX, f64::min);
        report.checks.push(Check {
            name: "unshifted above classical bound".into(),
            passed: floor >= 0.5,
            measured: floor,
            tolerance: 0.5,
        });
    }

    if !config.analytic {
        let pairs = sample_pairs(&model, config.n_pairs, config.seed)?;
        let mc_un = scan_ensemble(&pairs, &tau_grid, false, model.bandwidth_ratio())?;
        let mc_sh = scan_ensemble(&pairs, &tau_grid, true, model.bandwidth_ratio())?;
        let worst = mc_deviation(&mc_un, &unshifted).max(mc_deviation(&mc_sh, &shifted));
        report
            .checks
            .push(Check::at_most("monte carlo agreement", worst, MC_SIGMAS));
        report.checks.push(Check::at_most(
            "monte carlo zero-delay contrast",
            (mc_sh.values[0] - mc_un.values[0] + 1.0).abs(),
            0.0,
        ));
        if model.mean_offset() == 0.0 {
            let floor = mc_un
                .points()
                .map(|(_, v, e)| v - 0.5 + MC_SIGMAS * e)
                .fold(f64::MAX, f64::min);
            report.checks.push(Check {
                name: "monte carlo unshifted above classical bound".into(),
                passed: floor >= 0.0,
                measured: floor,
                tolerance: 0.0,
            });
        }
        report.curves = vec![unshifted, shifted, mc_un, mc_sh];
    } else {
        report.curves = vec![unshifted, shifted];
    }
    Ok(report)
}

/// Stationary points of `½(1 − e^{−aτ²}cos 2μτ)` on `(0, tau_max]`.
///
/// They solve `aτ·cos 2μτ + μ·sin 2μτ = 0`, one root in each interval
/// `((k − ½)π/2μ, kπ/2μ]`; the Gaussian envelope pulls them below `kπ/2μ`.
pub fn fringe_stationary_points(model: &SpectralModel, tau_max: f64) -> Vec<f64> {
    let mu = model.mean_offset();
    if mu == 0.0 {
        return Vec::new();
    }
    let mu = mu.abs();
    let s = model.effective_sigma();
    let a = 2.0 * s * s;
    let g = |t: f64| a * t * (2.0 * mu * t).cos() + mu * (2.0 * mu * t).sin();
    let step = PI / (2.0 * mu);
    let mut roots = Vec::new();
    for k in 1.. {
        let (mut lo, mut hi) = ((k as f64 - 0.5) * step, k as f64 * step);
        if lo > tau_max {
            break;
        }
        let g_lo = g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == (g_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if root <= tau_max {
            roots.push(root);
        }
    }
    roots
}

/// Shifted-model curve with a nonzero mean detuning: the coincidence
/// oscillates about ½ with period `π/μ` in τ inside the coherence envelope.
pub fn fringe_extension(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let model = config.spectral_model()?;
    let mu = model.mean_offset();
    if mu < 0.0 {
        return Err(HomError::Argument(format!(
            "fringe extension needs a non-negative mean offset, got {mu}"
        )));
    }
    let tau_grid = config.tau_grid();
    let mut report = ExperimentReport::new("fringe", config);
    let analytic = analytic_curve(&model, &tau_grid)?;

    if mu == 0.0 {
        let drops = analytic.values.windows(2).filter(|w| w[1] < w[0]).count();
        report.checks.push(Check::at_most("monotone without offset", drops as f64, 0.0));
        report.curves.push(analytic);
        return Ok(report);
    }

    // odd multiples of π/(2μ): the cosine factor is −1 there
    let peaks: Vec<f64> = (0..)
        .map(|j| (2 * j + 1) as f64 * PI / (2.0 * mu))
        .take_while(|&t| t <= config.tau_max)
        .collect();
    let s_eff = model.effective_sigma();
    if peaks.is_empty() {
        report.observe("fringe peaks inside range", 0.0);
    } else {
        let peak_curve = analytic_curve(&model, &peaks)?;
        let lowest = peak_curve.values.iter().copied().fold(f64::MAX, f64::min) - 0.5;
        if mu >= 3.0 * s_eff {
            report
                .checks
                .push(Check::above("fringe above classical bound", lowest, 0.0));
        } else {
            report.observe("lowest fringe peak minus 1/2", lowest);
        }
        if !config.analytic {
            let pairs = sample_pairs(&model, config.n_pairs, config.seed)?;
            let mc_peaks = scan_ensemble(&pairs, &peaks, true, model.bandwidth_ratio())?;
            report.checks.push(Check::at_most(
                "monte carlo agreement at fringe peaks",
                mc_deviation(&mc_peaks, &peak_curve),
                MC_SIGMAS,
            ));
            let mc = scan_ensemble(&pairs, &tau_grid, true, model.bandwidth_ratio())?;
            report.checks.push(Check::at_most(
                "monte carlo agreement",
                mc_deviation(&mc, &analytic),
                MC_SIGMAS,
            ));
            report.curves.push(mc_peaks);
            report.curves.push(mc);
        }
        report.curves.insert(0, peak_curve);
    }

    // grid search for extrema against the stationary-point condition, kept
    // where the envelope is well above rounding
    let fine = linspace(0.0, config.tau_max, 20_001);
    let h = fine[1] - fine[0];
    let f: Vec<f64> = fine.iter().map(|&t| analytic_coincidence(&model, t)).collect();
    let visible = |t: f64| (-2.0 * s_eff * s_eff * t * t).exp() > 1e-6;
    let found: Vec<f64> = (1..fine.len() - 1)
        .filter(|&i| (f[i] - f[i - 1]) * (f[i + 1] - f[i]) < 0.0 && visible(fine[i]))
        .map(|i| fine[i])
        .collect();
    let expected: Vec<f64> = fringe_stationary_points(&model, config.tau_max - h)
        .into_iter()
        .filter(|&t| visible(t))
        .collect();
    let miss = if found.len() == expected.len() {
        max_abs_diff(&found, &expected)
    } else {
        f64::MAX
    };
    report
        .checks
        .push(Check::at_most("extrema location", miss, h));
    let offset = expected
        .iter()
        .map(|&t| {
            let k = (2.0 * mu * t / PI).round();
            (t - k * PI / (2.0 * mu)).abs()
        })
        .fold(0.0, f64::max);
    report.observe("max extremum offset from k*pi/(2mu)", offset);
    report.curves.insert(0, analytic);
    Ok(report)
}

/// Least-squares fit of `½(1 − e^{−kτ²})`; returns `(k, max |residual|)`.
pub fn fit_gaussian_dip(tau: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    let model = |k: f64, t: f64| 0.5 * (1.0 - (-k * t * t).exp());
    let start = tau
        .iter()
        .zip(values)
        .filter(|(&t, &v)| t > 0.0 && v > 0.0 && v < 0.5)
        .min_by(|a, b| (a.1 - 0.25).abs().total_cmp(&(b.1 - 0.25).abs()))
        .map(|(&t, &v)| -(1.0 - 2.0 * v).ln() / (t * t))
        .ok_or_else(|| HomError::Argument("curve has no point inside the dip".into()))?;
    let mut k = start;
    for _ in 0..100 {
        let (mut num, mut den) = (0.0, 0.0);
        for (&t, &v) in tau.iter().zip(values) {
            let jac = 0.5 * t * t * (-k * t * t).exp();
            num += jac * (v - model(k, t));
            den += jac * jac;
        }
        if den == 0.0 {
            break;
        }
        let step = num / den;
        k += step;
        if step.abs() <= 1e-15 * k.abs() {
            break;
        }
    }
    let residual = tau
        .iter()
        .zip(values)
        .map(|(&t, &v)| (v - model(k, t)).abs())
        .fold(0.0, f64::max);
    Ok((k, residual))
}

/// Fock curve of a frequency-anticorrelated pair against the coherence
/// closed form.
///
/// The pair detuning of the coherence model is the half-difference
/// frequency `(ω₁ − ω₂)/2`, whose spread is `σ/√2` for photons of intensity
/// width `σ`. With that mapping both curves are `½(1 − e^{−σ²τ²})`.
pub fn model_equivalence(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.mean_offset != 0.0 || config.center_split != 0.0 {
        return Err(HomError::Argument(
            "model equivalence is defined for a degenerate, zero-offset spectrum".into(),
        ));
    }
    let sigma = config.sigma;
    let spectrum = PairSpectrum::anticorrelated(
        sigma,
        0.0,
        config.pump_sigma.unwrap_or(DEFAULT_PUMP_FRACTION * sigma),
    );
    let tau_grid = config.tau_grid();
    let mut report = ExperimentReport::new("compare", config);

    let grid = fock_grid(config, config.grid_points)?;
    let state = make_product_state(&grid, &spectrum)?;
    let fock = coincidence_curve(&state, &tau_grid)?;

    let (k_fit, residual) = fit_gaussian_dip(&tau_grid, &fock.values)?;
    if residual > FIT_RESIDUAL_TOLERANCE {
        return Err(HomError::ModelMismatch {
            residual,
            tolerance: FIT_RESIDUAL_TOLERANCE,
        });
    }
    report
        .checks
        .push(Check::at_most("gaussian fit residual", residual, FIT_RESIDUAL_TOLERANCE));
    // exchange integral of the Gaussian pair: k = 2·Var[(ω₁ − ω₂)/2] = σ²
    let k_exact = sigma * sigma;
    report.checks.push(Check::at_most(
        "fitted width vs exchange integral",
        (k_fit - k_exact).abs() / k_exact,
        FIT_RESIDUAL_TOLERANCE,
    ));
    let k_state = 2.0 * state.half_difference_variance();
    report.observe("fitted k", k_fit);
    report.observe("2 var of half-difference frequency", k_state);

    let mapped = SpectralModel::centered(sigma / std::f64::consts::SQRT_2)?;
    let coherence = analytic_curve(&mapped, &tau_grid)?;
    report.checks.push(Check::at_most(
        "max pointwise gap",
        max_abs_diff(&fock.values, &coherence.values),
        EQUIVALENCE_TOLERANCE,
    ));

    let refined_state = make_product_state(&grid.refined(), &spectrum)?;
    let refined = coincidence_curve(&refined_state, &tau_grid)?;
    report.checks.push(Check::at_most(
        "grid refinement",
        max_abs_diff(&fock.values, &refined.values),
        REFINEMENT_TOLERANCE,
    ));

    let far = PLATEAU_DELAY_SIGMAS / sigma;
    let plateau = (coincidence_probability(&state, far)? - 0.5)
        .abs()
        .max((analytic_coincidence(&mapped, far) - 0.5).abs());
    report
        .checks
        .push(Check::at_most("distinguishable plateau", plateau, PLATEAU_TOLERANCE));
    report.curves = vec![fock, coherence];
    Ok(report)
}

/// Fock coincidence for a path-product input and its path-entangled
/// counterpart.
pub fn witness(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spectrum = fock_spectrum(config);
    let grid = fock_grid(config, config.grid_points)?;
    let tau_grid = config.tau_grid();
    let result = witness_compare(&grid, &spectrum, config.psi_rel, &tau_grid)?;
    let mut report = ExperimentReport::new("witness", config);

    let product_dip = result.product.values[0];
    let entangled_dip = result.entangled.values[0];
    let symmetric = config.center_split == 0.0;
    if symmetric {
        report
            .checks
            .push(Check::at_most("product zero-delay coincidence", product_dip, FOCK_DIP_TOLERANCE));
    } else {
        report.observe("product zero-delay coincidence", product_dip);
    }
    if config.psi_rel == 0.0 {
        report.checks.push(Check::at_most(
            "entangled zero-delay coincidence",
            entangled_dip,
            FOCK_DIP_TOLERANCE,
        ));
    } else {
        report.observe("entangled zero-delay coincidence", entangled_dip);
    }
    if symmetric && config.psi_rel == 0.0 {
        report
            .checks
            .push(Check::at_most("max curve gap", result.max_curve_gap, WITNESS_GAP_TOLERANCE));
    } else {
        report.observe("max curve gap", result.max_curve_gap);
    }

    let far = PLATEAU_DELAY_SIGMAS / config.sigma;
    let product = make_product_state(&grid, &spectrum)?;
    let entangled = crate::fock::make_entangled_state(&grid, &spectrum, config.psi_rel)?;
    let plateau = (coincidence_probability(&product, far)? - 0.5)
        .abs()
        .max((coincidence_probability(&entangled, far)? - 0.5).abs());
    report
        .checks
        .push(Check::at_most("distinguishable plateau", plateau, PLATEAU_TOLERANCE));
    report.observe("dip depth product", result.dip_depth_product);
    report.observe("dip depth entangled", result.dip_depth_entangled);
    report.curves = vec![result.product, result.entangled];
    Ok(report)
}

/// Per-detuning coincidence `sin²(δf·τ)` before ensemble averaging, with
/// the spectral weight of each detuning row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningMap {
    pub detunings: Vec<f64>,
    pub weights: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// Row-major, one row per detuning.
    pub values: Vec<f64>,
}

pub const DETUNING_MAP_HEADER: &str = "tau,delta_f,weight,coincidence";

impl DetuningMap {
    pub fn value(&self, detuning: usize, tau: usize) -> f64 {
        self.values[detuning * self.tau_grid.len() + tau]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(DETUNING_MAP_HEADER);
        out.push('\n');
        for (d, (&df, &w)) in self.detunings.iter().zip(&self.weights).enumerate() {
            for (t, &tau) in self.tau_grid.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    format_float(tau),
                    format_float(df),
                    format_float(w),
                    format_float(self.value(d, t))
                );
            }
        }
        out
    }
}

/// Detuning × delay table spanning ±4σ_eff around the mean offset.
pub fn detuning_map(config: &RunConfig, detuning_steps: usize) -> Result<DetuningMap> {
    config.validate()?;
    if detuning_steps < 2 {
        return Err(HomError::Argument("detuning map needs >= 2 rows".into()));
    }
    let model = config.spectral_model()?;
    let half = 4.0 * model.effective_sigma();
    let detunings = linspace(model.mean_offset() - half, model.mean_offset() + half, detuning_steps);
    let weights = detunings.iter().map(|&x| model.pdf(x)).collect();
    let tau_grid = config.tau_grid();
    let values = detunings
        .iter()
        .flat_map(|&df| {
            let pair = crate::spectra::PhotonPair::new(df);
            tau_grid.iter().map(move |&t| pair_coincidence(&pair, t, true))
        })
        .collect();
    Ok(DetuningMap {
        detunings,
        weights,
        tau_grid,
        values,
    })
}
