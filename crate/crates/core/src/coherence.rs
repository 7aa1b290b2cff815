//! Wave-coherence beam-splitter model.
//!
//! Every pair reaches the beam splitter with a definite difference phase
//! `δφ = δf·τ` (I₀ = 1). The output ports see `i_a = 1 − sin δφ` and
//! `i_b = 1 + sin δφ`; their product is the pair coincidence `cos² δφ`.
//! Shifting `δφ` by `±π/2` turns the coincidence into `sin² δφ`, which
//! vanishes at zero delay for every pair.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HomError, Result};
use crate::numeric::compensated_sum;
use crate::spectra::{sample_pairs, PhotonPair, SpectralModel};

/// Port intensities in units of I₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityPair {
    pub i_a: f64,
    pub i_b: f64,
}

impl IntensityPair {
    pub fn total(&self) -> f64 {
        self.i_a + self.i_b
    }
}

/// Which model produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    /// Monte Carlo, `sin² δφ` per pair.
    CoherenceShifted,
    /// Monte Carlo, `cos² δφ` per pair.
    CoherenceUnshifted,
    /// Closed-form Gaussian expectation of `sin² δφ`.
    CoherenceAnalytic,
    /// Closed-form Gaussian expectation of `cos² δφ`.
    CoherenceAnalyticUnshifted,
    /// Two-photon oracle with a product (non-entangled) input.
    Fock,
    /// Two-photon oracle with a path-entangled input.
    FockEntangled,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::CoherenceShifted => "coherence-shifted",
            ModelTag::CoherenceUnshifted => "coherence-unshifted",
            ModelTag::CoherenceAnalytic => "coherence-analytic",
            ModelTag::CoherenceAnalyticUnshifted => "coherence-analytic-unshifted",
            ModelTag::Fock => "fock",
            ModelTag::FockEntangled => "fock-entangled",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = HomError;

    fn from_str(s: &str) -> Result<Self> {
        [
            ModelTag::CoherenceShifted,
            ModelTag::CoherenceUnshifted,
            ModelTag::CoherenceAnalytic,
            ModelTag::CoherenceAnalyticUnshifted,
            ModelTag::Fock,
            ModelTag::FockEntangled,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| HomError::Argument(format!("unknown model tag `{s}`")))
    }
}

/// Normalized coincidence `⟨R_AB⟩/I₀²` sampled on a delay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceCurve {
    pub tau_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Monte Carlo standard error per point; zero for deterministic curves.
    pub std_errors: Vec<f64>,
    pub model_tag: ModelTag,
    pub bandwidth_ratio: f64,
}

impl CoincidenceCurve {
    pub fn new(
        tau_grid: Vec<f64>,
        values: Vec<f64>,
        std_errors: Vec<f64>,
        model_tag: ModelTag,
        bandwidth_ratio: f64,
    ) -> Result<Self> {
        validate_tau_grid(&tau_grid)?;
        if values.len() != tau_grid.len() || std_errors.len() != tau_grid.len() {
            return Err(HomError::Contract(format!(
                "curve lengths differ: {} delays, {} values, {} errors",
                tau_grid.len(),
                values.len(),
                std_errors.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(HomError::Contract(format!(
                "coincidence value {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            tau_grid,
            values,
            std_errors,
            model_tag,
            bandwidth_ratio,
        })
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }

    /// Value at a delay that is exactly on the grid.
    pub fn value_at(&self, tau: f64) -> Option<f64> {
        self.tau_grid
            .iter()
            .position(|&t| t == tau)
            .map(|i| self.values[i])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.tau_grid
            .iter()
            .zip(&self.values)
            .zip(&self.std_errors)
            .map(|((&t, &v), &e)| (t, v, e))
    }
}

pub(crate) fn validate_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return Err(HomError::Argument("delay grid is empty".into()));
    }
    if tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(HomError::Argument("delay grid has non-finite entries".into()));
    }
    if tau_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HomError::Argument(
            "delay grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Pair phase difference at delay `tau`, with the pair's ±π/2 shift when
/// `shifted`.
pub fn delta_phi(pair: &PhotonPair, tau: f64, shifted: bool) -> f64 {
    let phase = pair.delta_f * tau;
    if shifted {
        phase + pair.shift_convention.value() * FRAC_PI_2
    } else {
        phase
    }
}

/// Port intensities for the unshifted phase difference.
pub fn output_intensities(pair: &PhotonPair, tau: f64) -> IntensityPair {
    let s = delta_phi(pair, tau, false).sin();
    IntensityPair {
        i_a: 1.0 - s,
        i_b: 1.0 + s,
    }
}

/// Normalized per-pair coincidence: `cos²(δf·τ)` unshifted, `sin²(δf·τ)`
/// shifted. The shift sign cancels in the square.
pub fn pair_coincidence(pair: &PhotonPair, tau: f64, shifted: bool) -> f64 {
    let phase = pair.delta_f * tau;
    if shifted {
        let s = phase.sin();
        s * s
    } else {
        let c = phase.cos();
        c * c
    }
}

/// Mean and standard error of the per-pair coincidence over an antithetic
/// ensemble.
///
/// The two members of a couple are not independent, so the error is taken
/// over the `n/2` couple means.
pub fn ensemble_stats(pairs: &[PhotonPair], tau: f64, shifted: bool) -> Result<(f64, f64)> {
    if pairs.len() < 2 || !pairs.len().is_multiple_of(2) {
        return Err(HomError::Argument(format!(
            "ensemble must hold an even number of pairs >= 2, got {}",
            pairs.len()
        )));
    }
    let couple_means: Vec<f64> = pairs
        .chunks_exact(2)
        .map(|c| 0.5 * (pair_coincidence(&c[0], tau, shifted) + pair_coincidence(&c[1], tau, shifted)))
        .collect();
    let m = couple_means.len() as f64;
    let mean = compensated_sum(couple_means.iter().copied()) / m;
    let std_error = if couple_means.len() > 1 {
        let ss = compensated_sum(couple_means.iter().map(|c| (c - mean) * (c - mean)));
        (ss / (m - 1.0)).sqrt() / m.sqrt()
    } else {
        0.0
    };
    Ok((mean, std_error))
}

/// Monte Carlo estimate of `⟨R_AB(τ)⟩ = (1/N) Σ_j R_j(τ)` over
/// `sample_pairs(model, n, seed)`.
pub fn ensemble_coincidence(
    model: &SpectralModel,
    tau: f64,
    n: usize,
    seed: u64,
    shifted: bool,
) -> Result<(f64, f64)> {
    let pairs = sample_pairs(model, n, seed)?;
    ensemble_stats(&pairs, tau, shifted)
}

/// `E[sin²((μ + X)τ)]` for `X ~ N(0, σ_eff²)`:
/// `½·(1 − exp(−2σ_eff²τ²)·cos(2μτ))`.
pub fn analytic_coincidence(model: &SpectralModel, tau: f64) -> f64 {
    0.5 * (1.0 - coherence_envelope(model, tau))
}

/// `E[cos²((μ + X)τ)]`, the unshifted counterpart.
pub fn analytic_coincidence_unshifted(model: &SpectralModel, tau: f64) -> f64 {
    0.5 * (1.0 + coherence_envelope(model, tau))
}

/// `E[cos(2δf·τ)] = exp(−2σ_eff²τ²)·cos(2μτ)`.
fn coherence_envelope(model: &SpectralModel, tau: f64) -> f64 {
    let s = model.effective_sigma();
    (-2.0 * s * s * tau * tau).exp() * (2.0 * model.mean_offset() * tau).cos()
}

/// Coincidence curve over `tau_grid`.
///
/// In Monte Carlo mode one ensemble is drawn and reused at every delay, so
/// each pair keeps its detuning while its phase grows with τ.
pub fn scan(
    model: &SpectralModel,
    tau_grid: &[f64],
    n: usize,
    seed: u64,
    shifted: bool,
    analytic: bool,
) -> Result<CoincidenceCurve> {
    model.validate()?;
    validate_tau_grid(tau_grid)?;
    let ratio = model.bandwidth_ratio();
    if analytic {
        let (f, tag): (fn(&SpectralModel, f64) -> f64, _) = if shifted {
            (analytic_coincidence, ModelTag::CoherenceAnalytic)
        } else {
            (analytic_coincidence_unshifted, ModelTag::CoherenceAnalyticUnshifted)
        };
        let values = tau_grid.iter().map(|&t| f(model, t)).collect();
        return CoincidenceCurve::new(tau_grid.to_vec(), values, vec![0.0; tau_grid.len()], tag, ratio);
    }
    let pairs = sample_pairs(model, n, seed)?;
    scan_ensemble(&pairs, tau_grid, shifted, ratio)
}

/// Monte Carlo curve over a pre-drawn ensemble.
pub fn scan_ensemble(
    pairs: &[PhotonPair],
    tau_grid: &[f64],
    shifted: bool,
    bandwidth_ratio: f64,
) -> Result<CoincidenceCurve> {
    validate_tau_grid(tau_grid)?;
    let stats = tau_grid
        .par_iter()
        .map(|&t| ensemble_stats(pairs, t, shifted))
        .collect::<Result<Vec<_>>>()?;
    let (values, errors) = stats.into_iter().unzip();
    let tag = if shifted {
        ModelTag::CoherenceShifted
    } else {
        ModelTag::CoherenceUnshifted
    };
    CoincidenceCurve::new(tau_grid.to_vec(), values, errors, tag, bandwidth_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::ShiftSign;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Composite Simpson of `pdf(x)·g(x)` for a Gaussian written out here,
    /// independent of `SpectralModel::pdf` and of the closed form.
    fn gaussian_expectation(sigma: f64, mu: f64, g: impl Fn(f64) -> f64) -> f64 {
        let (a, b, n) = (mu - 14.0 * sigma, mu + 14.0 * sigma, 40_000);
        let h = (b - a) / n as f64;
        let w = |x: f64| {
            let z = (x - mu) / sigma;
            (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt()) * g(x)
        };
        let mut s = w(a) + w(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * w(a + h * i as f64);
        }
        s * h / 3.0
    }

    fn model(sigma: f64, mu: f64, r: f64) -> SpectralModel {
        SpectralModel::new(sigma, mu, r).unwrap()
    }

    #[test]
    fn delta_phi_definitions() {
        let p = PhotonPair::new(0.0);
        assert_eq!(delta_phi(&p, 123.0, false), 0.0);
        assert_eq!(delta_phi(&PhotonPair::new(1.0), 1.0, false), 1.0);
        assert_eq!(delta_phi(&p, 5.0, true), FRAC_PI_2);
        assert_eq!(delta_phi(&p.with_shift(ShiftSign::Minus), 5.0, true), -FRAC_PI_2);
    }

    #[test]
    fn intensities_at_landmarks() {
        let balanced = output_intensities(&PhotonPair::new(0.0), 3.0);
        assert_eq!(balanced, IntensityPair { i_a: 1.0, i_b: 1.0 });
        let extreme = output_intensities(&PhotonPair::new(FRAC_PI_2), 1.0);
        assert_eq!(extreme, IntensityPair { i_a: 0.0, i_b: 2.0 });
    }

    #[test]
    fn global_phase_is_invisible() {
        let p = PhotonPair::new(0.83);
        let q = p.with_global_phase(1.234);
        assert_eq!(output_intensities(&p, 0.7), output_intensities(&q, 0.7));
        assert_eq!(pair_coincidence(&p, 0.7, true), pair_coincidence(&q, 0.7, true));
        assert_eq!(pair_coincidence(&p, 0.7, false), pair_coincidence(&q, 0.7, false));
    }

    #[test]
    fn coincidence_landmarks() {
        let p = PhotonPair::new(0.0);
        assert_eq!(pair_coincidence(&p, 1.0, true), 0.0);
        assert_eq!(pair_coincidence(&p, 1.0, false), 1.0);
        let plus = PhotonPair::new(0.37);
        let minus = PhotonPair::new(-0.37);
        assert_eq!(pair_coincidence(&plus, 2.1, true), pair_coincidence(&minus, 2.1, true));
        assert_eq!(pair_coincidence(&plus, 2.1, false), pair_coincidence(&minus, 2.1, false));
    }

    #[test]
    fn coincidence_is_product_of_port_intensities() {
        // Eq. (3) route: i_a·i_b = (1 − sin δφ)(1 + sin δφ)
        // Eq. (4) route: the same product at δφ' = δφ ± π/2
        for &df in &[-1.7, -0.2, 0.0, 0.4, 2.9] {
            for sign in [ShiftSign::Plus, ShiftSign::Minus] {
                let p = PhotonPair::new(df).with_shift(sign);
                let tau = 0.61;
                let io = output_intensities(&p, tau);
                assert_relative_eq!(io.i_a * io.i_b, pair_coincidence(&p, tau, false), epsilon = 1e-15);
                let s = delta_phi(&p, tau, true).sin();
                assert_relative_eq!((1.0 - s) * (1.0 + s), pair_coincidence(&p, tau, true), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn analytic_matches_quadrature() {
        for &(sigma, mu, tau) in &[
            (1.0, 0.0, 1.0),
            (1.0, 0.0, 2.0),
            (1.0, 0.0, 0.5),
            (1.0, 3.0, PI / 6.0),
            (0.6, 1.1, 0.9),
        ] {
            let m = model(sigma, mu, 1.0);
            let sin2 = gaussian_expectation(sigma, mu, |x| (x * tau).sin().powi(2));
            let cos2 = gaussian_expectation(sigma, mu, |x| (x * tau).cos().powi(2));
            assert_relative_eq!(analytic_coincidence(&m, tau), sin2, epsilon = 1e-12);
            assert_relative_eq!(analytic_coincidence_unshifted(&m, tau), cos2, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_frozen_values() {
        // frozen from adaptive quadrature of pdf(x)·sin²(xτ)
        let m = model(1.0, 0.0, 1.0);
        assert_eq!(analytic_coincidence(&m, 0.0), 0.0);
        assert_relative_eq!(analytic_coincidence(&m, 1.0), 0.432_332_358_381_693_7, epsilon = 1e-15);
        assert_relative_eq!(analytic_coincidence(&m, 2.0), 0.499_832_268_686_048_7, epsilon = 1e-15);
        let fringe = model(1.0, 3.0, 1.0);
        assert_relative_eq!(analytic_coincidence(&fringe, PI / 6.0), 0.788_962_448_246_364_7, epsilon = 1e-14);
    }

    #[test]
    fn ensemble_zero_delay_is_exact() {
        let m = model(1.0, 0.0, 1.0);
        assert_eq!(ensemble_coincidence(&m, 0.0, 1000, 5, true).unwrap(), (0.0, 0.0));
        assert_eq!(ensemble_coincidence(&m, 0.0, 1000, 5, false).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn ensemble_tracks_analytic() {
        let m = model(1.0, 0.0, 1.0);
        let (mean, se) = ensemble_coincidence(&m, 1.0, 100_000, 7, true).unwrap();
        let exact = analytic_coincidence(&m, 1.0);
        assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} (se {se})");
        let (mean, se) = ensemble_coincidence(&m, 2.0, 100_000, 7, true).unwrap();
        assert!((mean - 0.5).abs() < 5.0 * se, "{mean} (se {se})");
        // holds at this seed; 1e-3 is below one standard error (~1.6e-3)
        assert!((mean - 0.5).abs() < 1e-3);
    }

    #[test]
    fn ensemble_rejects_odd_counts() {
        let m = model(1.0, 0.0, 1.0);
        assert!(ensemble_coincidence(&m, 1.0, 7, 5, true).is_err());
    }

    #[test]
    fn scan_grid_zero_only() {
        let m = model(1.0, 0.0, 1.0);
        let c = scan(&m, &[0.0], 100, 1, true, false).unwrap();
        assert_eq!(c.values, vec![0.0]);
        assert_eq!(c.model_tag, ModelTag::CoherenceShifted);
    }

    #[test]
    fn scan_analytic_landmarks() {
        let m = model(2.0, 0.0, 1.0);
        let grid = [0.0, 0.5, 1.0, 1.5];
        let c = scan(&m, &grid, 0, 0, true, true).unwrap();
        assert_eq!(c.model_tag, ModelTag::CoherenceAnalytic);
        assert_eq!(c.values[0], 0.0);
        assert_relative_eq!(c.values[1], 0.432_332_358_381_693_7, epsilon = 1e-15);
        assert_relative_eq!(c.values[2], 0.499_832_268_686_048_7, epsilon = 1e-15);
        assert_relative_eq!(c.values[3], 0.499_999_992_385_010_1, epsilon = 1e-15);
        assert!(c.std_errors.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let m = model(1.0, 0.0, 1.0);
        assert!(scan(&m, &[], 10, 1, true, true).is_err());
        assert!(scan(&m, &[0.0, 0.0], 10, 1, true, true).is_err());
        assert!(scan(&m, &[1.0, 0.5], 10, 1, true, true).is_err());
        assert!(scan(&m, &[0.0, f64::NAN], 10, 1, true, true).is_err());
    }

    #[test]
    fn narrower_spectra_rise_more_slowly() {
        let grid: Vec<f64> = (1..40).map(|i| i as f64 * 0.05).collect();
        let curves: Vec<_> = [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&r| scan(&model(1.0, 0.0, r), &grid, 0, 0, true, true).unwrap())
            .collect();
        for w in curves.windows(2) {
            for (lo, hi) in w[0].values.iter().zip(&w[1].values) {
                assert!(lo < hi);
            }
        }
    }

    #[test]
    fn curve_rejects_mismatched_lengths() {
        let err = CoincidenceCurve::new(vec![0.0, 1.0], vec![0.0], vec![0.0, 0.0], ModelTag::Fock, 1.0);
        assert!(matches!(err, Err(HomError::Contract(_))));
        let err = CoincidenceCurve::new(vec![0.0], vec![1.5], vec![0.0], ModelTag::Fock, 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn model_tag_round_trip() {
        for tag in [
            ModelTag::CoherenceShifted,
            ModelTag::CoherenceUnshifted,
            ModelTag::CoherenceAnalytic,
            ModelTag::CoherenceAnalyticUnshifted,
            ModelTag::Fock,
            ModelTag::FockEntangled,
        ] {
            assert_eq!(tag.as_str().parse::<ModelTag>().unwrap(), tag);
            let json = serde_json::to_string(&tag).unwrap();
            assert_eq!(json, format!("\"{}\"", tag.as_str()));
        }
        assert!("laser".parse::<ModelTag>().is_err());
    }
}
