//! Two-photon Fock-state reference model.
//!
//! A photon pair is described by a joint spectral amplitude `ψ(ω₁, ω₂)`,
//! with `ω₁` the frequency of the photon entering port 1 and `ω₂` the one
//! entering port 2. Port 1 is delayed by `τ` (phase `e^{iω₁τ}`) and both
//! photons meet on the balanced beam splitter `(1/√2)[[1, i], [i, 1]]`.
//! Frequencies are measured from degeneracy; a common carrier only adds a
//! phase that cancels in every observable here.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::coherence::{validate_tau_grid, CoincidenceCurve, ModelTag};
use crate::error::{HomError, Result};
use crate::numeric::{compensated_sum, linspace};

/// Largest spectral mass a grid may leave outside its span.
pub const MAX_TAIL_MASS: f64 = 1e-6;

/// Allowed deviation of `Σ wᵢwⱼ|ψ|²` from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Default half-width of a grid beyond each photon's center, in units of σ.
pub const DEFAULT_SPAN_SIGMAS: f64 = 6.0;

pub const DEFAULT_GRID_POINTS: usize = 129;

/// Quadrature nodes and weights over angular frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FrequencyGrid {
    /// Uniform grid on `[start, end]` with trapezoid weights.
    pub fn uniform(start: f64, end: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(HomError::Config(format!("grid needs >= 3 points, got {n}")));
        }
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(HomError::Config(format!(
                "grid interval [{start}, {end}] is empty or not finite"
            )));
        }
        let points = linspace(start, end, n);
        let h = (end - start) / (n - 1) as f64;
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self { points, weights })
    }

    /// Symmetric uniform grid reaching `span_sigmas·sigma` past both photon
    /// centers `±center_split`.
    pub fn covering(sigma: f64, center_split: f64, span_sigmas: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(HomError::Config(format!("sigma must be > 0, got {sigma}")));
        }
        let half = center_split.abs() + span_sigmas * sigma;
        Self::uniform(-half, half, n)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Same interval, `2(n − 1) + 1` points.
    pub fn refined(&self) -> Self {
        Self::uniform(self.start(), self.end(), 2 * (self.len() - 1) + 1)
            .expect("refining a valid grid")
    }

    /// Mass of a normal density `N(center, sigma²)` falling outside the grid.
    pub fn tail_mass(&self, center: f64, sigma: f64) -> f64 {
        let s = sigma * std::f64::consts::SQRT_2;
        0.5 * erfc((self.end() - center) / s) + 0.5 * erfc((center - self.start()) / s)
    }
}

/// Shape of a signal/idler joint spectrum.
///
/// Each photon has a Gaussian intensity spectrum of standard deviation
/// `sigma`; the signal sits at `+center_split` and the idler at
/// `−center_split`. An optional pump envelope `exp(−(ω₁+ω₂)²/(4·pump²))`
/// adds the energy-conservation ridge that anticorrelates the two
/// frequencies without entangling the paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpectrum {
    pub sigma: f64,
    pub center_split: f64,
    pub pump_sigma: Option<f64>,
}

impl PairSpectrum {
    pub fn separable(sigma: f64, center_split: f64) -> Self {
        Self {
            sigma,
            center_split,
            pump_sigma: None,
        }
    }

    pub fn anticorrelated(sigma: f64, center_split: f64, pump_sigma: f64) -> Self {
        Self {
            sigma,
            center_split,
            pump_sigma: Some(pump_sigma),
        }
    }

    fn validate(&self, grid: &FrequencyGrid) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(HomError::Config(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !self.center_split.is_finite() {
            return Err(HomError::Config("center split must be finite".into()));
        }
        if let Some(p) = self.pump_sigma {
            if !(p.is_finite() && p > 0.0) {
                return Err(HomError::Config(format!("pump sigma must be > 0, got {p}")));
            }
        }
        for center in [self.center_split, -self.center_split] {
            let tail = grid.tail_mass(center, self.sigma);
            if tail > MAX_TAIL_MASS {
                return Err(HomError::Config(format!(
                    "grid [{}, {}] leaves spectral mass {tail:.3e} outside (limit {MAX_TAIL_MASS:e}) for a photon at {center}",
                    grid.start(),
                    grid.end()
                )));
            }
        }
        Ok(())
    }

    fn photon(&self, omega: f64, center: f64) -> f64 {
        let x = omega - center;
        (-x * x / (4.0 * self.sigma * self.sigma)).exp()
    }

    fn pump(&self, sum: f64) -> f64 {
        match self.pump_sigma {
            Some(p) => (-sum * sum / (4.0 * p * p)).exp(),
            None => 1.0,
        }
    }

    /// Unnormalized amplitude for the signal in port 1, idler in port 2.
    fn direct(&self, w1: f64, w2: f64) -> f64 {
        self.photon(w1, self.center_split) * self.photon(w2, -self.center_split) * self.pump(w1 + w2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum StateKind {
    /// One configuration only: signal in port 1, idler in port 2.
    Product,
    /// `(|s⟩₁|i⟩₂ + e^{iψ}|s⟩₂|i⟩₁)/norm`.
    Entangled { psi_rel: f64 },
}

/// Two-photon state over `grid × grid`, stored row-major with the row index
/// on the port-1 frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonState {
    grid: FrequencyGrid,
    amplitude: Vec<Complex64>,
    kind: StateKind,
}

impl TwoPhotonState {
    /// Wraps an amplitude as given, without normalizing it.
    pub fn from_raw(grid: FrequencyGrid, amplitude: Vec<Complex64>, kind: StateKind) -> Result<Self> {
        let n = grid.len();
        if amplitude.len() != n * n {
            return Err(HomError::Contract(format!(
                "amplitude has {} entries, grid needs {}",
                amplitude.len(),
                n * n
            )));
        }
        Ok(Self {
            grid,
            amplitude,
            kind,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitude[i * self.grid.len() + j]
    }

    /// `Σ wᵢwⱼ|ψ(ωᵢ, ωⱼ)|²`.
    pub fn norm_sqr(&self) -> f64 {
        let n = self.grid.len();
        let w = self.grid.weights();
        compensated_sum(
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| w[i] * w[j] * self.amplitude[i * n + j].norm_sqr()),
        )
    }

    fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(HomError::DegenerateState);
        }
        let inv = 1.0 / norm;
        self.amplitude.iter_mut().for_each(|a| *a *= inv);
        Ok(self)
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(HomError::Contract(format!(
                "two-photon state norm {norm} differs from 1"
            )));
        }
        Ok(())
    }

    /// Exchange overlap `Σ wᵢwⱼ ψ(ωᵢ, ωⱼ) ψ*(ωⱼ, ωᵢ) e^{i(ωᵢ−ωⱼ)τ}`.
    pub fn exchange_overlap(&self, tau: f64) -> Complex64 {
        let n = self.grid.len();
        let w = self.grid.weights();
        let phase: Vec<Complex64> = self
            .grid
            .points()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, x * tau))
            .collect();
        let rows: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let term = self.amplitude[i * n + j] * self.amplitude[j * n + i].conj();
                    acc += term * phase[j].conj() * (w[i] * w[j]);
                }
                acc * phase[i]
            })
            .collect();
        Complex64::new(
            compensated_sum(rows.iter().map(|c| c.re)),
            compensated_sum(rows.iter().map(|c| c.im)),
        )
    }

    /// Variance of the half-difference frequency `(ω₁ − ω₂)/2` under `|ψ|²`.
    ///
    /// This is the width the coherence model's pair detuning must carry for
    /// the two models to agree.
    pub fn half_difference_variance(&self) -> f64 {
        let n = self.grid.len();
        let w = self.grid.weights();
        let x = self.grid.points();
        let moment = |power: i32| {
            compensated_sum((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| {
                let d = 0.5 * (x[i] - x[j]);
                w[i] * w[j] * self.amplitude[i * n + j].norm_sqr() * d.powi(power)
            }))
        };
        let total = moment(0);
        let mean = moment(1) / total;
        moment(2) / total - mean * mean
    }
}

/// Path-product input: signal in port 1, idler in port 2, no superposition
/// with the swapped configuration.
pub fn make_product_state(grid: &FrequencyGrid, spectrum: &PairSpectrum) -> Result<TwoPhotonState> {
    spectrum.validate(grid)?;
    let x = grid.points();
    let amplitude = x
        .iter()
        .flat_map(|&w1| x.iter().map(move |&w2| Complex64::new(spectrum.direct(w1, w2), 0.0)))
        .collect();
    TwoPhotonState::from_raw(grid.clone(), amplitude, StateKind::Product)?.normalized()
}

/// Path-entangled input `(ψ(ω₁, ω₂) + e^{iψ_rel}·ψ(ω₂, ω₁))/norm`.
///
/// Fails with [`HomError::DegenerateState`] when the two terms cancel, as
/// for an antisymmetrized degenerate pair.
pub fn make_entangled_state(
    grid: &FrequencyGrid,
    spectrum: &PairSpectrum,
    psi_rel: f64,
) -> Result<TwoPhotonState> {
    spectrum.validate(grid)?;
    if !psi_rel.is_finite() {
        return Err(HomError::Argument("relative phase must be finite".into()));
    }
    let x = grid.points();
    let rel = Complex64::from_polar(1.0, psi_rel);
    let mut amplitude = Vec::with_capacity(x.len() * x.len());
    let mut term_norm = 0.0;
    let w = grid.weights();
    for (i, &w1) in x.iter().enumerate() {
        for (j, &w2) in x.iter().enumerate() {
            let direct = spectrum.direct(w1, w2);
            let swapped = spectrum.direct(w2, w1);
            term_norm += w[i] * w[j] * direct * direct;
            amplitude.push(Complex64::new(direct, 0.0) + rel * swapped);
        }
    }
    let state = TwoPhotonState::from_raw(grid.clone(), amplitude, StateKind::Entangled { psi_rel })?;
    // the superposition has norm² between 0 and 4× a single term
    if state.norm_sqr() <= 1e-12 * term_norm {
        return Err(HomError::DegenerateState);
    }
    state.normalized()
}

/// Probability of one photon in each output port after delay `tau`:
/// `½·(1 − Re S(τ))` with `S` the exchange overlap.
pub fn coincidence_probability(state: &TwoPhotonState, tau: f64) -> Result<f64> {
    state.check_normalized()?;
    let overlap = state.exchange_overlap(tau);
    Ok((0.5 * (1.0 - overlap.re)).clamp(0.0, 1.0))
}

pub fn coincidence_curve(state: &TwoPhotonState, tau_grid: &[f64]) -> Result<CoincidenceCurve> {
    validate_tau_grid(tau_grid)?;
    let values = tau_grid
        .iter()
        .map(|&t| coincidence_probability(state, t))
        .collect::<Result<Vec<_>>>()?;
    let tag = match state.kind() {
        StateKind::Product => ModelTag::Fock,
        StateKind::Entangled { .. } => ModelTag::FockEntangled,
    };
    CoincidenceCurve::new(tau_grid.to_vec(), values, vec![0.0; tau_grid.len()], tag, 1.0)
}

/// Lossless two-port beam splitter. Row index is the output port, column
/// index the input port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    matrix: [[Complex64; 2]; 2],
}

impl Default for BeamSplitter {
    fn default() -> Self {
        Self::balanced()
    }
}

impl BeamSplitter {
    /// `(1/√2)·[[1, i], [i, 1]]`: reflection carries a π/2 phase.
    pub fn balanced() -> Self {
        let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        Self {
            matrix: [[t, r], [r, t]],
        }
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.matrix
    }

    /// Largest entry of `|U·U† − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let u = &self.matrix;
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                let acc: Complex64 = u[r].iter().zip(&u[c]).map(|(a, b)| a * b.conj()).sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }

    /// Output-port occupation probabilities for `state` with port 1 delayed
    /// by `tau`, computed by transforming the creation operators directly.
    pub fn port_probabilities(&self, state: &TwoPhotonState, tau: f64) -> PortProbabilities {
        let n = state.grid.len();
        let w = state.grid.weights();
        let x = state.grid.points();
        let u = &self.matrix;
        // B_pq(ω, ω') = U_p1 U_q2 e^{iωτ} ψ(ω, ω')
        let delayed = |i: usize, j: usize| Complex64::from_polar(1.0, x[i] * tau) * state.amplitude(i, j);
        let mut both_a = Vec::with_capacity(n * n);
        let mut both_b = Vec::with_capacity(n * n);
        let mut split = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (f_ij, f_ji) = (delayed(i, j), delayed(j, i));
                let ww = w[i] * w[j];
                // photon in A at ω_i, photon in B at ω_j
                let ab = u[0][0] * u[1][1] * f_ij + u[1][0] * u[0][1] * f_ji;
                split.push(ww * ab.norm_sqr());
                let aa = u[0][0] * u[0][1] * (f_ij + f_ji);
                both_a.push(0.5 * ww * aa.norm_sqr());
                let bb = u[1][0] * u[1][1] * (f_ij + f_ji);
                both_b.push(0.5 * ww * bb.norm_sqr());
            }
        }
        PortProbabilities {
            both_a: compensated_sum(both_a),
            both_b: compensated_sum(both_b),
            split: compensated_sum(split),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortProbabilities {
    pub both_a: f64,
    pub both_b: f64,
    /// One photon in each output port: the coincidence probability.
    pub split: f64,
}

/// Product-versus-entangled comparison of Fock coincidence curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub dip_depth_product: f64,
    pub dip_depth_entangled: f64,
    pub max_curve_gap: f64,
    pub product: CoincidenceCurve,
    pub entangled: CoincidenceCurve,
}

/// `1 − P(0)/P(τ_max)`, relative to the plateau at the last grid delay.
pub fn dip_depth(state: &TwoPhotonState, tau_max: f64) -> Result<f64> {
    let plateau = coincidence_probability(state, tau_max)?;
    if plateau <= 0.0 {
        return Err(HomError::Contract(format!(
            "coincidence plateau at τ = {tau_max} is zero"
        )));
    }
    Ok(1.0 - coincidence_probability(state, 0.0)? / plateau)
}

pub fn witness_compare(
    grid: &FrequencyGrid,
    spectrum: &PairSpectrum,
    psi_rel: f64,
    tau_grid: &[f64],
) -> Result<WitnessReport> {
    validate_tau_grid(tau_grid)?;
    let product = make_product_state(grid, spectrum)?;
    let entangled = make_entangled_state(grid, spectrum, psi_rel)?;
    let tau_max = tau_grid[tau_grid.len() - 1];
    let product_curve = coincidence_curve(&product, tau_grid)?;
    let entangled_curve = coincidence_curve(&entangled, tau_grid)?;
    let max_curve_gap = product_curve
        .values
        .iter()
        .zip(&entangled_curve.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(WitnessReport {
        dip_depth_product: dip_depth(&product, tau_max)?,
        dip_depth_entangled: dip_depth(&entangled, tau_max)?,
        max_curve_gap,
        product: product_curve,
        entangled: entangled_curve,
    })
}
