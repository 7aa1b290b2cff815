//! Gaussian detuning distribution for SPDC photon pairs and reproducible
//! antithetic pair ensembles drawn from it.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HomError, Result};

/// Stream ids at or above this value are reserved for the i.i.d. control
/// sampler so it never shares a substream with the antithetic one.
const IID_STREAM_BASE: u64 = 1 << 63;

/// Gaussian pair-detuning spectrum.
///
/// `sigma` and `mean_offset` are angular frequencies (rad/s). The effective
/// width after spectral filtering is `bandwidth_ratio · sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    sigma: f64,
    mean_offset: f64,
    bandwidth_ratio: f64,
}

impl SpectralModel {
    pub fn new(sigma: f64, mean_offset: f64, bandwidth_ratio: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(HomError::Config(format!("sigma must be > 0, got {sigma}")));
        }
        if !mean_offset.is_finite() {
            return Err(HomError::Config(format!(
                "mean offset must be finite, got {mean_offset}"
            )));
        }
        if !(bandwidth_ratio > 0.0 && bandwidth_ratio <= 1.0) {
            return Err(HomError::Config(format!(
                "bandwidth ratio must lie in (0, 1], got {bandwidth_ratio}"
            )));
        }
        Ok(Self {
            sigma,
            mean_offset,
            bandwidth_ratio,
        })
    }

    /// Unfiltered, zero-mean spectrum of width `sigma`.
    pub fn centered(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0, 1.0)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    pub fn bandwidth_ratio(&self) -> f64 {
        self.bandwidth_ratio
    }

    pub fn effective_sigma(&self) -> f64 {
        self.bandwidth_ratio * self.sigma
    }

    /// Re-checks the invariants; deserialized values bypass [`SpectralModel::new`].
    pub fn validate(&self) -> Result<()> {
        Self::new(self.sigma, self.mean_offset, self.bandwidth_ratio).map(|_| ())
    }

    /// Probability density of the pair detuning, in s/rad.
    pub fn pdf(&self, delta_f: f64) -> f64 {
        let s = self.effective_sigma();
        let x = (delta_f - self.mean_offset) / s;
        (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * s)
    }

    /// Narrows the spectrum by `ratio`. Ratios compose multiplicatively.
    pub fn apply_filter(&self, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(HomError::Argument(format!(
                "filter ratio must lie in (0, 1], got {ratio}"
            )));
        }
        if ratio == 1.0 {
            return Ok(*self);
        }
        Self::new(self.sigma, self.mean_offset, self.bandwidth_ratio * ratio)
    }
}

/// Sign of the ±π/2 shift a pair carries in the shifted coincidence model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    pub fn value(self) -> f64 {
        match self {
            ShiftSign::Plus => 1.0,
            ShiftSign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            ShiftSign::Plus => ShiftSign::Minus,
            ShiftSign::Minus => ShiftSign::Plus,
        }
    }
}

/// One sampled signal/idler pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonPair {
    /// Pair detuning δf in rad/s; the pair phase difference is `δf·τ`.
    pub delta_f: f64,
    /// Common phase of the pair, in `[0, 2π)`. Carried, never observable.
    pub global_phase: f64,
    pub shift_convention: ShiftSign,
}

impl PhotonPair {
    pub fn new(delta_f: f64) -> Self {
        Self {
            delta_f,
            global_phase: 0.0,
            shift_convention: ShiftSign::Plus,
        }
    }

    pub fn with_global_phase(self, global_phase: f64) -> Self {
        Self {
            global_phase,
            ..self
        }
    }

    pub fn with_shift(self, shift_convention: ShiftSign) -> Self {
        Self {
            shift_convention,
            ..self
        }
    }
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    let phase = rng.gen::<f64>() * TAU;
    if phase >= TAU {
        0.0
    } else {
        phase
    }
}

/// Draws `n` pairs as antithetic couples `(μ + σ_eff·z, μ − σ_eff·z)`.
///
/// Couple `k` uses its own ChaCha substream keyed by `(seed, k)`, so the
/// output depends only on `(model, n, seed)` and not on how the work is
/// split across threads. Members of a couple carry opposite shift signs and
/// independent global phases.
pub fn sample_pairs(model: &SpectralModel, n: usize, seed: u64) -> Result<Vec<PhotonPair>> {
    model.validate()?;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(HomError::Argument(format!(
            "antithetic sampling needs an even pair count >= 2, got {n}"
        )));
    }
    let mu = model.mean_offset();
    let width = model.effective_sigma();
    let pairs = (0..(n / 2) as u64)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = substream(seed, k);
            let z: f64 = rng.sample(StandardNormal);
            let offset = width * z;
            let first = PhotonPair {
                delta_f: mu + offset,
                global_phase: uniform_phase(&mut rng),
                shift_convention: ShiftSign::Plus,
            };
            let second = PhotonPair {
                delta_f: mu - offset,
                global_phase: uniform_phase(&mut rng),
                shift_convention: ShiftSign::Minus,
            };
            [first, second]
        })
        .collect();
    Ok(pairs)
}

/// Independent draws with no antithetic pairing, used as a statistical
/// control. Any `n >= 1` is accepted.
pub fn sample_pairs_iid(model: &SpectralModel, n: usize, seed: u64) -> Result<Vec<PhotonPair>> {
    model.validate()?;
    if n == 0 {
        return Err(HomError::Argument("pair count must be >= 1".into()));
    }
    let mu = model.mean_offset();
    let width = model.effective_sigma();
    let pairs = (0..n as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, IID_STREAM_BASE + j);
            let z: f64 = rng.sample(StandardNormal);
            let shift = if rng.gen::<bool>() {
                ShiftSign::Plus
            } else {
                ShiftSign::Minus
            };
            PhotonPair {
                delta_f: mu + width * z,
                global_phase: uniform_phase(&mut rng),
                shift_convention: shift,
            }
        })
        .collect();
    Ok(pairs)
}
