//! Hong-Ou-Mandel coincidence statistics on a lossless 50/50 beam splitter.
//!
//! Two independent models are provided:
//!
//! * [`coherence`]: a wave-coherence picture in which each photon pair carries
//!   a definite difference phase `δφ = δf·τ`. Port intensities are
//!   `1 ∓ sin δφ` and the pair coincidence is `cos² δφ`, or `sin² δφ` once the
//!   ±π/2 pair shift is applied. Ensemble averages over a Gaussian detuning
//!   distribution reproduce the dip and its `½` plateau.
//! * [`fock`]: the standard two-photon treatment, with a discretized joint
//!   spectral amplitude pushed through the `(1/√2)[[1, i], [i, 1]]` unitary.
//!
//! [`experiments`] ties the two together into reproducible scenario reports.

pub mod coherence;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod numeric;
pub mod spectra;

pub use coherence::{CoincidenceCurve, IntensityPair, ModelTag};
pub use config::{Model, OutputFormat, RunConfig};
pub use error::{HomError, Result};
pub use experiments::{Check, ExperimentReport};
pub use fock::{BeamSplitter, FrequencyGrid, StateKind, TwoPhotonState};
pub use spectra::{PhotonPair, SpectralModel};
