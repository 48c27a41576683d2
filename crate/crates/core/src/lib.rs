//! Phase retrieval from short-time Fourier transform magnitudes on
//! locally compact abelian groups, modeled at desk scale by products of
//! finite cyclic groups, copies of the integer line, and tori.
//!
//! The crate provides:
//!
//! - [`group`]: group arithmetic, Pontryagin duality, subgroups,
//!   annihilators, coset sections, and Haar normalization;
//! - [`harmonic`]: the Fourier transform under the `m_G(H) = 1`
//!   normalization, Paley-Wiener sampling, and a uniqueness-set rank oracle;
//! - [`stft`]: translation, modulation, the short-time Fourier transform,
//!   window autocorrelations, and the correlation operator matrix;
//! - [`windows`]: the random Steinhaus window on groups with a designated
//!   compact-open subgroup and the random Gaussian window on discrete
//!   groups, with seeded, reproducible draws;
//! - [`sets`]: constructors and verifiers for uniqueness sets and for
//!   completeness of systems of translates, including product assembly;
//! - [`retrieval`]: the end-to-end pipeline recovering a signal up to a
//!   global phase from phaseless STFT samples.

pub mod error;
pub mod group;
pub mod harmonic;
mod numeric;
pub mod retrieval;
pub mod sets;
pub mod stft;
pub mod windows;

pub use error::{Error, Result};
pub use group::{
    coset_section, group_op, pairing, CosetSection, DualElement, Element, Factor, GroupSpec,
    HaarWeights, SubgroupData,
};
pub use harmonic::{DualSignal, Signal, SpectrumSet};
pub use retrieval::{RetrievalProblem, RetrievalReport};
pub use stft::PhaselessGrid;
