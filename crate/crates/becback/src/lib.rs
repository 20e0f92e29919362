//! Backaction of dispersive (phase-contrast / dark-ground) imaging on a
//! Bose-Einstein condensate, in the paraxial approximation.
//!
//! The probe light obeys an optical Schrödinger equation in which the
//! condensate density acts as a weak refractive medium.  Observing the
//! light back-acts on the atoms in two ways: phase diffusion of the
//! atom-number coherences at rate γ_P, set by the condensate geometry,
//! and depletion at the universal rate γ_L = (π²/4)(χ₀²/ħc) I λ⁻³,
//! independent of the condensate shape.  This crate computes both rates,
//! evolves the condensate state under the resulting master equation,
//! simulates the imaging modes, and relates signal-to-noise to the
//! depletion probability κ = 2 γ_L Δt.

pub mod cli;
pub mod condensate;
pub mod error;
pub mod field;
pub mod fft;
pub mod grid;
pub mod imaging;
pub mod io;
pub mod linalg;
pub mod master;
pub mod params;
pub mod quad;
pub mod rates;

pub use condensate::{CondensateProfile, DensityGrid3};
pub use error::{Error, Result};
pub use field::{Medium, Propagated};
pub use grid::{ComplexField2D, TransverseGrid};
pub use imaging::{BackactionReport, ImagingMode, ObservationPlan};
pub use master::CondensateState;
pub use params::PhysicalParams;
pub use rates::{BackactionRates, GammaP};
