//! Optical and material parameters shared by every module.
//!
//! All quantities are SI.  The documented reduced mode (λ = 1 m,
//! χ₀ = 1 m³, I = ħc W/m²) makes the rate prefactor s = χ₀²I/(ħc)
//! exactly 1 and is what the worked examples in the tests use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ħ = h/2π with h = 6.62607015e-34 J·s exact.
pub const HBAR: f64 = 1.054_571_817_646_156_4e-34;
/// Speed of light in vacuum, exact.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Probe wavelength, susceptibility-per-atom prefactor χ₀ and incident
/// intensity, with the derived wavenumber, angular frequency and rate
/// prefactor populated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Vacuum wavelength λ (m).
    pub wavelength: f64,
    /// Single-atom susceptibility prefactor χ₀ (m³); the medium
    /// susceptibility is χ₀ |ψ|².
    pub chi0: f64,
    /// Incident probe intensity I (W/m²).
    pub intensity: f64,
    /// k0 = 2π/λ (1/m).
    pub k0: f64,
    /// ω₀ = c k0 (rad/s).
    pub omega0: f64,
    /// s = χ₀² I/(ħc) (m⁴/s), the prefactor common to both rates.
    pub rate_prefactor: f64,
}

impl PhysicalParams {
    /// Validates λ > 0, I ≥ 0 and finite inputs, then fills the derived
    /// fields.
    pub fn new(wavelength: f64, chi0: f64, intensity: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidParam {
                field: "wavelength",
                reason: format!("must be finite and > 0, got {wavelength}"),
            });
        }
        if !chi0.is_finite() {
            return Err(Error::InvalidParam {
                field: "chi0",
                reason: format!("must be finite, got {chi0}"),
            });
        }
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(Error::InvalidParam {
                field: "intensity",
                reason: format!("must be finite and >= 0, got {intensity}"),
            });
        }
        let k0 = 2.0 * std::f64::consts::PI / wavelength;
        Ok(PhysicalParams {
            wavelength,
            chi0,
            intensity,
            k0,
            omega0: SPEED_OF_LIGHT * k0,
            rate_prefactor: chi0 * chi0 * intensity / (HBAR * SPEED_OF_LIGHT),
        })
    }

    /// Reduced mode: λ = 1, χ₀ = 1, I = ħc, so s = 1 exactly.
    pub fn reduced() -> Self {
        PhysicalParams::new(1.0, 1.0, HBAR * SPEED_OF_LIGHT).expect("reduced params are valid")
    }

    /// Default kernel regularization offset ε = 1e-9 λ.
    pub fn default_epsilon(&self) -> f64 {
        1e-9 * self.wavelength
    }
}
