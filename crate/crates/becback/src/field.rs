//! The paraxial optical field: the explicit equal-time commutator of the
//! absorption/creation field operators, which doubles as the paraxial
//! Green's function, and a split-step Fourier propagator for the optical
//! Schrödinger equation
//!
//! ```text
//!     i ∂_z E⁺ = -∇⊥²/(2k0) E⁺ - (k0 χ₀ ρ / 2) E⁺ ,   ρ = N p₀ ,
//! ```
//!
//! for steady-state (CW) illumination.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::fft_wavenumber;
pub use crate::grid::{ComplexField2D, TransverseGrid};
use crate::params::PhysicalParams;
use crate::quad::{self, Quadrature};

/// One evaluation of the field commutator.
#[derive(Debug, Clone, Copy)]
pub struct CommutatorSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub value: Complex64,
}

fn check_regularization(z: f64, epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidParam {
            field: "epsilon",
            reason: format!("must be finite and >= 0, got {epsilon}"),
        });
    }
    if z == 0.0 && epsilon == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(())
}

/// Commutator C(x, y, z) in closed form (m⁻³), with the -i0 prescription
/// realized as z → z - iε:
///
/// ```text
///     C = k0² / (i (2π)² (z - iε)) · exp[i k0 (x²+y²) / (2(z - iε))] · e^{i k0 z}
/// ```
///
/// Acts as λ⁻¹ δ(x) δ(y) in the z → 0 limit and as the paraxial Green's
/// function otherwise.
pub fn commutator_value(
    x: f64,
    y: f64,
    z: f64,
    params: &PhysicalParams,
    epsilon: f64,
) -> Result<Complex64> {
    check_regularization(z, epsilon)?;
    let k0 = params.k0;
    let zr = Complex64::new(z, -epsilon);
    let pref = Complex64::new(k0 * k0 / (2.0 * std::f64::consts::PI).powi(2), 0.0)
        / (Complex64::i() * zr);
    let fresnel = (Complex64::i() * k0 * (x * x + y * y) / (2.0 * zr)).exp();
    let carrier = Complex64::from_polar(1.0, k0 * z);
    Ok(pref * fresnel * carrier)
}

/// ∬ C dx dy over the transverse plane, by adaptive quadrature of the
/// regularized closed form.  Analytic target: λ⁻¹ e^{i k0 z}.
///
/// The integrand separates into two identical 1D Fresnel integrals
/// ∫ exp[i q x²] dx with q = k0/(2(z-iε)).  Each is evaluated on the
/// steepest-descent contour x = e^{iθ} t, θ = π/4 - arg(q)/2, on which the
/// exponent is exactly -|q| t²; the rotation is justified by analyticity
/// and the vanishing arcs, and the remaining real Gaussian is integrated
/// by adaptive Gauss–Kronrod.
pub fn transverse_integral(z: f64, params: &PhysicalParams, epsilon: f64) -> Result<Quadrature> {
    check_regularization(z, epsilon)?;
    let k0 = params.k0;
    let zr = Complex64::new(z, -epsilon);
    let q = Complex64::new(k0, 0.0) / (2.0 * zr);
    let q_abs = q.norm();
    let theta = std::f64::consts::FRAC_PI_4 - 0.5 * q.arg();

    // e^{-|q|t²} falls below 1e-35 of its peak at t = 9/√|q|.
    let t_max = 9.0 / q_abs.sqrt();
    let half = quad::integrate(
        |t| Complex64::new((-q_abs * t * t).exp(), 0.0),
        0.0,
        t_max,
        1e-12,
        0.0,
        400,
    )?;
    let fresnel_1d = Complex64::from_polar(2.0, theta) * half.value;
    let fresnel_err = 2.0 * half.abs_error;

    let pref = Complex64::new(k0 * k0 / (2.0 * std::f64::consts::PI).powi(2), 0.0)
        / (Complex64::i() * zr)
        * Complex64::from_polar(1.0, k0 * z);
    let value = pref * fresnel_1d * fresnel_1d;
    let abs_error = pref.norm() * 2.0 * fresnel_1d.norm() * fresnel_err;
    Ok(Quadrature {
        value,
        abs_error,
        evaluations: 2 * half.evaluations,
    })
}

/// Residual of the Green's-function PDE (-i ∂_z - ∇⊥²/(2k0)) C = k0 C,
/// evaluated by central differences with step h and normalized by |k0 C|.
pub fn greens_pde_residual(
    x: f64,
    y: f64,
    z: f64,
    params: &PhysicalParams,
    epsilon: f64,
    h: f64,
) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParam {
            field: "h",
            reason: format!("step must be finite and > 0, got {h}"),
        });
    }
    if z.abs() <= h {
        return Err(Error::Domain(format!(
            "finite-difference stencil crosses z = 0 (|z| = {:.3e} <= h = {:.3e})",
            z.abs(),
            h
        )));
    }
    let c = |x: f64, y: f64, z: f64| commutator_value(x, y, z, params, epsilon);
    let c0 = c(x, y, z)?;
    let dz = (c(x, y, z + h)? - c(x, y, z - h)?) / (2.0 * h);
    let dxx = (c(x + h, y, z)? - 2.0 * c0 + c(x - h, y, z)?) / (h * h);
    let dyy = (c(x, y + h, z)? - 2.0 * c0 + c(x, y - h, z)?) / (h * h);
    let residual =
        -Complex64::i() * dz - (dxx + dyy) / (2.0 * params.k0) - params.k0 * c0;
    Ok(residual.norm() / (params.k0 * c0.norm()))
}

/// Medium seen by the propagating beam: number density N·p₀ (m⁻³) per
/// z-slice.  The susceptibility profile is χ₀ times this, with χ₀ from
/// the shared parameters.
#[derive(Debug, Clone)]
pub enum Medium {
    Vacuum,
    /// Same density everywhere.
    Uniform(f64),
    /// One (ny, nx) density map per step, sampled at the step midpoint.
    Slices(Vec<Array2<f64>>),
}

impl Medium {
    /// Builds per-step slices by sampling `density(z_mid)` at the midpoints
    /// of n_steps equal steps spanning [0, z_extent].
    pub fn sampled<F: Fn(f64) -> Array2<f64>>(z_extent: f64, n_steps: usize, density: F) -> Medium {
        let dz = z_extent / n_steps as f64;
        Medium::Slices(
            (0..n_steps)
                .map(|i| density((i as f64 + 0.5) * dz))
                .collect(),
        )
    }

    fn validate(&self, shape: (usize, usize), n_steps: usize) -> Result<()> {
        match self {
            Medium::Vacuum => Ok(()),
            Medium::Uniform(rho) => {
                if !(rho.is_finite() && *rho >= 0.0) {
                    return Err(Error::InvalidParam {
                        field: "medium",
                        reason: format!("density must be finite and >= 0, got {rho}"),
                    });
                }
                Ok(())
            }
            Medium::Slices(slices) => {
                if slices.len() != n_steps {
                    return Err(Error::GridMismatch(format!(
                        "{} medium slices for {} steps",
                        slices.len(),
                        n_steps
                    )));
                }
                for (i, s) in slices.iter().enumerate() {
                    if s.dim() != shape {
                        return Err(Error::GridMismatch(format!(
                            "slice {i} is {:?}, field is {shape:?}",
                            s.dim()
                        )));
                    }
                    if s.iter().any(|v| !v.is_finite() || *v < 0.0) {
                        return Err(Error::InvalidParam {
                            field: "medium",
                            reason: format!("slice {i} has negative or non-finite density"),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

/// Split-step result; `phase_warning` flags steps whose medium phase
/// exceeded π/4, where the Strang splitting degrades.
#[derive(Debug, Clone)]
pub struct Propagated {
    pub field: ComplexField2D,
    /// Largest |k0 χ₀ ρ Δz / 2| applied in any single step.
    pub max_medium_phase: f64,
    pub phase_warning: bool,
}

/// Propagates the field over z_extent in n_steps symmetric split steps:
/// half diffraction (k-space phase -k⊥²Δz/(4k0)), full medium phase
/// exp(i k0 χ₀ ρ Δz / 2), half diffraction.  Exactly norm-preserving.
pub fn propagate(
    field: &ComplexField2D,
    medium: &Medium,
    z_extent: f64,
    n_steps: usize,
    params: &PhysicalParams,
) -> Result<Propagated> {
    if n_steps == 0 {
        return Err(Error::InvalidParam {
            field: "n_steps",
            reason: "must be >= 1".into(),
        });
    }
    if !(z_extent.is_finite() && z_extent > 0.0) {
        return Err(Error::InvalidParam {
            field: "z_extent",
            reason: format!("must be finite and > 0, got {z_extent}"),
        });
    }
    let grid = field.grid;
    medium.validate((grid.ny, grid.nx), n_steps)?;

    let dz = z_extent / n_steps as f64;
    let fft = Fft2::new(grid.nx, grid.ny);

    // Half-step diffraction phases on the FFT frequency lattice.
    let half_diffraction = Array2::from_shape_fn((grid.ny, grid.nx), |(iy, ix)| {
        let kx = fft_wavenumber(ix, grid.nx, grid.dx);
        let ky = fft_wavenumber(iy, grid.ny, grid.dy);
        Complex64::from_polar(1.0, -(kx * kx + ky * ky) * dz / (4.0 * params.k0))
    });

    let mut values = field.values.clone();
    let mut max_medium_phase: f64 = 0.0;
    let medium_phase_coeff = params.k0 * params.chi0 * dz / 2.0;

    for step in 0..n_steps {
        fft.forward(&mut values);
        values *= &half_diffraction;
        fft.inverse(&mut values);

        match medium {
            Medium::Vacuum => {}
            Medium::Uniform(rho) => {
                let phase = medium_phase_coeff * rho;
                max_medium_phase = max_medium_phase.max(phase.abs());
                let factor = Complex64::from_polar(1.0, phase);
                values.mapv_inplace(|v| v * factor);
            }
            Medium::Slices(slices) => {
                let slice = &slices[step];
                for (v, rho) in values.iter_mut().zip(slice.iter()) {
                    let phase = medium_phase_coeff * rho;
                    max_medium_phase = max_medium_phase.max(phase.abs());
                    *v *= Complex64::from_polar(1.0, phase);
                }
            }
        }

        fft.forward(&mut values);
        values *= &half_diffraction;
        fft.inverse(&mut values);
    }

    Ok(Propagated {
        field: ComplexField2D::new(grid, values)?,
        max_medium_phase,
        phase_warning: max_medium_phase > std::f64::consts::FRAC_PI_4,
    })
}

/// Thin phase object: multiplies the field by exp(i (k0 χ₀/2) N η(x,y)),
/// the integrated medium phase of a sample much shorter than the
/// diffraction scale.  Norm is preserved exactly.
pub fn thin_phase_mask(
    field: &ComplexField2D,
    eta_map: &Array2<f64>,
    n_atoms: f64,
    params: &PhysicalParams,
) -> Result<ComplexField2D> {
    if eta_map.dim() != field.values.dim() {
        return Err(Error::GridMismatch(format!(
            "eta map is {:?}, field is {:?}",
            eta_map.dim(),
            field.values.dim()
        )));
    }
    if !(n_atoms.is_finite() && n_atoms >= 0.0) {
        return Err(Error::InvalidParam {
            field: "n_atoms",
            reason: format!("must be finite and >= 0, got {n_atoms}"),
        });
    }
    let coeff = params.k0 * params.chi0 / 2.0 * n_atoms;
    let mut values = field.values.clone();
    for (v, eta) in values.iter_mut().zip(eta_map.iter()) {
        *v *= Complex64::from_polar(1.0, coeff * eta);
    }
    ComplexField2D::new(field.grid, values)
}
