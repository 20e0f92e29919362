//! Dispersive imaging of the condensate and its cost.
//!
//! A thin condensate imprints the signal phase Δφ = (π/λ) χ₀ N η on the
//! probe.  Reading that phase against shot noise δφ = n̄^{-1/2} with
//! n̄ = π λ² I Δt / (ħ ω₀) photons fixes the depletion probability
//!
//! ```text
//!     κ = 2 γ_L Δt = (Δφ/δφ)² (N λ² η)⁻² ,
//! ```
//!
//! an identity in this model: the signal-to-noise ratio per condensate
//! atom is paid for in depleted atoms, no matter how the beam or the
//! exposure is arranged.  Survival of the condensate means κ ≪ 1.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::grid::ComplexField2D;
use crate::params::PhysicalParams;
use crate::rates;

/// Relative tolerance on the κ identity before the report is rejected.
pub const KAPPA_IDENTITY_TOL: f64 = 1e-12;

/// How the undiffracted (DC) component is treated at the Fourier stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImagingMode {
    /// DC removed; the image is dark where the object is absent.
    DarkGround,
    /// DC phase-shifted by π/2; phase modulation becomes brightness.
    PhaseContrast,
}

/// Exposure settings that reach a requested signal-to-noise ratio.
#[derive(Debug, Clone, Copy)]
pub struct ObservationPlan {
    pub duration: f64,
    pub mode: ImagingMode,
    pub snr_target: f64,
}

/// The signal/noise/backaction budget of one exposure.
#[derive(Debug, Clone, Copy)]
pub struct BackactionReport {
    pub delta_phi: f64,
    pub delta_phi_noise: f64,
    pub n_bar: f64,
    pub snr: f64,
    pub kappa: f64,
    pub survival: f64,
}

/// Peak signal phase Δφ = (π/λ) χ₀ N η.
pub fn signal_phase(params: &PhysicalParams, n_atoms: f64, eta: f64) -> Result<f64> {
    if !(n_atoms.is_finite() && n_atoms >= 0.0) {
        return Err(Error::InvalidParam {
            field: "n_atoms",
            reason: format!("must be finite and >= 0, got {n_atoms}"),
        });
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Error::InvalidParam {
            field: "eta",
            reason: format!("must be finite and >= 0, got {eta}"),
        });
    }
    Ok(std::f64::consts::PI / params.wavelength * params.chi0 * n_atoms * eta)
}

/// True when χ₀ N max(p₀) ≥ 0.5: the medium is no longer a weak phase
/// object and the thin-sample treatment degrades.
pub fn expansion_limited(params: &PhysicalParams, n_atoms: f64, peak_density: f64) -> bool {
    params.chi0 * n_atoms * peak_density >= 0.5
}

/// Photons crossing one wavelength-squared patch: n̄ = π λ² I Δt / (ħ ω₀).
pub fn mean_photon_number(params: &PhysicalParams, duration: f64) -> Result<f64> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidParam {
            field: "duration",
            reason: format!("must be finite and > 0, got {duration}"),
        });
    }
    Ok(std::f64::consts::PI * params.wavelength.powi(2) * params.intensity * duration
        / (crate::params::HBAR * params.omega0))
}

/// Shot-noise phase resolution δφ = n̄^{-1/2}.
pub fn phase_noise(n_bar: f64) -> Result<f64> {
    if !(n_bar.is_finite() && n_bar > 0.0) {
        return Err(Error::UndefinedNoise);
    }
    Ok(1.0 / n_bar.sqrt())
}

/// Full budget of one exposure, with the κ identity re-derived from the
/// signal-to-noise side and cross-checked against 2 γ_L Δt.
pub fn backaction_report(
    params: &PhysicalParams,
    n_atoms: f64,
    eta: f64,
    duration: f64,
) -> Result<BackactionReport> {
    let delta_phi = signal_phase(params, n_atoms, eta)?;
    if delta_phi == 0.0 {
        return Err(Error::NoSignal(
            "signal phase is zero; no exposure can resolve the condensate".into(),
        ));
    }
    let n_bar = mean_photon_number(params, duration)?;
    let delta_phi_noise = phase_noise(n_bar)?;
    let snr = delta_phi / delta_phi_noise;

    let kappa = 2.0 * rates::gamma_l_closed(params) * duration;
    let signal_side = (snr / (n_atoms * params.wavelength.powi(2) * eta)).powi(2);
    let rel_dev = (kappa - signal_side).abs() / kappa.max(signal_side);
    if rel_dev > KAPPA_IDENTITY_TOL {
        return Err(Error::InternalConsistency(format!(
            "kappa identity violated: 2 gamma_l dt = {kappa:e} vs snr-side {signal_side:e} \
             (relative {rel_dev:e})"
        )));
    }
    Ok(BackactionReport {
        delta_phi,
        delta_phi_noise,
        n_bar,
        snr,
        kappa,
        survival: (-kappa).exp(),
    })
}

/// Shortest exposure reaching `snr_target`, from n̄ = (snr/Δφ)².
pub fn plan_for_snr(
    params: &PhysicalParams,
    n_atoms: f64,
    eta: f64,
    snr_target: f64,
    mode: ImagingMode,
) -> Result<ObservationPlan> {
    if !(snr_target.is_finite() && snr_target > 0.0) {
        return Err(Error::InvalidParam {
            field: "snr_target",
            reason: format!("must be finite and > 0, got {snr_target}"),
        });
    }
    let delta_phi = signal_phase(params, n_atoms, eta)?;
    if delta_phi == 0.0 {
        return Err(Error::NoSignal(
            "signal phase is zero; no exposure duration reaches the target".into(),
        ));
    }
    if params.intensity == 0.0 {
        return Err(Error::NoSignal(
            "zero probe intensity collects no photons".into(),
        ));
    }
    let n_bar = (snr_target / delta_phi).powi(2);
    let duration = n_bar * crate::params::HBAR * params.omega0
        / (std::f64::consts::PI * params.wavelength.powi(2) * params.intensity);
    Ok(ObservationPlan {
        duration,
        mode,
        snr_target,
    })
}

/// Intensity image after the Fourier stop: forward FFT, DC bins within
/// `dc_radius_bins` removed (dark ground) or rotated by π/2 (phase
/// contrast), inverse FFT, modulus squared.
pub fn render_image(
    field: &ComplexField2D,
    mode: ImagingMode,
    dc_radius_bins: usize,
) -> Array2<f64> {
    let (ny, nx) = field.values.dim();
    let fft = Fft2::new(nx, ny);
    let mut spectrum = field.values.clone();
    fft.forward(&mut spectrum);

    let r2 = (dc_radius_bins * dc_radius_bins) as i64;
    for iy in 0..ny {
        let by = iy.min(ny - iy) as i64;
        for ix in 0..nx {
            let bx = ix.min(nx - ix) as i64;
            if bx * bx + by * by <= r2 {
                spectrum[(iy, ix)] = match mode {
                    ImagingMode::DarkGround => Complex64::new(0.0, 0.0),
                    ImagingMode::PhaseContrast => spectrum[(iy, ix)] * Complex64::i(),
                };
            }
        }
    }
    fft.inverse(&mut spectrum);
    spectrum.mapv(|v| v.norm_sqr())
}

/// Per-pixel photon counts: independent Poisson draws with mean
/// `photons_per_unit` × intensity, from a seeded generator.
pub fn sample_poisson_counts(
    intensity: &Array2<f64>,
    photons_per_unit: f64,
    seed: u64,
) -> Array2<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    intensity.mapv(|v| {
        let mut lambda = photons_per_unit * v.max(0.0);
        let mut count = 0_u64;
        // Knuth's product method, chunked to keep e^{-λ} in range.
        while lambda > 0.0 {
            let chunk = lambda.min(30.0);
            lambda -= chunk;
            let floor = (-chunk).exp();
            let mut p = 1.0;
            loop {
                p *= rng.gen_range(0.0..1.0_f64);
                if p <= floor {
                    break;
                }
                count += 1;
            }
        }
        count
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TransverseGrid;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn sodium_like() -> PhysicalParams {
        PhysicalParams::new(589e-9, 5.0e-22, 10.0).unwrap()
    }

    #[test]
    fn kappa_follows_condensate_area_scaling() {
        // ax = ay = 100 λ gives N λ² η = N/(2π·10⁴), so at SNR 1 the
        // depletion probability is κ = (2π·10⁴/N)².
        let p = sodium_like();
        let a = 100.0 * p.wavelength;
        let eta = 1.0 / (TWO_PI * a * a);
        for (n_atoms, expected) in [(1e6, (TWO_PI * 1e4 / 1e6).powi(2)), (1e3, (TWO_PI * 1e4 / 1e3).powi(2))] {
            let plan = plan_for_snr(&p, n_atoms, eta, 1.0, ImagingMode::DarkGround).unwrap();
            let report = backaction_report(&p, n_atoms, eta, plan.duration).unwrap();
            assert_relative_eq!(report.kappa, expected, max_relative = 1e-9);
            assert_relative_eq!(report.snr, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn large_condensate_survives_small_one_does_not() {
        let p = sodium_like();
        let a = 100.0 * p.wavelength;
        let eta = 1.0 / (TWO_PI * a * a);

        let plan = plan_for_snr(&p, 1e6, eta, 1.0, ImagingMode::DarkGround).unwrap();
        let big = backaction_report(&p, 1e6, eta, plan.duration).unwrap();
        assert!(big.kappa < 0.005);
        assert!(big.survival > 0.995);

        let plan = plan_for_snr(&p, 1e3, eta, 1.0, ImagingMode::DarkGround).unwrap();
        let small = backaction_report(&p, 1e3, eta, plan.duration).unwrap();
        assert!(small.kappa > 3.9e3);
        assert!(small.survival < 1e-100);
    }

    #[test]
    fn kappa_is_independent_of_susceptibility() {
        // Stronger coupling shortens the exposure but κ at fixed SNR stays
        // fixed: χ₀ cancels between signal and depletion.
        let lam = 589e-9_f64;
        let eta = 1.0 / (TWO_PI * (50.0 * lam).powi(2));
        let mut kappas = Vec::new();
        for chi0 in [1e-22, 5e-22, 2e-21] {
            let p = PhysicalParams::new(lam, chi0, 10.0).unwrap();
            let plan = plan_for_snr(&p, 1e5, eta, 2.0, ImagingMode::PhaseContrast).unwrap();
            let report = backaction_report(&p, 1e5, eta, plan.duration).unwrap();
            kappas.push(report.kappa);
        }
        assert_relative_eq!(kappas[0], kappas[1], max_relative = 1e-12);
        assert_relative_eq!(kappas[1], kappas[2], max_relative = 1e-12);
    }

    #[test]
    fn plan_reaches_requested_snr() {
        let p = sodium_like();
        let eta = 1.0 / (TWO_PI * (200.0 * p.wavelength).powi(2));
        let plan = plan_for_snr(&p, 5e5, eta, 3.0, ImagingMode::DarkGround).unwrap();
        let report = backaction_report(&p, 5e5, eta, plan.duration).unwrap();
        assert_relative_eq!(report.snr, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn no_signal_and_no_light_are_rejected() {
        let p = sodium_like();
        assert!(matches!(
            plan_for_snr(&p, 0.0, 1.0, 1.0, ImagingMode::DarkGround),
            Err(Error::NoSignal(_))
        ));
        let dark = PhysicalParams::new(589e-9, 5.0e-22, 0.0).unwrap();
        assert!(matches!(
            plan_for_snr(&dark, 1e5, 1.0, 1.0, ImagingMode::DarkGround),
            Err(Error::NoSignal(_))
        ));
        assert!(matches!(
            backaction_report(&dark, 1e5, 1.0, 1e-3),
            Err(Error::UndefinedNoise)
        ));
    }

    #[test]
    fn snr_target_must_be_positive() {
        let p = sodium_like();
        assert!(plan_for_snr(&p, 1e5, 1.0, 0.0, ImagingMode::DarkGround).is_err());
        assert!(plan_for_snr(&p, 1e5, 1.0, -1.0, ImagingMode::DarkGround).is_err());
    }

    fn disk_phase_field(n: usize, phi: f64, disk_radius: f64) -> (ComplexField2D, f64) {
        let grid = TransverseGrid::square(n, 1.0).unwrap();
        let mut in_disk = 0usize;
        let values = Array2::from_shape_fn((n, n), |(iy, ix)| {
            let r2 = grid.x(ix).powi(2) + grid.y(iy).powi(2);
            if r2 < disk_radius * disk_radius {
                in_disk += 1;
                Complex64::from_polar(1.0, phi)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let f = in_disk as f64 / (n * n) as f64;
        (ComplexField2D::new(grid, values).unwrap(), f)
    }

    #[test]
    fn dark_ground_intensity_of_uniform_disk() {
        // Removing the mean leaves (1-f)(e^{iφ} - 1) inside the disk and
        // -f(e^{iφ} - 1) outside; both intensities follow exactly.
        let phi = 0.3;
        let (field, f) = disk_phase_field(64, phi, 0.35);
        let img = render_image(&field, ImagingMode::DarkGround, 0);
        let contrast = 2.0 - 2.0 * phi.cos();
        let inside = (1.0 - f).powi(2) * contrast;
        let outside = f * f * contrast;
        assert_relative_eq!(img[(32, 32)], inside, max_relative = 1e-12);
        assert_relative_eq!(img[(0, 0)], outside, max_relative = 1e-9);
    }

    #[test]
    fn phase_contrast_brightens_positive_phase() {
        // In-disk field is e^{iφ} + (i-1)·mean with mean = 1 - f + f e^{iφ};
        // for small f, φ the intensity is ≈ 1 + 2φ.
        let phi = 0.1;
        let (field, f) = disk_phase_field(64, phi, 0.2);
        let img = render_image(&field, ImagingMode::PhaseContrast, 0);
        let mean = Complex64::new(1.0 - f, 0.0) + f * Complex64::from_polar(1.0, phi);
        let inside = (Complex64::from_polar(1.0, phi) + (Complex64::i() - 1.0) * mean).norm_sqr();
        assert_relative_eq!(img[(32, 32)], inside, max_relative = 1e-12);
        assert!(img[(32, 32)] > 1.0);
        assert_relative_eq!(img[(32, 32)], 1.0 + 2.0 * phi, max_relative = 0.15);
    }

    #[test]
    fn dark_ground_of_plane_wave_is_dark() {
        let grid = TransverseGrid::square(32, 1.0).unwrap();
        let field = ComplexField2D::plane_wave(grid).unwrap();
        let img = render_image(&field, ImagingMode::DarkGround, 0);
        assert!(img.iter().all(|v| *v < 1e-20));
    }

    #[test]
    fn images_ignore_a_global_phase() {
        let (field, _) = disk_phase_field(32, 0.4, 0.3);
        let mut shifted = field.clone();
        shifted
            .values
            .mapv_inplace(|v| v * Complex64::from_polar(1.0, 1.234));
        for mode in [ImagingMode::DarkGround, ImagingMode::PhaseContrast] {
            let a = render_image(&field, mode, 0);
            let b = render_image(&shifted, mode, 0);
            for (x, y) in a.iter().zip(b.iter()) {
                assert_relative_eq!(*x, *y, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dark_ground_power_is_input_minus_dc() {
        let (field, _) = disk_phase_field(32, 0.7, 0.4);
        let img = render_image(&field, ImagingMode::DarkGround, 0);
        let n_pix = (32 * 32) as f64;
        let input_power: f64 = field.values.iter().map(|v| v.norm_sqr()).sum();
        let dc: Complex64 = field.values.iter().sum();
        let expected = input_power - dc.norm_sqr() / n_pix;
        let output_power: f64 = img.iter().sum();
        assert_relative_eq!(output_power, expected, max_relative = 1e-10);
    }

    #[test]
    fn wider_dc_stop_removes_more_power() {
        let (field, _) = disk_phase_field(64, 0.5, 0.25);
        let p0: f64 = render_image(&field, ImagingMode::DarkGround, 0).iter().sum();
        let p2: f64 = render_image(&field, ImagingMode::DarkGround, 2).iter().sum();
        assert!(p2 < p0);
    }

    #[test]
    fn poisson_counts_are_deterministic_and_mean_scaled() {
        let intensity = Array2::from_elem((16, 16), 1.0);
        let a = sample_poisson_counts(&intensity, 100.0, 7);
        let b = sample_poisson_counts(&intensity, 100.0, 7);
        assert_eq!(a, b);
        let mean = a.iter().sum::<u64>() as f64 / 256.0;
        // 256 pixels at λ = 100: standard error ~0.6.
        assert!((mean - 100.0).abs() < 3.0, "mean = {mean}");
        let zeros = sample_poisson_counts(&Array2::zeros((4, 4)), 50.0, 1);
        assert!(zeros.iter().all(|c| *c == 0));
    }

    #[test]
    fn expansion_flag_trips_at_strong_coupling() {
        let p = sodium_like();
        assert!(!expansion_limited(&p, 1e5, 1e15));
        assert!(expansion_limited(&p, 1e7, 1e18));
    }
}
