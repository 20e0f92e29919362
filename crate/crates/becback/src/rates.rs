//! Measurement backaction rates.
//!
//! Observing the probe light dephases and depletes the condensate at two
//! rates set by the commutator of the scattered field:
//!
//! ```text
//!     γ_P = (π/4) s λ⁻¹ ∬ η² dx dy          (phase diffusion)
//!     γ_L = (π²/4) s λ⁻³                     (local depletion)
//!     s   = χ₀² I / (ħ c)
//! ```
//!
//! γ_P depends on the condensate geometry through the column density η and
//! is bounded above by γ_L, with equality in the point-condensate limit.
//! γ_P is computed along two independent routes (real space and k-space)
//! whose agreement certifies the grid resolution; γ_L has a closed form
//! plus an adaptive-quadrature oracle integrating the regularized on-axis
//! commutator kernel over a finite memory window.

use num_complex::Complex64;

use crate::condensate::{CondensateProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::grid::TransverseGrid;
use crate::params::PhysicalParams;
use crate::quad;

/// Relative real-space/k-space agreement required of γ_P.
pub const PARSEVAL_TOL: f64 = 1e-4;

/// γ_P evaluated along both routes.  `real_space` is the quoted value;
/// `k_space` certifies it.
#[derive(Debug, Clone, Copy)]
pub struct GammaP {
    pub real_space: f64,
    pub k_space: f64,
}

impl GammaP {
    pub fn value(&self) -> f64 {
        self.real_space
    }

    pub fn rel_mismatch(&self) -> f64 {
        let m = self.real_space.max(self.k_space);
        if m == 0.0 {
            0.0
        } else {
            (self.real_space - self.k_space).abs() / m
        }
    }
}

/// γ_P for a centered Gaussian profile, in closed form: s/(16 λ ax ay).
pub fn gamma_p_gaussian(params: &PhysicalParams, ax: f64, ay: f64) -> f64 {
    params.rate_prefactor / (16.0 * params.wavelength * ax * ay)
}

/// γ_P on an automatically adapted transverse grid (128 nodes per axis for
/// Gaussians, the native lattice for gridded profiles).
pub fn gamma_p(profile: &CondensateProfile, params: &PhysicalParams) -> Result<GammaP> {
    let grid = profile.auto_grid(128)?;
    gamma_p_on_grid(profile, params, &grid)
}

/// γ_P with route A a trapezoid sum of η² on `grid` and route B an
/// independent k-space quadrature of |p̃₀(kx, ky, 0)|².  Routes disagreeing
/// beyond `PARSEVAL_TOL` indicate an under-resolved profile.
pub fn gamma_p_on_grid(
    profile: &CondensateProfile,
    params: &PhysicalParams,
    grid: &TransverseGrid,
) -> Result<GammaP> {
    let eta = profile.column_density(grid)?;
    let real_integral = grid.trapezoid(&eta.mapv(|v| v * v));

    let k_integral = match &profile.kind {
        ProfileKind::Gaussian { ax, ay, .. } => {
            // |p̃|² = exp(-ax²kx² - ay²ky²) dies by k = 12/a.
            k_plane_quadrature(256, 256, 12.0 / ax, 12.0 / ay, |kx, ky| {
                profile.fourier_density([kx, ky, 0.0]).norm_sqr()
            })
        }
        ProfileKind::Grid(_) => {
            // Nyquist-limited k-window of the native lattice; separable
            // partial sums of the sampled column density.
            let eta_ft = |kx: f64, ky: f64| -> f64 {
                let px: Vec<Complex64> = (0..grid.nx)
                    .map(|i| Complex64::from_polar(1.0, -kx * grid.x(i)))
                    .collect();
                let mut sum = Complex64::new(0.0, 0.0);
                for iy in 0..grid.ny {
                    let mut row = Complex64::new(0.0, 0.0);
                    for ix in 0..grid.nx {
                        row += eta[(iy, ix)] * px[ix];
                    }
                    sum += row * Complex64::from_polar(1.0, -ky * grid.y(iy));
                }
                (sum * grid.cell_area()).norm_sqr()
            };
            k_plane_quadrature(
                grid.nx,
                grid.ny,
                std::f64::consts::PI / grid.dx,
                std::f64::consts::PI / grid.dy,
                eta_ft,
            )
        }
    } / (2.0 * std::f64::consts::PI).powi(2);

    let rates = GammaP {
        real_space: rate_from_eta_integral(params, real_integral),
        k_space: rate_from_eta_integral(params, k_integral),
    };
    let mismatch = rel_mismatch(real_integral, k_integral);
    if mismatch > PARSEVAL_TOL {
        return Err(Error::Resolution {
            mismatch,
            tolerance: PARSEVAL_TOL,
            advice: "increase the transverse grid resolution or extent".into(),
        });
    }
    Ok(rates)
}

fn rate_from_eta_integral(params: &PhysicalParams, integral: f64) -> f64 {
    0.25 * std::f64::consts::PI * params.rate_prefactor / params.wavelength * integral
}

fn rel_mismatch(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// Trapezoid sum of `f` on a node-centered (nkx × nky) grid spanning
/// ±kx_max, ±ky_max.
fn k_plane_quadrature<F: Fn(f64, f64) -> f64>(
    nkx: usize,
    nky: usize,
    kx_max: f64,
    ky_max: f64,
    f: F,
) -> f64 {
    let dkx = 2.0 * kx_max / (nkx - 1) as f64;
    let dky = 2.0 * ky_max / (nky - 1) as f64;
    let mut sum = 0.0;
    for j in 0..nky {
        let wy = if j == 0 || j == nky - 1 { 0.5 } else { 1.0 };
        let ky = -ky_max + j as f64 * dky;
        for i in 0..nkx {
            let wx = if i == 0 || i == nkx - 1 { 0.5 } else { 1.0 };
            sum += wx * wy * f(-kx_max + i as f64 * dkx, ky);
        }
    }
    sum * dkx * dky
}

/// γ_L in closed form: (π²/4) s λ⁻³.
pub fn gamma_l_closed(params: &PhysicalParams) -> f64 {
    0.25 * std::f64::consts::PI.powi(2) * params.rate_prefactor
        / params.wavelength.powi(3)
}

/// Analytic ∫_{-L}^{L} dz/(z - iε) = 2i arctan(L/ε), for cross-checking the
/// oracle quadrature.
pub fn axis_integral_antiderivative(l: f64, epsilon: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * (l / epsilon).atan())
}

/// An oracle estimate with its quadrature error bound.
#[derive(Debug, Clone, Copy)]
pub struct OracleEstimate {
    pub rate: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// γ_L by adaptive quadrature of the on-axis commutator kernel over the
/// memory window |z| ≤ c τ₀:
///
/// ```text
///     γ_L = Re{ (s k0³ / (8 i (2π)²)) ∫ dz / (z - iε) } → (π²/4) s λ⁻³
/// ```
///
/// as ε → 0⁺ and c τ₀ → ∞.  The real part of the integrand is a Lorentzian
/// of width ε, so the window only needs c τ₀ ≫ ε, not c τ₀ → ∞; the rate
/// saturates once the window covers the spike.
pub fn gamma_l_contour_oracle(
    params: &PhysicalParams,
    tau0: f64,
    epsilon: f64,
) -> Result<OracleEstimate> {
    let l = crate::params::SPEED_OF_LIGHT * tau0;
    if !(tau0.is_finite() && l >= 10.0 * params.wavelength) {
        return Err(Error::Domain(format!(
            "memory window c tau0 = {l:e} m must cover at least 10 wavelengths"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "regularization epsilon must be > 0, got {epsilon:e}"
        )));
    }

    // Integrable spike of width ε at z = 0: split there so the adaptive
    // refinement starts on the feature.
    let kernel = |z: f64| Complex64::new(1.0, 0.0) / Complex64::new(z, -epsilon);
    let left = quad::integrate(kernel, -l, 0.0, 1e-10, 0.0, 2000)?;
    let right = quad::integrate(kernel, 0.0, l, 1e-10, 0.0, 2000)?;
    let integral = left.value + right.value;

    let pref = params.rate_prefactor * params.k0.powi(3)
        / (32.0 * std::f64::consts::PI.powi(2));
    Ok(OracleEstimate {
        rate: pref * integral.im,
        abs_error: pref * (left.abs_error + right.abs_error),
        evaluations: left.evaluations + right.evaluations,
    })
}

/// The rate bundle driving the master equation.  Imaginary parts are
/// energy-shift counterparts of the damping rates; they default to zero.
#[derive(Debug, Clone, Copy)]
pub struct BackactionRates {
    pub gamma_p: f64,
    pub gamma_l: f64,
    pub im_gamma_p: f64,
    pub im_gamma_l: f64,
    /// Memory window used by the γ_L oracle (metadata only).
    pub tau0: f64,
}

impl BackactionRates {
    pub fn new(
        gamma_p: f64,
        gamma_l: f64,
        im_gamma_p: f64,
        im_gamma_l: f64,
        tau0: f64,
    ) -> Result<Self> {
        if !(gamma_p.is_finite() && gamma_p >= 0.0) {
            return Err(Error::InvalidParam {
                field: "gamma_p",
                reason: format!("must be finite and >= 0, got {gamma_p}"),
            });
        }
        if !gamma_l.is_finite() || !im_gamma_p.is_finite() || !im_gamma_l.is_finite() {
            return Err(Error::InvalidParam {
                field: "rates",
                reason: "all rates must be finite".into(),
            });
        }
        if gamma_l < gamma_p {
            return Err(Error::InternalConsistency(format!(
                "gamma_l = {gamma_l:e} < gamma_p = {gamma_p:e}; the depletion rate bounds \
                 the phase-diffusion rate for any normalized profile"
            )));
        }
        Ok(Self {
            gamma_p,
            gamma_l,
            im_gamma_p,
            im_gamma_l,
            tau0,
        })
    }

    /// Γ_P = γ_P + i Im γ_P.
    pub fn gamma_p_complex(&self) -> Complex64 {
        Complex64::new(self.gamma_p, self.im_gamma_p)
    }

    /// Γ_L - Γ_P, the coefficient of the depletion part of the generator.
    pub fn gamma_loss(&self) -> Complex64 {
        Complex64::new(
            self.gamma_l - self.gamma_p,
            self.im_gamma_l - self.im_gamma_p,
        )
    }
}

/// Bundles γ_P (closed form for Gaussians, dual-route quadrature for
/// grids) and γ_L (closed form) for `profile` under `params`.
pub fn rates(
    profile: &CondensateProfile,
    params: &PhysicalParams,
    im_parts: Option<(f64, f64)>,
    tau0: f64,
) -> Result<BackactionRates> {
    let gamma_p_value = match &profile.kind {
        ProfileKind::Gaussian { ax, ay, .. } => gamma_p_gaussian(params, *ax, *ay),
        ProfileKind::Grid(_) => gamma_p(profile, params)?.value(),
    };
    let (im_p, im_l) = im_parts.unwrap_or((0.0, 0.0));
    BackactionRates::new(gamma_p_value, gamma_l_closed(params), im_p, im_l, tau0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condensate::DensityGrid3;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn reduced() -> PhysicalParams {
        PhysicalParams::reduced()
    }

    #[test]
    fn gaussian_unit_widths_give_one_sixteenth() {
        // Reduced units make s = λ = 1, so γ_P = 1/16 at ax = ay = 1.
        let p = reduced();
        assert_relative_eq!(gamma_p_gaussian(&p, 1.0, 1.0), 1.0 / 16.0, max_relative = 1e-15);

        let profile = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        let g = gamma_p(&profile, &p).unwrap();
        assert_relative_eq!(g.real_space, 1.0 / 16.0, max_relative = 1e-9);
        assert_relative_eq!(g.k_space, 1.0 / 16.0, max_relative = 1e-9);
        assert!(g.rel_mismatch() < 1e-9);
    }

    #[test]
    fn gamma_l_closed_form_reduced_value() {
        assert_relative_eq!(
            gamma_l_closed(&reduced()),
            2.467_401_100_272_339_7,
            max_relative = 1e-15
        );
    }

    #[test]
    fn oracle_matches_closed_form() {
        let p = reduced();
        // tau0 in seconds: c tau0 = 1000 λ = 1000 m in reduced units.
        let tau0 = 1000.0 / crate::params::SPEED_OF_LIGHT;
        let eps = 1e-6;
        let oracle = gamma_l_contour_oracle(&p, tau0, eps).unwrap();
        // Finite window and ε > 0 bias the oracle by O(ε/L) ~ 1e-9.
        assert_relative_eq!(oracle.rate, gamma_l_closed(&p), max_relative = 1e-6);
        assert!(oracle.abs_error < 1e-6 * oracle.rate);
    }

    #[test]
    fn oracle_quadrature_matches_antiderivative() {
        let (l, eps) = (500.0, 1e-5);
        let q = quad::integrate(
            |z| Complex64::new(1.0, 0.0) / Complex64::new(z, -eps),
            -l,
            l,
            1e-10,
            0.0,
            4000,
        )
        .unwrap();
        let exact = axis_integral_antiderivative(l, eps);
        assert_relative_eq!(q.value.im, exact.im, max_relative = 1e-9);
        assert!(q.value.re.abs() < 1e-9 * exact.im);
    }

    #[test]
    fn oracle_is_window_independent_once_converged() {
        let p = reduced();
        let eps = 1e-6;
        let tau0 = 1000.0 / crate::params::SPEED_OF_LIGHT;
        let a = gamma_l_contour_oracle(&p, tau0, eps).unwrap().rate;
        let b = gamma_l_contour_oracle(&p, 2.0 * tau0, eps).unwrap().rate;
        assert!((a - b).abs() / a < 1e-6, "window dependence {:e}", (a - b).abs() / a);
    }

    #[test]
    fn oracle_is_epsilon_insensitive() {
        let p = reduced();
        let tau0 = 1000.0 / crate::params::SPEED_OF_LIGHT;
        let a = gamma_l_contour_oracle(&p, tau0, 1e-6).unwrap().rate;
        let b = gamma_l_contour_oracle(&p, tau0, 1e-5).unwrap().rate;
        assert!((a - b).abs() / a < 1e-5, "epsilon dependence {:e}", (a - b).abs() / a);
    }

    #[test]
    fn oracle_rejects_short_window_and_bad_epsilon() {
        let p = reduced();
        let short = 5.0 / crate::params::SPEED_OF_LIGHT;
        assert!(matches!(
            gamma_l_contour_oracle(&p, short, 1e-6),
            Err(Error::Domain(_))
        ));
        let tau0 = 1000.0 / crate::params::SPEED_OF_LIGHT;
        assert!(matches!(
            gamma_l_contour_oracle(&p, tau0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gamma_l_contour_oracle(&p, tau0, -1e-9),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rate_ratio_follows_condensate_area() {
        // γ_P/γ_L = λ²/((2π ax)(2π ay)); at ax = ay = 100 λ the ratio is
        // 1/(2π·100)² ≈ 2.533e-6.
        let p = reduced();
        let profile = CondensateProfile::gaussian(100.0, 100.0, 100.0, 1).unwrap();
        let r = rates(&profile, &p, None, 0.0).unwrap();
        let ratio = r.gamma_p / r.gamma_l;
        assert_relative_eq!(ratio, (TWO_PI * 100.0).powi(-2), max_relative = 1e-12);
    }

    #[test]
    fn gamma_p_approaches_gamma_l_for_narrow_profiles() {
        // A Gaussian with ax = ay = λ/(2π) reaches γ_P = γ_L exactly;
        // wider profiles stay strictly below, approaching from below as
        // the width shrinks toward that point-condensate limit.
        let p = reduced();
        let gl = gamma_l_closed(&p);
        let mut prev = 0.0;
        for scale in [4.0, 2.0, 1.5, 1.1, 1.01] {
            let a = scale / TWO_PI;
            let gp = gamma_p_gaussian(&p, a, a);
            assert!(gp < gl, "gp = {gp} must stay below gl = {gl} at scale {scale}");
            assert!(gp > prev);
            prev = gp;
        }
        assert_relative_eq!(
            gamma_p_gaussian(&p, 1.0 / TWO_PI, 1.0 / TWO_PI),
            gl,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rates_scale_linearly_with_intensity() {
        let profile = CondensateProfile::gaussian(2.0, 3.0, 1.0, 1).unwrap();
        let p1 = PhysicalParams::new(1.0, 1.0, 7.0).unwrap();
        let p2 = PhysicalParams::new(1.0, 1.0, 14.0).unwrap();
        let r1 = rates(&profile, &p1, None, 0.0).unwrap();
        let r2 = rates(&profile, &p2, None, 0.0).unwrap();
        assert_eq!(r2.gamma_p, 2.0 * r1.gamma_p);
        assert_eq!(r2.gamma_l, 2.0 * r1.gamma_l);
    }

    #[test]
    fn zero_intensity_zeroes_both_rates() {
        let profile = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let r = rates(&profile, &p, None, 0.0).unwrap();
        assert_eq!(r.gamma_p, 0.0);
        assert_eq!(r.gamma_l, 0.0);
    }

    #[test]
    fn gridded_gaussian_routes_agree_and_match_closed_form() {
        let p = reduced();
        let norm = TWO_PI.powf(-1.5);
        let grid3 = DensityGrid3::from_fn((64, 64, 64), (6.0, 6.0, 6.0), |x, y, z| {
            norm * (-0.5 * (x * x + y * y + z * z)).exp()
        })
        .unwrap();
        let profile = CondensateProfile::from_grid(grid3, 1);
        let g = gamma_p(&profile, &p).unwrap();
        assert!(g.rel_mismatch() < 1e-4);
        assert_relative_eq!(g.value(), 1.0 / 16.0, max_relative = 1e-4);
    }

    #[test]
    fn coarse_grid_fails_parseval_with_advice() {
        let p = reduced();
        let profile = CondensateProfile::gaussian(1.0, 1.0, 1.0, 1).unwrap();
        let coarse = TransverseGrid::new(8, 8, 2.0, 2.0).unwrap();
        match gamma_p_on_grid(&profile, &p, &coarse) {
            Err(Error::Resolution { mismatch, advice, .. }) => {
                assert!(mismatch > PARSEVAL_TOL);
                assert!(advice.contains("resolution"));
            }
            other => panic!("expected a resolution error, got {other:?}"),
        }
    }

    #[test]
    fn bound_holds_for_random_mixtures() {
        // γ_P ≤ γ_L for any normalized profile; exercised on random
        // three-component Gaussian mixtures sampled to a lattice.
        let p = reduced();
        let gl = gamma_l_closed(&p);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for trial in 0..20 {
            let comps: Vec<(f64, [f64; 3], [f64; 3])> = (0..3)
                .map(|_| {
                    (
                        rng.gen_range(0.2..1.0),
                        [
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-2.0..2.0),
                            rng.gen_range(-2.0..2.0),
                        ],
                        [
                            rng.gen_range(0.5..3.0),
                            rng.gen_range(0.5..3.0),
                            rng.gen_range(0.5..3.0),
                        ],
                    )
                })
                .collect();
            let grid3 = DensityGrid3::from_fn((48, 48, 48), (12.0, 12.0, 12.0), |x, y, z| {
                comps
                    .iter()
                    .map(|(w, c, s)| {
                        let q = ((x - c[0]) / s[0]).powi(2)
                            + ((y - c[1]) / s[1]).powi(2)
                            + ((z - c[2]) / s[2]).powi(2);
                        w * (-0.5 * q).exp() / (TWO_PI.powf(1.5) * s[0] * s[1] * s[2])
                    })
                    .sum()
            })
            .unwrap();
            let profile = CondensateProfile::from_grid(grid3, 1);
            let g = gamma_p(&profile, &p).unwrap();
            assert!(
                g.value() <= gl,
                "trial {trial}: gamma_p = {} exceeds gamma_l = {gl}",
                g.value()
            );
        }
    }

    #[test]
    fn rates_reject_inverted_ordering() {
        assert!(matches!(
            BackactionRates::new(2.0, 1.0, 0.0, 0.0, 0.0),
            Err(Error::InternalConsistency(_))
        ));
        assert!(BackactionRates::new(1.0, 2.0, 0.0, 0.0, 0.0).is_ok());
    }
}
