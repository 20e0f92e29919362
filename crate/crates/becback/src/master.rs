//! Master equation for the condensate density matrix in the atom-number
//! (Fock) basis, truncated at n_max:
//!
//! ```text
//!     dρ/dt = -(L₁ + L₂) ρ
//!     (L₁ρ)_mn = [ i Im Γ_P (m² - n²) + Re Γ_P (m - n)² ] ρ_mn
//!     (L₂ρ)_mn = γ [ (m + n) ρ_mn - 2 √((m+1)(n+1)) ρ_{m+1,n+1} ]
//!                + i σ (m - n) ρ_mn ,      γ + iσ = Γ_L - Γ_P .
//! ```
//!
//! L₁ is pure phase diffusion: it never moves population, only damps
//! number coherences at rate Re Γ_P (m - n)².  L₂ is depletion: a cascade
//! toward lower atom number at rate 2(γ_L - γ_P) per atom.  Both are
//! trace-free, so the truncated generator preserves tr ρ = 1 exactly.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rates::BackactionRates;

/// Max elementwise |ρ - ρ†| accepted by the validating constructors.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// |tr ρ - 1| accepted by the validating constructors.
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalue floor: ρ + PSD_TOL·I must be positive definite.
pub const PSD_TOL: f64 = 1e-9;

/// Condensate density matrix on the Fock basis {|0⟩, ..., |n_max⟩}.
#[derive(Debug, Clone)]
pub struct CondensateState {
    n_max: usize,
    rho: Array2<Complex64>,
}

impl CondensateState {
    /// Fock state |n⟩⟨n|.
    pub fn fock(n_max: usize, n: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::InvalidParam {
                field: "fock n",
                reason: format!("n = {n} exceeds n_max = {n_max}"),
            });
        }
        let mut rho = Array2::zeros((n_max + 1, n_max + 1));
        rho[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(Self { n_max, rho })
    }

    /// Pure superposition Σ c_n |n⟩, normalized internally.
    pub fn from_amplitudes(n_max: usize, amplitudes: &[(usize, Complex64)]) -> Result<Self> {
        let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
        for &(n, a) in amplitudes {
            if n > n_max {
                return Err(Error::InvalidParam {
                    field: "amplitudes",
                    reason: format!("component n = {n} exceeds n_max = {n_max}"),
                });
            }
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::InvalidParam {
                    field: "amplitudes",
                    reason: format!("component n = {n} is not finite"),
                });
            }
            c[n] += a;
        }
        let norm_sqr: f64 = c.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(Error::InvalidParam {
                field: "amplitudes",
                reason: "state has zero norm".into(),
            });
        }
        let mut rho = Array2::zeros((n_max + 1, n_max + 1));
        for m in 0..=n_max {
            for n in 0..=n_max {
                rho[(m, n)] = c[m] * c[n].conj() / norm_sqr;
            }
        }
        Ok(Self { n_max, rho })
    }

    /// Wraps an explicit density matrix after validating hermiticity,
    /// unit trace, and positive semidefiniteness.
    pub fn from_matrix(n_max: usize, rho: Array2<Complex64>) -> Result<Self> {
        let dim = n_max + 1;
        if rho.dim() != (dim, dim) {
            return Err(Error::GridMismatch(format!(
                "density matrix has shape {:?}, expected ({dim}, {dim})",
                rho.dim()
            )));
        }
        let mut herm_dev = 0.0_f64;
        for m in 0..dim {
            for n in m..dim {
                herm_dev = herm_dev.max((rho[(m, n)] - rho[(n, m)].conj()).norm());
            }
        }
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::InvalidParam {
                field: "density matrix",
                reason: format!("hermiticity violated by {herm_dev:e} (tolerance {HERMITICITY_TOL:e})"),
            });
        }
        let trace: Complex64 = (0..dim).map(|i| rho[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidParam {
                field: "density matrix",
                reason: format!("trace is {trace}, expected 1 within {TRACE_TOL:e}"),
            });
        }
        if !linalg::is_psd_within(&rho, PSD_TOL) {
            return Err(Error::InvalidParam {
                field: "density matrix",
                reason: format!("not positive semidefinite within {PSD_TOL:e}"),
            });
        }
        Ok(Self { n_max, rho })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn rho(&self) -> &Array2<Complex64> {
        &self.rho
    }

    pub fn coherence(&self, m: usize, n: usize) -> Complex64 {
        self.rho[(m, n)]
    }

    pub fn trace(&self) -> f64 {
        (0..=self.n_max).map(|i| self.rho[(i, i)].re).sum()
    }

    /// ⟨n⟩ = Σ m ρ_mm.
    pub fn mean_atom_number(&self) -> f64 {
        (0..=self.n_max).map(|m| m as f64 * self.rho[(m, m)].re).sum()
    }

    /// tr ρ² = Σ |ρ_mn|².
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// L₁ρ, the phase-diffusion part of the generator.  Zero on any diagonal
/// (number-basis) state.
pub fn dephasing_action(state: &CondensateState, gamma_p: Complex64) -> Array2<Complex64> {
    let dim = state.n_max + 1;
    let mut out = Array2::zeros((dim, dim));
    for m in 0..dim {
        for n in 0..dim {
            let (mf, nf) = (m as f64, n as f64);
            let coeff = Complex64::new(
                gamma_p.re * (mf - nf).powi(2),
                gamma_p.im * (mf * mf - nf * nf),
            );
            out[(m, n)] = coeff * state.rho[(m, n)];
        }
    }
    out
}

/// L₂ρ, the depletion part of the generator, with γ + iσ = Γ_L - Γ_P.
/// Trace-free: the (m+n) drain of ρ_mm is balanced by the 2√(..) feed of
/// ρ_{m-1,m-1}.
pub fn loss_action(state: &CondensateState, gamma_loss: Complex64) -> Array2<Complex64> {
    let dim = state.n_max + 1;
    let (g, s) = (gamma_loss.re, gamma_loss.im);
    let mut out = Array2::zeros((dim, dim));
    for m in 0..dim {
        for n in 0..dim {
            let (mf, nf) = (m as f64, n as f64);
            let mut v = Complex64::new(g * (mf + nf), s * (mf - nf)) * state.rho[(m, n)];
            if m + 1 < dim && n + 1 < dim {
                v -= 2.0 * g * ((mf + 1.0) * (nf + 1.0)).sqrt() * state.rho[(m + 1, n + 1)];
            }
            out[(m, n)] = v;
        }
    }
    out
}

fn generator_tables(
    n_max: usize,
    rates: &BackactionRates,
) -> (Array2<Complex64>, Array2<f64>) {
    let dim = n_max + 1;
    let gp = rates.gamma_p_complex();
    let gl = rates.gamma_loss();
    let mut diag = Array2::zeros((dim, dim));
    let mut shift = Array2::zeros((dim, dim));
    for m in 0..dim {
        for n in 0..dim {
            let (mf, nf) = (m as f64, n as f64);
            // dρ/dt picks up -(L₁ + L₂): combine every multiplicative term.
            diag[(m, n)] = -Complex64::new(
                gp.re * (mf - nf).powi(2) + gl.re * (mf + nf),
                gp.im * (mf * mf - nf * nf) + gl.im * (mf - nf),
            );
            shift[(m, n)] = 2.0 * gl.re * ((mf + 1.0) * (nf + 1.0)).sqrt();
        }
    }
    (diag, shift)
}

fn apply_generator(
    rho: &Array2<Complex64>,
    diag: &Array2<Complex64>,
    shift: &Array2<f64>,
) -> Array2<Complex64> {
    let dim = rho.nrows();
    let mut out = Array2::zeros((dim, dim));
    for m in 0..dim {
        for n in 0..dim {
            let mut v = diag[(m, n)] * rho[(m, n)];
            if m + 1 < dim && n + 1 < dim {
                v += shift[(m, n)] * rho[(m + 1, n + 1)];
            }
            out[(m, n)] = v;
        }
    }
    out
}

/// Evolves `state` for time `t` and returns the validated result.
///
/// With Γ_L = Γ_P the generator is diagonal in (m, n) and is applied as an
/// exact elementwise exponential, any `t` in one step.  Otherwise classic
/// RK4 with step ≤ dt, guarded by
///
/// ```text
///     dt · max(γ_P n_max², 2 (γ_L - γ_P) n_max) < 0.1
/// ```
///
/// (extended to the imaginary parts, which rotate at comparable rates).
/// The matrix is re-hermitized after every step; hermiticity, trace, and
/// positivity are re-validated on the result.
pub fn evolve(
    state: &CondensateState,
    rates: &BackactionRates,
    t: f64,
    dt: f64,
) -> Result<CondensateState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParam {
            field: "t",
            reason: format!("must be finite and >= 0, got {t}"),
        });
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let n_max = state.n_max;
    let gp = rates.gamma_p_complex();
    let gl = rates.gamma_loss();

    if gl == Complex64::new(0.0, 0.0) {
        let mut rho = state.rho.clone();
        for m in 0..=n_max {
            for n in 0..=n_max {
                let (mf, nf) = (m as f64, n as f64);
                let decay = (-gp.re * (mf - nf).powi(2) * t).exp();
                let angle = -gp.im * (mf * mf - nf * nf) * t;
                rho[(m, n)] *= Complex64::from_polar(decay, angle);
            }
        }
        return CondensateState::from_matrix(n_max, rho);
    }

    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParam {
            field: "dt",
            reason: format!("must be finite and > 0, got {dt}"),
        });
    }
    let nf = n_max as f64;
    let stiffness = (gp.re * nf * nf)
        .max(2.0 * gl.re * nf)
        .max(gp.im.abs() * nf * nf)
        .max(2.0 * gl.im.abs() * nf);
    if dt * stiffness >= 0.1 {
        return Err(Error::StabilityGuard {
            dt,
            suggested: 0.05 / stiffness,
        });
    }

    let (diag, shift) = generator_tables(n_max, rates);
    let n_steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / n_steps as f64;
    let mut rho = state.rho.clone();
    for _ in 0..n_steps {
        let k1 = apply_generator(&rho, &diag, &shift);
        let k2 = apply_generator(&(&rho + &(&k1 * Complex64::new(0.5 * h, 0.0))), &diag, &shift);
        let k3 = apply_generator(&(&rho + &(&k2 * Complex64::new(0.5 * h, 0.0))), &diag, &shift);
        let k4 = apply_generator(&(&rho + &(&k3 * Complex64::new(h, 0.0))), &diag, &shift);
        let incr = (k1 + &(k2 * 2.0) + &(k3 * 2.0) + k4) * Complex64::new(h / 6.0, 0.0);
        rho += &incr;
        // Re-hermitize: RK4 roundoff breaks ρ = ρ† at the 1e-16 level.
        for m in 0..=n_max {
            for n in m + 1..=n_max {
                let avg = 0.5 * (rho[(m, n)] + rho[(n, m)].conj());
                rho[(m, n)] = avg;
                rho[(n, m)] = avg.conj();
            }
            rho[(m, m)] = Complex64::new(rho[(m, m)].re, 0.0);
        }
    }
    CondensateState::from_matrix(n_max, rho)
}

/// Phase distribution P(φ) = (2π)⁻¹ Σ_q e^{iqφ} Σ_m ρ_{m,m+q} on n_phi
/// uniform angles, renormalized so the rectangle sum is exactly 1.
#[derive(Debug, Clone)]
pub struct PhaseDistribution {
    pub phi: Vec<f64>,
    pub density: Vec<f64>,
    /// Rectangle-sum integral before renormalization.
    pub raw_integral: f64,
}

impl PhaseDistribution {
    pub fn d_phi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.phi.len() as f64
    }

    /// ⟨e^{iφ}⟩ under P.
    pub fn mean_resultant(&self) -> Complex64 {
        let d = self.d_phi();
        self.phi
            .iter()
            .zip(&self.density)
            .map(|(&p, &v)| Complex64::from_polar(v * d, p))
            .sum()
    }

    /// 1 - |⟨e^{iφ}⟩|, in [0, 1].
    pub fn circular_variance(&self) -> f64 {
        1.0 - self.mean_resultant().norm()
    }

    /// -2 ln |⟨e^{iφ}⟩|, the wrapped analogue of the variance; grows
    /// linearly at rate 2 γ_P under pure phase diffusion.
    pub fn wrapped_variance(&self) -> f64 {
        -2.0 * self.mean_resultant().norm().ln()
    }
}

/// Samples P(φ) on `n_phi` angles φ_j = 2πj/n_phi.  Requires
/// n_phi ≥ max(4 n_max, 4) so the band-limited distribution is fully
/// resolved.
pub fn phase_distribution(state: &CondensateState, n_phi: usize) -> Result<PhaseDistribution> {
    let required = (4 * state.n_max).max(4);
    if n_phi < required {
        return Err(Error::InvalidParam {
            field: "n_phi",
            reason: format!("need at least {required} angles for n_max = {}", state.n_max),
        });
    }
    let mut c = vec![Complex64::new(0.0, 0.0); state.n_max + 1];
    for q in 0..=state.n_max {
        for m in 0..=state.n_max - q {
            c[q] += state.rho[(m, m + q)];
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let phi: Vec<f64> = (0..n_phi).map(|j| two_pi * j as f64 / n_phi as f64).collect();
    let mut density: Vec<f64> = phi
        .iter()
        .map(|&p| {
            let osc: f64 = (1..=state.n_max)
                .map(|q| (c[q] * Complex64::from_polar(1.0, q as f64 * p)).re)
                .sum();
            (c[0].re + 2.0 * osc) / two_pi
        })
        .collect();
    let d_phi = two_pi / n_phi as f64;
    let raw_integral: f64 = density.iter().sum::<f64>() * d_phi;
    if raw_integral <= 0.0 {
        return Err(Error::InternalConsistency(format!(
            "phase distribution integrates to {raw_integral}"
        )));
    }
    for v in &mut density {
        *v /= raw_integral;
    }
    Ok(PhaseDistribution {
        phi,
        density,
        raw_integral,
    })
}
