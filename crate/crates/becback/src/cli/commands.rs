//! The five subcommands.  Each consumes a validated scenario, writes its
//! artifacts atomically under the output directory, and prints one line per
//! file written.  Outputs are deterministic: the same config and seed
//! produce byte-identical files.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::cli::config::{parse_mode, Scenario};
use crate::error::{Error, Result};
use crate::grid::ComplexField2D;
use crate::imaging::{self, ImagingMode};
use crate::io;
use crate::master::{self, CondensateState};
use crate::params::PhysicalParams;
use crate::rates::{self, BackactionRates};
use crate::{field, quad};

/// Stamped into every JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub config_sha256: String,
    pub seed: u64,
}

/// Shared command context: where to write and how runs are identified.
pub struct Ctx {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub provenance: Provenance,
}

impl Ctx {
    fn artifact(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

#[derive(Serialize)]
struct ParamsOut {
    wavelength: f64,
    chi0: f64,
    intensity: f64,
    k0: f64,
    omega0: f64,
    rate_prefactor: f64,
}

impl ParamsOut {
    fn from(p: &PhysicalParams) -> Self {
        ParamsOut {
            wavelength: p.wavelength,
            chi0: p.chi0,
            intensity: p.intensity,
            k0: p.k0,
            omega0: p.omega0,
            rate_prefactor: p.rate_prefactor,
        }
    }
}

#[derive(Serialize)]
struct RatesArtifact {
    provenance: Provenance,
    params: ParamsOut,
    profile_digest: String,
    gamma_p: f64,
    gamma_p_real_space: f64,
    gamma_p_k_space: f64,
    gamma_p_route_mismatch: f64,
    gamma_l: f64,
    ratio_gamma_p_over_gamma_l: f64,
    gamma_l_oracle: f64,
    gamma_l_oracle_rel_deviation: f64,
    gamma_l_oracle_abs_error: f64,
    gamma_l_oracle_evaluations: usize,
    tau0_seconds: f64,
    epsilon_meters: f64,
}

/// Dephasing and depletion rates for the configured profile, with both
/// γ_P quadrature routes and the γ_L contour oracle reported next to the
/// closed forms.
pub fn cmd_rates(scenario: &Scenario, ctx: &Ctx) -> Result<()> {
    let bundle = rates::rates(&scenario.profile, &scenario.params, None, scenario.tau0)?;
    let routes = rates::gamma_p(&scenario.profile, &scenario.params)?;
    let oracle =
        rates::gamma_l_contour_oracle(&scenario.params, scenario.tau0, scenario.epsilon)?;
    let ratio = if bundle.gamma_l == 0.0 {
        0.0
    } else {
        bundle.gamma_p / bundle.gamma_l
    };
    let oracle_dev = if bundle.gamma_l == 0.0 {
        0.0
    } else {
        (oracle.rate - bundle.gamma_l).abs() / bundle.gamma_l
    };

    let artifact = RatesArtifact {
        provenance: ctx.provenance.clone(),
        params: ParamsOut::from(&scenario.params),
        profile_digest: scenario.profile.digest(),
        gamma_p: bundle.gamma_p,
        gamma_p_real_space: routes.real_space,
        gamma_p_k_space: routes.k_space,
        gamma_p_route_mismatch: routes.rel_mismatch(),
        gamma_l: bundle.gamma_l,
        ratio_gamma_p_over_gamma_l: ratio,
        gamma_l_oracle: oracle.rate,
        gamma_l_oracle_rel_deviation: oracle_dev,
        gamma_l_oracle_abs_error: oracle.abs_error,
        gamma_l_oracle_evaluations: oracle.evaluations,
        tau0_seconds: scenario.tau0,
        epsilon_meters: scenario.epsilon,
    };
    let path = ctx.artifact("rates.json");
    io::write_json(&path, &artifact)?;
    announce(&path);
    Ok(())
}

#[derive(Serialize)]
struct EstimateRow {
    n_atoms: f64,
    delta_phi: f64,
    n_bar: f64,
    delta_phi_noise: f64,
    snr: f64,
    duration_seconds: f64,
    kappa: f64,
    survival: f64,
    expansion_limited: bool,
}

#[derive(Serialize)]
struct EstimateArtifact {
    provenance: Provenance,
    profile_digest: String,
    eta: f64,
    peak_density: f64,
    snr_target: f64,
    mode: String,
    rows: Vec<EstimateRow>,
}

/// Exposure budget per atom number: duration to reach the SNR target, the
/// depletion probability κ it costs, and the survival e^{-κ}.
pub fn cmd_estimate(scenario: &Scenario, ctx: &Ctx) -> Result<()> {
    let obs = scenario.config.observation.as_ref().ok_or_else(|| {
        Error::Config("the estimate command needs an [observation] section".into())
    })?;
    if obs.n_list.is_empty() {
        return Err(Error::Config("observation.n_list must be non-empty".into()));
    }
    let mode = parse_mode(&obs.mode)?;
    let eta = scenario.profile.effective_eta();
    let peak_density = scenario.profile.peak_density();
    let params = &scenario.params;

    let rows: Vec<EstimateRow> = obs
        .n_list
        .par_iter()
        .map(|&n_atoms| -> Result<EstimateRow> {
            let plan = imaging::plan_for_snr(params, n_atoms, eta, obs.snr_target, mode)?;
            let report = imaging::backaction_report(params, n_atoms, eta, plan.duration)?;
            Ok(EstimateRow {
                n_atoms,
                delta_phi: report.delta_phi,
                n_bar: report.n_bar,
                delta_phi_noise: report.delta_phi_noise,
                snr: report.snr,
                duration_seconds: plan.duration,
                kappa: report.kappa,
                survival: report.survival,
                expansion_limited: imaging::expansion_limited(params, n_atoms, peak_density),
            })
        })
        .collect::<Result<_>>()?;

    // At fixed SNR the budget κ = (snr / (N λ² η))² must fall as N grows;
    // anything else means the sweep and the identity disagree.
    let mut by_n: Vec<(f64, f64)> = rows.iter().map(|r| (r.n_atoms, r.kappa)).collect();
    by_n.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in by_n.windows(2) {
        let ((n0, k0), (n1, k1)) = (pair[0], pair[1]);
        if n1 > n0 && k1 >= k0 {
            return Err(Error::InternalConsistency(format!(
                "kappa must decrease with atom number at fixed SNR: \
                 kappa({n1}) = {k1:e} >= kappa({n0}) = {k0:e}"
            )));
        }
    }

    let csv_path = ctx.artifact("estimate.csv");
    let mut csv = String::from(
        "n_atoms,delta_phi,n_bar,delta_phi_noise,snr,duration_seconds,kappa,survival,\
         expansion_limited\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n_atoms,
            r.delta_phi,
            r.n_bar,
            r.delta_phi_noise,
            r.snr,
            r.duration_seconds,
            r.kappa,
            r.survival,
            r.expansion_limited
        ));
    }
    io::atomic_write(&csv_path, csv.as_bytes())?;
    announce(&csv_path);

    let artifact = EstimateArtifact {
        provenance: ctx.provenance.clone(),
        profile_digest: scenario.profile.digest(),
        eta,
        peak_density,
        snr_target: obs.snr_target,
        mode: obs.mode.clone(),
        rows,
    };
    let json_path = ctx.artifact("estimate.json");
    io::write_json(&json_path, &artifact)?;
    announce(&json_path);
    Ok(())
}

#[derive(Serialize)]
struct RatesOut {
    gamma_p: f64,
    gamma_l: f64,
    im_gamma_p: f64,
    im_gamma_l: f64,
    tau0: f64,
}

#[derive(Serialize)]
struct FinalStateArtifact {
    provenance: Provenance,
    n_max: usize,
    t_final: f64,
    rates: RatesOut,
    trace: f64,
    mean_n: f64,
    purity: f64,
    rho_re: Vec<Vec<f64>>,
    rho_im: Vec<Vec<f64>>,
}

fn evolution_rates(scenario: &Scenario) -> Result<BackactionRates> {
    let evo = scenario.config.evolution.as_ref().unwrap();
    match &evo.rates {
        Some(r) => BackactionRates::new(
            r.gamma_p,
            r.gamma_l,
            r.im_gamma_p,
            r.im_gamma_l,
            scenario.tau0,
        ),
        None => rates::rates(&scenario.profile, &scenario.params, None, scenario.tau0),
    }
}

fn initial_state(scenario: &Scenario) -> Result<CondensateState> {
    let evo = scenario.config.evolution.as_ref().unwrap();
    match evo.initial.as_str() {
        "fock" => {
            let n = evo.fock_n.ok_or_else(|| {
                Error::Config("evolution.initial = \"fock\" needs fock_n".into())
            })?;
            CondensateState::fock(evo.n_max, n)
        }
        "superposition" => {
            if evo.component.is_empty() {
                return Err(Error::Config(
                    "evolution.initial = \"superposition\" needs [[evolution.component]] \
                     tables"
                        .into(),
                ));
            }
            let amplitudes: Vec<(usize, Complex64)> = evo
                .component
                .iter()
                .map(|c| (c.n, Complex64::new(c.re, c.im)))
                .collect();
            CondensateState::from_amplitudes(evo.n_max, &amplitudes)
        }
        other => Err(Error::Config(format!(
            "unknown evolution.initial \"{other}\" (expected fock or superposition)"
        ))),
    }
}

/// Integrates the number-state master equation and logs trace, mean atom
/// number, purity, and selected coherence magnitudes over time.
pub fn cmd_evolve(scenario: &Scenario, ctx: &Ctx) -> Result<()> {
    let evo = scenario
        .config
        .evolution
        .as_ref()
        .ok_or_else(|| Error::Config("the evolve command needs an [evolution] section".into()))?;
    if evo.n_max == 0 || evo.n_max > 256 {
        return Err(Error::Config(format!(
            "evolution.n_max = {} must be between 1 and 256",
            evo.n_max
        )));
    }
    if evo.samples < 2 {
        return Err(Error::Config(format!(
            "evolution.samples = {} must be at least 2",
            evo.samples
        )));
    }
    if !(evo.t_final.is_finite() && evo.t_final >= 0.0) {
        return Err(Error::Config(format!(
            "evolution.t_final = {} must be finite and >= 0",
            evo.t_final
        )));
    }
    for &(m, n) in &evo.coherences {
        if m > evo.n_max || n > evo.n_max {
            return Err(Error::Config(format!(
                "coherence index ({m}, {n}) exceeds n_max = {}",
                evo.n_max
            )));
        }
    }

    let bundle = evolution_rates(scenario)?;
    let mut state = initial_state(scenario)?;

    let mut csv = String::from("t,trace,mean_n,purity");
    for &(m, n) in &evo.coherences {
        csv.push_str(&format!(",abs_rho_{m}_{n}"));
    }
    csv.push('\n');

    let segment = evo.t_final / (evo.samples - 1) as f64;
    for j in 0..evo.samples {
        if j > 0 {
            state = master::evolve(&state, &bundle, segment, evo.dt)?;
        }
        let t = segment * j as f64;
        csv.push_str(&format!(
            "{},{},{},{}",
            t,
            state.trace(),
            state.mean_atom_number(),
            state.purity()
        ));
        for &(m, n) in &evo.coherences {
            csv.push_str(&format!(",{}", state.coherence(m, n).norm()));
        }
        csv.push('\n');
    }

    let csv_path = ctx.artifact("evolution.csv");
    io::atomic_write(&csv_path, csv.as_bytes())?;
    announce(&csv_path);

    let dim = evo.n_max + 1;
    let mut rho_re = vec![vec![0.0; dim]; dim];
    let mut rho_im = vec![vec![0.0; dim]; dim];
    for m in 0..dim {
        for n in 0..dim {
            rho_re[m][n] = state.rho()[(m, n)].re;
            rho_im[m][n] = state.rho()[(m, n)].im;
        }
    }
    let artifact = FinalStateArtifact {
        provenance: ctx.provenance.clone(),
        n_max: evo.n_max,
        t_final: evo.t_final,
        rates: RatesOut {
            gamma_p: bundle.gamma_p,
            gamma_l: bundle.gamma_l,
            im_gamma_p: bundle.im_gamma_p,
            im_gamma_l: bundle.im_gamma_l,
            tau0: bundle.tau0,
        },
        trace: state.trace(),
        mean_n: state.mean_atom_number(),
        purity: state.purity(),
        rho_re,
        rho_im,
    };
    let json_path = ctx.artifact("final_state.json");
    io::write_json(&json_path, &artifact)?;
    announce(&json_path);
    Ok(())
}

#[derive(Serialize)]
struct ModeOut {
    mode: String,
    peak_intensity: f64,
    total_power: f64,
}

#[derive(Serialize)]
struct ImageArtifact {
    provenance: Provenance,
    profile_digest: String,
    n_atoms: f64,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    delta_phi_peak: f64,
    expansion_limited: bool,
    dc_radius_bins: usize,
    modes: Vec<ModeOut>,
}

fn mode_file_stem(mode: ImagingMode) -> &'static str {
    match mode {
        ImagingMode::DarkGround => "dark_ground",
        ImagingMode::PhaseContrast => "phase_contrast",
    }
}

/// Renders the thin-object phase map and its dark-ground or phase-contrast
/// intensity images, plus a center-row line profile.
pub fn cmd_image(scenario: &Scenario, ctx: &Ctx) -> Result<()> {
    let section = scenario.config.image.clone().unwrap_or_default();
    let grid_section = scenario.config.grid.clone().unwrap_or_default();
    let grid = grid_section.build(&scenario.profile)?;
    let n_atoms = scenario.profile.atom_count as f64;
    let params = &scenario.params;

    let eta_map = scenario.profile.column_density(&grid)?;
    let coeff = params.k0 * params.chi0 / 2.0 * n_atoms;
    let phase_map = eta_map.mapv(|eta| coeff * eta);
    let delta_phi_peak = phase_map.iter().fold(0.0_f64, |acc, &v| acc.max(v));

    let phase_path = ctx.artifact("phase_map.pxi");
    io::write_pxi1(&phase_path, &grid, &phase_map)?;
    announce(&phase_path);

    let probe = ComplexField2D::plane_wave(grid)?;
    let masked = field::thin_phase_mask(&probe, &eta_map, n_atoms, params)?;

    let mut modes = Vec::new();
    let mut intensities: Vec<(ImagingMode, Array2<f64>)> = Vec::new();
    for (index, name) in section.modes.iter().enumerate() {
        let mode = parse_mode(name)?;
        let image = imaging::render_image(&masked, mode, section.dc_radius_bins);
        let peak = image.iter().fold(0.0_f64, |acc, &v| acc.max(v));
        let power = image.sum() * grid.cell_area();
        modes.push(ModeOut {
            mode: name.clone(),
            peak_intensity: peak,
            total_power: power,
        });

        let path = ctx.artifact(&format!("{}.pxi", mode_file_stem(mode)));
        io::write_pxi1(&path, &grid, &image)?;
        announce(&path);

        if let Some(photons) = section.poisson_photons {
            let counts =
                imaging::sample_poisson_counts(&image, photons, ctx.seed.wrapping_add(index as u64));
            let counts_f64 = counts.mapv(|c| c as f64);
            let counts_path = ctx.artifact(&format!("{}_counts.pxi", mode_file_stem(mode)));
            io::write_pxi1(&counts_path, &grid, &counts_f64)?;
            announce(&counts_path);
        }
        intensities.push((mode, image));
    }

    let iy = grid.ny / 2;
    let mut csv = String::from("x,phase");
    for (mode, _) in &intensities {
        csv.push_str(&format!(",{}", mode_file_stem(*mode)));
    }
    csv.push('\n');
    for ix in 0..grid.nx {
        csv.push_str(&format!("{},{}", grid.x(ix), phase_map[(iy, ix)]));
        for (_, image) in &intensities {
            csv.push_str(&format!(",{}", image[(iy, ix)]));
        }
        csv.push('\n');
    }
    let csv_path = ctx.artifact("line_profile.csv");
    io::atomic_write(&csv_path, csv.as_bytes())?;
    announce(&csv_path);

    let artifact = ImageArtifact {
        provenance: ctx.provenance.clone(),
        profile_digest: scenario.profile.digest(),
        n_atoms,
        nx: grid.nx,
        ny: grid.ny,
        dx: grid.dx,
        dy: grid.dy,
        delta_phi_peak,
        expansion_limited: imaging::expansion_limited(
            params,
            n_atoms,
            scenario.profile.peak_density(),
        ),
        dc_radius_bins: section.dc_radius_bins,
        modes,
    };
    let json_path = ctx.artifact("image_report.json");
    io::write_json(&json_path, &artifact)?;
    announce(&json_path);
    Ok(())
}

#[derive(Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn within(name: &'static str, measured: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: measured.is_finite() && measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }
}

#[derive(Serialize)]
struct CheckArtifact {
    provenance: Provenance,
    all_passed: bool,
    results: Vec<CheckResult>,
}

fn check_pde_residual(scenario: &Scenario, seed: u64) -> Result<CheckResult> {
    let params = &scenario.params;
    let lambda = params.wavelength;
    let epsilon = params.default_epsilon();
    let h = 1e-4 * lambda;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let x = rng.gen_range(-2.0..2.0) * lambda;
        let y = rng.gen_range(-2.0..2.0) * lambda;
        let sign = if rng.gen_range(0..2) == 0 { -1.0 } else { 1.0 };
        let z = sign * rng.gen_range(0.5..5.0) * lambda;
        worst = worst.max(field::greens_pde_residual(x, y, z, params, epsilon, h)?);
    }
    Ok(CheckResult::within(
        "commutator_pde_residual",
        worst,
        1e-5,
        "max relative residual of (-i d/dz - laplacian/2k0 - k0) on the kernel, \
         20 seeded points"
            .into(),
    ))
}

fn check_transverse_integral(scenario: &Scenario) -> Result<CheckResult> {
    let params = &scenario.params;
    let epsilon = params.default_epsilon();
    let mut worst = 0.0_f64;
    let mut u = -3.0;
    while u <= 3.0 + 1e-12 {
        let z = params.wavelength * 10.0_f64.powf(u);
        let integral = field::transverse_integral(z, params, epsilon)?;
        worst = worst.max((integral.value.norm() * params.wavelength - 1.0).abs());
        u += 0.5;
    }
    Ok(CheckResult::within(
        "transverse_integral_modulus",
        worst,
        1e-6,
        "| |integral| * wavelength - 1 | across z from 1e-3 to 1e3 wavelengths".into(),
    ))
}

fn check_oracle_vs_closed(scenario: &Scenario) -> Result<CheckResult> {
    let closed = rates::gamma_l_closed(&scenario.params);
    let oracle =
        rates::gamma_l_contour_oracle(&scenario.params, scenario.tau0, scenario.epsilon)?;
    let measured = if closed == 0.0 {
        oracle.rate.abs()
    } else {
        (oracle.rate - closed).abs() / closed
    };
    Ok(CheckResult::within(
        "gamma_l_oracle_vs_closed",
        measured,
        1e-3,
        format!("oracle {:e} vs closed form {closed:e}", oracle.rate),
    ))
}

fn check_oracle_window_independence(scenario: &Scenario) -> Result<CheckResult> {
    let base =
        rates::gamma_l_contour_oracle(&scenario.params, scenario.tau0, scenario.epsilon)?;
    let doubled =
        rates::gamma_l_contour_oracle(&scenario.params, 2.0 * scenario.tau0, scenario.epsilon)?;
    let measured = if base.rate == 0.0 {
        doubled.rate.abs()
    } else {
        (doubled.rate - base.rate).abs() / base.rate
    };
    Ok(CheckResult::within(
        "gamma_l_oracle_window_independence",
        measured,
        1e-6,
        "relative change of the oracle rate when the memory window doubles".into(),
    ))
}

fn check_parseval(scenario: &Scenario) -> Result<CheckResult> {
    let grid_section = scenario.config.grid.clone().unwrap_or_default();
    let grid = grid_section.build(&scenario.profile)?;
    match rates::gamma_p_on_grid(&scenario.profile, &scenario.params, &grid) {
        Ok(routes) => Ok(CheckResult::within(
            "gamma_p_parseval",
            routes.rel_mismatch(),
            rates::PARSEVAL_TOL,
            format!(
                "real-space {:e} vs k-space {:e} on a {}x{} grid",
                routes.real_space, routes.k_space, grid.nx, grid.ny
            ),
        )),
        Err(Error::Resolution {
            mismatch,
            tolerance,
            advice,
        }) => Ok(CheckResult {
            name: "gamma_p_parseval",
            passed: false,
            measured: mismatch,
            tolerance,
            detail: advice,
        }),
        Err(e) => Err(e),
    }
}

fn check_kappa_identity(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let wavelength = 10.0_f64.powf(rng.gen_range(-6.7..-5.7));
        let chi0 = 10.0_f64.powf(rng.gen_range(-23.0..-21.0));
        let intensity = 10.0_f64.powf(rng.gen_range(-1.0..2.0));
        let params = PhysicalParams::new(wavelength, chi0, intensity)?;
        let n_atoms = 10.0_f64.powf(rng.gen_range(2.0..7.0));
        let a = wavelength * rng.gen_range(1.0..300.0);
        let eta = 1.0 / (2.0 * std::f64::consts::PI * a * a);
        let duration = 10.0_f64.powf(rng.gen_range(-6.0..-2.0));

        let report = imaging::backaction_report(&params, n_atoms, eta, duration)?;
        let signal_side = (report.snr / (n_atoms * wavelength.powi(2) * eta)).powi(2);
        worst =
            worst.max((report.kappa - signal_side).abs() / report.kappa.max(signal_side));
    }
    Ok(CheckResult::within(
        "kappa_identity",
        worst,
        imaging::KAPPA_IDENTITY_TOL,
        "2 gamma_l dt vs (snr / (N lambda^2 eta))^2 over 100 seeded parameter tuples".into(),
    ))
}

fn check_quadrature_antiderivative(scenario: &Scenario) -> Result<CheckResult> {
    let l = crate::params::SPEED_OF_LIGHT * scenario.tau0;
    let epsilon = scenario.epsilon;
    let kernel = |z: f64| Complex64::new(1.0, 0.0) / Complex64::new(z, -epsilon);
    let left = quad::integrate(kernel, -l, 0.0, 1e-10, 0.0, 2000)?;
    let right = quad::integrate(kernel, 0.0, l, 1e-10, 0.0, 2000)?;
    let numeric = left.value + right.value;
    let exact = rates::axis_integral_antiderivative(l, epsilon);
    let measured = (numeric - exact).norm() / exact.norm();
    Ok(CheckResult::within(
        "axis_quadrature_vs_antiderivative",
        measured,
        1e-9,
        "adaptive quadrature of the regularized axis kernel vs its antiderivative".into(),
    ))
}

/// Runs the numerical self-checks and writes a pass/fail report.  Returns
/// whether every check passed; the caller turns a failure into exit code 2
/// after the report has been written.
pub fn cmd_check(scenario: &Scenario, ctx: &Ctx) -> Result<bool> {
    let results = vec![
        check_pde_residual(scenario, ctx.seed)?,
        check_transverse_integral(scenario)?,
        check_oracle_vs_closed(scenario)?,
        check_oracle_window_independence(scenario)?,
        check_quadrature_antiderivative(scenario)?,
        check_parseval(scenario)?,
        check_kappa_identity(ctx.seed)?,
    ];
    let all_passed = results.iter().all(|r| r.passed);

    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {}: measured {:e} (tolerance {:e}); {}",
            r.name, r.measured, r.tolerance, r.detail
        );
    }

    let artifact = CheckArtifact {
        provenance: ctx.provenance.clone(),
        all_passed,
        results,
    };
    let path = ctx.artifact("check_report.json");
    io::write_json(&path, &artifact)?;
    announce(&path);
    Ok(all_passed)
}
