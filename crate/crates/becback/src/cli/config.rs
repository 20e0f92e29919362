//! Scenario configuration: a versioned TOML file naming the physics, the
//! profile, and per-command settings.  Parsing is strict (unknown keys are
//! rejected) and `validate` resolves the file into live domain objects.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::condensate::CondensateProfile;
use crate::error::{Error, Result};
use crate::grid::TransverseGrid;
use crate::imaging::ImagingMode;
use crate::io;
use crate::params::PhysicalParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub params: ParamsSection,
    pub profile: ProfileSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ObservationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Either `reduced = true` (λ = χ₀ = 1, I = ħc, making s = 1) or all three
/// physical values spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default)]
    pub reduced: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
}

/// One of three profile kinds ("gaussian", "grid", "thomas_fermi"); the
/// fields belonging to the other kinds must stay absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: String,
    pub atom_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub az: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ry: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_128")]
    pub nx: usize,
    #[serde(default = "default_128")]
    pub ny: usize,
    /// Third dimension when a profile is sampled to a lattice.
    #[serde(default = "default_64")]
    pub nz: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_extent_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_extent_y: Option<f64>,
}

fn default_128() -> usize {
    128
}

fn default_64() -> usize {
    64
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            nx: 128,
            ny: 128,
            nz: 64,
            half_extent_x: None,
            half_extent_y: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_window")]
    pub c_tau0_over_lambda: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon_over_lambda: f64,
}

fn default_window() -> f64 {
    1e3
}

fn default_epsilon() -> f64 {
    1e-6
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            c_tau0_over_lambda: default_window(),
            epsilon_over_lambda: default_epsilon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSection {
    pub snr_target: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
    pub n_list: Vec<f64>,
}

fn default_mode() -> String {
    "dark_ground".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub n_max: usize,
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// "fock" (with `fock_n`) or "superposition" (with `component` tables).
    pub initial: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub component: Vec<ComponentSpec>,
    /// Index pairs (m, n) whose |ρ_mn| become CSV columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coherences: Vec<(usize, usize)>,
    /// Explicit rates; omitted means derive them from profile and params.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesSection>,
}

fn default_samples() -> usize {
    51
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub gamma_p: f64,
    pub gamma_l: f64,
    #[serde(default)]
    pub im_gamma_p: f64,
    #[serde(default)]
    pub im_gamma_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSection {
    #[serde(default = "default_modes")]
    pub modes: Vec<String>,
    #[serde(default)]
    pub dc_radius_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson_photons: Option<f64>,
}

fn default_modes() -> Vec<String> {
    vec!["dark_ground".into(), "phase_contrast".into()]
}

impl Default for ImageSection {
    fn default() -> Self {
        ImageSection {
            modes: default_modes(),
            dc_radius_bins: 0,
            poisson_photons: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

/// Config resolved into live objects.
#[derive(Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub params: PhysicalParams,
    pub profile: CondensateProfile,
    /// Oracle memory window, seconds.
    pub tau0: f64,
    /// Oracle regularization, meters.
    pub epsilon: f64,
}

pub fn parse(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    Ok(config)
}

impl ScenarioConfig {
    /// Resolves sections into domain objects.  `config_dir` anchors
    /// relative profile paths.
    pub fn validate(self, config_dir: &Path) -> Result<Scenario> {
        let params = self.params.build()?;
        let grid = self.grid.clone().unwrap_or_default();
        let profile = self.profile.build(config_dir, &grid)?;
        let oracle = self.oracle.clone().unwrap_or_default();
        if oracle.c_tau0_over_lambda < 10.0 {
            return Err(Error::Config(format!(
                "oracle.c_tau0_over_lambda = {} must be at least 10",
                oracle.c_tau0_over_lambda
            )));
        }
        if !(oracle.epsilon_over_lambda.is_finite() && oracle.epsilon_over_lambda > 0.0) {
            return Err(Error::Config(format!(
                "oracle.epsilon_over_lambda = {} must be > 0",
                oracle.epsilon_over_lambda
            )));
        }
        let tau0 =
            oracle.c_tau0_over_lambda * params.wavelength / crate::params::SPEED_OF_LIGHT;
        let epsilon = oracle.epsilon_over_lambda * params.wavelength;
        Ok(Scenario {
            config: self,
            params,
            profile,
            tau0,
            epsilon,
        })
    }
}

impl ParamsSection {
    pub fn build(&self) -> Result<PhysicalParams> {
        if self.reduced {
            if self.wavelength.is_some() || self.chi0.is_some() || self.intensity.is_some() {
                return Err(Error::Config(
                    "params.reduced = true excludes explicit wavelength/chi0/intensity".into(),
                ));
            }
            return Ok(PhysicalParams::reduced());
        }
        match (self.wavelength, self.chi0, self.intensity) {
            (Some(w), Some(c), Some(i)) => PhysicalParams::new(w, c, i),
            _ => Err(Error::Config(
                "params requires wavelength, chi0, and intensity unless reduced = true".into(),
            )),
        }
    }
}

impl ProfileSection {
    fn require(&self, field: &str, value: Option<f64>) -> Result<f64> {
        value.ok_or_else(|| {
            Error::Config(format!("profile.{field} is required for kind \"{}\"", self.kind))
        })
    }

    fn forbid(&self, fields: &[(&str, bool)]) -> Result<()> {
        for (name, present) in fields {
            if *present {
                return Err(Error::Config(format!(
                    "profile.{name} does not apply to kind \"{}\"",
                    self.kind
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self, config_dir: &Path, grid: &GridSection) -> Result<CondensateProfile> {
        match self.kind.as_str() {
            "gaussian" => {
                self.forbid(&[
                    ("path", self.path.is_some()),
                    ("rx", self.rx.is_some()),
                    ("ry", self.ry.is_some()),
                    ("rz", self.rz.is_some()),
                ])?;
                CondensateProfile::gaussian_at(
                    self.require("ax", self.ax)?,
                    self.require("ay", self.ay)?,
                    self.require("az", self.az)?,
                    self.center.unwrap_or([0.0; 3]),
                    self.atom_count,
                )
            }
            "grid" => {
                self.forbid(&[
                    ("ax", self.ax.is_some()),
                    ("ay", self.ay.is_some()),
                    ("az", self.az.is_some()),
                    ("center", self.center.is_some()),
                    ("rx", self.rx.is_some()),
                    ("ry", self.ry.is_some()),
                    ("rz", self.rz.is_some()),
                ])?;
                let path = self.path.as_ref().ok_or_else(|| {
                    Error::Config("profile.path is required for kind \"grid\"".into())
                })?;
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    config_dir.join(path)
                };
                let density = io::read_pxd1(&resolved)?;
                Ok(CondensateProfile::from_grid(density, self.atom_count))
            }
            "thomas_fermi" => {
                self.forbid(&[
                    ("ax", self.ax.is_some()),
                    ("ay", self.ay.is_some()),
                    ("az", self.az.is_some()),
                    ("center", self.center.is_some()),
                    ("path", self.path.is_some()),
                ])?;
                CondensateProfile::thomas_fermi(
                    self.require("rx", self.rx)?,
                    self.require("ry", self.ry)?,
                    self.require("rz", self.rz)?,
                    (grid.nx, grid.ny, grid.nz),
                    self.atom_count,
                )
            }
            other => Err(Error::Config(format!(
                "unknown profile.kind \"{other}\" (expected gaussian, grid, or thomas_fermi)"
            ))),
        }
    }
}

impl GridSection {
    /// Transverse grid for imaging and quadrature checks: explicit extents
    /// when given, ±8 Gaussian widths otherwise; gridded profiles always
    /// use their native lattice.
    pub fn build(&self, profile: &CondensateProfile) -> Result<TransverseGrid> {
        if let crate::condensate::ProfileKind::Grid(g) = &profile.kind {
            return g.transverse_grid();
        }
        match (self.half_extent_x, self.half_extent_y) {
            (Some(hx), Some(hy)) => {
                TransverseGrid::new(self.nx, self.ny, 2.0 * hx / self.nx as f64, 2.0 * hy / self.ny as f64)
            }
            (None, None) => profile.auto_grid(self.nx),
            _ => Err(Error::Config(
                "grid.half_extent_x and half_extent_y must be given together".into(),
            )),
        }
    }
}

pub fn parse_mode(name: &str) -> Result<ImagingMode> {
    match name {
        "dark_ground" => Ok(ImagingMode::DarkGround),
        "phase_contrast" => Ok(ImagingMode::PhaseContrast),
        other => Err(Error::Config(format!(
            "unknown imaging mode \"{other}\" (expected dark_ground or phase_contrast)"
        ))),
    }
}
