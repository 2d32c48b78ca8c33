//! Run configuration: JSON in, resolved parameters out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LatticeSim,
    LatticeDefectSim,
    VerifyPoisson,
    VerifyZeroCurvature,
    VerifyCharges,
    LiouvilleEvolve,
    MonodromyCheck,
    BtEvolve,
    HeteroBt,
    DefectCharges,
}

impl Mode {
    pub const ALL: [Mode; 10] = [
        Mode::VerifyCharges,
        Mode::DefectCharges,
        Mode::VerifyPoisson,
        Mode::VerifyZeroCurvature,
        Mode::LatticeSim,
        Mode::LatticeDefectSim,
        Mode::LiouvilleEvolve,
        Mode::MonodromyCheck,
        Mode::HeteroBt,
        Mode::BtEvolve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::LatticeSim => "lattice-sim",
            Mode::LatticeDefectSim => "lattice-defect-sim",
            Mode::VerifyPoisson => "verify-poisson",
            Mode::VerifyZeroCurvature => "verify-zero-curvature",
            Mode::VerifyCharges => "verify-charges",
            Mode::LiouvilleEvolve => "liouville-evolve",
            Mode::MonodromyCheck => "monodromy-check",
            Mode::BtEvolve => "bt-evolve",
            Mode::HeteroBt => "hetero-bt",
            Mode::DefectCharges => "defect-charges",
        }
    }
}

/// Starting point of the lattice simulations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Small perturbation of `v = e^{iπ/4}`, bounded up to `t ≈ 5`.
    NearNeutral,
    /// `a = ā = 0`, `v = 1`: a fixed point.
    ZeroAmplitude,
    /// Generic sampling (`|a| ≤ 1`, `|ln v| ≤ 0.5`); usually blows up.
    Random,
}

/// `[re, im]`.
pub type Cplx = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub algebraic: f64,
    pub series: f64,
    /// Identities whose constants the quadrature reproduces exactly.
    pub quadrature: f64,
    pub monodromy_fit: f64,
    pub order_min: f64,
    pub order_max: f64,
    /// Smallest accepted error ratio per 2× grid refinement.
    pub refinement_min: f64,
    /// Smallest accepted ratio between a non-pair and a pair residual.
    pub discrimination_min: f64,
    /// Agreement with closed-form solutions of the generators.
    pub closed_form: f64,
    /// Smallest residual that counts as a detected violation.
    pub detection_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebraic: 1e-10,
            series: 1e-12,
            quadrature: 1e-13,
            monodromy_fit: 0.01,
            order_min: 12.0,
            order_max: 20.0,
            refinement_min: 3.5,
            discrimination_min: 100.0,
            closed_form: 1e-8,
            detection_min: 0.1,
        }
    }
}

/// Partial tolerance overrides as they appear in a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub algebraic: Option<f64>,
    pub series: Option<f64>,
    pub quadrature: Option<f64>,
    pub monodromy_fit: Option<f64>,
    pub order_min: Option<f64>,
    pub order_max: Option<f64>,
    pub refinement_min: Option<f64>,
    pub discrimination_min: Option<f64>,
    pub closed_form: Option<f64>,
    pub detection_min: Option<f64>,
}

/// A config file. Every parameter is optional; missing ones take the
/// defaults of the chosen mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub sites: Option<Vec<usize>>,
    pub n_sites: Option<usize>,
    pub defect_site: Option<usize>,
    pub samples: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub probes: Option<Vec<Cplx>>,
    pub initial: Option<InitialState>,
    pub grid_points: Option<usize>,
    pub half_length: Option<f64>,
    pub refinements: Option<Vec<usize>>,
    pub lambda: Option<Cplx>,
    pub mu: Option<Cplx>,
    pub theta: Option<Cplx>,
    pub hetero_c: Option<Cplx>,
    pub hetero_theta: Option<Cplx>,
    pub tolerances: Option<ToleranceOverrides>,
    pub tolerance_scale: Option<f64>,
    pub include_timing: Option<bool>,
    pub series_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
}

/// Fully resolved parameters; echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub mode: Mode,
    pub seed: u64,
    pub sites: Vec<usize>,
    pub n_sites: usize,
    pub defect_site: usize,
    pub samples: usize,
    pub dt: f64,
    pub t_end: f64,
    pub probes: Vec<Cplx>,
    pub initial: InitialState,
    pub grid_points: usize,
    pub half_length: f64,
    pub refinements: Vec<usize>,
    pub lambda: Cplx,
    pub mu: Cplx,
    pub theta: Cplx,
    pub hetero_c: Cplx,
    pub hetero_theta: Cplx,
    pub tolerances: Tolerances,
    pub tolerance_scale: f64,
    #[serde(skip)]
    pub include_timing: bool,
    #[serde(skip)]
    pub series_out: Option<PathBuf>,
    #[serde(skip)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config has no mode")]
    MissingMode,
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            mode: Some(mode),
            ..Self::default()
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Fills in mode defaults and validates.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let mode = self.mode.ok_or(ConfigError::MissingMode)?;
        let defect_mode = matches!(mode, Mode::DefectCharges | Mode::LatticeDefectSim);
        let (grid_default, length_default, dt_default, t_end_default) = match mode {
            Mode::MonodromyCheck => (4096, std::f64::consts::PI, 1e-2, 5.0),
            Mode::LiouvilleEvolve => (16, 1.0, 2.5e-3, 0.5),
            Mode::DefectCharges => (41, 1.0, 1e-2, 5.0),
            _ => (64, 1.0, 1e-2, 5.0),
        };
        let samples_default = match mode {
            Mode::VerifyCharges | Mode::DefectCharges | Mode::VerifyPoisson => 100,
            Mode::VerifyZeroCurvature => 20,
            Mode::MonodromyCheck => 10,
            Mode::LiouvilleEvolve => 4,
            _ => 1,
        };
        let n_sites_default = match mode {
            Mode::VerifyPoisson => 4,
            Mode::VerifyZeroCurvature => 6,
            _ => 8,
        };
        let sites_default: Vec<usize> = if defect_mode {
            (3..=6).collect()
        } else {
            (2..=6).collect()
        };
        let n_sites = self.n_sites.unwrap_or(n_sites_default);
        let mut tol = Tolerances::default();
        if let Some(o) = &self.tolerances {
            let set = |slot: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *slot = v;
                }
            };
            set(&mut tol.algebraic, o.algebraic);
            set(&mut tol.series, o.series);
            set(&mut tol.quadrature, o.quadrature);
            set(&mut tol.monodromy_fit, o.monodromy_fit);
            set(&mut tol.order_min, o.order_min);
            set(&mut tol.order_max, o.order_max);
            set(&mut tol.refinement_min, o.refinement_min);
            set(&mut tol.discrimination_min, o.discrimination_min);
            set(&mut tol.closed_form, o.closed_form);
            set(&mut tol.detection_min, o.detection_min);
        }
        let r = Resolved {
            mode,
            seed: self.seed.unwrap_or(7),
            sites: self.sites.clone().unwrap_or(sites_default),
            n_sites,
            defect_site: self.defect_site.unwrap_or(n_sites / 2),
            samples: self.samples.unwrap_or(samples_default),
            dt: self.dt.unwrap_or(dt_default),
            t_end: self.t_end.unwrap_or(t_end_default),
            probes: self.probes.clone().unwrap_or(vec![[2.0, 0.0], [3.0, 0.0]]),
            initial: self.initial.unwrap_or(InitialState::NearNeutral),
            grid_points: self.grid_points.unwrap_or(grid_default),
            half_length: self.half_length.unwrap_or(length_default),
            refinements: self.refinements.clone().unwrap_or(vec![21, 41, 81]),
            lambda: self.lambda.unwrap_or([0.3, 0.0]),
            mu: self.mu.unwrap_or([0.4, -0.3]),
            theta: self.theta.unwrap_or([0.2, 0.1]),
            hetero_c: self.hetero_c.unwrap_or([0.4, 0.1]),
            hetero_theta: self.hetero_theta.unwrap_or([0.2, -0.1]),
            tolerances: tol,
            tolerance_scale: self.tolerance_scale.unwrap_or(1.0),
            include_timing: self.include_timing.unwrap_or(false),
            series_out: self.series_out.clone(),
            report_out: self.report_out.clone(),
        };
        r.validate()?;
        Ok(r)
    }
}

impl Resolved {
    fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.algebraic", t.algebraic),
            ("tolerances.series", t.series),
            ("tolerances.quadrature", t.quadrature),
            ("tolerances.monodromy_fit", t.monodromy_fit),
            ("tolerances.refinement_min", t.refinement_min),
            ("tolerances.discrimination_min", t.discrimination_min),
            ("tolerances.closed_form", t.closed_form),
            ("tolerances.detection_min", t.detection_min),
            ("tolerance_scale", self.tolerance_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(t.order_min > 0.0 && t.order_max > t.order_min) {
            return Err(invalid("tolerances.order_min", "need 0 < order_min < order_max"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if !(self.dt > 0.0 && self.t_end >= self.dt) {
            return Err(invalid(
                "dt",
                format!("need 0 < dt <= t_end, got {} and {}", self.dt, self.t_end),
            ));
        }
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return Err(invalid("half_length", "must be positive"));
        }
        let min_sites = match self.mode {
            Mode::DefectCharges | Mode::LatticeDefectSim | Mode::VerifyZeroCurvature => 3,
            _ => 2,
        };
        let min_list = if matches!(self.mode, Mode::DefectCharges | Mode::LatticeDefectSim) {
            3
        } else {
            2
        };
        if self.sites.is_empty() || self.sites.iter().any(|&n| n < min_list) {
            return Err(invalid("sites", format!("need a nonempty list of sizes >= {min_list}")));
        }
        if self.n_sites < min_sites {
            return Err(invalid("n_sites", format!("must be at least {min_sites}")));
        }
        if matches!(self.mode, Mode::LatticeDefectSim | Mode::VerifyZeroCurvature)
            && !(2..self.n_sites).contains(&self.defect_site)
        {
            return Err(invalid("defect_site", format!("must lie in 2..={}", self.n_sites - 1)));
        }
        if self.probes.is_empty() {
            return Err(invalid("probes", "need at least one probe"));
        }
        if self.grid_points < 8 {
            return Err(invalid("grid_points", "must be at least 8"));
        }
        if self.mode == Mode::MonodromyCheck && !self.grid_points.is_multiple_of(2) {
            return Err(invalid("grid_points", "monodromy integration needs an even count"));
        }
        if self.refinements.len() < 2 || self.refinements.iter().any(|&n| n < 5) {
            return Err(invalid("refinements", "need at least two grid sizes >= 5"));
        }
        if self.hetero_c == [0.0, 0.0] {
            return Err(invalid("hetero_c", "must be nonzero"));
        }
        Ok(())
    }

    /// An absolute tolerance after `tolerance_scale`.
    pub fn scaled(&self, tol: f64) -> f64 {
        tol * self.tolerance_scale
    }
}
