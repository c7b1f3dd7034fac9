//! Run configuration for the command-line front end.
//!
//! TOML with strict parsing: unknown keys are errors. Every section is
//! optional and falls back to the reference dot defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DecayRates, DephasingModel, PulseDrive};
use crate::sweeps::{DotParams, RabiScan};
use crate::timebin::{TimeBinModelParams, DEFAULT_PAIRING_WEIGHT};
use crate::tomography::MleOptions;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and > 0, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root of all randomness; `--seed` overrides it.
    pub seed: u64,
    pub numerics: NumericsConfig,
    pub dot: DotConfig,
    pub pulse: PulseConfig,
    pub dephasing: DephasingConfig,
    pub rabi: RabiConfig,
    pub calibration: CalibrationConfig,
    pub ratio: RatioConfig,
    pub timebin: TimeBinConfig,
    pub tomography: TomographyConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            numerics: NumericsConfig::default(),
            dot: DotConfig::default(),
            pulse: PulseConfig::default(),
            dephasing: DephasingConfig::default(),
            rabi: RabiConfig::default(),
            calibration: CalibrationConfig::default(),
            ratio: RatioConfig::default(),
            timebin: TimeBinConfig::default(),
            tomography: TomographyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Local error bound for single trajectories.
    pub tol: f64,
    /// Local error bound for sweep and fit points.
    pub sweep_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            sweep_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DotConfig {
    pub gamma_x: f64,
    pub gamma_b: f64,
    pub delta_x: f64,
    pub delta_b: f64,
}

impl Default for DotConfig {
    fn default() -> Self {
        let d = DotParams::default();
        Self {
            gamma_x: d.decay.gamma_x,
            gamma_b: d.decay.gamma_b,
            delta_x: d.delta_x,
            delta_b: d.delta_b,
        }
    }
}

impl DotConfig {
    pub fn params(&self) -> DotParams {
        DotParams {
            decay: DecayRates {
                gamma_b: self.gamma_b,
                gamma_x: self.gamma_x,
            },
            delta_x: self.delta_x,
            delta_b: self.delta_b,
        }
    }
}

/// Pulse area used when neither `area` nor `omega0` is set: the first
/// biexciton maximum of the 12 ps reference pulse.
pub const DEFAULT_PULSE_AREA: f64 = 22.0;

/// Single pulse. At most one of `area` and `omega0` may be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub sigma: f64,
    pub area: Option<f64>,
    pub omega0: Option<f64>,
    /// Pulse centre; defaults to `5·sigma` so the window starts at 0.
    pub t0: Option<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            sigma: 12.0,
            area: None,
            omega0: None,
            t0: None,
        }
    }
}

impl PulseConfig {
    pub fn drive(&self, dot: &DotConfig) -> Result<PulseDrive, ConfigError> {
        let t0 = self.t0.unwrap_or(5.0 * self.sigma);
        let drive = match (self.area, self.omega0) {
            (None, None) => {
                PulseDrive::with_area(DEFAULT_PULSE_AREA, self.sigma, t0, dot.delta_x, dot.delta_b)
            }
            (Some(area), None) => {
                PulseDrive::with_area(area, self.sigma, t0, dot.delta_x, dot.delta_b)
            }
            (None, Some(w)) => PulseDrive::new(w, self.sigma, t0, dot.delta_x, dot.delta_b),
            _ => return Err(invalid("pulse", "set at most one of `area` and `omega0`")),
        };
        drive.map_err(|e| invalid("pulse", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DephasingConfig {
    pub gamma_bg: f64,
    /// Intensity-dependent amplitude, usually from `fit-dephasing`. Required
    /// by `ratio`; `evolve` and `entangle` treat a missing value as 0.
    pub gamma_i0: Option<f64>,
    pub n_p: u32,
}

impl Default for DephasingConfig {
    fn default() -> Self {
        Self {
            gamma_bg: 0.02,
            gamma_i0: None,
            n_p: 2,
        }
    }
}

impl DephasingConfig {
    pub fn model_or_zero(&self) -> DephasingModel {
        DephasingModel {
            gamma_bg: self.gamma_bg,
            gamma_i0: self.gamma_i0.unwrap_or(0.0),
            n_p: self.n_p,
        }
    }
}

/// One intensity-dependent dephasing law. Without `gamma_i0` the amplitude
/// is fitted to the calibration contrast first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n_p: u32,
    #[serde(default)]
    pub gamma_i0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiConfig {
    pub sigma: f64,
    pub area_max: f64,
    pub points: usize,
    pub models: Vec<ModelSpec>,
}

impl Default for RabiConfig {
    fn default() -> Self {
        Self {
            sigma: 8.0,
            area_max: 40.0,
            points: 200,
            models: vec![
                ModelSpec {
                    n_p: 0,
                    gamma_i0: None,
                },
                ModelSpec {
                    n_p: 2,
                    gamma_i0: Some(0.0349),
                },
                ModelSpec {
                    n_p: 4,
                    gamma_i0: Some(0.0219),
                },
            ],
        }
    }
}

impl RabiConfig {
    /// `points` areas evenly spaced in `(0, area_max]`.
    pub fn areas(&self) -> Vec<f64> {
        (1..=self.points)
            .map(|k| self.area_max * k as f64 / self.points as f64)
            .collect()
    }
}

/// Rabi contrast calibration shared by `rabi` and `fit-dephasing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub sigma: f64,
    /// First-max/first-min contrast to match; defaults to the contrast of
    /// `reference`.
    pub target_ratio: Option<f64>,
    pub reference: ModelSpec,
    /// Exponents fitted by `fit-dephasing`.
    pub fit_np: Vec<u32>,
    pub area_max: f64,
    pub samples: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            sigma: 8.0,
            target_ratio: None,
            reference: ModelSpec {
                n_p: 2,
                gamma_i0: Some(0.0349),
            },
            fit_np: vec![0, 2, 4],
            area_max: 40.0,
            samples: 200,
        }
    }
}

impl CalibrationConfig {
    pub fn scan(&self, tol: f64) -> RabiScan {
        RabiScan {
            max_area: self.area_max,
            samples: self.samples,
            tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatioConfig {
    pub sigmas: Vec<f64>,
    /// Largest `Ω₀²σ` (ps⁻¹) of the energy axis.
    pub energy_max: f64,
    pub points: usize,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![4.0, 12.0],
            energy_max: 12.0,
            points: 60,
        }
    }
}

impl RatioConfig {
    pub fn energies(&self) -> Vec<f64> {
        (1..=self.points)
            .map(|k| self.energy_max * k as f64 / self.points as f64)
            .collect()
    }
}

/// Bell fidelity targeted when no coherence source is configured.
pub const DEFAULT_TARGET_FIDELITY: f64 = 0.88;

/// At most one of `v_coh`, `v_coh_from_dynamics` and `target_fidelity`
/// selects the coherence factor; with none, `target_fidelity` is 0.88.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeBinConfig {
    pub phi_p: f64,
    pub epsilon: f64,
    pub pairing_weight: f64,
    pub v_coh: Option<f64>,
    /// Take `v_coh` from the `g`–`b` coherence after the configured pulse.
    pub v_coh_from_dynamics: bool,
    /// Choose `v_coh` so the model state reaches this Bell fidelity.
    pub target_fidelity: Option<f64>,
}

impl Default for TimeBinConfig {
    fn default() -> Self {
        Self {
            phi_p: 0.0,
            epsilon: 0.06,
            pairing_weight: DEFAULT_PAIRING_WEIGHT,
            v_coh: None,
            v_coh_from_dynamics: false,
            target_fidelity: None,
        }
    }
}

/// Where the coherence factor comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoherenceSource {
    Fixed(f64),
    Dynamics,
    TargetFidelity(f64),
}

impl TimeBinConfig {
    pub fn source(&self) -> CoherenceSource {
        if let Some(v) = self.v_coh {
            CoherenceSource::Fixed(v)
        } else if self.v_coh_from_dynamics {
            CoherenceSource::Dynamics
        } else {
            CoherenceSource::TargetFidelity(self.target_fidelity.unwrap_or(DEFAULT_TARGET_FIDELITY))
        }
    }

    pub fn params(&self, v_coh: f64) -> TimeBinModelParams {
        TimeBinModelParams {
            phi_p: self.phi_p,
            epsilon: self.epsilon,
            v_coh,
            pairing_weight: self.pairing_weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    /// Counts for a unit-probability projector.
    pub n_mean: f64,
    /// Number of independent simulated datasets.
    pub seeds: usize,
    pub max_iterations: usize,
    pub mle_tol: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            n_mean: 1000.0,
            seeds: 20,
            max_iterations: MleOptions::default().max_iterations,
            mle_tol: MleOptions::default().tol,
        }
    }
}

impl TomographyConfig {
    pub fn mle_options(&self) -> MleOptions {
        MleOptions {
            max_iterations: self.max_iterations,
            tol: self.mle_tol,
            ..MleOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = &self.numerics;
        for (key, tol) in [("numerics.tol", n.tol), ("numerics.sweep_tol", n.sweep_tol)] {
            if !(tol > 0.0 && tol <= 1e-3) {
                return Err(invalid(key, format!("must lie in (0, 1e-3], got {tol}")));
            }
        }
        let d = &self.dot;
        non_negative("dot.gamma_x", d.gamma_x)?;
        non_negative("dot.gamma_b", d.gamma_b)?;
        for (key, v) in [("dot.delta_x", d.delta_x), ("dot.delta_b", d.delta_b)] {
            if !v.is_finite() {
                return Err(invalid(key, "must be finite"));
            }
        }

        positive("pulse.sigma", self.pulse.sigma)?;
        if let Some(a) = self.pulse.area {
            non_negative("pulse.area", a)?;
        }
        if let Some(w) = self.pulse.omega0 {
            non_negative("pulse.omega0", w)?;
        }
        self.pulse.drive(&self.dot)?;

        non_negative("dephasing.gamma_bg", self.dephasing.gamma_bg)?;
        if let Some(g) = self.dephasing.gamma_i0 {
            non_negative("dephasing.gamma_i0", g)?;
        }

        let r = &self.rabi;
        positive("rabi.sigma", r.sigma)?;
        positive("rabi.area_max", r.area_max)?;
        if r.points == 0 {
            return Err(invalid("rabi.points", "empty area grid"));
        }
        if r.models.is_empty() {
            return Err(invalid("rabi.models", "no dephasing models given"));
        }
        for (k, m) in r.models.iter().enumerate() {
            check_model(&format!("rabi.models[{k}]"), m)?;
        }

        let c = &self.calibration;
        positive("calibration.sigma", c.sigma)?;
        positive("calibration.area_max", c.area_max)?;
        if c.samples < 3 {
            return Err(invalid("calibration.samples", "need at least 3 samples"));
        }
        if let Some(t) = c.target_ratio {
            if !(t > 1.0 && t.is_finite()) {
                return Err(invalid(
                    "calibration.target_ratio",
                    format!("must be > 1, got {t}"),
                ));
            }
        }
        check_model("calibration.reference", &c.reference)?;
        if c.target_ratio.is_none() && c.reference.gamma_i0.is_none() {
            return Err(invalid(
                "calibration.reference.gamma_i0",
                "required when calibration.target_ratio is not set",
            ));
        }
        for &p in &c.fit_np {
            if p > 4 {
                return Err(invalid(
                    "calibration.fit_np",
                    format!("exponents must lie in 0..=4, got {p}"),
                ));
            }
        }

        let ra = &self.ratio;
        if ra.sigmas.is_empty() {
            return Err(invalid("ratio.sigmas", "no pulse lengths given"));
        }
        for &s in &ra.sigmas {
            positive("ratio.sigmas", s)?;
        }
        positive("ratio.energy_max", ra.energy_max)?;
        if ra.points < 3 {
            return Err(invalid("ratio.points", "need at least 3 points"));
        }

        let t = &self.timebin;
        if !t.phi_p.is_finite() {
            return Err(invalid("timebin.phi_p", "must be finite"));
        }
        if !(0.0..=1.0).contains(&t.epsilon) {
            return Err(invalid(
                "timebin.epsilon",
                format!("must lie in [0, 1], got {}", t.epsilon),
            ));
        }
        non_negative("timebin.pairing_weight", t.pairing_weight)?;
        let sources = usize::from(t.v_coh.is_some())
            + usize::from(t.v_coh_from_dynamics)
            + usize::from(t.target_fidelity.is_some());
        if sources > 1 {
            return Err(invalid(
                "timebin",
                "set at most one of `v_coh`, `v_coh_from_dynamics` and `target_fidelity`",
            ));
        }
        if let Some(v) = t.v_coh {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(
                    "timebin.v_coh",
                    format!("must lie in [0, 1], got {v}"),
                ));
            }
        }
        if let Some(f) = t.target_fidelity {
            if !(0.0..=1.0).contains(&f) {
                return Err(invalid(
                    "timebin.target_fidelity",
                    format!("must lie in [0, 1], got {f}"),
                ));
            }
        }

        let tm = &self.tomography;
        positive("tomography.n_mean", tm.n_mean)?;
        if tm.seeds == 0 {
            return Err(invalid("tomography.seeds", "need at least one dataset"));
        }
        if tm.max_iterations == 0 {
            return Err(invalid("tomography.max_iterations", "must be > 0"));
        }
        positive("tomography.mle_tol", tm.mle_tol)?;
        if self.output.dir.is_empty() {
            return Err(invalid("output.dir", "must not be empty"));
        }
        Ok(())
    }
}

fn check_model(key: &str, m: &ModelSpec) -> Result<(), ConfigError> {
    if m.n_p > 4 {
        return Err(invalid(
            &format!("{key}.n_p"),
            format!("must lie in 0..=4, got {}", m.n_p),
        ));
    }
    if let Some(g) = m.gamma_i0 {
        non_negative(&format!("{key}.gamma_i0"), g)?;
    }
    Ok(())
}
