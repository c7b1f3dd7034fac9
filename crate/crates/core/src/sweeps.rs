//! Pulse-area and pulse-energy sweeps, Rabi contrast fitting and the
//! biexciton to direct-exciton ratio.
//!
//! Every point starts from `|g⟩⟨g|`, integrates one Gaussian pulse and
//! counts photons to `t_f → ∞` (see [`emission_after_pulse`]). Points are
//! evaluated in parallel and assembled in input order.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    emission_after_pulse, gaussian_area_factor, DecayRates, DephasingModel, DynamicsError,
    PulseDrive, PulseEmission,
};
use crate::state::QdDensityMatrix;

/// Lower bound on the direct-exciton yield `P_x − P_b` in the ratio.
pub const RATIO_FLOOR: f64 = 1e-6;

/// Largest `γ_I0` the fit will try before giving up.
pub const GAMMA_BRACKET_MAX: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("no interior Rabi maximum/minimum pair in (0, {max_area}]: {detail}")]
    NoExtrema { max_area: f64, detail: String },
    #[error("target ratio {target} unreachable for gamma_i0 in [0, {bracket}] (ratio spans {low:.4}..{high:.4})")]
    TargetUnreachable {
        target: f64,
        bracket: f64,
        low: f64,
        high: f64,
    },
}

/// Dot-specific constants shared by all points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DotParams {
    pub decay: DecayRates,
    /// Virtual level to exciton detuning (ps⁻¹).
    pub delta_x: f64,
    /// Two-photon detuning (ps⁻¹).
    pub delta_b: f64,
}

impl Default for DotParams {
    fn default() -> Self {
        Self {
            decay: DecayRates::default(),
            delta_x: 2.0,
            delta_b: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    /// Pulse area θ.
    Area,
    /// `Ω₀²σ` in ps⁻¹.
    Energy,
}

/// Per-point diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointFlags {
    /// `P_x − P_b` fell below [`RATIO_FLOOR`].
    pub saturated: bool,
    /// A probability exceeded 1 (re-excitation within the pulse).
    pub above_unity: bool,
    pub failure: Option<String>,
}

impl PointFlags {
    pub fn is_ok(&self) -> bool {
        !self.saturated && !self.above_unity && self.failure.is_none()
    }

    fn label(&self) -> String {
        if let Some(f) = &self.failure {
            return format!("failed: {}", f.replace(',', ";"));
        }
        let mut parts = Vec::new();
        if self.saturated {
            parts.push("saturated");
        }
        if self.above_unity {
            parts.push("above_unity");
        }
        if parts.is_empty() {
            "ok".to_string()
        } else {
            parts.join("|")
        }
    }
}

/// Location and value of the largest interior ratio of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPeak {
    pub index: usize,
    pub abscissa: f64,
    pub ratio: f64,
}

/// One curve: columns share the index of `abscissa`. Failed points carry
/// `NaN` probabilities and a failure message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: Abscissa,
    pub sigma: f64,
    pub dephasing: DephasingModel,
    pub dot: DotParams,
    pub abscissa: Vec<f64>,
    pub omega0: Vec<f64>,
    pub p_b: Vec<f64>,
    pub p_x: Vec<f64>,
    /// `P_b / max(P_x − P_b, RATIO_FLOOR)`.
    pub ratio: Vec<f64>,
    pub flags: Vec<PointFlags>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.flags.iter().filter(|f| f.failure.is_some()).count()
    }

    /// Pulse area of point `k` regardless of the sweep axis.
    pub fn theta(&self, k: usize) -> f64 {
        match self.kind {
            Abscissa::Area => self.abscissa[k],
            Abscissa::Energy => self.omega0[k] * self.sigma * gaussian_area_factor(),
        }
    }

    /// `Ω₀²σ` of point `k` regardless of the sweep axis.
    pub fn energy(&self, k: usize) -> f64 {
        self.omega0[k] * self.omega0[k] * self.sigma
    }

    /// The largest ratio among unsaturated, successful points, provided it
    /// is not at either end of the scan.
    pub fn interior_maximum(&self) -> Option<RatioPeak> {
        let mut best: Option<usize> = None;
        for k in 0..self.len() {
            let f = &self.flags[k];
            if f.saturated || f.failure.is_some() {
                continue;
            }
            if best.is_none_or(|b| self.ratio[k] > self.ratio[b]) {
                best = Some(k);
            }
        }
        let k = best?;
        let valid: Vec<usize> = (0..self.len())
            .filter(|&i| !self.flags[i].saturated && self.flags[i].failure.is_none())
            .collect();
        if valid.len() < 3 || k == valid[0] || k == *valid.last().unwrap() {
            return None;
        }
        Some(RatioPeak {
            index: k,
            abscissa: self.abscissa[k],
            ratio: self.ratio[k],
        })
    }

    /// Number of strict local maxima of the ratio over the valid points.
    pub fn ratio_local_maxima(&self) -> usize {
        let r: Vec<f64> = (0..self.len())
            .filter(|&i| !self.flags[i].saturated && self.flags[i].failure.is_none())
            .map(|i| self.ratio[i])
            .collect();
        count_local_maxima(&r)
    }

    /// CSV with a `# {json}` header line holding the model parameters.
    pub fn write_csv<W: Write>(&self, mut out: W, extra_header: &[String]) -> io::Result<()> {
        for line in extra_header {
            writeln!(out, "# {line}")?;
        }
        let meta = serde_json::json!({
            "abscissa": self.kind,
            "sigma_ps": self.sigma,
            "dephasing": self.dephasing,
            "dot": self.dot,
            "ratio_floor": RATIO_FLOOR,
        });
        writeln!(out, "# {meta}")?;
        writeln!(out, "theta,energy,omega0,p_b,p_x,ratio,status")?;
        for k in 0..self.len() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.theta(k),
                self.energy(k),
                self.omega0[k],
                self.p_b[k],
                self.p_x[k],
                self.ratio[k],
                self.flags[k].label()
            )?;
        }
        Ok(())
    }
}

fn count_local_maxima(v: &[f64]) -> usize {
    // plateaus count once
    let mut count = 0;
    let mut rising = false;
    for w in v.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if w[1] < w[0] {
            if rising {
                count += 1;
            }
            rising = false;
        }
    }
    count
}

/// `P_b / max(P_x − P_b, floor)` and whether the floor was hit.
pub fn exciton_ratio(p_b: f64, p_x: f64) -> (f64, bool) {
    let direct = p_x - p_b;
    if direct <= RATIO_FLOOR {
        (p_b / RATIO_FLOOR, true)
    } else {
        (p_b / direct, false)
    }
}

fn single_pulse(
    omega0: f64,
    sigma: f64,
    deph: &DephasingModel,
    dot: &DotParams,
    tol: f64,
) -> Result<PulseEmission, DynamicsError> {
    let drive = PulseDrive::new(omega0, sigma, 0.0, dot.delta_x, dot.delta_b)?;
    emission_after_pulse(&QdDensityMatrix::ground(), &drive, &dot.decay, deph, tol)
}

fn validate_axis(values: &[f64], name: &str) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(SweepError::InvalidInput(format!("{name} grid is empty")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(SweepError::InvalidInput(format!(
            "{name} values must be finite and non-negative"
        )));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::InvalidInput(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

fn sweep(
    kind: Abscissa,
    sigma: f64,
    deph: &DephasingModel,
    dot: &DotParams,
    values: &[f64],
    tol: f64,
) -> Result<SweepResult, SweepError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SweepError::InvalidInput(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    validate_axis(values, "abscissa")?;
    let omega0: Vec<f64> = values
        .iter()
        .map(|&v| match kind {
            Abscissa::Area => v / (sigma * gaussian_area_factor()),
            Abscissa::Energy => (v / sigma).sqrt(),
        })
        .collect();
    let runs: Vec<Result<PulseEmission, DynamicsError>> = omega0
        .par_iter()
        .map(|&w| single_pulse(w, sigma, deph, dot, tol))
        .collect();

    let n = values.len();
    let mut res = SweepResult {
        kind,
        sigma,
        dephasing: *deph,
        dot: *dot,
        abscissa: values.to_vec(),
        omega0,
        p_b: Vec::with_capacity(n),
        p_x: Vec::with_capacity(n),
        ratio: Vec::with_capacity(n),
        flags: Vec::with_capacity(n),
    };
    for run in runs {
        match run {
            Ok(e) => {
                let (ratio, saturated) = exciton_ratio(e.p_b, e.p_x);
                res.p_b.push(e.p_b);
                res.p_x.push(e.p_x);
                res.ratio.push(ratio);
                res.flags.push(PointFlags {
                    saturated,
                    above_unity: e.p_b > 1.0 + 1e-9 || e.p_x > 1.0 + 1e-9,
                    failure: None,
                });
            }
            Err(err) => {
                res.p_b.push(f64::NAN);
                res.p_x.push(f64::NAN);
                res.ratio.push(f64::NAN);
                res.flags.push(PointFlags {
                    failure: Some(err.to_string()),
                    ..PointFlags::default()
                });
            }
        }
    }
    Ok(res)
}

/// Photon yields versus pulse area θ at fixed `sigma`.
pub fn rabi_sweep(
    sigma: f64,
    deph: &DephasingModel,
    dot: &DotParams,
    areas: &[f64],
    tol: f64,
) -> Result<SweepResult, SweepError> {
    sweep(Abscissa::Area, sigma, deph, dot, areas, tol)
}

/// Photon yields versus `Ω₀²σ` at fixed `sigma`.
pub fn energy_sweep(
    sigma: f64,
    deph: &DephasingModel,
    dot: &DotParams,
    energies: &[f64],
    tol: f64,
) -> Result<SweepResult, SweepError> {
    sweep(Abscissa::Energy, sigma, deph, dot, energies, tol)
}

/// One energy sweep per pulse length, in the order of `sigmas`.
pub fn ratio_sweep(
    sigmas: &[f64],
    energies: &[f64],
    deph: &DephasingModel,
    dot: &DotParams,
    tol: f64,
) -> Result<Vec<SweepResult>, SweepError> {
    if sigmas.is_empty() {
        return Err(SweepError::InvalidInput("no pulse lengths given".into()));
    }
    sigmas
        .iter()
        .map(|&s| energy_sweep(s, deph, dot, energies, tol))
        .collect()
}

/// Sampling of the area axis used to find the first Rabi extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiScan {
    pub max_area: f64,
    pub samples: usize,
    /// Integration tolerance per pulse.
    pub tol: f64,
}

impl Default for RabiScan {
    fn default() -> Self {
        Self {
            max_area: 40.0,
            samples: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiExtrema {
    pub max_area: f64,
    pub max_p_b: f64,
    pub min_area: f64,
    pub min_p_b: f64,
}

impl RabiExtrema {
    /// First maximum over first minimum of `P_b`.
    pub fn contrast(&self) -> f64 {
        if self.min_p_b <= 0.0 {
            f64::INFINITY
        } else {
            self.max_p_b / self.min_p_b
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of `f` on `[a, b]`.
fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<(f64, f64), SweepError>
where
    F: FnMut(f64) -> Result<f64, SweepError>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Locates the first maximum of `P_b(θ)` and the first minimum after it.
///
/// The curve is sampled on `scan.samples` equally spaced areas in
/// `(0, scan.max_area]`; each extremum is then refined by golden-section
/// search between its neighbouring samples.
pub fn first_extrema(
    sigma: f64,
    deph: &DephasingModel,
    dot: &DotParams,
    scan: &RabiScan,
) -> Result<RabiExtrema, SweepError> {
    if scan.samples < 3 || !(scan.max_area > 0.0) {
        return Err(SweepError::InvalidInput(
            "extremum scan needs max_area > 0 and at least 3 samples".into(),
        ));
    }
    let step = scan.max_area / scan.samples as f64;
    let areas: Vec<f64> = (1..=scan.samples).map(|k| k as f64 * step).collect();
    let curve = rabi_sweep(sigma, deph, dot, &areas, scan.tol)?;
    if let Some(k) = curve.flags.iter().position(|f| f.failure.is_some()) {
        return Err(SweepError::Dynamics(DynamicsError::InvalidParameter(
            format!(
                "integration failed at area {}: {}",
                areas[k],
                curve.flags[k].failure.as_deref().unwrap_or("")
            ),
        )));
    }
    let p = &curve.p_b;
    let no_extrema = |detail: &str| SweepError::NoExtrema {
        max_area: scan.max_area,
        detail: detail.to_string(),
    };
    let imax = (1..p.len() - 1)
        .find(|&k| p[k] > p[k - 1] && p[k] >= p[k + 1])
        .ok_or_else(|| no_extrema("P_b has no local maximum (overdamped)"))?;
    let imin = (imax + 1..p.len() - 1)
        .find(|&k| p[k] < p[k - 1] && p[k] <= p[k + 1])
        .ok_or_else(|| no_extrema("P_b has no minimum after the first maximum"))?;

    let p_b_at = |theta: f64| -> Result<f64, SweepError> {
        let omega0 = theta / (sigma * gaussian_area_factor());
        Ok(single_pulse(omega0, sigma, deph, dot, scan.tol)?.p_b)
    };
    let xtol = 1e-4 * step.max(1e-3);
    let (max_area, max_p_b) = golden_max(p_b_at, areas[imax - 1], areas[imax + 1], xtol)?;
    let (min_area, neg_min) = golden_max(
        |t| p_b_at(t).map(|v| -v),
        areas[imin - 1],
        areas[imin + 1],
        xtol,
    )?;
    Ok(RabiExtrema {
        max_area,
        max_p_b: max_p_b.max(p[imax]),
        min_area,
        min_p_b: (-neg_min).min(p[imin]),
    })
}

/// Fitting setup for [`fit_gamma_i0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSetup {
    pub sigma: f64,
    pub gamma_bg: f64,
    pub dot: DotParams,
    pub scan: RabiScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub gamma_i0: f64,
    pub n_p: u32,
    pub target: f64,
    /// Contrast of the curve at the fitted `gamma_i0`.
    pub achieved: f64,
    pub extrema: RabiExtrema,
    /// Number of contrast evaluations (each one is a full extremum scan).
    pub evaluations: usize,
}

/// Contrast for a given `γ_I0`. An overdamped curve counts as contrast 1.
fn contrast_at(
    n_p: u32,
    gamma_i0: f64,
    setup: &FitSetup,
) -> Result<Option<RabiExtrema>, SweepError> {
    let deph = DephasingModel::new(setup.gamma_bg, gamma_i0, n_p)?;
    match first_extrema(setup.sigma, &deph, &setup.dot, &setup.scan) {
        Ok(e) => Ok(Some(e)),
        Err(SweepError::NoExtrema { .. }) if gamma_i0 > 0.0 => Ok(None),
        Err(e) => Err(e),
    }
}

fn contrast_of(e: &Option<RabiExtrema>) -> f64 {
    e.map_or(1.0, |e| e.contrast())
}

/// Finds `γ_I0` such that the first-max/first-min contrast of the Rabi
/// curve equals `target` (within 1 %), by bracketing and bisection.
pub fn fit_gamma_i0(n_p: u32, target: f64, setup: &FitSetup) -> Result<GammaFit, SweepError> {
    if n_p > 4 {
        return Err(SweepError::InvalidInput(format!(
            "n_p must lie in 0..=4, got {n_p}"
        )));
    }
    if !(target > 1.0 && target.is_finite()) {
        return Err(SweepError::InvalidInput(format!(
            "target ratio must be finite and > 1, got {target}"
        )));
    }
    let mut evaluations = 0;
    let mut eval = |g: f64| {
        evaluations += 1;
        contrast_at(n_p, g, setup)
    };

    let undamped = eval(0.0)?;
    let high = contrast_of(&undamped);
    if high <= target {
        return Err(SweepError::TargetUnreachable {
            target,
            bracket: GAMMA_BRACKET_MAX,
            low: f64::NAN,
            high,
        });
    }
    let (mut lo, mut lo_e) = (0.0, undamped);
    let mut hi = 1e-3;
    let mut hi_e = eval(hi)?;
    while contrast_of(&hi_e) > target {
        lo = hi;
        lo_e = hi_e;
        hi *= 2.0;
        if hi > GAMMA_BRACKET_MAX {
            return Err(SweepError::TargetUnreachable {
                target,
                bracket: GAMMA_BRACKET_MAX,
                low: contrast_of(&lo_e),
                high,
            });
        }
        hi_e = eval(hi)?;
    }

    // contrast decreases with gamma: keep contrast(lo) > target >= contrast(hi)
    for _ in 0..200 {
        let r_lo = contrast_of(&lo_e);
        let r_hi = contrast_of(&hi_e);
        if (r_lo / target - 1.0).abs() < 1e-4
            || (r_hi / target - 1.0).abs() < 1e-4
            || hi - lo <= 1e-9 * hi
        {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mid_e = eval(mid)?;
        if contrast_of(&mid_e) > target {
            lo = mid;
            lo_e = mid_e;
        } else {
            hi = mid;
            hi_e = mid_e;
        }
    }
    let (g, e) =
        if (contrast_of(&lo_e) / target - 1.0).abs() <= (contrast_of(&hi_e) / target - 1.0).abs() {
            (lo, lo_e)
        } else {
            (hi, hi_e)
        };
    let extrema = e.ok_or_else(|| SweepError::NoExtrema {
        max_area: setup.scan.max_area,
        detail: format!("curve overdamped at the fitted gamma_i0 = {g}"),
    })?;
    let achieved = extrema.contrast();
    if (achieved / target - 1.0).abs() > 0.01 {
        return Err(SweepError::TargetUnreachable {
            target,
            bracket: GAMMA_BRACKET_MAX,
            low: achieved,
            high,
        });
    }
    Ok(GammaFit {
        gamma_i0: g,
        n_p,
        target,
        achieved,
        extrema,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_dot() -> DotParams {
        DotParams::default()
    }

    #[test]
    fn zero_area_gives_no_photons() {
        let r = rabi_sweep(
            8.0,
            &DephasingModel::constant(0.02),
            &fast_dot(),
            &[0.0],
            1e-8,
        )
        .unwrap();
        assert_eq!(r.p_b, vec![0.0]);
        assert_eq!(r.p_x, vec![0.0]);
        assert!(r.flags[0].saturated);
    }

    #[test]
    fn rejects_bad_grids() {
        let d = DephasingModel::none();
        assert!(rabi_sweep(8.0, &d, &fast_dot(), &[], 1e-8).is_err());
        assert!(rabi_sweep(8.0, &d, &fast_dot(), &[2.0, 1.0], 1e-8).is_err());
        assert!(rabi_sweep(8.0, &d, &fast_dot(), &[1.0, 1.0], 1e-8).is_err());
        assert!(rabi_sweep(-1.0, &d, &fast_dot(), &[1.0], 1e-8).is_err());
        assert!(ratio_sweep(&[], &[1.0], &d, &fast_dot(), 1e-8).is_err());
    }

    #[test]
    fn failed_points_are_marked() {
        // tol outside (0, 1e-3] fails every point but the sweep still returns
        let r = rabi_sweep(8.0, &DephasingModel::none(), &fast_dot(), &[1.0, 2.0], 0.5).unwrap();
        assert_eq!(r.failures(), 2);
        assert!(r.p_b[0].is_nan());
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &[]).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("failed: "));
    }

    #[test]
    fn ratio_floor_flag() {
        assert_eq!(exciton_ratio(0.5, 0.5), (0.5 / RATIO_FLOOR, true));
        let (r, sat) = exciton_ratio(0.4, 0.5);
        assert!((r - 4.0).abs() < 1e-12 && !sat);
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 3.0, 1.0, 3.0, 1.0]), 2);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0]), 0);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, y) = golden_max(|x| Ok(-(x - 1.3f64).powi(2) + 2.0), 0.0, 4.0, 1e-8).unwrap();
        assert!((x - 1.3).abs() < 1e-7 && (y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_extrema() {
        let e = first_extrema(
            8.0,
            &DephasingModel::none(),
            &fast_dot(),
            &RabiScan::default(),
        )
        .unwrap();
        assert!(e.max_p_b > 0.95, "{e:?}");
        assert!(e.min_p_b < 0.05, "{e:?}");
        assert!(e.min_area > e.max_area);
    }

    #[test]
    fn overdamped_curve_is_reported() {
        let deph = DephasingModel::constant(2.0);
        let err = first_extrema(8.0, &deph, &fast_dot(), &RabiScan::default()).unwrap_err();
        assert!(matches!(err, SweepError::NoExtrema { .. }), "{err}");
    }

    #[test]
    fn unreachable_targets() {
        let setup = FitSetup {
            sigma: 8.0,
            gamma_bg: 0.02,
            dot: fast_dot(),
            scan: RabiScan::default(),
        };
        assert!(matches!(
            fit_gamma_i0(2, 1e6, &setup),
            Err(SweepError::TargetUnreachable { .. })
        ));
        assert!(fit_gamma_i0(5, 2.0, &setup).is_err());
        assert!(fit_gamma_i0(2, 0.5, &setup).is_err());
    }

    #[test]
    fn csv_header_is_json() {
        let r = energy_sweep(
            4.0,
            &DephasingModel::constant(0.02),
            &fast_dot(),
            &[1.0, 2.0],
            1e-8,
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &["run".to_string()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# run");
        let meta: serde_json::Value = serde_json::from_str(&lines[1][2..]).unwrap();
        assert_eq!(meta["sigma_ps"], 4.0);
        assert_eq!(meta["abscissa"], "energy");
        assert_eq!(lines[2], "theta,energy,omega0,p_b,p_x,ratio,status");
        assert_eq!(lines.len(), 5);
    }
}
