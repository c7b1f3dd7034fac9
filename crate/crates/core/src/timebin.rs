//! Time-bin entangled photon pairs: the ideal state, a two-channel noise
//! model and the usual two-qubit entanglement metrics.
//!
//! Qubit order is (XX, X); basis order `(|ee⟩, |el⟩, |le⟩, |ll⟩)`.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, Trajectory};
use crate::linalg::{
    eig_hermitian, psd_factor, singular_values, ComplexMatrix, LinalgError, I, ONE, ZERO,
};
use crate::state::{Level, QdDensityMatrix, StateError, TwoQubitState, EE, EL, LE, LL};

/// Accidental pairings offered by one double-excitation event.
pub const DEFAULT_PAIRING_WEIGHT: f64 = 4.0;

/// Positivity tolerance for metrics that need a physical state.
pub const PHYSICAL_TOL: f64 = 1e-8;

/// Eigenvalues at or below this are treated as exact zeros in [`concurrence`].
pub(crate) const RANK_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeBinError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coherence undefined: rho_gg = {rho_gg:.3e}, rho_bb = {rho_bb:.3e}")]
    UndefinedCoherence { rho_gg: f64, rho_bb: f64 },
    #[error("state is not physical (min eigenvalue {min_eigenvalue:.3e})")]
    NotPhysical { min_eigenvalue: f64 },
    #[error("density-matrix CSV line {line}: {detail}")]
    Csv { line: usize, detail: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBinModelParams {
    /// Pump interferometer phase (rad).
    pub phi_p: f64,
    /// Excitation probability per pulse.
    pub epsilon: f64,
    /// Contrast factor on the `ee`–`ll` coherence.
    pub v_coh: f64,
    pub pairing_weight: f64,
}

impl TimeBinModelParams {
    pub fn new(phi_p: f64, epsilon: f64, v_coh: f64) -> Result<Self, TimeBinError> {
        let p = Self {
            phi_p,
            epsilon,
            v_coh,
            pairing_weight: DEFAULT_PAIRING_WEIGHT,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TimeBinError> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !self.phi_p.is_finite() {
            return Err(TimeBinError::InvalidParameter(
                "phi_p must be finite".into(),
            ));
        }
        if !in_unit(self.epsilon) {
            return Err(TimeBinError::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if !in_unit(self.v_coh) {
            return Err(TimeBinError::InvalidParameter(format!(
                "v_coh must lie in [0, 1], got {}",
                self.v_coh
            )));
        }
        if !(self.pairing_weight >= 0.0 && self.pairing_weight.is_finite()) {
            return Err(TimeBinError::InvalidParameter(format!(
                "pairing weight must be >= 0, got {}",
                self.pairing_weight
            )));
        }
        Ok(())
    }

    pub fn accidental_fraction(&self) -> f64 {
        accidental_fraction(self.epsilon, self.pairing_weight)
    }
}

/// Share of post-selected coincidences coming from double excitation:
/// `q = wε² / (2ε(1−ε) + wε²)`.
pub fn accidental_fraction(epsilon: f64, weight: f64) -> f64 {
    let single = 2.0 * epsilon * (1.0 - epsilon);
    let double = weight * epsilon * epsilon;
    if single + double == 0.0 {
        0.0
    } else {
        double / (single + double)
    }
}

/// `(|ee⟩ + e^{iφ}|ll⟩)/√2` as a density matrix.
pub fn ideal_state(phi_p: f64) -> TwoQubitState {
    let mut psi = [ZERO; 4];
    psi[EE] = ONE;
    psi[LL] = Complex64::from_polar(1.0, phi_p);
    TwoQubitState::pure(psi)
}

/// `(1−q)·ρ_v + q·I/4`, with `ρ_v` the ideal state whose `ee`–`ll`
/// coherence is scaled by `v_coh`.
pub fn model_state(params: &TimeBinModelParams) -> Result<TwoQubitState, TimeBinError> {
    params.validate()?;
    let q = params.accidental_fraction();
    let mut m = ideal_state(params.phi_p).into_matrix();
    m[(EE, LL)] *= params.v_coh;
    m[(LL, EE)] *= params.v_coh;
    let m = m
        .scale_real(1.0 - q)
        .checked_add(&ComplexMatrix::identity(4).scale_real(q / 4.0))?;
    Ok(TwoQubitState::new(m)?)
}

/// Normalized `g`–`b` coherence `|ρ_gb| / sqrt(ρ_gg ρ_bb)` of a dot state,
/// clamped to `[0, 1]`.
pub fn coherence_of_state(rho: &QdDensityMatrix) -> Result<f64, TimeBinError> {
    let rho_gg = rho.population(Level::Ground);
    let rho_bb = rho.population(Level::Biexciton);
    if !(rho_gg > 1e-9 && rho_bb > 1e-9) {
        return Err(TimeBinError::UndefinedCoherence { rho_gg, rho_bb });
    }
    let v = rho.element(Level::Ground, Level::Biexciton).norm() / (rho_gg * rho_bb).sqrt();
    Ok(v.clamp(0.0, 1.0))
}

/// Coherence factor carried onto the biexciton by the pulse, read off the
/// trajectory at `pulse_end`.
pub fn excitation_coherence(traj: &Trajectory, pulse_end: f64) -> Result<f64, TimeBinError> {
    coherence_of_state(&traj.state_at(pulse_end)?)
}

/// Coherence factor that makes [`model_state`] reach Bell fidelity `f`.
pub fn v_coh_for_fidelity(f: f64, epsilon: f64, weight: f64) -> Result<f64, TimeBinError> {
    let q = accidental_fraction(epsilon, weight);
    let v = 2.0 * (f - q / 4.0) / (1.0 - q) - 1.0;
    if !(0.0..=1.0).contains(&v) {
        return Err(TimeBinError::InvalidParameter(format!(
            "fidelity {f} unreachable at epsilon = {epsilon} (needs v_coh = {v:.4})"
        )));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibilities {
    /// `P_ee + P_ll − P_el − P_le`.
    pub time: f64,
    /// Fringe visibility with the X analyser at phase 0.
    pub energy_0: f64,
    /// Fringe visibility with the X analyser at phase π/2.
    pub energy_90: f64,
}

/// Fringe visibility of `P(α) = ⟨S(α)⊗S(φ)|ρ|S(α)⊗S(φ)⟩` over α, where
/// `S(a) = (|e⟩ + e^{ia}|l⟩)/√2`.
///
/// `P(α) = c₀ + 2·Re(c₁e^{iα})`, so `(max − min)/(max + min) = 2|c₁|/c₀`.
pub fn energy_visibility(rho: &TwoQubitState, phi_x: f64) -> f64 {
    let x_amp = |bit: usize| {
        if bit == 0 {
            ONE
        } else {
            Complex64::from_polar(1.0, phi_x)
        }
    };
    let mut c0 = ZERO;
    let mut c1 = ZERO;
    for i in 0..4 {
        for j in 0..4 {
            // amplitude of S(α)⊗S(φ) on basis k is e^{iα·xx_k}·x_amp(x_k)/2
            let (xi, xj) = (i >> 1, j >> 1);
            let w = x_amp(i & 1).conj() * x_amp(j & 1) * rho.element(i, j) * 0.25;
            match xj as i32 - xi as i32 {
                0 => c0 += w,
                1 => c1 += w,
                _ => {}
            }
        }
    }
    if c0.re <= 0.0 {
        return 0.0;
    }
    (2.0 * c1.norm() / c0.re).min(1.0)
}

pub fn visibilities(rho: &TwoQubitState) -> Visibilities {
    let p = |k| rho.population(k);
    Visibilities {
        time: p(EE) + p(LL) - p(EL) - p(LE),
        energy_0: energy_visibility(rho, 0.0),
        energy_90: energy_visibility(rho, PI / 2.0),
    }
}

/// `σ_y ⊗ σ_y` in the `{e, l}` basis.
fn sigma_yy() -> ComplexMatrix {
    let sy = ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).expect("2x2");
    sy.kron(&sy)
}

/// Wootters concurrence. Rejects states with eigenvalues below
/// `−PHYSICAL_TOL`.
///
/// Uses the subnormalized eigen-ensemble `ρ = W W†`: the λᵢ are the singular
/// values of `Wᵀ (σ_y⊗σ_y) W`. Unlike square roots of the eigenvalues of
/// `ρρ̃`, this stays accurate to rounding for rank-deficient states.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64, TimeBinError> {
    let eig = eig_hermitian(rho.matrix())?;
    let min_eigenvalue = eig.min_value();
    if min_eigenvalue < -PHYSICAL_TOL {
        return Err(TimeBinError::NotPhysical { min_eigenvalue });
    }
    let w = psd_factor(rho.matrix(), RANK_TOL)?;
    let tau = &(&w.transpose() * &sigma_yy()) * &w;
    let lambda = singular_values(&tau)?;
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellFidelity {
    pub fidelity: f64,
    /// Phase of the best-matching `(|ee⟩ + e^{iφ}|ll⟩)/√2`, in (−π, π].
    pub phi_opt: f64,
}

/// `max_φ ⟨Φ(φ)|ρ|Φ(φ)⟩ = (ρ_ee,ee + ρ_ll,ll)/2 + |ρ_ee,ll|`.
pub fn fidelity_bell(rho: &TwoQubitState) -> BellFidelity {
    let c = rho.element(EE, LL);
    let fidelity = 0.5 * (rho.population(EE) + rho.population(LL)) + c.norm();
    let mut phi_opt = -c.arg();
    if phi_opt <= -PI {
        phi_opt += 2.0 * PI;
    }
    BellFidelity { fidelity, phi_opt }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceMetric {
    pub value: Complex64,
    pub row: usize,
    pub col: usize,
}

/// Upper-triangle element of largest modulus (first one on ties).
pub fn coherence_metric(rho: &TwoQubitState) -> CoherenceMetric {
    let mut best = CoherenceMetric {
        value: rho.element(0, 1),
        row: 0,
        col: 1,
    };
    for i in 0..4 {
        for j in i + 1..4 {
            let v = rho.element(i, j);
            if v.norm() > best.value.norm() {
                best = CoherenceMetric {
                    value: v,
                    row: i,
                    col: j,
                };
            }
        }
    }
    best
}

/// All four metrics of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMetrics {
    pub concurrence: f64,
    pub fidelity: BellFidelity,
    pub coherence: CoherenceMetric,
    pub visibilities: Visibilities,
}

pub fn metrics(rho: &TwoQubitState) -> Result<StateMetrics, TimeBinError> {
    Ok(StateMetrics {
        concurrence: concurrence(rho)?,
        fidelity: fidelity_bell(rho),
        coherence: coherence_metric(rho),
        visibilities: visibilities(rho),
    })
}

/// Writes a 4×4 matrix as four rows of real parts then four rows of
/// imaginary parts, after optional `# ` comment lines.
pub fn write_density_csv<W: Write>(
    mut out: W,
    m: &ComplexMatrix,
    header: &[String],
) -> io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let n = m.dim();
    let parts: [fn(Complex64) -> f64; 2] = [|z| z.re, |z| z.im];
    for part in parts {
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| part(m[(i, j)]).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

/// Inverse of [`write_density_csv`]; blank lines and `#` lines are skipped.
pub fn parse_density_csv(text: &str) -> Result<ComplexMatrix, TimeBinError> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| TimeBinError::Csv {
                line: k + 1,
                detail: e.to_string(),
            })?;
        if values.len() != 4 {
            return Err(TimeBinError::Csv {
                line: k + 1,
                detail: format!("expected 4 values, found {}", values.len()),
            });
        }
        rows.push((k + 1, values));
    }
    if rows.len() != 8 {
        return Err(TimeBinError::Csv {
            line: rows.last().map_or(0, |r| r.0),
            detail: format!("expected 8 data rows, found {}", rows.len()),
        });
    }
    Ok(ComplexMatrix::from_fn(4, |i, j| {
        Complex64::new(rows[i].1[j], rows[i + 4].1[j])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ideal_state_layout() {
        let r = ideal_state(0.0);
        for &(i, j) in &[(EE, EE), (EE, LL), (LL, EE), (LL, LL)] {
            assert!((r.element(i, j) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert_eq!(r.element(EL, EL), ZERO);
        let r = ideal_state(PI);
        assert!((r.element(EE, LL) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        let r = ideal_state(0.7);
        assert!((r.element(EE, LL) - Complex64::from_polar(0.5, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn ideal_metrics() {
        for phi in [0.0, 0.3, PI / 2.0, PI, -2.0] {
            let r = ideal_state(phi);
            assert!(close(concurrence(&r).unwrap(), 1.0, 1e-10));
            let f = fidelity_bell(&r);
            assert!(close(f.fidelity, 1.0, 1e-12));
            let expected = (phi + PI).rem_euclid(2.0 * PI) - PI;
            let d = (f.phi_opt - expected).rem_euclid(2.0 * PI);
            assert!(d < 1e-12 || 2.0 * PI - d < 1e-12, "{phi} {}", f.phi_opt);
            let v = visibilities(&r);
            assert!(close(v.time, 1.0, 1e-12));
            assert!(close(v.energy_0, 1.0, 1e-12) && close(v.energy_90, 1.0, 1e-12));
        }
    }

    #[test]
    fn maximally_mixed_metrics() {
        let r = TwoQubitState::maximally_mixed();
        let v = visibilities(&r);
        assert_eq!((v.time, v.energy_0, v.energy_90), (0.0, 0.0, 0.0));
        assert!(close(fidelity_bell(&r).fidelity, 0.25, 1e-15));
        assert_eq!(coherence_metric(&r).value, ZERO);
        assert!(close(concurrence(&r).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn coherence_metric_sign() {
        let c = coherence_metric(&ideal_state(0.0));
        assert_eq!((c.row, c.col), (EE, LL));
        assert!((c.value - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let c = coherence_metric(&ideal_state(PI));
        assert!((c.value - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn model_state_limits() {
        let p = TimeBinModelParams::new(0.4, 0.0, 1.0).unwrap();
        assert!(
            model_state(&p)
                .unwrap()
                .matrix()
                .max_abs_diff(ideal_state(0.4).matrix())
                < 1e-15
        );
        let p = TimeBinModelParams::new(0.0, 0.0, 0.0).unwrap();
        assert!(close(
            concurrence(&model_state(&p).unwrap()).unwrap(),
            0.0,
            1e-12
        ));
        assert!(TimeBinModelParams::new(0.0, 1.5, 1.0).is_err());
        assert!(TimeBinModelParams::new(0.0, 0.1, -0.1).is_err());
    }

    #[test]
    fn accidental_fraction_values() {
        assert_eq!(accidental_fraction(0.0, 4.0), 0.0);
        // 4·0.0036 / (2·0.06·0.94 + 4·0.0036)
        let q = accidental_fraction(0.06, 4.0);
        assert!(close(q, 0.0144 / (0.1128 + 0.0144), 1e-15));
        assert_eq!(accidental_fraction(1.0, 4.0), 1.0);
    }

    #[test]
    fn time_visibility_is_one_minus_q() {
        let p = TimeBinModelParams::new(0.0, 0.06, 0.911).unwrap();
        let v = visibilities(&model_state(&p).unwrap());
        assert!(close(v.time, 1.0 - p.accidental_fraction(), 1e-14));
        assert!(close(v.time, 0.887, 1e-3));
    }

    #[test]
    fn energy_visibility_matches_scan() {
        let p = TimeBinModelParams::new(1.1, 0.1, 0.8).unwrap();
        let r = model_state(&p).unwrap();
        for phi_x in [0.0, PI / 2.0] {
            let s = |a: f64| {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let xx = [Complex64::new(h, 0.0), Complex64::from_polar(h, a)];
                let x = [Complex64::new(h, 0.0), Complex64::from_polar(h, phi_x)];
                let psi: Vec<Complex64> = (0..4).map(|k| xx[k >> 1] * x[k & 1]).collect();
                r.overlap(&psi)
            };
            let probs: Vec<f64> = (0..20000)
                .map(|k| s(2.0 * PI * k as f64 / 20000.0))
                .collect();
            let max = probs.iter().cloned().fold(f64::MIN, f64::max);
            let min = probs.iter().cloned().fold(f64::MAX, f64::min);
            let scan = (max - min) / (max + min);
            assert!(close(energy_visibility(&r, phi_x), scan, 1e-6));
        }
    }

    #[test]
    fn fidelity_closed_form() {
        let p = TimeBinModelParams::new(0.0, 0.06, 0.911).unwrap();
        let q = p.accidental_fraction();
        let f = fidelity_bell(&model_state(&p).unwrap()).fidelity;
        assert!(close(f, (1.0 - q) * (1.0 + 0.911) / 2.0 + q / 4.0, 1e-14));
        assert!(close(f, 0.88, 0.005));
        let v = v_coh_for_fidelity(0.88, 0.06, 4.0).unwrap();
        let p = TimeBinModelParams::new(0.0, 0.06, v).unwrap();
        assert!(close(
            fidelity_bell(&model_state(&p).unwrap()).fidelity,
            0.88,
            1e-12
        ));
        assert!(v_coh_for_fidelity(0.99, 0.06, 4.0).is_err());
    }

    #[test]
    fn pure_state_concurrence_example() {
        let r = TwoQubitState::pure([
            Complex64::new(0.9f64.sqrt(), 0.0),
            ZERO,
            ZERO,
            Complex64::new(0.1f64.sqrt(), 0.0),
        ]);
        assert!(close(concurrence(&r).unwrap(), 0.6, 1e-10));
    }

    #[test]
    fn concurrence_rejects_unphysical() {
        let m = ComplexMatrix::from_real_diag(&[0.6, 0.5, -0.1, 0.0]);
        let r = TwoQubitState::new(m).unwrap();
        assert!(matches!(
            concurrence(&r),
            Err(TimeBinError::NotPhysical { .. })
        ));
    }

    #[test]
    fn dot_state_coherence() {
        let pure = [
            Complex64::new(0.8, 0.0),
            ZERO,
            Complex64::from_polar(0.6, 1.0),
        ];
        let rho = QdDensityMatrix::new(ComplexMatrix::projector(&pure)).unwrap();
        assert!(close(coherence_of_state(&rho).unwrap(), 1.0, 1e-12));
        let mixed =
            QdDensityMatrix::new(ComplexMatrix::from_real_diag(&[0.64, 0.0, 0.36])).unwrap();
        assert_eq!(coherence_of_state(&mixed).unwrap(), 0.0);
        assert!(matches!(
            coherence_of_state(&QdDensityMatrix::ground()),
            Err(TimeBinError::UndefinedCoherence { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let p = TimeBinModelParams::new(2.3, 0.07, 0.9).unwrap();
        let m = model_state(&p).unwrap().into_matrix();
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &m, &["model".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# model\n"));
        let back = parse_density_csv(&text).unwrap();
        assert_eq!(back, m);
        assert!(parse_density_csv("1,2,3,4\n").is_err());
        assert!(matches!(
            parse_density_csv("1,2,x,4\n"),
            Err(TimeBinError::Csv { line: 1, .. })
        ));
    }
}
