use num_complex::Complex64;

use super::integrator::{integrate, IntegrationError, StepControl};
use super::model::{generator, Mat3};
use super::{DecayRates, DephasingModel, Drive, DynamicsError, PulseDrive, Trajectory};
use crate::linalg::ComplexMatrix;
use crate::state::{Level, QdDensityMatrix};

/// 9 complex entries as (re, im) pairs, then `∫ρ_xx` and `∫ρ_bb`.
const STATE_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Local error bound per step (relative and absolute).
    pub tol: f64,
    /// Times the integrator must land on exactly.
    pub checkpoints: Vec<f64>,
    pub max_steps: usize,
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            checkpoints: Vec::new(),
            max_steps: 5_000_000,
        }
    }
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self::with_tol(1e-9)
    }
}

fn pack(m: &ComplexMatrix, integrated: [f64; 2]) -> [f64; STATE_LEN] {
    let mut y = [0.0; STATE_LEN];
    for (k, z) in m.as_slice().iter().enumerate() {
        y[2 * k] = z.re;
        y[2 * k + 1] = z.im;
    }
    y[18] = integrated[0];
    y[19] = integrated[1];
    y
}

fn unpack_mat3(y: &[f64]) -> Mat3 {
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let k = 3 * i + j;
            m[i][j] = Complex64::new(y[2 * k], y[2 * k + 1]);
        }
    }
    m
}

fn unpack_matrix(y: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, |i, j| {
        let k = 3 * i + j;
        Complex64::new(y[2 * k], y[2 * k + 1])
    })
}

fn validate(t_span: (f64, f64), tol: f64) -> Result<(), DynamicsError> {
    if !(t_span.0.is_finite() && t_span.1.is_finite() && t_span.1 > t_span.0) {
        return Err(DynamicsError::InvalidParameter(format!(
            "time span must be increasing, got {t_span:?}"
        )));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(DynamicsError::InvalidParameter(format!(
            "tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    Ok(())
}

fn run<D, O>(
    rho0: &QdDensityMatrix,
    drive: &D,
    decay: &DecayRates,
    deph: &DephasingModel,
    t_span: (f64, f64),
    opts: &EvolveOptions,
    mut observer: O,
) -> Result<Vec<f64>, DynamicsError>
where
    D: Drive + ?Sized,
    O: FnMut(f64, &[f64]),
{
    validate(t_span, opts.tol)?;
    let (dx, db) = (drive.delta_x(), drive.delta_b());
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let rho = unpack_mat3(y);
        let omega = drive.rabi(t);
        let d = generator(&rho, omega, dx, db, decay, deph.rate(omega));
        for i in 0..3 {
            for j in 0..3 {
                let k = 3 * i + j;
                dy[2 * k] = d[i][j].re;
                dy[2 * k + 1] = d[i][j].im;
            }
        }
        dy[18] = rho[1][1].re;
        dy[19] = rho[2][2].re;
    };
    let limit = 100.0 * opts.tol;
    let check = |t: f64, y: &[f64]| -> Result<(), String> {
        let trace = y[0] + y[8] + y[16];
        let trace_im = y[1] + y[9] + y[17];
        let drift = Complex64::new(trace - 1.0, trace_im).norm();
        if drift > limit {
            return Err(format!("trace drift {drift:.3e} exceeds {limit:.1e}"));
        }
        let herm = unpack_matrix(y).hermiticity_violation();
        if herm > limit {
            return Err(format!("Hermiticity drift {herm:.3e} exceeds {limit:.1e}"));
        }
        observer(t, y);
        Ok(())
    };
    let control = StepControl {
        max_steps: opts.max_steps,
        ..StepControl::with_tol(opts.tol)
    };
    let y0 = pack(rho0.matrix(), [0.0, 0.0]);
    match integrate(
        rhs,
        t_span.0,
        t_span.1,
        &y0,
        &opts.checkpoints,
        &control,
        check,
    ) {
        Ok((y, _)) => Ok(y),
        Err(IntegrationError::Aborted { t, reason }) => {
            Err(DynamicsError::InvariantViolation { t, detail: reason })
        }
        Err(e) => Err(e.into()),
    }
}

/// Integrate the master equation over `t_span` with local error `tol`,
/// recording every accepted step. No trace renormalization is applied.
pub fn evolve<D: Drive + ?Sized>(
    rho0: &QdDensityMatrix,
    drive: &D,
    decay: &DecayRates,
    deph: &DephasingModel,
    t_span: (f64, f64),
    tol: f64,
) -> Result<Trajectory, DynamicsError> {
    evolve_with(
        rho0,
        drive,
        decay,
        deph,
        t_span,
        &EvolveOptions::with_tol(tol),
    )
}

pub fn evolve_with<D: Drive + ?Sized>(
    rho0: &QdDensityMatrix,
    drive: &D,
    decay: &DecayRates,
    deph: &DephasingModel,
    t_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    let mut traj = Trajectory::with_capacity(1024);
    run(rho0, drive, decay, deph, t_span, opts, |t, y| {
        traj.push(
            t,
            QdDensityMatrix::from_raw(unpack_matrix(y)),
            [y[18], y[19]],
        );
    })?;
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionProbabilities {
    pub p_x: f64,
    pub p_b: f64,
}

/// `P_i(t_f) = γ_i ∫ ⟨i|ρ|i⟩ dt` from the start of the trajectory to `t_f`.
pub fn emission_probabilities(
    traj: &Trajectory,
    decay: &DecayRates,
    t_f: f64,
) -> Result<EmissionProbabilities, DynamicsError> {
    let [ix, ib] = traj.integrated_at(t_f)?;
    Ok(EmissionProbabilities {
        p_x: decay.gamma_x * ix,
        p_b: decay.gamma_b * ib,
    })
}

/// Photon yield of a single pulse, integrated to `t_f → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEmission {
    pub p_x: f64,
    pub p_b: f64,
    /// End of the pulse window, `t₀ + 5σ`.
    pub pulse_end: f64,
    /// State at `pulse_end`.
    pub state: QdDensityMatrix,
}

/// Integrates only the pulse window `[t₀ − 5σ, t₀ + 5σ]` and adds the free
/// cascade decay afterwards in closed form.
///
/// After the pulse the populations obey rate equations that do not involve
/// the coherences, so every remaining biexciton emits one XX and one X
/// photon and every remaining exciton one X photon.
pub fn emission_after_pulse(
    rho0: &QdDensityMatrix,
    drive: &PulseDrive,
    decay: &DecayRates,
    deph: &DephasingModel,
    tol: f64,
) -> Result<PulseEmission, DynamicsError> {
    let window = drive.window();
    let y = run(
        rho0,
        drive,
        decay,
        deph,
        window,
        &EvolveOptions::with_tol(tol),
        |_, _| {},
    )?;
    let state = QdDensityMatrix::from_raw(unpack_matrix(&y));
    let x = state.population(Level::Exciton);
    let b = state.population(Level::Biexciton);
    let tail_b = if decay.gamma_b > 0.0 { b } else { 0.0 };
    let tail_x = if decay.gamma_x > 0.0 { x + tail_b } else { 0.0 };
    Ok(PulseEmission {
        p_x: decay.gamma_x * y[18] + tail_x,
        p_b: decay.gamma_b * y[19] + tail_b,
        pulse_end: window.1,
        state,
    })
}
