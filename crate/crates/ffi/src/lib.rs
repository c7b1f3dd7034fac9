//! C ABI over `qdcascade`.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`QdcStatus`]; results go through
//!   out-pointers that are written only on success.
//! - Objects are opaque handles created by `qdc_*_new`/`qdc_*` constructors
//!   and released with the matching `qdc_*_free`. Freeing `NULL` is a no-op.
//! - On failure a message is kept per thread; read it with
//!   [`qdc_last_error_message`].
//! - Panics never cross the boundary; they are reported as
//!   [`QdcStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdcascade::dynamics::{
    emission_after_pulse, emission_probabilities, evolve, DecayRates, DephasingModel, PulseDrive,
    Trajectory,
};
use qdcascade::linalg::ComplexMatrix;
use qdcascade::num_complex::Complex64;
use qdcascade::state::{QdDensityMatrix, TwoQubitState};
use qdcascade::sweeps::{fit_gamma_i0, DotParams, FitSetup, RabiScan};
use qdcascade::timebin::{metrics, model_state, TimeBinModelParams};
use qdcascade::tomography::{
    reconstruct_linear, reconstruct_mle, simulate_counts, standard_settings, state_fidelity,
    MleOptions, TomographyDataset,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Radiative rates and detunings, ps⁻¹.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdcDot {
    pub gamma_x: f64,
    pub gamma_b: f64,
    pub delta_x: f64,
    pub delta_b: f64,
}

/// `γ(t) = gamma_bg + gamma_i0·Ω(t)^n_p`
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdcDephasing {
    pub gamma_bg: f64,
    pub gamma_i0: f64,
    pub n_p: u32,
}

/// Gaussian pulse `Ω₀·exp(−ln2·(t−t₀)²/σ²)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdcPulse {
    pub omega0: f64,
    pub sigma: f64,
    pub t0: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QdcEmission {
    pub p_x: f64,
    pub p_b: f64,
}

/// Entanglement metrics of a two-photon state. Basis indices run
/// `ee, el, le, ll`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QdcMetrics {
    pub concurrence: f64,
    pub fidelity: f64,
    pub phi_opt: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
    pub coherence_row: u32,
    pub coherence_col: u32,
    pub visibility_time: f64,
    pub visibility_energy_0: f64,
    pub visibility_energy_90: f64,
}

/// Recorded evolution of the dot.
pub struct QdcTrajectory {
    traj: Trajectory,
    decay: DecayRates,
}

/// Two-photon density matrix.
pub struct QdcState(TwoQubitState);

/// Counts for the 16 standard tomography settings.
pub struct QdcDataset(TomographyDataset);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(QdcStatus, String);

fn invalid(e: impl ToString) -> Failure {
    Failure(QdcStatus::InvalidArgument, e.to_string())
}

fn numerical(e: impl ToString) -> Failure {
    Failure(QdcStatus::Numerical, e.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QdcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            QdcStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(QdcStatus::NullPointer, format!("`{name}` is NULL")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(QdcStatus::NullPointer, format!("`{name}` is NULL")))
    } else {
        Ok(())
    }
}

fn decay_of(dot: &QdcDot) -> Result<DecayRates, Failure> {
    DecayRates::new(dot.gamma_b, dot.gamma_x).map_err(invalid)
}

fn drive_of(pulse: &QdcPulse, dot: &QdcDot) -> Result<PulseDrive, Failure> {
    PulseDrive::new(
        pulse.omega0,
        pulse.sigma,
        pulse.t0,
        dot.delta_x,
        dot.delta_b,
    )
    .map_err(invalid)
}

fn dephasing_of(d: &QdcDephasing) -> Result<DephasingModel, Failure> {
    DephasingModel::new(d.gamma_bg, d.gamma_i0, d.n_p).map_err(invalid)
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed for the last error message including the terminating NUL;
/// 0 when no error has been recorded on this thread.
#[no_mangle]
pub extern "C" fn qdc_last_error_length() -> usize {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(0, |m| m.as_bytes_with_nul().len())
    })
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qdc_last_error_message(buf: *mut c_char, len: usize) -> QdcStatus {
    if buf.is_null() {
        return QdcStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes: &[u8] = e.as_ref().map_or(b"\0", |m| m.as_bytes_with_nul());
        if bytes.len() > len {
            return QdcStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        QdcStatus::Ok
    })
}

/// Evolves the dot from `|g⟩` through one pulse and the following decay
/// (ten exciton lifetimes).
///
/// # Safety
/// Input pointers must be valid; `out` receives a handle to free with
/// [`qdc_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn qdc_evolve(
    dot: *const QdcDot,
    pulse: *const QdcPulse,
    dephasing: *const QdcDephasing,
    tol: f64,
    out: *mut *mut QdcTrajectory,
) -> QdcStatus {
    guard(|| {
        let dot = get(dot, "dot")?;
        let pulse = get(pulse, "pulse")?;
        let dephasing = get(dephasing, "dephasing")?;
        check_out(out, "out")?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("tol must lie in (0, 1), got {tol}")));
        }
        let decay = decay_of(dot)?;
        let drive = drive_of(pulse, dot)?;
        let deph = dephasing_of(dephasing)?;
        let span = drive.default_span(&decay);
        let traj = evolve(&QdDensityMatrix::ground(), &drive, &decay, &deph, span, tol)
            .map_err(numerical)?;
        *out = boxed(QdcTrajectory { traj, decay });
        Ok(())
    })
}

/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn qdc_trajectory_len(traj: *const QdcTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.traj.len())
}

/// Time and `(ρ_gg, ρ_xx, ρ_bb)` of stored point `index`.
///
/// # Safety
/// `traj` must be a live handle, `t` a writable double and `populations`
/// three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qdc_trajectory_point(
    traj: *const QdcTrajectory,
    index: usize,
    t: *mut f64,
    populations: *mut f64,
) -> QdcStatus {
    guard(|| {
        let traj = &get(traj, "traj")?.traj;
        check_out(t, "t")?;
        check_out(populations, "populations")?;
        if index >= traj.len() {
            return Err(invalid(format!(
                "index {index} out of range (len {})",
                traj.len()
            )));
        }
        *t = traj.times()[index];
        ptr::copy_nonoverlapping(traj.populations()[index].as_ptr(), populations, 3);
        Ok(())
    })
}

/// Emission probabilities accumulated up to `t_f`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_trajectory_emission(
    traj: *const QdcTrajectory,
    t_f: f64,
    out: *mut QdcEmission,
) -> QdcStatus {
    guard(|| {
        let traj = get(traj, "traj")?;
        check_out(out, "out")?;
        let p = emission_probabilities(&traj.traj, &traj.decay, t_f).map_err(invalid)?;
        *out = QdcEmission {
            p_x: p.p_x,
            p_b: p.p_b,
        };
        Ok(())
    })
}

/// # Safety
/// `traj` must be a handle from [`qdc_evolve`] not freed before, or NULL.
#[no_mangle]
pub unsafe extern "C" fn qdc_trajectory_free(traj: *mut QdcTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Photon yields of one pulse from `|g⟩`, integrated to infinite time.
///
/// # Safety
/// Input pointers must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_emission_after_pulse(
    dot: *const QdcDot,
    pulse: *const QdcPulse,
    dephasing: *const QdcDephasing,
    tol: f64,
    out: *mut QdcEmission,
) -> QdcStatus {
    guard(|| {
        let dot = get(dot, "dot")?;
        let pulse = get(pulse, "pulse")?;
        let dephasing = get(dephasing, "dephasing")?;
        check_out(out, "out")?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid(format!("tol must lie in (0, 1), got {tol}")));
        }
        let e = emission_after_pulse(
            &QdDensityMatrix::ground(),
            &drive_of(pulse, dot)?,
            &decay_of(dot)?,
            &dephasing_of(dephasing)?,
            tol,
        )
        .map_err(numerical)?;
        *out = QdcEmission {
            p_x: e.p_x,
            p_b: e.p_b,
        };
        Ok(())
    })
}

/// `γ_I0` that gives the first-max/first-min Rabi contrast `target` at pulse
/// length `sigma`, scanning areas up to 40.
///
/// # Safety
/// `dot` must be valid and `gamma_i0` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_fit_gamma_i0(
    dot: *const QdcDot,
    sigma: f64,
    gamma_bg: f64,
    n_p: u32,
    target: f64,
    gamma_i0: *mut f64,
) -> QdcStatus {
    guard(|| {
        let dot = get(dot, "dot")?;
        check_out(gamma_i0, "gamma_i0")?;
        let setup = FitSetup {
            sigma,
            gamma_bg,
            dot: DotParams {
                decay: decay_of(dot)?,
                delta_x: dot.delta_x,
                delta_b: dot.delta_b,
            },
            scan: RabiScan::default(),
        };
        let fit = fit_gamma_i0(n_p, target, &setup).map_err(|e| match e {
            qdcascade::sweeps::SweepError::InvalidInput(_) => invalid(e),
            _ => numerical(e),
        })?;
        *gamma_i0 = fit.gamma_i0;
        Ok(())
    })
}

/// State from row-major real and imaginary parts (16 doubles each). Must
/// be Hermitian with unit trace; positivity is not required.
///
/// # Safety
/// `re` and `im` must point to 16 doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_from_matrix(
    re: *const f64,
    im: *const f64,
    out: *mut *mut QdcState,
) -> QdcStatus {
    guard(|| {
        get(re, "re")?;
        get(im, "im")?;
        check_out(out, "out")?;
        let (re, im) = (
            std::slice::from_raw_parts(re, 16),
            std::slice::from_raw_parts(im, 16),
        );
        let m = ComplexMatrix::from_fn(4, |i, j| Complex64::new(re[4 * i + j], im[4 * i + j]));
        let s = TwoQubitState::new(m).map_err(invalid)?;
        *out = boxed(QdcState(s));
        Ok(())
    })
}

/// Noisy time-bin state: accidental fraction from `epsilon` and the pairing
/// weight, `ee`–`ll` coherence scaled by `v_coh`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_model(
    phi_p: f64,
    epsilon: f64,
    v_coh: f64,
    pairing_weight: f64,
    out: *mut *mut QdcState,
) -> QdcStatus {
    guard(|| {
        check_out(out, "out")?;
        let params = TimeBinModelParams {
            phi_p,
            epsilon,
            v_coh,
            pairing_weight,
        };
        let s = model_state(&params).map_err(invalid)?;
        *out = boxed(QdcState(s));
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_element(
    state: *const QdcState,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> QdcStatus {
    guard(|| {
        let s = &get(state, "state")?.0;
        check_out(re, "re")?;
        check_out(im, "im")?;
        if row >= 4 || col >= 4 {
            return Err(invalid(format!("element ({row}, {col}) out of range")));
        }
        let z = s.element(row, col);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_metrics(
    state: *const QdcState,
    out: *mut QdcMetrics,
) -> QdcStatus {
    guard(|| {
        let s = &get(state, "state")?.0;
        check_out(out, "out")?;
        let m = metrics(s).map_err(numerical)?;
        *out = QdcMetrics {
            concurrence: m.concurrence,
            fidelity: m.fidelity.fidelity,
            phi_opt: m.fidelity.phi_opt,
            coherence_re: m.coherence.value.re,
            coherence_im: m.coherence.value.im,
            coherence_row: m.coherence.row as u32,
            coherence_col: m.coherence.col as u32,
            visibility_time: m.visibilities.time,
            visibility_energy_0: m.visibilities.energy_0,
            visibility_energy_90: m.visibilities.energy_90,
        };
        Ok(())
    })
}

/// Uhlmann fidelity `(Tr√(√a b √a))²`.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_fidelity(
    a: *const QdcState,
    b: *const QdcState,
    out: *mut f64,
) -> QdcStatus {
    guard(|| {
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        check_out(out, "out")?;
        *out = state_fidelity(a, b).map_err(numerical)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be a handle not freed before, or NULL.
#[no_mangle]
pub unsafe extern "C" fn qdc_state_free(state: *mut QdcState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Poisson counts for the 16 standard settings, deterministic in `seed`.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_dataset_simulate(
    state: *const QdcState,
    n_mean: f64,
    seed: u64,
    out: *mut *mut QdcDataset,
) -> QdcStatus {
    guard(|| {
        let s = &get(state, "state")?.0;
        check_out(out, "out")?;
        let d = simulate_counts(s, &standard_settings(), n_mean, seed).map_err(invalid)?;
        *out = boxed(QdcDataset(d));
        Ok(())
    })
}

/// Dataset from 16 measured counts in the standard setting order.
///
/// # Safety
/// `counts` must point to 16 doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_dataset_from_counts(
    counts: *const f64,
    n_mean: f64,
    out: *mut *mut QdcDataset,
) -> QdcStatus {
    guard(|| {
        get(counts, "counts")?;
        check_out(out, "out")?;
        let counts = std::slice::from_raw_parts(counts, 16).to_vec();
        let d = TomographyDataset::new(standard_settings(), counts, n_mean).map_err(invalid)?;
        *out = boxed(QdcDataset(d));
        Ok(())
    })
}

/// # Safety
/// `data` must be a live handle and `counts` point to 16 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qdc_dataset_counts(
    data: *const QdcDataset,
    counts: *mut f64,
) -> QdcStatus {
    guard(|| {
        let d = &get(data, "data")?.0;
        check_out(counts, "counts")?;
        ptr::copy_nonoverlapping(d.counts().as_ptr(), counts, 16);
        Ok(())
    })
}

/// # Safety
/// `data` must be a handle not freed before, or NULL.
#[no_mangle]
pub unsafe extern "C" fn qdc_dataset_free(data: *mut QdcDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Linear-inversion estimate; `physical` is set to 1 when it has no
/// negative eigenvalue.
///
/// # Safety
/// `data` must be a live handle; `out` and `physical` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_reconstruct_linear(
    data: *const QdcDataset,
    out: *mut *mut QdcState,
    physical: *mut i32,
) -> QdcStatus {
    guard(|| {
        let d = &get(data, "data")?.0;
        check_out(out, "out")?;
        check_out(physical, "physical")?;
        let est = reconstruct_linear(d).map_err(numerical)?;
        *physical = i32::from(est.physical);
        *out = boxed(QdcState(est.state));
        Ok(())
    })
}

/// Maximum-likelihood estimate. Pass `max_iterations = 0` or `tol <= 0` for
/// the defaults. `converged` is 0 when the iteration cap was reached; the
/// best iterate is still returned.
///
/// # Safety
/// `data` must be a live handle; `out` and `converged` writable.
#[no_mangle]
pub unsafe extern "C" fn qdc_reconstruct_mle(
    data: *const QdcDataset,
    max_iterations: usize,
    tol: f64,
    out: *mut *mut QdcState,
    converged: *mut i32,
) -> QdcStatus {
    guard(|| {
        let d = &get(data, "data")?.0;
        check_out(out, "out")?;
        check_out(converged, "converged")?;
        let mut opts = MleOptions::default();
        if max_iterations > 0 {
            opts.max_iterations = max_iterations;
        }
        if tol > 0.0 {
            opts.tol = tol;
        }
        let r = reconstruct_mle(d, &opts).map_err(numerical)?;
        *converged = i32::from(r.converged);
        *out = boxed(QdcState(r.state));
        Ok(())
    })
}
