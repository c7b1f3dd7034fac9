//! Drive, rates and the three-level Lindblad generator.
//!
//! Units: ħ = 1, time in ps, rates and energies in ps⁻¹. Basis order is
//! `(|g⟩, |x⟩, |b⟩)`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::linalg::{ComplexMatrix, I};
use crate::state::QdDensityMatrix;

/// Anything that can supply a Rabi amplitude and the two detunings.
pub trait Drive: Sync {
    /// Rabi amplitude Ω(t) in ps⁻¹.
    fn rabi(&self, t: f64) -> f64;
    fn delta_x(&self) -> f64;
    fn delta_b(&self) -> f64;
}

/// Gaussian pulse `Ω(t) = Ω₀·exp(−ln2·(t−t₀)²/σ²)` plus detunings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseDrive {
    pub omega0: f64,
    pub sigma: f64,
    pub t0: f64,
    pub delta_x: f64,
    pub delta_b: f64,
}

/// `∫ exp(−ln2·u²) du = sqrt(π/ln2)`
pub fn gaussian_area_factor() -> f64 {
    (PI / LN_2).sqrt()
}

impl PulseDrive {
    pub fn new(
        omega0: f64,
        sigma: f64,
        t0: f64,
        delta_x: f64,
        delta_b: f64,
    ) -> Result<Self, DynamicsError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(DynamicsError::InvalidParameter(format!(
                "pulse sigma must be positive, got {sigma}"
            )));
        }
        if !(omega0 >= 0.0 && omega0.is_finite()) {
            return Err(DynamicsError::InvalidParameter(format!(
                "omega0 must be non-negative, got {omega0}"
            )));
        }
        if !(t0.is_finite() && delta_x.is_finite() && delta_b.is_finite()) {
            return Err(DynamicsError::InvalidParameter(
                "pulse center and detunings must be finite".into(),
            ));
        }
        Ok(Self {
            omega0,
            sigma,
            t0,
            delta_x,
            delta_b,
        })
    }

    /// Pulse whose area `∫Ω dt` equals `area`.
    pub fn with_area(
        area: f64,
        sigma: f64,
        t0: f64,
        delta_x: f64,
        delta_b: f64,
    ) -> Result<Self, DynamicsError> {
        if !(sigma > 0.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "pulse sigma must be positive, got {sigma}"
            )));
        }
        Self::new(
            area / (sigma * gaussian_area_factor()),
            sigma,
            t0,
            delta_x,
            delta_b,
        )
    }

    /// Pulse with `Ω₀²σ = energy`.
    pub fn with_energy(
        energy: f64,
        sigma: f64,
        t0: f64,
        delta_x: f64,
        delta_b: f64,
    ) -> Result<Self, DynamicsError> {
        if !(energy >= 0.0 && sigma > 0.0) {
            return Err(DynamicsError::InvalidParameter(format!(
                "energy must be >= 0 and sigma > 0, got {energy}, {sigma}"
            )));
        }
        Self::new((energy / sigma).sqrt(), sigma, t0, delta_x, delta_b)
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let u = (t - self.t0) / self.sigma;
        self.omega0 * (-LN_2 * u * u).exp()
    }

    /// Pulse area `θ = Ω₀·σ·sqrt(π/ln2)`.
    pub fn area(&self) -> f64 {
        self.omega0 * self.sigma * gaussian_area_factor()
    }

    /// `Ω₀²σ`, proportional to the pulse energy.
    pub fn energy(&self) -> f64 {
        self.omega0 * self.omega0 * self.sigma
    }

    /// `[t₀ − 5σ, t₀ + 5σ]`; outside it Ω < 3·10⁻⁸·Ω₀.
    pub fn window(&self) -> (f64, f64) {
        (self.t0 - 5.0 * self.sigma, self.t0 + 5.0 * self.sigma)
    }

    /// Pulse window followed by ten exciton lifetimes (ten biexciton
    /// lifetimes when the exciton does not emit).
    pub fn default_span(&self, decay: &DecayRates) -> (f64, f64) {
        let (start, end) = self.window();
        let tail = if decay.gamma_x > 0.0 {
            10.0 / decay.gamma_x
        } else if decay.gamma_b > 0.0 {
            10.0 / decay.gamma_b
        } else {
            0.0
        };
        (start, end + tail)
    }
}

impl Drive for PulseDrive {
    fn rabi(&self, t: f64) -> f64 {
        self.amplitude(t)
    }
    fn delta_x(&self) -> f64 {
        self.delta_x
    }
    fn delta_b(&self) -> f64 {
        self.delta_b
    }
}

/// Time-independent drive, used for oracle comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDrive {
    pub omega: f64,
    pub delta_x: f64,
    pub delta_b: f64,
}

impl Drive for ConstantDrive {
    fn rabi(&self, _t: f64) -> f64 {
        self.omega
    }
    fn delta_x(&self) -> f64 {
        self.delta_x
    }
    fn delta_b(&self) -> f64 {
        self.delta_b
    }
}

/// Radiative rates: `gamma_b` on b → x, `gamma_x` on x → g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    pub gamma_b: f64,
    pub gamma_x: f64,
}

impl DecayRates {
    pub fn new(gamma_b: f64, gamma_x: f64) -> Result<Self, DynamicsError> {
        if !(gamma_b >= 0.0 && gamma_x >= 0.0 && gamma_b.is_finite() && gamma_x.is_finite()) {
            return Err(DynamicsError::InvalidParameter(format!(
                "decay rates must be non-negative, got gamma_b = {gamma_b}, gamma_x = {gamma_x}"
            )));
        }
        Ok(Self { gamma_b, gamma_x })
    }

    pub fn none() -> Self {
        Self {
            gamma_b: 0.0,
            gamma_x: 0.0,
        }
    }
}

impl Default for DecayRates {
    /// 500 ps biexciton and 1 ns exciton lifetimes.
    fn default() -> Self {
        Self {
            gamma_b: 0.002,
            gamma_x: 0.001,
        }
    }
}

/// Dephasing rate `γ(t) = γ_bg + γ_I0·Ω(t)^n_p`, applied to both the b–x and
/// x–g dephasing channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingModel {
    pub gamma_bg: f64,
    pub gamma_i0: f64,
    pub n_p: u32,
}

impl DephasingModel {
    pub fn new(gamma_bg: f64, gamma_i0: f64, n_p: u32) -> Result<Self, DynamicsError> {
        if !(gamma_bg >= 0.0 && gamma_i0 >= 0.0 && gamma_bg.is_finite() && gamma_i0.is_finite()) {
            return Err(DynamicsError::InvalidParameter(format!(
                "dephasing rates must be non-negative, got gamma_bg = {gamma_bg}, gamma_i0 = {gamma_i0}"
            )));
        }
        Ok(Self {
            gamma_bg,
            gamma_i0,
            n_p,
        })
    }

    pub fn none() -> Self {
        Self {
            gamma_bg: 0.0,
            gamma_i0: 0.0,
            n_p: 0,
        }
    }

    pub fn constant(gamma_bg: f64) -> Self {
        Self {
            gamma_bg,
            gamma_i0: 0.0,
            n_p: 0,
        }
    }

    pub fn rate(&self, omega: f64) -> f64 {
        self.gamma_bg + self.gamma_i0 * omega.abs().powi(self.n_p as i32)
    }
}

/// `H = ½Ω(|g⟩⟨x| + |x⟩⟨b| + h.c.) + (Δx − Δb)|x⟩⟨x| − 2Δb|b⟩⟨b|`
pub fn build_hamiltonian(omega_t: f64, delta_x: f64, delta_b: f64) -> ComplexMatrix {
    let w = Complex64::new(0.5 * omega_t, 0.0);
    let mut h = ComplexMatrix::zeros(3);
    h[(0, 1)] = w;
    h[(1, 0)] = w;
    h[(1, 2)] = w;
    h[(2, 1)] = w;
    h[(1, 1)] = Complex64::new(delta_x - delta_b, 0.0);
    h[(2, 2)] = Complex64::new(-2.0 * delta_b, 0.0);
    h
}

pub(crate) type Mat3 = [[Complex64; 3]; 3];

/// Diagonals of the dephasing operators `|b⟩⟨b| − |x⟩⟨x|` and `|x⟩⟨x| − |g⟩⟨g|`.
const DEPHASING_BB: [f64; 3] = [0.0, -1.0, 1.0];
const DEPHASING_XX: [f64; 3] = [-1.0, 1.0, 0.0];

/// Per-element coherence damping factor from the two diagonal dephasing
/// operators at unit rate: `½Σ_A (a_i − a_j)²`.
const fn dephasing_weights() -> [[f64; 3]; 3] {
    let mut w = [[0.0; 3]; 3];
    let mut i = 0;
    while i < 3 {
        let mut j = 0;
        while j < 3 {
            let db = DEPHASING_BB[i] - DEPHASING_BB[j];
            let dx = DEPHASING_XX[i] - DEPHASING_XX[j];
            w[i][j] = 0.5 * (db * db + dx * dx);
            j += 1;
        }
        i += 1;
    }
    w
}

const DEPHASING_WEIGHTS: [[f64; 3]; 3] = dephasing_weights();

/// `dρ/dt = −i[H, ρ] + D[|x⟩⟨b|]·γ_b + D[|g⟩⟨x|]·γ_x + γ_d(D[A_bb] + D[A_xx])`
pub(crate) fn generator(
    rho: &Mat3,
    omega: f64,
    delta_x: f64,
    delta_b: f64,
    decay: &DecayRates,
    gamma_d: f64,
) -> Mat3 {
    let w = 0.5 * omega;
    let hx = delta_x - delta_b;
    let hb = -2.0 * delta_b;
    // H is real symmetric tridiagonal
    let h = [[0.0, w, 0.0], [w, hx, w], [0.0, w, hb]];
    let mut d = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut comm = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                comm += rho[k][j] * h[i][k] - rho[i][k] * h[k][j];
            }
            d[i][j] = -I * comm;
        }
    }

    let (gb, gx) = (decay.gamma_b, decay.gamma_x);
    // b → x
    d[1][1] += rho[2][2] * gb;
    for k in 0..3 {
        d[2][k] -= rho[2][k] * (0.5 * gb);
        d[k][2] -= rho[k][2] * (0.5 * gb);
    }
    // x → g
    d[0][0] += rho[1][1] * gx;
    for k in 0..3 {
        d[1][k] -= rho[1][k] * (0.5 * gx);
        d[k][1] -= rho[k][1] * (0.5 * gx);
    }

    if gamma_d != 0.0 {
        for i in 0..3 {
            for j in 0..3 {
                d[i][j] -= rho[i][j] * (gamma_d * DEPHASING_WEIGHTS[i][j]);
            }
        }
    }
    d
}

pub(crate) fn to_mat3(m: &ComplexMatrix) -> Mat3 {
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = m[(i, j)];
        }
    }
    out
}

pub(crate) fn from_mat3(m: &Mat3) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, |i, j| m[i][j])
}

/// Right-hand side of the master equation at time `t`.
pub fn lindblad_rhs<D: Drive + ?Sized>(
    rho: &QdDensityMatrix,
    t: f64,
    drive: &D,
    decay: &DecayRates,
    deph: &DephasingModel,
) -> ComplexMatrix {
    let omega = drive.rabi(t);
    let d = generator(
        &to_mat3(rho.matrix()),
        omega,
        drive.delta_x(),
        drive.delta_b(),
        decay,
        deph.rate(omega),
    );
    from_mat3(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::state::Level;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hamiltonian_zero() {
        assert_eq!(build_hamiltonian(0.0, 0.0, 0.0).max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_drive_only() {
        let h = build_hamiltonian(2.0, 0.0, 0.0);
        assert_eq!(h[(0, 1)], c(1.0));
        assert_eq!(h[(1, 2)], c(1.0));
        assert_eq!(h[(1, 0)], c(1.0));
        assert_eq!(h[(2, 1)], c(1.0));
        assert_eq!(h[(0, 2)], ZERO);
        for i in 0..3 {
            assert_eq!(h[(i, i)], ZERO);
        }
    }

    #[test]
    fn hamiltonian_detunings() {
        let h = build_hamiltonian(0.0, 3.0, 1.0);
        assert_eq!(h, ComplexMatrix::from_real_diag(&[0.0, 2.0, -2.0]));
    }

    #[test]
    fn hamiltonian_is_hermitian_without_gb_coupling() {
        let h = build_hamiltonian(1.3, 0.7, -0.2);
        assert_eq!(h.hermiticity_violation(), 0.0);
        assert_eq!(h[(0, 0)], ZERO);
        assert_eq!(h[(0, 2)], ZERO);
    }

    #[test]
    fn ground_state_is_stationary() {
        let drive = ConstantDrive {
            omega: 0.0,
            delta_x: 0.5,
            delta_b: 0.0,
        };
        let d = lindblad_rhs(
            &QdDensityMatrix::ground(),
            0.0,
            &drive,
            &DecayRates::new(1.0, 1.0).unwrap(),
            &DephasingModel::constant(0.3),
        );
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn biexciton_decay_rates() {
        let drive = ConstantDrive {
            omega: 0.0,
            delta_x: 0.0,
            delta_b: 0.0,
        };
        let d = lindblad_rhs(
            &QdDensityMatrix::pure_level(Level::Biexciton),
            0.0,
            &drive,
            &DecayRates::new(1.0, 0.0).unwrap(),
            &DephasingModel::none(),
        );
        assert_eq!(d[(2, 2)], c(-1.0));
        assert_eq!(d[(1, 1)], c(1.0));
        let mut rest = d.clone();
        rest[(2, 2)] = ZERO;
        rest[(1, 1)] = ZERO;
        assert_eq!(rest.max_abs(), 0.0);
    }

    #[test]
    fn pulse_area_closed_form() {
        let p = PulseDrive::new(1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((p.area() - 2.128934038862).abs() < 1e-11);
        let p2 = PulseDrive::new(1.0, 2.0, 0.0, 0.0, 0.0).unwrap();
        assert!((p2.area() - 2.0 * p.area()).abs() < 1e-14);
        assert_eq!(
            PulseDrive::new(0.0, 3.0, 0.0, 0.0, 0.0).unwrap().area(),
            0.0
        );
        let q = PulseDrive::with_area(p.area(), 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!((q.omega0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pulse_amplitude_half_width() {
        let p = PulseDrive::new(2.0, 3.0, 10.0, 0.0, 0.0).unwrap();
        assert_eq!(p.amplitude(10.0), 2.0);
        assert!((p.amplitude(13.0) - 1.0).abs() < 1e-15);
        assert!((p.amplitude(7.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(PulseDrive::new(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(PulseDrive::new(-1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(DecayRates::new(-0.1, 0.0).is_err());
        assert!(DephasingModel::new(0.0, -1.0, 2).is_err());
    }

    #[test]
    fn dephasing_rate_model() {
        let m = DephasingModel::new(0.01, 0.0349, 2).unwrap();
        assert!((m.rate(2.0) - (0.01 + 0.0349 * 4.0)).abs() < 1e-15);
        // n_p = 0 behaves as an extra constant
        let m0 = DephasingModel::new(0.01, 0.02, 0).unwrap();
        assert!((m0.rate(0.0) - 0.03).abs() < 1e-15);
        assert!((m0.rate(5.0) - DephasingModel::constant(0.03).rate(5.0)).abs() < 1e-15);
    }

    #[test]
    fn dephasing_weights_per_coherence() {
        // g–x and x–b pick up 1/2 + 2, g–b picks up 1/2 + 1/2
        assert_eq!(DEPHASING_WEIGHTS[0][1], 2.5);
        assert_eq!(DEPHASING_WEIGHTS[1][2], 2.5);
        assert_eq!(DEPHASING_WEIGHTS[0][2], 1.0);
        assert_eq!(DEPHASING_WEIGHTS[1][1], 0.0);
    }
}
