mod common;

use common::{pure_concurrence, werner, x_state_concurrence, C};
use num_complex::Complex64;
use proptest::prelude::*;
use qdcascade::linalg::ComplexMatrix;
use qdcascade::state::TwoQubitState;
use qdcascade::timebin::{
    concurrence, energy_visibility, fidelity_bell, model_state, parse_density_csv,
    write_density_csv, TimeBinModelParams,
};
use std::f64::consts::PI;

fn from_rows(m: &[[C; 4]; 4]) -> TwoQubitState {
    TwoQubitState::new(ComplexMatrix::from_fn(4, |i, j| m[i][j])).unwrap()
}

fn rows(s: &TwoQubitState) -> [[C; 4]; 4] {
    let mut m = [[C::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = s.element(i, j);
        }
    }
    m
}

fn amplitudes() -> impl Strategy<Value = [C; 4]> {
    prop::array::uniform8(-1.0..1.0f64)
        .prop_filter("non-zero", |a| a.iter().any(|v| v.abs() > 1e-2))
        .prop_map(|a| {
            let v = [0, 1, 2, 3].map(|k| C::new(a[2 * k], a[2 * k + 1]));
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.map(|z| z / n)
        })
}

fn mixed_state() -> impl Strategy<Value = TwoQubitState> {
    prop::collection::vec(-1.0..1.0f64, 32)
        .prop_filter("non-zero", |a| a.iter().any(|v| v.abs() > 1e-2))
        .prop_map(|a| {
            let g = ComplexMatrix::from_fn(4, |i, j| {
                C::new(a[2 * (4 * i + j)], a[2 * (4 * i + j) + 1])
            });
            let rho = g.checked_mul(&g.adjoint()).unwrap();
            let tr = rho.trace().re;
            TwoQubitState::new(rho.scale_real(1.0 / tr).hermitian_part()).unwrap()
        })
}

/// `[[α, −β*], [β, α*]]` from three angles.
fn su2(t: f64, a: f64, b: f64) -> ComplexMatrix {
    let alpha = Complex64::from_polar(t.cos(), a);
    let beta = Complex64::from_polar(t.sin(), b);
    ComplexMatrix::from_vec(2, vec![alpha, -beta.conj(), beta, alpha.conj()]).unwrap()
}

/// `⟨Φ(φ)|ρ|Φ(φ)⟩` with `Φ(φ) = (|ee⟩ + e^{iφ}|ll⟩)/√2`.
fn bell_overlap(m: &[[C; 4]; 4], phi: f64) -> f64 {
    let e = Complex64::from_polar(1.0, phi);
    0.5 * (m[0][0] + m[3][3] + m[0][3] * e + m[3][0] * e.conj()).re
}

/// Coincidence probability with both photons projected on `(|e⟩ + e^{ia}|l⟩)/√2`.
fn fringe_point(m: &[[C; 4]; 4], alpha: f64, phi: f64) -> f64 {
    let s = |a: f64| [C::new(1.0, 0.0), Complex64::from_polar(1.0, a)];
    let (u, v) = (s(alpha), s(phi));
    let psi = [u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1]].map(|z| z * 0.5);
    let mut p = C::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            p += psi[i].conj() * m[i][j] * psi[j];
        }
    }
    p.re
}

proptest! {
    #[test]
    fn pure_state_concurrence(v in amplitudes()) {
        let c = concurrence(&TwoQubitState::pure(v)).unwrap();
        prop_assert!((c - pure_concurrence(&v)).abs() < 1e-10);
    }

    #[test]
    fn x_state_concurrence_closed_form(
        p in prop::array::uniform4(0.01..1.0f64),
        r in prop::array::uniform2(0.0..1.0f64),
        ph in prop::array::uniform2(-PI..PI),
    ) {
        let tr: f64 = p.iter().sum();
        let p = p.map(|x| x / tr);
        let mut m = [[C::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            m[i][i] = C::new(p[i], 0.0);
        }
        m[0][3] = Complex64::from_polar(r[0] * (p[0] * p[3]).sqrt(), ph[0]);
        m[3][0] = m[0][3].conj();
        m[1][2] = Complex64::from_polar(r[1] * (p[1] * p[2]).sqrt(), ph[1]);
        m[2][1] = m[1][2].conj();
        let c = concurrence(&from_rows(&m)).unwrap();
        prop_assert!((c - x_state_concurrence(&m)).abs() < 1e-10);
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries(
        rho in mixed_state(),
        angles in prop::array::uniform6(-PI..PI),
    ) {
        let u = su2(angles[0], angles[1], angles[2]).kron(&su2(angles[3], angles[4], angles[5]));
        let rotated = u.checked_mul(rho.matrix()).unwrap().checked_mul(&u.adjoint()).unwrap();
        let c0 = concurrence(&rho).unwrap();
        let c1 = concurrence(&TwoQubitState::new(rotated.hermitian_part()).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&c0));
        prop_assert!((c0 - c1).abs() < 1e-9);
    }

    #[test]
    fn concurrence_is_convex(a in amplitudes(), b in amplitudes(), w in 0.0..1.0f64) {
        let (sa, sb) = (TwoQubitState::pure(a), TwoQubitState::pure(b));
        let mix = sa.matrix().scale_real(w).checked_add(&sb.matrix().scale_real(1.0 - w)).unwrap();
        let c = concurrence(&TwoQubitState::new(mix).unwrap()).unwrap();
        prop_assert!(c <= w * pure_concurrence(&a) + (1.0 - w) * pure_concurrence(&b) + 1e-10);
    }

    #[test]
    fn bell_fidelity_is_the_phase_maximum(rho in mixed_state()) {
        let m = rows(&rho);
        let f = fidelity_bell(&rho);
        let grid = (0..3600).map(|k| bell_overlap(&m, 2.0 * PI * k as f64 / 3600.0)).fold(f64::MIN, f64::max);
        prop_assert!(f.fidelity >= grid - 1e-12);
        prop_assert!(f.fidelity - grid < 1e-5);
        prop_assert!((bell_overlap(&m, f.phi_opt) - f.fidelity).abs() < 1e-12);
    }

    #[test]
    fn model_state_is_a_physical_x_state(
        phi in -PI..PI,
        eps in 0.0..1.0f64,
        v in 0.0..1.0f64,
        w in 0.0..8.0f64,
    ) {
        let params = TimeBinModelParams { phi_p: phi, epsilon: eps, v_coh: v, pairing_weight: w };
        let rho = model_state(&params).unwrap();
        prop_assert!(rho.is_physical(1e-12));
        let m = rows(&rho);
        prop_assert!((concurrence(&rho).unwrap() - x_state_concurrence(&m)).abs() < 1e-10);
    }

    #[test]
    fn energy_visibility_matches_fringe_scan(
        phi in -PI..PI,
        eps in 0.0..0.5f64,
        v in 0.0..1.0f64,
        phi_x in -PI..PI,
    ) {
        let params = TimeBinModelParams { phi_p: phi, epsilon: eps, v_coh: v, pairing_weight: 4.0 };
        let rho = model_state(&params).unwrap();
        let m = rows(&rho);
        let samples: Vec<f64> = (0..4000).map(|k| fringe_point(&m, 2.0 * PI * k as f64 / 4000.0, phi_x)).collect();
        let hi = samples.iter().cloned().fold(f64::MIN, f64::max);
        let lo = samples.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!((energy_visibility(&rho, phi_x) - (hi - lo) / (hi + lo)).abs() < 1e-5);
    }
}

#[test]
fn werner_closed_forms() {
    for k in 0..=20 {
        let p = k as f64 / 20.0;
        let rho = from_rows(&werner(p));
        let c = concurrence(&rho).unwrap();
        assert!(
            (c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-10,
            "p {p}"
        );
        assert!((fidelity_bell(&rho).fidelity - (1.0 + 3.0 * p) / 4.0).abs() < 1e-12);
    }
}

#[test]
fn density_csv_round_trip() {
    let params = TimeBinModelParams::new(0.3, 0.06, 0.9).unwrap();
    let rho = model_state(&params).unwrap();
    let mut buf = Vec::new();
    write_density_csv(&mut buf, rho.matrix(), &["a header".into()]).unwrap();
    let back = parse_density_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(&back, rho.matrix());
}
