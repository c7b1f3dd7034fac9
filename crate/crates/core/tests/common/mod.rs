//! Reference implementations used as test oracles. Written against plain
//! arrays so they share no code with the library.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C = Complex64;
pub type M3 = [[C; 3]; 3];

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn zero3() -> M3 {
    [[c(0.0); 3]; 3]
}

fn mul3(a: &M3, b: &M3) -> M3 {
    let mut out = zero3();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn adj3(a: &M3) -> M3 {
    let mut out = zero3();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn ket_bra(i: usize, j: usize) -> M3 {
    let mut m = zero3();
    m[i][j] = c(1.0);
    m
}

#[derive(Debug, Clone, Copy)]
pub struct DotModel {
    pub omega: f64,
    pub delta_x: f64,
    pub delta_b: f64,
    pub gamma_b: f64,
    pub gamma_x: f64,
    /// Total dephasing rate at this drive strength.
    pub gamma_d: f64,
}

/// Hamiltonian and jump operators written out directly over (g, x, b).
fn operators(p: &DotModel) -> (M3, Vec<M3>) {
    let mut h = zero3();
    h[0][1] = c(0.5 * p.omega);
    h[1][0] = c(0.5 * p.omega);
    h[1][2] = c(0.5 * p.omega);
    h[2][1] = c(0.5 * p.omega);
    h[1][1] = c(p.delta_x - p.delta_b);
    h[2][2] = c(-2.0 * p.delta_b);
    let scale = |m: M3, s: f64| m.map(|row| row.map(|z| z * s.sqrt()));
    let mut a_bb = zero3();
    a_bb[2][2] = c(1.0);
    a_bb[1][1] = c(-1.0);
    let mut a_xx = zero3();
    a_xx[1][1] = c(1.0);
    a_xx[0][0] = c(-1.0);
    let jumps = vec![
        scale(ket_bra(1, 2), p.gamma_b),
        scale(ket_bra(0, 1), p.gamma_x),
        scale(a_bb, p.gamma_d),
        scale(a_xx, p.gamma_d),
    ];
    (h, jumps)
}

/// `−i[H, ρ] + Σ LρL† − ½{L†L, ρ}` by explicit matrix products.
pub fn lindblad(p: &DotModel, rho: &M3) -> M3 {
    let (h, jumps) = operators(p);
    let hr = mul3(&h, rho);
    let rh = mul3(rho, &h);
    let mut out = zero3();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = C::new(0.0, -1.0) * (hr[i][j] - rh[i][j]);
        }
    }
    for l in &jumps {
        let ld = adj3(l);
        let sandwich = mul3(&mul3(l, rho), &ld);
        let ldl = mul3(&ld, l);
        let left = mul3(&ldl, rho);
        let right = mul3(rho, &ldl);
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] += sandwich[i][j] - 0.5 * (left[i][j] + right[i][j]);
            }
        }
    }
    out
}

/// 9×9 generator acting on row-major `vec(ρ)`.
pub fn superoperator(p: &DotModel) -> Vec<Vec<C>> {
    let mut s = vec![vec![c(0.0); 9]; 9];
    for col in 0..9 {
        let out = lindblad(p, &ket_bra(col / 3, col % 3));
        for row in 0..9 {
            s[row][col] = out[row / 3][row % 3];
        }
    }
    s
}

fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let mut out = vec![vec![c(0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == c(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `exp(A)` by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Vec<Vec<C>> = a
        .iter()
        .map(|r| r.iter().map(|z| z * scale).collect())
        .collect();
    let mut result: Vec<Vec<C>> = (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let mut term = result.clone();
    for k in 1..=30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// `ρ(t) = exp(𝓛t) ρ(0)` for a constant drive.
pub fn propagate(p: &DotModel, rho0: &M3, t: f64) -> M3 {
    let s: Vec<Vec<C>> = superoperator(p)
        .into_iter()
        .map(|r| r.into_iter().map(|z| z * t).collect())
        .collect();
    let e = expm(&s);
    let v: Vec<C> = (0..9).map(|k| rho0[k / 3][k % 3]).collect();
    let mut out = zero3();
    for row in 0..9 {
        out[row / 3][row % 3] = (0..9).map(|k| e[row][k] * v[k]).sum();
    }
    out
}

/// Free cascade from `|b⟩`: `(ρ_bb, ρ_xx)` at time `t`.
pub fn cascade_populations(gamma_b: f64, gamma_x: f64, t: f64) -> (f64, f64) {
    let bb = (-gamma_b * t).exp();
    let xx = if (gamma_x - gamma_b).abs() < 1e-12 {
        gamma_b * t * (-gamma_b * t).exp()
    } else {
        gamma_b / (gamma_x - gamma_b) * ((-gamma_b * t).exp() - (-gamma_x * t).exp())
    };
    (bb, xx)
}

/// Photon yields of the free cascade up to `t`.
pub fn cascade_emission(gamma_b: f64, gamma_x: f64, t: f64) -> (f64, f64) {
    let p_b = 1.0 - (-gamma_b * t).exp();
    let int_xx = if (gamma_x - gamma_b).abs() < 1e-12 {
        (1.0 - (1.0 + gamma_b * t) * (-gamma_b * t).exp()) / gamma_b
    } else {
        gamma_b / (gamma_x - gamma_b)
            * ((1.0 - (-gamma_b * t).exp()) / gamma_b - (1.0 - (-gamma_x * t).exp()) / gamma_x)
    };
    (gamma_x * int_xx, p_b)
}

/// Normalized random two-qubit pure state over (ee, el, le, ll).
pub fn random_pure<R: Rng>(rng: &mut R) -> [C; 4] {
    let mut v = [c(0.0); 4];
    for z in v.iter_mut() {
        *z = C::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// `2|ad − bc|` for `a|ee⟩ + b|el⟩ + c|le⟩ + d|ll⟩`.
pub fn pure_concurrence(v: &[C; 4]) -> f64 {
    2.0 * (v[0] * v[3] - v[1] * v[2]).norm()
}

/// Concurrence of an X-shaped state from its populations and the two
/// anti-diagonal coherences.
pub fn x_state_concurrence(rho: &[[C; 4]; 4]) -> f64 {
    let p = |i: usize| rho[i][i].re;
    let a = rho[0][3].norm() - (p(1) * p(2)).sqrt();
    let b = rho[1][2].norm() - (p(0) * p(3)).sqrt();
    2.0 * a.max(b).max(0.0)
}

/// Werner state `p|Φ⁺⟩⟨Φ⁺| + (1 − p)I/4`.
pub fn werner(p: f64) -> [[C; 4]; 4] {
    let mut m = [[c(0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c((1.0 - p) / 4.0);
    }
    for &i in &[0, 3] {
        for &j in &[0, 3] {
            m[i][j] += c(p / 2.0);
        }
    }
    m
}
