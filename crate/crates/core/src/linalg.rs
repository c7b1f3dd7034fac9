//! Dense complex linear algebra for the small matrices used throughout the crate.
//!
//! Everything here is sized for dimension 3 (the dot) and 4 (two time-bin
//! qubits), with the occasional 16-dimensional real system from tomography.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Inputs farther than this from Hermitian are rejected by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-9;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SVD_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries for a square matrix, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("matrix is not Hermitian: max |M[i][j] - conj(M[j][i])| = {violation:.3e}")]
    NotHermitian { violation: f64 },
    #[error("Jacobi iteration did not converge (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { off_norm: f64 },
    #[error("singular linear system (pivot {pivot:.3e} in column {column})")]
    Singular { column: usize, pivot: f64 },
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if dim == 0 || data.len() != dim * dim {
            return Err(LinalgError::BadShape {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal lengths");
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    /// Matrix unit `|i⟩⟨j|`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<(), LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    /// `AB - BA`
    pub fn commutator(&self, other: &Self) -> Result<Self, LinalgError> {
        self.checked_mul(other)?
            .checked_sub(&other.checked_mul(self)?)
    }

    /// `AB + BA`
    pub fn anticommutator(&self, other: &Self) -> Result<Self, LinalgError> {
        self.checked_mul(other)?
            .checked_add(&other.checked_mul(self)?)
    }

    /// Kronecker product, `self` acting on the leading factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |r, c| self[(r / m, c / m)] * other[(r % m, c % m)])
    }

    /// `Tr(A† B)`, the Hilbert–Schmidt inner product.
    pub fn inner(&self, other: &Self) -> Result<Complex64, LinalgError> {
        self.check_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `max |M[i][j] − conj(M[j][i])|`
    pub fn hermiticity_violation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "mul_vec dimension mismatch");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(
            i < self.dim && j < self.dim,
            "index ({i}, {j}) out of range"
        );
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(
            i < self.dim && j < self.dim,
            "index ({i}, {j}) out of range"
        );
        &mut self.data[i * self.dim + j]
    }
}

// Operator forms panic on a dimension mismatch; use the `checked_*` methods
// when the shapes come from untrusted input.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix add")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix sub")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_mul(rhs).expect("matrix mul")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, " ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the normalized eigenvector for `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl HermitianEigen {
    /// `Σ f(λ_k) |v_k⟩⟨v_k|`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|x| x)
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Unitary `R = [[c, s], [−s·ē, c·ē]]` with `R† [[a_pp, a_pq], [ā_pq, a_qq]] R`
/// diagonal, where `e = a_pq/|a_pq|`. Returned as `[r_pp, r_pq, r_qp, r_qq]`.
fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64, mag: f64) -> [Complex64; 4] {
    let e_bar = (apq / mag).conj();
    let zeta = (aqq - app) / (2.0 * mag);
    let t = if zeta.is_infinite() {
        1.0 / (2.0 * zeta)
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    [
        Complex64::new(c, 0.0),
        Complex64::new(s, 0.0),
        -e_bar * s,
        e_bar * c,
    ]
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// the classical real rotation, so `A ← R† A R` with
/// `R = [[c, s], [−s·ē, c·ē]]` on the `(p, q)` plane, `e = a_pq / |a_pq|`.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = m.dim();
    let scale = m.max_abs().max(1.0);
    let violation = m.hermiticity_violation();
    if violation > HERMITIAN_TOL * scale {
        return Err(LinalgError::NotHermitian { violation });
    }

    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let frob = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = n == 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_TOL * frob {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let [r_pp, r_pq, r_qp, r_qq] =
                    jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq, mag);

                // A ← A R (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * r_pp + akq * r_qp;
                    a[(k, q)] = akp * r_pq + akq * r_qq;
                }
                // A ← R† A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = r_pp.conj() * apk + r_qp.conj() * aqk;
                    a[(q, k)] = r_pq.conj() * apk + r_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V ← V R
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * r_pp + vkq * r_qp;
                    v[(k, q)] = vkp * r_pq + vkq * r_qq;
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > JACOBI_TOL * frob {
            return Err(LinalgError::NoConvergence { off_norm: off });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = order
        .iter()
        .map(|&k| (0..n).map(|i| v[(i, k)]).collect())
        .collect();
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in descending order, by one-sided Jacobi: columns are
/// rotated pairwise until mutually orthogonal, then their norms are the
/// singular values. Small singular values come out accurate to about
/// `1e-14·‖m‖` in absolute terms.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = m.dim();
    let mut a = m.clone();
    // columns below this squared norm are numerically zero
    let negligible = (SVD_TOL * m.frobenius_norm()).powi(2);
    let mut worst = 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        worst = 0.0f64;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..n {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                let mag = gamma.norm();
                let scale = (alpha * beta).sqrt();
                if alpha <= negligible || beta <= negligible || mag <= SVD_TOL * scale {
                    continue;
                }
                worst = worst.max(mag / scale);
                let [r_pp, r_pq, r_qp, r_qq] = jacobi_rotation(alpha, beta, gamma, mag);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * r_pp + akq * r_qp;
                    a[(k, q)] = akp * r_pq + akq * r_qq;
                }
            }
        }
        if worst == 0.0 {
            let mut sv: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt())
                .collect();
            sv.sort_by(|x, y| y.total_cmp(x));
            return Ok(sv);
        }
    }
    Err(LinalgError::NoConvergence { off_norm: worst })
}

/// Factor `W` with `m ≈ W W†` for a positive semidefinite `m`: column `k`
/// is `sqrt(λ_k)·v_k`, and columns whose eigenvalue is at most `rank_tol`
/// are exactly zero.
pub fn psd_factor(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = eig_hermitian(m)?;
    let n = m.dim();
    let mut w = ComplexMatrix::zeros(n);
    for (k, (lambda, v)) in eig.values.iter().zip(&eig.vectors).enumerate() {
        if *lambda > rank_tol {
            let s = lambda.sqrt();
            for i in 0..n {
                w[(i, k)] = v[i] * s;
            }
        }
    }
    Ok(w)
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues (numerical noise) are clipped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    Ok(eig_hermitian(m)?.map_spectrum(|x| x.max(0.0).sqrt()))
}

/// Closest unit-trace PSD matrix in Frobenius norm (eigenvalue simplex projection).
pub fn project_to_density(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = eig_hermitian(&m.hermitian_part())?;
    let projected = project_to_simplex(&eig.values);
    let mut eig = eig;
    eig.values = projected;
    // values now non-increasing and non-negative; map_spectrum uses them directly
    Ok(eig.reconstruct())
}

/// Euclidean projection of a descending-sorted vector onto the probability simplex.
fn project_to_simplex(sorted_desc: &[f64]) -> Vec<f64> {
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &x) in sorted_desc.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            shift = candidate;
        }
    }
    sorted_desc.iter().map(|x| (x - shift).max(0.0)).collect()
}

/// Solve the dense real system `A x = b` (row-major `A`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_real(a: &[f64], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    if a.len() != n * n {
        return Err(LinalgError::BadShape {
            expected: n * n,
            got: a.len(),
        });
    }
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m
        .iter()
        .fold(0.0_f64, |s, v| s.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().total_cmp(&m[s * n + col].abs()))
            .expect("non-empty range");
        let pivot = m[pivot_row * n + col];
        if pivot.abs() <= 1e-13 * scale {
            return Err(LinalgError::Singular { column: col, pivot });
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= factor * m[col * n + k];
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_eigenvalues_sorted_descending() {
        let eig = eig_hermitian(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        // characteristic polynomial λ² − 1
        let m = ComplexMatrix::from_vec(2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn complex_pauli_y() {
        let m = ComplexMatrix::from_vec(2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_vec(2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        match eig_hermitian(&m) {
            Err(LinalgError::NotHermitian { violation }) => {
                assert!((violation - 1.0).abs() < 1e-15)
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn trace_and_commutator_basics() {
        assert_eq!(ComplexMatrix::identity(3).trace(), c(3.0, 0.0));
        let a = ComplexMatrix::from_fn(3, |i, j| c(i as f64, j as f64 - 0.5));
        assert_eq!(a.commutator(&a).unwrap().max_abs(), 0.0);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert_eq!(
            a.checked_mul(&b),
            Err(LinalgError::DimensionMismatch { left: 2, right: 3 })
        );
        assert!(a.checked_add(&b).is_err());
        assert!(a.commutator(&b).is_err());
        assert!(ComplexMatrix::from_vec(2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn kron_of_units() {
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let e10 = ComplexMatrix::unit(2, 1, 0);
        let k = e01.kron(&e10);
        // |0⟩⟨1| ⊗ |1⟩⟨0| = |01⟩⟨10|
        assert_eq!(k, ComplexMatrix::unit(4, 1, 2));
    }

    #[test]
    fn solve_small_system() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = solve_real(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(matches!(
            solve_real(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.7, 0.5, -0.2]);
        assert!(p
            .iter()
            .zip([0.6, 0.4, 0.0])
            .all(|(a, b)| (a - b).abs() < 1e-15));
        let p = project_to_simplex(&[0.5, 0.3, 0.2]);
        assert!(p
            .iter()
            .zip([0.5, 0.3, 0.2])
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn singular_values_small_cases() {
        let m = ComplexMatrix::from_vec(2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        let sv = singular_values(&m).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sv[0] - golden).abs() < 1e-14 && (sv[1] - 1.0 / golden).abs() < 1e-14);

        let u = [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), ONE];
        let v = [ONE, I, Complex64::new(0.5, 0.5)];
        let sv = singular_values(&ComplexMatrix::outer(&u, &v)).unwrap();
        let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((sv[0] - norm(&u) * norm(&v)).abs() < 1e-13);
        assert!(sv[1] < 1e-15 && sv[2] < 1e-15, "{sv:?}");

        let d = ComplexMatrix::from_vec(
            2,
            vec![ZERO, Complex64::new(0.0, -2.0), ONE.scale(3.0), ZERO],
        );
        let sv = singular_values(&d.unwrap()).unwrap();
        assert_eq!(sv, vec![3.0, 2.0]);
    }
}
