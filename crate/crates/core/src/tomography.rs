//! Sixteen-setting tomography of the time-bin photon pair: forward model,
//! Poisson count simulation, linear inversion and maximum likelihood.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    eig_hermitian, project_to_density, psd_factor, singular_values, solve_real, ComplexMatrix,
    LinalgError, I, ONE, ZERO,
};
use crate::state::{StateError, TwoQubitState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("measurement settings are not informationally complete: {0}")]
    Singular(LinalgError),
    #[error("no counts in the time-basis settings; cannot normalize")]
    Degenerate,
    #[error("dataset line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Single-qubit analyser setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projector {
    /// Early time bin.
    E,
    /// Late time bin.
    L,
    /// `(|e⟩ + e^{iφ}|l⟩)/√2`, an energy-basis analyser at phase φ.
    S(f64),
}

impl Projector {
    pub fn vector(&self) -> [Complex64; 2] {
        match *self {
            Projector::E => [ONE, ZERO],
            Projector::L => [ZERO, ONE],
            Projector::S(phi) => [
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::from_polar(FRAC_1_SQRT_2, phi),
            ],
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vector())
    }

    pub fn is_time_basis(&self) -> bool {
        matches!(self, Projector::E | Projector::L)
    }
}

impl fmt::Display for Projector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projector::E => write!(f, "E"),
            Projector::L => write!(f, "L"),
            Projector::S(phi) => write!(f, "S({phi})"),
        }
    }
}

impl FromStr for Projector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E" => Ok(Projector::E),
            "L" => Ok(Projector::L),
            _ => s
                .strip_prefix("S(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|phi| phi.trim().parse::<f64>().ok())
                .filter(|phi| phi.is_finite())
                .map(Projector::S)
                .ok_or_else(|| format!("unknown projector `{s}` (expected E, L or S(phase))")),
        }
    }
}

/// Joint setting: XX analyser, X analyser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub xx: Projector,
    pub x: Projector,
}

impl MeasurementSetting {
    pub fn operator(&self) -> ComplexMatrix {
        self.xx.matrix().kron(&self.x.matrix())
    }
}

/// Cartesian product of `{E, L, S(0), S(π/2)}` on each qubit, XX major.
pub fn standard_settings() -> Vec<MeasurementSetting> {
    let single = [
        Projector::E,
        Projector::L,
        Projector::S(0.0),
        Projector::S(PI / 2.0),
    ];
    single
        .iter()
        .flat_map(|&xx| single.iter().map(move |&x| MeasurementSetting { xx, x }))
        .collect()
}

/// Coincidence counts per setting. `n_mean` is the count a setting would
/// collect if its projector had unit probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    settings: Vec<MeasurementSetting>,
    counts: Vec<f64>,
    n_mean: f64,
}

impl TomographyDataset {
    /// Counts may be fractional (noiseless expectations) but must be finite
    /// and non-negative.
    pub fn new(
        settings: Vec<MeasurementSetting>,
        counts: Vec<f64>,
        n_mean: f64,
    ) -> Result<Self, TomographyError> {
        if settings.len() != 16 || counts.len() != 16 {
            return Err(TomographyError::InvalidInput(format!(
                "need 16 settings and 16 counts, got {} and {}",
                settings.len(),
                counts.len()
            )));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(TomographyError::InvalidInput(
                "counts must be finite and non-negative".into(),
            ));
        }
        if !(n_mean > 0.0 && n_mean.is_finite()) {
            return Err(TomographyError::InvalidInput(format!(
                "n_mean must be positive, got {n_mean}"
            )));
        }
        Ok(Self {
            settings,
            counts,
            n_mean,
        })
    }

    /// Exact expectations `n_mean·Tr(ρ P_k)` without sampling noise.
    pub fn noiseless(
        rho: &TwoQubitState,
        settings: &[MeasurementSetting],
        n_mean: f64,
    ) -> Result<Self, TomographyError> {
        let counts = expected_counts(rho, settings, n_mean);
        Self::new(settings.to_vec(), counts, n_mean)
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn n_mean(&self) -> f64 {
        self.n_mean
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Plain-text table: an `n_mean` line, a column header, then one row per
    /// setting.
    pub fn write_text<W: Write>(&self, mut out: W, header: &[String]) -> io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "n_mean {}", self.n_mean)?;
        writeln!(out, "id xx x counts")?;
        for (k, (s, c)) in self.settings.iter().zip(&self.counts).enumerate() {
            writeln!(out, "{k} {} {} {c}", s.xx, s.x)?;
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self, TomographyError> {
        let mut n_mean = None;
        let mut settings = Vec::new();
        let mut counts = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |detail: String| TomographyError::Parse {
                line: k + 1,
                detail,
            };
            if line.is_empty() || line.starts_with('#') || line == "id xx x counts" {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "n_mean" {
                let v = fields
                    .get(1)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| err("bad n_mean line".into()))?;
                n_mean = Some(v);
                continue;
            }
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let id: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad setting id `{}`", fields[0])))?;
            if id != settings.len() {
                return Err(err(format!("setting id {id} out of order")));
            }
            let xx = fields[1].parse::<Projector>().map_err(err)?;
            let x = fields[2].parse::<Projector>().map_err(err)?;
            let c: f64 = fields[3]
                .parse()
                .map_err(|_| err(format!("bad count `{}`", fields[3])))?;
            settings.push(MeasurementSetting { xx, x });
            counts.push(c);
        }
        let n_mean = n_mean.ok_or(TomographyError::Parse {
            line: 0,
            detail: "missing n_mean line".into(),
        })?;
        Self::new(settings, counts, n_mean)
    }
}

/// `n_mean·Tr(ρ P_k)` per setting (clipped at 0 against rounding).
pub fn expected_counts(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    n_mean: f64,
) -> Vec<f64> {
    settings
        .iter()
        .map(|s| (n_mean * rho.expectation(&s.operator())).max(0.0))
        .collect()
}

/// Poisson counts with the given RNG.
pub fn simulate_counts_with<R: Rng + ?Sized>(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    n_mean: f64,
    rng: &mut R,
) -> Result<TomographyDataset, TomographyError> {
    if !(n_mean > 0.0 && n_mean.is_finite()) {
        return Err(TomographyError::InvalidInput(format!(
            "n_mean must be positive, got {n_mean}"
        )));
    }
    let counts = expected_counts(rho, settings, n_mean)
        .into_iter()
        .map(|mean| {
            if mean <= 0.0 {
                Ok(0.0)
            } else {
                Poisson::new(mean)
                    .map(|d| d.sample(rng))
                    .map_err(|e| TomographyError::InvalidInput(format!("Poisson mean {mean}: {e}")))
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    TomographyDataset::new(settings.to_vec(), counts, n_mean)
}

/// Poisson counts, deterministic in `seed`.
pub fn simulate_counts(
    rho: &TwoQubitState,
    settings: &[MeasurementSetting],
    n_mean: f64,
    seed: u64,
) -> Result<TomographyDataset, TomographyError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    simulate_counts_with(rho, settings, n_mean, &mut rng)
}

/// Real basis of 4×4 Hermitian matrices: diagonal units, then
/// `E_ij + E_ji` and `i(E_ji − E_ij)` for `i < j`.
fn hermitian_basis() -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(16);
    for i in 0..4 {
        basis.push(ComplexMatrix::unit(4, i, i));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let mut sym = ComplexMatrix::zeros(4);
            sym[(i, j)] = ONE;
            sym[(j, i)] = ONE;
            basis.push(sym);
            let mut anti = ComplexMatrix::zeros(4);
            anti[(i, j)] = -I;
            anti[(j, i)] = I;
            basis.push(anti);
        }
    }
    basis
}

/// `Re Tr(P_k B_m)` for every setting `k` and basis element `m`, row-major.
fn design_matrix(settings: &[MeasurementSetting]) -> Vec<f64> {
    let basis = hermitian_basis();
    let mut a = Vec::with_capacity(settings.len() * basis.len());
    for s in settings {
        let p = s.operator();
        for b in &basis {
            a.push((&p * b).trace().re);
        }
    }
    a
}

/// Rank of the Gram matrix `Tr(P_k P_l)` of the joint projectors.
pub fn gram_rank(settings: &[MeasurementSetting], tol: f64) -> Result<usize, TomographyError> {
    let ops: Vec<ComplexMatrix> = settings.iter().map(|s| s.operator()).collect();
    let n = ops.len();
    let gram = ComplexMatrix::from_fn(n, |k, l| (&ops[k] * &ops[l]).trace());
    let eig = eig_hermitian(&gram)?;
    let top = eig.values[0].abs().max(f64::MIN_POSITIVE);
    Ok(eig.values.iter().filter(|v| v.abs() > tol * top).count())
}

/// Estimated counts per unit probability: the sum over the four settings
/// whose analysers are both in the time basis, which partition unity.
pub fn normalization(data: &TomographyDataset) -> Result<f64, TomographyError> {
    let mut n_hat = 0.0;
    let mut seen = [false; 4];
    for (s, c) in data.settings.iter().zip(&data.counts) {
        if s.xx.is_time_basis() && s.x.is_time_basis() {
            let k = 2 * usize::from(s.xx == Projector::L) + usize::from(s.x == Projector::L);
            if seen[k] {
                return Err(TomographyError::InvalidInput(
                    "duplicate time-basis setting".into(),
                ));
            }
            seen[k] = true;
            n_hat += c;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(TomographyError::InvalidInput(
            "settings lack a complete time basis".into(),
        ));
    }
    if n_hat <= 0.0 {
        return Err(TomographyError::Degenerate);
    }
    Ok(n_hat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimate {
    /// Unit trace and Hermitian; possibly with negative eigenvalues.
    pub state: TwoQubitState,
    pub min_eigenvalue: f64,
    pub physical: bool,
}

/// Solves `Tr(P_k ρ) = n_k / n̂` for the 16 real parameters of ρ.
pub fn reconstruct_linear(data: &TomographyDataset) -> Result<LinearEstimate, TomographyError> {
    let n_hat = normalization(data)?;
    let a = design_matrix(&data.settings);
    let b: Vec<f64> = data.counts.iter().map(|c| c / n_hat).collect();
    let x = solve_real(&a, &b).map_err(TomographyError::Singular)?;
    let mut rho = ComplexMatrix::zeros(4);
    for (coef, basis) in x.iter().zip(hermitian_basis()) {
        rho = &rho + &basis.scale_real(*coef);
    }
    let trace = rho.trace().re;
    if !(trace.abs() > f64::MIN_POSITIVE) {
        return Err(TomographyError::Degenerate);
    }
    let rho = rho.scale_real(1.0 / trace).hermitian_part();
    let state = TwoQubitState::new(rho)?;
    let min_eigenvalue = state.min_eigenvalue()?;
    Ok(LinearEstimate {
        state,
        min_eigenvalue,
        physical: min_eigenvalue >= -crate::state::STATE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub max_iterations: usize,
    /// Stop when the relative improvement of the deviance (log-likelihood
    /// measured from its saturated value) drops below this.
    pub tol: f64,
    /// Weight of `I/4` mixed into the starting point.
    pub start_mixing: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tol: 1e-10,
            start_mixing: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleReport {
    pub state: TwoQubitState,
    /// Poisson log-likelihood with the count scale profiled out.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// No counts at all: every state is equally likely; the maximally
    /// mixed state is returned.
    pub degenerate: bool,
}

/// `Σ n_k ln μ_k − μ_k` with `μ_k = s·Tr(ρ P_k)` and the best scale `s`.
pub fn log_likelihood(data: &TomographyDataset, rho: &TwoQubitState) -> f64 {
    let probs: Vec<f64> = data
        .settings
        .iter()
        .map(|s| rho.expectation(&s.operator()).max(0.0))
        .collect();
    let total_p: f64 = probs.iter().sum();
    let total_n = data.total();
    if total_n == 0.0 {
        return 0.0;
    }
    let scale = total_n / total_p;
    data.counts
        .iter()
        .zip(&probs)
        .map(|(&n, &p)| poisson_term(n, scale * p))
        .sum()
}

fn poisson_term(n: f64, mu: f64) -> f64 {
    if n == 0.0 {
        -mu
    } else if mu <= 0.0 {
        f64::NEG_INFINITY
    } else {
        n * mu.ln() - mu
    }
}

/// Lower-triangular `T` from 16 reals: the diagonal, then `(re, im)` of each
/// strictly lower entry in row-major order.
fn unpack_t(params: &[f64]) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(4);
    for i in 0..4 {
        t[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = 4;
    for i in 1..4 {
        for j in 0..i {
            t[(i, j)] = Complex64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
    t
}

fn pack_t(t: &ComplexMatrix) -> Vec<f64> {
    let mut p: Vec<f64> = (0..4).map(|i| t[(i, i)].re).collect();
    for i in 1..4 {
        for j in 0..i {
            p.push(t[(i, j)].re);
            p.push(t[(i, j)].im);
        }
    }
    p
}

/// Lower-triangular `T` with `T†T = m` for a positive definite `m`.
///
/// With `J` the exchange matrix, the ordinary Cholesky factor of `JmJ = LL†`
/// gives `m = UU†` for the upper-triangular `U = JLJ`, so `T = U†`.
fn reverse_cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix, TomographyError> {
    let n = m.dim();
    let flip = ComplexMatrix::from_fn(n, |i, j| m[(n - 1 - i, n - 1 - j)]);
    let mut l = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut d = flip[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return Err(TomographyError::InvalidInput(
                "starting point is not positive definite".into(),
            ));
        }
        let d = d.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = flip[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    let u = ComplexMatrix::from_fn(n, |i, j| l[(n - 1 - i, n - 1 - j)]);
    Ok(u.adjoint())
}

/// Poisson deviance `Σ n ln(n/μ) − n + μ` (the negative log-likelihood
/// shifted by its saturated value, so it is ≥ 0 and relative changes are
/// meaningful) and its gradient in the `T` parameters.
struct Objective<'a> {
    ops: Vec<ComplexMatrix>,
    counts: &'a [f64],
    saturated: f64,
}

impl<'a> Objective<'a> {
    fn new(data: &'a TomographyDataset) -> Self {
        Self {
            ops: data.settings.iter().map(|s| s.operator()).collect(),
            counts: &data.counts,
            saturated: data.counts.iter().map(|&n| poisson_term(n, n)).sum(),
        }
    }

    fn mus(&self, rho_u: &ComplexMatrix) -> Vec<f64> {
        self.ops.iter().map(|p| (rho_u * p).trace().re).collect()
    }

    fn value(&self, params: &[f64]) -> f64 {
        let t = unpack_t(params);
        let rho_u = &t.adjoint() * &t;
        let v: f64 = self
            .mus(&rho_u)
            .iter()
            .zip(self.counts)
            .map(|(&mu, &n)| poisson_term(n, mu))
            .sum();
        if v.is_nan() {
            f64::INFINITY
        } else {
            self.saturated - v
        }
    }

    /// `∂/∂Re T_ij = 2 Re (G T†)_ji`, `∂/∂Im T_ij = −2 Im (G T†)_ji` with
    /// `G = Σ (n_k/μ_k − 1) P_k`; negated for minimization.
    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let t = unpack_t(params);
        let rho_u = &t.adjoint() * &t;
        let mut g = ComplexMatrix::zeros(4);
        for ((p, &mu), &n) in self.ops.iter().zip(&self.mus(&rho_u)).zip(self.counts) {
            let w = if n == 0.0 { -1.0 } else { n / mu - 1.0 };
            g = &g + &p.scale_real(w);
        }
        let gt = &g * &t.adjoint();
        let mut out: Vec<f64> = (0..4).map(|i| -2.0 * gt[(i, i)].re).collect();
        for i in 1..4 {
            for j in 0..i {
                out.push(-2.0 * gt[(j, i)].re);
                out.push(2.0 * gt[(j, i)].im);
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum-likelihood state `ρ = T†T / Tr(T†T)` by BFGS on the 16 real
/// parameters of `T`, started from the linear estimate projected onto the
/// physical states.
pub fn reconstruct_mle(
    data: &TomographyDataset,
    opts: &MleOptions,
) -> Result<MleReport, TomographyError> {
    if data.total() == 0.0 {
        return Ok(MleReport {
            state: TwoQubitState::maximally_mixed(),
            log_likelihood: 0.0,
            iterations: 0,
            converged: true,
            degenerate: true,
        });
    }
    let start = match reconstruct_linear(data) {
        Ok(lin) => project_to_density(lin.state.matrix())?,
        Err(TomographyError::Degenerate) => ComplexMatrix::identity(4).scale_real(0.25),
        Err(e) => return Err(e),
    };
    let mix = opts.start_mixing.clamp(1e-12, 1.0);
    let start = &start.scale_real(1.0 - mix) + &ComplexMatrix::identity(4).scale_real(mix / 4.0);

    let objective = Objective::new(data);
    let probs_total: f64 = objective.mus(&start).iter().sum();
    let t0 = reverse_cholesky(&start)?.scale_real((data.total() / probs_total).sqrt());

    let (params, iterations, converged) = bfgs(&objective, pack_t(&t0), opts);
    let t = unpack_t(&params);
    let rho_u = (&t.adjoint() * &t).hermitian_part();
    let trace = rho_u.trace().re;
    let state = TwoQubitState::new(rho_u.scale_real(1.0 / trace))?;
    let log_likelihood = log_likelihood(data, &state);
    Ok(MleReport {
        state,
        log_likelihood,
        iterations,
        converged,
        degenerate: false,
    })
}

/// Quasi-Newton minimization with Armijo backtracking. Returns the best
/// point, the iteration count and whether the stopping rule was met.
fn bfgs(obj: &Objective<'_>, mut x: Vec<f64>, opts: &MleOptions) -> (Vec<f64>, usize, bool) {
    let n = x.len();
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut h = identity(n);
    let mut quiet = 0;
    for iter in 1..=opts.max_iterations {
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            return (x, iter, true);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent possible at working precision
            let stalled = dot(&g, &g).sqrt() <= 1e-6 * (1.0 + f.abs());
            return (x, iter, stalled || quiet > 0);
        };
        let g_new = obj.gradient(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if iter == 1 {
                let scale = sy / dot(&y, &y);
                h = identity(n)
                    .into_iter()
                    .map(|r| r.iter().map(|v| v * scale).collect())
                    .collect();
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
        let improvement = f - f_new;
        x = x_new;
        g = g_new;
        f = f_new;
        if improvement <= opts.tol * f.abs().max(1.0) {
            quiet += 1;
            if quiet >= 3 {
                return (x, iter, true);
            }
        } else {
            quiet = 0;
        }
    }
    (x, opts.max_iterations, false)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`, `ρ = 1/(sᵀy)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Uhlmann fidelity `(Tr sqrt(√ρ σ √ρ))²`, computed as the squared nuclear
/// norm of `W_ρ† W_σ` with `ρ = W_ρ W_ρ†`.
pub fn state_fidelity(a: &TwoQubitState, b: &TwoQubitState) -> Result<f64, TomographyError> {
    let tol = crate::timebin::RANK_TOL;
    let wa = psd_factor(a.matrix(), tol)?;
    let wb = psd_factor(b.matrix(), tol)?;
    let sv = singular_values(&(&wa.adjoint() * &wb))?;
    let s: f64 = sv.iter().sum();
    Ok((s * s).min(1.0))
}
