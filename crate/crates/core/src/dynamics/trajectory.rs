use std::io::{self, Write};

use num_complex::Complex64;

use super::{DecayRates, DynamicsError};
use crate::state::{Level, QdDensityMatrix};

/// Sampled solution of the master equation, one entry per accepted step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<QdDensityMatrix>,
    populations: Vec<[f64; 3]>,
    gb_coherence: Vec<Complex64>,
    /// Running integrals `(∫ρ_xx dt, ∫ρ_bb dt)` from the first time.
    integrated: Vec<[f64; 2]>,
}

impl Trajectory {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            populations: Vec::with_capacity(n),
            gb_coherence: Vec::with_capacity(n),
            integrated: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, t: f64, state: QdDensityMatrix, integrated: [f64; 2]) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.populations.push(state.populations());
        self.gb_coherence
            .push(state.element(Level::Ground, Level::Biexciton));
        self.times.push(t);
        self.states.push(state);
        self.integrated.push(integrated);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[QdDensityMatrix] {
        &self.states
    }

    /// `(ρ_gg, ρ_xx, ρ_bb)` per stored time.
    pub fn populations(&self) -> &[[f64; 3]] {
        &self.populations
    }

    /// `⟨g|ρ|b⟩` per stored time.
    pub fn gb_coherence(&self) -> &[Complex64] {
        &self.gb_coherence
    }

    pub fn integrated_populations(&self) -> &[[f64; 2]] {
        &self.integrated
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn final_state(&self) -> &QdDensityMatrix {
        self.states.last().expect("non-empty trajectory")
    }

    fn check_range(&self, t: f64) -> Result<(), DynamicsError> {
        if self.is_empty() || !(t >= self.start() && t <= self.end()) {
            return Err(DynamicsError::OutOfRange {
                t,
                start: self.times.first().copied().unwrap_or(f64::NAN),
                end: self.times.last().copied().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// Segment `k` with `times[k] ≤ t ≤ times[k+1]` (or the last node).
    fn segment(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        k.saturating_sub(1).min(self.len().saturating_sub(2))
    }

    /// State at `t`: the stored state when `t` is a node, otherwise linear
    /// interpolation between the neighbouring steps.
    pub fn state_at(&self, t: f64) -> Result<QdDensityMatrix, DynamicsError> {
        self.check_range(t)?;
        if let Ok(k) = self.times.binary_search_by(|s| s.total_cmp(&t)) {
            return Ok(self.states[k].clone());
        }
        let k = self.segment(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = (t - t0) / (t1 - t0);
        let a = self.states[k].matrix().scale_real(1.0 - w);
        let b = self.states[k + 1].matrix().scale_real(w);
        Ok(QdDensityMatrix::from_raw(&a + &b))
    }

    /// `(∫ρ_xx, ∫ρ_bb)` from the first time up to `t`.
    pub fn integrated_at(&self, t: f64) -> Result<[f64; 2], DynamicsError> {
        self.check_range(t)?;
        if self.len() == 1 {
            return Ok(self.integrated[0]);
        }
        let k = self.segment(t);
        let t0 = self.times[k];
        if t == t0 {
            return Ok(self.integrated[k]);
        }
        let (t1, p0, p1) = (
            self.times[k + 1],
            self.populations[k],
            self.populations[k + 1],
        );
        let w = (t - t0) / (t1 - t0);
        let mid = |i: usize| p0[i] + w * (p1[i] - p0[i]);
        let dt = t - t0;
        Ok([
            self.integrated[k][0] + 0.5 * dt * (p0[1] + mid(1)),
            self.integrated[k][1] + 0.5 * dt * (p0[2] + mid(2)),
        ])
    }

    /// Writes the CSV export. `header` lines are emitted first, each prefixed
    /// with `# `.
    pub fn write_csv<W: Write>(
        &self,
        mut out: W,
        decay: &DecayRates,
        header: &[String],
    ) -> io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "t,rho_gg,rho_xx,rho_bb,re_rho_gb,im_rho_gb,p_x,p_b")?;
        for k in 0..self.len() {
            let [gg, xx, bb] = self.populations[k];
            let gb = self.gb_coherence[k];
            let [ix, ib] = self.integrated[k];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.times[k],
                gg,
                xx,
                bb,
                gb.re,
                gb.im,
                decay.gamma_x * ix,
                decay.gamma_b * ib
            )?;
        }
        Ok(())
    }
}
