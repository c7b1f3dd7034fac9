//! Batch command-line front end.
//!
//! Every command reads one [`RunConfig`], writes plain-text data files into
//! the output directory and prints a short summary. Each file starts with
//! comment lines holding the resolved configuration as JSON, so a file is
//! enough to reproduce itself.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{CoherenceSource, ConfigError, ModelSpec, RunConfig};
use crate::dynamics::{emission_after_pulse, evolve, DephasingModel, PulseDrive};
use crate::state::{basis_label, QdDensityMatrix, TwoQubitState};
use crate::sweeps::{
    energy_sweep, first_extrema, fit_gamma_i0, rabi_sweep, FitSetup, GammaFit, SweepResult,
};
use crate::timebin::{
    excitation_coherence, metrics, model_state, v_coh_for_fidelity, write_density_csv, StateMetrics,
};
use crate::tomography::{
    reconstruct_linear, reconstruct_mle, simulate_counts_with, standard_settings, state_fidelity,
    TomographyDataset,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn numerical(e: impl Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "qdcascade",
    version,
    about = "Biexciton cascade simulations and time-bin tomography"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Root seed, overriding `seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// One pulse: trajectory.csv
    Evolve,
    /// P_b and P_x versus pulse area, one file per dephasing model
    Rabi,
    /// Biexciton/exciton ratio versus pulse energy, one file per pulse length
    Ratio,
    /// Model state, simulated tomography and entanglement metrics
    Entangle,
    /// Fit the dephasing amplitude to a Rabi contrast
    FitDephasing,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Rabi => "rabi",
            Command::Ratio => "ratio",
            Command::Entangle => "entangle",
            Command::FitDephasing => "fit-dephasing",
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.exit_code() {
                0 => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let job = || -> Result<(), CliError> {
        let out = Output::create(&cfg, cli.command)?;
        match cli.command {
            Command::Evolve => cmd_evolve(&cfg, &out),
            Command::Rabi => cmd_rabi(&cfg, &out),
            Command::Ratio => cmd_ratio(&cfg, &out),
            Command::Entangle => cmd_entangle(&cfg, &out),
            Command::FitDephasing => cmd_fit_dephasing(&cfg, &out),
        }
    };
    match cli.threads {
        Some(0) => Err(ConfigError::Invalid {
            key: "--threads".into(),
            reason: "must be > 0".into(),
        }
        .into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(numerical)?
            .install(job),
        None => job(),
    }
}

/// Output directory plus the header shared by every file of one run.
struct Output {
    dir: PathBuf,
    command: &'static str,
    config: Value,
}

impl Output {
    fn create(cfg: &RunConfig, command: Command) -> Result<Self, CliError> {
        let dir = PathBuf::from(&cfg.output.dir);
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            command: command.name(),
            config: serde_json::to_value(cfg).expect("config serializes"),
        })
    }

    fn header(&self, resolved: &Value) -> Vec<String> {
        vec![
            format!("qdcascade {} {}", env!("CARGO_PKG_VERSION"), self.command),
            format!("config {}", self.config),
            format!("resolved {resolved}"),
        ]
    }

    fn write(
        &self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let file = File::create(&path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        body(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
        Ok(path)
    }

    /// JSON document with the configuration embedded under `config`.
    fn write_json(&self, name: &str, resolved: Value, results: Value) -> Result<PathBuf, CliError> {
        let doc = json!({
            "program": format!("qdcascade {} {}", env!("CARGO_PKG_VERSION"), self.command),
            "config": self.config,
            "resolved": resolved,
            "results": results,
        });
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        })
    }
}

fn show(path: &Path) {
    println!("wrote {}", path.display());
}

fn drive_json(d: &PulseDrive) -> Value {
    json!({
        "omega0": d.omega0,
        "sigma": d.sigma,
        "t0": d.t0,
        "area": d.area(),
        "energy": d.energy(),
    })
}

fn cmd_evolve(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let dot = cfg.dot.params();
    let drive = cfg.pulse.drive(&cfg.dot)?;
    let deph = cfg.dephasing.model_or_zero();
    let span = drive.default_span(&dot.decay);
    let rho0 = QdDensityMatrix::ground();
    let traj =
        evolve(&rho0, &drive, &dot.decay, &deph, span, cfg.numerics.tol).map_err(numerical)?;
    let yields = emission_after_pulse(&rho0, &drive, &dot.decay, &deph, cfg.numerics.tol)
        .map_err(numerical)?;
    let [ix, ib] = *traj
        .integrated_populations()
        .last()
        .expect("non-empty trajectory");
    let resolved = json!({
        "drive": drive_json(&drive),
        "dephasing": deph,
        "t_span": [span.0, span.1],
        "p_x_final": dot.decay.gamma_x * ix,
        "p_b_final": dot.decay.gamma_b * ib,
        "p_x_asymptotic": yields.p_x,
        "p_b_asymptotic": yields.p_b,
    });
    let header = out.header(&resolved);
    let path = out.write("trajectory.csv", |w| traj.write_csv(w, &dot.decay, &header))?;
    show(&path);
    println!(
        "area {:.4}: P_x = {:.6}, P_b = {:.6} at t = {} ps ({} steps)",
        drive.area(),
        dot.decay.gamma_x * ix,
        dot.decay.gamma_b * ib,
        span.1,
        traj.len()
    );
    Ok(())
}

fn fit_setup(cfg: &RunConfig) -> FitSetup {
    FitSetup {
        sigma: cfg.calibration.sigma,
        gamma_bg: cfg.dephasing.gamma_bg,
        dot: cfg.dot.params(),
        scan: cfg.calibration.scan(cfg.numerics.sweep_tol),
    }
}

/// Contrast the fits aim at: configured directly or produced by the
/// reference model.
fn calibration_target(cfg: &RunConfig) -> Result<(f64, Value), CliError> {
    if let Some(t) = cfg.calibration.target_ratio {
        return Ok((t, json!({ "target_ratio": t, "source": "configured" })));
    }
    let reference = cfg.calibration.reference;
    let gamma = reference.gamma_i0.ok_or_else(|| ConfigError::Invalid {
        key: "calibration.reference.gamma_i0".into(),
        reason: "required when calibration.target_ratio is not set".into(),
    })?;
    let setup = fit_setup(cfg);
    let deph = DephasingModel::new(setup.gamma_bg, gamma, reference.n_p).map_err(numerical)?;
    let e = first_extrema(setup.sigma, &deph, &setup.dot, &setup.scan).map_err(numerical)?;
    let t = e.contrast();
    Ok((
        t,
        json!({
            "target_ratio": t,
            "source": "reference",
            "first_max_area": e.max_area,
            "first_max_p_b": e.max_p_b,
            "first_min_area": e.min_area,
            "first_min_p_b": e.min_p_b,
        }),
    ))
}

fn fit_json(f: &GammaFit) -> Value {
    json!({
        "n_p": f.n_p,
        "gamma_i0": f.gamma_i0,
        "target_ratio": f.target,
        "achieved_ratio": f.achieved,
        "first_max_area": f.extrema.max_area,
        "first_max_p_b": f.extrema.max_p_b,
        "first_min_area": f.extrema.min_area,
        "first_min_p_b": f.extrema.min_p_b,
        "evaluations": f.evaluations,
    })
}

/// Models with a missing amplitude are fitted to the calibration target.
fn resolve_models(
    cfg: &RunConfig,
    models: &[ModelSpec],
) -> Result<(Vec<DephasingModel>, Value), CliError> {
    let mut target = None;
    let mut fits = Vec::new();
    let mut resolved = Vec::with_capacity(models.len());
    for m in models {
        let gamma = match m.gamma_i0 {
            Some(g) => g,
            None => {
                if target.is_none() {
                    target = Some(calibration_target(cfg)?);
                }
                let (t, _) = target.as_ref().expect("target set");
                let fit = fit_gamma_i0(m.n_p, *t, &fit_setup(cfg)).map_err(numerical)?;
                fits.push(fit_json(&fit));
                fit.gamma_i0
            }
        };
        resolved
            .push(DephasingModel::new(cfg.dephasing.gamma_bg, gamma, m.n_p).map_err(numerical)?);
    }
    let info = json!({
        "models": resolved,
        "calibration": target.map(|(_, v)| v),
        "fits": fits,
    });
    Ok((resolved, info))
}

fn sweep_summary(r: &SweepResult) -> Value {
    let peak = r.interior_maximum();
    json!({
        "sigma": r.sigma,
        "dephasing": r.dephasing,
        "points": r.len(),
        "failures": r.failures(),
        "interior_maximum": peak.map(|p| json!({
            "index": p.index,
            "abscissa": p.abscissa,
            "ratio": p.ratio,
        })),
        "ratio_local_maxima": r.ratio_local_maxima(),
        "saturated_points": r.flags.iter().filter(|f| f.saturated).count(),
    })
}

fn check_failures(results: &[SweepResult]) -> Result<(), CliError> {
    let failed: usize = results.iter().map(|r| r.failures()).sum();
    if failed > 0 {
        return Err(CliError::Numerical(format!(
            "{failed} sweep point(s) failed; see the status column of the output files"
        )));
    }
    Ok(())
}

fn cmd_rabi(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let dot = cfg.dot.params();
    let (models, info) = resolve_models(cfg, &cfg.rabi.models)?;
    let areas = cfg.rabi.areas();
    let mut results = Vec::with_capacity(models.len());
    for deph in &models {
        results.push(
            rabi_sweep(cfg.rabi.sigma, deph, &dot, &areas, cfg.numerics.sweep_tol)
                .map_err(numerical)?,
        );
    }
    let header = out.header(&info);
    for (k, r) in results.iter().enumerate() {
        let name = format!("rabi_{k}_np{}.csv", r.dephasing.n_p);
        let path = out.write(&name, |w| r.write_csv(w, &header))?;
        show(&path);
        let (imax, pmax) = r
            .p_b
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc },
            );
        println!(
            "n_p = {}, gamma_i0 = {:.6}: max P_b = {:.4} at area {:.3}",
            r.dephasing.n_p, r.dephasing.gamma_i0, pmax, r.abscissa[imax]
        );
    }
    let summary: Vec<Value> = results.iter().map(sweep_summary).collect();
    let path = out.write_json("rabi_summary.json", info, Value::Array(summary))?;
    show(&path);
    check_failures(&results)
}

fn cmd_ratio(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let gamma_i0 = cfg.dephasing.gamma_i0.ok_or_else(|| ConfigError::Invalid {
        key: "dephasing.gamma_i0".into(),
        reason: "required by `ratio`; obtain it with `fit-dephasing`".into(),
    })?;
    let dot = cfg.dot.params();
    let deph = DephasingModel::new(cfg.dephasing.gamma_bg, gamma_i0, cfg.dephasing.n_p)
        .map_err(numerical)?;
    let energies = cfg.ratio.energies();
    let mut results = Vec::with_capacity(cfg.ratio.sigmas.len());
    for &sigma in &cfg.ratio.sigmas {
        results.push(
            energy_sweep(sigma, &deph, &dot, &energies, cfg.numerics.sweep_tol)
                .map_err(numerical)?,
        );
    }
    let resolved = json!({ "dephasing": deph });
    let header = out.header(&resolved);
    for r in &results {
        let name = format!("ratio_sigma{}.csv", r.sigma);
        let path = out.write(&name, |w| r.write_csv(w, &header))?;
        show(&path);
        match r.interior_maximum() {
            Some(p) => println!(
                "sigma = {} ps: max ratio {:.3} at energy {:.3}",
                r.sigma, p.ratio, p.abscissa
            ),
            None => println!("sigma = {} ps: no interior maximum", r.sigma),
        }
    }
    let summary: Vec<Value> = results.iter().map(sweep_summary).collect();
    let path = out.write_json("ratio_summary.json", resolved, Value::Array(summary))?;
    show(&path);
    check_failures(&results)
}

fn metrics_json(m: &StateMetrics) -> Value {
    json!({
        "concurrence": m.concurrence,
        "fidelity": m.fidelity.fidelity,
        "phi_opt": m.fidelity.phi_opt,
        "coherence": {
            "re": m.coherence.value.re,
            "im": m.coherence.value.im,
            "abs": m.coherence.value.norm(),
            "element": format!("{},{}", basis_label(m.coherence.row), basis_label(m.coherence.col)),
        },
        "visibility_time": m.visibilities.time,
        "visibility_energy_0": m.visibilities.energy_0,
        "visibility_energy_90": m.visibilities.energy_90,
    })
}

/// Sample mean and standard deviation (n − 1); `None` deviation for one value.
fn mean_std(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, None);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

struct Reconstruction {
    data: TomographyDataset,
    linear: TwoQubitState,
    linear_physical: bool,
    mle: TwoQubitState,
    iterations: usize,
    converged: bool,
    metrics: StateMetrics,
    fidelity_to_model: f64,
}

fn reconstruct_one(
    cfg: &RunConfig,
    rho: &TwoQubitState,
    stream: u64,
) -> Result<Reconstruction, CliError> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let data = simulate_counts_with(rho, &standard_settings(), cfg.tomography.n_mean, &mut rng)
        .map_err(numerical)?;
    let linear = reconstruct_linear(&data).map_err(numerical)?;
    let mle = reconstruct_mle(&data, &cfg.tomography.mle_options()).map_err(numerical)?;
    let metrics = metrics(&mle.state).map_err(numerical)?;
    let fidelity_to_model = state_fidelity(rho, &mle.state).map_err(numerical)?;
    Ok(Reconstruction {
        data,
        linear: linear.state,
        linear_physical: linear.physical,
        mle: mle.state,
        iterations: mle.iterations,
        converged: mle.converged,
        metrics,
        fidelity_to_model,
    })
}

fn cmd_entangle(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let tb = &cfg.timebin;
    let (v_coh, source) = match tb.source() {
        CoherenceSource::Fixed(v) => (v, json!({ "source": "configured" })),
        CoherenceSource::TargetFidelity(f) => (
            v_coh_for_fidelity(f, tb.epsilon, tb.pairing_weight).map_err(numerical)?,
            json!({ "source": "target_fidelity", "target_fidelity": f }),
        ),
        CoherenceSource::Dynamics => {
            let dot = cfg.dot.params();
            let drive = cfg.pulse.drive(&cfg.dot)?;
            let deph = cfg.dephasing.model_or_zero();
            let traj = evolve(
                &QdDensityMatrix::ground(),
                &drive,
                &dot.decay,
                &deph,
                drive.window(),
                cfg.numerics.tol,
            )
            .map_err(numerical)?;
            let v = excitation_coherence(&traj, drive.window().1).map_err(numerical)?;
            (
                v,
                json!({ "source": "dynamics", "drive": drive_json(&drive), "dephasing": deph }),
            )
        }
    };
    let params = tb.params(v_coh);
    let rho = model_state(&params).map_err(numerical)?;
    let model_metrics = metrics(&rho).map_err(numerical)?;

    let runs: Vec<Reconstruction> = (0..cfg.tomography.seeds as u64)
        .into_par_iter()
        .map(|k| reconstruct_one(cfg, &rho, k))
        .collect::<Result<_, _>>()?;

    let column = |f: &dyn Fn(&Reconstruction) -> f64| -> Value {
        let v: Vec<f64> = runs.iter().map(f).collect();
        let (mean, std) = mean_std(&v);
        json!({ "mean": mean, "std": std })
    };
    let stats = json!({
        "concurrence": column(&|r| r.metrics.concurrence),
        "fidelity": column(&|r| r.metrics.fidelity.fidelity),
        "coherence_abs": column(&|r| r.metrics.coherence.value.norm()),
        "visibility_time": column(&|r| r.metrics.visibilities.time),
        "visibility_energy_0": column(&|r| r.metrics.visibilities.energy_0),
        "visibility_energy_90": column(&|r| r.metrics.visibilities.energy_90),
        "fidelity_to_model": column(&|r| r.fidelity_to_model),
    });
    let per_seed: Vec<Value> = runs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            json!({
                "stream": k,
                "total_counts": r.data.total(),
                "linear_physical": r.linear_physical,
                "mle_iterations": r.iterations,
                "mle_converged": r.converged,
                "fidelity_to_model": r.fidelity_to_model,
                "metrics": metrics_json(&r.metrics),
            })
        })
        .collect();

    let resolved = json!({
        "v_coh": v_coh,
        "v_coh_source": source,
        "accidental_fraction": params.accidental_fraction(),
        "rng": "ChaCha20, one stream per dataset, stream k for dataset k",
    });
    let header = out.header(&resolved);
    let first = &runs[0];
    let files = [
        out.write("state_model.csv", |w| {
            write_density_csv(w, rho.matrix(), &header)
        })?,
        out.write("state_linear.csv", |w| {
            write_density_csv(w, first.linear.matrix(), &header)
        })?,
        out.write("state_mle.csv", |w| {
            write_density_csv(w, first.mle.matrix(), &header)
        })?,
        out.write("counts.txt", |w| first.data.write_text(w, &header))?,
        out.write_json(
            "entangle.json",
            resolved,
            json!({
                "model": metrics_json(&model_metrics),
                "reconstruction_statistics": stats,
                "reconstructions": per_seed,
            }),
        )?,
    ];
    for f in &files {
        show(f);
    }

    let (f_mean, f_std) = mean_std(
        &runs
            .iter()
            .map(|r| r.metrics.fidelity.fidelity)
            .collect::<Vec<_>>(),
    );
    let (c_mean, c_std) = mean_std(
        &runs
            .iter()
            .map(|r| r.metrics.concurrence)
            .collect::<Vec<_>>(),
    );
    let fmt_std = |s: Option<f64>| s.map_or("n/a".to_string(), |s| format!("{s:.4}"));
    println!(
        "model (v_coh = {v_coh:.5}): F = {:.4}, C = {:.4}, |coherence| = {:.4}",
        model_metrics.fidelity.fidelity,
        model_metrics.concurrence,
        model_metrics.coherence.value.norm()
    );
    println!(
        "MLE over {} datasets: F = {f_mean:.4} ± {}, C = {c_mean:.4} ± {}",
        runs.len(),
        fmt_std(f_std),
        fmt_std(c_std)
    );
    if runs.iter().any(|r| !r.converged) {
        eprintln!("warning: some MLE runs hit the iteration cap; see entangle.json");
    }
    Ok(())
}

fn cmd_fit_dephasing(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let (target, calibration) = calibration_target(cfg)?;
    let setup = fit_setup(cfg);
    let fits: Vec<GammaFit> = cfg
        .calibration
        .fit_np
        .iter()
        .map(|&n_p| fit_gamma_i0(n_p, target, &setup))
        .collect::<Result<_, _>>()
        .map_err(numerical)?;
    for f in &fits {
        println!(
            "n_p = {}: gamma_i0 = {:.6} (contrast {:.4}, target {:.4})",
            f.n_p, f.gamma_i0, f.achieved, target
        );
    }
    let results: Vec<Value> = fits.iter().map(fit_json).collect();
    let resolved = json!({ "calibration": calibration, "fit_setup": setup });
    let path = out.write_json("fit.json", resolved, Value::Array(results))?;
    show(&path);
    Ok(())
}
