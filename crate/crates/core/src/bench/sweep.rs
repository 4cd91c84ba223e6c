//! α-sweeps: one integration per damping value, diagnostics, and file output.
//!
//! Output layout of a sweep directory:
//!
//! * `instance.json`: the instance as read by [`super::io::load_instance`].
//! * `alpha-<α>.traj.csv`: `t,f_gap,t2_f_gap,grad_norm,speed,energy,dist_to_ref,containment`.
//! * `alpha-<α>.diag.csv`: `t,W,scaled_gap,h,subcritical_W`.
//! * `alpha-<α>.summary.json`: [`RunSummary`].
//! * `plot_data.csv`: `alpha,t,f_gap,t2_f_gap` for every run.
//! * `manifest.json`: [`Manifest`], written last.
//!
//! Cells that are undefined (the scaled gap after stagnation, the sub-critical
//! energy when `α > δ`) are left empty.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::{fmt_f64, instance_hash, save_instance};
use super::spec::InstanceSpec;
use crate::curvature::CurvatureProfile;
use crate::diagnostics::{
    distance_trace, energy_monotonicity, energy_trace, fit_distance_rate, fit_rate,
    scaled_gap_decay, stagnation_time, subcritical_energy, subcritical_monotonicity, DecadeDecay,
    EnergyTrace, MonotonicityReport, RateFit, SubcriticalEnergy,
};
use crate::error::{input, Error, Result};
use crate::integrator::{solve, SolverConfig, StepFailure, Trajectory};
use crate::objectives::ObjectiveKind;
use crate::problem::{OracleSummary, ProblemInstance};
use crate::tol;

/// Lower curvature bound assumed for the SPD cone unless overridden.
pub const SPD_KMIN_DEFAULT: f64 = -0.1;

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "RIEMFLOW_THREADS";

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "t",
    "f_gap",
    "t2_f_gap",
    "grad_norm",
    "speed",
    "energy",
    "dist_to_ref",
    "containment",
];

pub const DIAGNOSTICS_HEADER: [&str; 5] = ["t", "W", "scaled_gap", "h", "subcritical_W"];

/// Curvature profile of an instance.
///
/// `K_min` defaults to the manifold's lower bound, except on the SPD cone
/// where [`SPD_KMIN_DEFAULT`] is used; `D` defaults to `d(x0, zref)`.
pub fn curvature_profile(
    instance: &ProblemInstance,
    k_min: Option<f64>,
    diameter: Option<f64>,
) -> Result<CurvatureProfile> {
    let m = instance.objective.manifold();
    let (lo, hi) = m.curvature_bounds();
    let k_min = k_min.unwrap_or(match instance.objective.kind() {
        ObjectiveKind::Karcher => SPD_KMIN_DEFAULT,
        _ => lo,
    });
    let d = match diameter {
        Some(d) => d,
        None => {
            let oracle = instance.oracle()?;
            m.distance(&instance.x0, &oracle.zref)?.max(f64::EPSILON)
        }
    };
    CurvatureProfile::new(k_min, hi.max(k_min), d)
}

/// Integration settings shared by the runs of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub dt: f64,
    pub horizon: f64,
    /// Clock start; `None` selects [`default_time_origin`] per run.
    pub time_origin: Option<f64>,
    pub record_every: usize,
}

impl RunOptions {
    /// `Δt = 0.1`, `T = 200`, every step recorded.
    pub fn desk() -> Self {
        Self {
            dt: 0.1,
            horizon: 200.0,
            time_origin: None,
            record_every: 1,
        }
    }

    pub fn config(&self, alpha: f64) -> SolverConfig {
        SolverConfig::new(alpha, self.dt, self.horizon)
            .with_time_origin(self.time_origin.unwrap_or(default_time_origin(alpha, self.dt)))
            .with_record_every(self.record_every)
    }
}

/// `max(Δt, αΔt)`: the earliest start at which every damping factor
/// `1 − αΔt/t_k` lies in `[0, 1)`.
pub fn default_time_origin(alpha: f64, dt: f64) -> f64 {
    (alpha * dt).max(dt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    /// A step failed; output covers the samples before it.
    Failed,
    /// The run produced no usable output.
    Error,
}

/// Per-run diagnostics written to `alpha-<α>.summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub alpha: f64,
    pub config: SolverConfig,
    pub status: RunStatus,
    pub message: Option<String>,
    pub failure: Option<StepFailure>,
    pub samples: usize,
    pub predicted_exponent: f64,
    pub rate_fit: Option<RateFit>,
    pub energy: Option<MonotonicityReport>,
    pub subcritical: Option<MonotonicityReport>,
    pub stagnation_time: Option<f64>,
    pub scaled_gap_decay: Option<DecadeDecay>,
    pub final_dist_sq: Option<f64>,
    pub distance_fit: Option<RateFit>,
    pub containment_violations: usize,
    pub damping_overshoot: bool,
}

/// A finished run with everything needed to write its files.
#[derive(Clone, Debug)]
pub struct RunAnalysis {
    pub summary: RunSummary,
    pub trajectory: Option<Trajectory>,
    pub energy: Vec<EnergyTrace>,
    pub subcritical: Option<Vec<SubcriticalEnergy>>,
    /// `(t, d(X, zref)²)`.
    pub distance_sq: Vec<(f64, f64)>,
}

/// Integrates one α and evaluates every diagnostic; never fails; problems
/// are reported through the summary status.
pub fn run_alpha(
    instance: &ProblemInstance,
    alpha: f64,
    options: &RunOptions,
    profile: &CurvatureProfile,
) -> RunAnalysis {
    let config = options.config(alpha);
    let mut summary = RunSummary {
        alpha,
        config,
        status: RunStatus::Ok,
        message: None,
        failure: None,
        samples: 0,
        predicted_exponent: profile.rate_exponent(alpha),
        rate_fit: None,
        energy: None,
        subcritical: None,
        stagnation_time: None,
        scaled_gap_decay: None,
        final_dist_sq: None,
        distance_fit: None,
        containment_violations: 0,
        damping_overshoot: false,
    };
    let mut out = RunAnalysis {
        summary: summary.clone(),
        trajectory: None,
        energy: Vec::new(),
        subcritical: None,
        distance_sq: Vec::new(),
    };
    let result = (|| -> Result<()> {
        let traj = solve(instance, &config)?;
        let oracle = instance.oracle()?;
        let m = instance.objective.manifold();
        summary.samples = traj.samples.len();
        summary.containment_violations = traj.containment_violations();
        summary.damping_overshoot = traj.damping_overshoot;
        if let Some(f) = &traj.failure {
            summary.status = RunStatus::Failed;
            summary.message = Some(f.message.clone());
            summary.failure = Some(f.clone());
        }
        let energy = energy_trace(m, &traj, &oracle.zref, oracle.fstar)?;
        summary.energy = Some(energy_monotonicity(&energy));
        summary.stagnation_time = stagnation_time(&energy);
        summary.scaled_gap_decay = scaled_gap_decay(&energy);
        summary.rate_fit = fit_rate(&energy, None).ok();
        if alpha <= profile.delta {
            let sub = subcritical_energy(m, &traj, &oracle.zref, oracle.fstar, alpha, profile)?;
            summary.subcritical = Some(subcritical_monotonicity(&sub));
            out.subcritical = Some(sub);
        }
        let dist = distance_trace(m, &traj, &oracle.zref)?;
        summary.final_dist_sq = dist.last().map(|p| p.1);
        summary.distance_fit = fit_distance_rate(&dist, tol::STAGNATION).ok();
        out.energy = energy;
        out.distance_sq = dist;
        out.trajectory = Some(traj);
        Ok(())
    })();
    if let Err(e) = result {
        log::error!("instance {}, alpha {alpha}: {e}", instance.id);
        summary.status = RunStatus::Error;
        summary.message = Some(e.to_string());
    }
    out.summary = summary;
    out
}

/// Manifest entry for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub alpha: f64,
    pub files: Vec<String>,
    pub fitted_exponent: Option<f64>,
    pub predicted_exponent: f64,
    pub stagnation_time: Option<f64>,
    pub status: RunStatus,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub instance_id: String,
    pub spec: Option<InstanceSpec>,
    pub seed: Option<u64>,
    pub instance_hash: String,
    pub curvature_profile: CurvatureProfile,
    pub oracle: OracleSummary,
    pub options: RunOptions,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(fs::File::open(path)?))?)
    }
}

/// File stem for one α, e.g. `alpha-2.5`.
pub fn run_stem(alpha: f64) -> String {
    format!("alpha-{alpha}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Writes the trajectory and diagnostics CSVs and the summary JSON of a run;
/// returns the file names.
pub fn write_run(outdir: &Path, run: &RunAnalysis) -> Result<Vec<String>> {
    let stem = run_stem(run.summary.alpha);
    let traj_name = format!("{stem}.traj.csv");
    let diag_name = format!("{stem}.diag.csv");
    let summary_name = format!("{stem}.summary.json");
    let mut files = Vec::new();

    if let Some(traj) = &run.trajectory {
        let mut w = csv::Writer::from_path(outdir.join(&traj_name))?;
        w.write_record(TRAJECTORY_HEADER)?;
        for ((s, e), d) in traj.samples.iter().zip(&run.energy).zip(&run.distance_sq) {
            w.write_record([
                fmt_f64(s.t),
                fmt_f64(e.gap),
                opt((!e.stagnated).then_some(e.scaled_gap)),
                fmt_f64(s.grad_norm),
                fmt_f64(e.speed),
                fmt_f64(e.w),
                fmt_f64(d.1.sqrt()),
                (s.containment_ok as u8).to_string(),
            ])?;
        }
        w.flush()?;
        files.push(traj_name);

        let mut w = csv::Writer::from_path(outdir.join(&diag_name))?;
        w.write_record(DIAGNOSTICS_HEADER)?;
        for (i, e) in run.energy.iter().enumerate() {
            let sub = run.subcritical.as_ref().map(|s| s[i].w);
            w.write_record([
                fmt_f64(e.t),
                fmt_f64(e.w),
                opt((!e.stagnated).then_some(e.scaled_gap)),
                fmt_f64(e.h),
                opt(sub),
            ])?;
        }
        w.flush()?;
        files.push(diag_name);
    }

    let mut f = BufWriter::new(fs::File::create(outdir.join(&summary_name))?);
    serde_json::to_writer_pretty(&mut f, &run.summary)?;
    f.flush()?;
    files.push(summary_name);
    Ok(files)
}

fn write_plot_data(outdir: &Path, runs: &[RunAnalysis]) -> Result<()> {
    let mut w = csv::Writer::from_path(outdir.join("plot_data.csv"))?;
    w.write_record(["alpha", "t", "f_gap", "t2_f_gap"])?;
    for run in runs {
        for e in &run.energy {
            w.write_record([
                fmt_f64(run.summary.alpha),
                fmt_f64(e.t),
                fmt_f64(e.gap),
                opt((!e.stagnated).then_some(e.scaled_gap)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory CSV back into an energy trace; `h` is rebuilt from
/// `dist_to_ref` and stagnation from `f_gap < 1e-12`.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<EnergyTrace>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.iter().ne(TRAJECTORY_HEADER) {
        return input(format!("{}: unexpected header {:?}", path.display(), headers));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Input(format!("{}: bad number '{s}'", path.display())))
    };
    let mut stagnated = false;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let (t, gap, speed, w, d) = (num(&rec[0])?, num(&rec[1])?, num(&rec[4])?, num(&rec[5])?, num(&rec[6])?);
        stagnated |= gap < tol::STAGNATION;
        out.push(EnergyTrace {
            t,
            gap,
            speed,
            w,
            scaled_gap: t * t * gap,
            h: 0.5 * d * d,
            stagnated,
        });
    }
    Ok(out)
}

/// Worker count: the explicit request, else `RIEMFLOW_THREADS`, else rayon's
/// default (`0`).
pub fn thread_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .unwrap_or(0)
}

/// Results of a sweep, in the order of the requested α values.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub manifest: Manifest,
    pub runs: Vec<RunAnalysis>,
}

/// Runs every α in parallel and writes the sweep directory.
///
/// Individual run failures are recorded in the manifest; only I/O and setup
/// errors abort the sweep.
pub fn sweep(
    instance: &ProblemInstance,
    spec: Option<&InstanceSpec>,
    alphas: &[f64],
    options: &RunOptions,
    profile: &CurvatureProfile,
    outdir: &Path,
    threads: Option<usize>,
) -> Result<SweepOutcome> {
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return input(format!("alpha values must be positive, got {a}"));
    }
    let oracle = instance.oracle()?;
    fs::create_dir_all(outdir)?;
    save_instance(&outdir.join("instance.json"), instance, spec)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads))
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let results: Vec<Result<(RunAnalysis, Vec<String>)>> = pool.install(|| {
        alphas
            .par_iter()
            .map(|&alpha| {
                let run = run_alpha(instance, alpha, options, profile);
                let files = write_run(outdir, &run)?;
                log::info!(
                    "alpha {alpha}: {:?}, fitted exponent {:?}",
                    run.summary.status,
                    run.summary.rate_fit.map(|f| f.fitted_exponent)
                );
                Ok((run, files))
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(results.len());
    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        let (run, files) = r?;
        entries.push(RunEntry {
            alpha: run.summary.alpha,
            files,
            fitted_exponent: run.summary.rate_fit.map(|f| f.fitted_exponent),
            predicted_exponent: run.summary.predicted_exponent,
            stagnation_time: run.summary.stagnation_time,
            status: run.summary.status,
            message: run.summary.message.clone(),
        });
        runs.push(run);
    }
    write_plot_data(outdir, &runs)?;

    let manifest = Manifest {
        instance_id: instance.id.clone(),
        spec: spec.cloned(),
        seed: spec.map(|s| s.seed),
        instance_hash: instance_hash(instance),
        curvature_profile: *profile,
        oracle: oracle.into(),
        options: *options,
        runs: entries,
    };
    let mut f = BufWriter::new(fs::File::create(outdir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut f, &manifest)?;
    f.flush()?;
    Ok(SweepOutcome { manifest, runs })
}
