use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use riemflow::bench::io::{read_matrix, read_matrix_stack, write_matrix};
use riemflow::bench::sweep::{read_trajectory_csv, RunEntry};
use riemflow::bench::{
    curvature_profile, generate, instance_from_matrices, load_instance, save_instance, sweep,
    InstanceSpec, Manifest, ProblemKind, RunOptions,
};
use riemflow::diagnostics::{energy_monotonicity, fit_rate, scaled_gap_decay, stagnation_time};
use riemflow::ProblemInstance;

#[derive(Parser)]
#[command(name = "riemflow", version, about = "Damped geodesic flow benchmarks on Riemannian manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a benchmark instance and write it as JSON.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output instance file.
        #[arg(long, default_value = "instance.json")]
        out: PathBuf,
        /// Also write the objective matrices (CSV) into this directory.
        #[arg(long)]
        export_matrices: Option<PathBuf>,
    },
    /// Integrate a single damping value.
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Integrate a list of damping values in parallel.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated damping values; defaults to the reference list for the problem.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Worker threads (overrides RIEMFLOW_THREADS).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute rate fits and energy monotonicity from trajectory CSVs.
    Diagnose {
        /// Trajectory CSV files or sweep directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Fit window start (default: last decade before stagnation).
        #[arg(long, requires = "window_hi")]
        window_lo: Option<f64>,
        #[arg(long, requires = "window_lo")]
        window_hi: Option<f64>,
    },
    /// Print the run table of a sweep manifest.
    Report {
        /// manifest.json or the sweep directory holding it.
        path: PathBuf,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, default_value = "eigenvalue")]
    problem: ProblemKind,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Rows of G (eigenvalue) or number of matrices (karcher).
    #[arg(long)]
    m: Option<usize>,
    /// Matrix size.
    #[arg(long)]
    n: Option<usize>,
    /// Scaling of the eigenvalue Gram matrix.
    #[arg(long)]
    beta: Option<f64>,
    /// Spectrum range of generated SPD matrices, as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    eig_range: Option<Vec<f64>>,
    /// Start from the full-size benchmark dimensions instead of desk scale.
    #[arg(long)]
    reference_scale: bool,
}

impl SpecArgs {
    fn build(&self) -> Result<InstanceSpec> {
        let mut s = if self.reference_scale {
            InstanceSpec::reference_scale(self.problem, self.seed)
        } else {
            InstanceSpec::desk(self.problem, self.seed)
        };
        if let Some(m) = self.m {
            s.m = m;
        }
        if let Some(n) = self.n {
            s.n = n;
        }
        if let Some(b) = self.beta {
            s.beta = b;
        }
        if let Some(r) = &self.eig_range {
            s.eig_range = (r[0], r[1]);
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args)]
struct SourceArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Instance JSON written by `gen` (overrides the generator flags).
    #[arg(long, conflicts_with = "matrices")]
    instance: Option<PathBuf>,
    /// Matrix file (CSV or binary) for eigenvalue/flat, or a stack file or
    /// directory for karcher.
    #[arg(long)]
    matrices: Option<PathBuf>,
}

impl SourceArgs {
    fn load(&self) -> Result<(ProblemInstance, Option<InstanceSpec>)> {
        if let Some(p) = &self.instance {
            return load_instance(p).with_context(|| format!("loading {}", p.display()));
        }
        if let Some(p) = &self.matrices {
            let problem = self.spec.problem;
            let mats = match problem {
                ProblemKind::Karcher => read_matrix_stack(p)?,
                _ => vec![read_matrix(p)?],
            };
            let id = format!("{problem}-{}", p.file_stem().unwrap_or_default().to_string_lossy());
            let inst = instance_from_matrices(problem, mats, self.spec.seed, id)?;
            return Ok((inst, None));
        }
        let spec = self.spec.build()?;
        log::info!("generating {spec:?}");
        Ok((generate(&spec)?, Some(spec)))
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 200.0)]
    horizon: f64,
    /// Clock start (default max(dt, alpha*dt)).
    #[arg(long)]
    time_origin: Option<f64>,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Lower sectional-curvature bound (default: the manifold's, -0.1 on SPD).
    #[arg(long, allow_hyphen_values = true)]
    kmin: Option<f64>,
    /// Working diameter D (default: distance from x0 to the reference minimizer).
    #[arg(long)]
    diameter: Option<f64>,
}

impl SolverArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            dt: self.dt,
            horizon: self.horizon,
            time_origin: self.time_origin,
            record_every: self.record_every,
        }
    }
}

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.prec$}"))
}

fn print_runs(runs: &[RunEntry]) {
    println!("{:>8} {:>9} {:>9} {:>10}  status", "alpha", "fitted", "predicted", "stagnation");
    for r in runs {
        println!(
            "{:>8} {:>9} {:>9.3} {:>10}  {:?}{}",
            r.alpha,
            opt(r.fitted_exponent, 3),
            r.predicted_exponent,
            opt(r.stagnation_time, 1),
            r.status,
            r.message.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()
        );
    }
}

fn run_sweep(
    source: &SourceArgs,
    alphas: Option<Vec<f64>>,
    solver: &SolverArgs,
    threads: Option<usize>,
    out: &Path,
) -> Result<()> {
    let (inst, spec) = source.load()?;
    let profile = curvature_profile(&inst, solver.kmin, solver.diameter)?;
    let alphas = alphas.unwrap_or_else(|| source.spec.problem.reference_alphas().to_vec());
    println!(
        "{}: K_min = {}, K_max = {}, D = {:.4}, delta = {:.4}",
        inst.id, profile.k_min, profile.k_max, profile.diameter, profile.delta
    );
    let outcome = sweep(&inst, spec.as_ref(), &alphas, &solver.options(), &profile, out, threads)?;
    print_runs(&outcome.manifest.runs);
    println!("wrote {}", out.join("manifest.json").display());
    Ok(())
}

fn trajectory_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.to_string_lossy().ends_with(".traj.csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no trajectory files found");
    }
    Ok(files)
}

fn diagnose(paths: &[PathBuf], window: Option<(f64, f64)>) -> Result<()> {
    println!(
        "{:<28} {:>9} {:>7} {:>11} {:>10} {:>10}  W monotone",
        "file", "fitted", "r2", "max dW", "stagnation", "t2 decay"
    );
    for f in trajectory_files(paths)? {
        let trace = read_trajectory_csv(&f).with_context(|| format!("reading {}", f.display()))?;
        let fit = fit_rate(&trace, window).ok();
        let mono = energy_monotonicity(&trace);
        let decay = scaled_gap_decay(&trace);
        println!(
            "{:<28} {:>9} {:>7} {:>11.3e} {:>10} {:>10}  {}",
            f.file_name().unwrap_or_default().to_string_lossy(),
            opt(fit.map(|x| x.fitted_exponent), 3),
            opt(fit.map(|x| x.r_squared), 3),
            mono.max_increase,
            opt(stagnation_time(&trace), 1),
            decay.map_or("-".into(), |d| if d.is_decreasing() { "yes" } else { "no" }.to_string()),
            if mono.passed { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn report(path: &Path) -> Result<()> {
    let file = if path.is_dir() { path.join("manifest.json") } else { path.to_path_buf() };
    let m = Manifest::load(&file).with_context(|| format!("reading {}", file.display()))?;
    let p = &m.curvature_profile;
    println!("instance   {} (hash {})", m.instance_id, &m.instance_hash[..16]);
    if let Some(seed) = m.seed {
        println!("seed       {seed}");
    }
    println!("oracle     f* = {:e} via {} (|grad| = {:.2e})", m.oracle.fstar, m.oracle.method, m.oracle.grad_norm);
    println!(
        "curvature  K in [{}, {}], D = {:.4}, zeta = {:.4}, delta = {:.4}",
        p.k_min, p.k_max, p.diameter, p.zeta, p.delta
    );
    println!("solver     dt = {}, T = {}", m.options.dt, m.options.horizon);
    print_runs(&m.runs);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().cmd {
        Cmd::Gen { spec, out, export_matrices } => {
            let spec = spec.build()?;
            let inst = generate(&spec)?;
            save_instance(&out, &inst, Some(&spec))?;
            if let Some(dir) = export_matrices {
                std::fs::create_dir_all(&dir)?;
                for (j, a) in inst.objective.matrices().into_iter().enumerate() {
                    write_matrix(&dir.join(format!("A{j:03}.csv")), a)?;
                }
            }
            let o = inst.oracle()?;
            println!("{}: f* = {:e} ({}), wrote {}", inst.id, o.fstar, o.method, out.display());
        }
        Cmd::Run { source, alpha, solver, out } => run_sweep(&source, Some(vec![alpha]), &solver, Some(1), &out)?,
        Cmd::Sweep { source, alphas, solver, threads, out } => run_sweep(&source, alphas, &solver, threads, &out)?,
        Cmd::Diagnose { paths, window_lo, window_hi } => diagnose(&paths, window_lo.zip(window_hi))?,
        Cmd::Report { path } => report(&path)?,
    }
    Ok(())
}
