//! Benchmark instances, reference minima, and α-sweeps with file output.

pub mod generate;
pub mod io;
pub mod oracle;
pub mod spec;
pub mod sweep;

pub use generate::{
    gen_eigenvalue_instance, gen_flat_instance, gen_karcher_instance, generate, instance_from_matrices,
    log_euclidean_mean,
};
pub use oracle::{eigenvalue_oracle, karcher_oracle, KARCHER_TOL};
pub use spec::{InstanceSpec, ProblemKind};
pub use io::{instance_hash, load_instance, save_instance};
pub use sweep::{curvature_profile, run_alpha, sweep, Manifest, RunOptions, RunStatus, RunSummary};
