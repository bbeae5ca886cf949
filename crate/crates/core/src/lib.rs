//! Taylor-augmented reduced-order modelling of the 2D acoustic wave equation
//! `θ u_tt − Δu = f`, `θ = 1/c²`.
//!
//! The pipeline: full-order Q1 spectral-element solves ([`sem`]), the
//! cascade of parameter derivatives ([`cascade`]), streaming snapshot
//! compression ([`basis`]), Galerkin reduced solves at perturbed parameters
//! ([`rom`]) and a line-search harness on receiver traces ([`inverse`]).

pub mod basis;
pub mod cascade;
pub mod config;
pub mod error;
pub mod field;
pub mod grid;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod problem;
pub mod rom;
pub mod sem;

pub use basis::{
    build_augmented_basis, build_level_basis, gs_try_accept, pod_basis, BasisStats, Decision,
    GsBuilder, InnerProduct, ProductKind, Provenance, SnapshotBasis, Truncation,
};
pub use cascade::{cascade_rhs, frechet_fd_check, solve_cascade, CascadeSolver, CascadeState};
pub use config::{load_config, BcKind, ConfigDoc, InnerKind, PodInner, SimConfig};
pub use error::{Error, Result};
pub use field::{make_perturbation, ParameterField, Perturbation, PerturbationShape};
pub use grid::{Grid, NodeKind};
pub use inverse::{
    add_noise, cost, line_search, line_search_multi, record, AlphaGrid, LineSearchResult,
    ReceiverLine, TraceSet,
};
pub use problem::{MorBasis, Problem};
pub use rom::{
    project, reconstruct, relative_error_series, taylor_reconstruct, ErrorSeries,
    ReducedOperators, ReducedState, ReducedSystem,
};
pub use sem::{
    assemble_damping, assemble_mass, inject_source, ricker, solve_full, DiagonalOperator,
    FullSolver, Leapfrog, StiffnessOperator, WaveState,
};
