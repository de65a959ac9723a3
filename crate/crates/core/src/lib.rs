//! Algebraically stabilized P1 finite element methods for steady
//! convection-diffusion-reaction problems, with discrete maximum principle
//! checks and convergence studies.
//!
//! Every numerical type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

pub mod analysis;
pub mod assembly;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod stab;
pub mod vtk;

pub use analysis::{
    check_general_dmp, check_global_dmp, check_local_dmp, convergence_orders, error_norms, linearity_preservation_probe, DmpKind,
    DmpReport, ErrorNorms, ErrorTableRow,
};
pub use assembly::{assemble, assemble_with, AlgebraicSystem, AssemblyOptions, ProblemSpec};
pub use error::{Error, Result};
pub use experiments::{run_case, CaseRun, Example};
pub use mesh::{generate_mesh, Mesh, MeshFamily, MeshKind};
pub use quadrature::{quadrature_integrate, TriangleRule};
pub use scalar::Scalar;
pub use solver::{solve, LinearWorkspace, SolveResult, SolverOptions};
pub use sparse::{Pattern, SparseMatrix};
pub use stab::{StabScheme, Stabilizer};

pub type Mesh64 = Mesh<f64>;
pub type SparseMatrix64 = SparseMatrix<f64>;
pub type ProblemSpec64 = ProblemSpec<f64>;
pub type AlgebraicSystem64 = AlgebraicSystem<f64>;
pub type Stabilizer64 = Stabilizer<f64>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type SolveResult64 = SolveResult<f64>;

pub type Mesh32 = Mesh<f32>;
pub type SparseMatrix32 = SparseMatrix<f32>;
pub type AlgebraicSystem32 = AlgebraicSystem<f32>;
pub type SolveResult32 = SolveResult<f32>;
