//! Petrov–Galerkin discretization of a one-dimensional nonlocal
//! convection–diffusion problem with horizon `δ`.
//!
//! The trial space is continuous Lagrange of order `p` on a mesh of the
//! extended domain `(-δ, 1 + δ)`; the test space has order `p + δp`. The
//! mixed system `G ψ + B u = F`, `Bᵀ ψ = 0` is solved through its Schur
//! complement, and `ψ` drives Dörfler-marked adaptive refinement.

pub mod adapt;
pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod mesh;
pub mod quadrature;
pub mod solver;
pub mod space;

pub use adapt::{adaptive_loop, dorfler_mark, localize_indicator, AdaptiveConfig, IndicatorSet};
pub use analysis::ExperimentRecord;
pub use assembly::{assemble_system, MixedSystem, TestNorm};
pub use error::{Error, Result};
pub use experiments::{run, Problem, ProblemKind, RunConfig};
pub use kernel::KernelPair;
pub use mesh::Mesh1d;
pub use quadrature::HorizonQuadrature;
pub use solver::{solve_mixed, MixedSolution};
pub use space::Space;
