//! Linear-elasticity FEM on hexahedral meshes with one non-conforming
//! interface, coupled through augmented-Lagrangian surface terms.
//!
//! The mesh on each side of the interface is independent; continuity is
//! enforced weakly by a mean-traction multiplier plus a quadratic penalty,
//! integrated over the fine-side (slave) faces. No multiplier degrees of
//! freedom are introduced: the multiplier is expressed through the
//! displacement field and the system is solved once.
//!
//! Core math is generic over the scalar type; `f64` aliases are exported
//! at the crate root for everyday use.

pub mod cases;
pub mod config;
pub mod elasticity;
pub mod export;
pub mod interface;
pub mod mesh;
pub mod projection;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Scalar type for all numerics: `f32` or `f64`.
pub trait Real: RealField + FromPrimitive + Copy {}
impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling `f64` literals into the generic scalar type.
#[inline]
pub(crate) fn num<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("interface error: {0}")]
    Interface(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("projection did not converge after {iterations} iterations (residual {residual})")]
    ProjectionDiverged { iterations: usize, residual: f64 },
    #[error("singular isoparametric map: |det J| = {0}")]
    SingularMap(f64),
    #[error("invalid material: {0}")]
    Material(String),
    #[error("boundary condition error: {0}")]
    BoundaryCondition(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub type Mesh64 = mesh::Mesh<f64>;
pub type Material64 = elasticity::Material<f64>;
pub type PlaneEquation64 = projection::PlaneEquation<f64>;
pub type ProjectionResult64 = projection::ProjectionResult<f64>;
pub type CouplingBlocks64 = interface::CouplingBlocks<f64>;
pub type GlobalSystem64 = solver::GlobalSystem<f64>;
pub type SolveReport64 = solver::SolveReport<f64>;
