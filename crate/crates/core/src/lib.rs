//! Finite-element simulation and quantitative verification of a linearly
//! viscoelastic solid confined to a half-space by a penalized Signorini
//! contact condition.
//!
//! The library assembles P1 tetrahedral discretizations of the Kelvin-Voigt
//! equations of motion with a nodal penalty on the contact boundary,
//! integrates them with an average-acceleration Newmark scheme driven by a
//! semismooth Newton corrector, and post-processes trajectories against the
//! closed-form energy, violation and exponential-decay estimates of the
//! model.
//!
//! All numerics are generic over the scalar type through [`Real`]; the
//! aliases below fix the `f64` instantiations used by the command-line
//! harness.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod material;
pub mod penalty;
pub mod real;
pub mod sparse;
pub mod vtk;

pub use error::{Error, Result};
pub use real::{real, Real};

/// `f64` instantiations of the core types.
pub type MaterialParams = material::MaterialParams<f64>;
pub type SymTensor2 = material::SymTensor2<f64>;
pub type HalfSpace = geometry::HalfSpace<f64>;
pub type Mesh = geometry::Mesh<f64>;
pub type GapField = geometry::GapField<f64>;
pub type SparseSym = sparse::SparseSym<f64>;
pub type FemSystem = fem::FemSystem<f64>;
pub type KornEstimate = fem::KornEstimate<f64>;
pub type PenaltyState = penalty::PenaltyState<f64>;
pub type State = dynamics::State<f64>;
pub type TimeGrid = dynamics::TimeGrid<f64>;
pub type ProblemData = dynamics::ProblemData<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type EnergyRow = analysis::EnergyRow<f64>;
pub type EnergyTrace = analysis::EnergyTrace<f64>;
pub type ConstantsReport = analysis::ConstantsReport<f64>;
