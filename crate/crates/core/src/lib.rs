//! Hamiltonian field systems whose large-mass limit is the Schrödinger equation.
//!
//! The full system couples a slow canonical pair `(p, q)` to hidden pairs
//! `(P_j, Q_j)` and `(π_j, η_j)` oscillating at frequency `m`. Eliminating the
//! hidden pairs adiabatically leaves `ψ = (q + i p)/√2` obeying
//! `i ∂_t ψ = (−∂²/(2m) + V) ψ`.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below cover the common case.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod run;
mod scalar;
pub mod snapshot;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub use dynamics::{evolve, IntegratorConfig, Observable, Scheme, State, Trajectory};
pub use fields::{FullState, Mass, PotentialSpec, ReducedState};
pub use grid::{Boundary, Grid, Location, ScalarField, VectorField};

pub type GridF64 = grid::Grid<f64>;
pub type ScalarFieldF64 = grid::ScalarField<f64>;
pub type VectorFieldF64 = grid::VectorField<f64>;
pub type ReducedStateF64 = fields::ReducedState<f64>;
pub type FullStateF64 = fields::FullState<f64>;
pub type MassF64 = fields::Mass<f64>;
pub type StateF64 = dynamics::State<f64>;
pub type EigenPairF64 = spectral::EigenPair<f64>;
pub type UnitSystemF64 = units::UnitSystem<f64>;

pub type GridF32 = grid::Grid<f32>;
pub type ScalarFieldF32 = grid::ScalarField<f32>;
pub type ReducedStateF32 = fields::ReducedState<f32>;
pub type FullStateF32 = fields::FullState<f32>;
pub type MassF32 = fields::Mass<f32>;
