//! Solver for the Schrödinger–Newton (gravitational Schrödinger) equation.
//!
//! The crate is generic over the floating-point scalar through [`Real`];
//! the `f64` aliases at the crate root cover the common case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod oracle;
pub mod physical;
pub mod poisson;
pub mod quadrature;
pub mod real;
pub mod shoot;
pub mod state;

pub use error::{Error, Result};
pub use evolve::{continuity_residual, evolve, evolve_steps, step, NonlinearityKind, ObservableSeries};
pub use grid::{make_grid, RadialField, RadialGrid, SpacingKind};
pub use oracle::{scf_oracle, OracleSolution, ScfSettings};
pub use physical::{
    energy_breakdown, gravitational_bohr_radius, hamiltonian_functional, rescale_to_physical, EnergyBreakdown,
    PhysicalParams, PhysicalProfile,
};
pub use poisson::{radial_laplacian, solve_radial_poisson};
pub use quadrature::integrate_radial;
pub use real::Real;
pub use shoot::{shoot_gamma0, solve_spectrum, solve_state, ShootOutcome, ShootSettings, UniversalSolution};
pub use state::RadialState;

pub type Grid = RadialGrid<f64>;
pub type Field = RadialField<f64>;
pub type Solution = UniversalSolution<f64>;
pub type Params = PhysicalParams<f64>;
pub type Profile = PhysicalProfile<f64>;
pub type Energies = EnergyBreakdown<f64>;
pub type State = RadialState<f64>;
pub type Nonlinearity = NonlinearityKind<f64>;
pub type Series = ObservableSeries<f64>;
