//! Schwarz symmetrization and quantitative comparison estimates for the
//! Dirichlet Poisson problem on planar grids.
//!
//! The crate is organised the way an audit runs:
//!
//! * [`geometry`] rasterizes domains and measures them (area, perimeter,
//!   Fraenkel asymmetry);
//! * [`field`] and [`expr`] carry cell-centred data and source expressions;
//! * [`rearrangement`] builds distribution functions, decreasing and Schwarz
//!   rearrangements, Lorentz-type norms and Hardy–Littlewood deficits;
//! * [`elliptic`] solves `-Δu = f` on the grid and the symmetrized problem in
//!   closed form;
//! * [`audit`] evaluates every stability functional on a solved instance and
//!   collects the verdicts into a [`audit::DeficitReport`].

pub mod audit;
pub mod elliptic;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod numerics;
pub mod rearrangement;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use geometry::{BallSpec, DomainSpec, GridDomain};
pub use rearrangement::{MonotoneProfile, RadialField, Reading};
