//! Numerical laboratory for the restricted circular planar 3-body problem
//! (RCP3BP): a massless asteroid moving in the rotating field of a Sun of
//! mass 1-mu and a Jupiter of mass mu on circular orbits.
//!
//! The crate provides
//!
//! - [`kepler`]: the integrable two-body machinery (Kepler equation,
//!   anomalies, Delaunay / polar / rotating-Cartesian / Jupiter-centered
//!   charts and their transforms),
//! - [`dynamics`]: the mu > 0 Hamiltonians in all charts, the mollified
//!   Hamiltonian with the Jupiter singularity capped, region classification,
//!   adaptive integration with event location, the linear transition-zone
//!   flow and the Poincare return map,
//! - [`collision`]: the collision set in Delaunay variables and the sets
//!   V and V_delta of ellipses crossing Jupiter's circle,
//! - [`levi_civita`]: Levi-Civita regularization of the Jupiter collision,
//!   the regularized Hamiltonian, its quadratic model and the local
//!   collision manifold,
//! - [`diophantine`]: continued fractions, constant-type numbers, the
//!   bounded-quotient Cantor sets with their gap structure, the
//!   inhomogeneous Dirichlet solver and circle-rotation orbit statistics,
//! - [`lab`]: desk-scale experiments (collision shooting through the
//!   section-curve intersection argument, transition-zone segment
//!   evolution, density scans over mu, recurrence scans),
//! - [`config`] and [`export`]: experiment configuration and CSV /
//!   JSON-lines output.

pub mod angles;
pub mod collision;
pub mod config;
pub mod diophantine;
pub mod dynamics;
pub mod export;
pub mod kepler;
pub mod lab;
pub mod levi_civita;

pub use kepler::{DelaunayState, JupiterCenteredState, PolarState, RotatingCartesianState};
