//! Unfitted finite element toolkit for second-order elliptic interface
//! problems: level-set cut geometry, Nitsche-type couplings on piecewise
//! linear simplicial meshes, and a geometric multigrid solver whose smoother
//! treats the interface unknowns directly.
//!
//! The crate is organized bottom-up:
//!
//! * [`geom`], [`quadrature`] — simplex geometry and quadrature rules;
//! * [`sparse`], [`dense`], [`solvers`] — CSR matrices and solver kernels;
//! * [`mesh`] — nested triangulations of a box and P1 prolongation;
//! * [`cut_geometry`] — level sets, element classification, sub-simplex
//!   decomposition of cut elements, extended domains, ghost faces;
//! * [`cut_space`] — the doubled-DOF space on cut meshes and the transforms
//!   between its two-copy and hat/jump coefficient bases;
//! * [`assembly`], [`problem`] — bilinear forms of the interface couplings
//!   and the manufactured test problems;
//! * [`multigrid`] — non-nested prolongation, interface-corrected smoothing,
//!   and the V-cycle driver.
//!
//! All parallel code paths (behind the default `parallel` feature) produce
//! bitwise-identical results to the sequential fallback; see [`par`].

pub mod error;
pub mod par;

pub mod geom;
pub mod quadrature;

pub mod dense;
pub mod solvers;
pub mod sparse;

pub mod mesh;

pub mod cut_geometry;
pub mod cut_space;
pub mod assembly;
pub mod experiments;
pub mod multigrid;
pub mod problems;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
