//! fraclab: a numerical laboratory for the spectral fractional Laplacian
//! with mixed Dirichlet-Neumann boundary conditions.
//!
//! The crate discretizes `(-Delta)^s` (1/2 < s < 1) on intervals and
//! axis-aligned rectangles through the eigendecomposition of the mixed-BC
//! finite-difference Laplacian, solves the same problems a second time
//! through the degenerate-elliptic extension on a truncated weighted
//! cylinder, and verifies the functional inequalities and maximum
//! principles that connect the two routes: trace and fractional Hardy
//! inequalities, weighted Sobolev inequalities, quantitative Hopf-type
//! lower bounds, ratio bounds via level-set truncation, and mean-value
//! probes for the torsion function.
//!
//! Entry points:
//! - [`domain`]: grids, boundary partitions, distance field, bump sources.
//! - [`operator`]: mixed-BC Laplacian and its spectral basis.
//! - [`fractional`]: fractional powers, solves, norms, closed-form constants.
//! - [`extension`]: weighted-cylinder solver (the independent oracle).
//! - [`inequalities`]: empirical verification of the inequalities.
//! - [`maxprinciple`]: maximum-principle and Hopf-type verification.
//! - [`report`] / [`runner`]: config-driven verification runs (also behind
//!   the `fraclab` binary).
//!
//! Every capability has a runnable demo under `examples/`.

pub mod domain;
pub mod error;
pub mod extension;
pub mod fractional;
pub mod gamma;
pub mod inequalities;
pub mod maxprinciple;
pub mod operator;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
