//! Singular exponents for the plane-angle model problem of second-order
//! elliptic systems.
//!
//! Solutions of `L_A u = 0` on a plane angle under Dirichlet, mixed, or
//! Neumann boundary conditions decompose into radial terms `r^λ v(φ)`; the
//! admissible exponents λ are the eigenvalues of an operator pencil. This
//! crate locates those exponents by two independent routes:
//!
//! * an algebraic route that factors the coefficient tuple through its
//!   standard root `V = (S + iI)D`, assembles the boundary-condition matrix
//!   `M_{λ,α}` from branch powers of `Z_α`, and finds the zeros of
//!   `det M_{λ,α}` via the argument principle ([`standard_root`],
//!   [`bc_matrices`], [`exponent_solver`]);
//! * an ODE route that integrates the angular system directly and locates
//!   zeros of a boundary determinant ([`ode_oracle`]).
//!
//! [`ellipticity`] classifies tuples along the ladder strongly elliptic /
//! Neumann well-posed / contractive Neumann well-posed / formally positive,
//! and [`appendix_lab`] hosts randomized checks of the numerical-range and
//! accretivity lemmas that underpin the exponent bounds.

pub mod appendix_lab;
pub mod bc_matrices;
pub mod core_types;
pub mod ellipticity;
mod error;
pub mod exponent_solver;
pub mod matfun;
pub mod ode_oracle;
pub mod standard_root;

pub use core_types::{AngleConfig, AngleRegime, BoundaryCondition, EllipticTuple, TupleInput};
pub use error::{PencilError, Result};
pub use standard_root::StandardRoot;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense real matrix used throughout the crate.
pub type RMatrix = nalgebra::DMatrix<f64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
