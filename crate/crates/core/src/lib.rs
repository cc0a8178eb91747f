//! Numerical laboratory for hyperbolic surfaces in projective 3-space.
//!
//! The crate is organized around the coefficient quadruple (β, γ, V, W) of
//! the canonical linear system in asymptotic coordinates:
//!
//! * [`grid`], [`calculus`] — masked fields and high-order finite
//!   differences;
//! * [`coeffs`], [`classify`], [`invariants`], [`symmetry`] — the
//!   Gauss–Codazzi residuals, class membership tests, invariant forms and
//!   exact symmetries;
//! * [`goursat`], [`families`] — characteristic integration of u_xy = F(u)
//!   and the exact/ODE-constructible surface families;
//! * [`frames`], [`plucker`], [`mesh`] — transport of the moving-frame
//!   systems (4x4, 6x6 with spectral parameter, 8x8), the line-geometry
//!   embedding and mesh export;
//! * [`spectral`] — scalar spectral problems evaluated as residuals;
//! * [`wcong`] — the scalar Dirac equation, W-congruence transforms and
//!   the Bäcklund constructions.

pub mod calculus;
pub mod classify;
pub mod coeffs;
pub mod error;
pub mod families;
pub mod frames;
pub mod goursat;
pub mod grid;
pub mod invariants;
pub mod io;
pub mod mesh;
pub mod plucker;
pub mod report;
pub mod spectral;
pub mod stencil;
pub mod symmetry;
pub mod wcong;

pub use calculus::{partial_derivative, Axis};
pub use classify::{classify, ClassReport, ClassVerdict};
pub use coeffs::{derived_quantities, gc1_residual, gc2_residual, Coeffs, Derived};
pub use error::{Result, SurfError};
pub use grid::{GridSpec, ScalarField};
pub use report::{Norms, ResidualReport};
