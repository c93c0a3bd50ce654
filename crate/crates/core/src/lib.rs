//! Numerical toolkit for convexity principles of homogeneous energies.
//!
//! The crate is organised around five pieces:
//!
//! * [`hfun`]: positively homogeneous convex integrands and norm/dual-norm pairs.
//! * [`principles`]: kinetic-energy convexity, hidden convexity and Picone
//!   inequalities (pointwise and discrete) as signed gap functionals.
//! * [`eigen`]: grid discretisations of local and Gagliardo energies and the
//!   constrained first-eigenvalue solvers.
//! * [`hardy`]: local anisotropic and fractional Hardy constants with
//!   quadrature and Monte-Carlo cross-checks.
//! * [`verify`]: seeded property sweeps that aggregate the gap functionals into reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod hardy;
pub mod hfun;
pub mod principles;
pub mod quadrature;
pub mod rng;
pub mod verify;

pub use eigen::{
    EigenProblem, EigenResult, Energy, GagliardoEnergy, Grid, GridFunction, LocalEnergy, Solver,
};
pub use error::{Error, Result};
pub use hardy::{FractionalParams, HardyReport, LocalParams};
pub use hfun::{FormKind, HomogeneousForm, NormKind, NormPair};
pub use principles::{DiscreteDensity, DiscretePair, KineticPoint, PointSample};
pub use quadrature::QuadratureConfig;
