//! Two point masses on a surface of constant curvature under the curved
//! inverse-square law.
//!
//! The crate is organised bottom-up:
//!
//! - [`elliptic`]: Jacobi elliptic functions and the complete integral `K(k)`.
//! - [`space`]: curvature sign, radius and the matching trigonometric family.
//! - [`kepler`]: the curved Kepler problem (conics, Delaunay/Poincaré charts,
//!   anomalies, the curved Kepler equation, exact propagation).
//! - [`integrate`]: adaptive extrapolation integrator, trajectories and
//!   invariant monitoring.
//! - [`reduction`]: reduced two-body Hamiltonian on `T*I x coadjoint orbit`,
//!   its vector field and the small-parameter scaling.
//! - [`secular`]: averages over the mean anomaly, the closed-form expansion of
//!   the averaged perturbation, the secular field and its phase portrait.
//! - [`orbits`]: long-time return map, continuation of periodic orbits and
//!   lifting of reduced orbits back to the surface.

pub mod elliptic;
pub mod error;
pub mod integrate;
pub mod kepler;
pub mod orbits;
mod quad;
pub mod reduction;
pub mod secular;
pub mod space;

pub use error::{Error, Result};
pub use space::{Curvature, CurvedSpace};
