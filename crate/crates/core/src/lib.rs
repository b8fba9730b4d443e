//! Symbolic engine for standard and twisted (μ-deformed) prolongations of
//! vector fields on jet spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: exact rational-function expressions over opaque atoms
//! * [`jet`]: jet spaces, total derivatives, vector fields
//! * [`prolong`]: standard and twisted prolongation, compatibility of twists
//! * [`symmetry`]: symmetry residuals, brackets, structure constants
//! * [`variational`]: (twisted) Euler–Lagrange equations and conservation laws
//! * [`gauge`]: the correspondence between twists and gauge matrices
//! * [`numeric`]: compiled evaluation, RK4 integration, drift measurement
//! * [`problem`]: TOML problem files
//!
//! With the default `parallel` feature, batch work (independent fields,
//! coefficients, trajectory samples) runs on rayon; without it the same
//! code paths run sequentially.

pub mod error;
pub mod expr;
pub mod gauge;
pub mod gen;
pub mod jet;
pub mod matrix;
pub mod numeric;
pub mod par;
pub mod problem;
pub mod prolong;
pub mod symmetry;
pub mod variational;

pub use error::{Error, ErrorClass, Result};
pub use expr::{parse, Context, Expr};
pub use jet::{JetSpace, MultiIndex, VectorField};
pub use matrix::Matrix;
pub use prolong::{ProlongedField, TwistForm};
