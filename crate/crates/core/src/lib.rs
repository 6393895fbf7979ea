//! Equations of state treated as nonlinear waves.
//!
//! The state surface `T = alpha(V) P + f(V)` is the characteristic solution
//! of `V_P + alpha(V) V_T = 0`. Phase coexistence lines are the shocks of
//! that balance law, the critical point is the cusp where the first shock
//! forms, and triple points are confluences of two shocks into one.

pub mod analysis;
pub mod coexistence;
pub mod eos;
pub mod error;
pub mod fit;
pub mod interp;
pub mod pearcey;
pub mod quadrature;
pub mod roots;
pub mod scalar_fn;
pub mod shocks;
pub mod viscous;

pub use eos::{CriticalPoint, EosSpec, ThermoPoint, VdwParams};
pub use error::{Error, ErrorClass, Result};
pub use scalar_fn::ScalarFn;

/// Library version, recorded in the headers of generated files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
