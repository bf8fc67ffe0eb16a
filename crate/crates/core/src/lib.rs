//! Classical, Koopman–von Neumann and quantum treatments of the
//! inverse-square potential, with numerical checks of dilation symmetry and
//! its anomaly.

pub mod classical;
pub mod error;
pub mod kvn;
pub mod model;
pub mod ode;
pub mod par;
pub mod potential;
pub mod quad;
pub mod quantum;
pub mod selfadjoint;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{validate, ChargeRecord, ChargeSeries, DilationParams, PhasePoint, SystemParams, Vec3};
pub use par::Exec;
