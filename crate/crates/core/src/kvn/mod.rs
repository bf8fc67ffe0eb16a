//! Koopman–von Neumann side: Liouvillian evolution of phase-space waves,
//! the KvN dilation charge, the anomaly operator and its pairings.

pub mod action;
pub mod anomaly;
pub mod ensemble;
pub mod grid;
pub mod identity;
pub mod wave;

pub use action::{kvn_action_scale_variation, KvnPath, KvnWeight};
pub use anomaly::{angular_surface_integral, kvn_anomaly_density, kvn_anomaly_pairing, PairingOrders, PairingPoint};
pub use ensemble::{ensemble_charge_series, evolve_ensemble, kvn_dilation_expectation, EnsembleOptions, EnsembleRun, KvnEnsembleState};
pub use grid::{evolve_grid, liouvillian_apply_grid, GridEvolveOptions, GridPacket, GridRun, KvnGridWave, Splitting};
pub use identity::{kvn_identity_check, IdentityGrid, TestVectors};
pub use wave::InitialWaveSpec;
