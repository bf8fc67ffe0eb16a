//! Quantum s-wave dynamics of the cutoff inverse-square problem.

pub mod radial;
pub mod anomaly;
pub mod evolve;
pub mod identity;
pub mod spectrum;

pub use anomaly::{pairing_consistency, quantum_anomaly_pairing, PairingConsistency, QuantumPairing, QuantumProfile};
pub use identity::{identity_refinement, quantum_identity_check, QuantumIdentityGrid};
pub use evolve::{anomaly_rate, evolve_wavepacket, EvolveOptions, QuantumRun};
pub use radial::{quantum_dilation_expectation, radial_apply, RadialGrid, RadialWavefunction};
pub use spectrum::{bound_spectrum, count_bound_states, BoundStateTower, SpectrumOptions};
