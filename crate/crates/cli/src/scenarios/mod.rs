//! One function per scenario; each returns its tables and checks without
//! touching the disk.

pub mod classical;
pub mod deficiency;
pub mod kvn;
pub mod quantum;

use kvnlab::Result;

use crate::config::{Scenario, ScenarioConfig};
use crate::output::Outcome;

pub fn dispatch(cfg: &ScenarioConfig) -> Result<Outcome> {
    match cfg.scenario {
        Scenario::ClassicalCharge => classical::classical_charge(cfg),
        Scenario::ActionVariation => classical::action_variation(cfg),
        Scenario::KvnEvolveGrid => kvn::kvn_evolve_grid(cfg),
        Scenario::KvnEvolveEnsemble => kvn::kvn_evolve_ensemble(cfg),
        Scenario::KvnAnomaly => kvn::kvn_anomaly(cfg),
        Scenario::KvnIdentity => kvn::kvn_identity(cfg),
        Scenario::AngularIntegral => kvn::angular_integral(cfg),
        Scenario::QmSpectrum => quantum::qm_spectrum(cfg),
        Scenario::QmEvolve => quantum::qm_evolve(cfg),
        Scenario::QmAnomaly => quantum::qm_anomaly(cfg),
        Scenario::QmIdentity => quantum::qm_identity(cfg),
        Scenario::DeficiencyQm => deficiency::deficiency_qm(cfg),
        Scenario::DeficiencyKvn => deficiency::deficiency_kvn(cfg),
    }
}
