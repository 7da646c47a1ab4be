//! Statevector QAOA for small Max-Cut and Ising instances.
//!
//! - [`state`]: dense statevector and the H / RX / RZ / CNOT / diagonal-phase gates
//! - [`problem`]: topologies, cost functions, instance files, brute-force oracle
//! - [`engine`]: the 2p / 3p / 4p ansatz schedules and expectation values
//! - [`optimize`]: exhaustive lattice search and iterated local search
//! - [`experiment`]: shipped instances, experiment runner, CSV and table output

pub mod engine;
pub mod error;
pub mod experiment;
pub mod optimize;
pub mod problem;
pub mod state;

pub use engine::{
    apply_mixing_operator, apply_phase_operator, exact_expectation, opt_gap, prepare_state,
    sampled_expectation, AnsatzModel, EevReport, EstimateMethod, ParameterPoint, PhaseMode,
    QaoaEvaluator,
};
pub use error::{Error, Result};
pub use optimize::{
    exhaustive_search, iterated_local_search, stochastic_hill_climb, Backend, EevObjective,
    EsConfig, FnObjective, IlsConfig, Objective, OptResult,
};
pub use problem::{
    Direction, Family, OracleResult, ProblemInstance, SpinAssignment, Topology, TopologyKind,
};
pub use state::{GateAngle, Statevector};
