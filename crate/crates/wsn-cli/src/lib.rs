//! Scenario files, trace export, and the `wsnlife` command line for the
//! wireless-sensor-network lifetime toolkit.
//!
//! A scenario is one TOML document: radio constants, a node table, the
//! source trajectory, and solver settings. Commands run the discrete
//! simulator or the continuous boundary-value solver and write CSV traces
//! plus TOML summaries that round-trip every float at full precision.

pub mod commands;
pub mod error;
pub mod scenario;
pub mod trace;

pub use commands::{
    cmd_simulate, cmd_sweep, cmd_tpbvp, cmd_validate, Overrides, SimulateReport, SweepReport,
    TpbvpReport,
};
pub use error::CliError;
pub use scenario::{parse_scenario, serialize_scenario, validate, PolicyName, ScenarioDoc};
