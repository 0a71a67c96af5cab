//! Lifetime-aware routing and simulation for wireless sensor networks with
//! a single mobile data source.
//!
//! A network is a set of fixed relay nodes plus an energy-unconstrained base
//! station; node 0 is a battery-powered source that moves through the plane
//! and streams unit-rate data toward the base via probabilistic per-node
//! forwarding weights. The crate provides:
//!
//! * the per-bit energy model: transmit/receive workloads, flow
//!   conservation, and the discrete battery update ([`model`]),
//! * three routing policies: greedy source-workload minimization, a
//!   balance-multiplier trade-off solved by damped fixed point over
//!   multistart projected gradient descent, and total-drain shortest path,
//!   plus an exhaustive deterministic-routing oracle ([`policy`]),
//! * a discrete-time lifetime simulator over several source motion models
//!   ([`sim`]),
//! * a shooting solver for the continuous-time optimality system of the
//!   parametric-motion case ([`tpbvp`]).
//!
//! Everything is deterministic: identical inputs give bitwise identical
//! outputs, including under the default `parallel` feature (all parallel
//! reductions use total orders, never float accumulation races).

pub mod error;
pub mod model;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod tpbvp;

pub use error::Error;
pub use model::{
    energy_step, flow_solve, neighbor_sets, relay_workload, source_distances, source_workload,
    workloads, EnergyParams, FlowVector, NeighborSets, NetworkState, Position, RoutingVector,
    Topology,
};
pub use policy::{
    arc_weight, nu_residual, solve_p1, solve_p2, solve_p3_shortest_path, vertex_oracle,
    vertex_oracle_seq, DescentConfig, NuIteration, OracleObjective, Policy, PolicyConfig,
    PolicyOutcome,
};
pub use sim::{
    run_simulation, sweep_epsilon, EpsilonRun, MotionFamily, ParametricMotion, SimulationConfig,
    SimulationResult, StepRecord, Termination, Trajectory,
};
pub use tpbvp::{
    costate_rhs, pointwise_control, shoot, transversality_residual, CostateState, ShootingConfig,
    ShootingSolution, ShootingUnknowns, TerminalCounting, TerminalPoint,
};
