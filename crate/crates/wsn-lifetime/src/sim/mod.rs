//! Discretized lifetime simulation: at each step the source's position is
//! sampled, dead relays are pruned, the configured routing policy is
//! solved, and batteries drain for one step. The run ends when the source
//! battery crosses its death threshold (lifetime interpolated within the
//! final step), when the source has no out-neighbor left, or at the step
//! budget.

mod trajectory;

pub use trajectory::{MotionFamily, ParametricMotion, Trajectory};

use crate::error::Error;
use crate::model::{energy_step, EnergyParams, NetworkState, Position, RoutingVector, Topology};
use crate::policy::{
    solve_p1, solve_p2, solve_p3_shortest_path, Policy, PolicyConfig, PolicyOutcome,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// Time step between routing decisions.
    pub delta: f64,
    /// Fraction of initial energy at which a node counts as dead.
    pub death_threshold: f64,
    pub max_steps: usize,
    pub policy: PolicyConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            delta: 1.0,
            death_threshold: 0.0,
            max_steps: 1_000_000,
            policy: PolicyConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Source battery crossed its threshold; lifetime is interpolated.
    SourceDead,
    /// The source had no live receiver in range while still alive.
    NoRoute,
    MaxSteps,
}

/// One solved-and-drained step. Residuals and alive flags are the values
/// the step started from, so every recorded residual predates the crossing
/// that ends the run.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub source: Position,
    pub residual: Vec<f64>,
    pub alive: Vec<bool>,
    pub w: RoutingVector,
    pub workloads: Vec<f64>,
    pub nu: Option<f64>,
    pub path: Option<Vec<usize>>,
    /// Battery nodes whose residual crossed their threshold during this
    /// step's drain.
    pub died: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub lifetime: f64,
    pub termination: Termination,
    pub steps: Vec<StepRecord>,
    pub final_residual: Vec<f64>,
    pub final_alive: Vec<bool>,
}

fn solve_step(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
    policy: &PolicyConfig,
) -> Result<PolicyOutcome, Error> {
    match policy.policy {
        Policy::P1 => solve_p1(topo, state, src, params),
        Policy::P2 => solve_p2(topo, state, src, params, policy),
        Policy::P3 => solve_p3_shortest_path(topo, state, src, params),
    }
}

pub fn run_simulation(
    topo: &Topology,
    initial: &[f64],
    traj: &Trajectory,
    params: &EnergyParams,
    cfg: &SimulationConfig,
) -> Result<SimulationResult, Error> {
    if !(cfg.delta > 0.0 && cfg.delta.is_finite()) {
        return Err(Error::InvalidInput("time step must be positive".into()));
    }
    if initial.len() != topo.battery_count() {
        return Err(Error::InvalidInput(format!(
            "{} initial energies for {} battery nodes",
            initial.len(),
            topo.battery_count()
        )));
    }
    let mut state = NetworkState::new(initial, cfg.death_threshold)?;
    let mut cursor = traj.cursor();
    let mut steps = Vec::new();

    for k in 0..cfg.max_steps {
        let t = k as f64 * cfg.delta;
        let src = cursor.position(t);

        // A stranded-but-alive source ends the run gracefully; every other
        // solver failure aborts with the trace collected so far discarded.
        let solved = match solve_step(topo, &state, src, params, &cfg.policy) {
            Ok(s) => s,
            Err(Error::NoRoute) => {
                return Ok(SimulationResult {
                    lifetime: t,
                    termination: Termination::NoRoute,
                    final_residual: state.residuals().to_vec(),
                    final_alive: state.alive_flags().to_vec(),
                    steps,
                });
            }
            Err(e) => return Err(e),
        };

        let before = state.clone();
        state = energy_step(&state, &solved.workloads, cfg.delta);
        let died: Vec<usize> = (0..state.battery_count())
            .filter(|&i| before.alive(i) && !state.alive(i))
            .collect();

        steps.push(StepRecord {
            step: k,
            t,
            source: src,
            residual: before.residuals().to_vec(),
            alive: before.alive_flags().to_vec(),
            w: solved.w,
            workloads: solved.workloads.clone(),
            nu: solved.nu,
            path: solved.path,
            died,
        });

        if !state.alive(0) {
            // The drain rate is constant within a step, so the crossing
            // time is linear in the energy gap. The unclamped rate is
            // used: a battery that bottoms out at zero mid-step still
            // crossed earlier than the step boundary.
            let gap = before.residual(0) - before.threshold(0);
            let rate = solved.workloads[0];
            let lifetime = t + gap / rate;
            return Ok(SimulationResult {
                lifetime,
                termination: Termination::SourceDead,
                final_residual: state.residuals().to_vec(),
                final_alive: state.alive_flags().to_vec(),
                steps,
            });
        }
    }

    Ok(SimulationResult {
        lifetime: cfg.max_steps as f64 * cfg.delta,
        termination: Termination::MaxSteps,
        final_residual: state.residuals().to_vec(),
        final_alive: state.alive_flags().to_vec(),
        steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonRun {
    pub epsilon: f64,
    pub result: SimulationResult,
}

/// Runs the balanced policy once per epsilon over the identical scenario
/// (same trajectory, same seed) and returns the runs in input order.
/// Parallel across epsilons when the `parallel` feature is on; each run
/// is internally sequential either way, so results match the serial path
/// bit for bit.
pub fn sweep_epsilon(
    topo: &Topology,
    initial: &[f64],
    traj: &Trajectory,
    params: &EnergyParams,
    cfg: &SimulationConfig,
    epsilons: &[f64],
) -> Result<Vec<EpsilonRun>, Error> {
    if cfg.policy.policy != Policy::P2 {
        return Err(Error::InvalidInput(
            "epsilon sweeps require the balanced policy".into(),
        ));
    }
    let run_one = |&epsilon: &f64| -> Result<EpsilonRun, Error> {
        let mut sub = cfg.clone();
        sub.policy.epsilon = epsilon;
        let result = run_simulation(topo, initial, traj, params, &sub)?;
        Ok(EpsilonRun { epsilon, result })
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        epsilons.par_iter().map(run_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        epsilons.iter().map(run_one).collect()
    }
}
