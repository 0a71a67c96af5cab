//! Routing policies and the exhaustive cross-check oracle.

mod oracle;
mod p1;
mod p2;
mod p3;

pub use oracle::{vertex_oracle, vertex_oracle_seq, OracleObjective, VERTEX_ENUMERATION_BOUND};
pub use p1::solve_p1;
pub use p2::{nu_residual, solve_p2};
pub use p3::{arc_weight, solve_p3_shortest_path};

use crate::error::Error;
use crate::model::{
    neighbor_sets, source_distances, EnergyParams, NeighborSets, NetworkState, Position,
    RoutingVector, Topology,
};

/// Which per-step routing problem to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Greedy: minimize the source's own drain rate.
    P1,
    /// Balance source drain against total relay drain via a multiplier.
    P2,
    /// Minimize total network drain (shortest path in arc costs).
    P3,
}

/// Tuning for the balance-multiplier fixed point (P2 outer loop).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuIteration {
    pub init: f64,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NuIteration {
    fn default() -> Self {
        Self {
            init: -1.0,
            damping: 0.5,
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

/// Tuning for the multistart projected-gradient inner solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescentConfig {
    /// Number of starts: one uniform plus seeded random vertices.
    pub starts: usize,
    pub seed: u64,
    /// Stop when the projected-gradient max-norm falls below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease coefficient.
    pub armijo: f64,
    /// Line-search shrink factor per backtrack.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 42,
            grad_tol: 1e-8,
            max_iter: 500,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyConfig {
    pub policy: Policy,
    pub epsilon: f64,
    pub nu: NuIteration,
    pub descent: DescentConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            policy: Policy::P1,
            epsilon: 1.0,
            nu: NuIteration::default(),
            descent: DescentConfig::default(),
        }
    }
}

/// Result of one per-step solve.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutcome {
    pub w: RoutingVector,
    /// Value of the solved objective; always consistent with recomputing
    /// it from `w`.
    pub objective: f64,
    /// Balance multiplier (P2 only).
    pub nu: Option<f64>,
    /// Source-to-base node sequence (P3 only).
    pub path: Option<Vec<usize>>,
    /// Drain rates for all battery nodes under `w`.
    pub workloads: Vec<f64>,
    /// Set when multistart restarts disagreed by more than 1e-6 in
    /// objective value.
    pub nonconvex_warning: bool,
}

/// Everything a per-step solver needs about the current instant.
pub(crate) struct SolveContext<'a> {
    pub topo: &'a Topology,
    pub params: &'a EnergyParams,
    pub d0: Vec<f64>,
    pub sets: NeighborSets,
}

impl<'a> SolveContext<'a> {
    pub fn new(
        topo: &'a Topology,
        state: &NetworkState,
        src: Position,
        params: &'a EnergyParams,
    ) -> Result<Self, Error> {
        if !src.is_finite() {
            return Err(Error::InvalidInput("source position must be finite".into()));
        }
        let d0 = source_distances(topo, src);
        let sets = neighbor_sets(topo, state.alive_flags(), &d0);
        Ok(Self {
            topo,
            params,
            d0,
            sets,
        })
    }

    /// Transmit cost from `i` to `j` at the current source position.
    pub fn transmit_cost(&self, i: usize, j: usize) -> f64 {
        let d = if i == 0 {
            self.d0[j]
        } else {
            self.topo.distance(i, j)
        };
        self.params.transmit_cost(d)
    }

    /// The source's cheapest out-arc, ties to the lowest node id.
    pub fn cheapest_source_arc(&self) -> Result<usize, Error> {
        let out = self.sets.out(0);
        if out.is_empty() {
            return Err(Error::NoRoute);
        }
        let mut best = out[0];
        let mut best_cost = self.transmit_cost(0, best);
        for &j in &out[1..] {
            let c = self.transmit_cost(0, j);
            if c < best_cost {
                best = j;
                best_cost = c;
            }
        }
        Ok(best)
    }

    /// Uniform rows for every alive relay with out-neighbors.
    pub fn fill_uniform_relay_rows(&self, w: &mut RoutingVector) {
        for i in 1..self.topo.battery_count() {
            let out = self.sets.out(i);
            if out.is_empty() {
                continue;
            }
            let share = 1.0 / out.len() as f64;
            w.set_row(i, out.iter().map(|&j| (j, share)).collect());
        }
    }
}
