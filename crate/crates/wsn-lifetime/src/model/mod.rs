//! Network geometry, the per-bit energy model, flow conservation, and the
//! discrete battery update.
//!
//! Node numbering is fixed throughout the crate: node 0 is the mobile
//! source, nodes 1..base_id are fixed relays, and the last node (base_id)
//! is the base station. Every node except the base carries a battery; the
//! base never transmits and the source never receives.

mod neighbors;
mod routing;
mod workload;

pub use neighbors::{neighbor_sets, source_distances, NeighborSets};
pub use routing::{flow_solve, FlowVector, RoutingVector};
pub use workload::{energy_step, relay_workload, source_workload, workloads};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Per-bit radio energy model. Transmitting over distance d costs
/// `tx_fixed + tx_distance * d^path_loss`; receiving costs `rx`; the
/// source additionally pays `sense` per generated bit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    pub tx_distance: f64,
    pub tx_fixed: f64,
    pub rx: f64,
    pub sense: f64,
    pub path_loss: f64,
}

impl Default for EnergyParams {
    /// Reference radio constants used by the bundled scenarios and tests.
    fn default() -> Self {
        Self {
            tx_distance: 1e-4,
            tx_fixed: 0.05,
            rx: 0.05,
            sense: 0.0,
            path_loss: 2.0,
        }
    }
}

impl EnergyParams {
    /// Transmit cost per bit across distance `d`.
    pub fn transmit_cost(&self, d: f64) -> f64 {
        // d*d keeps the quadratic case exact; powf would round differently.
        let dp = if self.path_loss == 2.0 {
            d * d
        } else {
            d.powf(self.path_loss)
        };
        self.tx_fixed + self.tx_distance * dp
    }
}

/// Static part of the network: relay and base positions, transmit ranges,
/// and an optional explicit arc list that overrides range-derived
/// adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    relays: Vec<Position>,
    base: Position,
    ranges: Vec<f64>,
    arcs: Option<Vec<(usize, usize)>>,
}

impl Topology {
    /// Builds a topology with unlimited transmit ranges.
    pub fn new(relays: Vec<Position>, base: Position) -> Result<Self, Error> {
        if !base.is_finite() || relays.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(
                "node coordinates must be finite".into(),
            ));
        }
        let senders = relays.len() + 1;
        Ok(Self {
            relays,
            base,
            ranges: vec![f64::INFINITY; senders],
            arcs: None,
        })
    }

    /// Sets per-sender transmit ranges (index 0 is the source). Infinite
    /// entries mean unlimited reach.
    pub fn with_ranges(mut self, ranges: Vec<f64>) -> Result<Self, Error> {
        if ranges.len() != self.relays.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} ranges (source plus relays), got {}",
                self.relays.len() + 1,
                ranges.len()
            )));
        }
        if ranges.iter().any(|r| r.is_nan() || *r < 0.0) {
            return Err(Error::InvalidInput("ranges must be nonnegative".into()));
        }
        self.ranges = ranges;
        Ok(self)
    }

    /// Replaces range-derived adjacency with an explicit arc list. The
    /// source still never receives and the base never sends.
    pub fn with_arcs(mut self, arcs: Vec<(usize, usize)>) -> Result<Self, Error> {
        let base = self.base_id();
        for &(i, j) in &arcs {
            if i >= base || j == 0 || j > base || i == j {
                return Err(Error::InvalidInput(format!(
                    "arc ({i}, {j}) is not a sender-to-receiver pair"
                )));
            }
        }
        self.arcs = Some(arcs);
        Ok(self)
    }

    pub fn base_id(&self) -> usize {
        self.relays.len() + 1
    }

    pub fn node_count(&self) -> usize {
        self.relays.len() + 2
    }

    /// Number of battery-carrying nodes (source plus relays).
    pub fn battery_count(&self) -> usize {
        self.base_id()
    }

    /// Position of a fixed node (1..=base_id). The source's position is
    /// time-dependent and supplied by the caller.
    pub fn position(&self, node: usize) -> Position {
        assert!(node >= 1 && node <= self.base_id(), "fixed node id {node}");
        if node == self.base_id() {
            self.base
        } else {
            self.relays[node - 1]
        }
    }

    pub fn range(&self, sender: usize) -> f64 {
        self.ranges[sender]
    }

    /// Distance between two fixed nodes.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.position(i).distance(self.position(j))
    }

    pub fn arcs(&self) -> Option<&[(usize, usize)]> {
        self.arcs.as_deref()
    }
}

/// Battery bookkeeping for one instant: time, residual energy per battery
/// node, and alive flags derived from per-node death thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    pub t: f64,
    residual: Vec<f64>,
    alive: Vec<bool>,
    thresholds: Vec<f64>,
}

impl NetworkState {
    /// Starts at t = 0 with full batteries. `threshold_fraction` is the
    /// fraction of the initial energy below which a node counts as dead.
    pub fn new(initial: &[f64], threshold_fraction: f64) -> Result<Self, Error> {
        if initial.is_empty() {
            return Err(Error::InvalidInput("no battery nodes".into()));
        }
        if initial.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::InvalidInput(
                "initial energies must be positive and finite".into(),
            ));
        }
        if !(0.0..1.0).contains(&threshold_fraction) {
            return Err(Error::InvalidInput(
                "death threshold fraction must lie in [0, 1)".into(),
            ));
        }
        let thresholds: Vec<f64> = initial.iter().map(|r| r * threshold_fraction).collect();
        Ok(Self {
            t: 0.0,
            residual: initial.to_vec(),
            alive: vec![true; initial.len()],
            thresholds,
        })
    }

    pub fn battery_count(&self) -> usize {
        self.residual.len()
    }

    pub fn residual(&self, node: usize) -> f64 {
        self.residual[node]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residual
    }

    pub fn alive(&self, node: usize) -> bool {
        self.alive[node]
    }

    pub fn alive_flags(&self) -> &[bool] {
        &self.alive
    }

    pub fn threshold(&self, node: usize) -> f64 {
        self.thresholds[node]
    }

    /// Snapshot built straight from residuals and per-node thresholds,
    /// skipping the positivity checks `new` applies. The shooting
    /// integrator needs this: it legitimately evaluates candidate
    /// terminal times past the source's death, where residuals go
    /// nonpositive.
    pub(crate) fn snapshot(t: f64, residual: Vec<f64>, thresholds: Vec<f64>) -> NetworkState {
        assert_eq!(residual.len(), thresholds.len());
        let alive = residual
            .iter()
            .zip(&thresholds)
            .map(|(r, th)| r > th)
            .collect();
        NetworkState {
            t,
            residual,
            alive,
            thresholds,
        }
    }

    pub(crate) fn advanced(&self, workloads: &[f64], delta: f64) -> NetworkState {
        assert_eq!(workloads.len(), self.residual.len());
        let residual: Vec<f64> = self
            .residual
            .iter()
            .zip(workloads)
            .map(|(r, i)| (r - i * delta).max(0.0))
            .collect();
        let alive: Vec<bool> = residual
            .iter()
            .zip(&self.thresholds)
            .map(|(r, th)| r > th)
            .collect();
        NetworkState {
            t: self.t + delta,
            residual,
            alive,
            thresholds: self.thresholds.clone(),
        }
    }
}
