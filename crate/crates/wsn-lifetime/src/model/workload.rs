//! Per-node energy drain rates and the discrete battery update.

use super::{EnergyParams, FlowVector, NetworkState, RoutingVector, Topology};

/// Drain rate of relay `i`: its data rate times the per-bit cost of
/// receiving once and transmitting along its forwarding weights.
pub fn relay_workload(
    i: usize,
    w: &RoutingVector,
    flow: &FlowVector,
    topo: &Topology,
    params: &EnergyParams,
) -> f64 {
    let rate = flow.rate(i);
    if rate == 0.0 {
        return 0.0;
    }
    let tx: f64 = w
        .row(i)
        .map(|row| {
            row.iter()
                .map(|&(j, wij)| wij * params.transmit_cost(topo.distance(i, j)))
                .sum()
        })
        .unwrap_or(0.0);
    rate * (tx + params.rx)
}

/// Drain rate of the source: transmit over the current distances plus the
/// per-bit sensing cost. The source never receives.
pub fn source_workload(w: &RoutingVector, source_distances: &[f64], params: &EnergyParams) -> f64 {
    let tx: f64 = w
        .row(0)
        .map(|row| {
            row.iter()
                .map(|&(j, w0j)| w0j * params.transmit_cost(source_distances[j]))
                .sum()
        })
        .unwrap_or(0.0);
    tx + params.sense
}

/// Drain rates for all battery nodes (source first).
pub fn workloads(
    w: &RoutingVector,
    flow: &FlowVector,
    topo: &Topology,
    source_distances: &[f64],
    params: &EnergyParams,
) -> Vec<f64> {
    let mut loads = Vec::with_capacity(topo.battery_count());
    loads.push(source_workload(w, source_distances, params));
    for i in 1..topo.battery_count() {
        loads.push(relay_workload(i, w, flow, topo, params));
    }
    loads
}

/// One battery step of length `delta`: drains each node by its workload,
/// clamps at zero, advances time, and refreshes alive flags against the
/// death thresholds.
pub fn energy_step(state: &NetworkState, workloads: &[f64], delta: f64) -> NetworkState {
    state.advanced(workloads, delta)
}
