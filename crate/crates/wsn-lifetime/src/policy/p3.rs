//! Total-drain policy: minimizing the summed drain rate of all battery
//! nodes reduces to a shortest path from source to base under per-arc
//! costs of one receive plus one transmit. A whole path charges one
//! receive more than the batteries actually pay (the base's receive is
//! free), so the reported drain cost is the path cost minus one receive;
//! the difference is constant per path and argmins coincide.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::Error;
use crate::model::{
    flow_solve, workloads, EnergyParams, NetworkState, Position, RoutingVector, Topology,
};

use super::{PolicyOutcome, SolveContext};

/// Forwarding cost of arc (i, j): the receiver's receive cost plus the
/// sender's transmit cost. Source arcs use the current source position.
pub fn arc_weight(
    i: usize,
    j: usize,
    topo: &Topology,
    src: Position,
    params: &EnergyParams,
) -> f64 {
    let d = if i == 0 {
        src.distance(topo.position(j))
    } else {
        topo.distance(i, j)
    };
    params.rx + params.transmit_cost(d)
}

pub fn solve_p3_shortest_path(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
) -> Result<PolicyOutcome, Error> {
    let ctx = SolveContext::new(topo, state, src, params)?;
    if ctx.sets.out(0).is_empty() {
        return Err(Error::NoRoute);
    }
    let base = topo.base_id();

    // Dijkstra keyed by (cost, path); the path in the key makes ties
    // deterministic: equal-cost routes settle in lexicographic order.
    let mut heap: BinaryHeap<Reverse<PathEntry>> = BinaryHeap::new();
    let mut settled = vec![false; topo.node_count()];
    heap.push(Reverse(PathEntry {
        cost: 0.0,
        path: vec![0],
    }));

    let path = loop {
        let Some(Reverse(entry)) = heap.pop() else {
            return Err(Error::NoRoute);
        };
        let node = *entry.path.last().unwrap();
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == base {
            break entry.path;
        }
        for &j in ctx.sets.out(node) {
            if settled[j] {
                continue;
            }
            let mut path = entry.path.clone();
            path.push(j);
            heap.push(Reverse(PathEntry {
                cost: entry.cost + params.rx + ctx.transmit_cost(node, j),
                path,
            }));
        }
    };

    // Path cost, summed in hop order so callers can reproduce it exactly.
    let mut path_cost = 0.0;
    for hop in path.windows(2) {
        path_cost += params.rx + ctx.transmit_cost(hop[0], hop[1]);
    }
    let drain_cost = path_cost - params.rx;

    let mut w = RoutingVector::new();
    ctx.fill_uniform_relay_rows(&mut w);
    for hop in path.windows(2) {
        w.set_row(hop[0], vec![(hop[1], 1.0)]);
    }

    let flow = flow_solve(&w, topo.node_count())?;
    let loads = workloads(&w, &flow, topo, &ctx.d0, params);
    Ok(PolicyOutcome {
        w,
        objective: drain_cost,
        nu: None,
        path: Some(path),
        workloads: loads,
        nonconvex_warning: false,
    })
}

#[derive(PartialEq)]
struct PathEntry {
    cost: f64,
    path: Vec<usize>,
}

impl Eq for PathEntry {}

impl PartialOrd for PathEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PathEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Costs are finite sums of finite arc weights.
        self.cost
            .partial_cmp(&other.cost)
            .unwrap()
            .then_with(|| self.path.cmp(&other.path))
    }
}
