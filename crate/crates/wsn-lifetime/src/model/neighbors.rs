//! Alive-pruned adjacency: who can send to whom right now.

use super::{Position, Topology};

/// Out- and in-neighbor lists indexed by node id. The base has no out
/// list and the source no in list, ever. Dead nodes have empty lists and
/// appear in nobody else's.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborSets {
    out: Vec<Vec<usize>>,
    inbound: Vec<Vec<usize>>,
}

impl NeighborSets {
    pub fn out(&self, node: usize) -> &[usize] {
        &self.out[node]
    }

    pub fn inbound(&self, node: usize) -> &[usize] {
        &self.inbound[node]
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }
}

/// Distances from the source's current position to every fixed node,
/// indexed by node id (entry 0 is unused and zero).
pub fn source_distances(topo: &Topology, src: Position) -> Vec<f64> {
    let mut d = vec![0.0; topo.node_count()];
    for (j, slot) in d.iter_mut().enumerate().skip(1) {
        *slot = src.distance(topo.position(j));
    }
    d
}

/// Builds the current neighbor sets. `alive` covers the battery nodes;
/// the base always counts as a receiver. With an explicit arc list only
/// aliveness filters arcs; otherwise an arc (i, j) exists when j lies
/// within i's transmit range.
pub fn neighbor_sets(topo: &Topology, alive: &[bool], source_distances: &[f64]) -> NeighborSets {
    let base = topo.base_id();
    assert_eq!(alive.len(), topo.battery_count());
    assert_eq!(source_distances.len(), topo.node_count());

    let mut out = vec![Vec::new(); topo.node_count()];
    let mut inbound = vec![Vec::new(); topo.node_count()];
    let receiver_ok = |j: usize| j == base || alive[j];

    if let Some(arcs) = topo.arcs() {
        for &(i, j) in arcs {
            if alive[i] && receiver_ok(j) {
                out[i].push(j);
                inbound[j].push(i);
            }
        }
        for row in out.iter_mut().chain(inbound.iter_mut()) {
            row.sort_unstable();
            row.dedup();
        }
    } else {
        for i in 0..base {
            if !alive[i] {
                continue;
            }
            for j in 1..=base {
                if j == i || !receiver_ok(j) {
                    continue;
                }
                let d = if i == 0 {
                    source_distances[j]
                } else {
                    topo.distance(i, j)
                };
                if d <= topo.range(i) {
                    out[i].push(j);
                    inbound[j].push(i);
                }
            }
        }
    }
    NeighborSets { out, inbound }
}
