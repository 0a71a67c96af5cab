//! Probabilistic forwarding weights and the induced per-node data rates.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;

/// Per-node forwarding weights: row i holds (receiver, weight) pairs that
/// sum to one. Only alive non-base nodes with at least one out-neighbor
/// carry a row. Rows are kept sorted by receiver id, so iteration order
/// (and therefore every downstream computation) is deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoutingVector {
    rows: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl RoutingVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a row. Entries are sorted by receiver id.
    pub fn set_row(&mut self, sender: usize, mut entries: Vec<(usize, f64)>) {
        entries.sort_unstable_by_key(|&(j, _)| j);
        self.rows.insert(sender, entries);
    }

    pub fn row(&self, sender: usize) -> Option<&[(usize, f64)]> {
        self.rows.get(&sender).map(|r| r.as_slice())
    }

    pub fn weight(&self, sender: usize, receiver: usize) -> f64 {
        self.rows
            .get(&sender)
            .and_then(|row| {
                row.iter()
                    .find(|&&(j, _)| j == receiver)
                    .map(|&(_, w)| w)
            })
            .unwrap_or(0.0)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[(usize, f64)])> {
        self.rows.iter().map(|(&i, row)| (i, row.as_slice()))
    }

    pub fn senders(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when every row has nonnegative weights summing to one within
    /// `tol`.
    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.rows.values().all(|row| {
            let sum: f64 = row.iter().map(|&(_, w)| w).sum();
            (sum - 1.0).abs() <= tol && row.iter().all(|&(_, w)| w >= 0.0)
        })
    }
}

/// Steady per-node data rates induced by a routing vector; entry 0 is the
/// source's unit generation rate.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowVector(Vec<f64>);

impl FlowVector {
    pub fn rate(&self, node: usize) -> f64 {
        self.0[node]
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }
}

/// Solves the flow-conservation system: every non-source node's rate is
/// the weighted sum of its senders' rates, with the source generating at
/// unit rate. Cycles are legal; a singular system or negative solution is
/// rejected as [`Error::SingularFlow`].
pub fn flow_solve(w: &RoutingVector, node_count: usize) -> Result<FlowVector, Error> {
    let n = node_count - 1; // unknowns: nodes 1..=base
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (sender, row) in w.rows() {
        for &(j, weight) in row {
            if sender == 0 {
                b[j - 1] += weight;
            } else {
                m[(j - 1, sender - 1)] -= weight;
            }
        }
    }

    let lu = m.clone().lu();
    let g = lu.solve(&b).ok_or(Error::SingularFlow)?;

    // LU "succeeds" on near-singular systems; a residual check catches
    // the garbage it returns there.
    let resid = &m * &g - &b;
    let scale = 1.0 + b.amax();
    if resid.amax() > 1e-9 * scale {
        return Err(Error::SingularFlow);
    }
    if g.iter().any(|&x| x < -1e-9) {
        return Err(Error::SingularFlow);
    }

    let mut rates = Vec::with_capacity(node_count);
    rates.push(1.0);
    rates.extend(g.iter().map(|&x| x.max(0.0)));
    Ok(FlowVector(rates))
}
