//! Exhaustive ground truth: enumerate every deterministic routing vector
//! (each node commits all its traffic to one out-neighbor), evaluate the
//! requested objective, and return the best. Intended for cross-checking
//! the real solvers on desk-scale networks; the enumeration count is hard
//! bounded.

use crate::error::Error;
use crate::model::{
    flow_solve, workloads, EnergyParams, NetworkState, Position, RoutingVector, Topology,
};

use super::{PolicyOutcome, SolveContext};

pub const VERTEX_ENUMERATION_BOUND: u64 = 1_000_000;

/// Objective evaluated per vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleObjective {
    /// Source drain rate alone (what P1 minimizes).
    SourceWorkload,
    /// Source drain plus `epsilon/nu` times total relay drain (the P2
    /// inner objective at a fixed multiplier).
    Weighted { nu: f64, epsilon: f64 },
    /// Total battery drain (what P3 minimizes).
    TotalDrain,
}

/// Enumerates deterministic routing vectors, parallel when the `parallel`
/// feature is on. Vertices whose flow system is singular (mass trapped in
/// a dead-end cycle) are skipped: they describe no feasible steady state.
pub fn vertex_oracle(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
    objective: OracleObjective,
) -> Result<PolicyOutcome, Error> {
    let prep = Prepared::new(topo, state, src, params, objective)?;

    #[cfg(feature = "parallel")]
    let best = {
        use rayon::prelude::*;
        (0..prep.count)
            .into_par_iter()
            .filter_map(|idx| prep.evaluate(idx).map(|cost| (cost, idx)))
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    };
    #[cfg(not(feature = "parallel"))]
    let best = (0..prep.count)
        .filter_map(|idx| prep.evaluate(idx).map(|cost| (cost, idx)))
        .min_by(|a, b| a.partial_cmp(b).unwrap());

    prep.outcome(best)
}

/// Sequential reference path, available regardless of features (used by
/// the benches to compare against the parallel scan).
pub fn vertex_oracle_seq(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
    objective: OracleObjective,
) -> Result<PolicyOutcome, Error> {
    let prep = Prepared::new(topo, state, src, params, objective)?;
    let best = (0..prep.count)
        .filter_map(|idx| prep.evaluate(idx).map(|cost| (cost, idx)))
        .min_by(|a, b| a.partial_cmp(b).unwrap());
    prep.outcome(best)
}

struct Prepared<'a> {
    topo: &'a Topology,
    params: &'a EnergyParams,
    d0: Vec<f64>,
    /// (sender, out-neighbors) in ascending sender order; the enumeration
    /// index is a mixed-radix number over these rows, most significant
    /// first, so index order is lexicographic in routing choices.
    rows: Vec<(usize, Vec<usize>)>,
    count: u64,
    objective: OracleObjective,
}

impl<'a> Prepared<'a> {
    fn new(
        topo: &'a Topology,
        state: &NetworkState,
        src: Position,
        params: &'a EnergyParams,
        objective: OracleObjective,
    ) -> Result<Self, Error> {
        if let OracleObjective::Weighted { nu, epsilon } = objective {
            if !nu.is_finite() || !epsilon.is_finite() || epsilon < 0.0 {
                return Err(Error::InvalidInput(
                    "weighted objective needs finite nu and nonnegative epsilon".into(),
                ));
            }
        }
        let ctx = SolveContext::new(topo, state, src, params)?;
        if ctx.sets.out(0).is_empty() {
            return Err(Error::NoRoute);
        }
        let mut rows = Vec::new();
        let mut count: u128 = 1;
        for sender in 0..topo.battery_count() {
            let out = ctx.sets.out(sender);
            if out.is_empty() {
                continue;
            }
            count *= out.len() as u128;
            rows.push((sender, out.to_vec()));
        }
        if count > VERTEX_ENUMERATION_BOUND as u128 {
            return Err(Error::TooLarge {
                count,
                bound: VERTEX_ENUMERATION_BOUND,
            });
        }
        Ok(Self {
            topo,
            params,
            d0: ctx.d0,
            rows,
            count: count as u64,
            objective,
        })
    }

    fn vertex(&self, mut idx: u64) -> RoutingVector {
        let mut w = RoutingVector::new();
        for (sender, out) in self.rows.iter().rev() {
            let pick = (idx % out.len() as u64) as usize;
            idx /= out.len() as u64;
            w.set_row(*sender, vec![(out[pick], 1.0)]);
        }
        w
    }

    fn evaluate(&self, idx: u64) -> Option<f64> {
        let w = self.vertex(idx);
        let flow = flow_solve(&w, self.topo.node_count()).ok()?;
        let loads = workloads(&w, &flow, self.topo, &self.d0, self.params);
        Some(match self.objective {
            OracleObjective::SourceWorkload => loads[0],
            OracleObjective::Weighted { nu, epsilon } => {
                let relay_sum: f64 = loads[1..].iter().sum();
                if nu.abs() < 1e-9 {
                    -epsilon * relay_sum
                } else {
                    loads[0] + epsilon / nu * relay_sum
                }
            }
            OracleObjective::TotalDrain => loads.iter().sum(),
        })
    }

    fn outcome(&self, best: Option<(f64, u64)>) -> Result<PolicyOutcome, Error> {
        let (cost, idx) = best.ok_or(Error::SingularFlow)?;
        let w = self.vertex(idx);
        let flow = flow_solve(&w, self.topo.node_count())?;
        let loads = workloads(&w, &flow, self.topo, &self.d0, self.params);
        Ok(PolicyOutcome {
            w,
            objective: cost,
            nu: None,
            path: None,
            workloads: loads,
            nonconvex_warning: false,
        })
    }
}
