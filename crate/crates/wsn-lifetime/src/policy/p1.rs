//! Greedy source policy: all source traffic to the cheapest out-arc.
//!
//! The source's drain rate is linear in its own forwarding row and does
//! not depend on the relay rows, so the optimum sits at a vertex of the
//! simplex: weight one on the arc with the smallest transmit cost. Relay
//! rows are filled uniformly, which keeps the rest of the network feasible
//! without affecting the objective.

use crate::error::Error;
use crate::model::{flow_solve, workloads, EnergyParams, NetworkState, Position, RoutingVector, Topology};

use super::{PolicyOutcome, SolveContext};

pub fn solve_p1(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
) -> Result<PolicyOutcome, Error> {
    let ctx = SolveContext::new(topo, state, src, params)?;
    let best = ctx.cheapest_source_arc()?;

    let mut w = RoutingVector::new();
    w.set_row(0, vec![(best, 1.0)]);
    ctx.fill_uniform_relay_rows(&mut w);

    let flow = flow_solve(&w, topo.node_count())?;
    let loads = workloads(&w, &flow, topo, &ctx.d0, params);
    Ok(PolicyOutcome {
        objective: loads[0],
        w,
        nu: None,
        path: None,
        workloads: loads,
        nonconvex_warning: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> Topology {
        Topology::new(
            vec![Position::new(10.0, 0.0)],
            Position::new(20.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn routes_everything_to_the_nearest_node() {
        let topo = line3();
        let state = NetworkState::new(&[80.0, 80.0], 0.0).unwrap();
        let out = solve_p1(&topo, &state, Position::new(0.0, 0.0), &EnergyParams::default())
            .unwrap();
        assert_eq!(out.w.weight(0, 1), 1.0);
        assert_eq!(out.w.weight(0, 2), 0.0);
        assert!((out.objective - 0.06).abs() < 1e-15);
        assert!(out.w.is_row_stochastic(1e-12));
        assert!((out.workloads[1] - 0.11).abs() < 1e-15);
    }

    #[test]
    fn equidistant_tie_goes_to_the_lowest_id() {
        let topo = Topology::new(
            vec![Position::new(0.0, 10.0), Position::new(10.0, 0.0)],
            Position::new(50.0, 0.0),
        )
        .unwrap();
        let state = NetworkState::new(&[80.0, 80.0, 80.0], 0.0).unwrap();
        let out = solve_p1(&topo, &state, Position::new(0.0, 0.0), &EnergyParams::default())
            .unwrap();
        assert_eq!(out.w.weight(0, 1), 1.0);
    }

    #[test]
    fn dead_nearest_relay_is_skipped() {
        let topo = line3();
        let state = NetworkState::new(&[80.0, 80.0], 0.0).unwrap();
        let dead_relay = crate::model::energy_step(&state, &[0.0, 100.0], 1.0);
        let out = solve_p1(
            &topo,
            &dead_relay,
            Position::new(0.0, 0.0),
            &EnergyParams::default(),
        )
        .unwrap();
        assert_eq!(out.w.weight(0, 2), 1.0, "direct to base");
        assert_eq!(out.objective, 0.09);
    }

    #[test]
    fn isolated_source_is_no_route() {
        let topo = line3().with_ranges(vec![5.0, f64::INFINITY]).unwrap();
        let state = NetworkState::new(&[80.0, 80.0], 0.0).unwrap();
        let err = solve_p1(&topo, &state, Position::new(0.0, 0.0), &EnergyParams::default())
            .unwrap_err();
        assert_eq!(err, Error::NoRoute);
    }
}
