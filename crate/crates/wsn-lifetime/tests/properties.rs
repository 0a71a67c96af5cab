//! Randomized-geometry property tests for the algebraic invariants that
//! every routing solver and the simulator must uphold: row stochasticity,
//! flow conservation, workload sign and monotonicity, nonincreasing
//! battery traces, drain bookkeeping closure, and solver purity.

use proptest::prelude::*;
use wsn_lifetime::{
    flow_solve, neighbor_sets, nu_residual, relay_workload, run_simulation, solve_p1, solve_p2,
    solve_p3_shortest_path, source_distances, source_workload, vertex_oracle, workloads,
    EnergyParams, Error, NetworkState, Policy, PolicyConfig, PolicyOutcome, Position,
    RoutingVector, SimulationConfig, Topology, Trajectory,
};

fn coord() -> impl Strategy<Value = f64> {
    -50.0..50.0f64
}

fn position() -> impl Strategy<Value = Position> {
    (coord(), coord()).prop_map(|(x, y)| Position::new(x, y))
}

prop_compose! {
    /// A fully connected network: relay positions, a base, and a source
    /// position, all inside a 100x100 box with unlimited ranges.
    fn geometry(max_relays: usize)(
        relays in prop::collection::vec(position(), 1..=max_relays),
        base in position(),
        src in position(),
    ) -> (Topology, Position) {
        (Topology::new(relays, base).unwrap(), src)
    }
}

/// Strictly positive row weights over every out-set, normalized to sum to
/// one. Strict positivity guarantees every node keeps leaking toward the
/// base, so the induced flow system is nonsingular.
fn random_routing(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    raw: &[f64],
) -> RoutingVector {
    let d0 = source_distances(topo, src);
    let sets = neighbor_sets(topo, state.alive_flags(), &d0);
    let mut w = RoutingVector::new();
    let mut next = 0;
    for i in 0..topo.battery_count() {
        let out = sets.out(i);
        if out.is_empty() {
            continue;
        }
        let weights: Vec<f64> = out.iter().map(|_| {
            let v = raw[next % raw.len()];
            next += 1;
            v
        }).collect();
        let total: f64 = weights.iter().sum();
        w.set_row(
            i,
            out.iter()
                .zip(&weights)
                .map(|(&j, &v)| (j, v / total))
                .collect(),
        );
    }
    w
}

fn check_feasible(outcome: &PolicyOutcome, topo: &Topology, state: &NetworkState, src: Position) {
    let d0 = source_distances(topo, src);
    let sets = neighbor_sets(topo, state.alive_flags(), &d0);
    assert!(outcome.w.is_row_stochastic(1e-12));
    for i in 0..topo.battery_count() {
        if !state.alive(i) || sets.out(i).is_empty() {
            assert!(outcome.w.row(i).is_none());
            continue;
        }
        let row = outcome.w.row(i).expect("alive sender with neighbors needs a row");
        let sum: f64 = row.iter().map(|&(_, v)| v).sum();
        assert!((sum - 1.0).abs() <= 1e-12, "row {i} sums to {sum}");
        for &(j, v) in row {
            assert!(sets.out(i).contains(&j), "row {i} routes to non-neighbor {j}");
            assert!(v >= 0.0);
        }
    }
    assert!(outcome.objective.is_finite());
    assert!(outcome.workloads.iter().all(|&l| l.is_finite() && l >= 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Greedy and shortest-path solves return feasible rows on every
    /// connected geometry: stochastic, supported on the out-sets, with
    /// finite nonnegative drain rates.
    #[test]
    fn greedy_and_shortest_path_rows_are_feasible((topo, src) in geometry(4)) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        for outcome in [
            solve_p1(&topo, &state, src, &params).unwrap(),
            solve_p3_shortest_path(&topo, &state, src, &params).unwrap(),
        ] {
            check_feasible(&outcome, &topo, &state, src);
        }
    }

    /// Any strictly positive row-stochastic routing conserves flow: the
    /// base absorbs exactly the unit rate the source generates.
    #[test]
    fn positive_routing_conserves_flow(
        (topo, src) in geometry(5),
        raw in prop::collection::vec(0.01..1.0f64, 32),
    ) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        let w = random_routing(&topo, &state, src, &raw);
        let flow = flow_solve(&w, topo.node_count()).unwrap();
        prop_assert!((flow.rate(topo.base_id()) - 1.0).abs() <= 1e-9);
        prop_assert!(flow.rates().iter().all(|&g| g >= 0.0));

        let d0 = source_distances(&topo, src);
        let loads = workloads(&w, &flow, &topo, &d0, &params);
        prop_assert!(loads.iter().all(|&l| l.is_finite() && l >= 0.0));
    }

    /// Drain rates grow strictly with any single arc distance, for both
    /// the source's transmit arc and a relay's forwarding arc.
    #[test]
    fn workload_grows_with_arc_distance(
        d in 1.0..100.0f64,
        bump in 0.1..10.0f64,
    ) {
        let params = EnergyParams::default();

        let mut w = RoutingVector::new();
        w.set_row(0, vec![(1, 1.0)]);
        let near = source_workload(&w, &[0.0, d, 2.0 * d], &params);
        let far = source_workload(&w, &[0.0, d + bump, 2.0 * d], &params);
        prop_assert!(far > near);

        // Relay 1 forwards everything to the base; pushing the base away
        // lengthens exactly that one arc.
        let relay = vec![Position::new(0.0, 0.0)];
        let near_topo = Topology::new(relay.clone(), Position::new(d, 0.0)).unwrap();
        let far_topo = Topology::new(relay, Position::new(d + bump, 0.0)).unwrap();
        let mut wr = RoutingVector::new();
        wr.set_row(0, vec![(1, 1.0)]);
        wr.set_row(1, vec![(2, 1.0)]);
        let flow = flow_solve(&wr, 3).unwrap();
        let near_load = relay_workload(1, &wr, &flow, &near_topo, &params);
        let far_load = relay_workload(1, &wr, &flow, &far_topo, &params);
        prop_assert!(far_load > near_load);
    }

    /// The greedy objective equals the exhaustive minimum of the source
    /// drain over all deterministic routings, on any geometry small
    /// enough to enumerate.
    #[test]
    fn greedy_matches_enumeration((topo, src) in geometry(3)) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        let greedy = solve_p1(&topo, &state, src, &params).unwrap();
        let oracle = vertex_oracle(
            &topo,
            &state,
            src,
            &params,
            wsn_lifetime::OracleObjective::SourceWorkload,
        )
        .unwrap();
        prop_assert!((greedy.objective - oracle.objective).abs() <= 1e-12);
    }

    /// The shortest-path drain equals the exhaustive minimum of total
    /// drain over all deterministic routings.
    #[test]
    fn shortest_path_matches_enumeration((topo, src) in geometry(3)) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        let sp = solve_p3_shortest_path(&topo, &state, src, &params).unwrap();
        let oracle = vertex_oracle(
            &topo,
            &state,
            src,
            &params,
            wsn_lifetime::OracleObjective::TotalDrain,
        )
        .unwrap();
        prop_assert!((sp.objective - oracle.objective).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// When the balance solver converges it returns feasible rows and a
    /// self-consistent nonpositive multiplier; when the fixed point runs
    /// away (possible on cycle-rich degenerate geometries, where the
    /// weighted objective rewards near-cycle routing without bound) it
    /// reports that as a typed error instead of a bogus vector. At zero
    /// weight it always recovers the greedy objective.
    #[test]
    fn balance_solver_rows_and_multiplier(
        (topo, src) in geometry(2),
        epsilon in 0.0..4.0f64,
    ) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        let cfg = PolicyConfig { policy: Policy::P2, epsilon, ..PolicyConfig::default() };
        match solve_p2(&topo, &state, src, &params, &cfg) {
            Ok(outcome) => {
                check_feasible(&outcome, &topo, &state, src);
                let nu = outcome.nu.expect("balance solve reports its multiplier");
                prop_assert!(nu <= 0.0);
                let implied = nu_residual(&outcome.workloads, epsilon).unwrap();
                prop_assert!((implied - nu).abs() <= cfg.nu.tol);
            }
            Err(Error::NuDiverged { .. }) => {}
            Err(other) => return Err(TestCaseError::fail(format!("unexpected error {other}"))),
        }

        let zero = PolicyConfig { epsilon: 0.0, ..cfg };
        let collapsed = solve_p2(&topo, &state, src, &params, &zero).unwrap();
        let greedy = solve_p1(&topo, &state, src, &params).unwrap();
        prop_assert!((collapsed.objective - greedy.objective).abs() <= 1e-9);
    }

    /// Solvers are pure: the same instant solved twice gives bitwise
    /// identical outcomes, including the multistart descent.
    #[test]
    fn solvers_are_pure(
        (topo, src) in geometry(2),
        epsilon in 0.0..4.0f64,
    ) {
        let energies = vec![100.0; topo.battery_count()];
        let state = NetworkState::new(&energies, 0.0).unwrap();
        let params = EnergyParams::default();
        let cfg = PolicyConfig { policy: Policy::P2, epsilon, ..PolicyConfig::default() };
        prop_assert_eq!(
            solve_p1(&topo, &state, src, &params).unwrap(),
            solve_p1(&topo, &state, src, &params).unwrap()
        );
        prop_assert_eq!(
            solve_p3_shortest_path(&topo, &state, src, &params).unwrap(),
            solve_p3_shortest_path(&topo, &state, src, &params).unwrap()
        );
        // P2 may legitimately fail to converge; purity still demands the
        // identical Result, error or not.
        prop_assert_eq!(
            solve_p2(&topo, &state, src, &params, &cfg),
            solve_p2(&topo, &state, src, &params, &cfg)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Battery traces never increase, and dead nodes stay dead.
    #[test]
    fn battery_traces_never_increase(
        (topo, src) in geometry(3),
        source_energy in 5.0..30.0f64,
        relay_energy in 10.0..100.0f64,
        shortest_path in any::<bool>(),
    ) {
        let mut energies = vec![relay_energy; topo.battery_count()];
        energies[0] = source_energy;
        let policy = if shortest_path { Policy::P3 } else { Policy::P1 };
        let cfg = SimulationConfig {
            delta: 1.0,
            death_threshold: 0.0,
            max_steps: 500,
            policy: PolicyConfig { policy, ..PolicyConfig::default() },
        };
        let result = run_simulation(
            &topo,
            &energies,
            &Trajectory::Stationary(src),
            &EnergyParams::default(),
            &cfg,
        )
        .unwrap();

        prop_assert!(!result.steps.is_empty());
        for pair in result.steps.windows(2) {
            for i in 0..topo.battery_count() {
                prop_assert!(pair[1].residual[i] <= pair[0].residual[i]);
                prop_assert!(pair[0].alive[i] || !pair[1].alive[i], "node {i} revived");
            }
        }
        let last = result.steps.last().unwrap();
        for i in 0..topo.battery_count() {
            prop_assert!(result.final_residual[i] <= last.residual[i]);
        }
        prop_assert!(result.lifetime >= 0.0);
    }

    /// With batteries too large to clamp, the total energy that leaves
    /// the network equals the time-integrated drain of every step.
    #[test]
    fn drain_bookkeeping_closes(
        (topo, src) in geometry(3),
        delta in 0.25..2.0f64,
        max_steps in 10..40usize,
        shortest_path in any::<bool>(),
    ) {
        let energies = vec![1000.0; topo.battery_count()];
        let policy = if shortest_path { Policy::P3 } else { Policy::P1 };
        let cfg = SimulationConfig {
            delta,
            death_threshold: 0.0,
            max_steps,
            policy: PolicyConfig { policy, ..PolicyConfig::default() },
        };
        let result = run_simulation(
            &topo,
            &energies,
            &Trajectory::Stationary(src),
            &EnergyParams::default(),
            &cfg,
        )
        .unwrap();

        prop_assert_eq!(result.steps.len(), max_steps);
        let spent: f64 = (0..topo.battery_count())
            .map(|i| energies[i] - result.final_residual[i])
            .sum();
        let charged: f64 = result
            .steps
            .iter()
            .map(|rec| delta * rec.workloads.iter().sum::<f64>())
            .sum();
        prop_assert!((spent - charged).abs() <= 1e-9, "spent {spent} vs charged {charged}");
    }
}
