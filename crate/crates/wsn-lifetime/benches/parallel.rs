//! Compares the data-parallel surfaces against their sequential
//! counterparts: the exhaustive routing-vertex scan and the epsilon sweep.
//! Run with `cargo bench -p wsn-lifetime`.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use wsn_lifetime::{
    run_simulation, sweep_epsilon, vertex_oracle, vertex_oracle_seq, EnergyParams, NetworkState,
    OracleObjective, Policy, PolicyConfig, Position, SimulationConfig, Topology, Trajectory,
};

fn oracle_topology(relays: usize) -> Topology {
    let positions: Vec<Position> = (0..relays)
        .map(|i| {
            let x = 12.0 * (i + 1) as f64;
            let y = if i % 2 == 0 { 6.0 } else { -6.0 };
            Position::new(x, y)
        })
        .collect();
    Topology::new(positions, Position::new(12.0 * (relays + 1) as f64, 0.0)).unwrap()
}

fn bench_vertex_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("vertex_oracle");
    for relays in [5usize, 6] {
        let topo = oracle_topology(relays);
        let state = NetworkState::new(&vec![100.0; relays + 1], 0.0).unwrap();
        let src = Position::new(0.0, 0.0);
        let params = EnergyParams::default();
        group.bench_function(format!("seq/{relays}_relays"), |b| {
            b.iter(|| {
                vertex_oracle_seq(
                    black_box(&topo),
                    &state,
                    src,
                    &params,
                    OracleObjective::TotalDrain,
                )
                .unwrap()
            })
        });
        group.bench_function(format!("par/{relays}_relays"), |b| {
            b.iter(|| {
                vertex_oracle(
                    black_box(&topo),
                    &state,
                    src,
                    &params,
                    OracleObjective::TotalDrain,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_epsilon_sweep(c: &mut Criterion) {
    let topo = Topology::new(
        vec![Position::new(15.0, 5.0), Position::new(30.0, -5.0)],
        Position::new(45.0, 0.0),
    )
    .unwrap();
    let traj = Trajectory::RandomWalk {
        start: Position::new(0.0, 0.0),
        step_length: 1.0,
        seed: 42,
    };
    let params = EnergyParams::default();
    let energies = [4.0, 400.0, 400.0];
    let cfg = SimulationConfig {
        policy: PolicyConfig {
            policy: Policy::P2,
            ..PolicyConfig::default()
        },
        ..SimulationConfig::default()
    };
    let epsilons = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

    let mut group = c.benchmark_group("epsilon_sweep");
    group.sample_size(10);
    group.bench_function("seq/6_epsilons", |b| {
        b.iter(|| {
            // Serial loop over the same scenario the parallel sweep runs.
            epsilons
                .iter()
                .map(|&eps| {
                    let mut sub = cfg.clone();
                    sub.policy.epsilon = eps;
                    run_simulation(black_box(&topo), &energies, &traj, &params, &sub).unwrap()
                })
                .collect::<Vec<_>>()
        })
    });
    group.bench_function("par/6_epsilons", |b| {
        b.iter(|| {
            sweep_epsilon(
                black_box(&topo),
                &energies,
                &traj,
                &params,
                &cfg,
                &epsilons,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_vertex_oracle, bench_epsilon_sweep);
criterion_main!(benches);
