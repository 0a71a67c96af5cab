//! Trace export: per-step CSV tables and TOML summaries. Floats are
//! written with the shortest representation that parses back to the
//! identical bit pattern, so traces round-trip at full precision.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::CliError;
use crate::scenario::PolicyName;
use wsn_lifetime::{ShootingSolution, SimulationResult, Termination, Topology};

pub fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::SourceDead => "source-dead",
        Termination::NoRoute => "no-route",
        Termination::MaxSteps => "max-steps",
    }
}

/// All sender-to-receiver pairs the routing vector could ever use, in
/// (sender, receiver) order. The set is structural, so the column layout
/// never changes as nodes die or the source moves.
pub fn arc_columns(topo: &Topology) -> Vec<(usize, usize)> {
    let base = topo.base_id();
    let mut cols = Vec::new();
    for i in 0..topo.battery_count() {
        for j in 1..=base {
            if j != i {
                cols.push((i, j));
            }
        }
    }
    cols
}

/// One row per simulated step: time, source position, residual energies,
/// drain rates, every routing weight, alive flags, and the active path
/// for the shortest-path policy.
pub fn simulation_trace_csv(topo: &Topology, result: &SimulationResult) -> String {
    let battery = topo.battery_count();
    let arcs = arc_columns(topo);
    let mut out = String::new();

    out.push_str("k,t,x0,y0");
    for i in 0..battery {
        let _ = write!(out, ",r_{i}");
    }
    for i in 0..battery {
        let _ = write!(out, ",I_{i}");
    }
    for &(i, j) in &arcs {
        let _ = write!(out, ",w_{i}_{j}");
    }
    for i in 0..battery {
        let _ = write!(out, ",alive_{i}");
    }
    out.push_str(",path\n");

    for rec in &result.steps {
        let _ = write!(out, "{},{},{},{}", rec.step, rec.t, rec.source.x, rec.source.y);
        for i in 0..battery {
            let _ = write!(out, ",{}", rec.residual[i]);
        }
        for i in 0..battery {
            let _ = write!(out, ",{}", rec.workloads[i]);
        }
        for &(i, j) in &arcs {
            let _ = write!(out, ",{}", rec.w.weight(i, j));
        }
        for i in 0..battery {
            let _ = write!(out, ",{}", u8::from(rec.alive[i]));
        }
        out.push(',');
        if let Some(path) = &rec.path {
            let hops: Vec<String> = path.iter().map(|n| n.to_string()).collect();
            out.push_str(&hops.join(">"));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    lifetime: f64,
    termination: &'a str,
    steps: usize,
    policy: &'a str,
    delta: f64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    final_residual: &'a [f64],
}

/// Sidecar summary for one simulation run.
pub fn simulation_summary_toml(
    result: &SimulationResult,
    policy: PolicyName,
    delta: f64,
    threshold: f64,
    epsilon: Option<f64>,
    seed: Option<u64>,
) -> Result<String, CliError> {
    let doc = SimulationSummary {
        lifetime: result.lifetime,
        termination: termination_str(result.termination),
        steps: result.steps.len(),
        policy: policy.as_str(),
        delta,
        threshold,
        epsilon,
        seed,
        final_residual: &result.final_residual,
    };
    toml::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))
}

/// Comparison table for a weight sweep: one row per epsilon.
pub fn sweep_csv(rows: &[(f64, &SimulationResult)]) -> String {
    let mut out = String::from("epsilon,lifetime,termination,steps\n");
    for (epsilon, result) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            epsilon,
            result.lifetime,
            termination_str(result.termination),
            result.steps.len()
        );
    }
    out
}

/// State/costate trace along the shooting solver's final forward pass.
pub fn shooting_trace_csv(solution: &ShootingSolution, battery_count: usize) -> String {
    let mut out = String::from("t,x0,y0");
    for i in 0..battery_count {
        let _ = write!(out, ",r_{i}");
    }
    out.push_str(",lambda_x,lambda_y\n");
    for point in &solution.grid {
        let _ = write!(out, "{},{},{}", point.t, point.source.x, point.source.y);
        for i in 0..battery_count {
            let _ = write!(out, ",{}", point.residual[i]);
        }
        let _ = writeln!(out, ",{},{}", point.lambda_x, point.lambda_y);
    }
    out
}

#[derive(Serialize)]
struct ShootingSummary<'a> {
    t_final: f64,
    nu: f64,
    mu_x: f64,
    mu_y: f64,
    residual_norm: f64,
    iterations: usize,
    counting: &'a str,
}

pub fn shooting_summary_toml(
    solution: &ShootingSolution,
    counting: &str,
) -> Result<String, CliError> {
    let doc = ShootingSummary {
        t_final: solution.unknowns.t_final,
        nu: solution.unknowns.nu,
        mu_x: solution.unknowns.mu_x,
        mu_y: solution.unknowns.mu_y,
        residual_norm: solution.residual_norm,
        iterations: solution.iterations,
        counting,
    };
    toml::to_string_pretty(&doc).map_err(|e| CliError::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wsn_lifetime::{
        run_simulation, EnergyParams, Position, SimulationConfig, Topology, Trajectory,
    };

    fn line_run() -> (Topology, SimulationResult) {
        let topo = Topology::new(
            vec![Position::new(10.0, 0.0)],
            Position::new(20.0, 0.0),
        )
        .unwrap();
        let cfg = SimulationConfig {
            max_steps: 5,
            ..SimulationConfig::default()
        };
        let result = run_simulation(
            &topo,
            &[80.0, 1000.0],
            &Trajectory::Stationary(Position::new(0.0, 0.0)),
            &EnergyParams::default(),
            &cfg,
        )
        .unwrap();
        (topo, result)
    }

    #[test]
    fn trace_has_constant_column_count() {
        let (topo, result) = line_run();
        let csv = simulation_trace_csv(&topo, &result);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        let cols = header.split(',').count();
        // k,t,x0,y0 + r*2 + I*2 + w arcs {01,02,12} + alive*2 + path
        assert_eq!(cols, 4 + 2 + 2 + 3 + 2 + 1);
        let mut rows = 0;
        for line in lines {
            assert_eq!(line.split(',').count(), cols, "{line}");
            rows += 1;
        }
        assert_eq!(rows, 5);
    }

    #[test]
    fn floats_round_trip_through_the_trace() {
        let (topo, result) = line_run();
        let csv = simulation_trace_csv(&topo, &result);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let r0: f64 = row[4].parse().unwrap();
        assert_eq!(r0.to_bits(), result.steps[0].residual[0].to_bits());
        let w01: f64 = row[8].parse().unwrap();
        assert_eq!(w01.to_bits(), result.steps[0].w.weight(0, 1).to_bits());
    }

    #[test]
    fn summary_reports_run_shape() {
        let (_, result) = line_run();
        let text =
            simulation_summary_toml(&result, PolicyName::P1, 1.0, 0.0, None, Some(7)).unwrap();
        assert!(text.contains("termination = \"max-steps\""), "{text}");
        assert!(text.contains("steps = 5"), "{text}");
        assert!(text.contains("seed = 7"), "{text}");
        assert!(!text.contains("epsilon"), "{text}");
    }
}
