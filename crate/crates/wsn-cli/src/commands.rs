//! Command implementations behind the `wsnlife` binary. Each command
//! loads and validates a scenario, applies flag overrides (flag beats
//! file beats default), runs the requested solver, and writes its trace
//! files into the output directory.

use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::scenario::{parse_scenario, validate, PolicyName, ScenarioDoc, TrajectoryTable};
use crate::trace;
use wsn_lifetime::{run_simulation, shoot, sweep_epsilon, Termination};

/// Command-line overrides; every field beats the scenario file when set.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub policy: Option<PolicyName>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub threshold: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioDoc, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    parse_scenario(&text)
}

fn apply_overrides(doc: &mut ScenarioDoc, ov: &Overrides) -> Result<(), CliError> {
    if let Some(policy) = ov.policy {
        doc.simulation.policy = policy;
    }
    if let Some(epsilon) = ov.epsilon {
        doc.simulation.epsilon = epsilon;
    }
    if let Some(delta) = ov.delta {
        doc.simulation.delta = delta;
    }
    if let Some(threshold) = ov.threshold {
        doc.simulation.threshold = threshold;
    }
    if let Some(seed) = ov.seed {
        match &mut doc.trajectory {
            TrajectoryTable::RandomWalk { seed: s, .. } => *s = seed,
            _ => {
                return Err(CliError::Config(
                    "--seed applies only to random-walk trajectories".into(),
                ))
            }
        }
    }
    if let Some(dir) = &ov.out_dir {
        doc.output.dir = dir.display().to_string();
    }
    // Re-check so a bad flag value is reported exactly like a bad file
    // value.
    validate(doc)
}

fn prepare(path: &Path, ov: &Overrides) -> Result<ScenarioDoc, CliError> {
    let mut doc = load_scenario(path)?;
    apply_overrides(&mut doc, ov)?;
    Ok(doc)
}

fn scenario_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string())
}

fn out_dir(doc: &ScenarioDoc) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(&doc.output.dir);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

#[derive(Debug)]
pub struct SimulateReport {
    pub lifetime: f64,
    pub termination: Termination,
    pub steps: usize,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn cmd_simulate(path: &Path, ov: &Overrides) -> Result<SimulateReport, CliError> {
    let doc = prepare(path, ov)?;
    let topo = doc.topology()?;
    let result = run_simulation(
        &topo,
        &doc.initial_energies(),
        &doc.trajectory(),
        &doc.energy_params(),
        &doc.simulation_config(),
    )?;

    let dir = out_dir(&doc)?;
    let stem = scenario_stem(path);
    let trace_path = dir.join(format!("{stem}_trace.csv"));
    let summary_path = dir.join(format!("{stem}_summary.toml"));
    write_file(&trace_path, &trace::simulation_trace_csv(&topo, &result))?;
    let policy = doc.simulation.policy;
    let epsilon = (policy == PolicyName::P2).then_some(doc.simulation.epsilon);
    write_file(
        &summary_path,
        &trace::simulation_summary_toml(
            &result,
            policy,
            doc.simulation.delta,
            doc.simulation.threshold,
            epsilon,
            doc.seed(),
        )?,
    )?;

    Ok(SimulateReport {
        lifetime: result.lifetime,
        termination: result.termination,
        steps: result.steps.len(),
        trace_path,
        summary_path,
    })
}

#[derive(Debug)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lifetime: f64,
    pub termination: Termination,
    pub steps: usize,
}

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub table_path: PathBuf,
}

pub fn cmd_sweep(path: &Path, epsilons: &[f64], ov: &Overrides) -> Result<SweepReport, CliError> {
    if epsilons.is_empty() {
        return Err(CliError::Config("--epsilon needs at least one value".into()));
    }
    if let Some(bad) = epsilons.iter().find(|e| !e.is_finite() || **e < 0.0) {
        return Err(CliError::Config(format!(
            "sweep weights must be finite and nonnegative, got {bad}"
        )));
    }
    if let Some(policy) = ov.policy {
        if policy != PolicyName::P2 {
            return Err(CliError::Config(
                "the weight sweep is defined for policy p2 only".into(),
            ));
        }
    }
    let mut doc = prepare(path, ov)?;
    doc.simulation.policy = PolicyName::P2;

    let topo = doc.topology()?;
    let runs = sweep_epsilon(
        &topo,
        &doc.initial_energies(),
        &doc.trajectory(),
        &doc.energy_params(),
        &doc.simulation_config(),
        epsilons,
    )?;

    let dir = out_dir(&doc)?;
    let stem = scenario_stem(path);
    for run in &runs {
        let trace_path = dir.join(format!("{stem}_eps{}_trace.csv", run.epsilon));
        write_file(&trace_path, &trace::simulation_trace_csv(&topo, &run.result))?;
        let summary_path = dir.join(format!("{stem}_eps{}_summary.toml", run.epsilon));
        write_file(
            &summary_path,
            &trace::simulation_summary_toml(
                &run.result,
                PolicyName::P2,
                doc.simulation.delta,
                doc.simulation.threshold,
                Some(run.epsilon),
                doc.seed(),
            )?,
        )?;
    }
    let table_rows: Vec<(f64, &wsn_lifetime::SimulationResult)> =
        runs.iter().map(|r| (r.epsilon, &r.result)).collect();
    let table_path = dir.join(format!("{stem}_sweep.csv"));
    write_file(&table_path, &trace::sweep_csv(&table_rows))?;

    Ok(SweepReport {
        rows: runs
            .iter()
            .map(|r| SweepRow {
                epsilon: r.epsilon,
                lifetime: r.result.lifetime,
                termination: r.result.termination,
                steps: r.result.steps.len(),
            })
            .collect(),
        table_path,
    })
}

#[derive(Debug)]
pub struct TpbvpReport {
    pub t_final: f64,
    pub nu: f64,
    pub mu: (f64, f64),
    pub residual_norm: f64,
    pub iterations: usize,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

pub fn cmd_tpbvp(path: &Path, ov: &Overrides) -> Result<TpbvpReport, CliError> {
    if ov.policy.is_some() || ov.epsilon.is_some() || ov.delta.is_some() || ov.seed.is_some() {
        return Err(CliError::Config(
            "the boundary-value solver takes only --threshold and --out-dir overrides".into(),
        ));
    }
    let doc = prepare(path, ov)?;
    let motion = doc.parametric_motion()?;
    let topo = doc.topology()?;

    // A death threshold shifts every battery's usable energy; drains are
    // level-independent, so integrating from the shifted levels down to
    // zero reproduces threshold-crossing times exactly.
    let threshold = doc.simulation.threshold;
    let initial: Vec<f64> = doc
        .initial_energies()
        .iter()
        .map(|r| r * (1.0 - threshold))
        .collect();

    let solution = shoot(
        &topo,
        &initial,
        &motion,
        &doc.energy_params(),
        doc.shooting_guess(),
        &doc.shooting_config(),
    )?;

    let dir = out_dir(&doc)?;
    let stem = scenario_stem(path);
    let trace_path = dir.join(format!("{stem}_tpbvp_trace.csv"));
    let summary_path = dir.join(format!("{stem}_tpbvp_summary.toml"));
    write_file(
        &trace_path,
        &trace::shooting_trace_csv(&solution, topo.battery_count()),
    )?;
    let counting = match doc.shooting.counting {
        crate::scenario::CountingName::Doubled => "doubled",
        crate::scenario::CountingName::Single => "single",
    };
    write_file(&summary_path, &trace::shooting_summary_toml(&solution, counting)?)?;

    Ok(TpbvpReport {
        t_final: solution.unknowns.t_final,
        nu: solution.unknowns.nu,
        mu: (solution.unknowns.mu_x, solution.unknowns.mu_y),
        residual_norm: solution.residual_norm,
        iterations: solution.iterations,
        trace_path,
        summary_path,
    })
}

pub fn cmd_validate(path: &Path) -> Result<(), CliError> {
    load_scenario(path).map(|_| ())
}
