//! Scenario documents: a single TOML file describing the radio constants,
//! the node table, the source trajectory, and solver settings. Parsing
//! reports TOML diagnostics with line/column context; validation collects
//! every violation instead of stopping at the first.

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use wsn_lifetime::{
    DescentConfig, EnergyParams, MotionFamily, NuIteration, ParametricMotion, Policy,
    PolicyConfig, Position, ShootingConfig, ShootingUnknowns, SimulationConfig, TerminalCounting,
    Topology, Trajectory,
};

/// Routing policy names as they appear in scenario files and on the
/// command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    /// Greedy source-drain minimization.
    P1,
    /// Source drain balanced against relay drain via a multiplier.
    P2,
    /// Total-drain shortest path.
    P3,
}

impl PolicyName {
    pub fn to_core(self) -> Policy {
        match self {
            PolicyName::P1 => Policy::P1,
            PolicyName::P2 => Policy::P2,
            PolicyName::P3 => Policy::P3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::P1 => "p1",
            PolicyName::P2 => "p2",
            PolicyName::P3 => "p3",
        }
    }
}

/// How the boundary-value solver counts the terminal motion terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingName {
    Doubled,
    Single,
}

impl CountingName {
    pub fn to_core(self) -> TerminalCounting {
        match self {
            CountingName::Doubled => TerminalCounting::Doubled,
            CountingName::Single => TerminalCounting::Single,
        }
    }
}

/// Per-bit radio constants. Field names follow the conventional symbols:
/// transmit cost over distance d is `c_f + c_s * d^beta`, receiving costs
/// `c_r`, and the source pays `c_e` per sensed bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyTable {
    pub c_s: f64,
    pub c_f: f64,
    pub c_r: f64,
    #[serde(default)]
    pub c_e: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    2.0
}

impl Default for EnergyTable {
    fn default() -> Self {
        let p = EnergyParams::default();
        Self {
            c_s: p.tx_distance,
            c_f: p.tx_fixed,
            c_r: p.rx,
            c_e: p.sense,
            beta: p.path_loss,
        }
    }
}

/// Which node id is the base station, plus an optional explicit arc list
/// overriding range-derived adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkTable {
    pub base: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<(usize, usize)>>,
}

/// One row of the node table. Node 0 is the mobile source: it has a
/// battery and optionally a range, but its position comes from the
/// trajectory. The base row has a position but neither battery nor range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRow {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

/// Source motion. `circular` starts at the phase angle pointing from the
/// center toward `start` and orbits at the declared radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrajectoryTable {
    Stationary {
        position: [f64; 2],
    },
    RandomWalk {
        start: [f64; 2],
        step_length: f64,
        seed: u64,
    },
    Waypoints {
        /// `[t, x, y]` rows; the position is clamped outside the covered
        /// time span and interpolated linearly inside it.
        points: Vec<[f64; 3]>,
    },
    ConstantVelocity {
        start: [f64; 2],
        velocity: [f64; 2],
    },
    Circular {
        start: [f64; 2],
        center: [f64; 2],
        radius: f64,
        angular_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationTable {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_policy")]
    pub policy: PolicyName,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_delta() -> f64 {
    1.0
}

fn default_max_steps() -> usize {
    1_000_000
}

fn default_policy() -> PolicyName {
    PolicyName::P1
}

fn default_epsilon() -> f64 {
    1.0
}

impl Default for SimulationTable {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            threshold: 0.0,
            max_steps: default_max_steps(),
            policy: default_policy(),
            epsilon: default_epsilon(),
        }
    }
}

/// Tuning for the balance-multiplier solver (policy p2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverTable {
    #[serde(default = "default_nu_init")]
    pub nu_init: f64,
    #[serde(default = "default_nu_damping")]
    pub nu_damping: f64,
    #[serde(default = "default_nu_tol")]
    pub nu_tol: f64,
    #[serde(default = "default_nu_max_iter")]
    pub nu_max_iter: usize,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_descent_seed")]
    pub descent_seed: u64,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_descent_max_iter")]
    pub descent_max_iter: usize,
}

fn default_nu_init() -> f64 {
    NuIteration::default().init
}

fn default_nu_damping() -> f64 {
    NuIteration::default().damping
}

fn default_nu_tol() -> f64 {
    NuIteration::default().tol
}

fn default_nu_max_iter() -> usize {
    NuIteration::default().max_iter
}

fn default_starts() -> usize {
    DescentConfig::default().starts
}

fn default_descent_seed() -> u64 {
    DescentConfig::default().seed
}

fn default_grad_tol() -> f64 {
    DescentConfig::default().grad_tol
}

fn default_descent_max_iter() -> usize {
    DescentConfig::default().max_iter
}

impl Default for SolverTable {
    fn default() -> Self {
        Self {
            nu_init: default_nu_init(),
            nu_damping: default_nu_damping(),
            nu_tol: default_nu_tol(),
            nu_max_iter: default_nu_max_iter(),
            starts: default_starts(),
            descent_seed: default_descent_seed(),
            grad_tol: default_grad_tol(),
            descent_max_iter: default_descent_max_iter(),
        }
    }
}

/// Tuning and initial guess for the boundary-value shooting solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootingTable {
    #[serde(default = "default_shoot_steps")]
    pub steps: usize,
    #[serde(default = "default_shoot_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_shoot_tol")]
    pub tol: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_regularization")]
    pub regularization: f64,
    #[serde(default = "default_counting")]
    pub counting: CountingName,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_nu_guess")]
    pub nu: f64,
    #[serde(default = "default_mu_guess")]
    pub mu: [f64; 2],
}

fn default_shoot_steps() -> usize {
    ShootingConfig::default().steps
}

fn default_shoot_max_iter() -> usize {
    ShootingConfig::default().max_iter
}

fn default_shoot_tol() -> f64 {
    ShootingConfig::default().tol
}

fn default_fd_step() -> f64 {
    ShootingConfig::default().fd_step
}

fn default_regularization() -> f64 {
    ShootingConfig::default().regularization
}

fn default_counting() -> CountingName {
    CountingName::Doubled
}

fn default_t_final() -> f64 {
    100.0
}

fn default_nu_guess() -> f64 {
    -1.0
}

fn default_mu_guess() -> [f64; 2] {
    [0.0, 0.0]
}

impl Default for ShootingTable {
    fn default() -> Self {
        Self {
            steps: default_shoot_steps(),
            max_iter: default_shoot_max_iter(),
            tol: default_shoot_tol(),
            fd_step: default_fd_step(),
            regularization: default_regularization(),
            counting: default_counting(),
            t_final: default_t_final(),
            nu: default_nu_guess(),
            mu: default_mu_guess(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTable {
    #[serde(default = "default_out_dir")]
    pub dir: String,
}

fn default_out_dir() -> String {
    ".".to_string()
}

/// A parsed scenario document. `parse` followed by `serialize` is the
/// identity on the canonical form: defaults fill in identically and field
/// order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub energy: EnergyTable,
    pub network: NetworkTable,
    #[serde(rename = "node")]
    pub nodes: Vec<NodeRow>,
    pub trajectory: TrajectoryTable,
    #[serde(default)]
    pub simulation: SimulationTable,
    #[serde(default)]
    pub solver: SolverTable,
    #[serde(default)]
    pub shooting: ShootingTable,
    #[serde(default)]
    pub output: OutputTable,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, CliError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    validate(&doc)?;
    Ok(doc)
}

pub fn serialize_scenario(doc: &ScenarioDoc) -> Result<String, CliError> {
    toml::to_string_pretty(doc).map_err(|e| CliError::Parse(e.to_string()))
}

fn finite(v: f64) -> bool {
    v.is_finite()
}

/// Checks every structural rule and returns the full list of violations.
pub fn validate(doc: &ScenarioDoc) -> Result<(), CliError> {
    let mut bad = Vec::new();
    let base = doc.network.base;

    let e = &doc.energy;
    for (name, v) in [("c_s", e.c_s), ("c_f", e.c_f), ("c_r", e.c_r), ("c_e", e.c_e)] {
        if !finite(v) || v < 0.0 {
            bad.push(format!("energy.{name}: must be finite and nonnegative, got {v}"));
        }
    }
    if !finite(e.beta) || e.beta <= 0.0 {
        bad.push(format!("energy.beta: must be positive, got {}", e.beta));
    }

    if base == 0 {
        bad.push("network.base: node 0 is the source and cannot be the base".into());
    }

    let mut seen = vec![false; base + 1];
    for row in &doc.nodes {
        let id = row.id;
        if id > base {
            bad.push(format!("node {id}: id exceeds the base id {base}"));
            continue;
        }
        if seen[id] {
            bad.push(format!("node {id}: defined more than once"));
            continue;
        }
        seen[id] = true;

        if id == 0 {
            if row.x.is_some() || row.y.is_some() {
                bad.push(
                    "node 0: the source takes its position from the trajectory; remove x/y"
                        .into(),
                );
            }
        } else {
            match (row.x, row.y) {
                (Some(x), Some(y)) if finite(x) && finite(y) => {}
                _ => bad.push(format!("node {id}: needs finite x and y")),
            }
        }

        if id == base {
            if row.energy.is_some() {
                bad.push(format!(
                    "node {id}: the base station is energy-unconstrained; remove energy"
                ));
            }
            if row.range.is_some() {
                bad.push(format!(
                    "node {id}: the base station never transmits; remove range"
                ));
            }
        } else {
            match row.energy {
                Some(r) if finite(r) && r > 0.0 => {}
                Some(r) => bad.push(format!("node {id}: energy must be positive, got {r}")),
                None => bad.push(format!("node {id}: battery node needs an energy")),
            }
            if let Some(r) = row.range {
                if r.is_nan() || r < 0.0 {
                    bad.push(format!("node {id}: range must be nonnegative, got {r}"));
                }
            }
        }
    }
    for (id, present) in seen.iter().enumerate() {
        if !present {
            bad.push(format!("node {id}: missing (ids 0..={base} must all be defined)"));
        }
    }

    if let Some(arcs) = &doc.network.arcs {
        for &(i, j) in arcs {
            if i >= base || j == 0 || j > base || i == j {
                bad.push(format!(
                    "network.arcs: ({i}, {j}) is not a sender-to-receiver pair"
                ));
            }
        }
    }

    match &doc.trajectory {
        TrajectoryTable::Stationary { position } => {
            if !position.iter().all(|&v| finite(v)) {
                bad.push("trajectory: position must be finite".into());
            }
        }
        TrajectoryTable::RandomWalk {
            start, step_length, ..
        } => {
            if !start.iter().all(|&v| finite(v)) {
                bad.push("trajectory: start must be finite".into());
            }
            if !finite(*step_length) || *step_length <= 0.0 {
                bad.push(format!(
                    "trajectory: step_length must be positive, got {step_length}"
                ));
            }
        }
        TrajectoryTable::Waypoints { points } => {
            if points.is_empty() {
                bad.push("trajectory: waypoints need at least one [t, x, y] row".into());
            }
            if points.iter().any(|p| !p.iter().all(|&v| finite(v))) {
                bad.push("trajectory: waypoint rows must be finite".into());
            }
            if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                bad.push("trajectory: waypoint times must be strictly increasing".into());
            }
        }
        TrajectoryTable::ConstantVelocity { start, velocity } => {
            if !start.iter().chain(velocity.iter()).all(|&v| finite(v)) {
                bad.push("trajectory: start and velocity must be finite".into());
            }
        }
        TrajectoryTable::Circular {
            start,
            center,
            radius,
            angular_rate,
        } => {
            if !start.iter().chain(center.iter()).all(|&v| finite(v)) {
                bad.push("trajectory: start and center must be finite".into());
            }
            if !finite(*radius) || *radius < 0.0 {
                bad.push(format!(
                    "trajectory: radius must be nonnegative, got {radius}"
                ));
            }
            if !finite(*angular_rate) {
                bad.push("trajectory: angular_rate must be finite".into());
            }
        }
    }

    let s = &doc.simulation;
    if !finite(s.delta) || s.delta <= 0.0 {
        bad.push(format!("simulation.delta: must be positive, got {}", s.delta));
    }
    if !finite(s.threshold) || !(0.0..1.0).contains(&s.threshold) {
        bad.push(format!(
            "simulation.threshold: must lie in [0, 1), got {}",
            s.threshold
        ));
    }
    if s.max_steps == 0 {
        bad.push("simulation.max_steps: must be at least 1".into());
    }
    if !finite(s.epsilon) || s.epsilon < 0.0 {
        bad.push(format!(
            "simulation.epsilon: must be finite and nonnegative, got {}",
            s.epsilon
        ));
    }

    let nu = &doc.solver;
    if !finite(nu.nu_init) || nu.nu_init >= 0.0 {
        bad.push(format!("solver.nu_init: must be negative, got {}", nu.nu_init));
    }
    if !finite(nu.nu_damping) || !(nu.nu_damping > 0.0 && nu.nu_damping <= 1.0) {
        bad.push(format!(
            "solver.nu_damping: must lie in (0, 1], got {}",
            nu.nu_damping
        ));
    }
    if !finite(nu.nu_tol) || nu.nu_tol <= 0.0 {
        bad.push(format!("solver.nu_tol: must be positive, got {}", nu.nu_tol));
    }
    if nu.nu_max_iter == 0 {
        bad.push("solver.nu_max_iter: must be at least 1".into());
    }
    if nu.starts == 0 {
        bad.push("solver.starts: must be at least 1".into());
    }
    if !finite(nu.grad_tol) || nu.grad_tol <= 0.0 {
        bad.push(format!("solver.grad_tol: must be positive, got {}", nu.grad_tol));
    }
    if nu.descent_max_iter == 0 {
        bad.push("solver.descent_max_iter: must be at least 1".into());
    }

    let sh = &doc.shooting;
    if sh.steps < 2 {
        bad.push("shooting.steps: needs at least 2 grid steps".into());
    }
    if sh.max_iter == 0 {
        bad.push("shooting.max_iter: must be at least 1".into());
    }
    if !finite(sh.tol) || sh.tol <= 0.0 {
        bad.push(format!("shooting.tol: must be positive, got {}", sh.tol));
    }
    if !finite(sh.fd_step) || sh.fd_step <= 0.0 {
        bad.push(format!("shooting.fd_step: must be positive, got {}", sh.fd_step));
    }
    if !finite(sh.regularization) || sh.regularization < 0.0 {
        bad.push(format!(
            "shooting.regularization: must be nonnegative, got {}",
            sh.regularization
        ));
    }
    if !finite(sh.t_final) || sh.t_final <= 0.0 {
        bad.push(format!(
            "shooting.t_final: the horizon guess must be positive, got {}",
            sh.t_final
        ));
    }
    if !finite(sh.nu) || sh.nu >= 0.0 {
        bad.push(format!(
            "shooting.nu: the multiplier guess must be negative, got {}",
            sh.nu
        ));
    }
    if !sh.mu.iter().all(|&v| finite(v)) {
        bad.push("shooting.mu: must be finite".into());
    }

    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(bad))
    }
}

impl ScenarioDoc {
    pub fn base_id(&self) -> usize {
        self.network.base
    }

    fn node(&self, id: usize) -> &NodeRow {
        self.nodes
            .iter()
            .find(|r| r.id == id)
            .expect("validated scenario defines every id")
    }

    pub fn energy_params(&self) -> EnergyParams {
        EnergyParams {
            tx_distance: self.energy.c_s,
            tx_fixed: self.energy.c_f,
            rx: self.energy.c_r,
            sense: self.energy.c_e,
            path_loss: self.energy.beta,
        }
    }

    /// Builds the static topology from the node table. Call only on a
    /// validated document.
    pub fn topology(&self) -> Result<Topology, CliError> {
        let base = self.base_id();
        let relays: Vec<Position> = (1..base)
            .map(|id| {
                let row = self.node(id);
                Position::new(row.x.unwrap(), row.y.unwrap())
            })
            .collect();
        let base_row = self.node(base);
        let base_pos = Position::new(base_row.x.unwrap(), base_row.y.unwrap());
        let ranges: Vec<f64> = (0..base)
            .map(|id| self.node(id).range.unwrap_or(f64::INFINITY))
            .collect();
        let mut topo = Topology::new(relays, base_pos)
            .and_then(|t| t.with_ranges(ranges))
            .map_err(CliError::Solver)?;
        if let Some(arcs) = &self.network.arcs {
            topo = topo.with_arcs(arcs.clone()).map_err(CliError::Solver)?;
        }
        Ok(topo)
    }

    /// Initial battery levels for the source and relays, in id order.
    pub fn initial_energies(&self) -> Vec<f64> {
        (0..self.base_id())
            .map(|id| self.node(id).energy.unwrap())
            .collect()
    }

    pub fn trajectory(&self) -> Trajectory {
        match &self.trajectory {
            TrajectoryTable::Stationary { position } => {
                Trajectory::Stationary(Position::new(position[0], position[1]))
            }
            TrajectoryTable::RandomWalk {
                start,
                step_length,
                seed,
            } => Trajectory::RandomWalk {
                start: Position::new(start[0], start[1]),
                step_length: *step_length,
                seed: *seed,
            },
            TrajectoryTable::Waypoints { points } => Trajectory::Waypoints(
                points
                    .iter()
                    .map(|p| (p[0], Position::new(p[1], p[2])))
                    .collect(),
            ),
            TrajectoryTable::ConstantVelocity { start, velocity } => {
                Trajectory::Parametric(ParametricMotion {
                    family: MotionFamily::ConstantVelocity {
                        vx: velocity[0],
                        vy: velocity[1],
                    },
                    start: Position::new(start[0], start[1]),
                })
            }
            TrajectoryTable::Circular {
                start,
                center,
                radius,
                angular_rate,
            } => Trajectory::Parametric(ParametricMotion {
                family: MotionFamily::Circular {
                    center: Position::new(center[0], center[1]),
                    radius: *radius,
                    angular_rate: *angular_rate,
                },
                start: Position::new(start[0], start[1]),
            }),
        }
    }

    /// The trajectory as closed-form motion for the boundary-value
    /// solver. Stationary sources become zero-velocity motion; sampled
    /// trajectories (random walk, waypoints) have no velocity field and
    /// are rejected.
    pub fn parametric_motion(&self) -> Result<ParametricMotion, CliError> {
        match self.trajectory() {
            Trajectory::Stationary(p) => Ok(ParametricMotion {
                family: MotionFamily::ConstantVelocity { vx: 0.0, vy: 0.0 },
                start: p,
            }),
            Trajectory::Parametric(m) => Ok(m),
            Trajectory::RandomWalk { .. } => Err(CliError::Config(
                "the boundary-value solver needs a closed-form trajectory; \
                 random-walk motion has no velocity field"
                    .into(),
            )),
            Trajectory::Waypoints(_) => Err(CliError::Config(
                "the boundary-value solver needs a closed-form trajectory; \
                 waypoint motion is not differentiable at its knots"
                    .into(),
            )),
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        let s = &self.simulation;
        let nu = &self.solver;
        PolicyConfig {
            policy: s.policy.to_core(),
            epsilon: s.epsilon,
            nu: NuIteration {
                init: nu.nu_init,
                damping: nu.nu_damping,
                tol: nu.nu_tol,
                max_iter: nu.nu_max_iter,
            },
            descent: DescentConfig {
                starts: nu.starts,
                seed: nu.descent_seed,
                grad_tol: nu.grad_tol,
                max_iter: nu.descent_max_iter,
                ..DescentConfig::default()
            },
        }
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        SimulationConfig {
            delta: self.simulation.delta,
            death_threshold: self.simulation.threshold,
            max_steps: self.simulation.max_steps,
            policy: self.policy_config(),
        }
    }

    pub fn shooting_config(&self) -> ShootingConfig {
        let sh = &self.shooting;
        ShootingConfig {
            steps: sh.steps,
            max_iter: sh.max_iter,
            tol: sh.tol,
            fd_step: sh.fd_step,
            regularization: sh.regularization,
            counting: sh.counting.to_core(),
        }
    }

    pub fn shooting_guess(&self) -> ShootingUnknowns {
        let sh = &self.shooting;
        ShootingUnknowns {
            t_final: sh.t_final,
            nu: sh.nu,
            mu_x: sh.mu[0],
            mu_y: sh.mu[1],
        }
    }

    /// Seed recorded in trace summaries, when the trajectory has one.
    pub fn seed(&self) -> Option<u64> {
        match &self.trajectory {
            TrajectoryTable::RandomWalk { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3_text() -> &'static str {
        r#"
[network]
base = 2

[[node]]
id = 0
energy = 80.0

[[node]]
id = 1
x = 10.0
y = 0.0
energy = 1000.0

[[node]]
id = 2
x = 20.0
y = 0.0

[trajectory]
kind = "stationary"
position = [0.0, 0.0]
"#
    }

    #[test]
    fn parses_with_defaults() {
        let doc = parse_scenario(line3_text()).unwrap();
        assert_eq!(doc.base_id(), 2);
        assert_eq!(doc.energy_params(), EnergyParams::default());
        assert_eq!(doc.simulation.delta, 1.0);
        assert_eq!(doc.simulation.policy, PolicyName::P1);
        assert_eq!(doc.initial_energies(), vec![80.0, 1000.0]);
        let topo = doc.topology().unwrap();
        assert_eq!(topo.base_id(), 2);
        assert_eq!(topo.position(1), Position::new(10.0, 0.0));
        assert!(topo.range(0).is_infinite());
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let doc = parse_scenario(line3_text()).unwrap();
        let text = serialize_scenario(&doc).unwrap();
        let again = parse_scenario(&text).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn collects_every_violation() {
        let text = r#"
[energy]
c_s = -1.0
c_f = 0.05
c_r = 0.05

[network]
base = 2

[[node]]
id = 0
x = 1.0
energy = 80.0

[[node]]
id = 2
x = 20.0
y = 0.0
energy = 5.0

[trajectory]
kind = "random-walk"
start = [0.0, 0.0]
step_length = -2.0
seed = 7

[simulation]
delta = 0.0
"#;
        let err = parse_scenario(text).unwrap_err();
        let CliError::Validation(violations) = err else {
            panic!("expected validation failure");
        };
        let text = violations.join("\n");
        assert!(text.contains("energy.c_s"), "{text}");
        assert!(text.contains("node 0"), "{text}");
        assert!(text.contains("node 1: missing"), "{text}");
        assert!(text.contains("node 2: the base station is energy-unconstrained"), "{text}");
        assert!(text.contains("step_length"), "{text}");
        assert!(text.contains("simulation.delta"), "{text}");
        assert!(violations.len() >= 6, "{text}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scenario("[network\nbase = 2\n").unwrap_err();
        let CliError::Parse(msg) = err else {
            panic!("expected parse failure");
        };
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = line3_text().replace("[trajectory]", "typo_key = 1\n\n[trajectory]");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, CliError::Parse(_)));
    }

    #[test]
    fn stationary_converts_to_zero_velocity_motion() {
        let doc = parse_scenario(line3_text()).unwrap();
        let motion = doc.parametric_motion().unwrap();
        assert_eq!(motion.start, Position::new(0.0, 0.0));
        assert!(matches!(
            motion.family,
            MotionFamily::ConstantVelocity { vx, vy } if vx == 0.0 && vy == 0.0
        ));
    }

    #[test]
    fn sampled_trajectories_rejected_for_shooting() {
        let text = line3_text().replace(
            "kind = \"stationary\"\nposition = [0.0, 0.0]",
            "kind = \"random-walk\"\nstart = [0.0, 0.0]\nstep_length = 5.0\nseed = 42",
        );
        let doc = parse_scenario(&text).unwrap();
        assert!(matches!(
            doc.parametric_motion(),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn explicit_arcs_reach_the_topology() {
        let text = line3_text().replace("base = 2", "base = 2\narcs = [[0, 1], [1, 2]]");
        let doc = parse_scenario(&text).unwrap();
        let topo = doc.topology().unwrap();
        assert_eq!(topo.arcs().unwrap(), &[(0, 1), (1, 2)]);
    }
}
