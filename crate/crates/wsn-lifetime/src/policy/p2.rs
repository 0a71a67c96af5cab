//! Balanced policy: trade the source's drain rate against total relay
//! drain through a nonpositive balance multiplier.
//!
//! Outer loop: damped fixed point on the multiplier. Given a candidate
//! multiplier, the inner problem minimizes
//! `source_drain + (epsilon / nu) * total_relay_drain` over the product of
//! per-row simplices by multistart projected gradient descent; the
//! workload profile of the minimizer then implies a new multiplier via
//! [`nu_residual`]. A fixed point equates the two. The multiplier is
//! negative, so the relay term enters with a negative weight: spending
//! relay energy is rewarded exactly insofar as it spares the source.
//!
//! When the multiplier collapses toward zero the weighted objective
//! degenerates; the inner problem then switches to maximizing the relay
//! term alone, which is the correct limit of the trade-off.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::model::{
    EnergyParams, NetworkState, Position, RoutingVector, Topology,
};
use crate::rng::SplitMix64;

use super::{PolicyConfig, PolicyOutcome, SolveContext};

/// Multiplier implied by a workload profile:
/// `-(1 + 2 eps * relay_drain_sum) / (2 * source_drain)`. Always
/// nonpositive; fails if the source drain is zero.
pub fn nu_residual(workloads: &[f64], epsilon: f64) -> Result<f64, Error> {
    let i0 = workloads[0];
    if i0 <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    let relay_sum: f64 = workloads[1..].iter().sum();
    Ok(-(1.0 + 2.0 * epsilon * relay_sum) / (2.0 * i0))
}

pub fn solve_p2(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
    cfg: &PolicyConfig,
) -> Result<PolicyOutcome, Error> {
    if cfg.epsilon < 0.0 || !cfg.epsilon.is_finite() {
        return Err(Error::InvalidInput("epsilon must be nonnegative".into()));
    }
    if cfg.nu.init >= 0.0 {
        return Err(Error::InvalidInput(
            "balance multiplier must start negative".into(),
        ));
    }
    if !(0.0 < cfg.nu.damping && cfg.nu.damping <= 1.0) {
        return Err(Error::InvalidInput("damping must lie in (0, 1]".into()));
    }
    let ctx = SolveContext::new(topo, state, src, params)?;
    if ctx.sets.out(0).is_empty() {
        return Err(Error::NoRoute);
    }
    let problem = InnerProblem::new(&ctx);

    let mut nu = cfg.nu.init;
    let mut gap = f64::INFINITY;
    for _ in 0..cfg.nu.max_iter {
        let solved = problem.minimize(objective_coeffs(nu, cfg.epsilon), &cfg.descent)?;
        let res = nu_residual(&solved.loads, cfg.epsilon)?;
        gap = (res - nu).abs();
        if gap <= cfg.nu.tol {
            return Ok(PolicyOutcome {
                w: problem.to_routing(&solved.point),
                objective: solved.value,
                nu: Some(nu),
                path: None,
                workloads: solved.loads,
                nonconvex_warning: solved.spread > 1e-6,
            });
        }
        nu = (1.0 - cfg.nu.damping) * nu + cfg.nu.damping * res;
    }
    Err(Error::NuDiverged {
        iterations: cfg.nu.max_iter,
        gap,
    })
}

/// Weights on (source drain, relay drain sum) for the inner objective.
fn objective_coeffs(nu: f64, epsilon: f64) -> (f64, f64) {
    if nu.abs() < 1e-9 {
        // Degenerate multiplier: maximize the relay term alone.
        (0.0, -epsilon)
    } else {
        (1.0, epsilon / nu)
    }
}

struct Row {
    sender: usize,
    receivers: Vec<usize>,
    costs: Vec<f64>,
}

/// The inner minimization, with per-arc transmit costs precomputed (the
/// source position is fixed for the duration of one solve).
struct InnerProblem<'a> {
    ctx: &'a SolveContext<'a>,
    rows: Vec<Row>,
}

struct Solved {
    point: Vec<Vec<f64>>,
    value: f64,
    loads: Vec<f64>,
    spread: f64,
}

struct Eval {
    value: f64,
    loads: Vec<f64>,
    rates: DVector<f64>,
    row_tx: Vec<f64>,
}

impl<'a> InnerProblem<'a> {
    fn new(ctx: &'a SolveContext<'a>) -> Self {
        let mut rows = Vec::new();
        for sender in 0..ctx.topo.battery_count() {
            let out = ctx.sets.out(sender);
            if out.is_empty() {
                continue;
            }
            let costs = out.iter().map(|&j| ctx.transmit_cost(sender, j)).collect();
            rows.push(Row {
                sender,
                receivers: out.to_vec(),
                costs,
            });
        }
        Self { ctx, rows }
    }

    fn uniform_start(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| vec![1.0 / r.receivers.len() as f64; r.receivers.len()])
            .collect()
    }

    fn vertex_start(&self, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![0.0; r.receivers.len()];
                row[rng.next_below(r.receivers.len())] = 1.0;
                row
            })
            .collect()
    }

    fn to_routing(&self, point: &[Vec<f64>]) -> RoutingVector {
        let mut w = RoutingVector::new();
        for (row, weights) in self.rows.iter().zip(point) {
            w.set_row(
                row.sender,
                row.receivers.iter().copied().zip(weights.iter().copied()).collect(),
            );
        }
        w
    }

    /// Flow matrix over unknown rates (nodes 1..=base) and the source
    /// injection vector.
    fn assemble(&self, point: &[Vec<f64>]) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.ctx.topo.node_count() - 1;
        let mut m = DMatrix::<f64>::identity(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for (row, weights) in self.rows.iter().zip(point) {
            for (&j, &wij) in row.receivers.iter().zip(weights) {
                if row.sender == 0 {
                    b[j - 1] += wij;
                } else {
                    m[(j - 1, row.sender - 1)] -= wij;
                }
            }
        }
        (m, b)
    }

    /// Objective and workloads at a point; `None` when the flow system is
    /// singular there (such points are simply avoided by the search).
    fn eval(&self, coeffs: (f64, f64), point: &[Vec<f64>]) -> Option<Eval> {
        let (m, b) = self.assemble(point);
        let rates = m.clone().lu().solve(&b)?;
        if (&m * &rates - &b).amax() > 1e-9 * (1.0 + b.amax()) {
            return None;
        }
        if rates.iter().any(|&g| g < -1e-9) {
            return None;
        }

        let battery = self.ctx.topo.battery_count();
        let row_tx: Vec<f64> = self
            .rows
            .iter()
            .zip(point)
            .map(|(row, weights)| {
                row.costs
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| c * w)
                    .sum::<f64>()
            })
            .collect();

        let mut loads = vec![0.0; battery];
        for (row, &tx) in self.rows.iter().zip(&row_tx) {
            if row.sender == 0 {
                loads[0] = tx + self.ctx.params.sense;
            } else {
                loads[row.sender] = rates[row.sender - 1].max(0.0)
                    * (tx + self.ctx.params.rx);
            }
        }
        // Alive relays without forwarding rows still pay to receive.
        for i in 1..battery {
            if self.rows.iter().all(|r| r.sender != i) {
                loads[i] = rates[i - 1].max(0.0) * self.ctx.params.rx;
            }
        }
        if self.rows.iter().all(|r| r.sender != 0) {
            loads[0] = self.ctx.params.sense;
        }

        let relay_sum: f64 = loads[1..].iter().sum();
        let value = coeffs.0 * loads[0] + coeffs.1 * relay_sum;
        Some(Eval {
            value,
            loads,
            rates,
            row_tx,
        })
    }

    /// Analytic gradient via one adjoint solve. For arc (a, b):
    /// source row: `alpha * cost + gamma * phi_b`;
    /// relay row:  `gamma * rate_a * (cost + phi_b)`,
    /// where phi is the downstream relay cost per unit of flow injected at
    /// a node (zero at the base).
    fn gradient(
        &self,
        coeffs: (f64, f64),
        point: &[Vec<f64>],
        eval: &Eval,
    ) -> Option<Vec<Vec<f64>>> {
        let n = self.ctx.topo.node_count() - 1;
        let base = self.ctx.topo.base_id();
        let (m, _) = self.assemble(point);

        let mut q = DVector::<f64>::zeros(n);
        for j in 1..base {
            q[j - 1] = self.ctx.params.rx;
        }
        for (row, &tx) in self.rows.iter().zip(&eval.row_tx) {
            if row.sender != 0 {
                q[row.sender - 1] += tx;
            }
        }
        let phi = m.transpose().lu().solve(&q)?;

        let (alpha, gamma) = coeffs;
        let grad = self
            .rows
            .iter()
            .map(|row| {
                row.receivers
                    .iter()
                    .zip(&row.costs)
                    .map(|(&b, &cost)| {
                        if row.sender == 0 {
                            alpha * cost + gamma * phi[b - 1]
                        } else {
                            gamma * eval.rates[row.sender - 1] * (cost + phi[b - 1])
                        }
                    })
                    .collect()
            })
            .collect();
        Some(grad)
    }

    /// Multistart projected gradient descent; returns the best point by
    /// (value, start index).
    fn minimize(&self, coeffs: (f64, f64), dcfg: &super::DescentConfig) -> Result<Solved, Error> {
        let starts: Vec<Vec<Vec<f64>>> = std::iter::once(self.uniform_start())
            .chain((1..dcfg.starts.max(1)).map(|k| {
                let mut rng = SplitMix64::new(dcfg.seed.wrapping_add(k as u64));
                self.vertex_start(&mut rng)
            }))
            .collect();

        #[cfg(feature = "parallel")]
        let outcomes: Vec<Option<(Vec<Vec<f64>>, f64)>> = {
            use rayon::prelude::*;
            starts
                .par_iter()
                .map(|s| self.descend(coeffs, s.clone(), dcfg))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let outcomes: Vec<Option<(Vec<Vec<f64>>, f64)>> = starts
            .iter()
            .map(|s| self.descend(coeffs, s.clone(), dcfg))
            .collect();

        let mut best: Option<(f64, usize)> = None;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, out) in outcomes.iter().enumerate() {
            if let Some((_, value)) = out {
                lo = lo.min(*value);
                hi = hi.max(*value);
                if best.is_none_or(|(bv, _)| *value < bv) {
                    best = Some((*value, idx));
                }
            }
        }
        let (value, idx) = best.ok_or(Error::SingularFlow)?;
        let point = outcomes[idx].as_ref().unwrap().0.clone();
        let eval = self.eval(coeffs, &point).ok_or(Error::SingularFlow)?;
        Ok(Solved {
            point,
            value,
            loads: eval.loads,
            spread: if hi > lo { hi - lo } else { 0.0 },
        })
    }

    fn descend(
        &self,
        coeffs: (f64, f64),
        mut point: Vec<Vec<f64>>,
        dcfg: &super::DescentConfig,
    ) -> Option<(Vec<Vec<f64>>, f64)> {
        let mut eval = self.eval(coeffs, &point)?;
        let mut grad = self.gradient(coeffs, &point, &eval)?;
        let mut step = 1.0;
        let mut flat_iters = 0;

        for _ in 0..dcfg.max_iter {
            // Stationarity: a unit projected-gradient step that goes
            // nowhere means a constrained minimum.
            let probe = project_step(&point, &grad, 1.0);
            let pg_norm = max_abs_diff(&probe, &point);
            if pg_norm < dcfg.grad_tol {
                break;
            }

            let mut t = step;
            let mut accepted = None;
            for _ in 0..dcfg.max_backtracks {
                let cand = project_step(&point, &grad, t);
                let predicted: f64 = inner_product_diff(&grad, &cand, &point);
                if predicted < 0.0 {
                    if let Some(cand_eval) = self.eval(coeffs, &cand) {
                        if cand_eval.value <= eval.value + dcfg.armijo * predicted {
                            accepted = Some((cand, cand_eval, t));
                            break;
                        }
                    }
                }
                t *= dcfg.shrink;
            }
            let Some((cand, cand_eval, used)) = accepted else {
                break;
            };
            let drop = eval.value - cand_eval.value;
            point = cand;
            eval = cand_eval;
            grad = self.gradient(coeffs, &point, &eval)?;
            step = (used * 2.0).min(1.0e3);
            if drop < 1e-15 * (1.0 + eval.value.abs()) {
                flat_iters += 1;
                if flat_iters >= 3 {
                    break;
                }
            } else {
                flat_iters = 0;
            }
        }
        Some((point, eval.value))
    }
}

fn project_step(point: &[Vec<f64>], grad: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    point
        .iter()
        .zip(grad)
        .map(|(row, g)| {
            let mut moved: Vec<f64> =
                row.iter().zip(g).map(|(w, gi)| w - t * gi).collect();
            project_simplex(&mut moved);
            moved
        })
        .collect()
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn inner_product_diff(grad: &[Vec<f64>], a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    grad.iter()
        .zip(a.iter().zip(b))
        .flat_map(|(g, (ra, rb))| {
            g.iter()
                .zip(ra.iter().zip(rb))
                .map(|(gi, (x, y))| gi * (x - y))
        })
        .sum()
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(v: &mut [f64]) {
    if v.len() == 1 {
        v[0] = 1.0;
        return;
    }
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        prefix += uk;
        let t = (prefix - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{solve_p1, Policy};

    fn line3() -> Topology {
        Topology::new(
            vec![Position::new(10.0, 0.0)],
            Position::new(20.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn nu_residual_reference_values() {
        let nu = nu_residual(&[0.06, 0.11], 1.0).unwrap();
        assert!((nu - (-10.166666666666666)).abs() < 1e-12);
        assert_eq!(nu_residual(&[0.5], 0.0).unwrap(), -1.0);
        assert_eq!(
            nu_residual(&[0.0, 0.11], 1.0),
            Err(Error::DegenerateSource)
        );
    }

    #[test]
    fn simplex_projection_basics() {
        let mut v = vec![2.0, 0.0];
        project_simplex(&mut v);
        assert_eq!(v, vec![1.0, 0.0]);

        let mut v = vec![0.25, 0.75];
        project_simplex(&mut v);
        assert!((v[0] - 0.25).abs() < 1e-15 && (v[1] - 0.75).abs() < 1e-15);

        let mut v = vec![1.0, 1.0];
        project_simplex(&mut v);
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);

        let mut v = vec![-3.0, -1.0, -2.0];
        project_simplex(&mut v);
        assert_eq!(v, vec![0.0, 1.0, 0.0]);

        let mut v = vec![0.3];
        project_simplex(&mut v);
        assert_eq!(v, vec![1.0]);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let topo = Topology::new(
            vec![Position::new(30.0, 10.0), Position::new(55.0, -5.0)],
            Position::new(90.0, 0.0),
        )
        .unwrap();
        let state = NetworkState::new(&[80.0, 80.0, 80.0], 0.0).unwrap();
        let params = EnergyParams::default();
        let ctx = SolveContext::new(&topo, &state, Position::new(0.0, 0.0), &params).unwrap();
        let problem = InnerProblem::new(&ctx);
        let coeffs = (1.0, 1.0 / -3.0);

        let point = problem.uniform_start();
        let eval = problem.eval(coeffs, &point).unwrap();
        let grad = problem.gradient(coeffs, &point, &eval).unwrap();

        let h = 1e-6;
        for r in 0..point.len() {
            for k in 0..point[r].len() {
                let mut plus = point.clone();
                plus[r][k] += h;
                let mut minus = point.clone();
                minus[r][k] -= h;
                let fd = (problem.eval(coeffs, &plus).unwrap().value
                    - problem.eval(coeffs, &minus).unwrap().value)
                    / (2.0 * h);
                assert!(
                    (fd - grad[r][k]).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "row {r} entry {k}: fd {fd} vs analytic {}",
                    grad[r][k]
                );
            }
        }
    }

    #[test]
    fn line_network_fixed_point() {
        let topo = line3();
        let state = NetworkState::new(&[80.0, 80.0], 0.0).unwrap();
        let cfg = PolicyConfig {
            policy: Policy::P2,
            epsilon: 1.0,
            ..PolicyConfig::default()
        };
        let out = solve_p2(
            &topo,
            &state,
            Position::new(0.0, 0.0),
            &EnergyParams::default(),
            &cfg,
        )
        .unwrap();
        let nu = out.nu.unwrap();
        assert!(nu <= 0.0);
        // The relay route wins for every negative multiplier here, so the
        // fixed point sits at the workload profile (0.06, 0.11).
        assert!((out.w.weight(0, 1) - 1.0).abs() < 1e-6);
        assert!((nu_residual(&out.workloads, 1.0).unwrap() - nu).abs() <= cfg.nu.tol);
        assert!((nu - (-10.166666666666666)).abs() < 1e-4);
        assert!(out.w.is_row_stochastic(1e-12));
    }

    #[test]
    fn zero_epsilon_recovers_the_greedy_policy() {
        let topo = Topology::new(
            vec![Position::new(20.0, 5.0), Position::new(40.0, -10.0)],
            Position::new(70.0, 0.0),
        )
        .unwrap();
        let state = NetworkState::new(&[80.0, 80.0, 80.0], 0.0).unwrap();
        let params = EnergyParams::default();
        let src = Position::new(0.0, 0.0);
        let cfg = PolicyConfig {
            policy: Policy::P2,
            epsilon: 0.0,
            ..PolicyConfig::default()
        };
        let p2 = solve_p2(&topo, &state, src, &params, &cfg).unwrap();
        let p1 = solve_p1(&topo, &state, src, &params).unwrap();
        assert!(
            (p2.objective - p1.objective).abs() <= 1e-9,
            "p2 {} vs p1 {}",
            p2.objective,
            p1.objective
        );
        // With a zero relay coefficient the multiplier still settles at
        // the value implied by the greedy workloads.
        let implied = nu_residual(&p2.workloads, 0.0).unwrap();
        assert!((p2.nu.unwrap() - implied).abs() <= cfg.nu.tol);
    }

    #[test]
    fn rejects_bad_config() {
        let topo = line3();
        let state = NetworkState::new(&[80.0, 80.0], 0.0).unwrap();
        let mut cfg = PolicyConfig {
            epsilon: -1.0,
            ..PolicyConfig::default()
        };
        assert!(matches!(
            solve_p2(&topo, &state, Position::new(0.0, 0.0), &EnergyParams::default(), &cfg),
            Err(Error::InvalidInput(_))
        ));
        cfg.epsilon = 1.0;
        cfg.nu.init = 0.5;
        assert!(matches!(
            solve_p2(&topo, &state, Position::new(0.0, 0.0), &EnergyParams::default(), &cfg),
            Err(Error::InvalidInput(_))
        ));
    }
}
