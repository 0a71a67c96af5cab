//! Shooting solver for the known-trajectory lifetime problem. The battery
//! states are integrated forward under the Hamiltonian-minimizing routing
//! control, the source-motion costates are integrated backward from their
//! terminal boundary values, and a damped Gauss-Newton iteration drives
//! the terminal residual to zero over the unknowns (T, nu, mu_x, mu_y).
//!
//! The routing control at any instant depends only on the sign of the
//! source-energy costate, so the forward pass is a piecewise-smooth ODE
//! whose control switches when the cheapest source arc or the alive set
//! changes. Each switch is located by bisection and becomes a grid point,
//! which keeps the fixed-step integration at its design order.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::model::{EnergyParams, NetworkState, Position, RoutingVector, Topology};
use crate::policy::solve_p1;
use crate::sim::ParametricMotion;

/// Costates paired with the battery states: one scalar per battery node
/// (index 0 is the source's, the constant multiplier; relay entries stay
/// exactly zero) plus the two source-motion costates.
#[derive(Clone, Debug, PartialEq)]
pub struct CostateState {
    pub lambda_r: Vec<f64>,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

impl CostateState {
    /// Battery costates for a given multiplier: source entry `nu`, relay
    /// entries zero, motion costates zero.
    pub fn from_nu(nu: f64, battery_count: usize) -> Self {
        let mut lambda_r = vec![0.0; battery_count];
        lambda_r[0] = nu;
        Self {
            lambda_r,
            lambda_x: 0.0,
            lambda_y: 0.0,
        }
    }
}

/// The four scalars the shooting iteration adjusts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingUnknowns {
    pub t_final: f64,
    pub nu: f64,
    pub mu_x: f64,
    pub mu_y: f64,
}

/// How the terminal condition counts the terminal-rate terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TerminalCounting {
    /// Counts the nu * r0_dot and velocity terms twice. This is the form
    /// the static closed form nu = 1 / (2 r0_dot) comes from, and the
    /// default.
    #[default]
    Doubled,
    /// Single-counted variant, kept for sensitivity comparisons.
    Single,
}

/// Terminal-time quantities the transversality residual is built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminalPoint {
    /// Source residual energy at the terminal time.
    pub r0: f64,
    /// Source energy rate at the terminal time (negative while draining).
    pub r0_dot: f64,
    /// Source velocity (f_x, f_y) at the terminal time.
    pub velocity: (f64, f64),
    /// Rate of change of the closed-form terminal position map; equals
    /// `velocity` for the built-in motion families.
    pub map_rate: (f64, f64),
    /// Motion costates at the terminal time (their boundary values).
    pub costate: (f64, f64),
    /// Aggregate |lambda_i| over relays; zero whenever the relay costates
    /// are held at their constant boundary value.
    pub relay_costate_abs: f64,
}

/// Three-component terminal residual: the free-terminal-time condition,
/// the source energy-depletion constraint, and the relay-costate
/// consistency aggregate. A root characterizes a solution.
pub fn transversality_residual(
    unknowns: &ShootingUnknowns,
    terminal: &TerminalPoint,
    counting: TerminalCounting,
) -> [f64; 3] {
    let (fx, fy) = terminal.velocity;
    let (gx, gy) = terminal.map_rate;
    let (lx, ly) = terminal.costate;
    let nu_term = unknowns.nu * terminal.r0_dot;
    let hamiltonian = nu_term + lx * fx + ly * fy;
    let r1 = match counting {
        TerminalCounting::Doubled => {
            hamiltonian - 1.0 + nu_term + unknowns.mu_x * fx - unknowns.mu_x * gx
                + unknowns.mu_y * fy
                - unknowns.mu_y * gy
        }
        TerminalCounting::Single => hamiltonian - 1.0 - unknowns.mu_x * gx - unknowns.mu_y * gy,
    };
    [r1, terminal.r0, terminal.relay_costate_abs]
}

/// The routing vector minimizing the Hamiltonian at one instant. Only the
/// source-drain term depends on the control and its costate is negative,
/// so this is the cheapest-source-arc vertex (the same structure the
/// greedy per-step policy returns).
pub fn pointwise_control(
    topo: &Topology,
    state: &NetworkState,
    src: Position,
    params: &EnergyParams,
    costate: &CostateState,
) -> Result<RoutingVector, Error> {
    if costate.lambda_r.len() != topo.battery_count() {
        return Err(Error::InvalidInput(format!(
            "{} battery costates for {} battery nodes",
            costate.lambda_r.len(),
            topo.battery_count()
        )));
    }
    let l0 = costate.lambda_r[0];
    if !l0.is_finite() || l0 >= 0.0 {
        return Err(Error::InvalidCostate(l0));
    }
    if let Some(&bad) = costate.lambda_r[1..].iter().find(|&&l| l != 0.0) {
        return Err(Error::InvalidCostate(bad));
    }
    Ok(solve_p1(topo, state, src, params)?.w)
}

/// Time derivatives of the source-motion costates under a fixed control.
/// Defined for quadratic path loss only; the energy gradient with respect
/// to the source position is linear exactly in that case.
pub fn costate_rhs(
    t: f64,
    costate: &CostateState,
    w: &RoutingVector,
    motion: &ParametricMotion,
    topo: &Topology,
    params: &EnergyParams,
) -> Result<(f64, f64), Error> {
    if params.path_loss != 2.0 {
        return Err(Error::UnsupportedPathLoss(params.path_loss));
    }
    let src = motion.position_at(t);
    let (mut sx, mut sy) = (0.0, 0.0);
    if let Some(row) = w.row(0) {
        for &(j, w0j) in row {
            let pj = topo.position(j);
            sx += w0j * (src.x - pj.x);
            sy += w0j * (src.y - pj.y);
        }
    }
    let scale = 2.0 * params.tx_distance * costate.lambda_r[0];
    let (fxx, fxy, fyx, fyy) = motion.velocity_partials();
    let ldx = scale * sx - costate.lambda_x * fxx - costate.lambda_y * fyx;
    let ldy = scale * sy - costate.lambda_x * fxy - costate.lambda_y * fyy;
    Ok((ldx, ldy))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingConfig {
    /// Forward integration grid resolution (events add extra points).
    pub steps: usize,
    /// Gauss-Newton iteration budget.
    pub max_iter: usize,
    /// Convergence target for the residual infinity norm.
    pub tol: f64,
    /// Relative finite-difference step for the Jacobian columns.
    pub fd_step: f64,
    /// Tikhonov weight in the normal equations. The system is genuinely
    /// rank-deficient (the control never reads the motion costates), so
    /// this also pins the mu components nearest the initial guess.
    pub regularization: f64,
    pub counting: TerminalCounting,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            max_iter: 60,
            tol: 1e-4,
            fd_step: 1e-6,
            regularization: 1e-8,
            counting: TerminalCounting::default(),
        }
    }
}

/// One point of the solved state/costate trace.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub t: f64,
    pub source: Position,
    pub residual: Vec<f64>,
    pub lambda_x: f64,
    pub lambda_y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShootingSolution {
    pub unknowns: ShootingUnknowns,
    pub residual: [f64; 3],
    pub residual_norm: f64,
    pub iterations: usize,
    pub grid: Vec<GridPoint>,
}

struct ForwardPass {
    grid: Vec<GridPoint>,
    r_final: Vec<f64>,
    r0_dot: f64,
}

struct Integrator<'a> {
    topo: &'a Topology,
    params: &'a EnergyParams,
    motion: &'a ParametricMotion,
    initial: &'a [f64],
    /// Alive thresholds for snapshots: the source entry is -inf so it
    /// keeps transmitting even when a candidate terminal time overdraws
    /// its battery; relays die at zero.
    thresholds: Vec<f64>,
    steps: usize,
}

/// Control-relevant situation at an instant: the cheapest source arc and
/// the alive set. The forward dynamics are smooth while this is constant.
type Signature = (usize, Vec<bool>);

impl Integrator<'_> {
    fn state_at(&self, t: f64, r: &[f64]) -> NetworkState {
        NetworkState::snapshot(t, r.to_vec(), self.thresholds.clone())
    }

    fn control(&self, t: f64, r: &[f64]) -> Result<crate::policy::PolicyOutcome, Error> {
        let state = self.state_at(t, r);
        solve_p1(self.topo, &state, self.motion.position_at(t), self.params)
    }

    fn drain(&self, t: f64, r: &[f64]) -> Result<Vec<f64>, Error> {
        Ok(self.control(t, r)?.workloads)
    }

    fn signature(&self, t: f64, r: &[f64]) -> Result<Signature, Error> {
        let state = self.state_at(t, r);
        let out = solve_p1(self.topo, &state, self.motion.position_at(t), self.params)?;
        let arc = out.w.row(0).expect("source row")[0].0;
        Ok((arc, state.alive_flags().to_vec()))
    }

    /// One RK4 step of the battery states; the control is re-solved at
    /// every stage, which reduces to the classic smooth scheme as long as
    /// no switch occurs inside the step.
    fn rk4(&self, t: f64, r: &[f64], h: f64) -> Result<Vec<f64>, Error> {
        let k1 = self.drain(t, r)?;
        let mid1: Vec<f64> = r.iter().zip(&k1).map(|(ri, k)| ri - 0.5 * h * k).collect();
        let k2 = self.drain(t + 0.5 * h, &mid1)?;
        let mid2: Vec<f64> = r.iter().zip(&k2).map(|(ri, k)| ri - 0.5 * h * k).collect();
        let k3 = self.drain(t + 0.5 * h, &mid2)?;
        let end: Vec<f64> = r.iter().zip(&k3).map(|(ri, k)| ri - h * k).collect();
        let k4 = self.drain(t + h, &end)?;
        Ok(r.iter()
            .enumerate()
            .map(|(i, ri)| ri - h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    }

    fn forward(&self, t_final: f64) -> Result<ForwardPass, Error> {
        let h = t_final / self.steps as f64;
        let mut t = 0.0;
        let mut r = self.initial.to_vec();
        let mut grid = vec![GridPoint {
            t: 0.0,
            source: self.motion.position_at(0.0),
            residual: r.clone(),
            lambda_x: 0.0,
            lambda_y: 0.0,
        }];
        let mut sig = self.signature(0.0, &r)?;

        let time_eps = 1e-12 * (1.0 + t_final);
        while t_final - t > time_eps {
            let h_step = h.min(t_final - t);
            let r_next = self.rk4(t, &r, h_step)?;
            let sig_next = self.signature(t + h_step, &r_next)?;
            if sig_next == sig {
                t += h_step;
                r = r_next;
            } else {
                // Locate the first switch in (t, t + h_step] and commit
                // the step exactly there so no stage straddles it.
                let mut lo = 0.0_f64;
                let mut hi = h_step;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let r_mid = self.rk4(t, &r, mid)?;
                    if self.signature(t + mid, &r_mid)? == sig {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let r_switch = self.rk4(t, &r, hi)?;
                sig = self.signature(t + hi, &r_switch)?;
                t += hi;
                r = r_switch;
            }
            grid.push(GridPoint {
                t,
                source: self.motion.position_at(t),
                residual: r.clone(),
                lambda_x: 0.0,
                lambda_y: 0.0,
            });
        }

        let last = grid.last_mut().expect("at least the initial point");
        last.t = t_final;
        last.source = self.motion.position_at(t_final);
        let terminal_ctrl = self.control(t_final, &r)?;
        Ok(ForwardPass {
            grid,
            r_final: r,
            r0_dot: -terminal_ctrl.workloads[0],
        })
    }

    /// Fills the motion costates over a completed forward grid, walking
    /// backward from the terminal boundary values. The control is
    /// constant within each grid segment (events split segments), so it
    /// is solved once per segment at the stored state.
    fn backward(&self, grid: &mut [GridPoint], nu: f64, mu: (f64, f64)) -> Result<(), Error> {
        let n = grid.len();
        grid[n - 1].lambda_x = mu.0;
        grid[n - 1].lambda_y = mu.1;
        let mut costate = CostateState::from_nu(nu, self.initial.len());
        costate.lambda_x = mu.0;
        costate.lambda_y = mu.1;

        for i in (0..n - 1).rev() {
            let t1 = grid[i + 1].t;
            let h = grid[i].t - t1; // negative: integrating into the past
            let w = self.control(grid[i].t, &grid[i].residual)?.w;
            let mut stage = |tq: f64, lx: f64, ly: f64| -> Result<(f64, f64), Error> {
                costate.lambda_x = lx;
                costate.lambda_y = ly;
                costate_rhs(tq, &costate, &w, self.motion, self.topo, self.params)
            };
            let (lx, ly) = (grid[i + 1].lambda_x, grid[i + 1].lambda_y);
            let (k1x, k1y) = stage(t1, lx, ly)?;
            let (k2x, k2y) = stage(t1 + 0.5 * h, lx + 0.5 * h * k1x, ly + 0.5 * h * k1y)?;
            let (k3x, k3y) = stage(t1 + 0.5 * h, lx + 0.5 * h * k2x, ly + 0.5 * h * k2y)?;
            let (k4x, k4y) = stage(t1 + h, lx + h * k3x, ly + h * k3y)?;
            grid[i].lambda_x = lx + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            grid[i].lambda_y = ly + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        }
        Ok(())
    }

    fn residuals(
        &self,
        u: &ShootingUnknowns,
        counting: TerminalCounting,
    ) -> Result<([f64; 3], ForwardPass), Error> {
        let fw = self.forward(u.t_final)?;
        let velocity = self.motion.velocity_at(u.t_final);
        let terminal = TerminalPoint {
            r0: fw.r_final[0],
            r0_dot: fw.r0_dot,
            velocity,
            map_rate: velocity,
            costate: (u.mu_x, u.mu_y),
            relay_costate_abs: 0.0,
        };
        Ok((transversality_residual(u, &terminal, counting), fw))
    }
}

fn inf_norm(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn project(mut u: ShootingUnknowns) -> ShootingUnknowns {
    u.t_final = u.t_final.max(1e-6);
    u.nu = u.nu.min(-1e-9);
    u
}

fn component(u: &ShootingUnknowns, idx: usize) -> f64 {
    match idx {
        0 => u.t_final,
        1 => u.nu,
        2 => u.mu_x,
        _ => u.mu_y,
    }
}

fn bumped(u: &ShootingUnknowns, idx: usize, h: f64) -> ShootingUnknowns {
    let mut b = *u;
    match idx {
        0 => b.t_final += h,
        1 => b.nu += h,
        2 => b.mu_x += h,
        _ => b.mu_y += h,
    }
    b
}

/// Solves the boundary-value problem by shooting. Returns the converged
/// unknowns with the state/costate trace, or [`Error::ShootingDiverged`]
/// carrying the best iterate when the residual stalls above tolerance.
pub fn shoot(
    topo: &Topology,
    initial: &[f64],
    motion: &ParametricMotion,
    params: &EnergyParams,
    guess: ShootingUnknowns,
    cfg: &ShootingConfig,
) -> Result<ShootingSolution, Error> {
    if params.path_loss != 2.0 {
        return Err(Error::UnsupportedPathLoss(params.path_loss));
    }
    if initial.len() != topo.battery_count() {
        return Err(Error::InvalidInput(format!(
            "{} initial energies for {} battery nodes",
            initial.len(),
            topo.battery_count()
        )));
    }
    if initial.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(Error::InvalidInput(
            "initial energies must be positive and finite".into(),
        ));
    }
    if ![guess.t_final, guess.nu, guess.mu_x, guess.mu_y]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::InvalidInput("shooting guess must be finite".into()));
    }
    // `tol > 0.0` is false for NaN, so the negation rejects NaN as well.
    let tol_ok = cfg.tol > 0.0;
    if cfg.steps < 2 || cfg.max_iter == 0 || !tol_ok {
        return Err(Error::InvalidInput(
            "shooting config needs steps >= 2, iterations >= 1, tol > 0".into(),
        ));
    }

    let mut thresholds = vec![0.0; initial.len()];
    thresholds[0] = f64::NEG_INFINITY;
    let integ = Integrator {
        topo,
        params,
        motion,
        initial,
        thresholds,
        steps: cfg.steps,
    };

    let mut u = project(guess);
    let (mut res, _) = integ.residuals(&u, cfg.counting)?;
    let mut norm = inf_norm(&res);
    let mut best = (u, res, norm);
    let mut iterations = 0;

    while norm > cfg.tol && iterations < cfg.max_iter {
        iterations += 1;

        // Finite-difference Jacobian, one forward pass per column. The nu
        // column is bumped downward so the trial stays strictly negative.
        let column = |idx: usize| -> Option<(usize, f64, [f64; 3])> {
            let mut h = cfg.fd_step * (1.0 + component(&u, idx).abs());
            if idx == 1 {
                h = -h;
            }
            let trial = bumped(&u, idx, h);
            integ
                .residuals(&trial, cfg.counting)
                .ok()
                .map(|(r, _)| (idx, h, r))
        };
        #[cfg(feature = "parallel")]
        let cols: Vec<_> = {
            use rayon::prelude::*;
            (0..4usize).into_par_iter().filter_map(column).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let cols: Vec<_> = (0..4usize).filter_map(column).collect();

        let mut jac = DMatrix::<f64>::zeros(3, 4);
        for (idx, h, r_bumped) in &cols {
            for row in 0..3 {
                jac[(row, *idx)] = (r_bumped[row] - res[row]) / h;
            }
        }

        let rvec = DVector::from_row_slice(&res);
        let jt = jac.transpose();
        let mut normal = &jt * &jac;
        let reg = cfg.regularization * (1.0 + normal.diagonal().amax());
        for d in 0..4 {
            normal[(d, d)] += reg;
        }
        let g = &jt * &rvec;
        let Some(delta) = normal.lu().solve(&(-g)) else {
            break;
        };

        // Backtrack until the residual norm actually drops; a trial whose
        // forward pass fails just counts as no improvement.
        let mut accepted = false;
        let mut scale = 1.0_f64;
        for _ in 0..25 {
            let trial = project(ShootingUnknowns {
                t_final: u.t_final + scale * delta[0],
                nu: u.nu + scale * delta[1],
                mu_x: u.mu_x + scale * delta[2],
                mu_y: u.mu_y + scale * delta[3],
            });
            if let Ok((trial_res, _)) = integ.residuals(&trial, cfg.counting) {
                let trial_norm = inf_norm(&trial_res);
                if trial_norm < norm {
                    u = trial;
                    res = trial_res;
                    norm = trial_norm;
                    if norm < best.2 {
                        best = (u, res, norm);
                    }
                    accepted = true;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if best.2 <= cfg.tol {
        let (u, res, norm) = best;
        let (_, mut fw) = integ.residuals(&u, cfg.counting)?;
        integ.backward(&mut fw.grid, u.nu, (u.mu_x, u.mu_y))?;
        Ok(ShootingSolution {
            unknowns: u,
            residual: res,
            residual_norm: norm,
            iterations,
            grid: fw.grid,
        })
    } else {
        Err(Error::ShootingDiverged {
            best: best.0,
            residual_norm: best.2,
        })
    }
}
