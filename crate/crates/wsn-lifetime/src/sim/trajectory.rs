//! Source-node motion models. Every variant answers `position_at(t)` as a
//! pure function of its parameters, so a replay with the same inputs lands
//! on bitwise-identical positions.

use std::f64::consts::TAU;

use crate::model::Position;
use crate::rng::SplitMix64;

/// Closed-form motion families for the optimal-control solver. Each one
/// exposes the velocity field, its spatial partial derivatives, and the
/// exact position map, which the costate integration relies on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MotionFamily {
    ConstantVelocity { vx: f64, vy: f64 },
    Circular { center: Position, radius: f64, angular_rate: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParametricMotion {
    pub family: MotionFamily,
    pub start: Position,
}

impl ParametricMotion {
    /// Exact position at time `t`. Circular motion keeps the declared
    /// radius and takes its initial phase from `start` relative to the
    /// center (phase 0 when the two coincide).
    pub fn position_at(&self, t: f64) -> Position {
        match self.family {
            MotionFamily::ConstantVelocity { vx, vy } => {
                Position::new(self.start.x + vx * t, self.start.y + vy * t)
            }
            MotionFamily::Circular {
                center,
                radius,
                angular_rate,
            } => {
                let phase = self.initial_phase() + angular_rate * t;
                Position::new(
                    center.x + radius * phase.cos(),
                    center.y + radius * phase.sin(),
                )
            }
        }
    }

    /// Velocity (f_x, f_y) at time `t`.
    pub fn velocity_at(&self, t: f64) -> (f64, f64) {
        match self.family {
            MotionFamily::ConstantVelocity { vx, vy } => (vx, vy),
            MotionFamily::Circular {
                radius,
                angular_rate,
                ..
            } => {
                let phase = self.initial_phase() + angular_rate * t;
                (
                    -radius * angular_rate * phase.sin(),
                    radius * angular_rate * phase.cos(),
                )
            }
        }
    }

    /// Spatial partials of the velocity field as
    /// (df_x/dx, df_x/dy, df_y/dx, df_y/dy). Constant velocity has none;
    /// circular motion is the rotation field f = omega x (p - center).
    pub fn velocity_partials(&self) -> (f64, f64, f64, f64) {
        match self.family {
            MotionFamily::ConstantVelocity { .. } => (0.0, 0.0, 0.0, 0.0),
            MotionFamily::Circular { angular_rate, .. } => {
                (0.0, -angular_rate, angular_rate, 0.0)
            }
        }
    }

    fn initial_phase(&self) -> f64 {
        match self.family {
            MotionFamily::ConstantVelocity { .. } => 0.0,
            MotionFamily::Circular { center, .. } => {
                let dy = self.start.y - center.y;
                let dx = self.start.x - center.x;
                if dx == 0.0 && dy == 0.0 {
                    0.0
                } else {
                    dy.atan2(dx)
                }
            }
        }
    }
}

/// The source node's motion.
#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    Stationary(Position),
    /// Seeded random walk: one heading per unit of time, drawn uniformly
    /// in [0, 2*pi), each segment covering `step_length` at constant
    /// velocity. The whole path is a function of the seed.
    RandomWalk {
        start: Position,
        step_length: f64,
        seed: u64,
    },
    /// Piecewise-linear interpolation through (time, position) knots,
    /// clamped to the first/last position outside the covered span.
    Waypoints(Vec<(f64, Position)>),
    Parametric(ParametricMotion),
}

impl Trajectory {
    /// Position at time `t >= 0`. Pure: random-walk queries replay the
    /// heading stream from the seed every call, so prefer [`Cursor`] for
    /// monotone query sequences.
    pub fn position_at(&self, t: f64) -> Position {
        assert!(t >= 0.0 && t.is_finite(), "trajectory time {t}");
        match self {
            Trajectory::Stationary(p) => *p,
            Trajectory::RandomWalk {
                start,
                step_length,
                seed,
            } => {
                let mut rng = SplitMix64::new(*seed);
                let whole = t.floor();
                let mut pos = *start;
                let mut k = 0.0;
                while k < whole {
                    pos = walk_segment(pos, *step_length, 1.0, &mut rng);
                    k += 1.0;
                }
                let frac = t - whole;
                if frac > 0.0 {
                    walk_segment(pos, *step_length, frac, &mut rng)
                } else {
                    pos
                }
            }
            Trajectory::Waypoints(knots) => waypoint_position(knots, t),
            Trajectory::Parametric(motion) => motion.position_at(t),
        }
    }

    /// Stateful evaluator for nondecreasing query times. Matches
    /// [`Trajectory::position_at`] bit for bit while amortizing the
    /// random-walk replay, so long simulations stay linear in step count.
    pub fn cursor(&self) -> Cursor<'_> {
        Cursor {
            traj: self,
            walk: match self {
                Trajectory::RandomWalk { start, seed, .. } => Some(WalkState {
                    rng: SplitMix64::new(*seed),
                    segment: 0.0,
                    segment_start: *start,
                    heading: None,
                }),
                _ => None,
            },
        }
    }
}

fn walk_segment(from: Position, step_length: f64, frac: f64, rng: &mut SplitMix64) -> Position {
    let theta = rng.next_f64() * TAU;
    Position::new(
        from.x + frac * step_length * theta.cos(),
        from.y + frac * step_length * theta.sin(),
    )
}

fn waypoint_position(knots: &[(f64, Position)], t: f64) -> Position {
    assert!(!knots.is_empty(), "waypoint list must not be empty");
    if t <= knots[0].0 {
        return knots[0].1;
    }
    let last = knots[knots.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    // Knots are sorted by time (validated at construction by callers).
    let hi = knots.partition_point(|&(time, _)| time <= t);
    let (t0, p0) = knots[hi - 1];
    let (t1, p1) = knots[hi];
    let s = (t - t0) / (t1 - t0);
    Position::new(p0.x + s * (p1.x - p0.x), p0.y + s * (p1.y - p0.y))
}

pub struct Cursor<'a> {
    traj: &'a Trajectory,
    walk: Option<WalkState>,
}

struct WalkState {
    rng: SplitMix64,
    segment: f64,
    segment_start: Position,
    heading: Option<f64>,
}

impl Cursor<'_> {
    /// Position at `t`; `t` must not decrease across calls on the same
    /// cursor.
    pub fn position(&mut self, t: f64) -> Position {
        let Some(walk) = &mut self.walk else {
            return self.traj.position_at(t);
        };
        let Trajectory::RandomWalk { step_length, .. } = self.traj else {
            unreachable!("walk state only exists for random walks");
        };
        assert!(t >= walk.segment, "cursor queries must not go back in time");
        let whole = t.floor();
        while walk.segment < whole {
            let theta = *walk
                .heading
                .get_or_insert_with(|| walk.rng.next_f64() * TAU);
            walk.segment_start = Position::new(
                walk.segment_start.x + step_length * theta.cos(),
                walk.segment_start.y + step_length * theta.sin(),
            );
            walk.segment += 1.0;
            walk.heading = None;
        }
        let frac = t - whole;
        if frac > 0.0 {
            let theta = *walk
                .heading
                .get_or_insert_with(|| walk.rng.next_f64() * TAU);
            Position::new(
                walk.segment_start.x + frac * step_length * theta.cos(),
                walk.segment_start.y + frac * step_length * theta.sin(),
            )
        } else {
            walk.segment_start
        }
    }
}
