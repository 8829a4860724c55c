//! Integration of the negative gradient flow and limit classification.

use ode_solvers::dop_shared::IntegrationError;
use ode_solvers::{Dopri5, OutputType, System, Vector2};
use serde::Serialize;

use super::problem::{wrap, EndSide, FlowProblem, Location};
use super::shoot::ShootingConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Along `-X_f`, so `f` decreases.
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Point(String),
    Escaped,
    Undecided,
}

impl Limit {
    pub fn id(&self) -> Option<&str> {
        match self {
            Limit::Point(id) => Some(id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Chart points `(θ, s)`; `θ` is not reduced mod `2π`.
    pub points: Vec<[f64; 2]>,
    pub f_values: Vec<f64>,
    pub source: Option<String>,
    pub limit: Limit,
    /// Largest per-step increase of `f` (forward) seen, zero if none.
    pub max_increase: f64,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 2] {
        *self.points.last().expect("trajectories hold at least the start")
    }

    /// Net change of the lifted angle.
    pub fn winding(&self) -> f64 {
        self.last()[0] - self.points[0][0]
    }
}

/// Largest per-step increase of `f` tolerated as roundoff.
pub const MONOTONICITY_TOL: f64 = 1e-10;
const BOUNDARY_R: f64 = 1e-8;

enum Seen {
    Nothing,
    Hit(String),
    Ambiguous,
}

fn inspect(fp: &FlowProblem, x: [f64; 2], cfg: &ShootingConfig, exclude: Option<&str>) -> Seen {
    let mut hit = None;
    let mut many = false;
    for p in &fp.points {
        if Some(p.id.as_str()) == exclude {
            continue;
        }
        let close = match &p.location {
            Location::Boundary { side, theta, .. } => {
                let r = if *side == EndSide::Bottom { x[1] } else { fp.length - x[1] };
                r < BOUNDARY_R && wrap(x[0] - theta).abs() < cfg.rho_class
            }
            Location::Pole(side) => {
                let r = if *side == EndSide::Bottom { x[1] } else { fp.length - x[1] };
                r < cfg.rho_class && fp.gradient_norm(x) < cfg.grad_tol
            }
            Location::Interior { theta, s } => {
                let d = (fp.warp(x[1]) * wrap(x[0] - theta).powi(2) + (x[1] - s).powi(2)).sqrt();
                d < cfg.rho_class && fp.gradient_norm(x) < cfg.grad_tol
            }
        };
        if close {
            many |= hit.is_some();
            hit = Some(p.id.clone());
        }
    }
    match (hit, many) {
        (_, true) => Seen::Ambiguous,
        (Some(id), false) => Seen::Hit(id),
        (None, false) => Seen::Nothing,
    }
}

/// Classifies the end point of a trajectory.
pub fn classify_limit(fp: &FlowProblem, tr: &Trajectory, cfg: &ShootingConfig) -> Limit {
    let x = tr.last();
    if !(x[0].is_finite() && x[1].is_finite()) || x[1] < 0.0 || x[1] > fp.length {
        return Limit::Escaped;
    }
    match inspect(fp, x, cfg, tr.source.as_deref()) {
        Seen::Hit(id) => Limit::Point(id),
        _ => Limit::Undecided,
    }
}

struct Observer {
    last_f: f64,
    max_increase: f64,
    violation: Option<(f64, f64)>,
    limit: Option<Limit>,
}

struct Rhs<'a> {
    fp: &'a FlowProblem,
    cfg: &'a ShootingConfig,
    sign: f64,
    exclude: Option<&'a str>,
    obs: &'a mut Observer,
}

impl System<f64, Vector2<f64>> for Rhs<'_> {
    fn system(&self, _t: f64, y: &Vector2<f64>, dy: &mut Vector2<f64>) {
        let g = self.fp.gradient([y[0], y[1]]);
        dy[0] = -self.sign * g[0];
        dy[1] = -self.sign * g[1];
    }

    fn solout(&mut self, t: f64, y: &Vector2<f64>, _dy: &Vector2<f64>) -> bool {
        let x = [y[0], y[1]];
        if !(x[0].is_finite() && x[1].is_finite()) || x[1] < 0.0 || x[1] > self.fp.length {
            self.obs.limit = Some(Limit::Escaped);
            return true;
        }
        let f = self.fp.f(x);
        let increase = self.sign * (f - self.obs.last_f);
        if increase > self.obs.max_increase {
            self.obs.max_increase = increase;
        }
        if increase > MONOTONICITY_TOL && self.obs.violation.is_none() {
            self.obs.violation = Some((t, increase));
            return true;
        }
        self.obs.last_f = f;
        match inspect(self.fp, x, self.cfg, self.exclude) {
            Seen::Nothing => false,
            Seen::Hit(id) => {
                self.obs.limit = Some(Limit::Point(id));
                true
            }
            Seen::Ambiguous => {
                self.obs.limit = Some(Limit::Undecided);
                true
            }
        }
    }
}

fn inside(fp: &FlowProblem, x: [f64; 2]) -> bool {
    x[0].is_finite() && x[1] >= 0.0 && x[1] <= fp.length
}

/// Integrates the flow of `-X_f` (or `+X_f` backward) from `start`.
///
/// Integration stops as soon as the point is classified near a declared
/// critical point, on leaving the chart, or at `cfg.t_max`. With `dense_dt`
/// the path is sampled on a uniform time grid instead of at the accepted
/// steps.
pub fn integrate_trajectory(
    fp: &FlowProblem,
    start: [f64; 2],
    direction: Direction,
    cfg: &ShootingConfig,
) -> Result<Trajectory> {
    integrate_from(fp, start, direction, cfg, None, None)
}

/// Like [`integrate_trajectory`] but records the path every `dt` time units.
pub fn integrate_sampled(
    fp: &FlowProblem,
    start: [f64; 2],
    direction: Direction,
    cfg: &ShootingConfig,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::Precondition("sampling step must be positive".into()));
    }
    integrate_from(fp, start, direction, cfg, None, Some(dt))
}

pub(crate) fn integrate_from(
    fp: &FlowProblem,
    start: [f64; 2],
    direction: Direction,
    cfg: &ShootingConfig,
    source: Option<&str>,
    dense_dt: Option<f64>,
) -> Result<Trajectory> {
    if !inside(fp, start) {
        return Err(Error::ChartEscape(format!("start point ({}, {}) is outside the chart", start[0], start[1])));
    }
    let f0 = fp.f(start);
    let single = |limit| Trajectory {
        times: vec![0.0],
        points: vec![start],
        f_values: vec![f0],
        source: source.map(str::to_string),
        limit,
        max_increase: 0.0,
    };
    match inspect(fp, start, cfg, source) {
        Seen::Hit(id) => return Ok(single(Limit::Point(id))),
        Seen::Ambiguous => return Ok(single(Limit::Undecided)),
        Seen::Nothing => {}
    }
    let mut obs = Observer {
        last_f: f0,
        max_increase: 0.0,
        violation: None,
        limit: None,
    };
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let rhs = Rhs {
        fp,
        cfg,
        sign,
        exclude: source,
        obs: &mut obs,
    };
    let (out_type, dx) = match dense_dt {
        Some(dt) => (OutputType::Dense, dt),
        None => (OutputType::Sparse, cfg.t_max),
    };
    let mut solver = Dopri5::from_param(
        rhs,
        0.0,
        cfg.t_max,
        dx,
        Vector2::new(start[0], start[1]),
        cfg.rtol,
        cfg.atol,
        0.9,
        0.04,
        0.2,
        10.0,
        cfg.h_max,
        0.0,
        1_000_000,
        1000,
        out_type,
    );
    let outcome = solver.integrate();
    let (ts, ys) = solver.results().get();
    let times = ts.clone();
    let points: Vec<[f64; 2]> = ys.iter().map(|y| [y[0], y[1]]).collect();
    drop(solver);
    let forced = match outcome {
        Ok(_) => None,
        Err(IntegrationError::StepSizeUnderflow { x }) => return Err(Error::StepUnderflow { t: x }),
        Err(_) => Some(Limit::Undecided),
    };
    if let Some((t, increase)) = obs.violation {
        return Err(Error::Monotonicity { t, increase });
    }
    let f_values = points.iter().map(|&p| fp.f(p)).collect();
    let limit = forced.or(obs.limit).unwrap_or(Limit::Undecided);
    Ok(Trajectory {
        times,
        points,
        f_values,
        source: source.map(str::to_string),
        limit,
        max_increase: obs.max_increase,
    })
}
