//! Signed trajectory counts by shooting from unstable spheres.
//!
//! A critical point's unstable sphere is sampled at radius `eps_shoot` and
//! every sample is integrated forward. When the sphere is a single point or
//! a pair of points (target index equal to the sphere dimension, 0) each
//! sample is its own trajectory. When the sphere is a circle or half circle
//! the trajectories that reach an index-1 target are isolated; they are
//! located by bisection between neighbouring samples whose limits differ,
//! either in the limit point or in the winding of the lifted angle.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::integrate::{integrate_from, Direction, Limit, Trajectory};
use super::problem::{wrap, EndSide, FlowPoint, FlowProblem, Location};
use crate::circle::{circle_trajectories, signed_count_pos_to_neg, signed_count_same_sign, LocalType};
use crate::error::{Error, Result};
use crate::morse_data::{validate, MorseData, TrajectoryCounts};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingConfig {
    pub eps_shoot: f64,
    /// Samples on a one-dimensional sphere (full or half circle).
    pub samples: usize,
    pub atol: f64,
    pub rtol: f64,
    pub h_max: f64,
    pub t_max: f64,
    pub rho_class: f64,
    pub grad_tol: f64,
    pub quorum: f64,
    pub seed: u64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig {
            eps_shoot: 1e-3,
            samples: 64,
            atol: 1e-9,
            rtol: 1e-9,
            h_max: 0.1,
            t_max: 200.0,
            rho_class: 1e-3,
            grad_tol: 1e-6,
            quorum: 0.9,
            seed: 0x6d6f_7273_6568_62,
        }
    }
}

/// Environment variable overriding the sampling seed.
pub const SEED_ENV: &str = "MORSEHB_SEED";

impl ShootingConfig {
    /// Defaults, with the seed taken from `MORSEHB_SEED` when it parses.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(seed) = std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            cfg.seed = seed;
        }
        cfg
    }

    pub fn check(&self) -> Result<()> {
        let positive = [
            self.eps_shoot,
            self.atol,
            self.rtol,
            self.h_max,
            self.t_max,
            self.rho_class,
            self.grad_tol,
            self.quorum,
        ];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Precondition("shooting parameters must be positive".into()));
        }
        if self.samples < 8 {
            return Err(Error::Precondition("at least 8 samples per sphere dimension".into()));
        }
        if self.quorum > 1.0 {
            return Err(Error::Precondition("quorum is a fraction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRecord {
    pub limit: String,
    /// Samples in a basin, or 0 for a bisected separatrix.
    pub samples: usize,
    /// Sphere parameter of a representative start.
    pub param: f64,
    pub sign: i64,
    /// Closest approach to the target along the bracketing trajectories.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub from: String,
    pub to: String,
    pub sphere_dimension: usize,
    pub samples: usize,
    pub undecided: usize,
    /// Trajectories counted toward `to`, plus a summary of sampled basins.
    pub classes: Vec<ClassRecord>,
    pub basins: Vec<ClassRecord>,
    /// Trajectories from a boundary point that ended on the same boundary
    /// component.
    pub same_component_returns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub count: i64,
    pub certificate: Certificate,
}

fn precondition(msg: String) -> Error {
    Error::Precondition(msg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    Interior,
    Positive,
    Negative,
}

fn class_of(p: &FlowPoint) -> Class {
    match p.value() {
        None => Class::Interior,
        Some(v) if v > 0.0 => Class::Positive,
        Some(_) => Class::Negative,
    }
}

/// Whether `from -> to` is a pair the differential needs, by shape and index.
pub fn is_counted_pair(fp: &FlowProblem, from: &FlowPoint, to: &FlowPoint) -> bool {
    match (class_of(from), class_of(to)) {
        (Class::Interior, Class::Interior | Class::Positive) => to.index + 1 == from.index,
        (Class::Negative, Class::Interior) => to.index == from.index,
        (Class::Negative, Class::Positive) => {
            let (ca, cb) = (from.component(), to.component());
            let c = |id: Option<&str>| {
                [&fp.bottom, &fp.top]
                    .into_iter()
                    .find(|e| e.component.as_deref() == id)
                    .map(|e| e.c)
            };
            ca != cb && to.index == from.index && matches!((c(ca), c(cb)), (Some(x), Some(y)) if x > y)
        }
        _ => false,
    }
}

/// Unstable sphere of a critical point.
enum Sphere {
    /// Isolated start points with their orientation signs.
    Points(Vec<([f64; 2], i64)>),
    /// A circle (`closed`) or an open half circle parametrised by angle.
    Arc { closed: bool, at: Box<dyn Fn(f64) -> ([f64; 2], [f64; 2]) + Sync> },
}

fn side_of(p: &FlowPoint) -> Option<EndSide> {
    match &p.location {
        Location::Boundary { side, .. } | Location::Pole(side) => Some(*side),
        Location::Interior { .. } => None,
    }
}

fn sphere(fp: &FlowProblem, from: &FlowPoint, eps: f64) -> Result<Sphere> {
    let o = f64::from(fp.orientation);
    let length = fp.length;
    let [t0, s0] = from.chart(length);
    // oriented tangent: {n_out, tau} positive for the chart orientation
    let orient = move |n: [f64; 2], d: [f64; 2]| {
        let det = n[0] * d[1] - n[1] * d[0];
        let k = (o * det).signum();
        [k * d[0], k * d[1]]
    };
    match (class_of(from), from.index) {
        (Class::Interior, 1) => {
            let u = from.unstable.expect("saddles carry a frame");
            Ok(Sphere::Points(vec![
                ([t0 + eps * u[0], s0 + eps * u[1]], 1),
                ([t0 - eps * u[0], s0 - eps * u[1]], -1),
            ]))
        }
        (Class::Interior, 2) => match side_of(from) {
            Some(side) => {
                let (s, n) = match side {
                    EndSide::Bottom => (eps, [0.0, 1.0]),
                    EndSide::Top => (length - eps, [0.0, -1.0]),
                };
                Ok(Sphere::Arc {
                    closed: true,
                    at: Box::new(move |phi| ([phi, s], orient(n, [1.0, 0.0]))),
                })
            }
            None => {
                let sa = fp.warp(s0).sqrt();
                Ok(Sphere::Arc {
                    closed: true,
                    at: Box::new(move |phi| {
                        let (sn, cs) = phi.sin_cos();
                        let n = [cs / sa, sn];
                        ([t0 + eps * n[0], s0 + eps * n[1]], orient(n, [-sn / sa, cs]))
                    }),
                })
            }
        },
        (Class::Negative, k) => {
            let down = if side_of(from) == Some(EndSide::Bottom) { 1.0 } else { -1.0 };
            if k == 0 {
                // single inward ray, on the inward side of an outward-first frame
                Ok(Sphere::Points(vec![([t0, s0 + down * eps], -1)]))
            } else {
                Ok(Sphere::Arc {
                    closed: false,
                    at: Box::new(move |phi| {
                        let (sn, cs) = phi.sin_cos();
                        let n = [cs, down * sn];
                        ([t0 + eps * cs, s0 + down * eps * sn], orient(n, [-sn, down * cs]))
                    }),
                })
            }
        }
        _ => Err(precondition(format!("`{}` has no unstable sphere usable for counting", from.id))),
    }
}

struct Sample {
    param: f64,
    limit: Limit,
    winding: f64,
}

fn same_class(a: &Sample, b: &Sample) -> bool {
    a.limit == b.limit && (a.winding - b.winding).abs() < 0.5 * PI
}

struct Shooter<'a> {
    fp: &'a FlowProblem,
    cfg: &'a ShootingConfig,
    from: &'a FlowPoint,
    returns: std::sync::atomic::AtomicUsize,
}

impl Shooter<'_> {
    fn run(&self, x: [f64; 2]) -> Result<Trajectory> {
        let tr = integrate_from(self.fp, x, Direction::Forward, self.cfg, Some(&self.from.id), None)?;
        if let (Some(comp), Some(id)) = (self.from.component(), tr.limit.id()) {
            if self.fp.point(id).and_then(FlowPoint::component) == Some(comp) {
                self.returns.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
        }
        Ok(tr)
    }

    fn index_one(&self, limit: &Limit) -> bool {
        limit
            .id()
            .and_then(|id| self.fp.point(id))
            .is_some_and(|p| p.index == 1)
    }

    /// Closest approach of a trajectory to a critical point, in chart units.
    fn approach(&self, tr: &Trajectory, q: &FlowPoint) -> (f64, usize) {
        let c = q.chart(self.fp.length);
        tr.points
            .iter()
            .enumerate()
            .map(|(i, x)| ((wrap(x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt(), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    }
}

struct Separatrix {
    param: f64,
    target: String,
    residual: f64,
    /// Side of the target's stable direction the trajectory arrives from.
    side: f64,
}

/// Sign of one trajectory from a circle sphere to an index-1 target.
fn arc_sign(fp: &FlowProblem, at: &(dyn Fn(f64) -> ([f64; 2], [f64; 2]) + Sync), sep: &Separatrix) -> i64 {
    let (x, tau) = at(sep.param);
    let g = fp.gradient(x);
    let target = fp.point(&sep.target).expect("targets are declared points");
    let dir = if target.is_boundary() {
        [-g[0], -g[1]]
    } else {
        [sep.side * g[0], sep.side * g[1]]
    };
    let det = dir[0] * tau[1] - dir[1] * tau[0];
    (f64::from(fp.orientation) * det).signum() as i64
}

/// `#M(from, to)` with its certificate.
pub fn count_m(fp: &FlowProblem, from: &str, to: &str, cfg: &ShootingConfig) -> Result<CountResult> {
    cfg.check()?;
    let a = fp
        .point(from)
        .ok_or_else(|| precondition(format!("unknown critical point `{from}`")))?;
    let b = fp
        .point(to)
        .ok_or_else(|| precondition(format!("unknown critical point `{to}`")))?;
    let empty = |dim| Certificate {
        from: from.to_string(),
        to: to.to_string(),
        sphere_dimension: dim,
        samples: 0,
        undecided: 0,
        classes: Vec::new(),
        basins: Vec::new(),
        same_component_returns: 0,
    };
    if from == to {
        return Ok(CountResult { count: 0, certificate: empty(0) });
    }
    if !is_counted_pair(fp, a, b) {
        return Err(precondition(format!(
            "`{from}` -> `{to}` is not a trajectory shape with matching indices"
        )));
    }
    let shooter = Shooter {
        fp,
        cfg,
        from: a,
        returns: Default::default(),
    };
    let refuse = |reason: String| Error::Refused {
        from: from.to_string(),
        to: to.to_string(),
        reason,
    };
    let quorum_ok = |classified: usize, total: usize| classified as f64 >= cfg.quorum * total as f64;

    match sphere(fp, a, cfg.eps_shoot)? {
        Sphere::Points(points) => {
            let runs: Vec<Trajectory> = points
                .par_iter()
                .map(|(x, _)| shooter.run(*x))
                .collect::<Result<_>>()?;
            let undecided = runs.iter().filter(|t| t.limit.id().is_none()).count();
            if !quorum_ok(runs.len() - undecided, runs.len()) {
                return Err(refuse(format!("{undecided} of {} samples did not converge", runs.len())));
            }
            let mut cert = empty(0);
            cert.samples = runs.len();
            cert.undecided = undecided;
            let mut count = 0;
            for ((_, sign), tr) in points.iter().zip(&runs) {
                let rec = ClassRecord {
                    limit: tr.limit.id().unwrap_or("undecided").to_string(),
                    samples: 1,
                    param: *sign as f64,
                    sign: *sign,
                    residual: 0.0,
                };
                if tr.limit.id() == Some(to) {
                    count += sign;
                    cert.classes.push(rec.clone());
                }
                cert.basins.push(rec);
            }
            cert.same_component_returns = shooter.returns.into_inner();
            Ok(CountResult { count, certificate: cert })
        }
        Sphere::Arc { closed, at } => {
            if b.index != 1 {
                return Err(precondition(format!("`{to}` must have index 1")));
            }
            let n = cfg.samples;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let offset = 0.1 + 0.8 * rng.gen::<f64>();
            let span = if closed { TAU } else { PI };
            let params: Vec<f64> = (0..n).map(|i| span * (i as f64 + offset) / n as f64).collect();
            let samples: Vec<Sample> = params
                .par_iter()
                .map(|&phi| {
                    let tr = shooter.run(at(phi).0)?;
                    Ok(Sample {
                        param: phi,
                        winding: tr.winding(),
                        limit: tr.limit,
                    })
                })
                .collect::<Result<_>>()?;
            let undecided = samples.iter().filter(|s| s.limit.id().is_none()).count();
            if !quorum_ok(n - undecided, n) {
                return Err(refuse(format!("{undecided} of {n} samples did not converge")));
            }
            let mut seps = Vec::new();
            // runs of samples that landed on an index-1 point directly
            let direct: Vec<bool> = samples.iter().map(|s| shooter.index_one(&s.limit)).collect();
            let same_run = |i: usize, j: usize| direct[i] && direct[j] && samples[i].limit == samples[j].limit;
            let all_one_run = closed && (0..n).all(|i| same_run(i, (i + 1) % n));
            for i in 0..n {
                if !direct[i] {
                    continue;
                }
                let continues = if closed { same_run((i + n - 1) % n, i) } else { i > 0 && same_run(i - 1, i) };
                if continues && !(all_one_run && i == 0) {
                    continue;
                }
                let mut len = 1;
                while len < n && (closed || i + len < n) && same_run((i + len - 1) % n, (i + len) % n) {
                    len += 1;
                }
                let mid = (i + (len - 1) / 2) % n;
                let target = samples[mid].limit.id().unwrap().to_string();
                seps.push(Separatrix {
                    param: samples[mid].param,
                    side: self_side(&shooter, at(samples[mid].param).0, &target)?,
                    target,
                    residual: 0.0,
                });
            }
            let last = if closed { n } else { n - 1 };
            for i in 0..last {
                let j = (i + 1) % n;
                let (si, sj) = (&samples[i], &samples[j]);
                if direct[i] || direct[j] || si.limit.id().is_none() || sj.limit.id().is_none() || same_class(si, sj) {
                    continue;
                }
                let hi = if j == 0 { sj.param + TAU } else { sj.param };
                if let Some(sep) = bisect(&shooter, &*at, si, hi, sj).map_err(|e| match e {
                    Error::Precondition(r) => refuse(r),
                    e => e,
                })? {
                    seps.push(sep);
                }
            }
            let mut cert = empty(1);
            cert.samples = n;
            cert.undecided = undecided;
            let mut count = 0;
            for sep in &seps {
                if sep.target == to {
                    let sign = arc_sign(fp, &*at, sep);
                    count += sign;
                    cert.classes.push(ClassRecord {
                        limit: sep.target.clone(),
                        samples: 0,
                        param: sep.param.rem_euclid(span.max(TAU)),
                        sign,
                        residual: sep.residual,
                    });
                }
            }
            let mut k = 0;
            while k < n {
                let mut m = k;
                while m + 1 < n && same_class(&samples[m + 1], &samples[k]) {
                    m += 1;
                }
                cert.basins.push(ClassRecord {
                    limit: samples[k].limit.id().unwrap_or("undecided").to_string(),
                    samples: m - k + 1,
                    param: samples[k].param,
                    sign: 0,
                    residual: 0.0,
                });
                k = m + 1;
            }
            cert.same_component_returns = shooter.returns.into_inner();
            Ok(CountResult { count, certificate: cert })
        }
    }
}

/// Arrival side at a saddle for a trajectory started at `x`; 1 for boundary
/// targets, where it is unused.
fn self_side(sh: &Shooter<'_>, x: [f64; 2], target: &str) -> Result<f64> {
    let q = sh.fp.point(target).expect("declared");
    if q.is_boundary() {
        return Ok(1.0);
    }
    let tr = sh.run(x)?;
    Ok(arrival_side(sh, &tr, q))
}

fn arrival_side(sh: &Shooter<'_>, tr: &Trajectory, q: &FlowPoint) -> f64 {
    let Some(stable) = q.stable else { return 1.0 };
    let c = q.chart(sh.fp.length);
    let a = sh.fp.warp(c[1]);
    let (_, closest) = sh.approach(tr, q);
    // first point within a fixed radius, else the closest one
    let idx = tr
        .points
        .iter()
        .position(|x| (wrap(x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() < 0.05)
        .unwrap_or(closest);
    let x = tr.points[idx];
    let d = [wrap(x[0] - c[0]), x[1] - c[1]];
    let dot = a * d[0] * stable[0] + d[1] * stable[1];
    if dot >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn bisect(
    sh: &Shooter<'_>,
    at: &(dyn Fn(f64) -> ([f64; 2], [f64; 2]) + Sync),
    lo: &Sample,
    hi_param: f64,
    hi: &Sample,
) -> Result<Option<Separatrix>> {
    let mut a = Sample { param: lo.param, limit: lo.limit.clone(), winding: lo.winding };
    let mut b = Sample { param: hi_param, limit: hi.limit.clone(), winding: hi.winding };
    for _ in 0..200 {
        if b.param - a.param < 1e-13 {
            break;
        }
        let mid = 0.5 * (a.param + b.param);
        let tr = sh.run(at(mid).0)?;
        if sh.index_one(&tr.limit) {
            let target = tr.limit.id().unwrap().to_string();
            let q = sh.fp.point(&target).expect("declared");
            return Ok(Some(Separatrix {
                param: mid,
                side: arrival_side(sh, &tr, q),
                target,
                residual: 0.0,
            }));
        }
        if tr.limit.id().is_none() {
            break;
        }
        let m = Sample { param: mid, winding: tr.winding(), limit: tr.limit };
        let to_a = m.limit == a.limit && (m.limit != b.limit || (m.winding - a.winding).abs() <= (m.winding - b.winding).abs());
        if to_a {
            a = m;
        } else {
            b = m;
        }
    }
    let ta = sh.run(at(a.param).0)?;
    let tb = sh.run(at(b.param).0)?;
    let best = sh
        .fp
        .points
        .iter()
        .filter(|q| q.index == 1 && q.id != sh.from.id)
        .map(|q| {
            let r = sh.approach(&ta, q).0.max(sh.approach(&tb, q).0);
            (r, q)
        })
        .min_by(|x, y| x.0.total_cmp(&y.0));
    match best {
        Some((r, q)) if r < 10.0 * sh.cfg.rho_class => Ok(Some(Separatrix {
            param: 0.5 * (a.param + b.param),
            side: arrival_side(sh, &ta, q),
            target: q.id.clone(),
            residual: r,
        })),
        _ if same_class(&a, &b) => Ok(None),
        _ => Err(Error::Precondition(format!(
            "no index-1 point found between sphere parameters {} and {}",
            a.param, b.param
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildReport {
    pub counts: Vec<CountResult>,
}

impl BuildReport {
    pub fn same_component_returns(&self) -> usize {
        self.counts.iter().map(|c| c.certificate.same_component_returns).sum()
    }
}

/// Assembles complete Morse data from the flow, with the certificates of
/// every shooting run.
pub fn build_morse_data_with_report(fp: &FlowProblem, cfg: &ShootingConfig) -> Result<(MorseData, BuildReport)> {
    let mut counts = TrajectoryCounts::new();
    let mut report = BuildReport { counts: Vec::new() };
    for a in &fp.points {
        for b in &fp.points {
            if a.id == b.id || !is_counted_pair(fp, a, b) {
                continue;
            }
            let res = count_m(fp, &a.id, &b.id, cfg)?;
            if res.count != 0 {
                counts.insert_m(&a.id, &b.id, res.count)?;
            }
            report.counts.push(res);
        }
    }
    for (circle, side) in fp.circles()?.into_iter().zip(
        [&fp.bottom, &fp.top]
            .into_iter()
            .filter(|e| !e.is_pole())
            .map(|e| e.side),
    ) {
        let mut seen = std::collections::BTreeSet::new();
        for t in circle_trajectories(&circle) {
            if !seen.insert((t.from.clone(), t.to.clone())) {
                continue;
            }
            let (vf, vt) = (circle.get(&t.from).unwrap().value, circle.get(&t.to).unwrap().value);
            debug_assert_eq!(circle.get(&t.from).unwrap().kind, LocalType::Max);
            let n = if (vf > 0.0) == (vt > 0.0) {
                signed_count_same_sign(&circle, &t.from, &t.to)?
            } else {
                signed_count_pos_to_neg(&circle, &t.from, &t.to, fp.boundary_orientation(side))?
            };
            counts.insert_n(&t.from, &t.to, n)?;
        }
    }
    let data = MorseData::new(2, fp.components(), fp.critical_points(), counts)?;
    let rep = validate(&data);
    if !rep.ok() {
        return Err(Error::Precondition(format!(
            "generated data fails validation: {}",
            rep.violations.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; ")
        )));
    }
    Ok((data, report))
}

pub fn build_morse_data(fp: &FlowProblem, cfg: &ShootingConfig) -> Result<MorseData> {
    build_morse_data_with_report(fp, cfg).map(|(d, _)| d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::problem::parse_flow_problem;

    #[test]
    fn config_checks() {
        assert!(ShootingConfig::default().check().is_ok());
        let bad = ShootingConfig { samples: 4, ..Default::default() };
        assert!(bad.check().is_err());
        let bad = ShootingConfig { rho_class: 0.0, ..Default::default() };
        assert!(bad.check().is_err());
    }

    #[test]
    fn disk_ray_count() {
        let fp = parse_flow_problem(include_str!("../../../../corpus/disk-neg.flow.json")).unwrap();
        let r = count_m(&fp, "d0", "p", &ShootingConfig::default()).unwrap();
        assert_eq!(r.count, -1);
        assert_eq!(r.certificate.classes.len(), 1);
        assert_eq!(count_m(&fp, "d0", "d0", &ShootingConfig::default()).unwrap().count, 0);
        assert!(count_m(&fp, "p", "d0", &ShootingConfig::default()).is_err());
    }

    #[test]
    fn split_half_circle_count() {
        let fp = parse_flow_problem(include_str!("../../../../corpus/annulus-split.flow.json")).unwrap();
        let r = count_m(&fp, "d1", "g1", &ShootingConfig::default()).unwrap();
        assert_eq!(r.count, 1, "{:#?}", r.certificate);
        assert_eq!(r.certificate.same_component_returns, 0);
    }
}
