//! Flow problems on warped-product surfaces.
//!
//! The surface is `S^1 x [0, L]` with coordinates `(θ, s)` and metric
//! `a(s) dθ^2 + ds^2`. Each end `s = 0` ("bottom") and `s = L` ("top") is
//! either a boundary circle carrying a cone-end collar or a pole where the
//! circle collapses to a point. Near the bottom end the collar coordinate is
//! `r = s`, near the top `r = L - s`; the two end models are glued by a
//! smooth step supported on the `blend` interval.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::profile::{convert_end, CircleCollar, ConeEndProfile, TrigPoly};
use crate::circle::{CircleCritical, CircleMorseFunction, LocalType};
use crate::error::{Error, Result};
use crate::morse_data::{BoundaryComponent, CriticalPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndSide {
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndType {
    #[default]
    Cone,
    Horn,
    Doubling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollarDoc {
    pub component: String,
    pub end: EndSide,
    pub c: f64,
    #[serde(rename = "fN")]
    pub f_n: TrigPoly,
    pub r_max: f64,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default)]
    pub end_type: EndType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleDoc {
    pub end: EndSide,
    pub c: f64,
    /// `f = c + v r^2` near the pole.
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteriorDoc {
    pub length: f64,
    pub blend: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole: Option<EndSide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Orientation of the unstable direction of a saddle, in chart components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unstable: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowProblemDoc {
    pub dimension: usize,
    #[serde(default = "one_i8")]
    pub orientation: i8,
    pub interior: InteriorDoc,
    #[serde(default)]
    pub collars: Vec<CollarDoc>,
    #[serde(default)]
    pub poles: Vec<PoleDoc>,
    pub critical_points: Vec<PointDoc>,
}

fn one() -> f64 {
    1.0
}

fn one_i8() -> i8 {
    1
}

/// One end of the cylinder after normalisation to cone form.
#[derive(Debug, Clone, PartialEq)]
pub struct End {
    pub side: EndSide,
    /// `None` for a pole.
    pub component: Option<String>,
    pub c: f64,
    pub collar: CircleCollar,
    pub profile: ConeEndProfile,
    pub r_max: f64,
}

impl End {
    pub fn is_pole(&self) -> bool {
        self.component.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Interior { theta: f64, s: f64 },
    Pole(EndSide),
    Boundary { component: String, side: EndSide, theta: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub id: String,
    pub index: u32,
    pub location: Location,
    /// Saddles only: unstable and stable directions in chart components,
    /// with `{stable, unstable}` positively oriented.
    pub unstable: Option<[f64; 2]>,
    pub stable: Option<[f64; 2]>,
}

impl FlowPoint {
    pub fn chart(&self, length: f64) -> [f64; 2] {
        match &self.location {
            Location::Interior { theta, s } => [*theta, *s],
            Location::Pole(EndSide::Bottom) => [0.0, 0.0],
            Location::Pole(EndSide::Top) => [0.0, length],
            Location::Boundary { side, theta, .. } => [*theta, if *side == EndSide::Bottom { 0.0 } else { length }],
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.location, Location::Boundary { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match &self.location {
            Location::Boundary { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn component(&self) -> Option<&str> {
        match &self.location {
            Location::Boundary { component, .. } => Some(component),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    pub doc: FlowProblemDoc,
    pub length: f64,
    pub blend: [f64; 2],
    pub orientation: i8,
    pub bottom: End,
    pub top: End,
    pub points: Vec<FlowPoint>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

/// `e^{-1/x}` for `x > 0`, else 0, with its derivative.
fn bump(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else {
        let v = (-1.0 / x).exp();
        (v, v / (x * x))
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn wrap(d: f64) -> f64 {
    let w = d.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

pub fn parse_flow_problem(text: &str) -> Result<FlowProblem> {
    let doc: FlowProblemDoc = serde_json::from_str(text).map_err(Error::from_json)?;
    FlowProblem::from_doc(doc)
}

impl FlowProblem {
    pub fn from_doc(doc: FlowProblemDoc) -> Result<Self> {
        if doc.dimension != 2 {
            return Err(Error::Unsupported(format!(
                "flow problems of dimension {} (only surfaces are supported)",
                doc.dimension
            )));
        }
        if doc.orientation != 1 && doc.orientation != -1 {
            return Err(malformed("orientation must be +1 or -1"));
        }
        let length = doc.interior.length;
        let [s1, s2] = doc.interior.blend;
        if !(length > 0.0 && 0.0 < s1 && s1 < s2 && s2 < length) {
            return Err(malformed("need 0 < blend[0] < blend[1] < length"));
        }
        let mut ends: [Option<End>; 2] = [None, None];
        let slot = |side: EndSide| if side == EndSide::Bottom { 0 } else { 1 };
        for c in &doc.collars {
            c.f_n.check()?;
            if !(c.h > 0.0 && c.c.is_finite() && c.r_max > 0.0) {
                return Err(malformed(format!("collar {} needs h > 0, r_max > 0, finite c", c.component)));
            }
            let (f_n, h, r_max, profile) = match c.end_type {
                EndType::Cone => (c.f_n.clone(), c.h, c.r_max, ConeEndProfile::cone(c.c)),
                EndType::Doubling => (c.f_n.clone(), c.h, c.r_max, ConeEndProfile::doubling(c.c)),
                EndType::Horn => {
                    let conv = convert_end(-1.0, 0.0, c.r_max)?;
                    (c.f_n.scaled(conv.scale), c.h * conv.scale, conv.r_bar, ConeEndProfile::cone(c.c))
                }
            };
            if r_max >= 1.0 {
                return Err(malformed(format!("collar {} has r_max >= 1", c.component)));
            }
            let room = if c.end == EndSide::Bottom { s1 } else { length - s2 };
            if r_max > room {
                return Err(malformed(format!("collar {} overlaps the blend region", c.component)));
            }
            let i = slot(c.end);
            if ends[i].is_some() {
                return Err(malformed(format!("two ends declared at {:?}", c.end)));
            }
            ends[i] = Some(End {
                side: c.end,
                component: Some(c.component.clone()),
                c: c.c,
                collar: CircleCollar { f_n, h },
                profile,
                r_max,
            });
        }
        for p in &doc.poles {
            if !(p.v.is_finite() && p.v != 0.0 && p.c.is_finite()) {
                return Err(malformed("pole needs finite c and nonzero v"));
            }
            let i = slot(p.end);
            if ends[i].is_some() {
                return Err(malformed(format!("two ends declared at {:?}", p.end)));
            }
            ends[i] = Some(End {
                side: p.end,
                component: None,
                c: p.c,
                collar: CircleCollar { f_n: TrigPoly::constant(p.v), h: 1.0 },
                profile: ConeEndProfile::cone(p.c),
                r_max: 0.0,
            });
        }
        let [Some(bottom), Some(top)] = ends else {
            return Err(malformed("both ends (bottom and top) must be declared"));
        };
        if bottom.component.is_some() && bottom.component == top.component {
            return Err(malformed("the two collars need distinct component ids"));
        }
        let mut fp = FlowProblem {
            length,
            blend: [s1, s2],
            orientation: doc.orientation,
            bottom,
            top,
            points: Vec::new(),
            doc: doc.clone(),
        };
        let mut points = Vec::new();
        for d in &doc.critical_points {
            points.push(fp.load_point(d)?);
        }
        let mut ids: Vec<&str> = points.iter().map(|p: &FlowPoint| p.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateId(w[0].to_string()));
        }
        fp.points = points;
        fp.check_boundary_coverage()?;
        Ok(fp)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.doc).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn end(&self, side: EndSide) -> &End {
        match side {
            EndSide::Bottom => &self.bottom,
            EndSide::Top => &self.top,
        }
    }

    fn end_of(&self, component: &str) -> Option<&End> {
        [&self.bottom, &self.top]
            .into_iter()
            .find(|e| e.component.as_deref() == Some(component))
    }

    pub fn point(&self, id: &str) -> Option<&FlowPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    fn load_point(&self, d: &PointDoc) -> Result<FlowPoint> {
        let bad = |m: &str| malformed(format!("critical point {}: {m}", d.id));
        let (index, location) = match (&d.component, d.pole, d.theta, d.s) {
            (Some(comp), None, Some(theta), None) => {
                let end = self.end_of(comp).ok_or_else(|| bad("unknown component"))?;
                let theta = refine_circle(&end.collar.f_n, theta).ok_or_else(|| bad("no nondegenerate critical point of fN nearby"))?;
                let (value, _, d2) = end.collar.f_n.eval(theta);
                let index = if d2 < 0.0 { 1 } else { 0 };
                (
                    index,
                    Location::Boundary {
                        component: comp.clone(),
                        side: end.side,
                        theta,
                        value,
                    },
                )
            }
            (None, Some(side), None, None) => {
                let end = self.end(side);
                if !end.is_pole() {
                    return Err(bad("no pole at that end"));
                }
                (if end.collar.f_n.constant > 0.0 { 0 } else { 2 }, Location::Pole(side))
            }
            (None, None, Some(theta), Some(s)) => {
                let [theta, s] = self.refine_interior([theta, s]).ok_or_else(|| bad("Newton refinement failed"))?;
                let h = self.hessian([theta, s]);
                let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                let tr = h[0][0] + h[1][1];
                if det.abs() < 1e-10 {
                    return Err(bad("degenerate critical point"));
                }
                let index = if det < 0.0 { 1 } else if tr > 0.0 { 0 } else { 2 };
                (index, Location::Interior { theta, s })
            }
            _ => return Err(bad("give either component+theta, pole, or theta+s")),
        };
        if let Some(i) = d.index {
            if i != index {
                return Err(bad(&format!("declared index {i} but the function has index {index}")));
            }
        }
        let mut p = FlowPoint {
            id: d.id.clone(),
            index,
            location,
            unstable: None,
            stable: None,
        };
        if index == 1 && !p.is_boundary() {
            let (u, s) = self.saddle_frame(p.chart(self.length), d.unstable);
            p.unstable = Some(u);
            p.stable = Some(s);
        }
        Ok(p)
    }

    /// Every critical point of every collar's `f_N` must be declared.
    fn check_boundary_coverage(&self) -> Result<()> {
        for end in [&self.bottom, &self.top] {
            let Some(comp) = &end.component else { continue };
            let declared = self.points.iter().filter(|p| p.component() == Some(comp)).count();
            let found = count_circle_critical(&end.collar.f_n);
            if declared != found {
                return Err(malformed(format!(
                    "component {comp}: fN has {found} critical points, {declared} declared"
                )));
            }
        }
        Ok(())
    }

    /// Circle functions for the boundary components, in declaration order of
    /// the ends (bottom first). Boundary orientation is induced outward-first.
    pub fn circles(&self) -> Result<Vec<CircleMorseFunction>> {
        let mut out = Vec::new();
        for end in [&self.bottom, &self.top] {
            let Some(comp) = &end.component else { continue };
            let mut crit: Vec<CircleCritical> = self
                .points
                .iter()
                .filter_map(|p| match &p.location {
                    Location::Boundary { component, theta, value, .. } if component == comp => Some(CircleCritical {
                        id: p.id.clone(),
                        angle: theta.rem_euclid(TAU),
                        value: *value,
                        kind: if p.index == 1 { LocalType::Max } else { LocalType::Min },
                    }),
                    _ => None,
                })
                .collect();
            crit.sort_by(|a, b| a.angle.total_cmp(&b.angle));
            out.push(CircleMorseFunction::new(comp.clone(), crit, self.boundary_orientation(end.side))?);
        }
        Ok(out)
    }

    pub fn boundary_orientation(&self, side: EndSide) -> i8 {
        match side {
            EndSide::Bottom => self.orientation,
            EndSide::Top => -self.orientation,
        }
    }

    pub fn components(&self) -> Vec<BoundaryComponent> {
        [&self.bottom, &self.top]
            .into_iter()
            .filter_map(|e| e.component.as_ref().map(|id| BoundaryComponent { id: id.clone(), c: e.c }))
            .collect()
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        self.points
            .iter()
            .map(|p| match &p.location {
                Location::Boundary { component, value, .. } => CriticalPoint::boundary(p.id.clone(), p.index, component.clone(), *value),
                _ => CriticalPoint::interior(p.id.clone(), p.index),
            })
            .collect()
    }

    fn step(&self, s: f64) -> (f64, f64) {
        let [s1, s2] = self.blend;
        let w = s2 - s1;
        let x = (s - s1) / w;
        let (a, da) = bump(x);
        let (b, db) = bump(1.0 - x);
        if a + b == 0.0 {
            return (if x <= 0.0 { 0.0 } else { 1.0 }, 0.0);
        }
        let sum = a + b;
        (a / sum, (da * b + a * db) / (sum * sum) / w)
    }

    /// `f` and its chart partials `(f, ∂θ f, ∂s f)`.
    pub fn f_partials(&self, p: [f64; 2]) -> (f64, f64, f64) {
        let [theta, s] = p;
        let rb = s;
        let rt = self.length - s;
        let (vb, db, _) = self.bottom.collar.f_n.eval(theta);
        let (vt, dt, _) = self.top.collar.f_n.eval(theta);
        let fb = self.bottom.c + rb * rb * vb;
        let ft = self.top.c + rt * rt * vt;
        let (w, dw) = self.step(s);
        let f = (1.0 - w) * fb + w * ft;
        let fth = (1.0 - w) * rb * rb * db + w * rt * rt * dt;
        let fs = (1.0 - w) * 2.0 * rb * vb - w * 2.0 * rt * vt + dw * (ft - fb);
        (f, fth, fs)
    }

    pub fn f(&self, p: [f64; 2]) -> f64 {
        self.f_partials(p).0
    }

    /// Coefficient `a(s)` of `dθ^2`.
    pub fn warp(&self, s: f64) -> f64 {
        let (w, _) = self.step(s);
        let sigma = (1.0 - w) * s * self.bottom.collar.h.sqrt() + w * (self.length - s) * self.top.collar.h.sqrt();
        sigma * sigma
    }

    /// Gradient `X_f` in chart components `(X^θ, X^s)`.
    ///
    /// Inside a collar the tangential part is evaluated in closed form so
    /// that it stays finite at the boundary circle.
    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let [theta, s] = p;
        let [s1, s2] = self.blend;
        if s <= s1 {
            let e = &self.bottom;
            let (v, d, _) = e.collar.f_n.eval(theta);
            return [d / e.collar.h, 2.0 * (e.profile.a_coef * v + e.profile.c_coef) * s];
        }
        if s >= s2 {
            let e = &self.top;
            let (v, d, _) = e.collar.f_n.eval(theta);
            return [d / e.collar.h, -2.0 * (e.profile.a_coef * v + e.profile.c_coef) * (self.length - s)];
        }
        let (_, fth, fs) = self.f_partials(p);
        [fth / self.warp(s), fs]
    }

    /// Metric norm of the gradient.
    pub fn gradient_norm(&self, p: [f64; 2]) -> f64 {
        let g = self.gradient(p);
        (self.warp(p[1]) * g[0] * g[0] + g[1] * g[1]).sqrt()
    }

    fn hessian(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let h = 1e-6;
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let (_, ta, sa) = self.f_partials(a);
            let (_, tb, sb) = self.f_partials(b);
            out[0][j] = (ta - tb) / (2.0 * h);
            out[1][j] = (sa - sb) / (2.0 * h);
        }
        out
    }

    fn refine_interior(&self, mut p: [f64; 2]) -> Option<[f64; 2]> {
        let start = p;
        for _ in 0..50 {
            let (_, gt, gs) = self.f_partials(p);
            if gt.abs().max(gs.abs()) < 1e-13 {
                break;
            }
            let h = self.hessian(p);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det == 0.0 {
                return None;
            }
            p[0] -= (h[1][1] * gt - h[0][1] * gs) / det;
            p[1] -= (-h[1][0] * gt + h[0][0] * gs) / det;
        }
        let (_, gt, gs) = self.f_partials(p);
        let moved = (wrap(p[0] - start[0]).powi(2) + (p[1] - start[1]).powi(2)).sqrt();
        let inside = p[1] > 0.0 && p[1] < self.length;
        (gt.abs().max(gs.abs()) < 1e-9 && moved < 1e-2 && inside).then_some(p)
    }

    /// Unstable and stable eigenvectors of the linearised flow at a saddle.
    fn saddle_frame(&self, p: [f64; 2], declared: Option<[f64; 2]>) -> ([f64; 2], [f64; 2]) {
        // linearisation of X = G^{-1} d f is J = G^{-1} H
        let h = self.hessian(p);
        let a = self.warp(p[1]);
        let j = [[h[0][0] / a, h[0][1] / a], [h[1][0], h[1][1]]];
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        let eigvec = |lambda: f64| {
            let v = if (j[0][1]).abs() > (j[1][0]).abs() {
                [j[0][1], lambda - j[0][0]]
            } else {
                [lambda - j[1][1], j[1][0]]
            };
            let n = (a * v[0] * v[0] + v[1] * v[1]).sqrt();
            if n == 0.0 {
                // diagonal J: pick the axis whose entry is this eigenvalue
                if (lambda - j[0][0]).abs() <= (lambda - j[1][1]).abs() {
                    [1.0 / a.sqrt(), 0.0]
                } else {
                    [0.0, 1.0]
                }
            } else {
                [v[0] / n, v[1] / n]
            }
        };
        // negative eigenvalue of J: repelled by -X, i.e. unstable for the flow
        let mut u = eigvec(tr / 2.0 - disc);
        let mut s = eigvec(tr / 2.0 + disc);
        let reference = declared.unwrap_or(if u[0].abs() > 1e-12 { [1.0, 0.0] } else { [0.0, 1.0] });
        if u[0] * reference[0] + u[1] * reference[1] < 0.0 {
            u = [-u[0], -u[1]];
        }
        if f64::from(self.orientation) * (s[0] * u[1] - s[1] * u[0]) < 0.0 {
            s = [-s[0], -s[1]];
        }
        (u, s)
    }
}

fn refine_circle(f: &TrigPoly, mut t: f64) -> Option<f64> {
    let start = t;
    for _ in 0..50 {
        let (_, d1, d2) = f.eval(t);
        if d1.abs() < 1e-15 {
            break;
        }
        if d2 == 0.0 {
            return None;
        }
        t -= d1 / d2;
    }
    let (_, d1, d2) = f.eval(t);
    (d1.abs() < 1e-12 && d2.abs() > 1e-8 && wrap(t - start).abs() < 1e-2).then_some(t)
}

/// Number of sign changes of `f'` around the circle.
fn count_circle_critical(f: &TrigPoly) -> usize {
    if f.is_constant() {
        return 0;
    }
    let n = 8192;
    let d: Vec<f64> = (0..n).map(|i| f.eval(TAU * (i as f64 + 0.37) / n as f64).1).collect();
    (0..n).filter(|&i| (d[i] > 0.0) != (d[(i + 1) % n] > 0.0)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const DISK: &str = include_str!("../../../../corpus/disk-neg.flow.json");
    const CROSS: &str = include_str!("../../../../corpus/annulus-cross.flow.json");

    #[test]
    fn loads_and_infers_indices() {
        let fp = parse_flow_problem(DISK).unwrap();
        let idx: Vec<_> = fp.points.iter().map(|p| (p.id.as_str(), p.index)).collect();
        assert_eq!(idx, vec![("d0", 0), ("d1", 1), ("p", 0)]);
        assert_eq!(fp.point("d0").unwrap().value(), Some(-1.0));
        let cross = parse_flow_problem(CROSS).unwrap();
        let p = cross.point("p").unwrap();
        assert!(cross.gradient_norm(p.chart(cross.length)) < 1e-9);
    }

    #[test]
    fn gradient_matches_partials_in_blend() {
        let fp = parse_flow_problem(CROSS).unwrap();
        for p in [[0.3, 0.4], [2.0, 0.55], [5.0, 0.65]] {
            let g = fp.gradient(p);
            let h = 1e-6;
            let dth = (fp.f([p[0] + h, p[1]]) - fp.f([p[0] - h, p[1]])) / (2.0 * h);
            let ds = (fp.f([p[0], p[1] + h]) - fp.f([p[0], p[1] - h])) / (2.0 * h);
            assert!((g[0] * fp.warp(p[1]) - dth).abs() < 1e-7);
            assert!((g[1] - ds).abs() < 1e-7);
        }
    }

    #[test]
    fn collar_gradient_continuous_at_blend_edge() {
        let fp = parse_flow_problem(CROSS).unwrap();
        let s1 = fp.blend[0];
        let a = fp.gradient([1.0, s1]);
        let b = fp.gradient([1.0, s1 + 1e-9]);
        assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
    }

    #[test]
    fn rejects_missing_boundary_points() {
        let mut doc: FlowProblemDoc = serde_json::from_str(DISK).unwrap();
        doc.critical_points.retain(|p| p.id != "d1");
        assert!(matches!(FlowProblem::from_doc(doc), Err(Error::Malformed(_))));
    }

    #[test]
    fn rejects_higher_dimension() {
        let mut doc: FlowProblemDoc = serde_json::from_str(DISK).unwrap();
        doc.dimension = 3;
        assert!(matches!(FlowProblem::from_doc(doc), Err(Error::Unsupported(_))));
    }

    #[test]
    fn horn_collar_is_normalised() {
        let mut doc: FlowProblemDoc = serde_json::from_str(DISK).unwrap();
        doc.collars[0].end_type = EndType::Horn;
        doc.collars[0].r_max = 0.01;
        let fp = FlowProblem::from_doc(doc).unwrap();
        assert!((fp.bottom.r_max - 0.2).abs() < 1e-12);
        assert!((fp.bottom.collar.f_n.constant + 0.75 / 4.0).abs() < 1e-15);
    }
}
