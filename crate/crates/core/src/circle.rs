//! Exact trajectory counts inside a circle boundary component.
//!
//! A Morse function on a circle is determined up to isotopy by the cyclic
//! sequence of its critical points, so every count here is combinatorial.
//! Arcs are walked in the direction of decreasing value, from a maximum to
//! one of its two neighbouring minima.
//!
//! Sign conventions. Write `dir = +1` when an arc leaves its maximum in the
//! positive direction of the oriented circle and `-1` otherwise. Then
//!
//! * between two positive-valued points the arc contributes `dir`,
//! * between two negative-valued points it contributes `-dir`,
//! * from a positive maximum to a negative minimum it contributes `-dir`.
//!
//! The minus signs on the negative side come from orienting the unstable
//! set of a negative point outward-first in the ambient surface, which
//! makes its boundary sphere carry the opposite induced orientation. The
//! optional parity factor `(-1)^(n-k-1)` is `+1` for every count realised
//! here (n = 2, k = 1) and is therefore never applied.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morse_data::CriticalPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalType {
    Max,
    Min,
}

impl LocalType {
    pub fn index(self) -> u32 {
        match self {
            LocalType::Max => 1,
            LocalType::Min => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleCritical {
    pub id: String,
    pub angle: f64,
    pub value: f64,
    #[serde(rename = "type")]
    pub kind: LocalType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleMorseFunction {
    pub component: String,
    pub critical: Vec<CircleCritical>,
    /// `+1` when the boundary orientation agrees with increasing angle.
    pub orientation: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcDirection {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleTrajectory {
    pub from: String,
    pub to: String,
    pub start: f64,
    pub end: f64,
    pub direction: ArcDirection,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

impl CircleMorseFunction {
    pub fn new(component: impl Into<String>, critical: Vec<CircleCritical>, orientation: i8) -> Result<Self> {
        let f = CircleMorseFunction {
            component: component.into(),
            critical,
            orientation,
        };
        f.check()?;
        Ok(f)
    }

    /// Builds a function from `(angle, value)` pairs, inferring max/min from
    /// the neighbours. Ids are `q0, q1, ...` in angle order.
    pub fn from_samples(component: impl Into<String>, samples: &[(f64, f64)], orientation: i8) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|&(a, v)| (a.rem_euclid(TAU), v))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pts.len();
        if n < 2 {
            return Err(bad("a Morse function on a circle has at least two critical points"));
        }
        let mut critical = Vec::with_capacity(n);
        for i in 0..n {
            let v = pts[i].1;
            let prev = pts[(i + n - 1) % n].1;
            let next = pts[(i + 1) % n].1;
            let kind = if v > prev && v > next {
                LocalType::Max
            } else if v < prev && v < next {
                LocalType::Min
            } else {
                return Err(bad(format!(
                    "point at angle {} is neither a local max nor a local min",
                    pts[i].0
                )));
            };
            critical.push(CircleCritical {
                id: format!("q{i}"),
                angle: pts[i].0,
                value: v,
                kind,
            });
        }
        Self::new(component, critical, orientation)
    }

    fn check(&self) -> Result<()> {
        let c = &self.critical;
        if self.orientation != 1 && self.orientation != -1 {
            return Err(bad("orientation must be +1 or -1"));
        }
        if c.len() < 2 || c.len() % 2 != 0 {
            return Err(bad(format!(
                "expected an even number (at least 2) of critical points, got {}",
                c.len()
            )));
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, p) in c.iter().enumerate() {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::DuplicateId(p.id.clone()));
            }
            if !(p.angle.is_finite() && (0.0..TAU).contains(&p.angle)) {
                return Err(bad(format!("angle of `{}` outside [0, 2pi)", p.id)));
            }
            if !p.value.is_finite() || p.value == 0.0 {
                return Err(bad(format!("value of `{}` must be finite and nonzero", p.id)));
            }
            if i > 0 && c[i - 1].angle >= p.angle {
                return Err(bad("angles must be strictly increasing"));
            }
            let next = &c[(i + 1) % c.len()];
            if next.kind == p.kind {
                return Err(bad(format!("`{}` and `{}` are both {:?}; types must alternate", p.id, next.id, p.kind)));
            }
            let (hi, lo) = match p.kind {
                LocalType::Max => (p, next),
                LocalType::Min => (next, p),
            };
            if hi.value <= lo.value {
                return Err(bad(format!("maximum `{}` does not exceed adjacent minimum `{}`", hi.id, lo.id)));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check()
    }

    pub fn get(&self, id: &str) -> Option<&CircleCritical> {
        self.critical.iter().find(|p| p.id == id)
    }

    /// Boundary critical points in the morse-data representation.
    pub fn to_points(&self) -> Vec<CriticalPoint> {
        self.critical
            .iter()
            .map(|p| CriticalPoint::boundary(p.id.clone(), p.kind.index(), self.component.clone(), p.value))
            .collect()
    }

    /// Sign of each arc from `from` to `to`: `+1` along the orientation.
    fn arc_dirs(&self, from: &str, to: &str) -> Vec<i64> {
        circle_trajectories(self)
            .into_iter()
            .filter(|t| t.from == from && t.to == to)
            .map(|t| {
                let ccw = if t.direction == ArcDirection::Ccw { 1 } else { -1 };
                ccw * i64::from(self.orientation)
            })
            .collect()
    }

    fn pair(&self, from: &str, to: &str) -> Result<(&CircleCritical, &CircleCritical)> {
        let a = self
            .get(from)
            .ok_or_else(|| bad(format!("`{from}` is not a critical point of `{}`", self.component)))?;
        let b = self
            .get(to)
            .ok_or_else(|| bad(format!("`{to}` is not a critical point of `{}`", self.component)))?;
        if a.kind != LocalType::Max || b.kind != LocalType::Min {
            return Err(bad(format!(
                "counts run from an index-1 point to an index-0 point; got `{from}` (index {}) -> `{to}` (index {})",
                a.kind.index(),
                b.kind.index()
            )));
        }
        Ok((a, b))
    }
}

/// One trajectory per adjacent (max, min) pair, listed in angle order of the
/// maximum, counter-clockwise arc first.
pub fn circle_trajectories(f: &CircleMorseFunction) -> Vec<CircleTrajectory> {
    let c = &f.critical;
    let n = c.len();
    let mut out = Vec::with_capacity(n);
    for (i, p) in c.iter().enumerate() {
        if p.kind != LocalType::Max {
            continue;
        }
        for (j, direction) in [((i + 1) % n, ArcDirection::Ccw), ((i + n - 1) % n, ArcDirection::Cw)] {
            out.push(CircleTrajectory {
                from: p.id.clone(),
                to: c[j].id.clone(),
                start: p.angle,
                end: c[j].angle,
                direction,
            });
        }
    }
    out
}

/// `#N(from, to)` for two points of the same sign class.
pub fn signed_count_same_sign(f: &CircleMorseFunction, from: &str, to: &str) -> Result<i64> {
    let (a, b) = f.pair(from, to)?;
    let sign = match (a.value > 0.0, b.value > 0.0) {
        (true, true) => 1,
        (false, false) => -1,
        _ => return Err(bad(format!("`{from}` and `{to}` have values of different sign"))),
    };
    Ok(sign * f.arc_dirs(from, to).iter().sum::<i64>())
}

/// `#N(gamma, delta)` from a positive maximum to a negative minimum.
///
/// `ambient_orientation` is the orientation of the surface chart in which the
/// circle's orientation was declared; the two must agree, since the boundary
/// orientation is induced outward-first from the ambient one.
pub fn signed_count_pos_to_neg(f: &CircleMorseFunction, gamma: &str, delta: &str, ambient_orientation: i8) -> Result<i64> {
    if ambient_orientation != f.orientation {
        return Err(bad(format!(
            "ambient orientation {ambient_orientation} disagrees with the induced boundary orientation {}",
            f.orientation
        )));
    }
    let (a, b) = f.pair(gamma, delta)?;
    if !(a.value > 0.0 && b.value < 0.0) {
        return Err(bad(format!("need f({gamma}) > 0 > f({delta})")));
    }
    let dirs = f.arc_dirs(gamma, delta);
    if dirs.is_empty() {
        return Err(bad(format!("`{gamma}` and `{delta}` are not adjacent")));
    }
    Ok(-dirs.iter().sum::<i64>())
}
