//! Collar normal forms and the change of variables between end types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trigonometric polynomial `const + sum cos[k-1] cos(k t) + sin[k-1] sin(k t)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPoly {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn constant(v: f64) -> Self {
        TrigPoly {
            constant: v,
            ..Default::default()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    /// Value and first two derivatives.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (self.constant, 0.0, 0.0);
        for (k, &a) in self.cos.iter().enumerate() {
            let m = (k + 1) as f64;
            let (s, c) = (m * t).sin_cos();
            v += a * c;
            d1 -= a * m * s;
            d2 -= a * m * m * c;
        }
        for (k, &b) in self.sin.iter().enumerate() {
            let m = (k + 1) as f64;
            let (s, c) = (m * t).sin_cos();
            v += b * s;
            d1 += b * m * c;
            d2 -= b * m * m * s;
        }
        (v, d1, d2)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn scaled(&self, k: f64) -> Self {
        TrigPoly {
            constant: self.constant * k,
            cos: self.cos.iter().map(|c| c * k).collect(),
            sin: self.sin.iter().map(|c| c * k).collect(),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if std::iter::once(&self.constant).chain(&self.cos).chain(&self.sin).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Malformed("non-finite trigonometric coefficient".into()))
        }
    }
}

/// `f = (A r^2 + B) f_N + C r^2 + D` with metric `(A r^2 + B) g_N + dr^2`.
///
/// `a` records the end family the data was supplied in (0 cone, -1 horn);
/// `doubling` marks the `(r^2 + 1)` variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeEndProfile {
    #[serde(rename = "A")]
    pub a_coef: f64,
    #[serde(rename = "B")]
    pub b_coef: f64,
    #[serde(rename = "C")]
    pub c_coef: f64,
    #[serde(rename = "D")]
    pub d_coef: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub doubling: bool,
}

impl ConeEndProfile {
    pub fn cone(c: f64) -> Self {
        ConeEndProfile {
            a_coef: 1.0,
            b_coef: 0.0,
            c_coef: 0.0,
            d_coef: c,
            a: 0.0,
            doubling: false,
        }
    }

    pub fn doubling(c: f64) -> Self {
        ConeEndProfile {
            b_coef: 1.0,
            doubling: true,
            ..Self::cone(c)
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.a_coef == 0.0 || !self.a_coef.is_finite() {
            return Err(Error::Precondition("profile coefficient A must be nonzero".into()));
        }
        Ok(())
    }

    pub fn function(&self, f_n: f64, r: f64) -> f64 {
        (self.a_coef * r * r + self.b_coef) * f_n + self.c_coef * r * r + self.d_coef
    }

    /// Coefficient of `g_N` in the metric.
    pub fn warp(&self, r: f64) -> f64 {
        self.a_coef * r * r + self.b_coef
    }
}

/// Circle boundary with metric `h dθ^2` and function `f_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCollar {
    pub f_n: TrigPoly,
    pub h: f64,
}

/// Gradient of the profile function at `(θ, r)` as `(dθ, dr)` components.
///
/// At `r = 0` this is the boundary gradient with no radial part.
pub fn cone_gradient(profile: &ConeEndProfile, collar: &CircleCollar, theta: f64, r: f64) -> Result<[f64; 2]> {
    if !(r >= 0.0) {
        return Err(Error::Precondition(format!("collar coordinate r = {r} is negative")));
    }
    if !theta.is_finite() {
        return Err(Error::ChartEscape(format!("boundary coordinate {theta}")));
    }
    profile.check()?;
    let (v, d, _) = collar.f_n.eval(theta);
    Ok([d / collar.h, 2.0 * (profile.a_coef * v + profile.c_coef) * r])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndConversion {
    pub r_bar: f64,
    /// Factor multiplying both `g_N` and `f_N`.
    pub scale: f64,
}

fn check_exponent(a: f64) -> Result<()> {
    if !a.is_finite() || a + 2.0 == 0.0 {
        Err(Error::Precondition(format!("end exponent {a} is not allowed")))
    } else {
        Ok(())
    }
}

/// Change of radial variable from an end of exponent `a` to exponent `a_bar`.
pub fn convert_end(a: f64, a_bar: f64, r: f64) -> Result<EndConversion> {
    check_exponent(a)?;
    check_exponent(a_bar)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Precondition(format!("radius {r} must be positive")));
    }
    let k = (a_bar + 2.0) / (a + 2.0);
    let r_bar = (k * k * r.powf(a + 2.0)).powf(1.0 / (a_bar + 2.0));
    Ok(EndConversion {
        r_bar,
        scale: 1.0 / (k * k),
    })
}

/// Relative residuals of the three pointwise identities behind `convert_end`:
/// tangential metric part, radial metric part, and function part (the last
/// evaluated with `f_N = f_n`).
pub fn end_identity_residuals(a: f64, a_bar: f64, r: f64, f_n: f64) -> Result<[f64; 3]> {
    let EndConversion { r_bar, scale } = convert_end(a, a_bar, r)?;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    let tangential = rel(r_bar.powf(a_bar + 2.0) * scale, r.powf(a + 2.0));
    let dr_bar = (a + 2.0) / (a_bar + 2.0) * r_bar / r;
    let radial = rel(r_bar.powf(a_bar) * dr_bar * dr_bar, r.powf(a));
    let function = rel(r_bar.powf(a_bar + 2.0) * scale * f_n + 1.0, r.powf(a + 2.0) * f_n + 1.0);
    Ok([tangential, radial, function])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_derivatives() {
        let p = TrigPoly {
            constant: 0.3,
            cos: vec![0.5, -0.2],
            sin: vec![0.1, 0.7],
        };
        let h = 1e-5;
        for t in [0.0, 0.4, 2.0, 5.5] {
            let (_, d1, d2) = p.eval(t);
            let fd1 = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            let fd2 = (p.eval(t + h).1 - p.eval(t - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_on_boundary_is_tangential() {
        let collar = CircleCollar {
            f_n: TrigPoly { constant: 0.0, cos: vec![1.0], sin: vec![] },
            h: 1.0,
        };
        let g = cone_gradient(&ConeEndProfile::cone(0.0), &collar, 0.3, 0.0).unwrap();
        assert_eq!(g[1], 0.0);
        assert!((g[0] + 0.3f64.sin()).abs() < 1e-15);
        assert!(cone_gradient(&ConeEndProfile::cone(0.0), &collar, 0.3, -0.1).is_err());
    }

    #[test]
    fn radial_part_at_critical_point() {
        let collar = CircleCollar { f_n: TrigPoly::constant(1.0), h: 1.0 };
        let g = cone_gradient(&ConeEndProfile::cone(0.0), &collar, 1.0, 0.5).unwrap();
        assert_eq!(g, [0.0, 1.0]);
    }

    #[test]
    fn horn_to_cone() {
        let c = convert_end(-1.0, 0.0, 0.25).unwrap();
        assert!((c.r_bar - 1.0).abs() < 1e-15);
        assert!((c.scale - 0.25).abs() < 1e-15);
        let same = convert_end(0.0, 0.0, 0.3).unwrap();
        assert!((same.r_bar - 0.3).abs() < 1e-15 && same.scale == 1.0);
        assert!(convert_end(-2.0, 0.0, 0.3).is_err());
        assert!(convert_end(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn identities_hold() {
        for r in [0.01, 0.3, 0.9] {
            for res in end_identity_residuals(-1.0, 0.0, r, 0.7).unwrap() {
                assert!(res < 1e-12, "{res}");
            }
        }
    }
}
