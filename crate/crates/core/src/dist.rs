//! Service-time families.
//!
//! Three heavy-tailed families whose tails have the two-term form
//! `t^{-a} (r1 + r2 t^{-h} L0(t))`, plus the exponential law used as a
//! light-tailed oracle. Everything the queue engines need (tails, densities,
//! moments, the equilibrium law, samplers) is available in closed form or
//! through a bracketed inversion.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::roots::invert_decreasing;

const INVERSION_TOL: f64 = 1e-13;

/// A nonnegative random time described by its tail and density.
pub trait Lifetime {
    fn tail(&self, t: f64) -> f64;
    fn density(&self, t: f64) -> f64;

    /// Points where the density has a jump or kink.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Typical length scale, used to place quadrature panels.
    fn scale(&self) -> f64 {
        1.0
    }
}

/// Slowly varying factor `L0` in the second tail term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SlowlyVarying {
    Constant(f64),
    /// `(ln t)^p`
    LogPower(f64),
}

impl SlowlyVarying {
    /// Evaluates `L0(t)`. For the log-power form `t <= 1` gives 0.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant(c) => c,
            SlowlyVarying::LogPower(p) => {
                if t <= 1.0 {
                    0.0
                } else {
                    t.ln().powf(p)
                }
            }
        }
    }
}

/// Parameters of the two-term tail `t^{-a} (r1 + r2 t^{-h} L0(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailExpansionParams {
    pub a: f64,
    pub h: f64,
    pub r1: f64,
    pub r2: f64,
    pub l0: SlowlyVarying,
}

impl TailExpansionParams {
    pub fn new(a: f64, h: f64, r1: f64, r2: f64, l0: SlowlyVarying) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::InvalidParameter(format!("tail index a must exceed 1, got {a}")));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("second-order gap h must be positive, got {h}")));
        }
        if !(r1 > 0.0) {
            return Err(Error::InvalidParameter(format!("r1 must be positive, got {r1}")));
        }
        if !r2.is_finite() {
            return Err(Error::InvalidParameter("r2 must be finite".into()));
        }
        Ok(TailExpansionParams { a, h, r1, r2, l0 })
    }

    /// `L(t) = r1 + r2 t^{-h} L0(t)`.
    pub fn slowly_varying(&self, t: f64) -> f64 {
        self.r1 + self.r2 * t.powf(-self.h) * self.l0.eval(t)
    }

    /// The two-term tail `t^{-a} L(t)`.
    pub fn two_term_tail(&self, t: f64) -> f64 {
        t.powf(-self.a) * self.slowly_varying(t)
    }

    /// Two-term Karamata integral `∫_t^∞ x^{-a} L(x) dx`.
    pub fn integrated_tail(&self, t: f64) -> f64 {
        let a = self.a;
        let h = self.h;
        self.r1 * t.powf(1.0 - a) / (a - 1.0) + self.r2 * t.powf(1.0 - a - h) * self.l0.eval(t) / (a + h - 1.0)
    }

    pub fn require_second_order(&self) -> Result<()> {
        if self.a > 2.0 {
            Ok(())
        } else {
            Err(Error::SecondOrderUnavailable(self.a))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `F̄(t) = (1/2) t^{-v} (1 + t^w)` for `t >= 1`, 1 below.
    HallWeiss { v: f64, w: f64 },
    /// `F̄(t) = (b / (b + t^w))^v`; `w = 1` is the Lomax law.
    Burr { b: f64, v: f64, w: f64 },
    /// Student's t folded onto `[0, ∞)`.
    StudentT { v: f64 },
    Exponential { nu: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::HallWeiss { .. } => "hall_weiss",
            Family::Burr { .. } => "burr",
            Family::StudentT { .. } => "student_t",
            Family::Exponential { .. } => "exponential",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Family::HallWeiss { v, w } => {
                if !(v > 2.0) {
                    return bad(format!("hall_weiss needs v > 2, got {v}"));
                }
                if !(w < 0.0) || !w.is_finite() {
                    return bad(format!("hall_weiss needs w < 0, got {w}"));
                }
            }
            Family::Burr { b, v, w } => {
                if !(b > 0.0 && v > 0.0 && w > 0.0) || !(b * v * w).is_finite() {
                    return bad(format!("burr needs b, v, w > 0, got b={b} v={v} w={w}"));
                }
                if !(v * w > 2.0) {
                    return bad(format!("burr needs v*w > 2, got {}", v * w));
                }
            }
            Family::StudentT { v } => {
                if !(v > 2.0) || !v.is_finite() {
                    return bad(format!("student_t needs v > 2, got {v}"));
                }
            }
            Family::Exponential { nu } => {
                if !(nu > 0.0) || !nu.is_finite() {
                    return bad(format!("exponential needs nu > 0, got {nu}"));
                }
            }
        }
        Ok(())
    }

    /// Tail index `a`, if the tail is regularly varying.
    pub fn tail_index(&self) -> Option<f64> {
        match *self {
            Family::HallWeiss { v, .. } => Some(v),
            Family::Burr { v, w, .. } => Some(v * w),
            Family::StudentT { v } => Some(v),
            Family::Exponential { .. } => None,
        }
    }

    /// First two moments from the family's closed forms.
    pub fn moments(&self) -> Result<Moments> {
        if let Some(a) = self.tail_index() {
            if a <= 1.0 {
                return Err(Error::InfiniteMoment { order: 1, index: a });
            }
            if a <= 2.0 {
                return Err(Error::InfiniteMoment { order: 2, index: a });
            }
        }
        let m = match *self {
            Family::HallWeiss { v, w } => Moments {
                beta1: 1.0 + 0.5 * (1.0 / (v - 1.0) + 1.0 / (v - w - 1.0)),
                beta2: 1.0 + 1.0 / (v - 2.0) + 1.0 / (v - w - 2.0),
            },
            Family::Burr { b, v, w } => {
                let s = b.powf(1.0 / w);
                let raw = |k: f64| s.powf(k) * v * (ln_gamma(v - k / w) + ln_gamma(1.0 + k / w) - ln_gamma(v + 1.0)).exp();
                Moments { beta1: raw(1.0), beta2: raw(2.0) }
            }
            Family::StudentT { v } => Moments {
                beta1: 2.0 * student_constant(v) * v / (v - 1.0),
                beta2: v / (v - 2.0),
            },
            Family::Exponential { nu } => Moments { beta1: 1.0 / nu, beta2: 2.0 / (nu * nu) },
        };
        Ok(m)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::HallWeiss { v, w } => write!(f, "family=hall_weiss v={v} w={w}"),
            Family::Burr { b, v, w } => write!(f, "family=burr b={b} v={v} w={w}"),
            Family::StudentT { v } => write!(f, "family=student_t v={v}"),
            Family::Exponential { nu } => write!(f, "family=exponential nu={nu}"),
        }
    }
}

/// `Γ((v+1)/2) / (√(vπ) Γ(v/2))`, the one-sided Student-t density constant.
fn student_constant(v: f64) -> f64 {
    (ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v)).exp() / (v * PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub beta1: f64,
    pub beta2: f64,
}

/// A validated service-time law with cached moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceModel {
    family: Family,
    moments: Moments,
}

impl ServiceModel {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        let moments = family.moments()?;
        Ok(ServiceModel { family, moments })
    }

    pub fn hall_weiss(v: f64, w: f64) -> Result<Self> {
        Self::new(Family::HallWeiss { v, w })
    }

    pub fn burr(b: f64, v: f64, w: f64) -> Result<Self> {
        Self::new(Family::Burr { b, v, w })
    }

    pub fn student_t(v: f64) -> Result<Self> {
        Self::new(Family::StudentT { v })
    }

    pub fn exponential(nu: f64) -> Result<Self> {
        Self::new(Family::Exponential { nu })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    pub fn beta1(&self) -> f64 {
        self.moments.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.moments.beta2
    }

    pub fn tail_index(&self) -> Option<f64> {
        self.family.tail_index()
    }

    /// `F̄(t) = P{T > t}`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self.family {
            Family::HallWeiss { v, w } => {
                if t < 1.0 {
                    1.0
                } else {
                    0.5 * t.powf(-v) * (1.0 + t.powf(w))
                }
            }
            Family::Burr { b, v, w } => (b / (b + t.powf(w))).powf(v),
            Family::StudentT { v } => beta_reg(0.5 * v, 0.5, v / (v + t * t)),
            Family::Exponential { nu } => (-nu * t).exp(),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.tail(t)
    }

    pub fn density(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self.family {
            Family::HallWeiss { v, w } => {
                if t < 1.0 {
                    0.0
                } else {
                    0.5 * (v * t.powf(-v - 1.0) + (v - w) * t.powf(w - v - 1.0))
                }
            }
            Family::Burr { b, v, w } => {
                if t == 0.0 {
                    return if w < 1.0 {
                        f64::INFINITY
                    } else if w == 1.0 {
                        v / b
                    } else {
                        0.0
                    };
                }
                let tw = t.powf(w);
                v * w * b.powf(v) * tw / t / (b + tw).powf(v + 1.0)
            }
            Family::StudentT { v } => 2.0 * student_constant(v) * (1.0 + t * t / v).powf(-0.5 * (v + 1.0)),
            Family::Exponential { nu } => nu * (-nu * t).exp(),
        }
    }

    /// `∫_t^∞ F̄(x) dx`.
    pub fn integrated_tail(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self.family {
            Family::HallWeiss { v, w } => {
                let beyond_one = |x: f64| 0.5 * (x.powf(1.0 - v) / (v - 1.0) + x.powf(1.0 - v + w) / (v - w - 1.0));
                if t < 1.0 {
                    (1.0 - t) + beyond_one(1.0)
                } else {
                    beyond_one(t)
                }
            }
            Family::Burr { b, v, w } => {
                if w == 1.0 {
                    b.powf(v) * (b + t).powf(1.0 - v) / (v - 1.0)
                } else {
                    let s = b.powf(1.0 / w);
                    let p = v - 1.0 / w;
                    let q = 1.0 / w;
                    let y = 1.0 / (1.0 + (t / s).powf(w));
                    s / w * ln_beta(p, q).exp() * beta_reg(p, q, y)
                }
            }
            Family::StudentT { v } => {
                let c = student_constant(v);
                let first = 2.0 * c * v / (v - 1.0) * (1.0 + t * t / v).powf(-0.5 * (v - 1.0));
                (first - t * self.tail(t)).max(0.0)
            }
            Family::Exponential { nu } => (-nu * t).exp() / nu,
        }
    }

    /// Tail of the equilibrium (integrated-tail) law, `(1/β₁) ∫_t^∞ F̄`.
    pub fn equilibrium_tail(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self.family {
            Family::Burr { b, v, w } if w != 1.0 => {
                let s = b.powf(1.0 / w);
                beta_reg(v - 1.0 / w, 1.0 / w, 1.0 / (1.0 + (t / s).powf(w)))
            }
            Family::Exponential { nu } => (-nu * t).exp(),
            _ => (self.integrated_tail(t) / self.beta1()).min(1.0),
        }
    }

    /// Equilibrium density `F̄(t) / β₁`.
    pub fn equilibrium_density(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.tail(t) / self.beta1()
        }
    }

    /// Upper-tail quantile: the `t` with `tail(t) = p`, for `p ∈ (0, 1]`.
    pub fn inverse_tail(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return match self.family {
                Family::HallWeiss { .. } => 1.0,
                _ => 0.0,
            };
        }
        if p <= 0.0 {
            return f64::INFINITY;
        }
        match self.family {
            Family::HallWeiss { v, .. } => {
                let lo = (0.5 / p).powf(1.0 / v).max(1.0);
                let hi = p.powf(-1.0 / v).max(lo * (1.0 + 1e-12));
                crate::roots::brent(|t| self.tail(t) - p, lo, hi, INVERSION_TOL).unwrap_or(lo)
            }
            Family::Burr { b, v, w } => {
                let s = b.powf(1.0 / w);
                // p^{-1/v} - 1 loses digits as p -> 1
                let inner = (-(p.ln()) / v).exp_m1();
                s * inner.powf(1.0 / w)
            }
            Family::StudentT { v } => {
                let start = (p.powf(-1.0 / v)).max(1.0);
                invert_decreasing(|t| self.tail(t), p, 0.0, start, INVERSION_TOL).unwrap_or(f64::NAN)
            }
            Family::Exponential { nu } => -p.ln() / nu,
        }
    }

    /// The `t` with `equilibrium_tail(t) = p`.
    pub fn inverse_equilibrium_tail(&self, p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        if p <= 0.0 {
            return f64::INFINITY;
        }
        match self.family {
            Family::Burr { b, v, w } if w == 1.0 => b * (-(p.ln()) / (v - 1.0)).exp_m1(),
            Family::Exponential { nu } => -p.ln() / nu,
            Family::HallWeiss { .. } => {
                let beta1 = self.beta1();
                let t = beta1 * (1.0 - p);
                if t < 1.0 {
                    t
                } else {
                    invert_decreasing(|t| self.equilibrium_tail(t), p, 1.0, 2.0, INVERSION_TOL).unwrap_or(f64::NAN)
                }
            }
            _ => {
                let start = self.inverse_tail(p).max(1.0);
                invert_decreasing(|t| self.equilibrium_tail(t), p, 0.0, start, INVERSION_TOL).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_tail(open_closed_unit(rng))
    }

    pub fn equilibrium_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_equilibrium_tail(open_closed_unit(rng))
    }

    /// Two-term tail parameters. The folded Student-t stores twice the
    /// one-sided constants.
    pub fn tail_params(&self) -> Result<TailExpansionParams> {
        let one = SlowlyVarying::Constant(1.0);
        match self.family {
            Family::HallWeiss { v, w } => TailExpansionParams::new(v, -w, 0.5, 0.5, one),
            Family::Burr { b, v, w } => TailExpansionParams::new(v * w, w, b.powf(v), -v * b.powf(v + 1.0), one),
            Family::StudentT { v } => {
                let c = student_constant(v) * v.powf(0.5 * (v + 1.0));
                TailExpansionParams::new(v, 2.0, 2.0 * c / v, -2.0 * c * v * (v + 1.0) / (2.0 * (v + 2.0)), one)
            }
            Family::Exponential { .. } => Err(Error::UnsupportedFamily("exponential")),
        }
    }
}

impl Lifetime for ServiceModel {
    fn tail(&self, t: f64) -> f64 {
        ServiceModel::tail(self, t)
    }

    fn density(&self, t: f64) -> f64 {
        ServiceModel::density(self, t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.family {
            Family::HallWeiss { .. } => vec![1.0],
            _ => Vec::new(),
        }
    }

    fn scale(&self) -> f64 {
        match self.family {
            Family::Burr { b, w, .. } => b.powf(1.0 / w),
            Family::Exponential { nu } => 1.0 / nu,
            _ => 1.0,
        }
    }
}

impl fmt::Display for ServiceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

fn open_closed_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
