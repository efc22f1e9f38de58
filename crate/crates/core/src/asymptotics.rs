//! Closed-form tail expansions.
//!
//! Every function here returns an expansion *value*. The values carry
//! [`Provenance::Asymptotic`](crate::estimate::Provenance) so they are never
//! mistaken for ground truth.
//!
//! Regimes are selected by comparing the second-order gap `h` with 1
//! exactly; `h` is a model parameter, not a measurement.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dist::{ServiceModel, SlowlyVarying, TailExpansionParams};
use crate::error::{Error, Result};
use crate::estimate::TailEstimate;
use crate::transforms::{QueueModel, RetrialRate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeTag {
    HEquals1,
    HLess1,
    HGreater1,
}

impl RegimeTag {
    #[allow(clippy::float_cmp)]
    pub fn of(h: f64) -> Self {
        if h == 1.0 {
            RegimeTag::HEquals1
        } else if h < 1.0 {
            RegimeTag::HLess1
        } else {
            RegimeTag::HGreater1
        }
    }
}

/// `c1 x^{e1} + (c2 + c2_l0 L0(x)) x^{e2}`.
///
/// A constant `L0` is folded into `c2`; `c2_l0` is only nonzero for a
/// non-constant slowly varying factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermExpansion {
    pub c1: f64,
    pub e1: f64,
    pub c2: f64,
    pub e2: f64,
    pub c2_l0: f64,
    /// Whether the regime's second term carries `L0`.
    pub l0_in_second: bool,
    pub l0: SlowlyVarying,
    pub regime: RegimeTag,
}

impl TwoTermExpansion {
    fn build(c1: f64, e1: f64, plain: f64, with_l0: f64, e2: f64, l0: SlowlyVarying, regime: RegimeTag) -> Self {
        let (c2, c2_l0) = match l0 {
            SlowlyVarying::Constant(k) => (plain + with_l0 * k, 0.0),
            SlowlyVarying::LogPower(_) => (plain, with_l0),
        };
        TwoTermExpansion { c1, e1, c2, e2, c2_l0, l0_in_second: with_l0 != 0.0, l0, regime }
    }

    pub fn first_term(&self, x: f64) -> f64 {
        self.c1 * x.powf(self.e1)
    }

    pub fn second_term(&self, x: f64) -> f64 {
        let l0 = if self.c2_l0 != 0.0 { self.c2_l0 * self.l0.eval(x) } else { 0.0 };
        (self.c2 + l0) * x.powf(self.e2)
    }

    /// Coefficient of `x^{e2}` at `x` (constant unless `L0` varies).
    pub fn second_coefficient(&self, x: f64) -> f64 {
        self.second_term(x) / x.powf(self.e2)
    }

    pub fn eval(&self, x: f64, order: u8) -> f64 {
        match order {
            1 => self.first_term(x),
            _ => self.first_term(x) + self.second_term(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub rho: f64,
    pub psi: f64,
    pub c_kappa: f64,
}

/// The scalars every expansion is built from.
///
/// Usually obtained from a [`QueueModel`]; building one directly allows
/// synthetic tail parameters that no service family realises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionInputs {
    pub lambda: f64,
    pub mu: RetrialRate,
    pub beta1: f64,
    pub beta2: f64,
    pub params: TailExpansionParams,
    service: Option<ServiceModel>,
}

impl ExpansionInputs {
    pub fn new(lambda: f64, mu: RetrialRate, beta1: f64, beta2: f64, params: TailExpansionParams) -> Result<Self> {
        let rho = lambda * beta1;
        if !(rho < 1.0) {
            return Err(Error::UnstableModel { rho });
        }
        if !(lambda > 0.0 && beta1 > 0.0) {
            return Err(Error::InvalidParameter("lambda and beta1 must be positive".into()));
        }
        Ok(ExpansionInputs { lambda, mu, beta1, beta2, params, service: None })
    }

    pub fn from_model(model: &QueueModel) -> Result<Self> {
        let service = *model.service();
        let mut inputs = Self::new(model.lambda(), model.mu(), service.beta1(), service.beta2(), service.tail_params()?)?;
        inputs.service = Some(service);
        Ok(inputs)
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.beta1
    }

    pub fn psi(&self) -> f64 {
        match self.mu {
            RetrialRate::Finite(mu) => self.rho() / (mu * (1.0 - self.rho())),
            RetrialRate::Infinite => 0.0,
        }
    }

    pub fn constants(&self) -> Constants {
        let rho = self.rho();
        let c_kappa = 1.0 / ((1.0 - rho) * (self.params.a - 1.0) * self.beta1);
        Constants { rho, psi: self.psi(), c_kappa }
    }

    /// `λ r1 / (a μ (1-ρ)²)`, the retrial contribution; 0 for `μ = ∞`.
    fn retrial_term(&self) -> f64 {
        let p = &self.params;
        match self.mu {
            RetrialRate::Finite(mu) => self.lambda * p.r1 / (p.a * mu * (1.0 - self.rho()).powi(2)),
            RetrialRate::Infinite => 0.0,
        }
    }

    /// `λ² β₂ r1 / (1-ρ)²`.
    fn second_moment_term(&self) -> f64 {
        self.lambda.powi(2) * self.beta2 * self.params.r1 / (1.0 - self.rho()).powi(2)
    }

    /// `λ r2 / (a (1-ρ))`, multiplied by `L0` where it appears.
    fn r2_term(&self) -> f64 {
        self.lambda * self.params.r2 / (self.params.a * (1.0 - self.rho()))
    }

    /// Leading coefficient `λ^a r1 / ((a-1)(1-ρ))` of `P{L_μ > j}`.
    pub fn first_order_coefficient(&self) -> f64 {
        let p = &self.params;
        self.lambda.powf(p.a) * p.r1 / ((p.a - 1.0) * (1.0 - self.rho()))
    }

    /// The two-term expansion of `P{L_μ > j}` exactly as stated in the
    /// retrial-queue main theorem.
    pub fn theorem1(&self) -> Result<TwoTermExpansion> {
        self.params.require_second_order()?;
        let p = self.params;
        let rho = self.rho();
        let la = self.lambda.powf(p.a);
        let c1 = self.first_order_coefficient();
        let e1 = 1.0 - p.a;
        let regime = RegimeTag::of(p.h);
        let common = (p.a - 4.0) * p.r1 / (2.0 * (1.0 - rho)) + p.r1 + self.retrial_term() + self.second_moment_term();
        Ok(match regime {
            RegimeTag::HEquals1 => TwoTermExpansion::build(c1, e1, la * common, la * self.r2_term(), -p.a, p.l0, regime),
            RegimeTag::HLess1 => {
                let c = self.lambda.powf(p.a + p.h) * p.r2 / ((p.a + p.h - 1.0) * (1.0 - rho));
                TwoTermExpansion::build(c1, e1, 0.0, c, 1.0 - p.a - p.h, p.l0, regime)
            }
            RegimeTag::HGreater1 => TwoTermExpansion::build(c1, e1, la * common, 0.0, -p.a, p.l0, regime),
        })
    }

    /// The expansion of `P{L_μ > j}` with two additional `j^{-a}`
    /// contributions: the Poisson-mixture correction evaluated with the
    /// kernel `λe^{-λt}(λt)^j/j!` (which turns `(a-4)/2` into `(a-2)/2`), and
    /// the convolution cross term `E[T_β + T_τ] f_θ(t)`. Identical to
    /// [`theorem1`](Self::theorem1) when `h < 1`.
    pub fn corrected_lmu(&self) -> Result<TwoTermExpansion> {
        let mut e = self.theorem1()?;
        if e.regime != RegimeTag::HLess1 {
            let p = &self.params;
            let rho = self.rho();
            let extra = p.r1 * (1.0 + rho + self.lambda * self.psi()) / (1.0 - rho);
            e.c2 += self.lambda.powf(p.a) * extra;
        }
        Ok(e)
    }

    /// `(1 - 1/a) c_κ ψ t^{-a} L(t)`.
    pub fn tail_ttau(&self, t: f64) -> f64 {
        let p = &self.params;
        let c = self.constants();
        (1.0 - 1.0 / p.a) * c.c_kappa * c.psi * p.two_term_tail(t)
    }

    fn service_tail(&self, t: f64) -> f64 {
        match &self.service {
            Some(s) => s.tail(t),
            None => self.params.two_term_tail(t),
        }
    }

    /// Two-term tail of the geometric sum of equilibrium service times.
    pub fn tail_tkappa(&self, t: f64) -> Result<f64> {
        self.params.require_second_order()?;
        let rho = self.rho();
        let b1 = self.beta1;
        let integral = self.params.integrated_tail(t);
        Ok(integral / ((1.0 - rho) * b1) + rho * self.beta2 / ((1.0 - rho).powi(2) * b1 * b1) * self.service_tail(t))
    }

    fn time_first_coefficient(&self) -> f64 {
        let p = &self.params;
        self.lambda * p.r1 / ((p.a - 1.0) * (1.0 - self.rho()))
    }

    /// Two-term tail of `T_θ`, per regime.
    pub fn tail_ttheta(&self, t: f64) -> Result<f64> {
        self.params.require_second_order()?;
        let p = &self.params;
        let first = self.time_first_coefficient() * t.powf(1.0 - p.a);
        let second = match RegimeTag::of(p.h) {
            RegimeTag::HEquals1 => (self.second_moment_term() + self.r2_term() * p.l0.eval(t)) * t.powf(-p.a),
            RegimeTag::HLess1 => {
                self.lambda * p.r2 / ((p.a + p.h - 1.0) * (1.0 - self.rho())) * t.powf(1.0 - p.a - p.h) * p.l0.eval(t)
            }
            RegimeTag::HGreater1 => self.second_moment_term() * t.powf(-p.a),
        };
        Ok(first + second)
    }

    /// Two-term tail of `T_θ + T_β + T_τ`.
    pub fn tail_tsum(&self, t: f64) -> Result<f64> {
        self.params.require_second_order()?;
        let p = &self.params;
        let first = self.time_first_coefficient() * t.powf(1.0 - p.a);
        let base = p.r1 + self.retrial_term() + self.second_moment_term();
        let delta = match RegimeTag::of(p.h) {
            RegimeTag::HEquals1 => (base + self.r2_term() * p.l0.eval(t)) * t.powf(-p.a),
            RegimeTag::HLess1 => {
                self.lambda * p.r2 / ((p.a + p.h - 1.0) * (1.0 - self.rho())) * t.powf(1.0 - p.a - p.h) * p.l0.eval(t)
            }
            RegimeTag::HGreater1 => base * t.powf(-p.a),
        };
        Ok(first + delta)
    }

    /// Bracket of the `h = 1` time-domain second term, with `L0 = 1`.
    pub fn tsum_bracket(&self) -> f64 {
        self.params.r1 + self.retrial_term() + self.second_moment_term() + self.r2_term()
    }

    /// Bracket of the `h = 1` queue-length second term, with `L0 = 1`.
    pub fn theorem1_bracket(&self) -> f64 {
        let p = &self.params;
        (p.a - 4.0) * p.r1 / (2.0 * (1.0 - self.rho())) + self.tsum_bracket()
    }
}

pub fn constants(model: &QueueModel) -> Result<Constants> {
    Ok(ExpansionInputs::from_model(model)?.constants())
}

pub fn theorem1_expansion(model: &QueueModel) -> Result<TwoTermExpansion> {
    ExpansionInputs::from_model(model)?.theorem1()
}

pub fn corrected_lmu_expansion(model: &QueueModel) -> Result<TwoTermExpansion> {
    ExpansionInputs::from_model(model)?.corrected_lmu()
}

/// `P{L_μ > j}` from the first (`order = 1`) or both (`order = 2`) terms.
pub fn tail_lmu_asym(model: &QueueModel, j: u64, order: u8) -> Result<TailEstimate> {
    if j < 1 {
        return Err(Error::Domain("j must be at least 1".into()));
    }
    let inputs = ExpansionInputs::from_model(model)?;
    let x = j as f64;
    let value = match order {
        1 => inputs.first_order_coefficient() * x.powf(1.0 - inputs.params.a),
        2 => inputs.theorem1()?.eval(x, 2),
        _ => return Err(Error::Domain(format!("expansion order must be 1 or 2, got {order}"))),
    };
    Ok(TailEstimate::asymptotic(value, order))
}

pub fn tail_ttau_asym(model: &QueueModel, t: f64) -> Result<TailEstimate> {
    Ok(TailEstimate::asymptotic(ExpansionInputs::from_model(model)?.tail_ttau(t), 1))
}

pub fn tail_tkappa_2nd(model: &QueueModel, t: f64) -> Result<TailEstimate> {
    Ok(TailEstimate::asymptotic(ExpansionInputs::from_model(model)?.tail_tkappa(t)?, 2))
}

pub fn tail_ttheta_2nd(model: &QueueModel, t: f64) -> Result<TailEstimate> {
    Ok(TailEstimate::asymptotic(ExpansionInputs::from_model(model)?.tail_ttheta(t)?, 2))
}

pub fn tail_tsum_2nd(model: &QueueModel, t: f64) -> Result<TailEstimate> {
    Ok(TailEstimate::asymptotic(ExpansionInputs::from_model(model)?.tail_tsum(t)?, 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Asym2,
}

/// `Γ(x - d) / Γ(x)`, exactly via log-Gamma or from its two-term expansion
/// `x^{-d} + d(d+1)/2 · x^{-d-1}`.
pub fn gamma_ratio(x: f64, d: f64, mode: Mode) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("d must be positive, got {d}")));
    }
    if !(x > d) {
        return Err(Error::Domain(format!("need x > d, got x={x}, d={d}")));
    }
    Ok(match mode {
        Mode::Exact => (ln_gamma(x - d) - ln_gamma(x)).exp(),
        Mode::Asym2 => x.powf(-d) + 0.5 * d * (d + 1.0) * x.powf(-d - 1.0),
    })
}

/// `∫_0^∞ λe^{-λt} (λt)^{j+1}/(j+1)! · t^{-d} dt = λ^d Γ(j+2-d)/Γ(j+2)`, or its
/// expansion `λ^d j^{-d} + d(d-3)/2 · λ^d j^{-d-1}`.
pub fn mixed_poisson_power_tail(lambda: f64, d: f64, j: u64, mode: Mode) -> Result<f64> {
    let jf = j as f64;
    if !(jf + 2.0 > d) || !(d > 0.0) {
        return Err(Error::Domain(format!("need j + 2 > d > 0, got j={j}, d={d}")));
    }
    Ok(match mode {
        Mode::Exact => lambda.powf(d) * (ln_gamma(jf + 2.0 - d) - ln_gamma(jf + 2.0)).exp(),
        Mode::Asym2 => {
            if j == 0 {
                return Err(Error::Domain("the expansion needs j >= 1".into()));
            }
            lambda.powf(d) * (jf.powf(-d) + 0.5 * d * (d - 3.0) * jf.powf(-d - 1.0))
        }
    })
}

/// First-order value `λ^d j^{-d} L(j)` of the Poisson mixture of
/// `t^{-d} L(t)`.
pub fn slowly_varying_mixture_tail(lambda: f64, d: f64, l: SlowlyVarying, j: u64) -> Result<f64> {
    if j < 1 {
        return Err(Error::Domain("j must be at least 1".into()));
    }
    let jf = j as f64;
    Ok(lambda.powf(d) * jf.powf(-d) * l.eval(jf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Provenance;

    fn canonical() -> QueueModel {
        QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0).unwrap()).unwrap()
    }

    fn synthetic(h: f64, r2: f64, mu: RetrialRate) -> ExpansionInputs {
        let p = TailExpansionParams::new(3.0, h, 0.5, r2, SlowlyVarying::Constant(1.0)).unwrap();
        ExpansionInputs::new(0.5, mu, 1.0, 4.0, p).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn regime_selection_is_exact() {
        assert_eq!(RegimeTag::of(1.0), RegimeTag::HEquals1);
        assert_eq!(RegimeTag::of(1.0 - 1e-15), RegimeTag::HLess1);
        assert_eq!(RegimeTag::of(1.0 + 1e-15), RegimeTag::HGreater1);
    }

    #[test]
    fn constants_examples() {
        let c = constants(&canonical()).unwrap();
        assert!(close(c.rho, 0.5, 1e-14) && close(c.psi, 1.0, 1e-13) && close(c.c_kappa, 1.0, 1e-13));
        let c = constants(&canonical().without_retrials()).unwrap();
        assert_eq!(c.psi, 0.0);
    }

    #[test]
    fn theorem1_canonical_coefficients() {
        let e = theorem1_expansion(&canonical()).unwrap();
        assert!(close(e.c1, 1.0, 1e-13));
        assert_eq!(e.e1, -2.0);
        assert!(close(e.c2, 8.0 / 3.0, 1e-12), "{}", e.c2);
        assert_eq!(e.e2, -3.0);
        assert_eq!(e.regime, RegimeTag::HEquals1);
        assert!(e.e2 < e.e1 && e.e1 < 0.0 && e.c1 > 0.0);
    }

    #[test]
    fn theorem1_h_less_than_one() {
        let e = synthetic(0.5, 0.5, RetrialRate::Finite(1.0)).theorem1().unwrap();
        let want = 0.5f64.powf(3.5) * 0.5 / (2.5 * 0.5);
        assert!(close(e.c2, want, 1e-14));
        assert_eq!(e.e2, -2.5);
        assert!(e.l0_in_second);
    }

    #[test]
    fn theorem1_without_retrials_drops_retrial_term() {
        let finite = synthetic(1.5, 0.5, RetrialRate::Finite(1.0));
        let inf = synthetic(1.5, 0.5, RetrialRate::Infinite);
        let diff = finite.theorem1().unwrap().c2 - inf.theorem1().unwrap().c2;
        let retrial = 0.5 * 0.5 / (3.0 * 1.0 * 0.25) * 0.5f64.powi(3);
        assert!(close(diff, retrial, 1e-12));
        // h > 1 carries no r2 contribution
        let other_r2 = synthetic(1.5, -7.0, RetrialRate::Infinite);
        assert_eq!(other_r2.theorem1().unwrap().c2, inf.theorem1().unwrap().c2);
    }

    #[test]
    fn second_order_requires_a_above_two() {
        let p = TailExpansionParams::new(1.8, 1.0, 1.0, 0.0, SlowlyVarying::Constant(1.0)).unwrap();
        let inputs = ExpansionInputs::new(0.2, RetrialRate::Finite(1.0), 1.0, f64::INFINITY, p).unwrap();
        assert!(matches!(inputs.theorem1(), Err(Error::SecondOrderUnavailable(_))));
        assert!(inputs.tail_ttau(10.0) > 0.0);
    }

    #[test]
    fn tail_lmu_examples() {
        let m = canonical();
        let o1 = tail_lmu_asym(&m, 100, 1).unwrap();
        assert!(close(o1.value, 1e-4, 1e-12));
        assert_eq!(o1.provenance, Provenance::Asymptotic { order: 1 });
        let o2 = tail_lmu_asym(&m, 100, 2).unwrap().value;
        assert!(close(o2, 1e-4 + 8.0 / 3.0 * 1e-6, 1e-12));
        let e = theorem1_expansion(&m).unwrap();
        assert!(close(tail_lmu_asym(&m, 1, 1).unwrap().value, e.c1, 1e-15));
        assert!(tail_lmu_asym(&m, 0, 1).is_err());
    }

    #[test]
    fn order_difference_is_the_second_term() {
        let m = canonical();
        let e = theorem1_expansion(&m).unwrap();
        for j in [2u64, 17, 300, 5000] {
            let d = tail_lmu_asym(&m, j, 2).unwrap().value - tail_lmu_asym(&m, j, 1).unwrap().value;
            let want = e.c2 * (j as f64).powf(e.e2);
            assert!(close(d, want, 1e-9), "j={j}");
            assert_eq!(d.signum(), e.c2.signum());
        }
    }

    #[test]
    fn corrected_expansion_adds_cross_terms() {
        let e = corrected_lmu_expansion(&canonical()).unwrap();
        assert!(close(e.c2, 20.0 / 3.0, 1e-12), "{}", e.c2);
        let s = synthetic(0.5, 0.5, RetrialRate::Finite(1.0));
        assert_eq!(s.corrected_lmu().unwrap(), s.theorem1().unwrap());
    }

    #[test]
    fn ttau_examples() {
        let m = canonical();
        let p = m.tail_params().unwrap();
        for t in [10.0f64, 100.0, 1000.0] {
            let want = 2.0 / 3.0 * t.powi(-3) * (p.r1 + p.r2 / t);
            assert!(close(tail_ttau_asym(&m, t).unwrap().value, want, 1e-12));
        }
        assert_eq!(tail_ttau_asym(&m.without_retrials(), 50.0).unwrap().value, 0.0);
    }

    #[test]
    fn tkappa_canonical_value() {
        let m = canonical();
        let t = 100.0f64;
        let first = (4.0 * t.powi(-2) - 16.0 * t.powi(-3)) / 0.5;
        let second = 0.5 * 4.0 / 0.25 * (2.0 / 102.0f64).powi(3);
        assert!(close(tail_tkappa_2nd(&m, t).unwrap().value, first + second, 1e-12));
    }

    #[test]
    fn tkappa_small_rho_limit() {
        // ρ → 0: T_κ is a single equilibrium time
        let m = QueueModel::new(1e-9, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0).unwrap()).unwrap();
        let t = 1e4;
        let v = tail_tkappa_2nd(&m, t).unwrap().value;
        assert!(close(v, m.service().equilibrium_tail(t), 1e-6));
    }

    #[test]
    fn ttheta_is_rho_times_tkappa_in_two_terms() {
        let m = canonical();
        let inputs = ExpansionInputs::from_model(&m).unwrap();
        let ratios: Vec<f64> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&t| {
                let th = inputs.tail_ttheta(t).unwrap();
                let k = inputs.tail_tkappa(t).unwrap();
                (th - inputs.rho() * k).abs() * t.powi(3)
            })
            .collect();
        // agreement up to o(t^{-a})
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
        assert!(close(inputs.tail_ttheta(100.0).unwrap() - 16.0 * 1e-6, 4e-4, 1e-12));
    }

    #[test]
    fn tsum_canonical_value() {
        let m = canonical();
        let inputs = ExpansionInputs::from_model(&m).unwrap();
        assert!(close(inputs.tsum_bracket(), 88.0 / 3.0, 1e-12));
        assert!(close(tail_tsum_2nd(&m, 100.0).unwrap().value, 4e-4 + 88.0 / 3.0 * 1e-6, 1e-12));
        let inf = ExpansionInputs::from_model(&m.without_retrials()).unwrap();
        assert!(close(inputs.tsum_bracket() - inf.tsum_bracket(), 16.0 / 3.0, 1e-12));
    }

    #[test]
    fn theorem1_bracket_is_tsum_bracket_plus_poisson_shift() {
        for m in [canonical(), canonical().without_retrials()] {
            let i = ExpansionInputs::from_model(&m).unwrap();
            let shift = (i.params.a - 4.0) * i.params.r1 / (2.0 * (1.0 - i.rho()));
            assert!(close(i.theorem1_bracket(), i.tsum_bracket() + shift, 1e-14));
            let c2 = i.theorem1().unwrap().c2;
            assert!(close(c2, i.theorem1_bracket() * i.lambda.powf(i.params.a), 1e-12));
        }
    }

    #[test]
    fn time_domain_tails_decrease() {
        let m = canonical();
        let grid: Vec<f64> = (0..30).map(|i| 10.0 * 1.3f64.powi(i)).collect();
        for f in [tail_ttau_asym, tail_ttheta_2nd, tail_tsum_2nd] {
            let v: Vec<f64> = grid.iter().map(|&t| f(&m, t).unwrap().value).collect();
            assert!(v.iter().all(|&x| x > 0.0));
            assert!(v.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn gamma_ratio_examples() {
        assert!(close(gamma_ratio(5.0, 1.0, Mode::Exact).unwrap(), 0.25, 1e-13));
        assert!(close(gamma_ratio(5.0, 1.0, Mode::Asym2).unwrap(), 0.24, 1e-15));
        assert!(gamma_ratio(1.0, 1.0, Mode::Exact).is_err());
        let err = |x: f64| (gamma_ratio(x, 1.0, Mode::Exact).unwrap() - gamma_ratio(x, 1.0, Mode::Asym2).unwrap()).abs();
        let shrink = err(100.0) / err(200.0);
        assert!((7.0..9.0).contains(&shrink), "{shrink}");
    }

    #[test]
    fn gamma_ratio_error_envelope() {
        for d in [0.25, 0.5, 1.0, 2.0, 3.0] {
            for x in [50.0, 80.0, 150.0, 400.0] {
                let ex = gamma_ratio(x, d, Mode::Exact).unwrap();
                let rel = (gamma_ratio(x, d, Mode::Asym2).unwrap() - ex).abs() / ex;
                assert!(rel <= 2.0 * (d + 1.0) * (d + 2.0) / (x * x), "d={d} x={x}");
            }
        }
    }

    #[test]
    fn mixed_poisson_power_tail_examples() {
        assert!(close(mixed_poisson_power_tail(1.0, 1.0, 9, Mode::Exact).unwrap(), 0.1, 1e-13));
        // 1/9 + (1/2)(1)(-2)/81
        assert!(close(mixed_poisson_power_tail(1.0, 1.0, 9, Mode::Asym2).unwrap(), 1.0 / 9.0 - 1.0 / 81.0, 1e-14));
        assert!(mixed_poisson_power_tail(1.0, 3.0, 1, Mode::Exact).is_err());
    }

    #[test]
    fn slowly_varying_examples() {
        let v = slowly_varying_mixture_tail(1.0, 2.0, SlowlyVarying::LogPower(1.0), 7).unwrap();
        assert!(close(v, 49f64.recip() * 7f64.ln(), 1e-15));
        let e2 = std::f64::consts::E.powi(2);
        let direct = 1.0 * e2.powi(-2) * 2.0;
        assert!(close(1.0f64.powf(2.0) * e2.powf(-2.0) * SlowlyVarying::LogPower(1.0).eval(e2), direct, 1e-14));
        let c = slowly_varying_mixture_tail(0.7, 1.5, SlowlyVarying::Constant(1.0), 40).unwrap();
        let lead = 0.7f64.powf(1.5) * 40f64.powf(-1.5);
        assert!(close(c, lead, 1e-15));
    }

    /// `∫ λe^{-λt}(λt)^{j+1}/(j+1)! g(t) dt` by adaptive quadrature, split
    /// around the kernel's mode.
    fn kernel_integral(lambda: f64, j: u64, g: impl Fn(f64) -> f64) -> f64 {
        use crate::quadrature::{integrate_breaks_to_infinity, Tolerance};
        let k = (j + 1) as f64;
        let ln_norm = ln_gamma(k + 1.0);
        let f = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let lt = lambda * t;
            lambda * (k * lt.ln() - lt - ln_norm).exp() * g(t)
        };
        let mode = k / lambda;
        let sd = k.sqrt() / lambda;
        let mut points = vec![0.0, 1.0];
        for m in [-10.0, -4.0, 0.0, 4.0, 10.0] {
            let p = mode + m * sd;
            if p > 1.0 {
                points.push(p);
            }
        }
        integrate_breaks_to_infinity(f, &points, sd, Tolerance::relative(1e-12)).value
    }

    #[test]
    fn mixed_poisson_power_tail_matches_quadrature() {
        for (lambda, d, j) in [(1.0, 1.0, 9u64), (0.5, 2.0, 20), (2.0, 2.5, 60), (0.3, 0.7, 5)] {
            let exact = mixed_poisson_power_tail(lambda, d, j, Mode::Exact).unwrap();
            let quad = kernel_integral(lambda, j, |t| t.powf(-d));
            assert!(close(quad, exact, 1e-8), "λ={lambda} d={d} j={j}: {quad} vs {exact}");
        }
    }

    #[test]
    fn slowly_varying_mixture_trend() {
        let d = 2.0;
        let l = SlowlyVarying::LogPower(1.0);
        let g = |t: f64| if t > 1.0 { (t.powf(-d) * t.ln()).min(1.0) } else { 0.0 };
        let gaps: Vec<f64> = [100u64, 1000, 10000]
            .iter()
            .map(|&j| {
                let quad = kernel_integral(1.0, j, g);
                (quad / slowly_varying_mixture_tail(1.0, d, l, j).unwrap() - 1.0).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 1e-2, "{gaps:?}");
    }
}
