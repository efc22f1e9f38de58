//! Laplace–Stieltjes transforms of the service-related laws and exact
//! stationary queue-length distributions by power-series arithmetic.
//!
//! With `B(z) = β(λ - λz)` the generating function of the number of Poisson
//! arrivals during one service,
//!
//! ```text
//! E z^{L∞} = (1-ρ)(1-z) B(z) / (B(z) - z)
//! E z^{Rμ} = exp{ (λ/μ) ∫_1^z (1 - B(u)) / (B(u) - u) du }
//! L_μ = L∞ + Rμ   (independent)
//! ```
//!
//! `B` is obtained coefficient by coefficient as a mixed Poisson law, and
//! everything else is truncated series arithmetic on it.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::dist::{Lifetime, ServiceModel, TailExpansionParams};
use crate::error::{Error, Result};
use crate::estimate::TailEstimate;
use crate::quadrature::{integrate, integrate_breaks_to_infinity, Tolerance};
use crate::series::CoefficientSeries;

const LST_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);
const COEFF_TOL: Tolerance = Tolerance::new(1e-300, 1e-13);
/// Coefficients beyond this magnitude mean the recurrence has gone unstable.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Within this distance of `u = 1` the R_μ integrand is replaced by its limit.
const REMOVABLE_BAND: f64 = 1e-6;
/// Numeric slack for pmf sanity checks.
pub const PMF_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RetrialRate {
    Finite(f64),
    /// No retrials: the standard M/G/1 queue.
    Infinite,
}

impl RetrialRate {
    pub fn finite(self) -> Option<f64> {
        match self {
            RetrialRate::Finite(mu) => Some(mu),
            RetrialRate::Infinite => None,
        }
    }
}

impl fmt::Display for RetrialRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetrialRate::Finite(mu) => write!(f, "{mu}"),
            RetrialRate::Infinite => f.write_str("inf"),
        }
    }
}

/// Arrival rate, retrial rate and service law of a stable M/G/1 retrial
/// queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueModel {
    lambda: f64,
    mu: RetrialRate,
    service: ServiceModel,
}

impl QueueModel {
    pub fn new(lambda: f64, mu: RetrialRate, service: ServiceModel) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if let RetrialRate::Finite(m) = mu {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidParameter(format!("mu must be positive or inf, got {m}")));
            }
        }
        let rho = lambda * service.beta1();
        if !(rho < 1.0) {
            return Err(Error::UnstableModel { rho });
        }
        Ok(QueueModel { lambda, mu, service })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> RetrialRate {
        self.mu
    }

    pub fn service(&self) -> &ServiceModel {
        &self.service
    }

    /// Traffic intensity `λβ₁`.
    pub fn rho(&self) -> f64 {
        self.lambda * self.service.beta1()
    }

    /// `ρ / (μ(1-ρ))`, zero without retrials.
    pub fn psi(&self) -> f64 {
        match self.mu {
            RetrialRate::Finite(mu) => self.rho() / (mu * (1.0 - self.rho())),
            RetrialRate::Infinite => 0.0,
        }
    }

    /// `1 / ((1-ρ)(a-1)β₁)`.
    pub fn c_kappa(&self) -> Result<f64> {
        let p = self.service.tail_params()?;
        Ok(1.0 / ((1.0 - self.rho()) * (p.a - 1.0) * self.service.beta1()))
    }

    pub fn tail_params(&self) -> Result<TailExpansionParams> {
        self.service.tail_params()
    }

    /// Same arrival and service laws, no retrials.
    pub fn without_retrials(&self) -> Self {
        QueueModel { mu: RetrialRate::Infinite, ..*self }
    }
}

impl fmt::Display for QueueModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} lambda={} mu={}", self.service, self.lambda, self.mu)
    }
}

/// `∫_0^∞ e^{-st} F̄(t) dt`, from which `β(s) = 1 - s·J(s)` and
/// `β^(e)(s) = J(s)/β₁` follow without cancellation.
pub fn tail_laplace(service: &ServiceModel, s: f64) -> f64 {
    let mut pts = vec![0.0];
    pts.extend(service.breakpoints());
    let scale = if s > 0.0 { service.scale().min(1.0 / s) } else { service.scale() };
    integrate_breaks_to_infinity(|t| (-s * t).exp() * service.tail(t), &pts, scale, LST_TOL).value
}

/// `β(s)`, the LST of the service time.
pub fn lst_beta(model: &QueueModel, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    1.0 - s * tail_laplace(model.service(), s)
}

/// `β^(e)(s)`, the LST of the equilibrium service law.
pub fn lst_equilibrium(model: &QueueModel, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    tail_laplace(model.service(), s) / model.service().beta1()
}

/// `κ(s) = (1-ρ)β^(e)(s) / (1 - ρβ^(e)(s))`, the LST of a geometric sum of
/// equilibrium service times.
pub fn lst_kappa(model: &QueueModel, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let rho = model.rho();
    let be = lst_equilibrium(model, s);
    (1.0 - rho) * be / (1.0 - rho * be)
}

/// `θ(s) = 1 - ρ + ρκ(s)`.
pub fn lst_theta(model: &QueueModel, s: f64) -> f64 {
    1.0 - model.rho() + model.rho() * lst_kappa(model, s)
}

/// `τ(s) = exp{-ψ ∫_0^s κ(u) du}`; identically 1 without retrials.
pub fn lst_tau(model: &QueueModel, s: f64) -> f64 {
    let psi = model.psi();
    if s == 0.0 || psi == 0.0 {
        return 1.0;
    }
    let integral = integrate(|u| lst_kappa(model, u), 0.0, s, Tolerance::new(1e-300, 1e-12)).value;
    (-psi * integral).exp()
}

fn ln_poisson(n: usize, x: f64) -> f64 {
    if n == 0 {
        -x
    } else if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        -x + n as f64 * x.ln() - ln_gamma(n as f64 + 1.0)
    }
}

/// Panel edges for integrals against the Poisson weight `e^{-λt}(λt)^n/n!`.
fn poisson_panels<L: Lifetime + ?Sized>(lambda: f64, law: &L, n: usize) -> (Vec<f64>, f64) {
    let mode = n as f64 / lambda;
    let sd = (n.max(1) as f64).sqrt() / lambda;
    let mut pts = vec![0.0];
    pts.extend(law.breakpoints());
    if n > 0 {
        pts.extend([mode - 8.0 * sd, mode, mode + 8.0 * sd]);
    }
    pts.retain(|&p| p >= 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = sd.max(law.scale()).max(1.0 / lambda);
    (pts, scale)
}

/// `P{N_T = n}` for `n = 0..=order`, where `N_t` is a rate-`λ` Poisson
/// process and `T` an independent random time.
pub fn mixed_poisson_coeffs<L: Lifetime + Sync + ?Sized>(lambda: f64, law: &L, order: usize) -> CoefficientSeries {
    let coeffs = (0..=order)
        .into_par_iter()
        .map(|n| {
            let (pts, scale) = poisson_panels(lambda, law, n);
            let f = |t: f64| {
                let d = law.density(t);
                if d == 0.0 {
                    0.0
                } else {
                    ln_poisson(n, lambda * t).exp() * d
                }
            };
            integrate_breaks_to_infinity(f, &pts, scale, COEFF_TOL).value
        })
        .collect();
    CoefficientSeries::new(coeffs)
}

/// `P{N_T > j} = ∫_0^∞ λ e^{-λt} (λt)^j / j! · F̄(t) dt`.
pub fn mixed_poisson_tail<L: Lifetime + ?Sized>(lambda: f64, law: &L, j: usize) -> f64 {
    let (pts, scale) = poisson_panels(lambda, law, j);
    let f = |t: f64| lambda * ln_poisson(j, lambda * t).exp() * law.tail(t);
    integrate_breaks_to_infinity(f, &pts, scale, COEFF_TOL).value
}

fn guard(series: CoefficientSeries) -> Result<CoefficientSeries> {
    match series.iter().position(|c| !c.is_finite() || c.abs() > DIVERGENCE_LIMIT) {
        Some(index) => Err(Error::DivergenceGuard { index, value: series[index] }),
        None => Ok(series),
    }
}

/// `∫_0^1 (1 - β(λ-λu)) / (β(λ-λu) - u) du`, evaluated as
/// `λJ(s) / (1 - λJ(s))` with `s = λ(1-u)`.
pub fn r_mu_integral_at_one(model: &QueueModel) -> f64 {
    let lambda = model.lambda();
    let rho = model.rho();
    let limit = rho / (1.0 - rho);
    let integrand = |u: f64| {
        if 1.0 - u < REMOVABLE_BAND {
            return limit;
        }
        let lj = lambda * tail_laplace(model.service(), lambda * (1.0 - u));
        lj / (1.0 - lj)
    };
    integrate(integrand, 0.0, 1.0, Tolerance::new(1e-300, 1e-13)).value
}

/// Exact stationary laws of a retrial queue up to a truncation order.
///
/// The service-arrival series `B` is computed once and shared by the three
/// distributions.
#[derive(Debug, Clone)]
pub struct ExactSeries {
    model: QueueModel,
    arrivals_per_service: CoefficientSeries,
}

impl ExactSeries {
    pub fn new(model: &QueueModel, order: usize) -> Self {
        let b = mixed_poisson_coeffs(model.lambda(), model.service(), order);
        ExactSeries { model: *model, arrivals_per_service: b }
    }

    pub fn model(&self) -> &QueueModel {
        &self.model
    }

    pub fn order(&self) -> usize {
        self.arrivals_per_service.order()
    }

    /// Coefficients of `B(z) = β(λ - λz)`.
    pub fn arrivals_per_service(&self) -> &CoefficientSeries {
        &self.arrivals_per_service
    }

    /// `B(z) - z`.
    fn denominator(&self) -> CoefficientSeries {
        &self.arrivals_per_service - &CoefficientSeries::identity(self.order())
    }

    /// Queue length of the standard M/G/1 queue (no retrials).
    pub fn l_infinity(&self) -> Result<CoefficientSeries> {
        let n = self.order();
        let rho = self.model.rho();
        let one_minus_z = &CoefficientSeries::constant(1.0, n) - &CoefficientSeries::identity(n);
        let numerator = one_minus_z.mul(&self.arrivals_per_service).scale(1.0 - rho);
        guard(numerator.div(&self.denominator())?)
    }

    /// Number in orbit given an idle server.
    pub fn r_mu(&self) -> Result<CoefficientSeries> {
        let n = self.order();
        let Some(mu) = self.model.mu().finite() else {
            return Ok(CoefficientSeries::constant(1.0, n));
        };
        let one = CoefficientSeries::constant(1.0, n);
        let g = guard((&one - &self.arrivals_per_service).div(&self.denominator())?)?;
        let g_at_one = r_mu_integral_at_one(&self.model);
        let mut exponent = g.integral().into_coeffs();
        exponent[0] -= g_at_one;
        let exponent = CoefficientSeries::new(exponent).scale(self.model.lambda() / mu);
        guard(exponent.exp())
    }

    /// Total number in the retrial system.
    pub fn l_mu(&self) -> Result<CoefficientSeries> {
        let l_inf = self.l_infinity()?;
        if self.model.mu() == RetrialRate::Infinite {
            return Ok(l_inf);
        }
        Ok(l_inf.mul(&self.r_mu()?))
    }
}

pub fn pmf_l_infinity(model: &QueueModel, order: usize) -> Result<CoefficientSeries> {
    ExactSeries::new(model, order).l_infinity()
}

pub fn pmf_r_mu(model: &QueueModel, order: usize) -> Result<CoefficientSeries> {
    ExactSeries::new(model, order).r_mu()
}

pub fn pmf_l_mu(model: &QueueModel, order: usize) -> Result<CoefficientSeries> {
    ExactSeries::new(model, order).l_mu()
}

/// Checks the pmf sanity bounds: coefficients `>= -ε` and partial sums in
/// `[0, 1 + ε]`.
pub fn check_pmf(series: &CoefficientSeries) -> Result<()> {
    if let Some(n) = series.iter().position(|&c| c < -PMF_SLACK) {
        return Err(Error::Domain(format!("pmf coefficient {n} is negative: {:e}", series[n])));
    }
    if let Some(n) = series.cumulative().iter().position(|&c| !(-PMF_SLACK..=1.0 + PMF_SLACK).contains(&c)) {
        return Err(Error::Domain(format!("partial sum at {n} leaves [0, 1]")));
    }
    Ok(())
}

/// Tail probabilities of a truncated pmf series.
///
/// `1 - Σ_{n≤j} c_n` already contains the mass beyond the truncation order,
/// so the only uncertainty is numerical. It is gauged by comparing the mass
/// the series implies beyond `N` with a power law fitted to the last
/// coefficients.
#[derive(Debug, Clone)]
pub struct SeriesTail {
    cumulative: Vec<f64>,
    beyond_truncation: f64,
    uncertainty: f64,
}

impl SeriesTail {
    pub fn new(series: &CoefficientSeries) -> Self {
        let cumulative = series.cumulative();
        let implied = 1.0 - cumulative.last().copied().unwrap_or(0.0);
        let beyond_truncation = fitted_power_tail_mass(series.coeffs()).unwrap_or(implied);
        SeriesTail { cumulative, beyond_truncation, uncertainty: (implied - beyond_truncation).abs() }
    }

    pub fn order(&self) -> usize {
        self.cumulative.len() - 1
    }

    /// Mass beyond the truncation order predicted by the power-law fit.
    pub fn beyond_truncation(&self) -> f64 {
        self.beyond_truncation
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    /// `P{X > j}` for `j < N`.
    pub fn tail(&self, j: usize) -> Result<TailEstimate> {
        if j >= self.order() {
            return Err(Error::IndexBeyondTruncation { index: j, order: self.order() });
        }
        let value = (1.0 - self.cumulative[j]).clamp(0.0, 1.0);
        Ok(TailEstimate::exact(value, self.uncertainty))
    }
}

/// Fits `c_n ≈ A n^{-α}` on the upper half of the coefficients and returns
/// `Σ_{n>N} A n^{-α}`, approximated by the integral from `N + 1/2`.
fn fitted_power_tail_mass(coeffs: &[f64]) -> Option<f64> {
    let n_max = coeffs.len() - 1;
    if n_max < 16 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (n_max / 2..=n_max)
        .filter(|&n| coeffs[n] > 0.0)
        .map(|n| ((n as f64).ln(), coeffs[n].ln()))
        .collect();
    if pts.len() < 8 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let alpha = -slope;
    if !(alpha > 1.0) {
        return None;
    }
    let ln_a = my - slope * mx;
    let start = n_max as f64 + 0.5;
    Some((ln_a + (1.0 - alpha) * start.ln()).exp() / (alpha - 1.0))
}

/// `P{X > j}` from a pmf series.
pub fn tail_from_pmf(series: &CoefficientSeries, j: usize) -> Result<TailEstimate> {
    SeriesTail::new(series).tail(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Provenance;

    #[test]
    fn guard_flags_blown_up_coefficients() {
        assert!(guard(CoefficientSeries::new(vec![0.5, 0.25])).is_ok());
        let err = guard(CoefficientSeries::new(vec![0.5, f64::NAN, 1.0])).unwrap_err();
        assert!(matches!(err, Error::DivergenceGuard { index: 1, .. }));
        assert!(matches!(guard(CoefficientSeries::new(vec![0.0, 0.0, 2e6])), Err(Error::DivergenceGuard { index: 2, .. })));
    }

    fn mm1(lambda: f64, mu: f64) -> QueueModel {
        QueueModel::new(lambda, RetrialRate::Finite(mu), ServiceModel::exponential(1.0).unwrap()).unwrap()
    }

    fn canonical() -> QueueModel {
        QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn stability_is_enforced() {
        let s = ServiceModel::burr(2.0, 3.0, 1.0).unwrap();
        assert!(matches!(QueueModel::new(1.0, RetrialRate::Finite(1.0), s), Err(Error::UnstableModel { .. })));
        assert!(QueueModel::new(0.5, RetrialRate::Finite(0.0), s).is_err());
    }

    #[test]
    fn model_constants() {
        let m = canonical();
        assert!((m.rho() - 0.5).abs() < 1e-14);
        assert!((m.psi() - 1.0).abs() < 1e-13);
        assert!((m.c_kappa().unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(m.without_retrials().psi(), 0.0);
    }

    #[test]
    fn lst_beta_examples() {
        let m = mm1(0.5, 0.5);
        assert!((lst_beta(&m, 1.0) - 0.5).abs() < 1e-13);
        assert_eq!(lst_beta(&canonical(), 0.0), 1.0);
    }

    #[test]
    fn lst_beta_equilibrium_identity() {
        let m = canonical();
        let s = 1.0;
        let b = lst_beta(&m, s);
        assert!(b > 0.0 && b < 1.0);
        let via_eq = 1.0 - m.service().beta1() * s * lst_equilibrium(&m, s);
        assert!((b - via_eq).abs() < 1e-14);
        // independent route: direct quadrature of e^{-st} f(t)
        let direct = integrate_breaks_to_infinity(|t| (-s * t).exp() * m.service().density(t), &[0.0], 1.0, LST_TOL).value;
        assert!((b - direct).abs() < 1e-12, "{b} vs {direct}");
    }

    #[test]
    fn lst_kappa_exponential_closed_form() {
        let m = mm1(0.5, 0.5);
        assert_eq!(lst_kappa(&m, 0.0), 1.0);
        for &s in &[0.1, 1.0, 7.0] {
            let want = 0.5 / (0.5 + s);
            assert!((lst_kappa(&m, s) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn lst_kappa_slope_at_zero() {
        let m = canonical();
        let s = 1e-6;
        let k1 = m.service().beta2() / (2.0 * m.service().beta1() * (1.0 - m.rho()));
        let slope = (1.0 - lst_kappa(&m, s)) / s;
        // κ has infinite second moment here, so the o(s) term is s·log s sized
        assert!((slope / k1 - 1.0).abs() < 1e-3, "{slope} vs {k1}");
    }

    #[test]
    fn lst_tau_exponential_closed_form() {
        // ψ = 2 and κ(u) = 0.5/(0.5+u), so τ(s) = 0.5/(0.5+s); at s = λ(1-z)
        // this is the NegBin(1, 0.5) generating function of R_μ.
        let m = mm1(0.5, 0.5);
        assert_eq!(lst_tau(&m, 0.0), 1.0);
        for &s in &[0.2f64, 1.0, 3.0] {
            let want = 0.5 / (0.5 + s);
            let got = lst_tau(&m, s);
            assert!((got - want).abs() < 1e-11, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn lst_tau_nonincreasing() {
        let m = canonical();
        let vals: Vec<f64> = (0..12).map(|i| lst_tau(&m, 0.25 * i as f64)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(lst_tau(&m.without_retrials(), 2.0), 1.0);
    }

    #[test]
    fn mixed_poisson_over_exponential_is_geometric() {
        let c = mixed_poisson_coeffs(1.0, &ServiceModel::exponential(1.0).unwrap(), 40);
        for n in 0..=40 {
            assert!((c[n] / 0.5f64.powi(n as i32 + 1) - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn mixed_poisson_tail_matches_partial_sums() {
        let s = ServiceModel::burr(2.0, 3.0, 1.0).unwrap();
        let c = mixed_poisson_coeffs(0.5, &s, 64);
        let cum = c.cumulative();
        for &j in &[0usize, 3, 10, 40] {
            let t = mixed_poisson_tail(0.5, &s, j);
            assert!((t - (1.0 - cum[j])).abs() < 1e-10, "j={j}: {t} vs {}", 1.0 - cum[j]);
        }
    }

    #[test]
    fn series_tail_examples() {
        let geo = CoefficientSeries::new((0..40).map(|n: i32| 0.5f64.powi(n + 1)).collect());
        let t = tail_from_pmf(&geo, 3).unwrap();
        assert!((t.value - 0.0625).abs() < 1e-15);
        assert_eq!(t.provenance, Provenance::ExactSeries);
        assert!(tail_from_pmf(&geo, 38).unwrap().value >= 0.0);
        assert!(matches!(tail_from_pmf(&geo, 39), Err(Error::IndexBeyondTruncation { .. })));
    }

    #[test]
    fn l_infinity_empty_probability() {
        let m = canonical();
        let l = pmf_l_infinity(&m, 64).unwrap();
        assert!((l[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn r_mu_head_equals_tau_at_lambda() {
        let m = canonical();
        let r = pmf_r_mu(&m, 64).unwrap();
        let tau = lst_tau(&m, m.lambda());
        assert!((r[0] - tau).abs() < 1e-10, "{} vs {tau}", r[0]);
        assert!(r[0] > 0.0);
    }

    #[test]
    fn infinite_retrial_rate_reduces_to_standard_queue() {
        let m = canonical().without_retrials();
        let series = ExactSeries::new(&m, 64);
        assert_eq!(series.l_mu().unwrap(), series.l_infinity().unwrap());
        assert_eq!(series.r_mu().unwrap()[0], 1.0);
    }

    #[test]
    fn fitted_tail_tracks_power_law() {
        let c: Vec<f64> = (0..=4096).map(|n| if n == 0 { 0.0 } else { 2.0 * (n as f64).powi(-3) }).collect();
        let fit = fitted_power_tail_mass(&c).unwrap();
        let exact: f64 = (4097..2_000_000).map(|n| 2.0 * (n as f64).powi(-3)).sum();
        assert!((fit / exact - 1.0).abs() < 1e-3);
    }
}
