//! The acceptance suite: nine numerical checks, each with a runtime
//! budget. Oracles here are written independently of the engines they
//! check (closed forms, naive convolutions, direct quadrature).

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::asymptotics::{
    corrected_lmu_expansion, gamma_ratio, mixed_poisson_power_tail, tail_tkappa_2nd, tail_ttau_asym,
    theorem1_expansion, Mode,
};
use crate::dist::ServiceModel;
use crate::error::Result;
use crate::quadrature::{integrate_breaks_to_infinity, Tolerance};
use crate::series::CoefficientSeries;
use crate::simulator::{run_retrial_simulation, t_kappa_exceedance, SimConfig};
use crate::transforms::{ExactSeries, QueueModel, RetrialRate, SeriesTail};

pub const CRITERIA: [u8; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{verdict}] criterion {} {}: {} ({:.2}s of {}s budget)",
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn canonical() -> QueueModel {
    QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0).expect("valid family"))
        .expect("stable model")
}

/// `Γ(n+r)/(n! Γ(r)) p^r (1-p)^n`.
fn negative_binomial(r: f64, p: f64, n: usize) -> f64 {
    let nf = n as f64;
    (ln_gamma(nf + r) - ln_gamma(nf + 1.0) - ln_gamma(r) + r * p.ln() + nf * (1.0 - p).ln()).exp()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Pairwise product over all `i + j <= N`.
fn naive_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// `1/b = b0^{-1} Σ_k (-(b - b0)/b0)^k`, exact to order `N`.
fn naive_inverse(b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let g: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -b[i] / b[0] }).collect();
    let mut power = vec![0.0; n];
    power[0] = 1.0;
    let mut sum = power.clone();
    for _ in 1..n {
        power = naive_product(&power, &g);
        sum.iter_mut().zip(&power).for_each(|(s, p)| *s += p);
    }
    sum.iter().map(|s| s / b[0]).collect()
}

/// `e^{f0} Σ_k g^k/k!` with `g = f - f0`, exact to order `N`.
fn naive_exp(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let g: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { f[i] }).collect();
    let mut term = vec![0.0; n];
    term[0] = 1.0;
    let mut sum = term.clone();
    for k in 1..n {
        term = naive_product(&term, &g).iter().map(|t| t / k as f64).collect();
        sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
    }
    sum.iter().map(|s| s * f[0].exp()).collect()
}

/// `|x - y|_∞ / max(1, |y|_∞)`.
fn scaled_distance(x: &[f64], y: &[f64]) -> f64 {
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    sup_distance(x, y) / scale
}

fn timed(id: u8, name: &'static str, budget_secs: u64, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let passed = passed && elapsed <= budget;
    CriterionResult { id, name, passed, detail, elapsed, budget }
}

/// Exponential service: `R_μ ~ NegBin(λ/μ, 1-ρ)` and `L_∞ ~ geometric`.
pub fn criterion_1() -> CriterionResult {
    timed(1, "closed-form M/M/1 retrial oracle", 5, || {
        let mut worst: f64 = 0.0;
        for mu in [0.25, 0.5] {
            let m = QueueModel::new(0.5, RetrialRate::Finite(mu), ServiceModel::exponential(1.0)?)?;
            let s = ExactSeries::new(&m, 50);
            let r = s.r_mu()?;
            let l = s.l_infinity()?;
            let rho = m.rho();
            let nb: Vec<f64> = (0..=50).map(|n| negative_binomial(0.5 / mu, 1.0 - rho, n)).collect();
            let geo: Vec<f64> = (0..=50).map(|n| (1.0 - rho) * rho.powi(n)).collect();
            worst = worst.max(sup_distance(r.coeffs(), &nb)).max(sup_distance(l.coeffs(), &geo));
        }
        Ok((worst <= 1e-10, format!("sup-norm {worst:.2e} (limit 1e-10)")))
    })
}

/// `L_μ = L_∞ + R_μ` in distribution.
pub fn criterion_2() -> CriterionResult {
    timed(2, "decomposition identity", 30, || {
        let s = ExactSeries::new(&canonical(), 1024);
        let conv = naive_product(s.l_infinity()?.coeffs(), s.r_mu()?.coeffs());
        let d = sup_distance(&conv, s.l_mu()?.coeffs());
        Ok((d <= 1e-12, format!("sup-norm {d:.2e} (limit 1e-12)")))
    })
}

pub fn criterion_3() -> CriterionResult {
    timed(3, "gamma-ratio expansion", 1, || {
        let mut ok = true;
        let mut shrink = Vec::new();
        let mut worst_envelope: f64 = 0.0;
        for d in [0.5, 1.0, 2.5] {
            let rel = |x: f64| -> Result<f64> {
                let ex = gamma_ratio(x, d, Mode::Exact)?;
                Ok((gamma_ratio(x, d, Mode::Asym2)? - ex).abs() / ex)
            };
            let errs = [rel(50.0)?, rel(100.0)?, rel(200.0)?];
            for (e, x) in errs.iter().zip([50.0, 100.0, 200.0]) {
                let envelope = 2.0 * (d + 1.0) * (d + 2.0) / (x * x);
                worst_envelope = worst_envelope.max(e / envelope);
                ok &= *e <= envelope;
            }
            for w in errs.windows(2) {
                let f = w[0] / w[1];
                ok &= (3.0..=5.0).contains(&f);
                shrink.push(f);
            }
        }
        let (lo, hi) = shrink.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &f| (l.min(f), h.max(f)));
        Ok((ok, format!("error/envelope <= {worst_envelope:.3}, doubling shrink in [{lo:.3}, {hi:.3}]")))
    })
}

/// `∫ λe^{-λt}(λt)^{j+1}/(j+1)! · g(t) dt` by direct quadrature.
pub fn poisson_kernel_integral(lambda: f64, j: u64, g: impl Fn(f64) -> f64) -> f64 {
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
    let mut points = vec![0.0];
    for m in [-10.0, -4.0, 0.0, 4.0, 10.0] {
        let p = mode + m * sd;
        if p > 0.0 {
            points.push(p);
        }
    }
    points.dedup();
    integrate_breaks_to_infinity(f, &points, sd, Tolerance::relative(1e-12)).value
}

pub fn criterion_4() -> CriterionResult {
    timed(4, "mixed-Poisson power identity", 10, || {
        let mut worst: f64 = 0.0;
        for lambda in [0.5, 1.0, 2.0] {
            for d in [0.5, 1.5, 2.5] {
                for j in [5u64, 20, 80] {
                    let exact = mixed_poisson_power_tail(lambda, d, j, Mode::Exact)?;
                    let quad = poisson_kernel_integral(lambda, j, |t| t.powf(-d));
                    worst = worst.max((quad - exact).abs() / exact);
                }
            }
        }
        Ok((worst <= 1e-8, format!("max relative gap {worst:.2e} over 27 points (limit 1e-8)")))
    })
}

pub fn criterion_5() -> CriterionResult {
    timed(5, "second-order refinement on the canonical model", 600, || {
        let m = canonical();
        let l = ExactSeries::new(&m, 4096).l_mu()?;
        let tail = SeriesTail::new(&l);
        let e = theorem1_expansion(&m)?;
        let corrected = corrected_lmu_expansion(&m)?;
        let target = e.c2.abs() / e.c1;
        let mut refined = true;
        let mut scaled_ok = true;
        let mut rows = Vec::new();
        for j in [500u64, 1000, 2000] {
            let exact = tail.tail(j as usize)?.value;
            let x = j as f64;
            let e1 = (exact - e.eval(x, 1)).abs() / exact;
            let e2 = (exact - e.eval(x, 2)).abs() / exact;
            let ec = (exact - corrected.eval(x, 2)).abs() / exact;
            refined &= e2 < e1;
            scaled_ok &= (e1 * x - target).abs() <= 0.3 * target;
            rows.push(format!("j={j} e1={e1:.3e} e2={e2:.3e} e1*j={:.3} corrected-e2={ec:.2e}", e1 * x));
        }
        Ok((
            refined && scaled_ok,
            format!(
                "e2<e1 everywhere: {refined}; e1*j within 30% of |c2|/c1={target:.4}: {scaled_ok}; {}",
                rows.join("; ")
            ),
        ))
    })
}

pub fn criterion_6() -> CriterionResult {
    timed(6, "simulator against the series engine", 300, || {
        let m = canonical();
        let cfg = SimConfig::new(1e7, 20_240_601).with_warmup(1e6).with_max_state(30);
        let run = run_retrial_simulation(&m, &cfg)?;
        let idle = run.idle_probability();
        let sim = run.queue_length();
        let series = ExactSeries::new(&m, 256).l_mu()?;
        let tv = 0.5 * sim.pmf.iter().zip(series.coeffs()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let idle_ok = idle.contains(1.0 - m.rho());
        Ok((
            idle_ok && tv < 0.01,
            format!("P{{idle}} = {:.5} ± {:.5} (target 0.5); TV over 0..30 = {tv:.2e} (limit 0.01)", idle.value, idle.half_width),
        ))
    })
}

pub fn criterion_7() -> CriterionResult {
    timed(7, "conditional orbit tail trend", 600, || {
        let m = canonical();
        let r = ExactSeries::new(&m, 1024).r_mu()?;
        let tail = SeriesTail::new(&r);
        let mut ratios = Vec::new();
        for j in [50usize, 100, 200, 400] {
            let asym = tail_ttau_asym(&m, j as f64 / m.lambda())?.value;
            ratios.push(tail.tail(j)?.value / asym);
        }
        let last = ratios[3];
        let toward_one = ratios.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
        Ok((
            (0.7..=1.3).contains(&last) && toward_one,
            format!("ratios at j=50,100,200,400: {} (monotone toward 1: {toward_one})", shown.join(", ")),
        ))
    })
}

pub fn criterion_8() -> CriterionResult {
    timed(8, "geometric-sum tail by Monte Carlo", 120, || {
        let m = canonical();
        let n = 10_000_000;
        let mc = t_kappa_exceedance(&m, 50.0, n, 20_240_602);
        let se = (mc.value * (1.0 - mc.value) / n as f64).sqrt();
        let asym = tail_tkappa_2nd(&m, 50.0)?.value;
        let z = (mc.value - asym) / se;
        Ok((z.abs() <= 3.0, format!("MC {:.6} (SE {se:.1e}) vs two-term {asym:.6}: {z:+.1} SE (limit 3)", mc.value)))
    })
}

pub fn criterion_9() -> CriterionResult {
    timed(9, "series arithmetic against naive references", 1, || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let mut draw = || -> Vec<f64> { (0..=32).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let a = draw();
            let mut b = draw();
            b[0] = 2.0 + b[0].abs();
            let sa = CoefficientSeries::new(a.clone());
            let sb = CoefficientSeries::new(b.clone());
            worst = worst.max(scaled_distance(sa.mul(&sb).coeffs(), &naive_product(&a, &b)));
            let q = sa.div(&sb)?;
            worst = worst.max(scaled_distance(q.coeffs(), &naive_product(&a, &naive_inverse(&b))));
            worst = worst.max(scaled_distance(sa.exp().coeffs(), &naive_exp(&a)));
        }
        Ok((worst <= 1e-13, format!("max scaled gap {worst:.2e} over 100 trials, N=32 (limit 1e-13)")))
    })
}

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        _ => return None,
    })
}

/// Runs every criterion in order, calling `report` as each finishes.
pub fn run_all(mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter_map(|&id| run_criterion(id))
        .inspect(|r| report(r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_references_on_small_cases() {
        assert_eq!(naive_product(&[1.0, 1.0, 0.0], &[1.0, -1.0, 0.0]), vec![1.0, 0.0, -1.0]);
        let inv = naive_inverse(&[2.0, -1.0, 0.0, 0.0]);
        assert_eq!(inv, vec![0.5, 0.25, 0.125, 0.0625]);
        let e = naive_exp(&[0.0, 1.0, 0.0, 0.0]);
        assert!(sup_distance(&e, &[1.0, 1.0, 0.5, 1.0 / 6.0]) < 1e-16);
    }

    #[test]
    fn negative_binomial_with_unit_shape_is_geometric() {
        for n in 0..10 {
            assert!((negative_binomial(1.0, 0.5, n) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn report_lines_name_the_criterion() {
        let r = criterion_9();
        let line = r.to_string();
        assert!(line.starts_with("[PASS] criterion 9") || line.starts_with("[FAIL] criterion 9"));
        assert!(run_criterion(10).is_none());
    }
}
