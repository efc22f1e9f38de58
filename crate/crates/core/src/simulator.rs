//! Discrete-event simulation of the retrial queue and direct samplers for
//! the random times in the stationary decomposition.
//!
//! Estimates are time averages over the post-warm-up part of the run, with
//! 95% batch-means half-widths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dist::Family;
use crate::error::{Error, Result};
use crate::series::neumaier_sum;
use crate::transforms::{ExactSeries, QueueModel};

/// Minimum idle-time fraction for the conditional orbit law.
pub const MIN_IDLE_FRACTION: f64 = 0.01;

/// Minimum number of order statistics for the Hill estimator.
pub const MIN_HILL_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Total simulated time, warm-up included.
    pub horizon: f64,
    pub warmup: f64,
    pub batches: usize,
    pub seed: u64,
    /// Largest orbit size tracked individually; larger ones share an
    /// overflow bucket.
    pub max_state: usize,
    /// Number of post-warm-up arrival-epoch snapshots of the queue length
    /// to keep (arrivals see time averages).
    pub snapshots: usize,
}

impl SimConfig {
    pub fn new(horizon: f64, seed: u64) -> Self {
        SimConfig { horizon, warmup: 0.1 * horizon, batches: 32, seed, max_state: 200, snapshots: 0 }
    }

    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn with_max_state(mut self, max_state: usize) -> Self {
        self.max_state = max_state;
        self
    }

    pub fn with_snapshots(mut self, snapshots: usize) -> Self {
        self.snapshots = snapshots;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= warmup < horizon, got warmup={} horizon={}",
                self.warmup, self.horizon
            )));
        }
        if self.batches < 2 {
            return Err(Error::InvalidParameter("need at least 2 batches".into()));
        }
        Ok(())
    }
}

/// Time spent in each (server, orbit) state during one batch. Index
/// `max_state + 1` collects larger orbits.
#[derive(Debug, Clone, PartialEq)]
struct BatchTimes {
    idle: Vec<f64>,
    busy: Vec<f64>,
}

impl BatchTimes {
    fn new(max_state: usize) -> Self {
        BatchTimes { idle: vec![0.0; max_state + 2], busy: vec![0.0; max_state + 2] }
    }

    fn total(&self) -> f64 {
        neumaier_sum(self.idle.iter().chain(&self.busy).copied())
    }
}

/// Time-average pmf over states `0..=max_state` with batch-means
/// half-widths; `beyond` is the mass above `max_state`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryEstimate {
    pub pmf: Vec<f64>,
    pub half_width: Vec<f64>,
    pub beyond: f64,
    pub total_time: f64,
    pub warmup: f64,
}

impl StationaryEstimate {
    /// Batch means over per-batch pmfs (each of length `max_state + 2`,
    /// overflow last).
    fn from_batches(batch_pmfs: &[Vec<f64>], total_time: f64, warmup: f64) -> Self {
        let b = batch_pmfs.len();
        let len = batch_pmfs[0].len();
        let q = t_quantile(b);
        let mut mean = vec![0.0; len];
        let mut hw = vec![0.0; len];
        for n in 0..len {
            let xs: Vec<f64> = batch_pmfs.iter().map(|p| p[n]).collect();
            let m = neumaier_sum(xs.iter().copied()) / b as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
            mean[n] = m;
            hw[n] = q * (var / b as f64).sqrt();
        }
        let total = neumaier_sum(mean.iter().copied());
        if total > 0.0 {
            mean.iter_mut().for_each(|x| *x /= total);
        }
        let beyond = mean.pop().unwrap_or(0.0);
        hw.pop();
        StationaryEstimate { pmf: mean, half_width: hw, beyond, total_time, warmup }
    }

    pub fn max_state(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `P{X > j}` for `j <= max_state`.
    pub fn tail(&self, j: usize) -> f64 {
        neumaier_sum(self.pmf[j + 1..].iter().copied()) + self.beyond
    }

    pub fn mean_lower_bound(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Writes `state,pmf,half_width` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state,pmf,half_width")?;
        for (n, (p, h)) in self.pmf.iter().zip(&self.half_width).enumerate() {
            writeln!(out, "{n},{p:.16e},{h:.16e}")?;
        }
        Ok(())
    }
}

/// Two-sided 95% Student-t quantile for `batches - 1` degrees of freedom.
fn t_quantile(batches: usize) -> f64 {
    StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .map(|t| t.inverse_cdf(0.975))
        .unwrap_or(1.96)
}

/// A point estimate with a 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub value: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.half_width
    }
}

/// Reproducibility record of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub model: String,
    pub family: Family,
    pub lambda: f64,
    pub mu: String,
    pub config: SimConfig,
    pub events: u64,
}

/// Raw output of one or more pooled simulation runs.
#[derive(Debug, Clone)]
pub struct SimRun {
    model: QueueModel,
    config: SimConfig,
    batches: Vec<BatchTimes>,
    snapshots: Vec<u64>,
    events: u64,
}

/// Three independent streams from one seed.
fn streams(seed: u64) -> [ChaCha8Rng; 3] {
    [0, 1, 2].map(|s| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(s);
        r
    })
}

fn exp<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

struct Recorder {
    warmup: f64,
    batch_len: f64,
    max_state: usize,
    batches: Vec<BatchTimes>,
}

impl Recorder {
    /// Credits `[t0, t1)` spent in state (`busy`, `orbit`) to the batches it
    /// overlaps.
    fn credit(&mut self, mut t0: f64, t1: f64, busy: bool, orbit: u64) {
        let idx = (orbit as usize).min(self.max_state + 1);
        t0 = t0.max(self.warmup);
        let nb = self.batches.len();
        while t0 < t1 {
            let b = (((t0 - self.warmup) / self.batch_len) as usize).min(nb - 1);
            let end = if b + 1 == nb { t1 } else { (self.warmup + (b + 1) as f64 * self.batch_len).min(t1) };
            let slot = if busy { &mut self.batches[b].busy } else { &mut self.batches[b].idle };
            slot[idx] += end - t0;
            if end <= t0 {
                break;
            }
            t0 = end;
        }
    }
}

/// Event-driven run over `[0, horizon]` starting empty.
///
/// With the server idle and `n` customers in orbit the next event is the
/// earlier of an arrival and an aggregated `Exp(nμ)` retrial; with the
/// server busy, arrivals join the orbit. Simultaneous events (a null set)
/// are resolved arrival first.
pub fn run_retrial_simulation(model: &QueueModel, config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let mu = model.mu().finite().ok_or(Error::InfiniteRetrialRate)?;
    let lambda = model.lambda();
    let service = *model.service();
    let [mut arrivals, mut services, mut retrials] = streams(config.seed);

    let mut rec = Recorder {
        warmup: config.warmup,
        batch_len: (config.horizon - config.warmup) / config.batches as f64,
        max_state: config.max_state,
        batches: vec![BatchTimes::new(config.max_state); config.batches],
    };
    let mut snapshots = Vec::with_capacity(config.snapshots);
    let mut events = 0u64;

    let mut clock = 0.0;
    let mut busy = false;
    let mut orbit = 0u64;
    let mut completion = f64::INFINITY;
    let mut next_arrival = exp(&mut arrivals, lambda);
    let mut next_retrial = f64::INFINITY;

    loop {
        let next = if busy { next_arrival.min(completion) } else { next_arrival.min(next_retrial) };
        let stop = next.min(config.horizon);
        rec.credit(clock, stop, busy, orbit);
        if next >= config.horizon {
            break;
        }
        clock = next;
        events += 1;
        if next_arrival <= clock {
            if clock >= config.warmup && snapshots.len() < config.snapshots {
                snapshots.push(orbit + busy as u64);
            }
            next_arrival = clock + exp(&mut arrivals, lambda);
            if busy {
                orbit += 1;
            } else {
                busy = true;
                completion = clock + service.sample(&mut services);
            }
        } else if busy {
            busy = false;
            completion = f64::INFINITY;
            next_retrial = if orbit > 0 { clock + exp(&mut retrials, orbit as f64 * mu) } else { f64::INFINITY };
        } else {
            orbit -= 1;
            busy = true;
            next_retrial = f64::INFINITY;
            completion = clock + service.sample(&mut services);
        }
    }

    Ok(SimRun { model: *model, config: *config, batches: rec.batches, snapshots, events })
}

/// Independent replications with seeds `seed, seed+1, ...`, run in
/// parallel and pooled batch by batch.
pub fn run_replications(model: &QueueModel, config: &SimConfig, replications: usize) -> Result<SimRun> {
    let runs: Vec<SimRun> = (0..replications.max(1) as u64)
        .into_par_iter()
        .map(|r| run_retrial_simulation(model, &SimConfig { seed: config.seed.wrapping_add(r), ..*config }))
        .collect::<Result<_>>()?;
    let mut it = runs.into_iter();
    let mut pooled = it.next().expect("at least one replication");
    for r in it {
        pooled.batches.extend(r.batches);
        pooled.snapshots.extend(r.snapshots);
        pooled.events += r.events;
    }
    Ok(pooled)
}

impl SimRun {
    pub fn model(&self) -> &QueueModel {
        &self.model
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Queue lengths seen by post-warm-up arrivals.
    pub fn snapshots(&self) -> &[u64] {
        &self.snapshots
    }

    fn observed_time(&self) -> f64 {
        self.batches.iter().map(BatchTimes::total).sum()
    }

    fn estimate(&self, per_batch: impl Fn(&BatchTimes) -> Vec<f64>) -> StationaryEstimate {
        let pmfs: Vec<Vec<f64>> = self.batches.iter().map(per_batch).collect();
        let warmup = self.config.warmup * (self.batches.len() / self.config.batches) as f64;
        StationaryEstimate::from_batches(&pmfs, self.observed_time() + warmup, warmup)
    }

    /// Law of `L_μ = N_orb + C_sev`.
    pub fn queue_length(&self) -> StationaryEstimate {
        self.estimate(|b| {
            let m = b.idle.len();
            let mut p = b.idle.clone();
            for n in 0..m {
                p[(n + 1).min(m - 1)] += b.busy[n];
            }
            let total = b.total();
            p.iter_mut().for_each(|x| *x /= total);
            p
        })
    }

    /// Unconditional law of `N_orb`.
    pub fn orbit(&self) -> StationaryEstimate {
        self.estimate(|b| {
            let total = b.total();
            b.idle.iter().zip(&b.busy).map(|(i, s)| (i + s) / total).collect()
        })
    }

    /// Law of `N_orb` given the server is in the stated condition.
    fn conditional(&self, busy: bool) -> StationaryEstimate {
        self.estimate(|b| {
            let v = if busy { &b.busy } else { &b.idle };
            let total = neumaier_sum(v.iter().copied());
            v.iter().map(|x| if total > 0.0 { x / total } else { 0.0 }).collect()
        })
    }

    /// `P{C_sev = 0}`.
    pub fn idle_probability(&self) -> Interval {
        let xs: Vec<f64> = self.batches.iter().map(|b| neumaier_sum(b.idle.iter().copied()) / b.total()).collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        Interval { value: m, half_width: t_quantile(xs.len()) * (var / n).sqrt() }
    }

    /// Law of `R_μ`, the orbit size during idle periods.
    pub fn conditional_r_mu_estimate(&self) -> Result<StationaryEstimate> {
        let fraction = self.idle_probability().value;
        if !(fraction >= MIN_IDLE_FRACTION) {
            return Err(Error::InsufficientIdleTime { fraction });
        }
        Ok(self.conditional(false))
    }

    /// Law of the orbit size while the server is busy.
    pub fn conditional_busy_orbit(&self) -> StationaryEstimate {
        self.conditional(true)
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            model: self.model.to_string(),
            family: *self.model.service().family(),
            lambda: self.model.lambda(),
            mu: self.model.mu().to_string(),
            config: self.config,
            events: self.events,
        }
    }
}

/// One draw of the geometric sum `T_κ`: `K` equilibrium service times with
/// `P{K = k} = (1-ρ)ρ^{k-1}`, `k >= 1`.
pub fn sample_t_kappa<R: Rng + ?Sized>(model: &QueueModel, rng: &mut R) -> f64 {
    let rho = model.rho();
    let service = model.service();
    let mut total = service.equilibrium_sample(rng);
    while rng.random::<f64>() < rho {
        total += service.equilibrium_sample(rng);
    }
    total
}

/// `T_θ`: zero with probability `1 - ρ`, otherwise a `T_κ` draw.
pub fn sample_t_theta<R: Rng + ?Sized>(model: &QueueModel, rng: &mut R) -> f64 {
    if rng.random::<f64>() < model.rho() {
        sample_t_kappa(model, rng)
    } else {
        0.0
    }
}

/// Poisson count with mean `mean`, which may be zero.
fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(p) => {
            let x: f64 = p.sample(rng);
            x as u64
        }
        // means beyond the sampler's range sit far in a tail that no
        // estimator here resolves
        Err(_) => mean.round() as u64,
    }
}

/// Draws of `L_∞` as the Poisson count over an independent
/// `T_θ + T_β`. Draws are split over parallel chunks with their own
/// streams, so the output depends only on `seed` and `n_samples`.
pub fn sample_l_infinity_fll(model: &QueueModel, n_samples: usize, seed: u64) -> Vec<u64> {
    const CHUNK: usize = 1 << 16;
    let lambda = model.lambda();
    let service = *model.service();
    let chunks = n_samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n_samples - c * CHUNK);
            (0..len)
                .map(|_| {
                    let t = sample_t_theta(model, &mut rng) + service.sample(&mut rng);
                    poisson_count(&mut rng, lambda * t)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Independent draws of `L_μ = L_∞ + R_μ`: `L_∞` from the FLL sampler and
/// `R_μ` by inverse transform on its exact pmf up to `order`.
///
/// Queue lengths read off a single simulated path are strongly dependent,
/// which makes tail-index estimates from them erratic; these draws are not.
pub fn sample_l_mu_decomposition(model: &QueueModel, n_samples: usize, seed: u64, order: usize) -> Result<Vec<u64>> {
    let cdf = ExactSeries::new(model, order).r_mu()?.cumulative();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let l_inf = sample_l_infinity_fll(model, n_samples, seed);
    Ok(l_inf
        .into_iter()
        .map(|x| {
            let u: f64 = rng.random();
            x + cdf.partition_point(|&c| c < u) as u64
        })
        .collect())
}

/// `P{T_κ > t}` from `n` parallel draws.
pub fn t_kappa_exceedance(model: &QueueModel, t: f64, n: usize, seed: u64) -> Interval {
    const CHUNK: usize = 1 << 18;
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).filter(|_| sample_t_kappa(model, &mut rng) > t).count() as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    Interval { value: p, half_width: 1.96 * (p * (1.0 - p) / n as f64).sqrt() }
}

/// Empirical pmf over `0..=max_state` with normal-approximation 95%
/// half-widths.
pub fn empirical_pmf(samples: &[u64], max_state: usize) -> StationaryEstimate {
    let n = samples.len() as f64;
    let mut counts = vec![0u64; max_state + 2];
    for &s in samples {
        counts[(s as usize).min(max_state + 1)] += 1;
    }
    let mut pmf: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let beyond = pmf.pop().unwrap_or(0.0);
    let half_width = pmf.iter().map(|p| 1.96 * (p * (1.0 - p) / n).sqrt()).collect();
    StationaryEstimate { pmf, half_width, beyond, total_time: n, warmup: 0.0 }
}

/// Hill estimate of the tail index from the top `k` order statistics.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Result<f64> {
    if k < MIN_HILL_K || samples.len() <= k {
        return Err(Error::TooFewSamples(format!("need {MIN_HILL_K} <= k < n, got k={k}, n={}", samples.len())));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    let pivot = sorted.len() - k - 1;
    sorted.select_nth_unstable_by(pivot, |a, b| a.total_cmp(b));
    let threshold = sorted[pivot];
    if !(threshold > 0.0) {
        return Err(Error::TooFewSamples("order-statistic threshold is not positive".into()));
    }
    let h = sorted[pivot + 1..].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if !(h > 0.0) {
        return Err(Error::TooFewSamples("top order statistics are all tied".into()));
    }
    Ok(1.0 / h)
}

/// Hill-type index from a pmf tail: `P{X > u} / Σ_{n>u} p_n ln(n/u)` with
/// `u` the smallest state whose exceedance is at most `tail_mass`.
pub fn hill_tail_index_pmf(pmf: &[f64], tail_mass: f64) -> Result<f64> {
    let mut exceed = neumaier_sum(pmf.iter().copied());
    let mut u = None;
    for (n, p) in pmf.iter().enumerate() {
        exceed -= p;
        if n > 0 && exceed <= tail_mass {
            u = Some(n);
            break;
        }
    }
    let u = u.ok_or_else(|| Error::TooFewSamples("pmf never reaches the requested tail mass".into()))?;
    let beyond: Vec<(usize, f64)> = pmf.iter().copied().enumerate().skip(u + 1).filter(|&(_, p)| p > 0.0).collect();
    if beyond.len() < MIN_HILL_K {
        return Err(Error::TooFewSamples(format!("only {} states above the threshold", beyond.len())));
    }
    let mass: f64 = beyond.iter().map(|&(_, p)| p).sum();
    let h: f64 = beyond.iter().map(|&(n, p)| p * (n as f64 / u as f64).ln()).sum();
    Ok(mass / h)
}

/// Mean number in system over `[warmup, t]` for growing `t`; a stable
/// model gives a settling sequence.
pub fn running_mean_queue_length(model: &QueueModel, horizons: &[f64], seed: u64) -> Result<Vec<f64>> {
    horizons
        .iter()
        .map(|&h| {
            let run = run_retrial_simulation(model, &SimConfig::new(h, seed).with_max_state(2000))?;
            let est = run.queue_length();
            Ok(est.mean_lower_bound())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ServiceModel;
    use crate::transforms::RetrialRate;

    fn mm1(mu: f64) -> QueueModel {
        QueueModel::new(0.5, RetrialRate::Finite(mu), ServiceModel::exponential(1.0).unwrap()).unwrap()
    }

    fn burr() -> QueueModel {
        QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0).unwrap()).unwrap()
    }

    /// `NegBin(r, p)` pmf `Γ(n+r)/(n! Γ(r)) p^r (1-p)^n` with success
    /// probability `p`.
    fn negbin(r: f64, p: f64, n: usize) -> f64 {
        use statrs::function::gamma::ln_gamma;
        (ln_gamma(n as f64 + r) - ln_gamma(n as f64 + 1.0) - ln_gamma(r) + r * p.ln() + n as f64 * (1.0 - p).ln()).exp()
    }

    /// Within the CI widened by a small absolute slack for states whose
    /// batch variance happens to be tiny.
    fn within(est: &StationaryEstimate, n: usize, want: f64, widen: f64) -> bool {
        (est.pmf[n] - want).abs() <= widen * est.half_width[n] + 1e-4
    }

    #[test]
    fn idle_probability_is_one_minus_rho() {
        let run = run_retrial_simulation(&mm1(0.5), &SimConfig::new(2e5, 1)).unwrap();
        let p = run.idle_probability();
        assert!((p.value - 0.5).abs() <= 1.5 * p.half_width, "{p:?}");
    }

    #[test]
    fn exponential_queue_length_is_negative_binomial() {
        // L_μ for M/M/1 retrial with λ = 0.5, ν = 1, μ = 0.5 is NegBin(2, 0.5)
        let run = run_retrial_simulation(&mm1(0.5), &SimConfig::new(4e5, 2)).unwrap();
        let est = run.queue_length();
        for n in 0..10 {
            assert!(within(&est, n, negbin(2.0, 0.5, n), 1.5), "n={n}: {} vs {}", est.pmf[n], negbin(2.0, 0.5, n));
        }
    }

    #[test]
    fn fast_retrials_approach_mm1() {
        let run = run_retrial_simulation(&mm1(1e3), &SimConfig::new(2e5, 3)).unwrap();
        let est = run.queue_length();
        for n in 0..8 {
            let want = 0.5f64.powi(n as i32 + 1);
            assert!((est.pmf[n] - want).abs() < 0.01, "n={n}");
        }
    }

    #[test]
    fn idle_orbit_law_is_geometric() {
        let run = run_retrial_simulation(&mm1(0.5), &SimConfig::new(4e5, 4)).unwrap();
        let est = run.conditional_r_mu_estimate().unwrap();
        for n in 0..8 {
            assert!(within(&est, n, 0.5f64.powi(n as i32 + 1), 1.5), "n={n}");
        }
    }

    #[test]
    fn total_probability_over_server_states() {
        let run = run_retrial_simulation(&burr(), &SimConfig::new(1e5, 5)).unwrap();
        let p0 = run.idle_probability().value;
        let idle = run.conditional_r_mu_estimate().unwrap();
        let busy = run.conditional_busy_orbit();
        let all = run.orbit();
        for n in 0..20 {
            let mix = p0 * idle.pmf[n] + (1.0 - p0) * busy.pmf[n];
            assert!((mix - all.pmf[n]).abs() <= all.half_width[n] + 1e-3, "n={n}");
        }
    }

    #[test]
    fn pmf_is_normalised() {
        let run = run_retrial_simulation(&burr(), &SimConfig::new(5e4, 6).with_max_state(15)).unwrap();
        for est in [run.queue_length(), run.orbit(), run.conditional_busy_orbit()] {
            let s = neumaier_sum(est.pmf.iter().copied()) + est.beyond;
            assert!((s - 1.0).abs() < 1e-12);
            assert!(est.half_width.iter().all(|&h| h >= 0.0));
        }
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let c = SimConfig::new(2e4, 9).with_snapshots(100);
        let a = run_retrial_simulation(&burr(), &c).unwrap();
        let b = run_retrial_simulation(&burr(), &c).unwrap();
        assert_eq!(a.queue_length(), b.queue_length());
        assert_eq!(a.snapshots(), b.snapshots());
        let other = run_retrial_simulation(&burr(), &SimConfig { seed: 10, ..c }).unwrap();
        assert_ne!(a.queue_length(), other.queue_length());
    }

    #[test]
    fn replications_pool_batches() {
        let c = SimConfig::new(2e4, 11).with_batches(8);
        let pooled = run_replications(&burr(), &c, 3).unwrap();
        assert_eq!(pooled.batches.len(), 24);
        let single = run_retrial_simulation(&burr(), &SimConfig { seed: 12, ..c }).unwrap();
        assert!(pooled.events() > 2 * single.events());
    }

    #[test]
    fn configuration_errors() {
        let inf = burr().without_retrials();
        assert!(matches!(run_retrial_simulation(&inf, &SimConfig::new(10.0, 1)), Err(Error::InfiniteRetrialRate)));
        assert!(run_retrial_simulation(&burr(), &SimConfig::new(10.0, 1).with_warmup(10.0)).is_err());
        assert!(run_retrial_simulation(&burr(), &SimConfig::new(10.0, 1).with_batches(1)).is_err());
    }

    #[test]
    fn mean_queue_length_settles() {
        // E L_μ for M/M/1 retrial with μ = 0.5 is 2
        let means = running_mean_queue_length(&mm1(0.5), &[1e4, 1e5, 1e6], 13).unwrap();
        let gaps: Vec<f64> = means.iter().map(|m| (m - 2.0).abs()).collect();
        assert!(gaps[2] < 0.05 && gaps[2] < gaps[0], "{means:?}");
    }

    #[test]
    fn fll_sampler_gives_geometric_for_mm1() {
        let s = sample_l_infinity_fll(&mm1(1.0), 400_000, 21);
        let est = empirical_pmf(&s, 30);
        for n in 0..10 {
            let want = 0.5f64.powi(n as i32 + 1);
            assert!((est.pmf[n] - want).abs() <= 1.5 * est.half_width[n], "n={n}");
        }
    }

    #[test]
    fn fll_sampler_without_load_is_poisson_over_service() {
        // as ρ → 0, T_θ = 0 and L_∞ is the Poisson count over one Exp(ν)
        // service, geometric with ratio λ/(λ+ν)
        let lambda = 0.01;
        let m = QueueModel::new(lambda, RetrialRate::Finite(1.0), ServiceModel::exponential(1.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let zeros = (0..100_000).filter(|_| sample_t_theta(&m, &mut rng) == 0.0).count();
        assert!((zeros as f64 / 1e5 - 0.99).abs() < 2e-3);
        let est = empirical_pmf(&sample_l_infinity_fll(&m, 400_000, 22), 10);
        let q = lambda / (1.0 + lambda);
        for n in 0..3 {
            let want = (1.0 - q) * q.powi(n as i32);
            assert!((est.pmf[n] - want).abs() <= 1.5 * est.half_width[n] + 2.0 * m.rho() * want, "n={n}");
        }
    }

    #[test]
    fn fll_sampler_is_seed_deterministic() {
        assert_eq!(sample_l_infinity_fll(&burr(), 70_000, 5), sample_l_infinity_fll(&burr(), 70_000, 5));
    }

    #[test]
    fn t_kappa_mean_matches_geometric_sum() {
        // E T_κ = E K · β₂/(2β₁) = 2 · 2
        let m = burr();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 2_000_000;
        let mean = (0..n).map(|_| sample_t_kappa(&m, &mut rng)).sum::<f64>() / n as f64;
        // heavy right tail (index 2): loose check on the mean
        assert!((mean - 4.0).abs() < 0.2, "{mean}");
    }

    #[test]
    fn hill_on_pareto() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let xs: Vec<f64> = (0..1_000_000).map(|_| (1.0 - rng.random::<f64>()).powf(-0.5)).collect();
        let a = hill_tail_index(&xs, 1000).unwrap();
        assert!((1.8..=2.2).contains(&a), "{a}");
    }

    #[test]
    fn hill_rejects_degenerate_samples() {
        assert!(matches!(hill_tail_index(&[3.0; 100], 20), Err(Error::TooFewSamples(_))));
        assert!(matches!(hill_tail_index(&[1.0, 2.0, 3.0], 9), Err(Error::TooFewSamples(_))));
    }

    #[test]
    fn hill_on_pmf_with_known_index() {
        // p_n ∝ n^{-3} has exceedance index 2
        let pmf: Vec<f64> = (0..200_000).map(|n: usize| if n == 0 { 0.0 } else { (n as f64).powi(-3) }).collect();
        let a = hill_tail_index_pmf(&pmf, 1e-4).unwrap();
        assert!((1.8..=2.2).contains(&a), "{a}");
    }
}
