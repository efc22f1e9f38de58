//! Commands behind the `retrial` binary. Each writes CSV to the given sink,
//! starting with the configuration's manifest line.

use std::io::Write;

use serde::Serialize;

use crate::asymptotics::{corrected_lmu_expansion, tail_lmu_asym, theorem1_expansion};
use crate::config::{ExperimentConfig, Law};
use crate::error::{Error, Result};
use crate::simulator::{run_retrial_simulation, Interval, RunManifest};
use crate::transforms::{ExactSeries, SeriesTail};
use crate::validation::{run_all, CriterionResult};

/// Exit status when the acceptance suite fails.
pub const VALIDATION_FAILURE: i32 = 4;

/// A row of the expansion table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymRow {
    pub j: u64,
    pub first_order: f64,
    pub second_order: f64,
    pub delta: f64,
}

pub fn asym_rows(cfg: &ExperimentConfig) -> Result<Vec<AsymRow>> {
    let model = cfg.validate()?;
    cfg.j_grid()
        .into_iter()
        .map(|j| {
            let first_order = tail_lmu_asym(&model, j, 1)?.value;
            let second_order = tail_lmu_asym(&model, j, 2)?.value;
            Ok(AsymRow { j, first_order, second_order, delta: second_order - first_order })
        })
        .collect()
}

pub fn cmd_asym<W: Write>(cfg: &ExperimentConfig, mut out: W) -> Result<()> {
    let rows = asym_rows(cfg)?;
    writeln!(out, "{}", cfg.manifest_line())?;
    writeln!(out, "j,first_order,second_order,delta")?;
    for r in rows {
        writeln!(out, "{},{:.16e},{:.16e},{:.16e}", r.j, r.first_order, r.second_order, r.delta)?;
    }
    Ok(())
}

/// `n,pmf,cdf,tail` for `n <= min(jmax, order - 1)`.
pub fn cmd_pmf<W: Write>(cfg: &ExperimentConfig, mut out: W) -> Result<()> {
    let model = cfg.validate()?;
    let s = ExactSeries::new(&model, cfg.order);
    let pmf = match cfg.law {
        Law::LMu => s.l_mu()?,
        Law::LInfinity => s.l_infinity()?,
        Law::RMu => s.r_mu()?,
    };
    let tail = SeriesTail::new(&pmf);
    let cdf = pmf.cumulative();
    writeln!(out, "{}", cfg.manifest_line())?;
    writeln!(out, "n,pmf,cdf,tail")?;
    for n in 0..=cfg.jmax.min(cfg.order - 1) {
        writeln!(out, "{n},{:.16e},{:.16e},{:.16e}", pmf[n], cdf[n], tail.tail(n)?.value)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub run: RunManifest,
    pub idle_probability: Interval,
    pub beyond_jmax: f64,
}

/// Writes `state,pmf,half_width` for `L_μ` and returns the run summary
/// (the JSON manifest).
pub fn cmd_simulate<W: Write>(cfg: &ExperimentConfig, mut out: W) -> Result<SimulationSummary> {
    let model = cfg.validate()?;
    let run = run_retrial_simulation(&model, &cfg.sim_config())?;
    let est = run.queue_length();
    writeln!(out, "{}", cfg.manifest_line())?;
    est.write_csv(&mut out)?;
    Ok(SimulationSummary { run: run.manifest(), idle_probability: run.idle_probability(), beyond_jmax: est.beyond })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub j: u64,
    pub exact_tail: f64,
    pub e1_rel: f64,
    pub e2_rel: f64,
    pub e2_corrected_rel: f64,
    /// The exact tail is at least ten times its numerical uncertainty.
    pub reliable: bool,
}

/// Error curves of both expansions against the series tail.
pub fn compare_rows(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    let model = cfg.validate()?;
    let grid = cfg.j_grid();
    let jmax = grid.iter().copied().max().unwrap_or(0);
    if jmax as usize >= cfg.order {
        return Err(Error::Config(format!("order {} must exceed the largest j {jmax}", cfg.order)));
    }
    let theorem = theorem1_expansion(&model)?;
    let corrected = corrected_lmu_expansion(&model)?;
    let tail = SeriesTail::new(&ExactSeries::new(&model, cfg.order).l_mu()?);
    grid.into_iter()
        .map(|j| {
            let est = tail.tail(j as usize)?;
            let exact = est.value;
            let x = j as f64;
            let rel = |v: f64| (exact - v).abs() / exact;
            Ok(CompareRow {
                j,
                exact_tail: exact,
                e1_rel: rel(theorem.eval(x, 1)),
                e2_rel: rel(theorem.eval(x, 2)),
                e2_corrected_rel: rel(corrected.eval(x, 2)),
                reliable: exact >= 10.0 * est.uncertainty.unwrap_or(0.0),
            })
        })
        .collect()
}

/// Smallest grid point from which on the second-order error stays below
/// the first-order one.
pub fn crossover(rows: &[CompareRow]) -> Option<u64> {
    let mut start = None;
    for r in rows {
        if r.e2_rel < r.e1_rel {
            start.get_or_insert(r.j);
        } else {
            start = None;
        }
    }
    start
}

pub fn cmd_compare<W: Write>(cfg: &ExperimentConfig, mut out: W) -> Result<Vec<CompareRow>> {
    let rows = compare_rows(cfg)?;
    writeln!(out, "{}", cfg.manifest_line())?;
    writeln!(out, "j,exact_tail,e1_rel,e2_rel,e2_corrected_rel,reliable")?;
    for r in &rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.j, r.exact_tail, r.e1_rel, r.e2_rel, r.e2_corrected_rel, r.reliable
        )?;
    }
    match crossover(&rows) {
        Some(j) => writeln!(out, "# crossover: {j}")?,
        None => writeln!(out, "# crossover: none")?,
    }
    Ok(rows)
}

/// Runs the acceptance suite, one line per criterion, and returns the
/// results.
pub fn cmd_validate<W: Write>(mut out: W) -> Result<Vec<CriterionResult>> {
    let mut io_error = None;
    let results = run_all(|r| {
        if let Err(e) = writeln!(out, "{r}").and_then(|_| out.flush()) {
            io_error.get_or_insert(e);
        }
    });
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        writeln!(out, "all criteria passed")?;
    } else {
        writeln!(out, "failed criteria: {}", failed.join(", "))?;
    }
    Ok(results)
}
