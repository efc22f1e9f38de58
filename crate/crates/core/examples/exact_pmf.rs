//! Stationary queue-length law from truncated power series, with the
//! decomposition `L_μ = L_∞ + R_μ` checked by convolution.
//!
//! cargo run --example exact_pmf

use retrial::dist::ServiceModel;
use retrial::transforms::{ExactSeries, QueueModel, RetrialRate, SeriesTail};

fn main() -> retrial::Result<()> {
    let model = QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0)?)?;
    let series = ExactSeries::new(&model, 1024);
    let (l_inf, r, l) = (series.l_infinity()?, series.r_mu()?, series.l_mu()?);
    println!("{model}");
    println!("{:>3} {:>12} {:>12} {:>12}", "n", "L_inf", "R_mu", "L_mu");
    for n in 0..10 {
        println!("{n:>3} {:>12.8} {:>12.8} {:>12.8}", l_inf[n], r[n], l[n]);
    }
    println!("sup |L_mu - L_inf * R_mu| = {:.2e}", l.sup_distance(&l_inf.mul(&r)));

    let tail = SeriesTail::new(&l);
    println!("mass beyond truncation: {:.3e} (uncertainty {:.1e})", tail.beyond_truncation(), tail.uncertainty());
    for j in [10, 100, 500] {
        println!("P{{L_mu > {j}}} = {:.6e}", tail.tail(j)?.value);
    }
    Ok(())
}
