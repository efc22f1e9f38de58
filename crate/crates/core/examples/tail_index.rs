//! Hill estimates of the queue-length tail index (`a - 1`).
//!
//! cargo run --release --example tail_index

use retrial::dist::ServiceModel;
use retrial::simulator::{hill_tail_index, hill_tail_index_pmf, sample_l_mu_decomposition};
use retrial::transforms::{ExactSeries, QueueModel, RetrialRate};

fn main() -> retrial::Result<()> {
    let model = QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0)?)?;
    let a = model.tail_params()?.a;
    println!("service tail index {a}, queue-length index {}", a - 1.0);

    let pmf = ExactSeries::new(&model, 4096).l_mu()?;
    println!("exact pmf, tail mass 1e-5: {:.3}", hill_tail_index_pmf(pmf.coeffs(), 1e-5)?);

    let samples: Vec<f64> =
        sample_l_mu_decomposition(&model, 1_000_000, 3, 2048)?.into_iter().map(|n| n as f64).collect();
    for k in [300, 1000, 3000] {
        println!("10^6 draws, k = {k:>4}: {:.3}", hill_tail_index(&samples, k)?);
    }
    Ok(())
}
