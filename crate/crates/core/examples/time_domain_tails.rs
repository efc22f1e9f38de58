//! Tails of the busy-period building blocks and a Monte Carlo check of `T_κ`.
//!
//! cargo run --release --example time_domain_tails

use retrial::asymptotics::{tail_tkappa_2nd, tail_tsum_2nd, tail_ttau_asym, tail_ttheta_2nd};
use retrial::dist::ServiceModel;
use retrial::simulator::t_kappa_exceedance;
use retrial::transforms::{QueueModel, RetrialRate};

fn main() -> retrial::Result<()> {
    let model = QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0)?)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>22}", "t", "T_tau", "T_kappa", "T_theta", "T_sum", "T_kappa (MC)");
    for t in [50.0, 100.0, 200.0, 400.0] {
        let mc = t_kappa_exceedance(&model, t, 2_000_000, 11);
        println!(
            "{t:>5} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} ± {:.1e}",
            tail_ttau_asym(&model, t)?.value,
            tail_tkappa_2nd(&model, t)?.value,
            tail_ttheta_2nd(&model, t)?.value,
            tail_tsum_2nd(&model, t)?.value,
            mc.value,
            mc.half_width
        );
    }
    Ok(())
}
