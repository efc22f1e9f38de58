//! Event-driven simulation against the exact series.
//!
//! cargo run --release --example simulate_queue

use retrial::dist::ServiceModel;
use retrial::simulator::{run_retrial_simulation, SimConfig};
use retrial::transforms::{ExactSeries, QueueModel, RetrialRate};

fn main() -> retrial::Result<()> {
    let model = QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0)?)?;
    let run = run_retrial_simulation(&model, &SimConfig::new(2e6, 7).with_max_state(20))?;
    let sim = run.queue_length();
    let exact = ExactSeries::new(&model, 256).l_mu()?;
    let idle = run.idle_probability();
    println!("{} events, idle probability {:.5} ± {:.5}", run.events(), idle.value, idle.half_width);
    println!("{:>3} {:>10} {:>10} {:>10}", "n", "sim", "±", "exact");
    for n in 0..12 {
        println!("{n:>3} {:>10.6} {:>10.6} {:>10.6}", sim.pmf[n], sim.half_width[n], exact[n]);
    }
    let orbit = run.conditional_r_mu_estimate()?;
    let r = ExactSeries::new(&model, 256).r_mu()?;
    println!("orbit given idle server:");
    for n in 0..6 {
        println!("{n:>3} {:>10.6} {:>10.6} {:>10.6}", orbit.pmf[n], orbit.half_width[n], r[n]);
    }
    Ok(())
}
