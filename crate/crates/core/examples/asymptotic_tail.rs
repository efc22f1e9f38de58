//! One- and two-term tail expansions of the queue length.
//!
//! cargo run --example asymptotic_tail

use retrial::asymptotics::{corrected_lmu_expansion, tail_lmu_asym, theorem1_expansion};
use retrial::dist::ServiceModel;
use retrial::transforms::{QueueModel, RetrialRate};

fn main() -> retrial::Result<()> {
    let models = [
        QueueModel::new(0.5, RetrialRate::Finite(1.0), ServiceModel::burr(2.0, 3.0, 1.0)?)?,
        QueueModel::new(0.3, RetrialRate::Finite(2.0), ServiceModel::hall_weiss(3.0, -1.0)?)?,
        QueueModel::new(0.4, RetrialRate::Infinite, ServiceModel::student_t(4.0)?)?,
    ];
    for m in &models {
        let e = theorem1_expansion(m)?;
        let c = corrected_lmu_expansion(m)?;
        println!("{m}");
        println!("  c1 = {:.6}, e1 = {}, c2 = {:.6}, e2 = {} ({:?})", e.c1, e.e1, e.c2, e.e2, e.regime);
        println!("  corrected c2 = {:.6}", c.c2);
        for j in [100u64, 1000, 10_000] {
            let one = tail_lmu_asym(m, j, 1)?.value;
            let two = tail_lmu_asym(m, j, 2)?.value;
            println!("  j = {j:>6}: first {one:.6e}, second {two:.6e}, corrected {:.6e}", c.eval(j as f64, 2));
        }
    }
    Ok(())
}
