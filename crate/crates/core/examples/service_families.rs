//! Service-time families: moments, tail parameters and sampling.
//!
//! cargo run --example service_families

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use retrial::dist::ServiceModel;

fn main() -> retrial::Result<()> {
    let families = [
        ServiceModel::burr(2.0, 3.0, 1.0)?,
        ServiceModel::hall_weiss(3.0, -1.0)?,
        ServiceModel::student_t(4.0)?,
        ServiceModel::exponential(1.0)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in &families {
        println!("{}: beta1 = {:.6}, beta2 = {:.6}", s.family().name(), s.beta1(), s.beta2());
        match s.tail_params() {
            Ok(p) => println!("  a = {}, h = {}, r1 = {:.4}, r2 = {:.4}", p.a, p.h, p.r1, p.r2),
            Err(e) => println!("  {e}"),
        }
        for t in [1.0, 10.0, 100.0] {
            println!("  t = {t:>5}: tail {:.6e}, equilibrium tail {:.6e}", s.tail(t), s.equilibrium_tail(t));
        }
        let n = 200_000;
        let mean = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        println!("  sample mean of {n} draws: {mean:.4}");
    }
    Ok(())
}
