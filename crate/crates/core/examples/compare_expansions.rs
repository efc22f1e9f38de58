//! Relative error of the expansions against the exact series tail.
//!
//! cargo run --release --example compare_expansions

use retrial::cli::{compare_rows, crossover};
use retrial::config::ExperimentConfig;

fn main() -> retrial::Result<()> {
    let cfg = ExperimentConfig::from_key_values("family=burr:b=2,v=3,w=1 lambda=0.5 mu=1 order=4096 j=50,100,200,500,1000,2000")?;
    let rows = compare_rows(&cfg)?;
    println!("{:>5} {:>12} {:>10} {:>10} {:>10} reliable", "j", "exact", "e1", "e2", "e2_corr");
    for r in &rows {
        println!(
            "{:>5} {:>12.6e} {:>10.3e} {:>10.3e} {:>10.3e} {}",
            r.j, r.exact_tail, r.e1_rel, r.e2_rel, r.e2_corrected_rel, r.reliable
        );
    }
    match crossover(&rows) {
        Some(j) => println!("second order beats first from j = {j}"),
        None => println!("no crossover on this grid"),
    }
    Ok(())
}
