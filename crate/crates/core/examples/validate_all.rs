//! Runs the full numerical acceptance checklist.
//!
//! cargo run --release --example validate_all

fn main() {
    let results = retrial::validation::run_all(|r| println!("{r}"));
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed} of {} passed", results.len());
}
