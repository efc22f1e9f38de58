//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use retrial::validation::run_all;

fn main() {
    println!("acceptance suite");
    let results = run_all(|r| println!("{r}"));
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
