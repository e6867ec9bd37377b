use warped::verifier::{default_family, run_suite, SuiteConfig};

fn main() {
    let t = std::time::Instant::now();
    let ledger = run_suite(&default_family().unwrap(), &SuiteConfig::default()).unwrap();
    print!("{}", ledger.to_table());
    println!("all pass: {} in {:?}", ledger.all_pass(), t.elapsed());
}
