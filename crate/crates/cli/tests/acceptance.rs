//! One PASS/FAIL line per acceptance criterion; fails if any criterion does.

use commlab_cli::suite::{criteria, run_one, SuiteConfig};

#[test]
fn acceptance() {
    commlab_cli::init_threads();
    let cfg = SuiteConfig::default();
    let outcomes: Vec<_> = criteria().iter().map(|c| run_one(c, &cfg)).collect();
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
