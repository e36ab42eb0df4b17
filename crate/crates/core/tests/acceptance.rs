//! Runs every acceptance criterion at its pinned tolerance and prints one
//! PASS/FAIL line per criterion. Built without the libtest harness so the
//! table is always shown.

use asymflow::experiments::{Session, ALL};
use asymflow::navier_stokes::DEFAULT_PROBE_SEED;

fn main() {
    let mut session = Session::new(DEFAULT_PROBE_SEED);
    let mut failed = vec![];
    println!("acceptance: {} criteria", ALL.len());
    for id in ALL {
        let outcome = session.run(id);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(outcome.id.clone());
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", ALL.len());
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        std::process::exit(1);
    }
}
