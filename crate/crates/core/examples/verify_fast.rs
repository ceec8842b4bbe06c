//! Fast verification battery, one line per check.

use fracsus::verify::{verify_suite, Level};

fn main() {
    let report = verify_suite(Level::Fast, 0);
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {} value={:.4e} expected={} tol={:e}", c.check, c.value, c.expected, c.tol);
    }
    for (id, secs) in &report.timings {
        println!("criterion {id:2}: {secs:.1}s");
    }
    println!("{} failing", report.failures().count());
}
