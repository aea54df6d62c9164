//! Counts group and field operations on each side and prints them next to
//! the reference rows. Exits nonzero on any mismatch.

use clsc_tkem::bench::cost_report;
use clsc_tkem::hybrid::Protocol;

fn main() {
    let report = cost_report(&Protocol::ALL);
    print!("{}", report.to_table());
    if std::env::args().any(|a| a == "--json") {
        println!("{}", report.to_json());
    }
    std::process::exit(if report.all_match() { 0 } else { 1 });
}
