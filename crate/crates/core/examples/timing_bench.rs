//! Wall-clock medians per phase on P-256. Build with --release for
//! meaningful numbers.
//!
//! ```text
//! cargo run --release --example timing_bench -- 500
//! ```

use clsc_tkem::bench::timing_bench;
use clsc_tkem::hybrid::Protocol;

fn main() {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    for protocol in Protocol::ALL {
        let report = timing_bench(protocol, n);
        println!("{} ({n} runs)", protocol.name());
        for p in &report.phases {
            println!("  {:<10} median {:>8.1} us   p95 {:>8.1} us", format!("{:?}", p.phase), p.median_ns as f64 / 1e3, p.p95_ns as f64 / 1e3);
        }
    }
}
