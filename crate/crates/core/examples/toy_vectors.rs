//! Regenerates the shipped Z_13 vector files and checks them.
//!
//! ```text
//! cargo run --example toy_vectors -- crates/core/vectors
//! ```
//! Without an argument the files are printed instead of written.

use clsc_tkem::hybrid::Protocol;
use clsc_tkem::vectors::{check, generate_toy_vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1);
    for protocol in Protocol::ALL {
        let file = generate_toy_vector(protocol)?;
        let report = check(&file)?;
        assert!(report.passed());
        match &out_dir {
            Some(dir) => {
                let path = std::path::Path::new(dir).join(format!("{}.json", file.name));
                std::fs::write(&path, file.to_json())?;
                println!("wrote {} ({} values)", path.display(), report.checked);
            }
            None => print!("{}", file.to_json()),
        }
    }
    Ok(())
}
