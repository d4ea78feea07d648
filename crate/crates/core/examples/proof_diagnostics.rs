//! Every diagnostic for one witness: isovec frame distances, the two main
//! term matrices, the centred main term bound and the correction term.
//!
//!     cargo run --example proof_diagnostics -- [N] [seed]

use sksos::diagnostics::{diagnose_trial, DiagnosticsOptions};
use sksos::ensembles::RngStream;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(50, |s| s.parse().unwrap());
    let seed: u64 = args.get(1).map_or(0, |s| s.parse().unwrap());
    let rep = diagnose_trial(n, 0.5, 0.2, RngStream::new(seed, 0), &DiagnosticsOptions::default());
    println!("{}", serde_json::to_string_pretty(&rep).unwrap());
}
