//! Monte Carlo estimates of low-degree moments of a Haar orthogonal matrix
//! against their closed forms.
//!
//!     cargo run --example haar_moments -- [N] [samples]

use sksos::ensembles::{haar_moment_suite, RngStream};

fn main() -> sksos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(6, |s| s.parse().unwrap());
    let samples: usize = args.get(1).map_or(100_000, |s| s.parse().unwrap());
    let rep = haar_moment_suite(n, samples, &mut RngStream::new(0, 0).rng())?;
    println!(
        "{:<22} {:>12} {:>12} {:>10} {:>7}",
        "moment", "estimate", "exact", "std err", "z"
    );
    for m in &rep.moments {
        println!(
            "{:<22} {:>12.6} {:>12.6} {:>10.2e} {:>7.2}",
            m.name, m.estimate, m.target, m.std_error, m.z
        );
    }
    Ok(())
}
