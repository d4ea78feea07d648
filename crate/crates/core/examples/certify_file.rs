//! Degree-4 extension of a witness read from a `SYM n` text file (or stdin),
//! with the main and correction terms reported separately.
//!
//!     cargo run --example certify_file -- witness.txt [alpha]

use std::io::BufReader;

use sksos::deg4::{assemble_z, certify_psd, correction_delta, verify_constraints, CertifyMethod};
use sksos::diagnostics::{delta_gershgorin, z1a_min_eig};

use sksos::linalg::{read_sym, EigMethod};

fn main() -> sksos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m = match args.first().map(String::as_str) {
        None | Some("-") => read_sym(std::io::stdin().lock())?,
        Some(path) => read_sym(BufReader::new(std::fs::File::open(path)?))?,
    };
    let alpha: f64 = args.get(1).map_or(0.2, |s| s.parse().unwrap());
    let z = assemble_z(&m, alpha)?;
    let full = certify_psd(&z, 1e-8, CertifyMethod::Full, EigMethod::Dense)?;
    let delta = delta_gershgorin(&correction_delta(&m)?)?;
    println!("N {}", m.n());
    println!("constraints_max {:.3e}", verify_constraints(&z, 1e-10).max_violation());
    println!("lambda_min_z {:.12}", full.lambda_min);
    println!("lambda_min_z1a {:.12}", z1a_min_eig(&m, alpha, EigMethod::Dense)?);
    println!("delta_op_norm {:.12}", delta.opnorm);
    println!("verdict {:?}", full.verdict);
    Ok(())
}
