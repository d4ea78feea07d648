//! Witness from one GOE draw, the degree-4 extension, its constraints and a
//! PSD certificate by two routes.
//!
//!     cargo run --example certify_witness -- [N] [delta] [alpha] [seed]

use sksos::deg4::{assemble_z, certify_psd, verify_constraints, CertifyMethod};
use sksos::ensembles::{sample_goe, RngStream};
use sksos::linalg::EigMethod;
use sksos::witness::{montanari_sen_witness, nudged_witness, objective_value, spectral_certificate};

fn main() -> sksos::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let n: usize = arg(0, "60").parse().unwrap();
    let delta: f64 = arg(1, "0.5").parse().unwrap();
    let alpha: f64 = arg(2, "0.2").parse().unwrap();
    let seed: u64 = arg(3, "1").parse().unwrap();

    let w = sample_goe(n, &mut RngStream::new(seed, 0).rng());
    let bundle = montanari_sen_witness(&w, delta)?;
    let stats = bundle.entry_stats();
    println!("N={n} r={} delta={delta} alpha={alpha}", bundle.r);
    println!("max |M_ij| off-diagonal: {:.4}", stats.max_offdiag_m);
    println!(
        "objective <W,M>/N = {:.4}, nudged = {:.4}, spectral bound = {:.4}",
        objective_value(&bundle.m, &w)?,
        objective_value(&nudged_witness(&bundle.m, alpha)?, &w)?,
        spectral_certificate(&w)?
    );

    let z = assemble_z(&bundle.m, alpha)?;
    let rep = verify_constraints(&z, 1e-10);
    println!(
        "constraints: c2 {:.1e} c3 {:.1e} c4 {:.1e} c5 {:.1e} -> {}",
        rep.c2.max,
        rep.c3.max,
        rep.c4.max,
        rep.c5.max,
        if rep.pass { "ok" } else { "violated" }
    );
    for method in [CertifyMethod::Full, CertifyMethod::Split] {
        let c = certify_psd(&z, 1e-8, method, EigMethod::Auto)?;
        println!(
            "{method:?}: {:?}, lambda_min {:.5}, threshold {:.1e}",
            c.verdict, c.lambda_min, c.threshold
        );
    }
    Ok(())
}
