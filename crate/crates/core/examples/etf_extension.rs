//! Degree-4 extension of simplex frame Gram matrices, entrywise and through
//! the spectral form, plus the dimension obstruction at r = 2.

use sksos::deg4::verify_constraints;
use sksos::etf::{
    check_etf, etf_coefficients, etf_deg4_extension, etf_extension_spectral, perturbation_projector, simplex_etf,
};
use sksos::linalg::sym_eigenvalues;

fn main() -> sksos::Result<()> {
    for r in 3..=7 {
        let f = simplex_etf(r)?;
        let v = check_etf(&f, 1e-12);
        let (_, rank) = perturbation_projector(&f)?;
        let (a, b) = etf_coefficients(r, f.n());
        let z = etf_deg4_extension(&f)?;
        let full = z.to_full();
        let agree = full.max_abs_diff(&etf_extension_spectral(&f)?.to_full());
        let lam = *sym_eigenvalues(&full)?.last().unwrap();
        println!(
            "r={r} N={} mu={:.4} pert rank {rank:>2}  a={a:.4} b={b:.4}  constraints {}  lambda_min {lam:+.2e}  spectral diff {agree:.1e}",
            f.n(),
            v.mu,
            verify_constraints(&z, 1e-10).pass,
        );
    }
    match etf_deg4_extension(&simplex_etf(2)?) {
        Err(e) => println!("r=2: {e}"),
        Ok(_) => println!("r=2: unexpectedly built"),
    }
    Ok(())
}
