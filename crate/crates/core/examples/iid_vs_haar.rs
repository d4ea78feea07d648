//! How far normalized Haar frame vectors and iid unit vectors are from
//! tightness, `||Σ u_i u_iᵀ - (N/r) I||_F²`.

use sksos::diagnostics::iid_comparison;
use sksos::ensembles::RngStream;

fn main() -> sksos::Result<()> {
    for n in [40, 80, 160] {
        let c = iid_comparison(n / 2, n, 20, RngStream::new(n as u64, 0))?;
        println!(
            "N={n:>3} r={:>3}: Haar {:.3}  iid {:.2} (exact {:.1})  ratio {:.1}",
            c.r, c.haar_mean, c.iid_mean, c.iid_expected, c.ratio
        );
    }
    Ok(())
}
