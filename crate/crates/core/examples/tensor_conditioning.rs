//! Gaussian tensor pseudomoments: order 2 on a Haar frame and on a simplex,
//! order 3 with the tuned variance.

use faer::Mat;
use sksos::ensembles::{sample_haar_stiefel, RngStream};
use sksos::etf::simplex_etf;
use sksos::tensor::{build_deg2k_model, default_sigmas, repeated_index_projector, summarize, ColumnScaling};

fn show(label: &str, v: &Mat<f64>, k: usize) -> sksos::Result<()> {
    let scaling = ColumnScaling::Unit;
    let sig = default_sigmas(v.as_ref(), k, scaling)?;
    let dm = build_deg2k_model(v.as_ref(), k, &sig, scaling)?;
    let s = summarize(&dm)?;
    println!(
        "{label}: k={k} N={} r={} dim {} sigma^2 {:.3}  residual {:.1e}  lambda_min(Z) {:+.1e}  max|Z_tt-1| {:.3}  step-1 gap {}",
        s.n,
        s.r,
        s.dim,
        s.sigma_sq,
        s.constraint_residual,
        s.z_lambda_min,
        s.diag_max_dev,
        s.step1_gap.map_or("-".into(), |g| format!("max {:.3} rms {:.4}", g.max, g.rms)),
    );
    Ok(())
}

fn main() -> sksos::Result<()> {
    let haar = sample_haar_stiefel(40, 20, &mut RngStream::new(1, 0).rng())?;
    show("haar", &haar, 2)?;
    let f = simplex_etf(10)?;
    let s = (10.0f64 / 11.0).sqrt();
    let simplex = Mat::from_fn(10, 11, |i, j| s * f.vectors[(i, j)]);
    show("simplex", &simplex, 2)?;
    let small = sample_haar_stiefel(9, 6, &mut RngStream::new(2, 0).rng())?;
    show("haar", &small, 3)?;
    let p = repeated_index_projector(small.as_ref(), 3)?;
    println!(
        "order-3 repeated-index span: rank {} from {} spanning tensors",
        p.rank, p.spanning
    );
    Ok(())
}
