//! Objective of the top-delta witness as delta shrinks, against the
//! semicircle limit `(4 - q²)^{3/2} / (6π δ)` with `q` the upper
//! delta-quantile.

use sksos::ensembles::{sample_goe, RngStream};
use sksos::witness::{montanari_sen_witness, objective_value};

fn tail_mass(q: f64) -> f64 {
    let t = (q / 2.0).acos();
    (t - t.sin() * t.cos()) / std::f64::consts::PI
}

fn limit(delta: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail_mass(mid) > delta {
            lo = mid
        } else {
            hi = mid
        }
    }
    let q = 0.5 * (lo + hi);
    (4.0 - q * q).powf(1.5) / (6.0 * std::f64::consts::PI * delta)
}

fn main() -> sksos::Result<()> {
    let n = 400;
    let w = sample_goe(n, &mut RngStream::new(5, 0).rng());
    for delta in [0.5, 0.25, 0.125, 0.0625] {
        let b = montanari_sen_witness(&w, delta)?;
        println!(
            "delta={delta:<7} objective {:.4}  limit {:.4}",
            objective_value(&b.m, &w)?,
            limit(delta)
        );
    }
    Ok(())
}
