//! Seeded random matrix ensembles: GOE, Haar frames on the Stiefel manifold,
//! iid unit vectors, and a Monte Carlo check of the Haar moment table.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Reproducible random stream keyed by `(master_seed, stream_id)`.
///
/// The stream id selects one of ChaCha's independent 64-bit streams, so
/// trial `t` always sees the same numbers no matter which worker runs it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A stream for an auxiliary purpose inside the same trial; `tag`
    /// perturbs the seed, the stream id is kept.
    pub fn derive(&self, tag: u64) -> Self {
        let mixed = self
            .master_seed
            .wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .rotate_left(17)
            ^ 0xD1B5_4A32_D192_ED03;
        Self::new(mixed, self.stream_id)
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// GOE with `W_ii ~ N(0, 2/N)` and `W_ij ~ N(0, 1/N)`. Entries are drawn
/// column by column over the upper triangle.
pub fn sample_goe<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymMatrix {
    assert!(n >= 1);
    let off = (1.0 / n as f64).sqrt();
    let dia = (2.0 / n as f64).sqrt();
    SymMatrix::from_fn(n, |i, j| {
        let s = if i == j { dia } else { off };
        s * normal(rng)
    })
}

/// Haar-distributed `r x N` matrix with orthonormal rows: thin QR of an
/// `N x r` gaussian matrix with the signs of `R`'s diagonal moved into `Q`.
pub fn sample_haar_stiefel<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Mat<f64>> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!(
            "Stiefel frame needs 1 <= r <= N, got r={r}, N={n}"
        )));
    }
    let g = Mat::from_fn(n, r, |_, _| normal(rng));
    let qr = g.as_ref().qr();
    let q = qr.compute_thin_Q();
    let rr = qr.thin_R();
    let mut v = Mat::<f64>::zeros(r, n);
    for k in 0..r {
        let s = if rr[(k, k)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            v[(k, i)] = s * q[(i, k)];
        }
    }
    Ok(v)
}

/// Haar orthogonal `N x N` matrix.
pub fn sample_haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Mat<f64>> {
    sample_haar_stiefel(n, n, rng)
}

/// `r x N` matrix whose columns are independent and uniform on the unit
/// sphere of `R^r`.
pub fn sample_iid_unit_vectors<R: Rng + ?Sized>(r: usize, n: usize, rng: &mut R) -> Result<Mat<f64>> {
    if r == 0 {
        return Err(Error::InvalidParameter("unit vectors need r >= 1".into()));
    }
    let mut out = Mat::<f64>::zeros(r, n);
    for j in 0..n {
        loop {
            let g: Vec<f64> = (0..r).map(|_| normal(rng)).collect();
            let s = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if s > 0.0 {
                for k in 0..r {
                    out[(k, j)] = g[k] / s;
                }
                break;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarMomentReport {
    pub n: usize,
    pub samples: usize,
    pub moments: Vec<MomentEstimate>,
}

impl HaarMomentReport {
    pub fn max_abs_z(&self) -> f64 {
        self.moments.iter().map(|m| m.z.abs()).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<&MomentEstimate> {
        self.moments.iter().find(|m| m.name == name)
    }
}

/// Running mean and standard error.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAccumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count.max(1) as f64).sqrt()
    }

    pub fn z_against(&self, target: f64) -> f64 {
        let se = self.std_error();
        if se > 0.0 {
            (self.mean - target) / se
        } else if self.mean == target {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Monte Carlo estimates of the nonzero degree-2 and degree-4 moments of a
/// Haar orthogonal `N x N` matrix, plus the odd moment `E Q11`.
pub fn haar_moment_suite<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<HaarMomentReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("Haar moment suite needs N >= 2".into()));
    }
    if samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "Haar moment suite needs at least 10000 samples, got {samples}"
        )));
    }
    let nf = n as f64;
    let targets = [
        ("E Q11^2", 1.0 / nf),
        ("E Q11^4", 3.0 / (nf * (nf + 2.0))),
        ("E Q11^2 Q12^2", 1.0 / (nf * (nf + 2.0))),
        ("E Q11^2 Q22^2", (nf + 1.0) / ((nf - 1.0) * nf * (nf + 2.0))),
        ("E Q11 Q12 Q21 Q22", -1.0 / ((nf - 1.0) * nf * (nf + 2.0))),
        ("E Q11", 0.0),
    ];
    let mut acc = [MeanAccumulator::default(); 6];
    for _ in 0..samples {
        let q = sample_haar_orthogonal(n, rng)?;
        let (a, b, c, d) = (q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
        let vals = [a * a, a.powi(4), a * a * b * b, a * a * d * d, a * b * c * d, a];
        for (acc, v) in acc.iter_mut().zip(vals) {
            acc.push(v);
        }
    }
    let moments = targets
        .iter()
        .zip(&acc)
        .map(|(&(name, target), a)| MomentEstimate {
            name: name.to_string(),
            estimate: a.mean(),
            std_error: a.std_error(),
            target,
            z: a.z_against(target),
        })
        .collect();
    Ok(HaarMomentReport { n, samples, moments })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_determinism() {
        let s = RngStream::new(42, 7);
        let a = sample_goe(12, &mut s.rng());
        let b = sample_goe(12, &mut s.rng());
        assert_eq!(a, b);
        let c = sample_goe(12, &mut RngStream::new(42, 8).rng());
        assert_ne!(a, c);
        assert_ne!(s.derive(1), s.derive(2));
    }

    #[test]
    fn goe_diag_variance() {
        let n = 10;
        let mut rng = RngStream::new(1, 0).rng();
        let mut acc = MeanAccumulator::default();
        let mut tr = MeanAccumulator::default();
        for t in 0..100_000 {
            let w = sample_goe(n, &mut rng);
            acc.push(w.get(0, 0) * w.get(0, 0));
            if t < 10_000 {
                tr.push(w.frobenius_inner(&w));
            }
        }
        assert!(acc.z_against(2.0 / n as f64).abs() <= 4.0);
        assert!(tr.z_against(n as f64 + 1.0).abs() <= 4.0);
    }

    #[test]
    fn stiefel_rows_orthonormal_and_moments() {
        let (n, r) = (10, 3);
        let mut rng = RngStream::new(2, 0).rng();
        let mut m2 = MeanAccumulator::default();
        let mut m4 = MeanAccumulator::default();
        for t in 0..100_000 {
            let v = sample_haar_stiefel(n, r, &mut rng).unwrap();
            if t < 100 {
                for a in 0..r {
                    for b in 0..r {
                        let g: f64 = (0..n).map(|i| v[(a, i)] * v[(b, i)]).sum();
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!((g - want).abs() <= 1e-10);
                    }
                }
            }
            let x = v[(0, 0)] * v[(0, 0)];
            m2.push(x);
            m4.push(x * x);
        }
        let nf = n as f64;
        assert!(m2.z_against(1.0 / nf).abs() <= 4.0);
        assert!(m4.z_against(3.0 / (nf * (nf + 2.0))).abs() <= 4.0);
    }

    #[test]
    fn stiefel_matches_orthogonal_marginal() {
        let n = 10;
        let mut rng_a = RngStream::new(3, 0).rng();
        let mut rng_b = RngStream::new(3, 1).rng();
        let mut a = MeanAccumulator::default();
        let mut b = MeanAccumulator::default();
        for _ in 0..100_000 {
            let v = sample_haar_stiefel(n, 3, &mut rng_a).unwrap();
            a.push(v[(0, 0)] * v[(0, 0)]);
            let q = sample_haar_orthogonal(n, &mut rng_b).unwrap();
            b.push(q[(0, 0)] * q[(0, 0)]);
        }
        let z = (a.mean() - b.mean()) / (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
        assert!(z.abs() <= 4.0, "z = {z}");
    }

    #[test]
    fn unit_vectors() {
        let mut rng = RngStream::new(4, 0).rng();
        let v = sample_iid_unit_vectors(5, 50, &mut rng).unwrap();
        for j in 0..50 {
            let s: f64 = (0..5).map(|k| v[(k, j)] * v[(k, j)]).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        let one = sample_iid_unit_vectors(1, 20, &mut rng).unwrap();
        assert!((0..20).all(|j| one[(0, j)].abs() == 1.0));
        let r = 4;
        let mut acc = MeanAccumulator::default();
        for _ in 0..50_000 {
            let v = sample_iid_unit_vectors(r, 2, &mut rng).unwrap();
            let ip: f64 = (0..r).map(|k| v[(k, 0)] * v[(k, 1)]).sum();
            acc.push(ip * ip);
        }
        assert!(acc.z_against(1.0 / r as f64).abs() <= 4.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = RngStream::new(0, 0).rng();
        assert!(sample_haar_stiefel(3, 4, &mut rng).is_err());
        assert!(sample_iid_unit_vectors(0, 3, &mut rng).is_err());
        assert!(haar_moment_suite(6, 100, &mut rng).is_err());
    }
}
