//! Oracles shared by the integration tests. Nothing here calls into the
//! library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Semicircle density on `[-2, 2]`.
pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - x * x).sqrt() / (2.0 * PI)
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Upper-tail mass `∫_q^2 ρ`, integrated in the angle `x = 2 cos θ` where
/// the integrand is smooth.
pub fn semicircle_tail_mass(q: f64) -> f64 {
    let theta_q = (q / 2.0).clamp(-1.0, 1.0).acos();
    simpson(|t| 2.0 * t.sin().powi(2) / PI, 0.0, theta_q, 2000)
}

/// `q` with `∫_q^2 ρ = delta`, by bisection.
pub fn semicircle_quantile(delta: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if semicircle_tail_mass(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(1/δ) ∫_q^2 x ρ(x) dx`, the limiting objective of the top-δ witness.
pub fn semicircle_objective(delta: f64) -> f64 {
    let q = semicircle_quantile(delta);
    let theta_q = (q / 2.0).acos();
    let first = simpson(|t| 4.0 * t.cos() * t.sin().powi(2) / PI, 0.0, theta_q, 2000);
    first / delta
}

/// Same quantity in closed form, `(4 - q²)^{3/2} / (6π δ)`.
pub fn semicircle_objective_closed(delta: f64) -> f64 {
    let q = semicircle_quantile(delta);
    (4.0 - q * q).powf(1.5) / (6.0 * PI * delta)
}

/// Moment matrix over subsets of size at most 2 of `[4]` (empty set,
/// singletons, then pairs in lexicographic order) for the uniform law on
/// sign vectors with two `+1` and two `-1`.
pub fn balanced_sign_moments() -> Vec<Vec<f64>> {
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    sets.extend((0..4).map(|i| vec![i]));
    for i in 0..4 {
        for j in i + 1..4 {
            sets.push(vec![i, j]);
        }
    }
    let points: Vec<[f64; 4]> = (0..16u32)
        .filter(|m| m.count_ones() == 2)
        .map(|m| std::array::from_fn(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }))
        .collect();
    let mono = |x: &[f64; 4], s: &[usize]| s.iter().map(|&i| x[i]).product::<f64>();
    sets.iter()
        .map(|s| {
            sets.iter()
                .map(|t| points.iter().map(|x| mono(x, s) * mono(x, t)).sum::<f64>() / points.len() as f64)
                .collect()
        })
        .collect()
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major).
pub fn spd_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let s: f64 = (0..j).map(|p| l[j][p] * l[j][p]).sum();
        l[j][j] = (a[j][j] - s).sqrt();
        for i in j + 1..n {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            l[i][j] = (a[i][j] - s) / l[j][j];
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|p| l[i][p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|p| l[p][i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `isovec` of `(a bᵀ + b aᵀ)/2`: diagonal first, then the strict upper
/// triangle scaled by `√2`, column by column.
pub fn isovec_sym_outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    let r = a.len();
    let mut out: Vec<f64> = (0..r).map(|i| a[i] * b[i]).collect();
    for j in 0..r {
        for i in 0..j {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (a[i] * b[j] + a[j] * b[i]));
        }
    }
    out
}
