//! One-dimensional Gauss rules and sphere volumes.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// `Γ(m/2)` for a positive integer `m`.
fn gamma_half(m: usize) -> f64 {
    // Γ(1) = 1, Γ(1/2) = √π, Γ(s+1) = sΓ(s)
    let (mut g, mut s) = if m % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while 2.0 * s < m as f64 - 0.5 {
        g *= s;
        s += 1.0;
    }
    g
}

/// `|S^{m-1}| = 2π^{m/2} / Γ(m/2)`, the measure of the unit sphere in `R^m`.
pub fn sphere_volume(m: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument("sphere_volume needs m >= 1".into()));
    }
    Ok(2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=m {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            dp = m as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Gauss rule for the weight `(1 − t²)^{μ − 1/2}` on `[-1, 1]` (Golub–Welsch).
pub fn gauss_gegenbauer(m: usize, mu: f64) -> (Vec<f64>, Vec<f64>) {
    if m == 0 {
        return (vec![], vec![]);
    }
    let mass = PI.sqrt() * ln_gamma_ratio(mu + 0.5, mu + 1.0).exp();
    let mut jac = DMatrix::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * mu - 1.0) / (4.0 * (kf + mu) * (kf + mu - 1.0));
        let b = beta.sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver jitter
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// `ln Γ(a) − ln Γ(b)` for half-integer or integer arguments `≥ 1/2`.
fn ln_gamma_ratio(a: f64, b: f64) -> f64 {
    ln_gamma_half_int(a) - ln_gamma_half_int(b)
}

fn ln_gamma_half_int(s: f64) -> f64 {
    let m = (2.0 * s).round() as usize;
    gamma_half(m).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1).unwrap() - 2.0).abs() < 1e-15);
        assert!((sphere_volume(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(5).unwrap() - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!(sphere_volume(0).is_err());
    }

    #[test]
    fn legendre_exactness() {
        for m in 1..12 {
            let (x, w) = gauss_legendre(m);
            for deg in 0..2 * m {
                let got: f64 = x.iter().zip(&w).map(|(t, v)| v * t.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn gegenbauer_moments() {
        // μ = 1 is the weight sqrt(1 − t²): ∫ = π/2, ∫ t² = π/8
        let (x, w) = gauss_gegenbauer(6, 1.0);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(t, v)| v * t * t).sum();
        assert!((m0 - PI / 2.0).abs() < 1e-13);
        assert!((m2 - PI / 8.0).abs() < 1e-13);
        // μ = 1/2 is Legendre
        let (x, w) = gauss_gegenbauer(5, 0.5);
        let (xl, wl) = gauss_legendre(5);
        for i in 0..5 {
            assert!((x[i] - xl[i]).abs() < 1e-13 && (w[i] - wl[i]).abs() < 1e-13);
        }
    }
}
