//! `R*_2` of `β(P, ξ) = e^{-|ξ|²} v` in `R³`.
//!
//! With `r = |x|` the dual transform is `(1/2)I₊(r) v^⊥ + I₋(r) v^∥`, where
//! `I_± = r^{-3} e^{-r²} ∫_0^r e^{s²}(r² ± s²) ds` and `v^∥`, `v^⊥` are the
//! components of `v` along and across `x`.

use crate::error::{Error, Result};
use crate::exterior::Multivector;
use crate::geometry::gauss_legendre_on;
use crate::special::dawson;

fn series(r: f64, sign: f64) -> f64 {
    // e^{-r²} Σ_j r^{2j}/j! (1/(2j+1) ± 1/(2j+3))
    let r2 = r * r;
    let mut term = 1.0;
    let mut sum = 0.0;
    for j in 0..60 {
        let jf = j as f64;
        sum += term * (1.0 / (2.0 * jf + 1.0) + sign / (2.0 * jf + 3.0));
        term *= r2 / (jf + 1.0);
        if term < 1e-18 * sum.abs() {
            break;
        }
    }
    (-r2).exp() * sum
}

fn closed(r: f64, sign: f64) -> f64 {
    if r < 1.0 {
        return series(r, sign);
    }
    let d = dawson(r);
    (r * r * d + sign * 0.5 * (r - d)) / (r * r * r)
}

/// `I₊(r)`; equals `4/3` at 0 and behaves like `r^{-2}` at infinity.
pub fn i_plus(r: f64) -> f64 {
    closed(r.abs(), 1.0)
}

/// `I₋(r)`; equals `2/3` at 0 and behaves like `r^{-4}/2` at infinity.
pub fn i_minus(r: f64) -> f64 {
    closed(r.abs(), -1.0)
}

/// `r^{-3} ∫_0^r e^{-u(2r-u)}(r² ± (r-u)²) du` on panels refined towards
/// `u = 0`, where the integrand decays at rate `2r`.
fn numeric(r: f64, sign: f64, points: usize) -> f64 {
    let r = r.abs();
    if r == 0.0 {
        return 1.0 + sign / 3.0;
    }
    let mut edges = vec![0.0];
    let mut h = (0.25 / r).min(r);
    while *edges.last().unwrap() + h < r {
        edges.push(edges.last().unwrap() + h);
        h *= 2.0;
    }
    edges.push(r);
    let mut sum = 0.0;
    for e in edges.windows(2) {
        let (us, ws) = gauss_legendre_on(points, e[0], e[1]);
        for (u, w) in us.iter().zip(&ws) {
            let s = r - u;
            sum += w * (-u * (2.0 * r - u)).exp() * (r * r + sign * s * s);
        }
    }
    sum / (r * r * r)
}

/// `I₊` by direct quadrature, independent of the Dawson-based closed form.
pub fn i_plus_numeric(r: f64, points: usize) -> f64 {
    numeric(r, 1.0, points)
}

/// `I₋` by direct quadrature.
pub fn i_minus_numeric(r: f64, points: usize) -> f64 {
    numeric(r, -1.0, points)
}

/// `(1/2)I₊(r) v^⊥ + I₋(r) v^∥`.
pub fn dual_example_closed(x: &[f64], v: &Multivector) -> Result<Multivector> {
    if x.len() != 3 || v.n() != 3 || v.degree() != 1 {
        return Err(Error::InvalidArgument("the example is a 1-form on R^3".into()));
    }
    let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let vc = v.coeffs();
    if r == 0.0 {
        return Ok(v.scale(2.0 / 3.0));
    }
    let along = vc.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / (r * r);
    let par: Vec<f64> = x.iter().map(|t| along * t).collect();
    let perp: Vec<f64> = vc.iter().zip(&par).map(|(a, b)| a - b).collect();
    let (ip, im) = (i_plus(r), i_minus(r));
    let out = perp.iter().zip(&par).map(|(a, b)| 0.5 * ip * a + im * b).collect();
    Multivector::from_coeffs(3, 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_rule;
    use crate::geometry::Frame;
    use crate::radon::dual;

    #[test]
    fn closed_and_numeric_agree() {
        for r in [0.0, 0.05, 0.5, 0.99, 1.0, 1.01, 2.0, 5.0, 10.0, 40.0] {
            for (c, q) in [(i_plus(r), i_plus_numeric(r, 20)), (i_minus(r), i_minus_numeric(r, 20))] {
                assert!((c - q).abs() < 1e-11 * c.abs(), "r={r}: {c} vs {q}");
            }
        }
    }

    #[test]
    fn limits() {
        assert!((i_plus(0.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((i_minus(0.0) - 2.0 / 3.0).abs() < 1e-15);
        let r = 1e3;
        assert!((r * r * i_plus(r) - 1.0).abs() < 1e-5);
        assert!((r.powi(4) * i_minus(r) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn dual_matches_closed_form() {
        let rule = sphere_rule(3, 60).unwrap().hyperplanes().unwrap();
        let v = Multivector::vector(&[0.4, -1.0, 0.25]);
        let beta = |_: &Frame, xi: &[f64]| -> Result<Multivector> {
            let r2: f64 = xi.iter().map(|t| t * t).sum();
            Ok(v.scale((-r2).exp()))
        };
        for x in [[0.0, 0.0, 0.0], [0.3, 0.1, -0.2], [1.0, -0.5, 0.8], [0.0, 2.0, 1.0]] {
            let got = dual(beta, &x, &rule).unwrap();
            let want = dual_example_closed(&x, &v).unwrap();
            assert!(got.sub(&want).norm() < 1e-8 * want.norm(), "{x:?}");
        }
    }
}
