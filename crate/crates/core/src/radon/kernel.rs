use super::{forward, PlaneQuadrature};
use crate::error::{Error, Result};
use crate::exterior::{binomial, Multivector, QuadraticOperator};
use crate::fields::{seminorm_profile, FormField};
use crate::geometry::{gauss_legendre_on, sphere_rule, sphere_volume, Frame};
use serde::Serialize;

/// The constant `c` in `R*_k R_k α = c · (r^{-k}Π) ⋆ α`:
/// `|S^{k'-1}| C(k,p) / (|S^{n-1}| C(n-1,p))`.
pub fn convolution_constant(n: usize, k: usize, p: usize) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 0 < k < n, got k = {k}, n = {n}")));
    }
    if p > k {
        return Err(Error::DegreeOutOfRange { degree: p, n: k });
    }
    let kp = n - k;
    Ok(sphere_volume(kp)? * binomial(k, p) as f64 / (sphere_volume(n)? * binomial(n - 1, p) as f64))
}

/// Polar quadrature for `∫ |y|^{-k} Π_y α(x − y) dy`.
#[derive(Clone, Debug)]
pub struct KernelQuadrature {
    pub sphere_order: usize,
    /// Radial panel length.
    pub panel: f64,
    pub panel_points: usize,
    /// Extra radius beyond `|x − focus|` where the integrand is negligible.
    pub reach: f64,
    /// Where the integrand concentrates; the sphere rule's pole is aimed at it.
    pub focus: Vec<f64>,
}

impl KernelQuadrature {
    /// Settings for `e^{-λ|x−c|²}`-type inputs, absolute accuracy about `tol`
    /// relative to the amplitude.
    pub fn for_gaussian(lambda: f64, focus: Vec<f64>, tol: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidArgument("need lambda > 0 and 0 < tol < 1".into()));
        }
        let width = 1.0 / lambda.sqrt();
        Ok(Self {
            sphere_order: 64,
            panel: 0.5 * width,
            panel_points: 12,
            reach: (-tol.ln()).sqrt() * width,
            focus,
        })
    }
}

/// `((r^{-k}Π) ⋆ α)(x) = ∫_0^∞ r^{n-1-k} ∫_{S^{n-1}} Π_ω α(x − rω) dω dr`.
pub fn convolve_kernel(alpha: &dyn FormField, k: usize, x: &[f64], kq: &KernelQuadrature) -> Result<Multivector> {
    let n = alpha.n();
    if k >= n {
        return Err(Error::InvalidArgument(format!("kernel r^-{k} is not integrable in R^{n}")));
    }
    if x.len() != n || kq.focus.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let p = alpha.degree();
    let c = binomial(n, p);
    let rel: Vec<f64> = x.iter().zip(&kq.focus).map(|(a, b)| a - b).collect();
    let dist = rel.iter().map(|v| v * v).sum::<f64>().sqrt();
    let base = sphere_rule(n, kq.sphere_order)?;
    let rule = if dist > 0.0 {
        let axis: Vec<f64> = rel.iter().map(|v| v / dist).collect();
        base.rotated_to(&axis)?
    } else {
        base
    };
    let radius = dist + kq.reach;
    let panels = (radius / kq.panel).ceil().max(1.0) as usize;
    let mut rs = Vec::new();
    let mut rw = Vec::new();
    for j in 0..panels {
        let a = radius * j as f64 / panels as f64;
        let b = radius * (j + 1) as f64 / panels as f64;
        let (nodes, weights) = gauss_legendre_on(kq.panel_points, a, b);
        for (r, w) in nodes.into_iter().zip(weights) {
            rw.push(w * r.powi((n - 1 - k) as i32));
            rs.push(r);
        }
    }
    let quad = QuadraticOperator::r2_pi(n, p);
    let mut pi = vec![0.0; c * c];
    let mut radial = vec![0.0; c];
    let mut buf = vec![0.0; c];
    let mut y = vec![0.0; n];
    let mut out = vec![0.0; c];
    for (omega, w) in rule.points.iter().zip(&rule.weights) {
        radial.iter_mut().for_each(|v| *v = 0.0);
        for (r, wr) in rs.iter().zip(&rw) {
            for i in 0..n {
                y[i] = x[i] - r * omega[i];
            }
            alpha.eval_into(&y, &mut buf);
            for (a, b) in radial.iter_mut().zip(&buf) {
                *a += wr * b;
            }
        }
        quad.eval_into(omega, &mut pi);
        for (i, o) in out.iter_mut().enumerate() {
            *o += w * (0..c).map(|j| pi[i * c + j] * radial[j]).sum::<f64>();
        }
    }
    Multivector::from_coeffs(n, p, out)
}

/// Both sides of the decay bound `‖R_kα(P,·)‖_{s−k'} < 4|S^{k'−1}| ‖α‖_s`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub s: f64,
    pub radii: Vec<f64>,
    /// `|ξ|^{s−k'} max |R_kα(P, ξ)|` per radius
    pub transform_profile: Vec<f64>,
    /// `|x|^s max |α(x)|` per radius
    pub form_profile: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Estimates both seminorms on spheres of the given radii (tail supremum over
/// the upper half of the radii, as in [`crate::fields::seminorm_estimate`]).
pub fn decay_check(alpha: &dyn FormField, frame: &Frame, s: f64, q: &PlaneQuadrature, radii: &[f64]) -> Result<DecayReport> {
    let n = alpha.n();
    if s < n as f64 {
        return Err(Error::InvalidArgument(format!("decay exponent s = {s} is below n = {n}")));
    }
    let k = frame.k();
    let kp = n - k;
    let form_profile = seminorm_profile(alpha, s, radii)?;
    let dirs: Vec<Vec<f64>> = if k >= 2 {
        sphere_rule(k, 12)?.points
    } else {
        vec![vec![1.0], vec![-1.0]]
    };
    let transform_profile = radii
        .iter()
        .map(|&r| {
            let mut best: f64 = 0.0;
            for d in &dirs {
                let u: Vec<f64> = d.iter().map(|v| v * r).collect();
                let v = forward(alpha, frame, &frame.from_local(&u), q)?;
                best = best.max(r.powf(s - kp as f64) * v.norm());
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let tail = |p: &[f64]| p[p.len() / 2..].iter().copied().fold(0.0, f64::max);
    let lhs = tail(&transform_profile);
    let rhs = 4.0 * sphere_volume(kp)? * tail(&form_profile);
    Ok(DecayReport {
        s,
        radii: radii.to_vec(),
        transform_profile,
        form_profile,
        lhs,
        rhs,
        holds: lhs < rhs || (lhs == 0.0 && rhs == 0.0),
    })
}
