use super::{Direction, SpectralField};
use crate::error::{Error, Result};
use crate::exterior::{binomial, pi_phi, OperatorFieldSample, QuadraticOperator};
use crate::fields::GridField;
use crate::geometry::{gauss_legendre_on, sphere_volume};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_nkp(n: usize, k: usize, p: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 0 < k < n, got k = {k}, n = {n}")));
    }
    if p > k {
        return Err(Error::DegreeOutOfRange { degree: p, n: k });
    }
    Ok(())
}

fn check_invertible(n: usize, k: usize, p: usize) -> Result<()> {
    check_nkp(n, k, p)?;
    if p == k {
        return Err(Error::InvalidArgument(format!("the multiplier is singular for p = k = {k}")));
    }
    Ok(())
}

/// `F(r^{-k}Π)(ξ) = (1/k)(|S^{k-1}|/|S^{k'-1}|)((k−p)Π_ξ + (n−p)Φ_ξ)/|ξ|^{k'}`.
pub fn kernel_ft(n: usize, k: usize, p: usize, xi: &[f64]) -> Result<OperatorFieldSample> {
    check_nkp(n, k, p)?;
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    let kp = n - k;
    let (pi, phi) = pi_phi(xi, p)?;
    let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
    let c = sphere_volume(k)? / (k as f64 * sphere_volume(kp)? * r.powi(kp as i32));
    let m = (pi.matrix * (k - p) as f64 + phi.matrix * (n - p) as f64) * c;
    OperatorFieldSample::new(n, p, m)
}

/// Pointwise inverse of [`kernel_ft`]; the zero operator at `ξ = 0`.
pub fn inverse_multiplier(n: usize, k: usize, p: usize, xi: &[f64]) -> Result<OperatorFieldSample> {
    check_invertible(n, k, p)?;
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    if xi.iter().all(|&t| t == 0.0) {
        let c = binomial(n, p);
        return OperatorFieldSample::new(n, p, DMatrix::zeros(c, c));
    }
    let kp = n - k;
    let (pi, phi) = pi_phi(xi, p)?;
    let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
    let c = k as f64 * sphere_volume(kp)? * r.powi(kp as i32) / sphere_volume(k)?;
    let m = (pi.matrix / (k - p) as f64 + phi.matrix / (n - p) as f64) * c;
    OperatorFieldSample::new(n, p, m)
}

/// `C` in `α = C F^{-1}(|ξ|^{k'}(Π_ξ/(k−p) + Φ_ξ/(n−p)) F(R*_k R_k α))`:
/// `k |S^{n-1}| C(n−1,p) / (|S^{k-1}| C(k,p))`.
pub fn inversion_constant(n: usize, k: usize, p: usize) -> Result<f64> {
    check_invertible(n, k, p)?;
    Ok(k as f64 * sphere_volume(n)? * binomial(n - 1, p) as f64 / (sphere_volume(k)? * binomial(k, p) as f64))
}

/// Mean of `|t|^{-s}` over the cube `[-1/2, 1/2]^n`, `0 ≤ s < n`.
///
/// Splits the cube into `2n` pyramids with apex at the origin; the radial
/// factor integrates to `1/(n−s)` and the face integral is smooth.
pub fn cube_mean_inverse_power(n: usize, s: f64) -> Result<f64> {
    if n == 0 || !(0.0..n as f64).contains(&s) {
        return Err(Error::InvalidArgument(format!("need 0 <= s < n, got s = {s}, n = {n}")));
    }
    let (us, ws) = gauss_legendre_on(24, -0.5, 0.5);
    let m = n - 1;
    let total = us.len().pow(m as u32);
    let mut face = 0.0;
    for flat in 0..total {
        let mut f = flat;
        let mut r2 = 0.25;
        let mut w = 1.0;
        for _ in 0..m {
            let j = f % us.len();
            f /= us.len();
            r2 += us[j] * us[j];
            w *= ws[j];
        }
        face += w * r2.powf(-s / 2.0);
    }
    Ok(n as f64 / (n as f64 - s) * face)
}

/// Average of [`kernel_ft`] over the frequency cell `[-h/2, h/2]^n`; cubic
/// symmetry makes it a multiple of the identity, and this is the multiple.
pub fn kernel_ft_cell_mean(n: usize, k: usize, p: usize, spacing: f64) -> Result<f64> {
    check_nkp(n, k, p)?;
    let kp = n - k;
    let mean = cube_mean_inverse_power(n, kp as f64)? * spacing.powi(-(kp as i32));
    Ok(sphere_volume(k)? / sphere_volume(kp)? * (n - p) as f64 / n as f64 * mean)
}

#[derive(Clone, Debug)]
pub struct InvertOptions {
    /// Zero-padding factor applied before the multiplier (1 = none).
    pub pad: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self { pad: 1 }
    }
}

fn padded(r: &GridField, pad: usize) -> Result<GridField> {
    if pad == 0 {
        return Err(Error::InvalidArgument("padding factor must be at least 1".into()));
    }
    if pad == 1 {
        return Ok(r.clone());
    }
    r.zero_pad(&r.grid().extended(pad))
}

/// Recovers `α` from grid samples of `R*_k R_k α` by the Fourier multiplier.
pub fn invert(r: &GridField, k: usize, opts: &InvertOptions) -> Result<GridField> {
    let n = r.grid().n;
    apply_inverse_symbol(r, k, inversion_constant(n, k, r.degree())?, opts)
}

/// `scale · F^{-1}(|ξ|^{k'}(Π_ξ/(k−p) + Φ_ξ/(n−p)) F(f))`, zero at `ξ = 0`.
pub fn apply_inverse_symbol(f: &GridField, k: usize, scale: f64, opts: &InvertOptions) -> Result<GridField> {
    let n = f.grid().n;
    let p = f.degree();
    check_invertible(n, k, p)?;
    let kp = n - k;
    let work = padded(f, opts.pad)?;
    let quad = QuadraticOperator::r2_pi(n, p);
    let dim = quad.dim();
    let (a, b) = (1.0 / (k - p) as f64, 1.0 / (n - p) as f64);
    let spec = SpectralField::from_real(&work).ft(Direction::Forward);
    let out = spec.apply_symbol(p, |xi, m| {
        let r2: f64 = xi.iter().map(|t| t * t).sum();
        if r2 == 0.0 {
            m.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        // |ξ|^{k'-2} (a r²Π + b (r²I − r²Π))
        quad.eval_into(xi, m);
        let s = scale * r2.powf((kp as f64 - 2.0) / 2.0);
        for i in 0..dim {
            for j in 0..dim {
                let rp = m[i * dim + j];
                let id = if i == j { r2 } else { 0.0 };
                m[i * dim + j] = s * (a * rp + b * (id - rp));
            }
        }
    })?;
    let back = out.ft(Direction::Inverse).real_part();
    if opts.pad == 1 {
        Ok(back)
    } else {
        back.crop(f.grid())
    }
}

/// The even-codimension formula `C(−1/4π²)^l((δd)^l/(k−p) + (dδ)^l/(n−p))`
/// with `k' = 2l`.
///
/// `d` and `δ` are composed as frequency-space symbols before transforming
/// back, so the unpaired Nyquist node gets `ξ_i²` like any other node. A lone
/// first derivative has to drop that node to stay real, and dropping it here
/// would cut the boundary layer of slowly decaying data.
pub fn invert_even(r: &GridField, k: usize, opts: &InvertOptions) -> Result<GridField> {
    let n = r.grid().n;
    let p = r.degree();
    let c = inversion_constant(n, k, p)?;
    let kp = n - k;
    if kp % 2 != 0 {
        return Err(Error::InvalidArgument(format!("codimension {kp} is odd")));
    }
    let l = kp / 2;
    let s = Complex64::new(0.0, 2.0 * PI);
    let spec = SpectralField::from_real(&padded(r, opts.pad)?).ft(Direction::Forward);
    let mut pi_part = spec.clone();
    for _ in 0..l {
        pi_part = pi_part.wedge_coordinate(s, false)?.vee_coordinate(s, false)?;
    }
    let scale = c * (-1.0 / (4.0 * PI * PI)).powi(l as i32);
    let mut total = pi_part.scale((scale / (k - p) as f64).into());
    if p > 0 {
        let mut phi_part = spec;
        for _ in 0..l {
            phi_part = phi_part.vee_coordinate(s, false)?.wedge_coordinate(s, false)?;
        }
        total = total.add(&phi_part.scale((scale / (n - p) as f64).into()))?;
    }
    let back = total.ft(Direction::Inverse).real_part();
    if opts.pad == 1 {
        Ok(back)
    } else {
        back.crop(r.grid())
    }
}
