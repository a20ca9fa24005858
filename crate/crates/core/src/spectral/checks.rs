use super::{ft_grid, Direction, SpectralField};
use crate::error::{Error, Result};
use crate::exterior::{binomial, QuadraticOperator};
use crate::fields::{sample_to_grid, AnalyticForm, FormField, GaussianForm, GridField, GridSpec, Polynomial};
use crate::geometry::{gauss_legendre_on, sphere_rule, sphere_volume};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub name: String,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwineReport {
    pub identities: Vec<IdentityResidual>,
}

impl IntertwineReport {
    pub fn max_residual(&self) -> f64 {
        self.identities.iter().fold(0.0, |m, r| m.max(r.residual))
    }
}

fn sampled_ft(f: &GaussianForm, grid: &GridSpec) -> Result<SpectralField> {
    Ok(ft_grid(&sample_to_grid(f, grid)?, Direction::Forward))
}

/// Checks how `F` intertwines `d`, `δ` with `d|x|²∧`, `·∨d|x|²`, and the two
/// symbol identities for `dδ` and `δd`.
///
/// The left sides use the exact derivatives of `phi`, the right sides grid
/// transforms and pointwise symbols, so the two routes share only sampling.
/// Identities that need `d` on top-degree forms or `δ` on functions are skipped.
pub fn intertwine_check(phi: &GaussianForm, grid: &GridSpec) -> Result<IntertwineReport> {
    let n = phi.n();
    let p = phi.degree();
    if grid.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: grid.n });
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let f_phi = sampled_ft(phi, grid)?;
    let mut out = Vec::new();
    let mut push = |name: &str, residual: f64| {
        out.push(IdentityResidual {
            name: name.to_string(),
            residual,
        })
    };
    if p < n {
        let lhs = sampled_ft(&phi.exterior_derivative()?, grid)?;
        let rhs = f_phi.wedge_coordinate(two_pi_i, false)?;
        push("F(dφ) = iπ d|ξ|²∧Fφ", lhs.rel_l2_error(&rhs)?);
        let lhs = f_phi.d()?;
        let rhs = sampled_ft(&phi.wedge_position()?, grid)?.scale(-two_pi_i);
        push("d(Fφ) = −iπ F(d|x|²∧φ)", lhs.rel_l2_error(&rhs)?);
    }
    if p > 0 {
        let lhs = sampled_ft(&phi.divergence()?, grid)?;
        let rhs = f_phi.vee_coordinate(two_pi_i, false)?;
        push("F(δφ) = iπ Fφ∨d|ξ|²", lhs.rel_l2_error(&rhs)?);
        let lhs = f_phi.delta()?;
        let rhs = sampled_ft(&phi.vee_position()?, grid)?.scale(-two_pi_i);
        push("δ(Fφ) = −iπ F(φ∨d|x|²)", lhs.rel_l2_error(&rhs)?);
    }
    let quad = QuadraticOperator::r2_pi(n, p);
    let dim = quad.dim();
    let symbol = |phi_part: bool| {
        let quad = &quad;
        move |xi: &[f64], m: &mut [f64]| {
            quad.eval_into(xi, m);
            let r2: f64 = xi.iter().map(|t| t * t).sum();
            for i in 0..dim {
                for j in 0..dim {
                    let v = m[i * dim + j];
                    let id = if i == j { r2 } else { 0.0 };
                    m[i * dim + j] = -4.0 * PI * PI * if phi_part { id - v } else { v };
                }
            }
        }
    };
    let d_delta = if p > 0 && p <= n {
        sample_to_grid(&phi.divergence()?.exterior_derivative()?, grid)?
    } else {
        GridField::zeros(grid.clone(), p)
    };
    let rhs = f_phi.apply_symbol(p, symbol(true))?.ft(Direction::Inverse).real_part();
    push("dδ = −4π² F⁻¹ r²Φ F", d_delta.rel_l2_error(&rhs)?);
    let delta_d = if p < n {
        sample_to_grid(&phi.exterior_derivative()?.divergence()?, grid)?
    } else {
        GridField::zeros(grid.clone(), p)
    };
    let rhs = f_phi.apply_symbol(p, symbol(false))?.ft(Direction::Inverse).real_part();
    push("δd = −4π² F⁻¹ r²Π F", delta_d.rel_l2_error(&rhs)?);
    Ok(IntertwineReport { identities: out })
}

/// `g(x) = e^{-π xᵀAx}` with `A` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct AnisotropicGaussian {
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    det: f64,
    min_eig: f64,
    max_eig: f64,
}

impl AnisotropicGaussian {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || (&a - a.transpose()).amax() > 1e-12 * a.amax() {
            return Err(Error::InvalidArgument("A must be symmetric".into()));
        }
        let eig = a.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::InvalidArgument("A must be positive definite".into()));
        }
        let max_eig = eig.eigenvalues.max();
        let det = eig.eigenvalues.product();
        let a_inv = a.clone().try_inverse().expect("positive definite");
        Ok(Self {
            a,
            a_inv,
            det,
            min_eig,
            max_eig,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    fn quad(m: &DMatrix<f64>, x: &[f64]) -> f64 {
        let n = x.len();
        (0..n).map(|i| (0..n).map(|j| x[i] * m[(i, j)] * x[j]).sum::<f64>()).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (-PI * Self::quad(&self.a, x)).exp()
    }

    /// `F(g)(ξ) = det(A)^{-1/2} e^{-π ξᵀA⁻¹ξ}`.
    pub fn ft(&self, xi: &[f64]) -> f64 {
        (-PI * Self::quad(&self.a_inv, xi)).exp() / self.det.sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SteinReport {
    pub d: u32,
    pub k: usize,
    /// `∫ F(g) r^{-d-k} h`
    pub lhs: f64,
    /// `i^d (|S^{d+k-1}|/|S^{d+k'-1}|) ∫ g r^{-d-k'} h`
    pub rhs: f64,
    /// `|lhs − rhs| / ∫ |F(g)| r^{-d-k} |h|`
    pub residual: f64,
}

/// `∫ r^{-d-s} h(x) G(x) dx` and the same with `|h G|`, in polar coordinates.
fn polar_pairing(h: &Polynomial, s: usize, g: impl Fn(&[f64]) -> f64, cutoff: f64) -> Result<(f64, f64)> {
    let n = h.n();
    let rule = sphere_rule(n, 48)?;
    let panels = 16;
    let mut signed = 0.0;
    let mut abs = 0.0;
    let mut x = vec![0.0; n];
    for j in 0..panels {
        let a = cutoff * j as f64 / panels as f64;
        let b = cutoff * (j + 1) as f64 / panels as f64;
        let (rs, ws) = gauss_legendre_on(16, a, b);
        for (r, w) in rs.iter().zip(&ws) {
            // r^{n-1} r^{-d-s} r^d from the homogeneity of h
            let radial = w * r.powi(n as i32 - 1 - s as i32);
            for (omega, wo) in rule.points.iter().zip(&rule.weights) {
                for i in 0..n {
                    x[i] = r * omega[i];
                }
                let v = h.eval(omega) * g(&x);
                signed += radial * wo * v;
                abs += radial * wo * v.abs();
            }
        }
    }
    Ok((signed, abs))
}

/// Spot check of `F(r^{-d-k} h) = i^d (|S^{d+k-1}|/|S^{d+k'-1}|) r^{-d-k'} h`
/// for a harmonic `h` homogeneous of degree `d ∈ {0, 2}`, paired against `g`.
pub fn stein_check(d: u32, h: &Polynomial, k: usize, g: &AnisotropicGaussian) -> Result<SteinReport> {
    let n = h.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.n() });
    }
    if d != 0 && d != 2 {
        return Err(Error::InvalidArgument(format!("degree {d} is outside {{0, 2}}")));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 0 < k < n, got k = {k}")));
    }
    let homogeneous = h.is_zero() || h.homogeneous_degree() == Some(d);
    if !homogeneous || !h.is_harmonic() {
        return Err(Error::NotHarmonic);
    }
    let kp = n - k;
    // g and F(g) fall below 1e-16 of their peak here
    let cutoff = (16.0 * 10f64.ln() / (PI * g.min_eig.min(1.0 / g.max_eig))).sqrt();
    let (lhs, norm) = polar_pairing(h, k, |x| g.ft(x), cutoff)?;
    let (raw, _) = polar_pairing(h, kp, |x| g.eval(x), cutoff)?;
    let sign = if d % 4 == 0 { 1.0 } else { -1.0 };
    let dk = d as usize;
    let rhs = sign * sphere_volume(dk + k)? / sphere_volume(dk + kp)? * raw;
    let residual = if norm > 0.0 { (lhs - rhs).abs() / norm } else { (lhs - rhs).abs() };
    Ok(SteinReport { d, k, lhs, rhs, residual })
}

/// `T(x) = e^{-λ|x|²} M` with `M` acting on `Λ^p R^n`.
#[derive(Clone, Debug)]
pub struct GaussianOperatorField {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub matrix: DMatrix<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductRuleReport {
    /// `‖F(T)·F(α) − F(T⋆α)‖ / ‖F(T⋆α)‖` on the frequency grid
    pub product_residual: f64,
    /// `‖F⁻¹(F(T)·F(α)) − T⋆α‖ / ‖T⋆α‖` with 2× zero padding
    pub convolution_residual: f64,
}

/// Compares the grid product `F(T)·F(α)` with the transform of the exact
/// convolution `T⋆α = (π/(λ+μ))^{n/2} e^{-λμ|x−c|²/(λ+μ)} M a` for
/// `α = e^{-μ|x−c|²} a`.
pub fn product_rule_check(t: &GaussianOperatorField, alpha: &GaussianForm, grid: &GridSpec) -> Result<ProductRuleReport> {
    let n = alpha.n();
    let p = alpha.degree();
    let c = binomial(n, p);
    if t.n != n || t.p != p || grid.n != n || t.matrix.nrows() != c || t.matrix.ncols() != c {
        return Err(Error::InvalidArgument("operator field, form and grid disagree in shape".into()));
    }
    if alpha.polynomials().iter().any(|q| q.degree().unwrap_or(0) > 0) {
        return Err(Error::InvalidArgument("the form must have constant amplitude".into()));
    }
    let origin = vec![0.0; n];
    let a: Vec<f64> = alpha.polynomials().iter().map(|q| q.eval(&origin)).collect();
    let ma: Vec<f64> = (0..c).map(|i| (0..c).map(|j| t.matrix[(i, j)] * a[j]).sum()).collect();
    let (lam, mu) = (t.lambda, alpha.lambda());
    let amp = (PI / (lam + mu)).powf(n as f64 / 2.0);
    let rate = lam * mu / (lam + mu);
    let center = alpha.center().to_vec();
    let exact = AnalyticForm::new(n, p, move |x: &[f64], o: &mut [f64]| {
        let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
        let e = amp * (-rate * r2).exp();
        for (oi, v) in o.iter_mut().zip(&ma) {
            *oi = e * v;
        }
    });
    let lambda_t = t.lambda;
    let scalar = AnalyticForm::new(n, 0, move |x: &[f64], o: &mut [f64]| {
        o[0] = (-lambda_t * x.iter().map(|v| v * v).sum::<f64>()).exp();
    });
    let product = |g: &GridSpec| -> Result<SpectralField> {
        let ft_t = ft_grid(&sample_to_grid(&scalar, g)?, Direction::Forward);
        let ft_a = ft_grid(&sample_to_grid(alpha, g)?, Direction::Forward);
        let mut out = SpectralField::zeros(ft_a.grid().clone(), p);
        let data = out.data_mut();
        for flat in 0..g.len() {
            let s = ft_t.data()[flat];
            let src = ft_a.value(flat);
            for i in 0..c {
                data[flat * c + i] = s * (0..c).map(|j| src[j] * t.matrix[(i, j)]).sum::<Complex64>();
            }
        }
        Ok(out)
    };
    let reference = ft_grid(&sample_to_grid(&exact, grid)?, Direction::Forward);
    let product_residual = product(grid)?.rel_l2_error(&reference)?;
    let wide = grid.extended(2);
    let conv = product(&wide)?.ft(Direction::Inverse).real_part().crop(grid)?;
    let convolution_residual = conv.rel_l2_error(&sample_to_grid(&exact, grid)?)?;
    Ok(ProductRuleReport {
        product_residual,
        convolution_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Multivector;

    fn phi_1form() -> GaussianForm {
        let comps = vec![
            Polynomial::var(3, 1).add(&Polynomial::constant(3, 0.5)),
            Polynomial::constant(3, -0.3),
            Polynomial::var(3, 0).mul(&Polynomial::var(3, 2)),
        ];
        GaussianForm::new(1, 1.0, vec![0.3, -0.2, 0.1], comps).unwrap()
    }

    #[test]
    fn six_identities_on_a_one_form() {
        let grid = GridSpec::new(3, 8.0, 64).unwrap();
        let report = intertwine_check(&phi_1form(), &grid).unwrap();
        assert_eq!(report.identities.len(), 6);
        for r in &report.identities {
            assert!(r.residual < 1e-6, "{}: {}", r.name, r.residual);
        }
    }

    #[test]
    fn functions_and_zero() {
        let grid = GridSpec::new(3, 6.0, 32).unwrap();
        let f = GaussianForm::constant(1.0, &Multivector::scalar(3, 1.0)).unwrap();
        let report = intertwine_check(&f, &grid).unwrap();
        assert_eq!(report.identities.len(), 4);
        assert!(report.max_residual() < 1e-6);
        let zero = GaussianForm::constant(1.0, &Multivector::vector(&[0.0; 3])).unwrap();
        assert_eq!(intertwine_check(&zero, &grid).unwrap().max_residual(), 0.0);
    }

    fn rotated_a() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[1.2, 0.3, -0.1, 0.3, 0.8, 0.2, -0.1, 0.2, 1.5])
    }

    #[test]
    fn stein_examples() {
        let g = AnisotropicGaussian::new(rotated_a()).unwrap();
        let one = Polynomial::constant(3, 1.0);
        let r = stein_check(0, &one, 2, &g).unwrap();
        assert!(r.residual < 1e-8, "{r:?}");
        // the ratio for d = 0, k = 2 is |S¹|/|S⁰| = π
        assert!((sphere_volume(2).unwrap() / sphere_volume(1).unwrap() - PI).abs() < 1e-15);
        let x1x2 = Polynomial::var(3, 0).mul(&Polynomial::var(3, 1));
        let r = stein_check(2, &x1x2, 1, &g).unwrap();
        assert!(r.residual < 1e-8 && r.lhs.abs() > 1e-3, "{r:?}");
        // rhs carries i² = −1, so agreement means the unweighted pairings differ in sign
        assert!(r.lhs * r.rhs > 0.0);
        let diag = AnisotropicGaussian::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 0.5]))).unwrap();
        let r = stein_check(2, &x1x2, 2, &diag).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        let not_harmonic = Polynomial::var(3, 0).mul(&Polynomial::var(3, 0));
        assert!(matches!(stein_check(2, &not_harmonic, 1, &g), Err(Error::NotHarmonic)));
    }

    #[test]
    fn product_rule() {
        let grid = GridSpec::new(3, 6.0, 32).unwrap();
        let rot = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let t = GaussianOperatorField { n: 3, p: 1, lambda: 1.5, matrix: rot };
        let alpha = GaussianForm::shifted(1.0, &Multivector::vector(&[0.2, 1.0, -0.4]), vec![0.3, 0.0, -0.2]).unwrap();
        let r = product_rule_check(&t, &alpha, &grid).unwrap();
        assert!(r.product_residual < 1e-6 && r.convolution_residual < 1e-6, "{r:?}");
        let zero = GaussianForm::constant(1.0, &Multivector::vector(&[0.0; 3])).unwrap();
        let r = product_rule_check(&t, &zero, &grid).unwrap();
        assert_eq!(r.product_residual, 0.0);
        let t2 = GaussianOperatorField { n: 3, p: 2, lambda: 1.0, matrix: DMatrix::identity(3, 3) };
        assert!(product_rule_check(&t2, &alpha, &grid).is_err());
    }
}
