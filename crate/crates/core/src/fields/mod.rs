//! Form fields on `R^n`: analytic callables, Gaussian-class families,
//! `k`-planar pullbacks and grid samples.

mod grid;
mod polynomial;

pub use grid::{GridField, GridSpec, ZeroExtended};
pub(crate) use grid::interpolate_cubic;
pub use polynomial::Polynomial;

use crate::error::{Error, Result};
use crate::exterior::{binomial, induced_map_rect, vee_vector_table, wedge_vector_table, Multivector};
use crate::geometry::{sphere_rule, Frame};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A `p`-form on `R^n` that can be evaluated anywhere.
pub trait FormField: Sync {
    fn n(&self) -> usize;
    fn degree(&self) -> usize;
    /// Writes the `C(n,p)` blade coefficients at `x` into `out`.
    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    fn components(&self) -> usize {
        binomial(self.n(), self.degree())
    }

    fn eval(&self, x: &[f64]) -> Multivector {
        let mut out = vec![0.0; self.components()];
        self.eval_into(x, &mut out);
        Multivector::from_coeffs(self.n(), self.degree(), out).expect("field returned non-finite values")
    }
}

impl<T: FormField + ?Sized> FormField for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval_into(x, out)
    }
}

impl<T: FormField + ?Sized + Send> FormField for Box<T> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).eval_into(x, out)
    }
}

/// A form given by a closure writing blade coefficients.
pub struct AnalyticForm<F> {
    n: usize,
    p: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> AnalyticForm<F> {
    pub fn new(n: usize, p: usize, f: F) -> Self {
        Self { n, p, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FormField for AnalyticForm<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.p
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// `e^{-λ|x-c|²} Σ_λ P_λ(x-c) e_λ` with polynomial coefficients `P_λ`.
///
/// Closed under `∂_i`, `d`, `δ` and multiplication by coordinates, so every
/// derivative used in the tests is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianForm {
    n: usize,
    p: usize,
    lambda: f64,
    center: Vec<f64>,
    components: Vec<Polynomial>,
}

impl GaussianForm {
    pub fn new(p: usize, lambda: f64, center: Vec<f64>, components: Vec<Polynomial>) -> Result<Self> {
        let n = center.len();
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("decay rate must be positive, got {lambda}")));
        }
        if p > n {
            return Err(Error::DegreeOutOfRange { degree: p, n });
        }
        if components.len() != binomial(n, p) || components.iter().any(|c| c.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: binomial(n, p),
                got: components.len(),
            });
        }
        Ok(Self {
            n,
            p,
            lambda,
            center,
            components,
        })
    }

    /// `e^{-λ|x|²} a`.
    pub fn constant(lambda: f64, a: &Multivector) -> Result<Self> {
        Self::shifted(lambda, a, vec![0.0; a.n()])
    }

    /// `e^{-λ|x-c|²} a`.
    pub fn shifted(lambda: f64, a: &Multivector, center: Vec<f64>) -> Result<Self> {
        let n = a.n();
        let comps = a.coeffs().iter().map(|&c| Polynomial::constant(n, c)).collect();
        Self::new(a.degree(), lambda, center, comps)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn polynomials(&self) -> &[Polynomial] {
        &self.components
    }

    fn with_components(&self, p: usize, components: Vec<Polynomial>) -> Self {
        Self {
            n: self.n,
            p,
            lambda: self.lambda,
            center: self.center.clone(),
            components,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with_components(self.p, self.components.iter().map(|c| c.scale(s)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lambda != other.lambda || self.center != other.center || self.p != other.p {
            return Err(Error::InvalidArgument("Gaussian forms must share decay, center and degree".into()));
        }
        Ok(self.with_components(
            self.p,
            self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect(),
        ))
    }

    /// `∂α/∂x_i`
    pub fn partial(&self, i: usize) -> Self {
        let comps = self
            .components
            .iter()
            .map(|c| c.derivative(i).add(&c.mul_var(i).scale(-2.0 * self.lambda)))
            .collect();
        self.with_components(self.p, comps)
    }

    fn apply_table(&self, table: &[Vec<crate::exterior::BasisTerm>], parts: &[Self], out_p: usize) -> Self {
        let mut comps = vec![Polynomial::zero(self.n); binomial(self.n, out_p)];
        for (i, terms) in table.iter().enumerate() {
            for t in terms {
                comps[t.dst] = comps[t.dst].add(&parts[i].components[t.src].scale(t.sign as f64));
            }
        }
        self.with_components(out_p, comps)
    }

    /// `dα = Σ dx_i ∧ ∂α/∂x_i`
    pub fn exterior_derivative(&self) -> Result<Self> {
        if self.p + 1 > self.n {
            return Err(Error::DegreeOutOfRange { degree: self.p + 1, n: self.n });
        }
        let parts: Vec<Self> = (0..self.n).map(|i| self.partial(i)).collect();
        Ok(self.apply_table(&wedge_vector_table(self.n, self.p), &parts, self.p + 1))
    }

    /// `δα = Σ ∂α/∂x_i ∨ dx_i`
    pub fn divergence(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(Error::DegreeOutOfRange { degree: 0, n: self.n });
        }
        let parts: Vec<Self> = (0..self.n).map(|i| self.partial(i)).collect();
        Ok(self.apply_table(&vee_vector_table(self.n, self.p), &parts, self.p - 1))
    }

    pub fn laplacian(&self) -> Self {
        let mut acc = self.scale(0.0);
        for i in 0..self.n {
            acc = acc.add(&self.partial(i).partial(i)).expect("same family");
        }
        acc
    }

    /// Multiplication by the coordinate `x_i = y_i + c_i`.
    fn times_coordinate(&self, i: usize) -> Self {
        let c = self.center[i];
        self.with_components(
            self.p,
            self.components.iter().map(|q| q.mul_var(i).add(&q.scale(c))).collect(),
        )
    }

    /// `x ∧ α`
    pub fn wedge_position(&self) -> Result<Self> {
        if self.p + 1 > self.n {
            return Err(Error::DegreeOutOfRange { degree: self.p + 1, n: self.n });
        }
        let parts: Vec<Self> = (0..self.n).map(|i| self.times_coordinate(i)).collect();
        Ok(self.apply_table(&wedge_vector_table(self.n, self.p), &parts, self.p + 1))
    }

    /// `α ∨ x`
    pub fn vee_position(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(Error::DegreeOutOfRange { degree: 0, n: self.n });
        }
        let parts: Vec<Self> = (0..self.n).map(|i| self.times_coordinate(i)).collect();
        Ok(self.apply_table(&vee_vector_table(self.n, self.p), &parts, self.p - 1))
    }
}

impl FormField for GaussianForm {
    fn n(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.p
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let mut y = [0.0; 16];
        let y = &mut y[..self.n];
        let mut r2 = 0.0;
        for i in 0..self.n {
            y[i] = x[i] - self.center[i];
            r2 += y[i] * y[i];
        }
        let g = (-self.lambda * r2).exp();
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = if g == 0.0 { 0.0 } else { g * c.eval(y) };
        }
    }
}

/// The pullback `x ↦ Λ^p(B) ψ(Bᵀx)` of a form `ψ` on the plane `P`.
pub struct KPlanarForm<F> {
    frame: Frame,
    p: usize,
    psi: F,
    push: DMatrix<f64>,
}

/// Builds the `k`-planar form determined by `ψ`, a `p`-form on `R^k ≅ P`.
pub fn k_planar<F: FormField>(frame: &Frame, psi: F) -> Result<KPlanarForm<F>> {
    let p = psi.degree();
    if psi.n() != frame.k() {
        return Err(Error::DimensionMismatch {
            expected: frame.k(),
            got: psi.n(),
        });
    }
    if p > frame.k() {
        return Err(Error::DegreeOutOfRange { degree: p, n: frame.k() });
    }
    Ok(KPlanarForm {
        frame: frame.clone(),
        p,
        push: induced_map_rect(frame.basis(), p),
        psi,
    })
}

impl<F: FormField> KPlanarForm<F> {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }
}

impl<F: FormField> FormField for KPlanarForm<F> {
    fn n(&self) -> usize {
        self.frame.n()
    }
    fn degree(&self) -> usize {
        self.p
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let u = self.frame.to_local(x);
        let mut v = vec![0.0; self.psi.components()];
        self.psi.eval_into(&u, &mut v);
        crate::exterior::operator_apply(&self.push, &v, out);
    }
}

/// Largest observed violations of the two `k`-planarity conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarityDefect {
    /// `max |α(x+η) − α(x)|` over sampled `η ∈ P'`
    pub translation: f64,
    /// `max |α(x) − α(x)|_P|`
    pub transverse: f64,
}

impl PlanarityDefect {
    pub fn holds(&self, tol: f64) -> bool {
        self.translation <= tol && self.transverse <= tol
    }
}

/// Tests both `k`-planarity conditions of `field` relative to `frame` at random points.
pub fn check_k_planar(field: &dyn FormField, frame: &Frame, trials: usize, seed: u64) -> Result<PlanarityDefect> {
    let n = frame.n();
    if field.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: field.n() });
    }
    let restrict = frame.restriction(field.degree())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defect = PlanarityDefect {
        translation: 0.0,
        transverse: 0.0,
    };
    for _ in 0..trials {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let eta: Vec<f64> = (0..n - frame.k()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let shift = frame.from_complement(&eta);
        let moved: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let a = field.eval(&x);
        let b = field.eval(&moved);
        defect.translation = defect.translation.max(a.sub(&b).norm());
        defect.transverse = defect.transverse.max(a.sub(&restrict.apply(&a)).norm());
    }
    Ok(defect)
}

const SEMINORM_DIRECTIONS_ORDER: usize = 12;

/// `max_{|x| = r} |x|^s |F(x)|` for each radius, over a fixed direction set.
pub fn seminorm_profile(field: &dyn FormField, s: f64, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("seminorm needs at least one radius".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("radii must be positive and increasing".into()));
    }
    let n = field.n();
    let dirs = if n >= 2 {
        sphere_rule(n, SEMINORM_DIRECTIONS_ORDER)?.points
    } else {
        vec![vec![1.0], vec![-1.0]]
    };
    let mut buf = vec![0.0; field.components()];
    Ok(radii
        .iter()
        .map(|&r| {
            dirs.iter()
                .map(|d| {
                    let x: Vec<f64> = d.iter().map(|v| v * r).collect();
                    field.eval_into(&x, &mut buf);
                    r.powf(s) * buf.iter().map(|v| v * v).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Estimate of `‖F‖_s = lim_{r→∞} sup_{|x|>r} |x|^s |F(x)|`: the largest
/// sampled value over the upper half of `radii`.
pub fn seminorm_estimate(field: &dyn FormField, s: f64, radii: &[f64]) -> Result<f64> {
    let profile = seminorm_profile(field, s, radii)?;
    Ok(profile[profile.len() / 2..].iter().copied().fold(0.0, f64::max))
}

/// Default memory cap for sampled grids: 2 GiB.
pub const DEFAULT_GRID_CAP: usize = 2 << 30;

pub fn sample_to_grid(field: &dyn FormField, grid: &GridSpec) -> Result<GridField> {
    sample_to_grid_capped(field, grid, DEFAULT_GRID_CAP)
}

/// Evaluates `field` at every grid node, refusing grids larger than `cap` bytes.
pub fn sample_to_grid_capped(field: &dyn FormField, grid: &GridSpec, cap: usize) -> Result<GridField> {
    if field.n() != grid.n {
        return Err(Error::DimensionMismatch {
            expected: grid.n,
            got: field.n(),
        });
    }
    let c = field.components();
    let bytes = grid.len().saturating_mul(c).saturating_mul(8);
    if bytes > cap {
        return Err(Error::MemoryCap { bytes, cap });
    }
    let mut data = vec![0.0; grid.len() * c];
    if c > 0 {
        data.par_chunks_mut(c).enumerate().for_each_init(
            || vec![0.0; grid.n],
            |x, (flat, out)| {
                grid.point(flat, x);
                field.eval_into(x, out);
            },
        );
    }
    GridField::from_data(*grid, field.degree(), data)
}
