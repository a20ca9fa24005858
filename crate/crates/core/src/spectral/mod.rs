//! Grid Fourier analysis for form fields.
//!
//! With `F(f)(ξ) = ∫ f(x) e^{-2πiξ·x} dx`, a field on the grid `x_j = -L + jh`
//! (`h = 2L/N`) transforms to the dual grid `ξ_m = (m - N/2)/(2L)`. Per axis the
//! value is `h (-1)^{m-N/2} DFT(f)[(m - N/2) mod N]`; the inverse direction
//! uses the same formula with the conjugate exponent.

mod checks;
mod kernel;

pub use checks::{
    intertwine_check, product_rule_check, stein_check, AnisotropicGaussian, GaussianOperatorField, IntertwineReport, ProductRuleReport,
    SteinReport,
};
pub use kernel::{
    apply_inverse_symbol, cube_mean_inverse_power, inverse_multiplier, inversion_constant, invert, invert_even, kernel_ft, kernel_ft_cell_mean, InvertOptions,
};

use crate::error::{Error, Result};
use crate::exterior::{binomial, vee_vector_table, wedge_vector_table};
use crate::fields::{GridField, GridSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Sign of the exponent: `Forward` is `e^{-2πiξ·x}`, `Inverse` is `e^{+2πiξ·x}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    /// `-1` for forward, `+1` for inverse.
    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            -1 => Ok(Self::Forward),
            1 => Ok(Self::Inverse),
            _ => Err(Error::InvalidArgument(format!("direction must be ±1, got {s}"))),
        }
    }
}

/// Complex-valued `p`-form on a grid; layout matches [`GridField`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    p: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, p: usize) -> Self {
        let len = grid.len() * binomial(grid.n, p);
        Self {
            grid,
            p,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_data(grid: GridSpec, p: usize, data: Vec<Complex64>) -> Result<Self> {
        if p > grid.n {
            return Err(Error::DegreeOutOfRange { degree: p, n: grid.n });
        }
        let expected = grid.len() * binomial(grid.n, p);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite spectral coefficient".into()));
        }
        Ok(Self { grid, p, data })
    }

    pub fn from_real(f: &GridField) -> Self {
        Self {
            grid: f.grid().clone(),
            p: f.degree(),
            data: f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn components(&self) -> usize {
        binomial(self.grid.n, self.p)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn value(&self, flat: usize) -> &[Complex64] {
        let c = self.components();
        &self.data[flat * c..(flat + 1) * c]
    }

    pub fn real_part(&self) -> GridField {
        let data = self.data.iter().map(|z| z.re).collect();
        GridField::from_data(self.grid.clone(), self.p, data).expect("shape is preserved")
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Grid `L²` norm, `(h^n Σ|F|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.p != other.p {
            return Err(Error::InvalidArgument("spectral fields live on different grids or degrees".into()));
        }
        Ok(())
    }

    /// `‖self − reference‖ / ‖reference‖`, or the absolute difference when the
    /// reference vanishes.
    pub fn rel_l2_error(&self, reference: &Self) -> Result<f64> {
        self.check_compatible(reference)?;
        let diff: f64 = self.data.iter().zip(&reference.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        let norm: f64 = reference.data.iter().map(|z| z.norm_sqr()).sum();
        Ok(if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            p: self.p,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            p: self.p,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// The transform in `direction`; the result lives on `grid().dual()`.
    pub fn ft(&self, direction: Direction) -> Self {
        Self {
            grid: self.grid.dual(),
            p: self.p,
            data: transform(&self.grid, self.components(), &self.data, direction),
        }
    }

    /// Applies a real matrix symbol `M(ξ): Λ^p → Λ^{p_out}` at every node,
    /// `M` written row-major into the buffer given to `symbol`.
    pub fn apply_symbol<S>(&self, p_out: usize, symbol: S) -> Result<Self>
    where
        S: Fn(&[f64], &mut [f64]) + Sync,
    {
        let n = self.grid.n;
        if p_out > n {
            return Err(Error::DegreeOutOfRange { degree: p_out, n });
        }
        let c_in = self.components();
        let c_out = binomial(n, p_out);
        let mut out = Self::zeros(self.grid.clone(), p_out);
        out.data.par_chunks_mut(c_out).enumerate().for_each_init(
            || (vec![0.0; n], vec![0.0; c_out * c_in]),
            |(xi, m), (flat, row)| {
                self.grid.point(flat, xi);
                symbol(xi, m);
                let src = &self.data[flat * c_in..(flat + 1) * c_in];
                for (i, o) in row.iter_mut().enumerate() {
                    *o = (0..c_in).map(|j| src[j] * m[i * c_in + j]).sum();
                }
            },
        );
        Ok(out)
    }

    /// Multiplies by a scalar function of the node.
    pub fn apply_scalar<S>(&self, symbol: S) -> Self
    where
        S: Fn(&[f64]) -> f64 + Sync,
    {
        let c = self.components();
        let n = self.grid.n;
        let mut out = self.clone();
        out.data.par_chunks_mut(c).enumerate().for_each_init(
            || vec![0.0; n],
            |xi, (flat, row)| {
                self.grid.point(flat, xi);
                let s = symbol(xi);
                row.iter_mut().for_each(|z| *z *= s);
            },
        );
        out
    }

    /// `s Σ_i t_i e_i ∧ F(t)` where `t` is the node; with `zero_nyquist` the
    /// factor `t_i` is dropped on the unpaired first node of axis `i`.
    pub fn wedge_coordinate(&self, s: Complex64, zero_nyquist: bool) -> Result<Self> {
        let n = self.grid.n;
        if self.p + 1 > n {
            return Err(Error::DegreeOutOfRange { degree: self.p + 1, n });
        }
        Ok(self.coordinate_action(self.p + 1, &wedge_vector_table(n, self.p), s, zero_nyquist))
    }

    /// `s Σ_i t_i F(t) ∨ e_i`.
    pub fn vee_coordinate(&self, s: Complex64, zero_nyquist: bool) -> Result<Self> {
        if self.p == 0 {
            return Err(Error::DegreeOutOfRange { degree: 0, n: self.grid.n });
        }
        Ok(self.coordinate_action(self.p - 1, &vee_vector_table(self.grid.n, self.p), s, zero_nyquist))
    }

    fn coordinate_action(&self, p_out: usize, table: &[Vec<crate::exterior::BasisTerm>], s: Complex64, zero_nyquist: bool) -> Self {
        let n = self.grid.n;
        let c_in = self.components();
        let c_out = binomial(n, p_out);
        let mut out = Self::zeros(self.grid.clone(), p_out);
        out.data.par_chunks_mut(c_out).enumerate().for_each_init(
            || vec![0usize; n],
            |idx, (flat, row)| {
                self.grid.unflatten(flat, idx);
                let src = &self.data[flat * c_in..(flat + 1) * c_in];
                for (axis, terms) in table.iter().enumerate() {
                    if zero_nyquist && idx[axis] == 0 {
                        continue;
                    }
                    let t = self.grid.coord(idx[axis]);
                    for term in terms {
                        row[term.dst] += s * (term.sign as f64 * t) * src[term.src];
                    }
                }
            },
        );
        out
    }

    /// Spectral exterior derivative, valid for fields on any grid.
    pub fn d(&self) -> Result<Self> {
        Ok(self.ft(Direction::Forward).wedge_coordinate(Complex64::new(0.0, 2.0 * PI), true)?.ft(Direction::Inverse))
    }

    /// Spectral codifferential `δ = Σ ∂_i(·) ∨ e_i`.
    pub fn delta(&self) -> Result<Self> {
        Ok(self.ft(Direction::Forward).vee_coordinate(Complex64::new(0.0, 2.0 * PI), true)?.ft(Direction::Inverse))
    }

    /// Spectral Laplacian with symbol `-4π²|ξ|²`.
    pub fn laplacian(&self) -> Self {
        self.ft(Direction::Forward)
            .apply_scalar(|xi| -4.0 * PI * PI * xi.iter().map(|t| t * t).sum::<f64>())
            .ft(Direction::Inverse)
    }
}

/// The grid transform of a real field.
pub fn ft_grid(f: &GridField, direction: Direction) -> SpectralField {
    SpectralField::from_real(f).ft(direction)
}

pub fn d_operator(f: &GridField) -> Result<GridField> {
    Ok(SpectralField::from_real(f).d()?.real_part())
}

pub fn delta_operator(f: &GridField) -> Result<GridField> {
    Ok(SpectralField::from_real(f).delta()?.real_part())
}

pub fn laplacian(f: &GridField) -> GridField {
    SpectralField::from_real(f).laplacian().real_part()
}

/// Axis-by-axis FFT with the continuous-transform scaling and centering.
pub(crate) fn transform(grid: &GridSpec, ncomp: usize, data: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = grid.n;
    let m = grid.points;
    let half = m / 2;
    let h = grid.spacing();
    let mut planner = FftPlanner::new();
    let fft = match direction {
        Direction::Forward => planner.plan_fft_forward(m),
        Direction::Inverse => planner.plan_fft_inverse(m),
    };
    let scratch_len = fft.get_inplace_scratch_len();
    let mut cur = data.to_vec();
    let mut lines = vec![Complex64::new(0.0, 0.0); cur.len()];
    for axis in 0..n {
        let inner = m.pow((n - 1 - axis) as u32) * ncomp;
        let block = m * inner;
        lines.par_chunks_mut(m).enumerate().for_each(|(line, out)| {
            let base = (line / inner) * block + line % inner;
            for (j, o) in out.iter_mut().enumerate() {
                *o = cur[base + j * inner];
            }
        });
        lines
            .par_chunks_mut(m)
            .for_each_init(|| vec![Complex64::new(0.0, 0.0); scratch_len], |scratch, line| fft.process_with_scratch(line, scratch));
        cur.par_chunks_mut(inner).enumerate().for_each(|(t, chunk)| {
            let (o, mp) = (t / m, t % m);
            let sign = if (mp + half) % 2 == 0 { h } else { -h };
            let q = (mp + half) % m;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = lines[(o * inner + i) * m + q] * sign;
            }
        });
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Multivector;
    use crate::fields::{sample_to_grid, AnalyticForm, GaussianForm, Polynomial};

    fn gaussian_1form(n: usize) -> GaussianForm {
        let a: Vec<f64> = (0..n).map(|i| 0.3 + 0.2 * i as f64).collect();
        GaussianForm::shifted(1.0, &Multivector::vector(&a), vec![0.1; n]).unwrap()
    }

    #[test]
    fn self_dual_gaussian() {
        // L = √(N/4) makes the grid its own dual; a wider L truncates the
        // frequency side where the periodized transform aliases.
        let grid = GridSpec::new(2, 4.0, 64).unwrap();
        assert_eq!(grid.dual(), grid);
        let a = Multivector::vector(&[1.0, -2.0]);
        let f = sample_to_grid(&GaussianForm::constant(PI, &a).unwrap(), &grid).unwrap();
        let spec = ft_grid(&f, Direction::Forward);
        let expect = sample_to_grid(&GaussianForm::constant(PI, &a).unwrap(), &grid.dual()).unwrap();
        assert!(spec.max_imag() < 1e-12, "{}", spec.max_imag());
        let err = spec.real_part().rel_l2_error(&expect).unwrap();
        assert!(err < 1e-8, "{err}");
        // blade order is untouched
        assert!(spec.value(grid.len() / 2 + 32)[1].re < 0.0);
    }

    #[test]
    fn parseval_and_reflection() {
        let grid = GridSpec::new(3, 6.0, 32).unwrap();
        let f = sample_to_grid(&gaussian_1form(3), &grid).unwrap();
        let spec = ft_grid(&f, Direction::Forward);
        assert!((spec.l2_norm() - f.l2_norm()).abs() < 1e-10 * f.l2_norm());
        let twice = spec.ft(Direction::Forward);
        assert_eq!(twice.grid(), &grid);
        let mut idx = [0usize; 3];
        let mut worst: f64 = 0.0;
        for flat in 0..grid.len() {
            grid.unflatten(flat, &mut idx);
            let refl: Vec<usize> = idx.iter().map(|&i| (32 - i) % 32).collect();
            let r = grid.flatten(&refl);
            for (a, b) in twice.value(flat).iter().zip(f.value(r)) {
                worst = worst.max((a - b).norm());
            }
        }
        assert!(worst < 1e-10, "{worst}");
        let back = spec.ft(Direction::Inverse);
        assert!(back.real_part().rel_l2_error(&f).unwrap() < 1e-12);
        assert!(Direction::from_sign(0).is_err());
    }

    #[test]
    fn gradient_of_gaussian() {
        let grid = GridSpec::new(3, 6.0, 48).unwrap();
        let f = GaussianForm::constant(1.0, &Multivector::scalar(3, 1.0)).unwrap();
        let g = d_operator(&sample_to_grid(&f, &grid).unwrap()).unwrap();
        let expect = AnalyticForm::new(3, 1, |x: &[f64], o: &mut [f64]| {
            let e = (-x.iter().map(|t| t * t).sum::<f64>()).exp();
            for (oi, xi) in o.iter_mut().zip(x) {
                *oi = -2.0 * xi * e;
            }
        });
        assert!(g.rel_l2_error(&sample_to_grid(&expect, &grid).unwrap()).unwrap() < 1e-8);
    }

    #[test]
    fn codifferential_of_constant_and_derivative_of_polynomial_form() {
        let grid = GridSpec::new(3, 6.0, 64).unwrap();
        let constant = GridField::from_data(grid.clone(), 1, vec![1.5; grid.len() * 3]).unwrap();
        assert!(delta_operator(&constant).unwrap().max_abs() < 1e-12);
        // x₁ dx₂ under a wide window; interior match only
        let window = |x: &[f64]| (-0.02 * x.iter().map(|t| t.powi(4)).sum::<f64>()).exp();
        let f = AnalyticForm::new(3, 1, move |x: &[f64], o: &mut [f64]| {
            o.iter_mut().for_each(|v| *v = 0.0);
            o[1] = x[0] * window(x);
        });
        let df = d_operator(&sample_to_grid(&f, &grid).unwrap()).unwrap();
        let mut x = vec![0.0; 3];
        for flat in 0..grid.len() {
            grid.point(flat, &mut x);
            if x.iter().all(|t| t.abs() <= 0.8) {
                // d(x₁w dx₂) = (w + x₁∂₁w) dx₁∧dx₂ + x₁∂₃w dx₃∧dx₂
                let w = window(&x);
                let v = df.value(flat);
                let e12 = w * (1.0 - 0.08 * x[0].powi(4));
                let e23 = 0.08 * x[0] * x[2].powi(3) * w;
                assert!((v[0] - e12).abs() < 1e-6 && (v[2] - e23).abs() < 1e-6 && v[1].abs() < 1e-6);
            }
        }
    }

    #[test]
    fn nilpotence_and_hodge_laplacian() {
        let grid = GridSpec::new(3, 6.0, 64).unwrap();
        let comps = vec![
            Polynomial::var(3, 1),
            Polynomial::var(3, 0).mul(&Polynomial::var(3, 2)),
            Polynomial::constant(3, 0.7),
        ];
        let phi = GaussianForm::new(1, 1.2, vec![0.2, -0.1, 0.0], comps).unwrap();
        let f = sample_to_grid(&phi, &grid).unwrap();
        let dd = d_operator(&d_operator(&f).unwrap()).unwrap();
        let two = GaussianForm::new(2, 1.0, vec![0.0; 3], vec![Polynomial::var(3, 2), Polynomial::constant(3, 1.0), Polynomial::var(3, 0)]).unwrap();
        let g = sample_to_grid(&two, &grid).unwrap();
        let dl = delta_operator(&delta_operator(&g).unwrap()).unwrap();
        assert!(dd.max_abs() < 1e-10 * f.max_abs() * 100.0, "{} {}", dd.max_abs(), f.max_abs());
        assert!(dl.max_abs() < 1e-10 * g.max_abs() * 100.0);
        let hodge = {
            let a = d_operator(&delta_operator(&f).unwrap()).unwrap();
            let b = delta_operator(&d_operator(&f).unwrap()).unwrap();
            GridField::from_data(grid.clone(), 1, a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect()).unwrap()
        };
        let lap = laplacian(&f);
        assert!(hodge.rel_l2_error(&lap).unwrap() < 1e-9);
        let exact = sample_to_grid(&phi.laplacian(), &grid).unwrap();
        assert!(lap.rel_l2_error(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn degree_errors() {
        let grid = GridSpec::new(2, 2.0, 8).unwrap();
        let top = GridField::zeros(grid.clone(), 2);
        assert!(d_operator(&top).is_err());
        assert!(delta_operator(&GridField::zeros(grid, 0)).is_err());
    }
}
