//! Grassmannians `G(n, k)`: frames, Haar sampling and deterministic rules.

mod quadrature;

pub use quadrature::{gauss_gegenbauer, gauss_legendre, gauss_legendre_on, sphere_volume};

use crate::error::{Error, Result};
use crate::exterior::{induced_map, OperatorFieldSample};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// An orthonormal frame of a `k`-plane `P` together with one of `P'`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    basis: DMatrix<f64>,
    complement: DMatrix<f64>,
}

impl Frame {
    /// Splits the columns of an orthogonal matrix into a `k`-frame and its complement.
    pub fn from_orthogonal(q: &DMatrix<f64>, k: usize) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n || k > n {
            return Err(Error::InvalidArgument("expected a square matrix and k <= n".into()));
        }
        let frame = Self {
            basis: q.columns(0, k).into_owned(),
            complement: q.columns(k, n - k).into_owned(),
        };
        frame.check(1e-10)?;
        Ok(frame)
    }

    /// The plane spanned by the listed coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        let mut order: Vec<usize> = axes.to_vec();
        if order.iter().any(|&a| a >= n) {
            return Err(Error::InvalidArgument(format!("axes {axes:?} out of range for n = {n}")));
        }
        order.extend((0..n).filter(|i| !axes.contains(i)));
        let mut q = DMatrix::zeros(n, n);
        for (col, &axis) in order.iter().enumerate() {
            q[(axis, col)] = 1.0;
        }
        Self::from_orthogonal(&q, axes.len())
    }

    /// The hyperplane `ω^⊥` for a unit vector `ω`.
    pub fn hyperplane(omega: &[f64]) -> Result<Self> {
        let q = householder_completion(omega)?;
        let n = omega.len();
        // column 0 is ±ω; move it to the end
        let mut cols: Vec<usize> = (1..n).collect();
        cols.push(0);
        Self::from_orthogonal(&q.select_columns(&cols), n - 1)
    }

    /// The line spanned by a unit vector `ω`.
    pub fn line(omega: &[f64]) -> Result<Self> {
        Self::from_orthogonal(&householder_completion(omega)?, 1)
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn complement(&self) -> &DMatrix<f64> {
        &self.complement
    }

    /// Largest violation of orthonormality or of `basisᵀ·complement = 0`.
    pub fn defect(&self) -> f64 {
        let full = DMatrix::from_columns(
            &self
                .basis
                .column_iter()
                .chain(self.complement.column_iter())
                .map(|c| c.into_owned())
                .collect::<Vec<_>>(),
        );
        let n = self.n();
        (full.transpose() * full - DMatrix::<f64>::identity(n, n)).amax()
    }

    fn check(&self, tol: f64) -> Result<()> {
        if self.defect() > tol {
            return Err(Error::InvalidArgument(format!(
                "frame is not orthonormal (defect {:e})",
                self.defect()
            )));
        }
        Ok(())
    }

    /// Orthogonal projector `B Bᵀ` onto `P`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `Pᵀ x`, the coordinates of the projection of `x` in the frame.
    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|j| (0..self.n()).map(|i| self.basis[(i, j)] * x[i]).sum())
            .collect()
    }

    /// `B u` for frame coordinates `u`.
    pub fn from_local(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| (0..self.k()).map(|j| self.basis[(i, j)] * u[j]).sum())
            .collect()
    }

    /// Orthogonal projection of `x` onto `P`.
    pub fn project_point(&self, x: &[f64]) -> Vec<f64> {
        self.from_local(&self.to_local(x))
    }

    /// `E' η` for complement coordinates `η`.
    pub fn from_complement(&self, eta: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| (0..eta.len()).map(|j| self.complement[(i, j)] * eta[j]).sum())
            .collect()
    }

    /// The restriction `α ↦ α|_P` on `Λ^p R^n`, i.e. `Λ^p(B Bᵀ)`.
    pub fn restriction(&self, p: usize) -> Result<OperatorFieldSample> {
        induced_map(&self.projector(), p)
    }

    /// Column-major flattening of the basis matrix.
    pub fn basis_column_major(&self) -> Vec<f64> {
        self.basis.as_slice().to_vec()
    }

    /// The frame rotated by an orthogonal matrix.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        Self {
            basis: q * &self.basis,
            complement: q * &self.complement,
        }
    }
}

/// Orthogonal matrix whose first column is `±ω`, built from one Householder reflection.
fn householder_completion(omega: &[f64]) -> Result<DMatrix<f64>> {
    let n = omega.len();
    let norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("direction must be a unit vector".into()));
    }
    let j = (0..n).max_by(|&a, &b| omega[a].abs().total_cmp(&omega[b].abs())).unwrap();
    let s = if omega[j] >= 0.0 { 1.0 } else { -1.0 };
    // u = ω + s e_j, H = I − 2uuᵀ/|u|² maps e_j to −sω
    let mut u: Vec<f64> = omega.to_vec();
    u[j] += s;
    let u2: f64 = u.iter().map(|v| v * v).sum();
    let h = DMatrix::from_fn(n, n, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        id - 2.0 * u[a] * u[b] / u2
    });
    let mut cols: Vec<usize> = vec![j];
    cols.extend((0..n).filter(|&c| c != j));
    Ok(h.select_columns(&cols))
}

/// A weighted set of planes approximating the Haar probability measure.
#[derive(Clone, Debug)]
pub struct GrassmannRule {
    pub nodes: Vec<Frame>,
    pub weights: Vec<f64>,
}

impl GrassmannRule {
    pub fn new(nodes: Vec<Frame>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidArgument("rule needs matching, non-empty nodes and weights".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidArgument("rule weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("rule weights sum to {total}")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frame, f64)> {
        self.nodes.iter().zip(self.weights.iter().copied())
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with `diag(R) > 0`.
pub fn haar_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `count` Haar-random `k`-planes in `R^n` with equal weights.
pub fn haar_sample(n: usize, k: usize, count: usize, seed: u64) -> Result<GrassmannRule> {
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("need 0 < k < n, got k = {k}, n = {n}")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..count)
        .map(|_| Frame::from_orthogonal(&haar_orthogonal(&mut rng, n), k))
        .collect::<Result<Vec<_>>>()?;
    let weights = vec![1.0 / count as f64; count];
    GrassmannRule::new(nodes, weights)
}

/// A quadrature rule on `S^{n-1}`; weights sum to `|S^{n-1}|`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Product rule on `S^{n-1}` exact for polynomials of degree `≤ order`.
///
/// The first coordinate is `t = cos θ` with a Gauss rule for the weight
/// `(1 − t²)^{(n−3)/2}`, recursing on `S^{n-2}`; the circle uses equispaced
/// angles. Node counts are rounded up to even so the rule is centrally symmetric.
pub fn sphere_rule(n: usize, order: usize) -> Result<SphereRule> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("sphere_rule needs n >= 2, got {n}")));
    }
    if n == 2 {
        let mut m = order + 1;
        m += m % 2;
        let w = 2.0 * PI / m as f64;
        let points = (0..m)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        return Ok(SphereRule {
            n,
            points,
            weights: vec![w; m],
        });
    }
    let mut m = order / 2 + 1;
    m += m % 2;
    let (ts, ws) = gauss_gegenbauer(m, (n as f64 - 2.0) / 2.0);
    let inner = sphere_rule(n - 1, order)?;
    let mut points = Vec::with_capacity(m * inner.points.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for (t, wt) in ts.iter().zip(&ws) {
        let s = (1.0 - t * t).sqrt();
        for (q, wq) in inner.points.iter().zip(&inner.weights) {
            let mut x = Vec::with_capacity(n);
            x.push(*t);
            x.extend(q.iter().map(|v| s * v));
            points.push(x);
            weights.push(wt * wq);
        }
    }
    Ok(SphereRule { n, points, weights })
}

impl SphereRule {
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Half of the rule (`t > 0`) with doubled weights; valid for even integrands.
    fn folded(&self) -> Vec<(&Vec<f64>, f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| x[0] > 0.0)
            .map(|(x, w)| (x, 2.0 * w))
            .collect()
    }

    fn normalized_rule(&self, build: impl Fn(&[f64]) -> Result<Frame>) -> Result<GrassmannRule> {
        let folded = self.folded();
        let total: f64 = folded.iter().map(|(_, w)| w).sum();
        let nodes = folded.iter().map(|(x, _)| build(x)).collect::<Result<Vec<_>>>()?;
        let weights = folded.iter().map(|(_, w)| w / total).collect();
        GrassmannRule::new(nodes, weights)
    }

    /// Hyperplanes `ω^⊥`, antipodes identified; a deterministic rule on `G(n, n−1)`.
    pub fn hyperplanes(&self) -> Result<GrassmannRule> {
        self.normalized_rule(Frame::hyperplane)
    }

    /// Lines `Rω`, antipodes identified; a deterministic rule on `G(n, 1)`.
    pub fn lines(&self) -> Result<GrassmannRule> {
        self.normalized_rule(Frame::line)
    }

    /// The rule rotated so that its pole `e_1` maps to the unit vector `axis`.
    pub fn rotated_to(&self, axis: &[f64]) -> Result<SphereRule> {
        let q = householder_completion(axis)?;
        // q e_1 = ±axis; flip to make it +axis
        let sign = if (0..self.n).map(|i| q[(i, 0)] * axis[i]).sum::<f64>() > 0.0 { 1.0 } else { -1.0 };
        let points = self
            .points
            .iter()
            .map(|x| {
                (0..self.n)
                    .map(|i| {
                        let head = sign * q[(i, 0)] * x[0];
                        head + (1..self.n).map(|j| q[(i, j)] * x[j]).sum::<f64>()
                    })
                    .collect()
            })
            .collect();
        Ok(SphereRule {
            n: self.n,
            points,
            weights: self.weights.clone(),
        })
    }
}

/// `count` planes `κP` with `κ` Haar-uniform in the stabilizer of the unit vector `x`.
pub fn stabilizer_sample(x: &[f64], p: &Frame, count: usize, seed: u64) -> Result<Vec<Frame>> {
    let n = x.len();
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.n() });
    }
    let off: f64 = p
        .basis()
        .column_iter()
        .map(|c| (0..n).map(|i| c[i] * x[i]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    if off > 1e-12 {
        return Err(Error::InvalidArgument(format!("plane is not orthogonal to x (|<x,P>| = {off:e})")));
    }
    let h = householder_completion(x)?;
    let u = h.columns(1, n - 1).into_owned();
    let xx = DMatrix::from_fn(n, n, |a, b| x[a] * x[b]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let q = haar_orthogonal(&mut rng, n - 1);
            let kappa = &u * q * u.transpose() + &xx;
            p.rotated(&kappa)
        })
        .collect())
}
