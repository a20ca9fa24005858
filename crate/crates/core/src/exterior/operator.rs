use super::{binomial, mask_of_rank, rank_of_mask, vee_masks, wedge_masks, Multivector};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// A linear map `Λ^p R^n → Λ^p R^n` in blade coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFieldSample {
    pub n: usize,
    pub p: usize,
    pub matrix: DMatrix<f64>,
}

impl OperatorFieldSample {
    pub fn new(n: usize, p: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let c = binomial(n, p);
        if matrix.nrows() != c || matrix.ncols() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n, p, matrix })
    }

    pub fn identity(n: usize, p: usize) -> Self {
        let c = binomial(n, p);
        Self {
            n,
            p,
            matrix: DMatrix::identity(c, c),
        }
    }

    pub fn apply(&self, a: &Multivector) -> Multivector {
        debug_assert_eq!((a.n(), a.degree()), (self.n, self.p));
        let mut out = Multivector::zero(self.n, self.p);
        apply_dense(&self.matrix, a.coeffs(), out.coeffs_mut());
        out
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            p: self.p,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Max deviation from symmetry and from idempotence.
    pub fn projection_defect(&self) -> f64 {
        let sym = (&self.matrix - self.matrix.transpose()).amax();
        let idem = (&self.matrix * &self.matrix - &self.matrix).amax();
        sym.max(idem)
    }
}

pub(crate) fn apply_dense(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum();
    }
}

fn small_det(a: &mut [f64], p: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| a[i * p + col].abs().total_cmp(&a[j * p + col].abs()))
            .unwrap();
        if a[pivot * p + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..p {
                a.swap(col * p + j, pivot * p + j);
            }
            det = -det;
        }
        let d = a[col * p + col];
        det *= d;
        for i in col + 1..p {
            let f = a[i * p + col] / d;
            if f != 0.0 {
                for j in col..p {
                    a[i * p + j] -= f * a[col * p + j];
                }
            }
        }
    }
    det
}

/// `Λ^p A` for a rectangular `A : R^c → R^r`; entry `(μ, λ)` is the minor `det A[μ, λ]`.
pub fn induced_map_rect(a: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let rows = binomial(r, p);
    let cols = binomial(c, p);
    let mut out = DMatrix::zeros(rows, cols);
    let row_sets: Vec<Vec<usize>> = (0..rows).map(|i| mask_indices(mask_of_rank(i, r, p))).collect();
    let col_sets: Vec<Vec<usize>> = (0..cols).map(|j| mask_indices(mask_of_rank(j, c, p))).collect();
    let mut buf = vec![0.0; p * p];
    for (i, mu) in row_sets.iter().enumerate() {
        for (j, lam) in col_sets.iter().enumerate() {
            for (s, &mi) in mu.iter().enumerate() {
                for (t, &lj) in lam.iter().enumerate() {
                    buf[s * p + t] = a[(mi, lj)];
                }
            }
            out[(i, j)] = small_det(&mut buf, p);
        }
    }
    out
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask & (1 << i) != 0).collect()
}

/// The map `Λ^p A` induced by a square matrix.
pub fn induced_map(a: &DMatrix<f64>, p: usize) -> Result<OperatorFieldSample> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if p > n {
        return Err(Error::DegreeOutOfRange { degree: p, n });
    }
    Ok(OperatorFieldSample {
        n,
        p,
        matrix: induced_map_rect(a, p),
    })
}

/// `(Π_x, Φ_x)`: projections of `Λ^p` onto `Λ^p H_x` and `x ∧ Λ^{p-1} H_x`,
/// with `H_x = x^⊥`. Computed as `|x|²Π_x α = (x∧α)∨x` and `|x|²Φ_x α = x∧(α∨x)`.
pub fn pi_phi(x: &[f64], p: usize) -> Result<(OperatorFieldSample, OperatorFieldSample)> {
    let n = x.len();
    if p > n {
        return Err(Error::DegreeOutOfRange { degree: p, n });
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    if p == 0 {
        return Ok((OperatorFieldSample::identity(n, 0), OperatorFieldSample {
            n,
            p,
            matrix: DMatrix::zeros(1, 1),
        }));
    }
    let xv = Multivector::vector(x);
    let c = binomial(n, p);
    let mut pi = DMatrix::zeros(c, c);
    let mut phi = DMatrix::zeros(c, c);
    for col in 0..c {
        let mut e = Multivector::zero(n, p);
        e.coeffs_mut()[col] = 1.0;
        let pcol = if p < n {
            xv.wedge(&e)?.vee(&xv)?
        } else {
            Multivector::zero(n, p)
        };
        let fcol = xv.wedge(&e.vee(&xv)?)?;
        for row in 0..c {
            pi[(row, col)] = pcol.coeffs()[row] / r2;
            phi[(row, col)] = fcol.coeffs()[row] / r2;
        }
    }
    Ok((
        OperatorFieldSample { n, p, matrix: pi },
        OperatorFieldSample { n, p, matrix: phi },
    ))
}

/// A homogeneous quadratic operator field `Σ_{i≤j} x_i x_j M_ij` with integer
/// matrices `M_ij`, stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticOperator {
    pub n: usize,
    pub p: usize,
    /// `(i, j, M_ij)` with `i ≤ j`
    pub terms: Vec<(usize, usize, Vec<i64>)>,
}

impl QuadraticOperator {
    /// `|x|²Π_x` as the quadratic form `x ↦ (x ∧ ·) ∨ x`.
    pub fn r2_pi(n: usize, p: usize) -> Self {
        let c = binomial(n, p);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut m = vec![0i64; c * c];
                // x_i x_j coefficient collects (e_i∧·)∨e_j and, off the diagonal, (e_j∧·)∨e_i
                let pairs: &[(usize, usize)] = if i == j { &[(i, i)] } else { &[(i, j), (j, i)] };
                for &(a, b) in pairs {
                    for src in 0..c {
                        let ms = mask_of_rank(src, n, p);
                        if let Some((s1, w)) = wedge_masks(1 << a, ms) {
                            if let Some((s2, v)) = vee_masks(w, b) {
                                m[rank_of_mask(v, n) * c + src] += s1 * s2;
                            }
                        }
                    }
                }
                terms.push((i, j, m));
            }
        }
        Self { n, p, terms }
    }

    pub fn dim(&self) -> usize {
        binomial(self.n, self.p)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, j, m) in &self.terms {
            let w = x[*i] * x[*j];
            if w == 0.0 {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(m) {
                if c != 0 {
                    *o += w * c as f64;
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let c = self.dim();
        let mut buf = vec![0.0; c * c];
        self.eval_into(x, &mut buf);
        DMatrix::from_row_slice(c, c, &buf)
    }

    /// Laplacian of every entry, `2 Σ_i coeff(x_i²)`; exact integers.
    pub fn laplacian(&self) -> Vec<i64> {
        let c = self.dim();
        let mut out = vec![0i64; c * c];
        for (i, j, m) in &self.terms {
            if i == j {
                for (o, &v) in out.iter_mut().zip(m) {
                    *o += 2 * v;
                }
            }
        }
        out
    }
}

/// The harmonic part `H(x) = |x|²Π_x − ((n−p)/n)|x|² I`, stored as the integer
/// quadratic operator `n·H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicPart {
    pub scaled: QuadraticOperator,
}

impl HarmonicPart {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p > n {
            return Err(Error::DegreeOutOfRange { degree: p, n });
        }
        let mut scaled = QuadraticOperator::r2_pi(n, p);
        let c = scaled.dim();
        let shift = (n - p) as i64;
        for (i, j, m) in scaled.terms.iter_mut() {
            for v in m.iter_mut() {
                *v *= n as i64;
            }
            if i == j {
                for d in 0..c {
                    m[d * c + d] -= shift;
                }
            }
        }
        Ok(Self { scaled })
    }

    pub fn eval(&self, x: &[f64]) -> OperatorFieldSample {
        let n = self.scaled.n;
        OperatorFieldSample {
            n,
            p: self.scaled.p,
            matrix: self.scaled.eval(x) / n as f64,
        }
    }

    /// Exact integer Laplacian of `n·H`; identically zero.
    pub fn laplacian(&self) -> Vec<i64> {
        self.scaled.laplacian()
    }

    /// `(Π_x, Φ_x)` reassembled as `((n−p)/n) I + H/|x|²` and `(p/n) I − H/|x|²`.
    pub fn projections(&self, x: &[f64]) -> Result<(OperatorFieldSample, OperatorFieldSample)> {
        let (n, p) = (self.scaled.n, self.scaled.p);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        let h = self.eval(x).matrix / r2;
        let id = DMatrix::<f64>::identity(h.nrows(), h.ncols());
        let pi = &id * ((n - p) as f64 / n as f64) + &h;
        let phi = &id * (p as f64 / n as f64) - &h;
        Ok((
            OperatorFieldSample { n, p, matrix: pi },
            OperatorFieldSample { n, p, matrix: phi },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, idx: &[usize]) -> Multivector {
        Multivector::blade(n, idx).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
    }

    #[test]
    fn induced_identity_and_projection() {
        for p in 0..=3 {
            let m = induced_map(&DMatrix::identity(3, 3), p).unwrap();
            assert_eq!(m, OperatorFieldSample::identity(3, p));
        }
        let proj = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]));
        let m = induced_map(&proj, 2).unwrap();
        assert_eq!(m.apply(&e(3, &[0, 1])), e(3, &[0, 1]));
        assert_eq!(m.apply(&e(3, &[0, 2])).norm(), 0.0);
        assert_eq!(m.apply(&e(3, &[1, 2])).norm(), 0.0);
    }

    #[test]
    fn induced_rotation_minors() {
        let t: f64 = 0.7;
        let (c, s) = (t.cos(), t.sin());
        let a = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let m = induced_map(&a, 2).unwrap().matrix;
        // basis order e01, e02, e12
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c]);
        assert!((m - expected).amax() < 1e-15);
    }

    #[test]
    fn induced_map_is_functorial() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let p = rng.gen_range(0..=n);
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let lhs = induced_map(&(&a * &b), p).unwrap().matrix;
            let rhs = induced_map(&a, p).unwrap().matrix * induced_map(&b, p).unwrap().matrix;
            assert!((lhs - rhs).amax() < 1e-10);
        }
    }

    #[test]
    fn pi_phi_blade_cases() {
        let (pi, phi) = pi_phi(&[1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(pi.apply(&e(3, &[0, 1])).norm(), 0.0);
        assert_eq!(phi.apply(&e(3, &[0, 1])), e(3, &[0, 1]));
        assert_eq!(pi.apply(&e(3, &[1, 2])), e(3, &[1, 2]));
        assert_eq!(phi.apply(&e(3, &[1, 2])).norm(), 0.0);
    }

    #[test]
    fn pi_of_e1_on_diagonal_hyperplane() {
        let s = 0.5f64.sqrt();
        let x = [s, s, 0.0];
        let (pi, _) = pi_phi(&x, 1).unwrap();
        // Gram-Schmidt: e1 minus its component along x
        let e1 = [1.0, 0.0, 0.0];
        let dot: f64 = e1.iter().zip(&x).map(|(a, b)| a * b).sum();
        let oracle: Vec<f64> = e1.iter().zip(&x).map(|(a, b)| a - dot * b).collect();
        let got = pi.apply(&e(3, &[0]));
        for (g, o) in got.coeffs().iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-15);
        }
        assert!((got.coeffs()[0] - 0.5).abs() < 1e-15 && (got.coeffs()[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn pi_phi_scalar_and_zero() {
        let (pi, phi) = pi_phi(&[0.3, 0.4], 0).unwrap();
        assert_eq!(pi.matrix[(0, 0)], 1.0);
        assert_eq!(phi.matrix[(0, 0)], 0.0);
        assert!(matches!(pi_phi(&[0.0, 0.0, 0.0], 1), Err(Error::ZeroVector)));
    }

    #[test]
    fn projection_algebra_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(2..=5);
            let p = rng.gen_range(0..=n);
            let x = random_point(&mut rng, n);
            let (pi, phi) = pi_phi(&x, p).unwrap();
            let c = pi.matrix.nrows();
            let id = DMatrix::<f64>::identity(c, c);
            assert!((&pi.matrix + &phi.matrix - id).amax() < 1e-12);
            assert!((&pi.matrix * &phi.matrix).amax() < 1e-12);
            assert!(pi.projection_defect() < 1e-12 && phi.projection_defect() < 1e-12);
        }
    }

    #[test]
    fn harmonic_part_is_exactly_harmonic() {
        for n in 1..=6 {
            for p in 0..=n {
                let h = HarmonicPart::new(n, p).unwrap();
                assert!(h.laplacian().iter().all(|&v| v == 0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn harmonic_part_scalar_is_zero() {
        let h = HarmonicPart::new(3, 0).unwrap();
        assert_eq!(h.eval(&[0.2, -1.0, 0.5]).matrix.amax(), 0.0);
    }

    #[test]
    fn harmonic_part_plane_example() {
        let h = HarmonicPart::new(2, 1).unwrap();
        let m = h.eval(&[1.0, 0.0]).matrix;
        let expected = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
        assert!((m - expected).amax() < 1e-15);
    }

    #[test]
    fn harmonic_part_reproduces_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let p = rng.gen_range(0..=n);
            let x = random_point(&mut rng, n);
            let (pi, phi) = pi_phi(&x, p).unwrap();
            let (pi2, phi2) = HarmonicPart::new(n, p).unwrap().projections(&x).unwrap();
            assert!((pi.matrix - pi2.matrix).amax() < 1e-12);
            assert!((phi.matrix - phi2.matrix).amax() < 1e-12);
        }
    }

    #[test]
    fn trace_of_pi_counts_hyperplane_blades() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 2..=6 {
            for p in 0..=n {
                let mut x = random_point(&mut rng, n);
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= r);
                let (pi, _) = pi_phi(&x, p).unwrap();
                assert!((pi.matrix.trace() - binomial(n - 1, p) as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_form_matches_pi() {
        let x = [0.3, -1.2, 0.7, 0.4];
        for p in 0..=4 {
            let q = QuadraticOperator::r2_pi(4, p).eval(&x);
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let (pi, _) = pi_phi(&x, p).unwrap();
            assert!((q / r2 - pi.matrix).amax() < 1e-13);
        }
    }
}
