//! Exterior algebra on `Λ^p R^n` with the lexicographic blade basis.
//!
//! Blades are strictly increasing index sequences. Internally they are also
//! handled as bitmasks, which keeps sign computations to a couple of popcounts.

mod operator;

pub(crate) use operator::apply_dense as operator_apply;
pub use operator::{induced_map, induced_map_rect, pi_phi, HarmonicPart, OperatorFieldSample, QuadraticOperator};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A basis blade `e_λ = e_{λ_1} ∧ … ∧ e_{λ_p}` with `λ` strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BladeIndex {
    indices: Vec<usize>,
}

impl BladeIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "blade indices {indices:?} are not strictly increasing"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidArgument(format!(
                    "blade index {last} out of range for n = {n}"
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn degree(&self) -> usize {
        self.indices.len()
    }

    pub fn mask(&self) -> u64 {
        self.indices.iter().fold(0, |m, &i| m | (1 << i))
    }

    pub fn from_mask(mask: u64) -> Self {
        let indices = (0..64).filter(|i| mask & (1 << i) != 0).collect();
        Self { indices }
    }

    /// Position of this blade in the lexicographic order of `p`-subsets of `0..n`.
    pub fn rank(&self, n: usize) -> usize {
        rank_of_mask(self.mask(), n)
    }

    pub fn unrank(rank: usize, n: usize, p: usize) -> Self {
        Self::from_mask(mask_of_rank(rank, n, p))
    }

    /// All blades of degree `p` in rank order.
    pub fn all(n: usize, p: usize) -> Vec<Self> {
        (0..binomial(n, p)).map(|r| Self::unrank(r, n, p)).collect()
    }
}

pub(crate) fn rank_of_mask(mask: u64, n: usize) -> usize {
    let p = mask.count_ones() as usize;
    let mut rank = 0;
    let mut remaining = p;
    let mut next = 0;
    for i in 0..n {
        if remaining == 0 {
            break;
        }
        if mask & (1 << i) != 0 {
            for v in next..i {
                rank += binomial(n - 1 - v, remaining - 1);
            }
            next = i + 1;
            remaining -= 1;
        }
    }
    rank
}

pub(crate) fn mask_of_rank(mut rank: usize, n: usize, p: usize) -> u64 {
    let mut mask = 0u64;
    let mut v = 0;
    for remaining in (1..=p).rev() {
        loop {
            let block = binomial(n - 1 - v, remaining - 1);
            if rank < block {
                break;
            }
            rank -= block;
            v += 1;
        }
        mask |= 1 << v;
        v += 1;
    }
    mask
}

/// Sign and mask of `e_A ∧ e_B`, or `None` when the blades share an index.
pub fn wedge_masks(a: u64, b: u64) -> Option<(i64, u64)> {
    if a & b != 0 {
        return None;
    }
    // count pairs (i in a, j in b) with i > j
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    let sign = if swaps % 2 == 0 { 1 } else { -1 };
    Some((sign, a | b))
}

/// Sign and mask of `e_A ∨ e_i`, or `None` when `i ∉ A`.
pub fn vee_masks(a: u64, i: usize) -> Option<(i64, u64)> {
    if a & (1 << i) == 0 {
        return None;
    }
    let below = (a & ((1u64 << i) - 1)).count_ones();
    let sign = if below % 2 == 0 { 1 } else { -1 };
    Some((sign, a & !(1 << i)))
}

/// One entry of a sparse basis map: `dst += sign * src`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisTerm {
    pub src: usize,
    pub dst: usize,
    pub sign: i64,
}

/// For every axis `i`, the action of `e_i ∧ ·` from `Λ^p` to `Λ^{p+1}`.
pub fn wedge_vector_table(n: usize, p: usize) -> Vec<Vec<BasisTerm>> {
    (0..n)
        .map(|i| {
            (0..binomial(n, p))
                .filter_map(|src| {
                    let m = mask_of_rank(src, n, p);
                    wedge_masks(1 << i, m).map(|(sign, out)| BasisTerm {
                        src,
                        dst: rank_of_mask(out, n),
                        sign,
                    })
                })
                .collect()
        })
        .collect()
}

/// For every axis `i`, the action of `· ∨ e_i` from `Λ^p` to `Λ^{p-1}`.
pub fn vee_vector_table(n: usize, p: usize) -> Vec<Vec<BasisTerm>> {
    (0..n)
        .map(|i| {
            (0..binomial(n, p))
                .filter_map(|src| {
                    let m = mask_of_rank(src, n, p);
                    vee_masks(m, i).map(|(sign, out)| BasisTerm {
                        src,
                        dst: rank_of_mask(out, n),
                        sign,
                    })
                })
                .collect()
        })
        .collect()
}

/// An element of `Λ^p R^n` stored as dense coefficients in blade rank order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multivector {
    n: usize,
    p: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(n: usize, p: usize) -> Self {
        Self {
            n,
            p,
            coeffs: vec![0.0; binomial(n, p)],
        }
    }

    pub fn from_coeffs(n: usize, p: usize, coeffs: Vec<f64>) -> Result<Self> {
        if p > n {
            return Err(Error::DegreeOutOfRange { degree: p, n });
        }
        let len = binomial(n, p);
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { n, p, coeffs })
    }

    pub fn scalar(n: usize, value: f64) -> Self {
        Self {
            n,
            p: 0,
            coeffs: vec![value],
        }
    }

    pub fn vector(components: &[f64]) -> Self {
        Self {
            n: components.len(),
            p: 1,
            coeffs: components.to_vec(),
        }
    }

    /// The unit blade `e_{i_1} ∧ … ∧ e_{i_p}`; indices must be increasing.
    pub fn blade(n: usize, indices: &[usize]) -> Result<Self> {
        let b = BladeIndex::new(indices.to_vec(), n)?;
        let mut out = Self::zero(n, b.degree());
        out.coeffs[b.rank(n)] = 1.0;
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.n, self.p), (other.n, other.p));
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!((self.n, self.p), (other.n, other.p));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let n = self.n;
        let q = self.p + other.p;
        if q > n {
            return Err(Error::DegreeOutOfRange { degree: q, n });
        }
        let mut out = Self::zero(n, q);
        for (ra, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = mask_of_rank(ra, n, self.p);
            for (rb, &cb) in other.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                if let Some((sign, m)) = wedge_masks(ma, mask_of_rank(rb, n, other.p)) {
                    out.coeffs[rank_of_mask(m, n)] += sign as f64 * ca * cb;
                }
            }
        }
        Ok(out)
    }

    /// `self ∨ v`, the adjoint of `v ∧ ·`.
    pub fn vee(&self, v: &Self) -> Result<Self> {
        self.check_same_n(v)?;
        if v.p != 1 {
            return Err(Error::InvalidArgument(format!(
                "vee takes a 1-vector on the right, got degree {}",
                v.p
            )));
        }
        if self.p == 0 {
            return Err(Error::DegreeOutOfRange { degree: 0, n: self.n });
        }
        let n = self.n;
        let mut out = Self::zero(n, self.p - 1);
        for (ra, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ma = mask_of_rank(ra, n, self.p);
            for (i, &vi) in v.coeffs.iter().enumerate() {
                if vi == 0.0 {
                    continue;
                }
                if let Some((sign, m)) = vee_masks(ma, i) {
                    out.coeffs[rank_of_mask(m, n)] += sign as f64 * ca * vi;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, idx: &[usize]) -> Multivector {
        Multivector::blade(n, idx).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(6, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn rank_unrank_round_trip() {
        for n in 0..=8 {
            for p in 0..=n {
                let blades = BladeIndex::all(n, p);
                assert_eq!(blades.len(), binomial(n, p));
                for (r, b) in blades.iter().enumerate() {
                    assert_eq!(b.rank(n), r);
                }
                assert!(blades.windows(2).all(|w| w[0] < w[1]), "lex order n={n} p={p}");
            }
        }
    }

    #[test]
    fn wedge_basis_cases() {
        let w = e(3, &[0]).wedge(&e(3, &[1])).unwrap();
        assert_eq!(w, e(3, &[0, 1]));
        let w = e(3, &[1]).wedge(&e(3, &[0])).unwrap();
        assert_eq!(w, e(3, &[0, 1]).scale(-1.0));
        let v = Multivector::vector(&[1.0, 1.0, 0.0]);
        assert!(v.wedge(&v).unwrap().norm() == 0.0);
    }

    #[test]
    fn wedge_rejects_overflow() {
        let a = e(3, &[0, 1]);
        assert!(matches!(a.wedge(&a), Err(Error::DegreeOutOfRange { .. })));
        assert!(e(3, &[0]).wedge(&e(4, &[0])).is_err());
    }

    #[test]
    fn vee_basis_cases() {
        let a = e(3, &[0, 1]);
        assert_eq!(a.vee(&e(3, &[0])).unwrap(), e(3, &[1]));
        assert_eq!(a.vee(&e(3, &[1])).unwrap(), e(3, &[0]).scale(-1.0));
        assert_eq!(a.vee(&e(3, &[2])).unwrap().norm(), 0.0);
        assert!(Multivector::scalar(3, 1.0).vee(&e(3, &[0])).is_err());
    }

    /// Solves for `a ∨ e_i` from adjointness alone: its coefficient on `e_B`
    /// must be `<a, e_i ∧ e_B>`.
    fn vee_by_adjointness(a: &Multivector, i: usize) -> Multivector {
        let n = a.n();
        let mut out = Multivector::zero(n, a.degree() - 1);
        for b in BladeIndex::all(n, a.degree() - 1) {
            let eb = Multivector::blade(n, b.indices()).unwrap();
            out.coeffs_mut()[b.rank(n)] = a.inner(&e(n, &[i]).wedge(&eb).unwrap());
        }
        out
    }

    #[test]
    fn vee_matches_brute_force_adjoint() {
        let a = e(3, &[0, 1]);
        assert_eq!(vee_by_adjointness(&a, 0), e(3, &[1]));
        assert_eq!(vee_by_adjointness(&a, 1), e(3, &[0]).scale(-1.0));
    }

    #[test]
    fn adjointness_exhaustive_integer() {
        for n in 1..=6 {
            for p in 1..=n {
                for ra in 0..binomial(n, p) {
                    let a = mask_of_rank(ra, n, p);
                    for i in 0..n {
                        for rb in 0..binomial(n, p - 1) {
                            let b = mask_of_rank(rb, n, p - 1);
                            let lhs = match vee_masks(a, i) {
                                Some((s, m)) if m == b => s,
                                _ => 0,
                            };
                            let rhs = match wedge_masks(1 << i, b) {
                                Some((s, m)) if m == a => s,
                                _ => 0,
                            };
                            assert_eq!(lhs, rhs, "n={n} a={a:b} i={i} b={b:b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tables_match_multivector_ops() {
        let n = 4;
        for p in 0..n {
            let table = wedge_vector_table(n, p);
            for (i, terms) in table.iter().enumerate() {
                for t in terms {
                    let src = Multivector::blade(n, BladeIndex::unrank(t.src, n, p).indices()).unwrap();
                    let w = e(n, &[i]).wedge(&src).unwrap();
                    assert_eq!(w.coeffs()[t.dst], t.sign as f64);
                }
            }
        }
    }
}
