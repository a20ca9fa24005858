use std::collections::BTreeMap;

/// A real polynomial in `n` variables, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(n, &vec![0; n], c)
    }

    pub fn monomial(n: usize, exps: &[u32], c: f64) -> Self {
        assert_eq!(exps.len(), n, "exponent vector length must equal n");
        let mut p = Self::zero(n);
        p.add_term(exps.to_vec(), c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, &e, 1.0)
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs.
    pub fn from_terms(n: usize, terms: &[(f64, Vec<u32>)]) -> Self {
        let mut p = Self::zero(n);
        for (c, e) in terms {
            assert_eq!(e.len(), n);
            p.add_term(e.clone(), *c);
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// `Some(d)` when every term has total degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn mul_var(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[i] += 1;
            out.add_term(e, *c);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * e[i] as f64);
        }
        out
    }

    pub fn laplacian(&self) -> Self {
        (0..self.n).fold(Self::zero(self.n), |acc, i| acc.add(&self.derivative(i).derivative(i)))
    }

    /// Exact when the coefficients are integers of moderate size.
    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_calculus() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.mul(&y).add(&x.mul(&x).scale(3.0));
        assert_eq!(p.eval(&[2.0, -1.0]), -2.0 + 12.0);
        assert_eq!(p.derivative(0).eval(&[2.0, -1.0]), -1.0 + 12.0);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(p.add(&p.scale(-1.0)), Polynomial::zero(2));
    }

    #[test]
    fn harmonic_test_set() {
        let n = 3;
        let one = Polynomial::constant(n, 1.0);
        let xy = Polynomial::var(n, 0).mul(&Polynomial::var(n, 1));
        let diff = Polynomial::var(n, 0)
            .mul(&Polynomial::var(n, 0))
            .add(&Polynomial::var(n, 1).mul(&Polynomial::var(n, 1)).scale(-1.0));
        assert!(one.is_harmonic() && xy.is_harmonic() && diff.is_harmonic());
        let r2 = Polynomial::var(n, 0).mul(&Polynomial::var(n, 0));
        assert!(!r2.is_harmonic());
    }
}
