use crate::error::{Error, Result};
use crate::geometry::gauss_legendre_on;

/// Quadrature on the reference simplex `{t_i ≥ 0, Σ t_i ≤ 1} ⊂ R^p`.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub p: usize,
    pub order: usize,
    pub points: Vec<Vec<f64>>,
    /// Sum to `1/p!`.
    pub weights: Vec<f64>,
}

/// Collapsed-coordinate (Duffy) product of Gauss–Legendre rules, exact for
/// polynomials of degree `≤ order`.
///
/// `t_1 = u_1`, `t_j = u_j Π_{i<j}(1 − u_i)`, with Jacobian
/// `Π_i (1 − u_i)^{p−i}`; the extra Jacobian degree is covered by taking
/// `(order + p)/2 + 1` nodes per axis.
pub fn simplex_rule(p: usize, order: usize) -> Result<SimplexRule> {
    if p > 8 {
        return Err(Error::InvalidArgument(format!("simplex rules are limited to p <= 8, got {p}")));
    }
    if p == 0 {
        return Ok(SimplexRule {
            p,
            order,
            points: vec![vec![]],
            weights: vec![1.0],
        });
    }
    let m = (order + p) / 2 + 1;
    let (us, ws) = gauss_legendre_on(m, 0.0, 1.0);
    let total = m.pow(p as u32);
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for flat in 0..total {
        let mut f = flat;
        let mut t = Vec::with_capacity(p);
        let mut remaining = 1.0;
        let mut w = 1.0;
        for i in 0..p {
            let j = f % m;
            f /= m;
            t.push(remaining * us[j]);
            w *= ws[j] * (1.0 - us[j]).powi((p - 1 - i) as i32);
            remaining *= 1.0 - us[j];
        }
        points.push(t);
        weights.push(w);
    }
    Ok(SimplexRule { p, order, points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    #[test]
    fn integrates_monomials_exactly() {
        // ∫_simplex t^a = Π a_i! / (p + Σ a_i)!
        for p in 1..=3usize {
            let rule = simplex_rule(p, 5).unwrap();
            let vol: f64 = rule.weights.iter().sum();
            assert!((vol - 1.0 / factorial(p as u32)).abs() < 1e-15);
            let exps: Vec<Vec<u32>> = match p {
                1 => vec![vec![5], vec![3]],
                2 => vec![vec![2, 3], vec![5, 0], vec![1, 1]],
                _ => vec![vec![1, 2, 2], vec![0, 0, 5], vec![3, 1, 0]],
            };
            for a in exps {
                let got: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| w * t.iter().zip(&a).map(|(x, &e)| x.powi(e as i32)).product::<f64>())
                    .sum();
                let deg: u32 = a.iter().sum();
                let want = a.iter().map(|&e| factorial(e)).product::<f64>() / factorial(p as u32 + deg);
                assert!((got - want).abs() < 1e-15, "p={p} a={a:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn points_lie_inside() {
        let rule = simplex_rule(3, 5).unwrap();
        for t in &rule.points {
            assert!(t.iter().all(|&x| x > 0.0) && t.iter().sum::<f64>() < 1.0);
        }
        assert_eq!(simplex_rule(0, 5).unwrap().weights, vec![1.0]);
    }
}
