//! Compactly supported `p`-currents as weighted simplicial chains, their
//! projections into `k`-planes, and reconstruction of `T[α]` from projections.

mod quadrature;

pub use quadrature::{simplex_rule, SimplexRule};

use crate::error::{Error, Result};
use crate::exterior::{binomial, induced_map_rect, Multivector};
use crate::fields::{sample_to_grid, FormField, GridSpec, ZeroExtended};
use crate::geometry::{Frame, GrassmannRule};
use crate::radon::{forward, PlaneQuadrature};
use crate::spectral::{apply_inverse_symbol, inversion_constant, InvertOptions};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Oriented `p`-simplex `[v_0, …, v_p]` with a real multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<Vec<f64>>,
    pub weight: f64,
}

impl Simplex {
    /// `(v_1 − v_0) ∧ … ∧ (v_p − v_0)` as blade coefficients.
    pub fn tangent(&self, n: usize) -> Vec<f64> {
        let p = self.vertices.len() - 1;
        if p == 0 {
            return vec![1.0];
        }
        let v0 = &self.vertices[0];
        let edges = DMatrix::from_fn(n, p, |i, j| self.vertices[j + 1][i] - v0[i]);
        induced_map_rect(&edges, p).column(0).iter().copied().collect()
    }

    /// `p`-dimensional volume.
    pub fn volume(&self, n: usize) -> f64 {
        let p = self.vertices.len() - 1;
        let t = self.tangent(n);
        t.iter().map(|v| v * v).sum::<f64>().sqrt() / (1..=p).product::<usize>() as f64
    }

    fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        if vertices.len() >= 2 {
            vertices.swap(0, 1);
            Self { vertices, weight: self.weight }
        } else {
            Self {
                vertices,
                weight: -self.weight,
            }
        }
    }
}

/// A polyhedral `p`-current on `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentChain {
    pub n: usize,
    pub p: usize,
    pub simplices: Vec<Simplex>,
}

/// Smallest `p`-volume accepted by [`CurrentChain::new`].
pub const MIN_VOLUME: f64 = 1e-12;

impl CurrentChain {
    pub fn new(n: usize, p: usize, simplices: Vec<Simplex>) -> Result<Self> {
        let chain = Self::unchecked(n, p, simplices)?;
        if p > 0 {
            if let Some(s) = chain.simplices.iter().find(|s| s.volume(n) <= MIN_VOLUME) {
                return Err(Error::InvalidArgument(format!("degenerate simplex {:?}", s.vertices)));
            }
        }
        Ok(chain)
    }

    /// Shape checks only; projections may flatten simplices.
    fn unchecked(n: usize, p: usize, simplices: Vec<Simplex>) -> Result<Self> {
        if p > n {
            return Err(Error::DegreeOutOfRange { degree: p, n });
        }
        for s in &simplices {
            if s.vertices.len() != p + 1 || s.vertices.iter().any(|v| v.len() != n) {
                return Err(Error::DimensionMismatch { expected: p + 1, got: s.vertices.len() });
            }
            if !s.weight.is_finite() || s.vertices.iter().flatten().any(|t| !t.is_finite()) {
                return Err(Error::InvalidArgument("non-finite vertex or weight".into()));
            }
        }
        Ok(Self { n, p, simplices })
    }

    /// Closed polygon through `points` (edges `points[i] → points[i+1]`).
    pub fn polygon(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.len());
        let m = points.len();
        let simplices = (0..m)
            .map(|i| Simplex {
                vertices: vec![points[i].clone(), points[(i + 1) % m].clone()],
                weight: 1.0,
            })
            .collect();
        Self::new(n, 1, simplices)
    }

    /// Counter-clockwise circle of the given radius in the plane of axes
    /// `(a, b)`, inscribed polygon with `edges` sides.
    pub fn circle(n: usize, center: &[f64], radius: f64, axes: (usize, usize), edges: usize) -> Result<Self> {
        if center.len() != n || axes.0 >= n || axes.1 >= n || axes.0 == axes.1 || edges < 3 {
            return Err(Error::InvalidArgument("bad circle specification".into()));
        }
        let points: Vec<Vec<f64>> = (0..edges)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / edges as f64;
                let mut x = center.to_vec();
                x[axes.0] += radius * t.cos();
                x[axes.1] += radius * t.sin();
                x
            })
            .collect();
        Self::polygon(&points)
    }

    /// Weighted point masses, a `0`-current.
    pub fn points(points: &[(Vec<f64>, f64)]) -> Result<Self> {
        let n = points.first().map_or(0, |p| p.0.len());
        let simplices = points
            .iter()
            .map(|(x, w)| Simplex {
                vertices: vec![x.clone()],
                weight: *w,
            })
            .collect();
        Self::new(n, 0, simplices)
    }

    /// Largest vertex norm.
    pub fn support_radius(&self) -> f64 {
        self.simplices
            .iter()
            .flat_map(|s| &s.vertices)
            .map(|v| v.iter().map(|t| t * t).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn reversed(&self) -> Self {
        Self {
            n: self.n,
            p: self.p,
            simplices: self.simplices.iter().map(Simplex::reversed).collect(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let simplices = self
            .simplices
            .iter()
            .map(|s| Simplex {
                vertices: s.vertices.iter().map(|v| v.iter().zip(shift).map(|(a, b)| a + b).collect()).collect(),
                weight: s.weight,
            })
            .collect();
        Self {
            n: self.n,
            p: self.p,
            simplices,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw: Self = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        Self::new(raw.n, raw.p, raw.simplices)
    }
}

/// `T[α]` with the default order-5 simplex rule.
pub fn pair(t: &CurrentChain, alpha: &dyn FormField) -> Result<f64> {
    pair_with(t, alpha, &simplex_rule(t.p, 5)?)
}

/// `Σ_s w_s Σ_q w_q ⟨α(x_q), (v_1−v_0)∧…∧(v_p−v_0)⟩`, the rule weights summing
/// to the reference volume `1/p!`.
pub fn pair_with(t: &CurrentChain, alpha: &dyn FormField, rule: &SimplexRule) -> Result<f64> {
    if alpha.degree() != t.p || alpha.n() != t.n {
        return Err(Error::InvalidArgument(format!(
            "cannot pair a {}-current on R^{} with a {}-form on R^{}",
            t.p,
            t.n,
            alpha.degree(),
            alpha.n()
        )));
    }
    pair_fn(t, rule, |x, out| {
        alpha.eval_into(x, out);
        Ok(())
    })
}

fn pair_fn<F>(t: &CurrentChain, rule: &SimplexRule, mut eval: F) -> Result<f64>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if rule.p != t.p {
        return Err(Error::DimensionMismatch { expected: t.p, got: rule.p });
    }
    let n = t.n;
    let mut buf = vec![0.0; binomial(n, t.p)];
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for s in &t.simplices {
        let tangent = s.tangent(n);
        let v0 = &s.vertices[0];
        let mut acc = 0.0;
        for (local, w) in rule.points.iter().zip(&rule.weights) {
            x.copy_from_slice(v0);
            for (j, lj) in local.iter().enumerate() {
                for i in 0..n {
                    x[i] += lj * (s.vertices[j + 1][i] - v0[i]);
                }
            }
            eval(&x, &mut buf)?;
            acc += w * buf.iter().zip(&tangent).map(|(a, b)| a * b).sum::<f64>();
        }
        total += s.weight * acc;
    }
    Ok(total)
}

/// `P_*T`, stored with ambient coordinates of points in `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedCurrent {
    pub frame: Frame,
    pub chain: CurrentChain,
}

/// Replaces every vertex `v` by `Pv`; weights are kept.
pub fn project(t: &CurrentChain, frame: &Frame) -> Result<ProjectedCurrent> {
    if frame.n() != t.n {
        return Err(Error::DimensionMismatch { expected: t.n, got: frame.n() });
    }
    if t.p > frame.k() {
        return Err(Error::DegreeOutOfRange { degree: t.p, n: frame.k() });
    }
    let simplices = t
        .simplices
        .iter()
        .map(|s| Simplex {
            vertices: s.vertices.iter().map(|v| frame.project_point(v)).collect(),
            weight: s.weight,
        })
        .collect();
    Ok(ProjectedCurrent {
        frame: frame.clone(),
        chain: CurrentChain::unchecked(t.n, t.p, simplices)?,
    })
}

/// `∫_{G(n,k)} P_*T[β(P, ·)] dP` over a plane rule; the per-plane pairings
/// run in parallel and are summed in rule order.
pub fn synthesize_pairing<B>(t: &CurrentChain, beta: B, rule: &GrassmannRule) -> Result<f64>
where
    B: Fn(&Frame, &[f64]) -> Result<Multivector> + Sync,
{
    let srule = simplex_rule(t.p, 5)?;
    let c = binomial(t.n, t.p);
    let terms = rule
        .nodes
        .par_iter()
        .map(|frame| {
            let projected = project(t, frame)?;
            pair_fn(&projected.chain, &srule, |x, out| {
                let v = beta(frame, x)?;
                if v.degree() != t.p || v.coeffs().len() != c {
                    return Err(Error::DegreeOutOfRange { degree: v.degree(), n: t.n });
                }
                out.copy_from_slice(v.coeffs());
                Ok(())
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().zip(&rule.weights).map(|(v, w)| v * w).sum())
}

/// Settings for [`reconstruct_pairing`].
#[derive(Clone, Debug)]
pub struct ReconstructionConfig {
    pub k: usize,
    /// Grid on which `φ` is computed from `α`.
    pub grid: GridSpec,
    /// Fiber quadrature for `R_k φ`; should cover the grid.
    pub fiber: PlaneQuadrature,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    pub reconstructed: f64,
    pub direct: f64,
    pub rel_error: f64,
    pub constant: f64,
}

/// `T[α]` rebuilt from projections: `φ = F^{-1}(|ξ|^{k'}(Π/(k−p) + Φ/(n−p))Fα)`
/// on the grid, `β = C R_k φ`, and `∫ P_*T[β(P, ·)] dP`.
pub fn reconstruct_pairing(t: &CurrentChain, alpha: &dyn FormField, rule: &GrassmannRule, cfg: &ReconstructionConfig) -> Result<ReconstructionReport> {
    let n = t.n;
    let p = t.p;
    if alpha.n() != n || alpha.degree() != p || cfg.grid.n != n {
        return Err(Error::InvalidArgument("current, form and grid disagree in shape".into()));
    }
    let constant = inversion_constant(n, cfg.k, p)?;
    let phi = apply_inverse_symbol(&sample_to_grid(alpha, &cfg.grid)?, cfg.k, 1.0, &InvertOptions::default())?;
    let phi = ZeroExtended(&phi);
    let beta = |frame: &Frame, xi: &[f64]| -> Result<Multivector> { Ok(forward(&phi, frame, xi, &cfg.fiber)?.scale(constant)) };
    let reconstructed = synthesize_pairing(t, beta, rule)?;
    let direct = pair(t, alpha)?;
    let rel_error = if direct != 0.0 {
        (reconstructed - direct).abs() / direct.abs()
    } else {
        (reconstructed - direct).abs()
    };
    Ok(ReconstructionReport {
        reconstructed,
        direct,
        rel_error,
        constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{k_planar, AnalyticForm, GaussianForm};
    use crate::geometry::{haar_sample, sphere_rule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn area_form() -> impl FormField {
        AnalyticForm::new(3, 1, |x: &[f64], o: &mut [f64]| {
            o[0] = -0.5 * x[1];
            o[1] = 0.5 * x[0];
            o[2] = 0.0;
        })
    }

    #[test]
    fn segment_and_circle() {
        let seg = CurrentChain::new(3, 1, vec![Simplex {
            vertices: vec![vec![0.0; 3], vec![1.0, 0.0, 0.0]],
            weight: 1.0,
        }])
        .unwrap();
        let dx1 = AnalyticForm::new(3, 1, |_: &[f64], o: &mut [f64]| {
            o.copy_from_slice(&[1.0, 0.0, 0.0]);
        });
        assert!((pair(&seg, &dx1).unwrap() - 1.0).abs() < 1e-15);
        let circle = CurrentChain::circle(3, &[0.0; 3], 1.0, (0, 1), 256).unwrap();
        let v = pair(&circle, &area_form()).unwrap();
        assert!((v - PI).abs() < 1e-3);
        // the inscribed polygon's area exactly
        assert!((v - 128.0 * (2.0 * PI / 256.0).sin()).abs() < 1e-13);
        assert!((pair(&circle.reversed(), &area_form()).unwrap() + v).abs() < 1e-13);
        assert!(pair(&circle, &dx1).unwrap().abs() < 1e-13);
    }

    #[test]
    fn linear_in_both_arguments() {
        let a = CurrentChain::circle(3, &[0.1, 0.0, 0.2], 0.7, (0, 2), 40).unwrap();
        let b = CurrentChain::circle(3, &[0.0, -0.3, 0.0], 1.1, (1, 2), 30).unwrap();
        let f = GaussianForm::shifted(1.0, &Multivector::vector(&[0.3, -0.5, 0.9]), vec![0.2, 0.1, 0.0]).unwrap();
        let g = GaussianForm::shifted(0.5, &Multivector::vector(&[1.0, 0.2, 0.0]), vec![0.0, 0.4, -0.1]).unwrap();
        let mut both = a.clone();
        both.simplices.extend(b.simplices.iter().map(|s| Simplex {
            vertices: s.vertices.clone(),
            weight: -2.5 * s.weight,
        }));
        let lhs = pair(&both, &f).unwrap();
        let rhs = pair(&a, &f).unwrap() - 2.5 * pair(&b, &f).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
        let sum = f.scale(0.4).add(&g.scale(1.7)).ok();
        // different centers do not combine into one GaussianForm, so pair the sum pointwise
        assert!(sum.is_none());
        let fg = AnalyticForm::new(3, 1, |x: &[f64], o: &mut [f64]| {
            let (u, v) = (f.eval(x), g.eval(x));
            for i in 0..3 {
                o[i] = 0.4 * u.coeffs()[i] + 1.7 * v.coeffs()[i];
            }
        });
        let lhs = pair(&a, &fg).unwrap();
        let rhs = 0.4 * pair(&a, &f).unwrap() + 1.7 * pair(&a, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let flat = vec![Simplex {
            vertices: vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]],
            weight: 1.0,
        }];
        assert!(CurrentChain::new(3, 2, flat).is_err());
        let circle = CurrentChain::circle(3, &[0.0; 3], 1.0, (0, 1), 8).unwrap();
        let two_form = AnalyticForm::new(3, 2, |_: &[f64], o: &mut [f64]| o.fill(0.0));
        assert!(pair(&circle, &two_form).is_err());
        let line = Frame::coordinate(3, &[0]).unwrap();
        let surface = CurrentChain::new(3, 2, vec![Simplex {
            vertices: vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            weight: 1.0,
        }])
        .unwrap();
        assert!(project(&surface, &line).is_err());
    }

    fn random_chain(rng: &mut ChaCha8Rng) -> CurrentChain {
        let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        CurrentChain::polygon(&pts).unwrap()
    }

    #[test]
    fn projection_is_adjoint_to_pullback() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let planes = haar_sample(3, 2, 20, 12).unwrap();
        for frame in &planes.nodes {
            let t = random_chain(&mut rng);
            let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..1.0));
            let psi = AnalyticForm::new(2, 1, move |u: &[f64], o: &mut [f64]| {
                let e = (-c * (u[0] * u[0] + u[1] * u[1])).exp();
                o[0] = (a + u[1]) * e;
                o[1] = (b - u[0] * u[1]) * e;
            });
            let pulled = k_planar(frame, psi).unwrap();
            let projected = project(&t, frame).unwrap();
            let lhs = pair(&projected.chain, &pulled).unwrap();
            let rhs = pair(&t, &pulled).unwrap();
            assert!((lhs - rhs).abs() < 1e-6 * rhs.abs().max(1.0));
            for s in &projected.chain.simplices {
                for v in &s.vertices {
                    let back = frame.project_point(v);
                    assert!(v.iter().zip(&back).all(|(x, y)| (x - y).abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn projection_examples() {
        let frame = Frame::coordinate(3, &[0, 1]).unwrap();
        let inside = CurrentChain::circle(3, &[0.0; 3], 1.0, (0, 1), 16).unwrap();
        assert_eq!(project(&inside, &frame).unwrap().chain, inside);
        // a circle in the x₁x₃-plane collapses to a doubly covered segment
        let upright = CurrentChain::circle(3, &[0.0; 3], 1.0, (0, 2), 64).unwrap();
        let flat = project(&upright, &frame).unwrap();
        let psi = AnalyticForm::new(2, 1, |u: &[f64], o: &mut [f64]| {
            o[0] = u[0] * u[0] + u[1];
            o[1] = u[0];
        });
        let pulled = k_planar(&frame, psi).unwrap();
        assert!(pair(&flat.chain, &pulled).unwrap().abs() < 1e-12);
        assert!(pair(&upright, &pulled).unwrap().abs() < 1e-12);
        let shifted = upright.translated(&[0.0, 0.0, 3.5]);
        assert_eq!(project(&shifted, &frame).unwrap(), flat);
    }

    #[test]
    fn chain_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.json");
        let c = CurrentChain::circle(3, &[0.0; 3], 2.0, (1, 2), 12).unwrap();
        c.save(&path).unwrap();
        assert_eq!(CurrentChain::load(&path).unwrap(), c);
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["simplices"][0]["vertices"].as_array().unwrap().len(), 2);
        assert!((c.support_radius() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn synthesis_ignores_components_off_the_plane() {
        let t = CurrentChain::circle(3, &[0.2, 0.0, 0.0], 1.0, (0, 1), 64).unwrap();
        let rule = sphere_rule(3, 8).unwrap().hyperplanes().unwrap();
        let v = Multivector::vector(&[0.3, 1.0, -0.4]);
        let base = |f: &Frame, xi: &[f64]| -> Result<Multivector> {
            let r2: f64 = xi.iter().map(|t| t * t).sum();
            Ok(f.restriction(1)?.apply(&v).scale((-r2).exp()))
        };
        let gauged = |f: &Frame, xi: &[f64]| -> Result<Multivector> {
            let normal: Vec<f64> = f.complement().column(0).iter().copied().collect();
            Ok(base(f, xi)?.add(&Multivector::vector(&normal).scale(2.0 + xi[1])))
        };
        let a = synthesize_pairing(&t, base, &rule).unwrap();
        let b = synthesize_pairing(&t, gauged, &rule).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
        assert!(synthesize_pairing(&t, |_: &Frame, _: &[f64]| Ok(Multivector::scalar(3, 1.0)), &rule).is_err());
    }

    #[test]
    fn point_mass_reconstruction() {
        let t = CurrentChain::points(&[(vec![0.3, 0.2, -0.1], 1.0)]).unwrap();
        let alpha = GaussianForm::constant(1.0, &Multivector::scalar(3, 1.0)).unwrap();
        let grid = GridSpec::new(3, 6.0, 48).unwrap();
        let reach = 6.0 * 3f64.sqrt();
        let cfg = ReconstructionConfig {
            k: 2,
            grid,
            fiber: PlaneQuadrature::gauss_legendre(1, reach, 160).unwrap(),
        };
        let rule = sphere_rule(3, 24).unwrap().hyperplanes().unwrap();
        let report = reconstruct_pairing(&t, &alpha, &rule, &cfg).unwrap();
        assert!((report.direct - (-0.14f64).exp()).abs() < 1e-14);
        assert!(report.rel_error < 0.02, "{report:?}");
        let zero = GaussianForm::constant(1.0, &Multivector::scalar(3, 0.0)).unwrap();
        assert_eq!(reconstruct_pairing(&t, &zero, &rule, &cfg).unwrap().reconstructed, 0.0);
    }
}
