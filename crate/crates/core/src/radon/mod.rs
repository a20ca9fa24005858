//! The transform `R_k` on the canonical bundle and its dual `R*_k`.
//!
//! `R_kα(P, ξ) = ∫_{P'} α(ξ + η)|_P dη` for `ξ ∈ P`, and
//! `R*_kβ(x) = ∫_{G(n,k)} β(P, Px)|_P dP` against the Haar probability measure.

mod backproject;
mod example;
mod kernel;

pub use backproject::r_star_r_grid;
pub use example::{dual_example_closed, i_minus, i_minus_numeric, i_plus, i_plus_numeric};
pub use kernel::{convolution_constant, convolve_kernel, decay_check, DecayReport, KernelQuadrature};

use crate::error::{Error, Result};
use crate::exterior::{operator_apply, Multivector};
use crate::fields::FormField;
use crate::geometry::{gauss_legendre_on, Frame, GrassmannRule};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Tensor quadrature on `[-R, R]^{k'}` (possibly graded), centered at the
/// projection of `focus` onto `P'`.
#[derive(Clone, Debug)]
pub struct PlaneQuadrature {
    pub kprime: usize,
    pub radius: f64,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly on each panel.
    pub degree: usize,
    pub focus: Option<Vec<f64>>,
}

/// Gaussian envelope at the truncation radius.
const GAUSSIAN_ENVELOPE: f64 = 1e-12;

impl PlaneQuadrature {
    fn from_axis(kprime: usize, radius: f64, xs: Vec<f64>, ws: Vec<f64>, degree: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("quadrature radius must be positive, got {radius}")));
        }
        let m = xs.len();
        let total = m.pow(kprime as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut f = flat;
            let mut node = Vec::with_capacity(kprime);
            let mut w = 1.0;
            for _ in 0..kprime {
                node.push(xs[f % m]);
                w *= ws[f % m];
                f /= m;
            }
            nodes.push(node);
            weights.push(w);
        }
        Ok(Self {
            kprime,
            radius,
            nodes,
            weights,
            degree,
            focus: None,
        })
    }

    /// Tensor Gauss–Legendre with `points` nodes per axis.
    pub fn gauss_legendre(kprime: usize, radius: f64, points: usize) -> Result<Self> {
        let (xs, ws) = gauss_legendre_on(points, -radius, radius);
        Self::from_axis(kprime, radius, xs, ws, 2 * points - 1)
    }

    /// Composite Gauss–Legendre with panels growing geometrically away from 0;
    /// meant for slowly decaying integrands.
    pub fn graded(kprime: usize, radius: f64, first: f64, panels: usize, points: usize) -> Result<Self> {
        if !(first > 0.0 && first < radius) || panels == 0 {
            return Err(Error::InvalidArgument("graded quadrature needs 0 < first < radius".into()));
        }
        let ratio = (radius / first).powf(1.0 / panels as f64);
        let mut edges = vec![0.0, first];
        for _ in 1..panels {
            edges.push(edges.last().unwrap() * ratio);
        }
        *edges.last_mut().unwrap() = radius;
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for e in edges.windows(2) {
            let (x, w) = gauss_legendre_on(points, e[0], e[1]);
            for (a, b) in x.iter().zip(&w) {
                xs.push(*a);
                ws.push(*b);
                xs.push(-*a);
                ws.push(*b);
            }
        }
        Self::from_axis(kprime, radius, xs, ws, 2 * points - 1)
    }

    /// Truncates where `e^{-λR²} = 1e-12`; about 1e-13 relative accuracy on
    /// `e^{-λ|η|²}`-type integrands.
    pub fn for_gaussian(kprime: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("decay rate must be positive".into()));
        }
        let radius = (-GAUSSIAN_ENVELOPE.ln() / lambda).sqrt();
        let points = if kprime <= 2 { 32 } else { 16 };
        Self::gauss_legendre(kprime, radius, points)
    }

    /// Re-centers the rule on the projection of `focus` into `P'`.
    pub fn with_focus(mut self, focus: Vec<f64>) -> Self {
        self.focus = Some(focus);
        self
    }
}

/// Evaluation plan for `R_kα(P, ·)` on one plane.
pub struct PlaneTransform<'a> {
    frame: &'a Frame,
    p: usize,
    restriction: Option<DMatrix<f64>>,
    offsets: Vec<Vec<f64>>,
    weights: &'a [f64],
}

impl<'a> PlaneTransform<'a> {
    pub fn new(frame: &'a Frame, p: usize, q: &'a PlaneQuadrature) -> Result<Self> {
        let n = frame.n();
        if p > frame.k() {
            return Err(Error::DegreeOutOfRange { degree: p, n: frame.k() });
        }
        if q.kprime != n - frame.k() {
            return Err(Error::DimensionMismatch {
                expected: n - frame.k(),
                got: q.kprime,
            });
        }
        if !(q.radius > 0.0) {
            return Err(Error::InvalidArgument("quadrature radius must be positive".into()));
        }
        let center: Vec<f64> = match &q.focus {
            Some(f) => (0..q.kprime)
                .map(|j| (0..n).map(|i| frame.complement()[(i, j)] * f[i]).sum())
                .collect(),
            None => vec![0.0; q.kprime],
        };
        let offsets = q
            .nodes
            .iter()
            .map(|eta| {
                let shifted: Vec<f64> = eta.iter().zip(&center).map(|(a, b)| a + b).collect();
                frame.from_complement(&shifted)
            })
            .collect();
        let restriction = (p > 0).then(|| frame.restriction(p).map(|r| r.matrix)).transpose()?;
        Ok(Self {
            frame,
            p,
            restriction,
            offsets,
            weights: &q.weights,
        })
    }

    /// `R_kα(P, ξ)` written into `out`; `ξ` is assumed to lie in `P`.
    pub fn eval_into(&self, alpha: &dyn FormField, xi: &[f64], out: &mut [f64]) {
        let n = xi.len();
        let c = out.len();
        let mut acc = vec![0.0; c];
        let mut buf = vec![0.0; c];
        let mut y = vec![0.0; n];
        for (off, w) in self.offsets.iter().zip(self.weights) {
            for i in 0..n {
                y[i] = xi[i] + off[i];
            }
            alpha.eval_into(&y, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        }
        match &self.restriction {
            Some(r) => operator_apply(r, &acc, out),
            None => out.copy_from_slice(&acc),
        }
    }

    pub fn frame(&self) -> &Frame {
        self.frame
    }

    pub fn degree(&self) -> usize {
        self.p
    }
}

/// `R_kα(P, ξ)`; `ξ` is first projected onto `P`.
pub fn forward(alpha: &dyn FormField, frame: &Frame, xi: &[f64], q: &PlaneQuadrature) -> Result<Multivector> {
    if alpha.n() != frame.n() || xi.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            got: alpha.n().min(xi.len()),
        });
    }
    let plan = PlaneTransform::new(frame, alpha.degree(), q)?;
    let xi = frame.project_point(xi);
    let mut out = vec![0.0; alpha.components()];
    plan.eval_into(alpha, &xi, &mut out);
    Multivector::from_coeffs(frame.n(), alpha.degree(), out)
}

/// `R*_kβ(x)`: the rule-weighted average of `β(P, Px)|_P`.
pub fn dual<B>(beta: B, x: &[f64], rule: &GrassmannRule) -> Result<Multivector>
where
    B: Fn(&Frame, &[f64]) -> Result<Multivector>,
{
    if rule.is_empty() {
        return Err(Error::InvalidArgument("empty Grassmann rule".into()));
    }
    let mut acc: Option<Multivector> = None;
    for (frame, w) in rule.iter() {
        let value = beta(frame, &frame.project_point(x))?;
        let restricted = if value.degree() > 0 {
            frame.restriction(value.degree())?.apply(&value)
        } else {
            value
        };
        match acc.as_mut() {
            Some(a) => a.axpy(w, &restricted),
            None => acc = Some(restricted.scale(w)),
        }
    }
    Ok(acc.expect("rule is non-empty"))
}

/// `R*_k R_k α(x)` with the given plane rule and fiber quadrature.
pub fn compose_r_star_r(alpha: &dyn FormField, x: &[f64], rule: &GrassmannRule, q: &PlaneQuadrature) -> Result<Multivector> {
    dual(|frame, xi| forward(alpha, frame, xi, q), x, rule)
}

/// One value of a transform on the canonical bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalSample {
    pub frame: Frame,
    pub xi: Vec<f64>,
    pub value: Multivector,
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    frame: Vec<f64>,
    xi: Vec<f64>,
    value: Vec<f64>,
}

impl CanonicalSample {
    /// Projects `xi` onto `P` and `value` onto `Λ^p P`.
    pub fn new(frame: Frame, xi: &[f64], value: &Multivector) -> Result<Self> {
        let xi = frame.project_point(xi);
        let value = if value.degree() > 0 {
            frame.restriction(value.degree())?.apply(value)
        } else {
            value.clone()
        };
        Ok(Self { frame, xi, value })
    }

    /// `{frame: column-major basis, xi, value}` as one JSON line.
    pub fn write_json_line(&self, mut w: impl Write) -> Result<()> {
        let line = SampleLine {
            frame: self.frame.basis_column_major(),
            xi: self.xi.clone(),
            value: self.value.coeffs().to_vec(),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
        Ok(())
    }
}
