use super::{PlaneQuadrature, PlaneTransform};
use crate::error::{Error, Result};
use crate::fields::{interpolate_cubic, FormField, GridField, GridSpec};
use crate::geometry::GrassmannRule;
use rayon::prelude::*;

/// Planes whose images are held in memory at once.
const BATCH: usize = 32;

/// `R*_k R_k α` sampled on `target`.
///
/// For every plane of `rule`, `R_kα(P, ·)` is tabulated on `image` (a
/// `k`-dimensional grid in the plane's local coordinates) and then read back
/// at `Px` by cubic interpolation; points outside the image contribute zero.
/// The summation order over planes is fixed, so results do not depend on the
/// thread count.
pub fn r_star_r_grid(alpha: &dyn FormField, rule: &GrassmannRule, q: &PlaneQuadrature, image: &GridSpec, target: &GridSpec) -> Result<GridField> {
    let n = alpha.n();
    if target.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.n });
    }
    if rule.is_empty() {
        return Err(Error::InvalidArgument("empty Grassmann rule".into()));
    }
    let k = rule.nodes[0].k();
    if image.n != k {
        return Err(Error::DimensionMismatch { expected: k, got: image.n });
    }
    let c = alpha.components();
    let mut out = GridField::zeros(target.clone(), alpha.degree());
    let nodes: Vec<_> = rule.iter().collect();
    for batch in nodes.chunks(BATCH) {
        let images = batch
            .par_iter()
            .map(|(frame, _)| {
                let plan = PlaneTransform::new(frame, alpha.degree(), q)?;
                let mut data = vec![0.0; image.len() * c];
                let mut u = vec![0.0; k];
                for (flat, row) in data.chunks_mut(c).enumerate() {
                    image.point(flat, &mut u);
                    plan.eval_into(alpha, &frame.from_local(&u), row);
                }
                Ok(data)
            })
            .collect::<Result<Vec<_>>>()?;
        out.data_mut().par_chunks_mut(c).enumerate().for_each_init(
            || (vec![0.0; n], vec![0.0; c]),
            |(x, buf), (flat, acc)| {
                target.point(flat, x);
                for ((frame, w), data) in batch.iter().zip(&images) {
                    let u = frame.to_local(x);
                    if interpolate_cubic(image, c, data, &u, buf).is_ok() {
                        for (a, b) in acc.iter_mut().zip(buf.iter()) {
                            *a += w * b;
                        }
                    }
                }
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::Multivector;
    use crate::fields::GaussianForm;
    use crate::geometry::sphere_rule;
    use crate::radon::compose_r_star_r;

    #[test]
    fn agrees_with_pointwise_composition() {
        let alpha = GaussianForm::constant(1.0, &Multivector::vector(&[0.5, -0.2, 1.0])).unwrap();
        let rule = sphere_rule(3, 16).unwrap().hyperplanes().unwrap();
        let q = PlaneQuadrature::for_gaussian(1, 1.0).unwrap();
        let image = GridSpec::new(2, 6.0, 120).unwrap();
        let target = GridSpec::new(3, 2.0, 8).unwrap();
        let grid = r_star_r_grid(&alpha, &rule, &q, &image, &target).unwrap();
        let mut x = vec![0.0; 3];
        for flat in [0, 77, 300, 511] {
            target.point(flat, &mut x);
            let want = compose_r_star_r(&alpha, &x, &rule, &q).unwrap();
            let got = grid.value(flat);
            let err: f64 = got.iter().zip(want.coeffs()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-4 * want.norm().max(1e-3), "flat {flat}: {err}");
        }
    }

    #[test]
    fn rejects_mismatched_image() {
        let alpha = GaussianForm::constant(1.0, &Multivector::vector(&[1.0, 0.0, 0.0])).unwrap();
        let rule = sphere_rule(3, 4).unwrap().hyperplanes().unwrap();
        let q = PlaneQuadrature::for_gaussian(1, 1.0).unwrap();
        let bad = GridSpec::new(3, 6.0, 8).unwrap();
        let target = GridSpec::new(3, 2.0, 4).unwrap();
        assert!(r_star_r_grid(&alpha, &rule, &q, &bad, &target).is_err());
    }
}
