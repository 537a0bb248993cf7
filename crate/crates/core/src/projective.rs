//! The projective point map `ψ(q̄) = q̂/qⁿ + ‖q⃗‖ ê_n`, its Jacobians, its
//! cotangent lift and the induced kinetic-energy metric.
//!
//! `ψ` is a diffeomorphism of the augmented space onto itself. It trades the
//! radius for a direction and an inverse radius: the image has `xⁿ = ‖q⃗‖` and
//! `‖x⃗‖ = 1/qⁿ`. Everything here rejects points outside the augmented space
//! instead of returning non-finite values.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::euclidean::{ConfigPoint, PhasePoint};

/// `dψ` at a base point together with `(dψ⁻¹)∘ψ` at the same base point.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianPair {
    pub forward: DMatrix<f64>,
    pub inverse_at_image: DMatrix<f64>,
}

/// `g = ψ*m` and its inverse, in cartesian components.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedMetric {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

/// Radius, unit direction and normal coordinate of a validated point.
struct Polar {
    radius: f64,
    unit: DVector<f64>,
    normal: f64,
}

fn polar(point: &ConfigPoint) -> Result<Polar> {
    point.check_domain()?;
    let radius = point.spatial_norm();
    Ok(Polar { radius, unit: &point.spatial / radius, normal: point.normal })
}

/// `I − ûûᵀ`.
fn tangential_projector(unit: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::identity(unit.len(), unit.len()) - unit * unit.transpose()
}

pub fn project_point(q: &ConfigPoint) -> Result<ConfigPoint> {
    let Polar { radius, unit, normal } = polar(q)?;
    Ok(ConfigPoint::new(unit / normal, radius))
}

pub fn unproject_point(x: &ConfigPoint) -> Result<ConfigPoint> {
    let Polar { radius, unit, normal } = polar(x)?;
    Ok(ConfigPoint::new(unit * normal, 1.0 / radius))
}

pub fn jacobians(q: &ConfigPoint) -> Result<JacobianPair> {
    let Polar { radius, unit, normal } = polar(q)?;
    let d = unit.len();
    let proj = tangential_projector(&unit);

    let mut forward = DMatrix::zeros(d + 1, d + 1);
    forward.view_mut((0, 0), (d, d)).copy_from(&(&proj / (normal * radius)));
    forward.view_mut((0, d), (d, 1)).copy_from(&(&unit * (-1.0 / (normal * normal))));
    forward.view_mut((d, 0), (1, d)).copy_from(&unit.transpose());

    // dψ⁻¹ evaluated at x = ψ(q), where x̂ = q̂, xⁿ = ‖q⃗‖ and ‖x⃗‖ = 1/qⁿ.
    let mut inverse_at_image = DMatrix::zeros(d + 1, d + 1);
    inverse_at_image.view_mut((0, 0), (d, d)).copy_from(&(&proj * (normal * radius)));
    inverse_at_image.view_mut((0, d), (d, 1)).copy_from(&unit);
    inverse_at_image.view_mut((d, 0), (1, d)).copy_from(&(unit.transpose() * (-normal * normal)));

    Ok(JacobianPair { forward, inverse_at_image })
}

/// `T*ψ`: maps `(q̄, μ̄)` to `(x̄, κ̄)`.
pub fn cotangent_lift(mu: &PhasePoint) -> Result<PhasePoint> {
    let Polar { radius, unit, normal } = polar(&mu.base)?;
    let m = &mu.momentum_spatial;
    let radial = m.dot(&unit);
    let kappa = (m - &unit * radial) * (normal * radius) - &unit * (normal * normal * mu.momentum_normal);
    Ok(PhasePoint { base: ConfigPoint::new(&unit / normal, radius), momentum_spatial: kappa, momentum_normal: radial })
}

/// `(T*ψ)⁻¹`: maps `(x̄, κ̄)` back to `(q̄, μ̄)`.
pub fn cotangent_unlift(kappa: &PhasePoint) -> Result<PhasePoint> {
    let Polar { radius, unit, normal } = polar(&kappa.base)?;
    let k = &kappa.momentum_spatial;
    let radial = k.dot(&unit);
    let mu = (k - &unit * radial) * (radius / normal) + &unit * kappa.momentum_normal;
    Ok(PhasePoint {
        base: ConfigPoint::new(&unit * normal, 1.0 / radius),
        momentum_spatial: mu,
        momentum_normal: -radius * radius * radial,
    })
}

pub fn induced_metric(q: &ConfigPoint, m: f64) -> Result<InducedMetric> {
    let Polar { radius, unit, normal } = polar(q)?;
    let d = unit.len();
    let proj = tangential_projector(&unit);
    let radial = &unit * unit.transpose();
    let scale = normal * normal * radius * radius;

    let mut g = DMatrix::zeros(d + 1, d + 1);
    g.view_mut((0, 0), (d, d)).copy_from(&((&proj / scale + &radial) * m));
    g[(d, d)] = m / normal.powi(4);

    let mut g_inv = DMatrix::zeros(d + 1, d + 1);
    g_inv.view_mut((0, 0), (d, d)).copy_from(&((&proj * scale + &radial) / m));
    g_inv[(d, d)] = normal.powi(4) / m;

    Ok(InducedMetric { g, g_inv })
}

/// Passive-coordinate form of `(T*ψ)⁻¹`: `q̄ = ψ⁻¹(x̄)` and `μ̄ = dψ|_q̄ᵀ κ̄`.
///
/// Built from the forward Jacobian rather than the closed-form unlift so the two
/// can be checked against each other.
pub fn passive_coords(kappa: &PhasePoint) -> Result<PhasePoint> {
    let q = unproject_point(&kappa.base)?;
    let JacobianPair { forward, .. } = jacobians(&q)?;
    let d = q.spatial.len();
    let mut covector = DVector::zeros(d + 1);
    covector.rows_mut(0, d).copy_from(&kappa.momentum_spatial);
    covector[d] = kappa.momentum_normal;
    let mu = forward.transpose() * covector;
    Ok(PhasePoint { base: q, momentum_spatial: mu.rows(0, d).into_owned(), momentum_normal: mu[d] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::{angular_momentum_sq, q_residual};
    use approx::assert_relative_eq;

    fn cp(r: &[f64], rn: f64) -> ConfigPoint {
        ConfigPoint::from_slice(r, rn)
    }

    fn assert_vec(a: &DVector<f64>, b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn project_examples() {
        let x = project_point(&cp(&[1.0, 0.0, 0.0], 1.0)).unwrap();
        assert_vec(&x.spatial, &[1.0, 0.0, 0.0], 0.0);
        assert_eq!(x.normal, 1.0);

        let x = project_point(&cp(&[2.0, 0.0, 0.0], 1.0)).unwrap();
        assert_vec(&x.spatial, &[1.0, 0.0, 0.0], 0.0);
        assert_eq!(x.normal, 2.0);

        let x = project_point(&cp(&[0.0, 1.0, 0.0], 0.5)).unwrap();
        assert_vec(&x.spatial, &[0.0, 2.0, 0.0], 0.0);
        assert_eq!(x.normal, 1.0);
    }

    #[test]
    fn unproject_examples() {
        let q = unproject_point(&cp(&[2.0, 0.0, 0.0], 3.0)).unwrap();
        assert_vec(&q.spatial, &[3.0, 0.0, 0.0], 0.0);
        assert_eq!(q.normal, 0.5);
        let q = unproject_point(&cp(&[1.0, 0.0, 0.0], 1.0)).unwrap();
        assert_vec(&q.spatial, &[1.0, 0.0, 0.0], 0.0);
        assert_eq!(q.normal, 1.0);
    }

    #[test]
    fn domain_rejection() {
        assert!(project_point(&cp(&[0.0, 0.0, 0.0], 1.0)).is_err());
        assert!(project_point(&cp(&[1.0, 0.0, 0.0], 0.0)).is_err());
        assert!(unproject_point(&cp(&[1.0, 0.0, 0.0], -1.0)).is_err());
        assert!(jacobians(&cp(&[1.0, 0.0, 0.0], 1e-13)).is_err());
        let bad = PhasePoint::from_slices(&[0.0, 0.0, 0.0], 1.0, &[1.0, 0.0, 0.0], 0.0).unwrap();
        assert!(cotangent_lift(&bad).is_err());
        assert!(cotangent_unlift(&bad).is_err());
        assert!(passive_coords(&bad).is_err());
        assert!(induced_metric(&bad.base, 1.0).is_err());
    }

    #[test]
    fn jacobian_at_unit_point() {
        let j = jacobians(&cp(&[1.0, 0.0, 0.0], 1.0)).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, -1.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
        ]);
        assert_relative_eq!(j.forward, expected, epsilon = 1e-15);
        let prod = &j.forward * &j.inverse_at_image;
        assert_relative_eq!(prod, DMatrix::identity(4, 4), epsilon = 1e-12);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let q = cp(&[0.4, -1.3, 0.8], 0.7);
        let j = jacobians(&q).unwrap();
        let h = 1e-6;
        let base = q.to_vector();
        for col in 0..4 {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[col] += h;
            minus[col] -= h;
            let fp = project_point(&ConfigPoint::from_vector(&plus)).unwrap().to_vector();
            let fm = project_point(&ConfigPoint::from_vector(&minus)).unwrap().to_vector();
            let fd = (fp - fm) / (2.0 * h);
            for row in 0..4 {
                assert!((fd[row] - j.forward[(row, col)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn lift_example() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 2.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let k = cotangent_lift(&mu).unwrap();
        assert_vec(&k.base.spatial, &[0.5, 0.0, 0.0], 1e-15);
        assert_eq!(k.base.normal, 1.0);
        assert_vec(&k.momentum_spatial, &[0.0, 2.0, 0.0], 1e-15);
        assert_eq!(k.momentum_normal, 0.0);
        assert_relative_eq!(angular_momentum_sq(mu.r(), mu.p()), 1.0);
        assert_relative_eq!(angular_momentum_sq(k.r(), k.p()), 1.0);

        let back = cotangent_unlift(&k).unwrap();
        assert_vec(&back.base.spatial, &[1.0, 0.0, 0.0], 1e-15);
        assert_eq!(back.base.normal, 2.0);
        assert_vec(&back.momentum_spatial, &[0.0, 1.0, 0.0], 1e-15);
        assert_eq!(back.momentum_normal, 0.0);
    }

    #[test]
    fn zero_covector_lifts_to_zero() {
        let mu = PhasePoint::from_slices(&[0.3, 0.2, -0.5], 1.7, &[0.0; 3], 0.0).unwrap();
        let k = cotangent_lift(&mu).unwrap();
        assert!(k.momentum_spatial.iter().all(|&x| x == 0.0));
        assert_eq!(k.momentum_normal, 0.0);
    }

    #[test]
    fn radial_covector_unlift() {
        let c = 0.75;
        let x = [1.2, -0.4, 0.9];
        let xv = DVector::from_column_slice(&x);
        let r = xv.norm();
        let kappa = PhasePoint::new(cp(&x, 1.3), &xv / r * c, 0.0).unwrap();
        let mu = cotangent_unlift(&kappa).unwrap();
        assert!(mu.momentum_spatial.norm() < 1e-15);
        assert_relative_eq!(mu.momentum_normal, -c * r * r, max_relative = 1e-14);
    }

    #[test]
    fn sigma_one_maps_to_q_one() {
        let kappa = PhasePoint::from_slices(&[0.3, 1.1, -0.6], 1.0, &[0.5, -0.2, 0.8], 0.0).unwrap();
        let mu = cotangent_unlift(&kappa).unwrap();
        let (a, b) = q_residual(&mu, 1.0).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn metric_examples() {
        let q = cp(&[1.0, 0.0, 0.0], 1.0);
        let met = induced_metric(&q, 1.0).unwrap();
        assert_relative_eq!(met.g, DMatrix::identity(4, 4), epsilon = 1e-15);

        let q = cp(&[0.3, -0.9, 1.4], 0.6);
        let m = 2.5;
        let met = induced_metric(&q, m).unwrap();
        let j = jacobians(&q).unwrap();
        let pullback = j.forward.transpose() * &j.forward * m;
        assert_relative_eq!(met.g, pullback, max_relative = 1e-12, epsilon = 1e-12);
        assert_relative_eq!(&met.g * &met.g_inv, DMatrix::identity(4, 4), epsilon = 1e-11);
        let r = q.spatial_norm();
        let expected_det = m.powi(4) / (q.normal.powi(8) * r.powi(4));
        assert_relative_eq!(met.g.determinant(), expected_det, max_relative = 1e-10);
    }

    #[test]
    fn passive_matches_unlift() {
        let kappa = PhasePoint::from_slices(&[0.3, 1.1, -0.6], 0.8, &[0.5, -0.2, 0.8], 0.4).unwrap();
        let a = passive_coords(&kappa).unwrap();
        let b = cotangent_unlift(&kappa).unwrap();
        assert_relative_eq!(a.to_flat(), b.to_flat(), epsilon = 1e-13);
        // r⃗·π⃗ = −qⁿpₙ
        let lhs = kappa.r().dot(kappa.p());
        assert_relative_eq!(lhs, -a.rn() * a.pn(), max_relative = 1e-13);
        let la = crate::euclidean::angular_momentum_matrix(a.r(), a.p());
        let lk = crate::euclidean::angular_momentum_matrix(kappa.r(), kappa.p());
        assert_relative_eq!(la, lk, epsilon = 1e-13);
    }
}
