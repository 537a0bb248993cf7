//! Points and covectors of the augmented Euclidean space.
//!
//! The augmented space is the spatial hyperplane (dimension `n̄ − 1`) plus one
//! positive normal axis. Cartesian components are used throughout, so upper and
//! lower spatial indices coincide numerically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for "lies on a submanifold" assertions.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Inputs with spatial norm or normal coordinate at or below this are rejected.
pub const DOMAIN_EPS: f64 = 1e-12;

/// Dimension `n̄` of the augmented space. The spatial dimension is `n̄ − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dim(usize);

impl Dim {
    pub fn new(n_bar: usize) -> Result<Self> {
        if n_bar < 3 {
            return Err(Error::InvalidDimension(n_bar));
        }
        Ok(Dim(n_bar))
    }

    pub fn from_spatial(spatial: usize) -> Result<Self> {
        Self::new(spatial + 1)
    }

    pub fn n_bar(self) -> usize {
        self.0
    }

    pub fn spatial(self) -> usize {
        self.0 - 1
    }
}

impl Default for Dim {
    fn default() -> Self {
        Dim(4)
    }
}

/// A point `r̄ = r⃗ + rⁿ ê_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigPoint {
    pub spatial: DVector<f64>,
    pub normal: f64,
}

impl ConfigPoint {
    pub fn new(spatial: DVector<f64>, normal: f64) -> Self {
        Self { spatial, normal }
    }

    pub fn from_slice(spatial: &[f64], normal: f64) -> Self {
        Self::new(DVector::from_column_slice(spatial), normal)
    }

    pub fn dim(&self) -> Dim {
        Dim(self.spatial.len() + 1)
    }

    pub fn spatial_norm(&self) -> f64 {
        self.spatial.norm()
    }

    /// Euclidean norm of the full augmented vector.
    pub fn norm(&self) -> f64 {
        (self.spatial.norm_squared() + self.normal * self.normal).sqrt()
    }

    pub fn in_domain(&self) -> bool {
        self.spatial_norm() > DOMAIN_EPS && self.normal > DOMAIN_EPS
    }

    pub fn check_domain(&self) -> Result<()> {
        let r = self.spatial_norm();
        if !(r > DOMAIN_EPS) {
            return Err(Error::Domain(format!("spatial norm {r:e} is not positive")));
        }
        if !(self.normal > DOMAIN_EPS) {
            return Err(Error::Domain(format!("normal coordinate {:e} is not positive", self.normal)));
        }
        Ok(())
    }

    /// The full `n̄`-vector `(r¹, …, r^{n̄−1}, rⁿ)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let d = self.spatial.len();
        DVector::from_fn(d + 1, |i, _| if i < d { self.spatial[i] } else { self.normal })
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        let d = v.len() - 1;
        Self::new(v.rows(0, d).into_owned(), v[d])
    }
}

/// A cotangent-bundle point: base point plus covector components.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub base: ConfigPoint,
    pub momentum_spatial: DVector<f64>,
    pub momentum_normal: f64,
}

impl PhasePoint {
    pub fn new(base: ConfigPoint, momentum_spatial: DVector<f64>, momentum_normal: f64) -> Result<Self> {
        check_same_len(base.spatial.len(), momentum_spatial.len())?;
        Ok(Self { base, momentum_spatial, momentum_normal })
    }

    pub fn from_slices(r: &[f64], rn: f64, p: &[f64], pn: f64) -> Result<Self> {
        Self::new(ConfigPoint::from_slice(r, rn), DVector::from_column_slice(p), pn)
    }

    pub fn dim(&self) -> Dim {
        self.base.dim()
    }

    pub fn r(&self) -> &DVector<f64> {
        &self.base.spatial
    }

    pub fn rn(&self) -> f64 {
        self.base.normal
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.momentum_spatial
    }

    pub fn pn(&self) -> f64 {
        self.momentum_normal
    }

    /// Flat layout `(r⃗, rⁿ, p⃗, pₙ)` of length `2n̄`.
    pub fn to_flat(&self) -> DVector<f64> {
        let d = self.base.spatial.len();
        let mut v = DVector::zeros(2 * d + 2);
        v.rows_mut(0, d).copy_from(&self.base.spatial);
        v[d] = self.base.normal;
        v.rows_mut(d + 1, d).copy_from(&self.momentum_spatial);
        v[2 * d + 1] = self.momentum_normal;
        v
    }

    pub fn from_flat(v: &DVector<f64>) -> Self {
        let d = v.len() / 2 - 1;
        Self {
            base: ConfigPoint::new(v.rows(0, d).into_owned(), v[d]),
            momentum_spatial: v.rows(d + 1, d).into_owned(),
            momentum_normal: v[2 * d + 1],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.base.normal.is_finite()
            && self.momentum_normal.is_finite()
            && self.base.spatial.iter().all(|x| x.is_finite())
            && self.momentum_spatial.iter().all(|x| x.is_finite())
    }
}

/// Angular momentum `ℓⁱʲ = rⁱpʲ − pⁱrʲ` with its squared norm and mass-specific magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularMomentum {
    pub matrix: DMatrix<f64>,
    pub squared_norm: f64,
    pub specific: f64,
}

impl AngularMomentum {
    pub fn magnitude(&self) -> f64 {
        self.squared_norm.sqrt()
    }
}

pub(crate) fn check_same_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    if expected + 1 < 3 {
        return Err(Error::InvalidDimension(expected + 1));
    }
    Ok(())
}

/// `ℓⁱʲ = rⁱpʲ − pⁱrʲ`.
pub fn angular_momentum_matrix(r: &DVector<f64>, p: &DVector<f64>) -> DMatrix<f64> {
    r * p.transpose() - p * r.transpose()
}

/// `ℓ² = ½ ℓⁱʲℓᵢⱼ`, summed over `i < j` without forming the matrix.
pub fn angular_momentum_sq(r: &DVector<f64>, p: &DVector<f64>) -> f64 {
    let n = r.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let l = r[i] * p[j] - p[i] * r[j];
            acc += l * l;
        }
    }
    acc
}

pub fn angular_momentum(r: &DVector<f64>, p: &DVector<f64>, m: f64) -> Result<AngularMomentum> {
    check_same_len(r.len(), p.len())?;
    let matrix = angular_momentum_matrix(r, p);
    let squared_norm = angular_momentum_sq(r, p);
    Ok(AngularMomentum { matrix, squared_norm, specific: squared_norm.sqrt() / m })
}

/// Residual `(rⁿ − b, πₙ)` for membership in `T*Σ_b`.
pub fn sigma_residual(point: &PhasePoint, b: f64) -> (f64, f64) {
    (point.base.normal - b, point.momentum_normal)
}

/// Residual `(‖r⃗‖ − b, r̂·p⃗)` for membership in `T*Q_b`.
pub fn q_residual(point: &PhasePoint, b: f64) -> Result<(f64, f64)> {
    let r = point.base.spatial_norm();
    if !(r > 0.0) {
        return Err(Error::Domain("zero spatial norm in q_residual".into()));
    }
    Ok((r - b, point.base.spatial.dot(&point.momentum_spatial) / r))
}

pub fn on_sigma(point: &PhasePoint, b: f64, tol: f64) -> bool {
    let (a, c) = sigma_residual(point, b);
    a.abs() <= tol && c.abs() <= tol
}

pub fn on_q(point: &PhasePoint, b: f64, tol: f64) -> bool {
    matches!(q_residual(point, b), Ok((a, c)) if a.abs() <= tol && c.abs() <= tol)
}
