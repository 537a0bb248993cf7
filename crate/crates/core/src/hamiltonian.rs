//! Original and transformed Hamiltonians, force models and the time-parameterized
//! vector field of the transformed system.
//!
//! The original system is `K = (‖π⃗‖² + πₙ²)/2m + V⁰(‖x⃗‖) + V¹(x⃗, t)` with an
//! optional nonconservative force `f`. The transformed system uses the reduced
//! Hamiltonian
//!
//! ```text
//! 𝓗 = (rₙ²/2m)(ℓ² + rₙ²πₙ²) + U⁰(rⁿ) + U¹(r̄, t),   U = ψ*V,   U⁰ = −k₁rⁿ − ½k₂rₙ²
//! ```
//!
//! and the transformed force `α = T*ψ* f`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::{angular_momentum_sq, ConfigPoint, PhasePoint, DOMAIN_EPS};
use crate::projective::cotangent_lift;

/// Mass and central-force strengths of the Manev potential `V⁰ = −k₁/r − ½k₂/r²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManevParams {
    pub m: f64,
    pub k1: f64,
    pub k2: f64,
}

impl ManevParams {
    pub fn new(m: f64, k1: f64, k2: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidConfig(format!("mass must be positive, got {m}")));
        }
        if !k1.is_finite() || !k2.is_finite() {
            return Err(Error::InvalidConfig("force constants must be finite".into()));
        }
        Ok(Self { m, k1, k2 })
    }

    pub fn kepler(m: f64, k1: f64) -> Result<Self> {
        Self::new(m, k1, 0.0)
    }

    /// `k̄₁ = k₁/m`
    pub fn k1_bar(&self) -> f64 {
        self.k1 / self.m
    }

    /// `k̄₂ = k₂/m`
    pub fn k2_bar(&self) -> f64 {
        self.k2 / self.m
    }

    /// `β² = ℓ̄² − k̄₂` for the given specific angular momentum.
    pub fn beta_sq(&self, ell_bar: f64) -> f64 {
        ell_bar * ell_bar - self.k2_bar()
    }

    /// The central potential these constants describe.
    pub fn central(&self) -> CentralPotential {
        if self.k2 == 0.0 {
            CentralPotential::Kepler { k1: self.k1 }
        } else {
            CentralPotential::Manev { k1: self.k1, k2: self.k2 }
        }
    }
}

/// The radial part `V⁰` of the original potential.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CentralPotential {
    None,
    Kepler { k1: f64 },
    Manev { k1: f64, k2: f64 },
}

impl CentralPotential {
    fn constants(&self) -> (f64, f64) {
        match *self {
            CentralPotential::None => (0.0, 0.0),
            CentralPotential::Kepler { k1 } => (k1, 0.0),
            CentralPotential::Manev { k1, k2 } => (k1, k2),
        }
    }

    pub fn is_singular(&self) -> bool {
        !matches!(self, CentralPotential::None)
    }

    /// `V⁰(r)`
    pub fn value(&self, r: f64) -> f64 {
        let (k1, k2) = self.constants();
        -k1 / r - 0.5 * k2 / (r * r)
    }

    /// `dV⁰/dr`
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let (k1, k2) = self.constants();
        k1 / (r * r) + k2 / (r * r * r)
    }

    /// `U⁰(rⁿ) = −k₁rⁿ − ½k₂rₙ²`
    pub fn transformed_value(&self, rn: f64) -> f64 {
        let (k1, k2) = self.constants();
        -k1 * rn - 0.5 * k2 * rn * rn
    }

    /// `∂ₙU⁰ = −k₁ − k₂rⁿ`
    pub fn transformed_derivative(&self, rn: f64) -> f64 {
        let (k1, k2) = self.constants();
        -k1 - k2 * rn
    }
}

/// A conservative perturbation `V¹(x⃗, t)` of the original system.
///
/// Implementations see only the spatial point; `∂V¹/∂rⁿ = 0` by construction.
pub trait PerturbingPotential: Send + Sync {
    fn value(&self, x: &DVector<f64>, t: f64) -> f64;
    fn gradient(&self, x: &DVector<f64>, t: f64) -> DVector<f64>;
}

/// A nonconservative force `fᵢ(x̄, κ̄, t)` acting on the original system, with `fₙ = 0`.
pub trait NonconservativeForce: Send + Sync {
    fn force(&self, kappa: &PhasePoint, t: f64) -> DVector<f64>;
}

/// Linear drag `f = −c κ⃗`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearDrag {
    pub coefficient: f64,
}

impl NonconservativeForce for LinearDrag {
    fn force(&self, kappa: &PhasePoint, _t: f64) -> DVector<f64> {
        &kappa.momentum_spatial * (-self.coefficient)
    }
}

/// Uniform external acceleration `a⃗`, as the potential `V¹ = −m a⃗·x⃗`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantAcceleration {
    pub acceleration: DVector<f64>,
    pub mass: f64,
}

impl PerturbingPotential for ConstantAcceleration {
    fn value(&self, x: &DVector<f64>, _t: f64) -> f64 {
        -self.mass * self.acceleration.dot(x)
    }

    fn gradient(&self, _x: &DVector<f64>, _t: f64) -> DVector<f64> {
        &self.acceleration * (-self.mass)
    }
}

/// Everything acting on the particle besides the kinetic term.
#[derive(Clone)]
pub struct ForceModel {
    pub central: CentralPotential,
    pub potential: Option<Arc<dyn PerturbingPotential>>,
    pub force: Option<Arc<dyn NonconservativeForce>>,
}

impl fmt::Debug for ForceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForceModel")
            .field("central", &self.central)
            .field("potential", &self.potential.as_ref().map(|_| "<V¹>"))
            .field("force", &self.force.as_ref().map(|_| "<f>"))
            .finish()
    }
}

impl ForceModel {
    pub fn new(central: CentralPotential) -> Self {
        Self { central, potential: None, force: None }
    }

    pub fn free() -> Self {
        Self::new(CentralPotential::None)
    }

    pub fn kepler(k1: f64) -> Self {
        Self::new(CentralPotential::Kepler { k1 })
    }

    pub fn manev(k1: f64, k2: f64) -> Self {
        Self::new(CentralPotential::Manev { k1, k2 })
    }

    pub fn with_potential(mut self, v1: Arc<dyn PerturbingPotential>) -> Self {
        self.potential = Some(v1);
        self
    }

    pub fn with_force(mut self, f: Arc<dyn NonconservativeForce>) -> Self {
        self.force = Some(f);
        self
    }

    pub fn is_unperturbed(&self) -> bool {
        self.potential.is_none() && self.force.is_none()
    }

    fn nonconservative(&self, kappa: &PhasePoint, t: f64) -> Option<DVector<f64>> {
        self.force.as_ref().map(|f| f.force(kappa, t))
    }
}

/// Components of `α = T*ψ* f`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedForce {
    pub alpha_spatial: DVector<f64>,
    pub alpha_normal: f64,
}

/// Rates of change along the transformed flow, force terms included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketRates {
    /// `d(r̂ⁱπᵢ)/dt`
    pub radial_momentum: f64,
    /// `d‖r⃗‖/dt`
    pub radius: f64,
    /// `dℓ²/dt`
    pub ell_sq: f64,
    /// `d𝓗/dt`
    pub hamiltonian: f64,
    /// `H − 𝓗 = (r̂ⁱπᵢ)²/2m`, the term dropped by the reduced Hamiltonian.
    pub reduced_gap: f64,
}

fn check_radius(model: &ForceModel, r: f64) -> Result<()> {
    if model.central.is_singular() && !(r >= DOMAIN_EPS) {
        return Err(Error::SingularPotential(r));
    }
    Ok(())
}

/// The original Hamiltonian `K`.
pub fn eval_k(kappa: &PhasePoint, t: f64, model: &ForceModel, params: &ManevParams) -> Result<f64> {
    let x = &kappa.base.spatial;
    let r = x.norm();
    check_radius(model, r)?;
    let kinetic = (kappa.momentum_spatial.norm_squared() + kappa.momentum_normal.powi(2)) / (2.0 * params.m);
    let mut v = if model.central.is_singular() { model.central.value(r) } else { 0.0 };
    if let Some(v1) = &model.potential {
        v += v1.value(x, t);
    }
    Ok(kinetic + v)
}

/// The reduced transformed Hamiltonian `𝓗`.
pub fn eval_h(mu: &PhasePoint, t: f64, model: &ForceModel, params: &ManevParams) -> Result<f64> {
    mu.base.check_domain()?;
    let rn = mu.rn();
    let ell_sq = angular_momentum_sq(mu.r(), mu.p());
    let kinetic = rn * rn / (2.0 * params.m) * (ell_sq + rn * rn * mu.pn() * mu.pn());
    let (u, _) = transform_potential(model, &mu.base, t)?;
    Ok(kinetic + u)
}

/// `U = ψ*V` and its `n̄` cartesian partials `(∂ᵢU, ∂ₙU)` at `q̄`.
pub fn transform_potential(model: &ForceModel, q: &ConfigPoint, t: f64) -> Result<(f64, DVector<f64>)> {
    q.check_domain()?;
    let d = q.spatial.len();
    let rn = q.normal;
    let mut value = model.central.transformed_value(rn);
    let mut grad = DVector::zeros(d + 1);
    grad[d] = model.central.transformed_derivative(rn);

    if let Some(v1) = &model.potential {
        let radius = q.spatial_norm();
        let unit = &q.spatial / radius;
        let x = &unit / rn;
        value += v1.value(&x, t);
        let dv = v1.gradient(&x, t);
        let radial = unit.dot(&dv);
        let spatial = (&dv - &unit * radial) / (rn * radius);
        grad.rows_mut(0, d).copy_from(&spatial);
        grad[d] -= radial / (rn * rn);
    }
    Ok((value, grad))
}

/// `αᵢ = (δᵢʲ − r̂ᵢr̂ʲ)fⱼ/(rⁿ‖r⃗‖)`, `αₙ = −r̂ⁱfᵢ/rₙ²`.
pub fn transform_force(f: &DVector<f64>, mu: &PhasePoint) -> Result<TransformedForce> {
    mu.base.check_domain()?;
    if f.len() != mu.r().len() {
        return Err(Error::DimensionMismatch { expected: mu.r().len(), got: f.len() });
    }
    let rn = mu.rn();
    let radius = mu.base.spatial_norm();
    let unit = mu.r() / radius;
    let radial = unit.dot(f);
    Ok(TransformedForce { alpha_spatial: (f - &unit * radial) / (rn * radius), alpha_normal: -radial / (rn * rn) })
}

/// The transformed nonconservative force at `μ̄`, if the model has one.
pub(crate) fn transformed_force_at(mu: &PhasePoint, t: f64, model: &ForceModel) -> Result<Option<TransformedForce>> {
    if model.force.is_none() {
        return Ok(None);
    }
    let kappa = cotangent_lift(mu)?;
    let f = model.nonconservative(&kappa, t).expect("force present");
    transform_force(&f, mu).map(Some)
}

/// The time-parameterized vector field of `𝓗` plus `α`, returned as the
/// component rates `(ṙ⃗, ṙⁿ, π̇⃗, π̇ₙ)`.
pub fn rhs_t(mu: &PhasePoint, t: f64, model: &ForceModel, params: &ManevParams) -> Result<PhasePoint> {
    mu.base.check_domain()?;
    let m = params.m;
    let (r, p) = (mu.r(), mu.p());
    let rn = mu.rn();
    let pn = mu.pn();
    let rr = r.norm_squared();
    let pp = p.norm_squared();
    let rp = r.dot(p);
    let ell_sq = angular_momentum_sq(r, p);
    let (_, du) = transform_potential(model, &mu.base, t)?;
    let d = r.len();

    let c = rn * rn / m;
    let dr = (p * rr - r * rp) * c;
    let drn = rn.powi(4) * pn / m;
    let mut dp = -(r * pp - p * rp) * c - du.rows(0, d);
    let mut dpn = -rn / m * (ell_sq + 2.0 * rn * rn * pn * pn) - du[d];

    if let Some(alpha) = transformed_force_at(mu, t, model)? {
        dp += alpha.alpha_spatial;
        dpn += alpha.alpha_normal;
    }
    Ok(PhasePoint { base: ConfigPoint::new(dr, drn), momentum_spatial: dp, momentum_normal: dpn })
}

/// Analytic rates of `r̂ⁱπᵢ`, `‖r⃗‖`, `ℓ²` and `𝓗` along the transformed flow.
///
/// Explicit time dependence of `V¹` is not included in the `𝓗` rate.
pub fn bracket_diagnostics(mu: &PhasePoint, t: f64, model: &ForceModel, params: &ManevParams) -> Result<BracketRates> {
    mu.base.check_domain()?;
    let m = params.m;
    let (r, p) = (mu.r(), mu.p());
    let rn = mu.rn();
    let radius = r.norm();
    let unit = r / radius;
    let d = r.len();
    let (_, du) = transform_potential(model, &mu.base, t)?;

    let (alpha, alpha_n) = match transformed_force_at(mu, t, model)? {
        Some(a) => (a.alpha_spatial, a.alpha_normal),
        None => (DVector::zeros(d), 0.0),
    };
    let generalized = &alpha - du.rows(0, d);
    let radial_p = unit.dot(p);

    Ok(BracketRates {
        radial_momentum: unit.dot(&alpha),
        radius: 0.0,
        ell_sq: 2.0 * radius * radius * p.dot(&generalized),
        hamiltonian: rn * rn / m * (radius * radius * p.dot(&alpha) + rn * rn * mu.pn() * alpha_n),
        reduced_gap: radial_p * radial_p / (2.0 * m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::PhasePoint;
    use approx::assert_relative_eq;

    fn unit_params() -> ManevParams {
        ManevParams::new(1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn k_examples() {
        let p = unit_params();
        let kappa = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        assert_relative_eq!(eval_k(&kappa, 0.0, &ForceModel::kepler(1.0), &p).unwrap(), -0.5);

        let rest = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0; 3], 0.0).unwrap();
        assert_eq!(eval_k(&rest, 0.0, &ForceModel::free(), &p).unwrap(), 0.0);
        assert_relative_eq!(eval_k(&rest, 0.0, &ForceModel::manev(1.0, 1.0), &p).unwrap(), -1.5);

        let origin = PhasePoint::from_slices(&[0.0; 3], 1.0, &[0.0; 3], 0.0).unwrap();
        assert!(matches!(eval_k(&origin, 0.0, &ForceModel::kepler(1.0), &p), Err(Error::SingularPotential(_))));
    }

    #[test]
    fn h_examples() {
        let p = unit_params();
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        assert_relative_eq!(eval_h(&mu, 0.0, &ForceModel::kepler(1.0), &p).unwrap(), -0.5);

        let still = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 2.0, &[0.0; 3], 0.0).unwrap();
        assert_relative_eq!(eval_h(&still, 0.0, &ForceModel::kepler(1.0), &p).unwrap(), -2.0);
    }

    #[test]
    fn kepler_potential_transform() {
        let q = ConfigPoint::from_slice(&[0.3, 0.4, 0.0], 1.7);
        let (u, du) = transform_potential(&ForceModel::kepler(1.0), &q, 0.0).unwrap();
        assert_relative_eq!(u, -1.7);
        assert_eq!(du[3], -1.0);
        assert!(du.rows(0, 3).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn force_transform_examples() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 2.0, &[0.0; 3], 0.0).unwrap();
        let c = 0.3;
        let radial = transform_force(&DVector::from_column_slice(&[c, 0.0, 0.0]), &mu).unwrap();
        assert!(radial.alpha_spatial.iter().all(|&x| x == 0.0));
        assert_relative_eq!(radial.alpha_normal, -c / 4.0);

        let tangential = transform_force(&DVector::from_column_slice(&[0.0, c, 0.0]), &mu).unwrap();
        assert_relative_eq!(tangential.alpha_spatial[1], c / 2.0);
        assert_eq!(tangential.alpha_normal, 0.0);

        let zero = transform_force(&DVector::zeros(3), &mu).unwrap();
        assert!(zero.alpha_spatial.iter().all(|&x| x == 0.0));
        assert_eq!(zero.alpha_normal, 0.0);
    }

    #[test]
    fn circular_orbit_is_stationary_in_normal_direction() {
        let p = unit_params();
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let rate = rhs_t(&mu, 0.0, &ForceModel::kepler(1.0), &p).unwrap();
        assert_eq!(rate.momentum_normal, 0.0);
        assert_eq!(rate.base.normal, 0.0);
        assert_relative_eq!(rate.base.spatial, DVector::from_column_slice(&[0.0, 1.0, 0.0]));
    }

    #[test]
    fn normal_rate_on_unit_sphere() {
        let p = ManevParams::new(2.0, 1.0, 0.0).unwrap();
        let mu = PhasePoint::from_slices(&[0.0, 1.0, 0.0], 1.3, &[0.5, 0.0, 0.0], 0.7).unwrap();
        let rate = rhs_t(&mu, 0.0, &ForceModel::kepler(1.0), &p).unwrap();
        assert_relative_eq!(rate.base.normal, 1.3f64.powi(4) * 0.7 / 2.0);
    }

    #[test]
    fn free_particle_at_rest() {
        let p = unit_params();
        let mu = PhasePoint::from_slices(&[0.2, 0.4, 1.0], 0.9, &[0.0; 3], 0.0).unwrap();
        let rate = rhs_t(&mu, 0.0, &ForceModel::free(), &p).unwrap();
        assert!(rate.to_flat().iter().all(|&x| x == 0.0));
        let rate = rhs_t(&mu, 0.0, &ForceModel::kepler(1.0), &p).unwrap();
        assert_eq!(rate.momentum_normal, 1.0);
    }

    #[test]
    fn unperturbed_brackets() {
        let p = unit_params();
        let mu = PhasePoint::from_slices(&[0.2, -0.6, 0.3], 0.9, &[0.4, 0.1, -0.7], 0.3).unwrap();
        let b = bracket_diagnostics(&mu, 0.0, &ForceModel::kepler(1.0), &p).unwrap();
        assert_eq!(b.radial_momentum, 0.0);
        assert_eq!(b.radius, 0.0);
        assert_eq!(b.ell_sq, 0.0);
        assert_eq!(b.hamiltonian, 0.0);
    }

    #[test]
    fn drag_keeps_radial_momentum() {
        let p = unit_params();
        let model = ForceModel::kepler(1.0).with_force(Arc::new(LinearDrag { coefficient: 0.1 }));
        let mu = PhasePoint::from_slices(&[0.2, -0.6, 0.3], 0.9, &[0.4, 0.1, -0.7], 0.3).unwrap();
        let b = bracket_diagnostics(&mu, 0.0, &model, &p).unwrap();
        assert!(b.radial_momentum.abs() < 1e-15);
        assert!(b.hamiltonian < 0.0);
    }
}
