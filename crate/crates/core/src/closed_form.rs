//! Exact unperturbed Manev solutions in the transformed chart.
//!
//! The spatial pair rotates rigidly, `(r⃗, π⃗)_τ = e^{−(τ/ℓ₀)L₀}(r⃗, π⃗)₀`, while the
//! fiber pair `(rⁿ, p̃ₙ)` is a driven harmonic oscillator in `ε = (β₀/ℓ̄₀)τ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::euclidean::{angular_momentum_matrix, on_q, PhasePoint, MEMBERSHIP_TOL};
use crate::hamiltonian::ManevParams;
use crate::quadrature;
use crate::regularized::{to_quasi, QuasiState, RECTILINEAR_EPS};

/// Relative tolerance for matching an initial condition's `ℓⁱʲ` against the frozen one.
pub const FREEZE_TOL: f64 = 1e-10;

/// Relative tolerance of [`LinearSystem::time_of`].
pub const TIME_RTOL: f64 = 1e-10;

/// The linear system obtained by freezing `ℓⁱʲ` at its initial value.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub l0: DMatrix<f64>,
    pub ell0: f64,
    pub ell_bar0: f64,
    pub beta0: f64,
    pub params: ManevParams,
}

impl LinearSystem {
    pub fn new(ic: &QuasiState, params: ManevParams) -> Result<Self> {
        let ell0 = ic.ell_sq().sqrt();
        let ell_bar0 = ell0 / params.m;
        if !(ell_bar0 > RECTILINEAR_EPS) {
            return Err(Error::Rectilinear(ell_bar0));
        }
        let beta_sq = params.beta_sq(ell_bar0);
        if !(beta_sq > 0.0) {
            return Err(Error::NonOscillatory(beta_sq));
        }
        Ok(Self { l0: angular_momentum_matrix(&ic.r, &ic.p), ell0, ell_bar0, beta0: beta_sq.sqrt(), params })
    }

    /// `ε = (β₀/ℓ̄₀)τ`
    pub fn fiber_phase(&self, tau: f64) -> f64 {
        self.beta0 / self.ell_bar0 * tau
    }

    /// `s = τ/ℓ̄₀`
    pub fn s_of(&self, tau: f64) -> f64 {
        tau / self.ell_bar0
    }

    /// `e^{−(τ/ℓ₀)L₀} = I − sin τ L₀/ℓ₀ + (1 − cos τ) L₀²/ℓ₀²`
    pub fn rotation_exponential(&self, tau: f64) -> DMatrix<f64> {
        let n = self.l0.nrows();
        let k = &self.l0 / self.ell0;
        let k2 = &k * &k;
        DMatrix::identity(n, n) - k * tau.sin() + k2 * (1.0 - tau.cos())
    }

    fn check_frozen(&self, ic: &QuasiState) -> Result<()> {
        let l = angular_momentum_matrix(&ic.r, &ic.p);
        if l.shape() != self.l0.shape() {
            return Err(Error::DimensionMismatch { expected: self.l0.nrows(), got: l.nrows() });
        }
        let rel = (&l - &self.l0).norm() / self.l0.norm();
        if !(rel <= FREEZE_TOL) {
            return Err(Error::AngularMomentumMismatch(rel));
        }
        Ok(())
    }

    pub fn spatial_solution(&self, ic: &QuasiState, tau: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        self.check_frozen(ic)?;
        let rot = self.rotation_exponential(tau);
        Ok((&rot * &ic.r, &rot * &ic.p))
    }

    pub fn fiber_solution(&self, rn0: f64, pn_tilde0: f64, tau: f64) -> (f64, f64) {
        let p = &self.params;
        let b = self.beta0;
        let (sin, cos) = self.fiber_phase(tau).sin_cos();
        let rest = p.k1_bar() / (b * b);
        let rn = rn0 * cos + pn_tilde0 / (p.m * b) * sin + rest * (1.0 - cos);
        let pn = -p.m * b * rn0 * sin + pn_tilde0 * cos + p.k1 / b * sin;
        (rn, pn)
    }

    pub fn state_at(&self, ic: &QuasiState, tau: f64) -> Result<QuasiState> {
        let (r, p) = self.spatial_solution(ic, tau)?;
        let (rn, pn_tilde) = self.fiber_solution(ic.rn, ic.pn_tilde, tau);
        Ok(QuasiState { r, p, rn, pn_tilde })
    }

    /// First parameter between 0 and `tau` at which `rⁿ` reaches zero, if any.
    pub fn escape_tau(&self, ic: &QuasiState, tau: f64) -> Option<f64> {
        let p = &self.params;
        let b = self.beta0;
        let c = p.k1_bar() / (b * b);
        let a = ic.rn - c;
        let bb = ic.pn_tilde / (p.m * b);
        let radius = a.hypot(bb);
        if radius == 0.0 || c > radius {
            return None;
        }
        let phi = bb.atan2(a);
        let half = (-c / radius).clamp(-1.0, 1.0).acos();
        let end = self.fiber_phase(tau);
        let two_pi = 2.0 * PI;
        let mut first: Option<f64> = None;
        for base in [phi - half, phi + half] {
            let root = if end >= 0.0 { base.rem_euclid(two_pi) } else { base.rem_euclid(two_pi) - two_pi };
            let inside = if end >= 0.0 { root <= end } else { root >= end };
            if inside {
                first = Some(match first {
                    Some(f) if f.abs() <= root.abs() => f,
                    _ => root,
                });
            }
        }
        first.map(|eps| eps * self.ell_bar0 / b)
    }

    /// Elapsed `t` over `[0, τ]`: `(1/ℓ̄₀)∫ rⁿ(τ′)⁻² dτ′`.
    pub fn time_of(&self, ic: &QuasiState, tau: f64) -> Result<f64> {
        if !(ic.rn > 0.0) {
            return Err(Error::Domain(format!("normal coordinate must be positive, got {}", ic.rn)));
        }
        if let Some(at) = self.escape_tau(ic, tau) {
            return Err(Error::Escape(at));
        }
        let pieces = (self.fiber_phase(tau).abs() / (PI / 4.0)).ceil().max(1.0) as usize;
        let scale = 1.0 / self.ell_bar0;
        let q = quadrature::integrate(
            |x| {
                let (rn, _) = self.fiber_solution(ic.rn, ic.pn_tilde, x);
                scale / (rn * rn)
            },
            0.0,
            tau,
            pieces,
            TIME_RTOL * 1e-2,
            0.0,
        )?;
        Ok(q.value)
    }
}

/// Closed-form Cartesian Kepler state at true-anomaly offset `τ` from a point on `T*Q₁`.
pub fn cartesian_kepler_state(mu0: &PhasePoint, params: &ManevParams, tau: f64) -> Result<PhasePoint> {
    if params.k2 != 0.0 {
        return Err(Error::Unsupported("closed-form Cartesian state requires k2 = 0".into()));
    }
    if !on_q(mu0, 1.0, MEMBERSHIP_TOL) {
        let (a, b) = crate::euclidean::q_residual(mu0, 1.0)?;
        return Err(Error::OffConstraint(a, b));
    }
    let z0 = to_quasi(mu0)?;
    let sys = LinearSystem::new(&z0, *params)?;
    let (q0, m0) = (mu0.r(), mu0.p());
    let (sin, cos) = tau.sin_cos();
    let ell0 = sys.ell0;
    let rest = params.k1_bar() / (sys.ell_bar0 * sys.ell_bar0);

    let denom = (z0.rn - rest) * cos + z0.pn_tilde / ell0 * sin + rest;
    if !(denom > 0.0) {
        return Err(Error::Escape(tau));
    }
    let x = (q0 * cos + m0 * (sin / ell0)) / denom;
    let mu_tau = m0 * cos - q0 * (ell0 * sin);
    let kappa0 = m0 * z0.rn - q0 * z0.pn_tilde;
    let kappa = kappa0 + (mu_tau - m0) * rest;
    PhasePoint::new(crate::euclidean::ConfigPoint::new(x, 1.0), kappa, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::cotangent_lift;
    use crate::regularized::from_quasi;
    use approx::assert_relative_eq;

    fn unit_kepler() -> ManevParams {
        ManevParams::kepler(1.0, 1.0).unwrap()
    }

    fn circular() -> QuasiState {
        QuasiState::from_slices(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 1.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_non_oscillatory_and_rectilinear() {
        let p = ManevParams::new(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(LinearSystem::new(&circular(), p), Err(Error::NonOscillatory(_))));
        let line = QuasiState::from_slices(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1.0, 0.0).unwrap();
        assert!(matches!(LinearSystem::new(&line, unit_kepler()), Err(Error::Rectilinear(_))));
    }

    #[test]
    fn rotation_examples() {
        let sys = LinearSystem::new(&circular(), unit_kepler()).unwrap();
        assert_relative_eq!(sys.rotation_exponential(0.0), DMatrix::identity(3, 3));
        assert!((sys.rotation_exponential(2.0 * PI) - DMatrix::identity(3, 3)).amax() < 1e-12);
        let rot = sys.rotation_exponential(1.234);
        assert!((rot.transpose() * &rot - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn rotation_matches_dense_exponential() {
        let z = QuasiState::from_slices(&[0.3, -0.2, 0.7, 0.1], &[0.5, 0.4, -0.1, 0.9], 1.0, 0.0).unwrap();
        let sys = LinearSystem::new(&z, unit_kepler()).unwrap();
        for tau in [0.3, 1.7, 4.0] {
            let oracle = (&sys.l0 * (-tau / sys.ell0)).exp();
            assert!((sys.rotation_exponential(tau) - oracle).amax() < 1e-10);
        }
    }

    #[test]
    fn quarter_turn_on_unit_sphere() {
        let z = circular();
        let sys = LinearSystem::new(&z, unit_kepler()).unwrap();
        let (r, p) = sys.spatial_solution(&z, PI / 2.0).unwrap();
        assert!((r - DVector::from_column_slice(&[0.0, 1.0, 0.0])).amax() < 1e-15);
        assert!((p - DVector::from_column_slice(&[-1.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn frozen_mismatch_rejected() {
        let sys = LinearSystem::new(&circular(), unit_kepler()).unwrap();
        let other = QuasiState::from_slices(&[1.0, 0.0, 0.0], &[0.0, 1.1, 0.0], 1.0, 0.0).unwrap();
        assert!(matches!(sys.spatial_solution(&other, 1.0), Err(Error::AngularMomentumMismatch(_))));
    }

    #[test]
    fn fiber_examples() {
        let sys = LinearSystem::new(&circular(), unit_kepler()).unwrap();
        for tau in [0.0, 0.7, 3.0, 11.0] {
            let (rn, pn) = sys.fiber_solution(1.0, 0.0, tau);
            assert_relative_eq!(rn, 1.0, epsilon = 1e-15);
            assert!(pn.abs() < 1e-15);
            let (rn, _) = sys.fiber_solution(2.0, 0.0, tau);
            assert_relative_eq!(rn, 1.0 + tau.cos(), epsilon = 1e-15);
        }
        assert_eq!(sys.fiber_solution(0.4, -0.3, 0.0), (0.4, -0.3));
    }

    #[test]
    fn spatial_invariants() {
        let z = QuasiState::from_slices(&[0.3, -0.2, 0.7], &[0.5, 0.4, -0.1], 1.3, 0.2).unwrap();
        let sys = LinearSystem::new(&z, unit_kepler()).unwrap();
        for tau in [0.5, 2.0, 7.0] {
            let (r, p) = sys.spatial_solution(&z, tau).unwrap();
            assert_relative_eq!(r.norm(), z.r.norm(), max_relative = 1e-14);
            assert_relative_eq!(p.norm(), z.p.norm(), max_relative = 1e-14);
            assert_relative_eq!(r.dot(&p), z.r.dot(&z.p), epsilon = 1e-14);
        }
    }

    #[test]
    fn kepler_orbit_closes() {
        let z = QuasiState::from_slices(&[0.6, 0.8, 0.0], &[-0.8, 0.6, 0.3], 1.4, -0.2).unwrap();
        let sys = LinearSystem::new(&z, ManevParams::kepler(1.3, 0.8).unwrap()).unwrap();
        let end = sys.state_at(&z, 2.0 * PI).unwrap();
        assert!((end.to_flat() - z.to_flat()).amax() < 1e-11);
    }

    #[test]
    fn flow_property() {
        let p = ManevParams::new(1.0, 1.0, 0.1).unwrap();
        let z = QuasiState::from_slices(&[1.0, 0.0, 0.0], &[0.0, 1.1, 0.2], 0.9, 0.1).unwrap();
        let sys = LinearSystem::new(&z, p).unwrap();
        let direct = sys.state_at(&z, 2.5).unwrap();
        let mid = sys.state_at(&z, 1.0).unwrap();
        let twice = sys.state_at(&mid, 1.5).unwrap();
        assert!((direct.to_flat() - twice.to_flat()).amax() < 1e-11);
    }

    #[test]
    fn circular_time() {
        let sys = LinearSystem::new(&circular(), unit_kepler()).unwrap();
        assert_eq!(sys.time_of(&circular(), 0.0).unwrap(), 0.0);
        assert_relative_eq!(sys.time_of(&circular(), 2.0 * PI).unwrap(), 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn eccentric_period() {
        // periapsis at radius 1 with e = 0.5 and k̄₁ = 1
        let e: f64 = 0.5;
        let v = (1.0 + e).sqrt();
        let z = QuasiState::from_slices(&[1.0, 0.0, 0.0], &[0.0, v, 0.0], 1.0, 0.0).unwrap();
        let sys = LinearSystem::new(&z, unit_kepler()).unwrap();
        let a = sys.ell_bar0.powi(2) / (1.0 - e * e);
        let period = 2.0 * PI * a.powi(3).sqrt();
        assert_relative_eq!(sys.time_of(&z, 2.0 * PI).unwrap(), period, max_relative = 1e-10);
    }

    #[test]
    fn hyperbolic_escape() {
        let z = QuasiState::from_slices(&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], 1.0, 0.0).unwrap();
        let sys = LinearSystem::new(&z, unit_kepler()).unwrap();
        // rⁿ = 1/4 + (3/4)cos τ hits zero at acos(−1/3)
        let at = sys.escape_tau(&z, 2.0 * PI).unwrap();
        assert_relative_eq!(at, (-1.0f64 / 3.0).acos(), max_relative = 1e-14);
        assert!(matches!(sys.time_of(&z, 2.0), Err(Error::Escape(_))));
        assert!(sys.time_of(&z, 1.5).is_ok());
        assert_relative_eq!(sys.escape_tau(&z, -2.0 * PI).unwrap(), -at, max_relative = 1e-14);
    }

    #[test]
    fn cartesian_quarter_period() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let k = cartesian_kepler_state(&mu, &unit_kepler(), PI / 2.0).unwrap();
        assert!((k.r() - DVector::from_column_slice(&[0.0, 1.0, 0.0])).amax() < 1e-15);
        assert!((k.p() - DVector::from_column_slice(&[-1.0, 0.0, 0.0])).amax() < 1e-15);
        let k0 = cartesian_kepler_state(&mu, &unit_kepler(), 0.0).unwrap();
        assert_eq!(k0.r(), mu.r());
    }

    #[test]
    fn cartesian_matches_lifted_closed_form() {
        let p = ManevParams::kepler(1.7, 2.3).unwrap();
        let mu = PhasePoint::from_slices(&[0.6, 0.0, 0.8], 0.7, &[0.4, 1.1, -0.3], 0.0).unwrap();
        let z = to_quasi(&mu).unwrap();
        let mut z = z;
        z.pn_tilde = 0.25;
        let mu = from_quasi(&z).unwrap();
        let sys = LinearSystem::new(&z, p).unwrap();
        for tau in [0.4, 1.9, 3.3, 5.0] {
            let direct = cartesian_kepler_state(&mu, &p, tau).unwrap();
            let lifted = cotangent_lift(&from_quasi(&sys.state_at(&z, tau).unwrap()).unwrap()).unwrap();
            assert!((direct.to_flat() - lifted.to_flat()).amax() < 1e-12);
        }
    }

    #[test]
    fn cartesian_rejects_manev_and_off_constraint() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let manev = ManevParams::new(1.0, 1.0, 0.1).unwrap();
        assert!(matches!(cartesian_kepler_state(&mu, &manev, 1.0), Err(Error::Unsupported(_))));
        let off = PhasePoint::from_slices(&[2.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        assert!(matches!(cartesian_kepler_state(&off, &unit_kepler(), 1.0), Err(Error::OffConstraint(..))));
    }
}
