//! Conformally scaled dynamics in the quasi-momentum chart `(r⃗, p⃗, rⁿ, p̃ₙ)`.
//!
//! With `p̃ₙ = rₙ²πₙ` and the Sundman-like parameter `dt/ds = 1/rₙ²`, the
//! unperturbed Manev flow becomes linear-affine:
//!
//! ```text
//! r⃗′ = −ℓ̄ r⃗    π⃗′ = −ℓ̄ π⃗    rⁿ′ = p̃ₙ/m    p̃ₙ′ = −mβ²rⁿ + k₁
//! ```
//!
//! where `ℓ̄ = ℓ/m` acts through the frozen angular-momentum matrix. The
//! true-anomaly-like parameter `τ` satisfies `dτ = ℓ̄ ds`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclidean::{angular_momentum_sq, check_same_len, ConfigPoint, PhasePoint};
use crate::hamiltonian::{rhs_t, transform_potential, transformed_force_at, ForceModel, ManevParams};

/// Specific angular momentum below which the motion counts as rectilinear.
pub const RECTILINEAR_EPS: f64 = 1e-10;

/// A state in the `(r⃗, p⃗, rⁿ, p̃ₙ)` chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiState {
    pub r: DVector<f64>,
    pub p: DVector<f64>,
    pub rn: f64,
    pub pn_tilde: f64,
}

impl QuasiState {
    pub fn new(r: DVector<f64>, p: DVector<f64>, rn: f64, pn_tilde: f64) -> Result<Self> {
        check_same_len(r.len(), p.len())?;
        Ok(Self { r, p, rn, pn_tilde })
    }

    pub fn from_slices(r: &[f64], p: &[f64], rn: f64, pn_tilde: f64) -> Result<Self> {
        Self::new(DVector::from_column_slice(r), DVector::from_column_slice(p), rn, pn_tilde)
    }

    pub fn spatial_dim(&self) -> usize {
        self.r.len()
    }

    pub fn ell_sq(&self) -> f64 {
        angular_momentum_sq(&self.r, &self.p)
    }

    /// `ℓ̄ = ℓ/m`
    pub fn ell_bar(&self, m: f64) -> f64 {
        self.ell_sq().sqrt() / m
    }

    /// Flat layout `(r⃗, rⁿ, p⃗, p̃ₙ)`, matching [`PhasePoint::to_flat`].
    pub fn to_flat(&self) -> DVector<f64> {
        let d = self.r.len();
        let mut v = DVector::zeros(2 * d + 2);
        v.rows_mut(0, d).copy_from(&self.r);
        v[d] = self.rn;
        v.rows_mut(d + 1, d).copy_from(&self.p);
        v[2 * d + 1] = self.pn_tilde;
        v
    }

    pub fn from_flat(v: &DVector<f64>) -> Self {
        let d = v.len() / 2 - 1;
        Self { r: v.rows(0, d).into_owned(), rn: v[d], p: v.rows(d + 1, d).into_owned(), pn_tilde: v[2 * d + 1] }
    }
}

/// The three evolution parameters carried along an integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamClock {
    pub t: f64,
    pub s: f64,
    pub tau: f64,
}

impl ParamClock {
    pub fn get(&self, which: Parameter) -> f64 {
        match which {
            Parameter::T => self.t,
            Parameter::S => self.s,
            Parameter::Tau => self.tau,
        }
    }

    pub fn set(&mut self, which: Parameter, value: f64) {
        match which {
            Parameter::T => self.t = value,
            Parameter::S => self.s = value,
            Parameter::Tau => self.tau = value,
        }
    }
}

/// Choice of evolution parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    T,
    S,
    Tau,
}

impl std::str::FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(Parameter::T),
            "s" => Ok(Parameter::S),
            "tau" => Ok(Parameter::Tau),
            other => Err(Error::InvalidConfig(format!("unknown parameter '{other}'"))),
        }
    }
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parameter::T => "t",
            Parameter::S => "s",
            Parameter::Tau => "tau",
        })
    }
}

fn check_rn(rn: f64) -> Result<()> {
    if !(rn > 0.0) {
        return Err(Error::Domain(format!("normal coordinate must be positive, got {rn}")));
    }
    Ok(())
}

/// `p̃ₙ = rₙ²πₙ`
pub fn to_quasi(mu: &PhasePoint) -> Result<QuasiState> {
    check_rn(mu.rn())?;
    let rn = mu.rn();
    Ok(QuasiState { r: mu.r().clone(), p: mu.p().clone(), rn, pn_tilde: rn * rn * mu.pn() })
}

/// `πₙ = p̃ₙ/rₙ²`
pub fn from_quasi(z: &QuasiState) -> Result<PhasePoint> {
    check_rn(z.rn)?;
    PhasePoint::new(ConfigPoint::new(z.r.clone(), z.rn), z.p.clone(), z.pn_tilde / (z.rn * z.rn))
}

/// `dt/ds = 1/rₙ²` or `dt/dτ = 1/(ℓ̄rₙ²)`.
pub fn conformal_factor(z: &QuasiState, which: Parameter, m: f64) -> Result<f64> {
    check_rn(z.rn)?;
    let f = 1.0 / (z.rn * z.rn);
    match which {
        Parameter::T => Ok(1.0),
        Parameter::S => Ok(f),
        Parameter::Tau => {
            let ell_bar = z.ell_bar(m);
            if !(ell_bar > RECTILINEAR_EPS) {
                return Err(Error::Rectilinear(ell_bar));
            }
            Ok(f / ell_bar)
        }
    }
}

/// s-derivative of the quasi-momentum state together with `dt/ds`.
pub fn rhs_s(
    z: &QuasiState,
    clock: &ParamClock,
    model: &ForceModel,
    params: &ManevParams,
) -> Result<(QuasiState, f64)> {
    check_rn(z.rn)?;
    let m = params.m;
    let d = z.r.len();
    let (r, p, rn) = (&z.r, &z.p, z.rn);
    let rr = r.norm_squared();
    let rp = r.dot(p);
    let pp = p.norm_squared();
    let ell_sq = angular_momentum_sq(r, p);
    let q = ConfigPoint::new(r.clone(), rn);
    let (_, du) = transform_potential(model, &q, clock.t)?;
    let inv_rn2 = 1.0 / (rn * rn);

    let dr = (p * rr - r * rp) / m;
    let mut dp = -(r * pp - p * rp) / m - du.rows(0, d) * inv_rn2;
    let drn = z.pn_tilde / m;
    let mut dpn = -ell_sq / m * rn - du[d];

    if model.force.is_some() {
        let mu = from_quasi(z)?;
        if let Some(alpha) = transformed_force_at(&mu, clock.t, model)? {
            dp += alpha.alpha_spatial * inv_rn2;
            dpn += alpha.alpha_normal;
        }
    }
    Ok((QuasiState { r: dr, p: dp, rn: drn, pn_tilde: dpn }, inv_rn2))
}

/// τ-derivative of the quasi-momentum state together with `dt/dτ`.
pub fn rhs_tau(
    z: &QuasiState,
    clock: &ParamClock,
    model: &ForceModel,
    params: &ManevParams,
) -> Result<(QuasiState, f64)> {
    check_rn(z.rn)?;
    let ell_bar = z.ell_bar(params.m);
    if !(ell_bar > RECTILINEAR_EPS) {
        return Err(Error::Rectilinear(ell_bar));
    }
    let (ds, dt) = rhs_s(z, clock, model, params)?;
    let k = 1.0 / ell_bar;
    Ok((QuasiState { r: ds.r * k, p: ds.p * k, rn: ds.rn * k, pn_tilde: ds.pn_tilde * k }, dt * k))
}

/// The s-rate obtained by rescaling the time-parameterized field, for chart checks.
pub fn rhs_s_via_t(z: &QuasiState, clock: &ParamClock, model: &ForceModel, params: &ManevParams) -> Result<QuasiState> {
    let mu = from_quasi(z)?;
    let dot = rhs_t(&mu, clock.t, model, params)?;
    let f = 1.0 / (z.rn * z.rn);
    let pn = mu.pn();
    // d(rₙ²πₙ) = 2rₙπₙ drⁿ + rₙ² dπₙ
    let dpn_tilde = 2.0 * z.rn * pn * dot.base.normal + z.rn * z.rn * dot.momentum_normal;
    Ok(QuasiState {
        r: dot.base.spatial * f,
        p: dot.momentum_spatial * f,
        rn: dot.base.normal * f,
        pn_tilde: dpn_tilde * f,
    })
}

/// Central-difference residuals `r⃗″ + ℓ̄²r⃗` and `rⁿ″ + β²rⁿ − k̄₁` at the interior
/// samples of a window uniformly spaced by `h` in `s` or `τ`.
///
/// In `τ` both residuals are divided by `ℓ̄²`. Each output vector holds the spatial
/// components followed by the normal one.
pub fn second_order_residual(
    samples: &[QuasiState],
    h: f64,
    param: Parameter,
    params: &ManevParams,
) -> Result<Vec<DVector<f64>>> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    if param == Parameter::T {
        return Err(Error::Unsupported("second-order residual needs s or tau sampling".into()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("sampling step must be positive, got {h}")));
    }
    let d = samples[0].r.len();
    let h2 = h * h;
    let mut out = Vec::with_capacity(samples.len() - 2);
    for w in samples.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let ell_bar_sq = b.ell_sq() / (params.m * params.m);
        let beta_sq = ell_bar_sq - params.k2_bar();
        let scale = match param {
            Parameter::Tau => 1.0 / ell_bar_sq,
            _ => 1.0,
        };
        let mut res = DVector::zeros(d + 1);
        for i in 0..d {
            let dd = (a.r[i] - 2.0 * b.r[i] + c.r[i]) / h2;
            res[i] = dd + ell_bar_sq * scale * b.r[i];
        }
        let dd = (a.rn - 2.0 * b.rn + c.rn) / h2;
        res[d] = dd + scale * (beta_sq * b.rn - params.k1_bar());
        out.push(res);
    }
    Ok(out)
}

/// The right-hand side the residuals of [`second_order_residual`] should match:
/// `−(r²/(m rₙ²))(∂ᵢU¹ − αᵢ)` and `−(∂ₙU¹ − αₙ)/m` in `s`, divided by `ℓ̄²` in `τ`.
///
/// In `τ` this holds while `ℓ̄` is constant.
pub fn second_order_forcing(
    z: &QuasiState,
    t: f64,
    param: Parameter,
    model: &ForceModel,
    params: &ManevParams,
) -> Result<DVector<f64>> {
    check_rn(z.rn)?;
    let m = params.m;
    let d = z.r.len();
    let q = ConfigPoint::new(z.r.clone(), z.rn);
    let (_, mut du1) = transform_potential(model, &q, t)?;
    du1[d] -= model.central.transformed_derivative(z.rn);

    if model.force.is_some() {
        let mu = from_quasi(z)?;
        if let Some(alpha) = transformed_force_at(&mu, t, model)? {
            for i in 0..d {
                du1[i] -= alpha.alpha_spatial[i];
            }
            du1[d] -= alpha.alpha_normal;
        }
    }

    let k = z.r.norm_squared() / (m * z.rn * z.rn);
    let mut out = DVector::zeros(d + 1);
    for i in 0..d {
        out[i] = -k * du1[i];
    }
    out[d] = -du1[d] / m;
    if param == Parameter::Tau {
        out /= z.ell_sq() / (m * m);
    }
    Ok(out)
}
