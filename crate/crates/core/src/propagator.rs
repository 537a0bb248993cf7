//! Numerical propagation of the transformed system and of the direct Cartesian oracle.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::closed_form::LinearSystem;
use crate::error::{Error, Result};
use crate::euclidean::{
    angular_momentum_sq, q_residual, sigma_residual, ConfigPoint, PhasePoint, DOMAIN_EPS, MEMBERSHIP_TOL,
};
use crate::hamiltonian::{eval_h, eval_k, rhs_t, ForceModel, ManevParams};
use crate::integrator::{self, Output, Scheme, Settings, Stats};
use crate::projective::{cotangent_lift, cotangent_unlift};
use crate::regularized::{from_quasi, rhs_s, rhs_tau, to_quasi, ParamClock, Parameter, QuasiState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedRk4,
    EmbeddedRk45,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Fixed step for `FixedRk4`.
    pub step: Option<f64>,
    /// Initial step for `EmbeddedRk45`; defaults to a thousandth of the span.
    pub h0: Option<f64>,
    pub max_steps: usize,
    pub param: Parameter,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::EmbeddedRk45,
            rtol: 1e-10,
            atol: 1e-12,
            step: None,
            h0: None,
            max_steps: 1_000_000,
            param: Parameter::Tau,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(param: Parameter, rtol: f64, atol: f64) -> Self {
        Self { param, rtol, atol, ..Self::default() }
    }

    pub fn fixed(param: Parameter, step: f64) -> Self {
        Self { param, method: Method::FixedRk4, step: Some(step), ..Self::default() }
    }

    pub fn settings(&self, span: f64) -> Result<Settings> {
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::InvalidConfig(format!("span must be positive and finite, got {span}")));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        let scheme = match self.method {
            Method::FixedRk4 => {
                let h = self.step.ok_or_else(|| Error::InvalidConfig("fixed_rk4 needs a step".into()))?;
                if !(h > 0.0) {
                    return Err(Error::InvalidConfig(format!("step must be positive, got {h}")));
                }
                Scheme::Rk4 { h }
            }
            Method::EmbeddedRk45 => {
                if !(self.rtol > 0.0) || !(self.atol > 0.0) {
                    return Err(Error::InvalidConfig("rtol and atol must be positive".into()));
                }
                let h0 = self.h0.unwrap_or(span / 1000.0);
                if !(h0 > 0.0) {
                    return Err(Error::InvalidConfig(format!("h0 must be positive, got {h0}")));
                }
                Scheme::Dopri5 { rtol: self.rtol, atol: self.atol, h0 }
            }
        };
        Ok(Settings { scheme, max_steps: self.max_steps })
    }
}

/// Which output points a propagation records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    EveryStep,
    /// Explicit parameter offsets in `[0, span]`.
    Grid(Vec<f64>),
    /// `n + 1` evenly spaced points including both ends.
    Uniform(usize),
}

impl Sampling {
    fn output(&self, span: f64) -> Result<Output> {
        match self {
            Sampling::EveryStep => Ok(Output::EveryStep),
            Sampling::Uniform(n) => {
                if *n == 0 {
                    return Err(Error::InvalidConfig("uniform sampling needs at least one interval".into()));
                }
                Ok(Output::Points((0..=*n).map(|i| if i == *n { span } else { span * i as f64 / *n as f64 }).collect()))
            }
            Sampling::Grid(points) => {
                if points.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidConfig("grid must be strictly increasing".into()));
                }
                if points.iter().any(|&p| !(0.0..=span).contains(&p)) {
                    return Err(Error::InvalidConfig("grid points must lie in [0, span]".into()));
                }
                Ok(Output::Points(points.clone()))
            }
        }
    }
}

/// The vector field being integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rhs {
    /// Transformed dynamics; `t`, `s` or `τ` chosen by the integrator config.
    Transformed,
    /// Unregularized Cartesian dynamics of the original system.
    DirectCartesian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `𝓗` of the transformed state.
    pub hamiltonian: f64,
    pub ell_sq: f64,
    pub q_residual: (f64, f64),
    pub sigma_residual: (f64, f64),
    /// `K` of the Cartesian state.
    pub energy_k: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub clock: ParamClock,
    /// `μ̄` for transformed runs, `κ̄` for direct ones.
    pub state: PhasePoint,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub rhs: Rhs,
    pub param: Parameter,
    pub samples: Vec<Sample>,
    pub stats: Stats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for PropagationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} samples recorded)", self.error, self.partial.samples.len())
    }
}

impl std::error::Error for PropagationFailure {}

/// A Cartesian sample recovered from a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalSample {
    pub clock: ParamClock,
    pub x: DVector<f64>,
    pub kappa: DVector<f64>,
    /// `κₙ`, zero for states consistent with `T*Q₁`.
    pub normal_residual: f64,
    pub ell_sq: f64,
}

/// Embed `(x⃗₀, m v⃗₀)` at `xⁿ = 1` and pull back to the transformed chart.
pub fn lift_initial_conditions(x0: &DVector<f64>, v0: &DVector<f64>, params: &ManevParams) -> Result<PhasePoint> {
    if !(x0.norm() > 0.0) {
        return Err(Error::Domain("initial position has zero radius".into()));
    }
    let kappa = PhasePoint::new(ConfigPoint::new(x0.clone(), 1.0), v0 * params.m, 0.0)?;
    cotangent_unlift(&kappa)
}

/// `ẋ = κ/m`, `κ̇ = −∇V + f`, with the normal components frozen.
pub fn direct_cartesian_rhs(
    kappa: &PhasePoint,
    t: f64,
    model: &ForceModel,
    params: &ManevParams,
) -> Result<PhasePoint> {
    let x = kappa.r();
    let r = x.norm();
    if model.central.is_singular() && !(r >= DOMAIN_EPS) {
        return Err(Error::SingularPotential(r));
    }
    let mut dk = if model.central.is_singular() {
        x * (-model.central.radial_derivative(r) / r)
    } else {
        DVector::zeros(x.len())
    };
    if let Some(v1) = &model.potential {
        dk -= v1.gradient(x, t);
    }
    if let Some(f) = &model.force {
        dk += f.force(kappa, t);
    }
    PhasePoint::new(ConfigPoint::new(kappa.p() / params.m, 0.0), dk, 0.0)
}

struct Layout {
    rhs: Rhs,
    param: Parameter,
    d: usize,
}

impl Layout {
    fn clock_at(&self, y: &DVector<f64>, param_value: f64) -> ParamClock {
        let n = 2 * self.d + 2;
        let mut clock = ParamClock { t: y[n], s: y[n + 1], tau: y[n + 2] };
        clock.set(self.param, param_value);
        clock
    }

    fn state(&self, y: &DVector<f64>) -> Result<PhasePoint> {
        let flat = y.rows(0, 2 * self.d + 2).into_owned();
        match (self.rhs, self.param) {
            (Rhs::Transformed, Parameter::S | Parameter::Tau) => from_quasi(&QuasiState::from_flat(&flat)),
            _ => Ok(PhasePoint::from_flat(&flat)),
        }
    }

    fn pack(&self, ic: &PhasePoint) -> Result<DVector<f64>> {
        let flat = match (self.rhs, self.param) {
            (Rhs::Transformed, Parameter::S | Parameter::Tau) => to_quasi(ic)?.to_flat(),
            _ => ic.to_flat(),
        };
        let n = flat.len();
        Ok(flat.resize_vertically(n + 3, 0.0))
    }

    fn derivative(
        &self,
        y: &DVector<f64>,
        param_value: f64,
        model: &ForceModel,
        params: &ManevParams,
    ) -> Result<DVector<f64>> {
        let n = 2 * self.d + 2;
        let clock = self.clock_at(y, param_value);
        let flat = y.rows(0, n).into_owned();
        let m = params.m;
        let (body, clocks) = match self.rhs {
            Rhs::Transformed => match self.param {
                Parameter::T => {
                    let mu = PhasePoint::from_flat(&flat);
                    let dot = rhs_t(&mu, clock.t, model, params)?;
                    let rn2 = mu.rn() * mu.rn();
                    let ell_bar = angular_momentum_sq(mu.r(), mu.p()).sqrt() / m;
                    (dot.to_flat(), [1.0, rn2, ell_bar * rn2])
                }
                Parameter::S => {
                    let z = QuasiState::from_flat(&flat);
                    let (dz, dt) = rhs_s(&z, &clock, model, params)?;
                    (dz.to_flat(), [dt, 1.0, z.ell_bar(m)])
                }
                Parameter::Tau => {
                    let z = QuasiState::from_flat(&flat);
                    let (dz, dt) = rhs_tau(&z, &clock, model, params)?;
                    (dz.to_flat(), [dt, 1.0 / z.ell_bar(m), 1.0])
                }
            },
            Rhs::DirectCartesian => {
                let kappa = PhasePoint::from_flat(&flat);
                let dot = direct_cartesian_rhs(&kappa, clock.t, model, params)?;
                let r2 = kappa.r().norm_squared();
                let ell_bar = angular_momentum_sq(kappa.r(), kappa.p()).sqrt() / m;
                let g = match self.param {
                    Parameter::T => 1.0,
                    Parameter::S => r2,
                    Parameter::Tau => {
                        if !(ell_bar > crate::regularized::RECTILINEAR_EPS) {
                            return Err(Error::Rectilinear(ell_bar));
                        }
                        r2 / ell_bar
                    }
                };
                (dot.to_flat() * g, [g, g / r2, g * ell_bar / r2])
            }
        };
        let mut out = body.resize_vertically(n + 3, 0.0);
        out[n] = clocks[0];
        out[n + 1] = clocks[1];
        out[n + 2] = clocks[2];
        Ok(out)
    }
}

/// Diagnostics of a state in the given chart.
pub fn diagnostics(
    state: &PhasePoint,
    rhs: Rhs,
    t: f64,
    model: &ForceModel,
    params: &ManevParams,
) -> Result<Diagnostics> {
    let (mu, kappa) = match rhs {
        Rhs::Transformed => (state.clone(), cotangent_lift(state)?),
        Rhs::DirectCartesian => (cotangent_unlift(state)?, state.clone()),
    };
    Ok(Diagnostics {
        hamiltonian: eval_h(&mu, t, model, params)?,
        ell_sq: angular_momentum_sq(mu.r(), mu.p()),
        q_residual: q_residual(&mu, 1.0)?,
        sigma_residual: sigma_residual(&kappa, 1.0),
        energy_k: eval_k(&kappa, t, model, params)?,
    })
}

/// Integrate `rhs` from `ic` over `[0, span]` in the parameter chosen by `cfg`.
///
/// Transformed runs must start with `κₙ = q̂·μ⃗ = 0`.
pub fn integrate(
    rhs: Rhs,
    ic: &PhasePoint,
    span: f64,
    cfg: &IntegratorConfig,
    sampling: &Sampling,
    model: &ForceModel,
    params: &ManevParams,
) -> std::result::Result<Trajectory, PropagationFailure> {
    let layout = Layout { rhs, param: cfg.param, d: ic.r().len() };
    let empty = || Trajectory { rhs, param: cfg.param, samples: Vec::new(), stats: Stats::default() };
    let early = |error: Error| PropagationFailure { error, partial: empty() };

    let settings = cfg.settings(span).map_err(early)?;
    let output = sampling.output(span).map_err(early)?;
    match rhs {
        Rhs::Transformed => {
            ic.base.check_domain().map_err(early)?;
            let (a, b) = q_residual(ic, 1.0).map_err(early)?;
            if b.abs() > MEMBERSHIP_TOL {
                return Err(early(Error::OffConstraint(a, b)));
            }
        }
        Rhs::DirectCartesian => {
            if !ic.is_finite() {
                return Err(early(Error::Domain("non-finite initial state".into())));
            }
        }
    }
    let y0 = layout.pack(ic).map_err(early)?;

    let mut samples = Vec::new();
    let record = |samples: &mut Vec<Sample>, p: f64, y: &DVector<f64>| -> Result<()> {
        let clock = layout.clock_at(y, p);
        let state = layout.state(y)?;
        let diagnostics = diagnostics(&state, rhs, clock.t, model, params)?;
        samples.push(Sample { clock, state, diagnostics });
        Ok(())
    };

    let result = integrator::solve(
        |p, y| layout.derivative(y, p, model, params),
        0.0,
        y0,
        span,
        settings,
        &output,
        |p, y| record(&mut samples, p, y),
    );
    match result {
        Ok(stats) => Ok(Trajectory { rhs, param: cfg.param, samples, stats }),
        Err(failure) => {
            let behind = samples.last().is_none_or(|s| s.clock.get(cfg.param) < failure.at);
            if behind {
                let _ = record(&mut samples, failure.at, &failure.last);
            }
            Err(PropagationFailure {
                error: failure.error,
                partial: Trajectory { rhs, param: cfg.param, samples, stats: failure.stats },
            })
        }
    }
}

/// Cartesian positions and momenta of every sample.
pub fn project_trajectory(traj: &Trajectory) -> Result<Vec<PhysicalSample>> {
    traj.samples
        .iter()
        .map(|s| {
            let kappa = match traj.rhs {
                Rhs::Transformed => cotangent_lift(&s.state)?,
                Rhs::DirectCartesian => s.state.clone(),
            };
            Ok(PhysicalSample {
                clock: s.clock,
                ell_sq: angular_momentum_sq(kappa.r(), kappa.p()),
                x: kappa.base.spatial,
                kappa: kappa.momentum_spatial,
                normal_residual: kappa.momentum_normal,
            })
        })
        .collect()
}

/// Periapsis position and velocity of a Kepler orbit with semi-major axis `a`,
/// in the plane of the first two axes.
pub fn periapsis_state(
    e: f64,
    a: f64,
    spatial_dim: usize,
    params: &ManevParams,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if !(0.0..1.0).contains(&e) || !(a > 0.0) {
        return Err(Error::InvalidConfig(format!("need 0 <= e < 1 and a > 0, got e = {e}, a = {a}")));
    }
    if spatial_dim < 2 {
        return Err(Error::InvalidDimension(spatial_dim + 1));
    }
    if !(params.k1 > 0.0) {
        return Err(Error::InvalidConfig("bound orbits need an attractive k1".into()));
    }
    let rp = a * (1.0 - e);
    let vp = (params.k1_bar() * (1.0 + e) / rp).sqrt();
    let mut x = DVector::zeros(spatial_dim);
    let mut v = DVector::zeros(spatial_dim);
    x[0] = rp;
    v[1] = vp;
    Ok((x, v))
}

/// One cell of the fixed-step comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub eccentricity: f64,
    pub steps: usize,
    pub tau_end: f64,
    pub t_end: f64,
    pub truth: Vec<f64>,
    /// Relative final-position error of the regularized `τ` run.
    pub error_regularized: f64,
    /// Relative final-position error of the direct Cartesian run; infinite if it failed.
    pub error_direct: f64,
}

/// Closed-form Cartesian state `τ` after `ic` on `T*Q₁` (any oscillatory Manev model).
pub fn closed_form_cartesian(mu0: &PhasePoint, params: &ManevParams, tau: f64) -> Result<PhasePoint> {
    let z0 = to_quasi(mu0)?;
    let sys = LinearSystem::new(&z0, *params)?;
    cotangent_lift(&from_quasi(&sys.state_at(&z0, tau)?)?)
}

/// Propagate one `τ`-period from periapsis with `steps` RK4 steps, both regularized and
/// directly in Cartesian time, and measure final-position errors against the closed form.
pub fn compare_fixed_step(e: f64, steps: usize, spatial_dim: usize, params: &ManevParams) -> Result<CompareRow> {
    if steps == 0 {
        return Err(Error::InvalidConfig("step budget must be positive".into()));
    }
    let (x0, v0) = periapsis_state(e, 1.0, spatial_dim, params)?;
    let mu0 = lift_initial_conditions(&x0, &v0, params)?;
    let z0 = to_quasi(&mu0)?;
    let sys = LinearSystem::new(&z0, *params)?;
    let tau_end = 2.0 * PI;
    let t_end = sys.time_of(&z0, tau_end)?;
    let truth = closed_form_cartesian(&mu0, params, tau_end)?;
    let model = ForceModel::new(params.central());
    let scale = truth.r().norm();

    let final_error = |rhs: Rhs, ic: &PhasePoint, param: Parameter, span: f64| -> f64 {
        let mut cfg = IntegratorConfig::fixed(param, span / steps as f64);
        cfg.max_steps = steps + 16;
        match integrate(rhs, ic, span, &cfg, &Sampling::Grid(vec![span]), &model, params) {
            Ok(traj) => match project_trajectory(&traj) {
                Ok(phys) if !phys.is_empty() => (&phys[phys.len() - 1].x - truth.r()).norm() / scale,
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };
    let kappa0 = PhasePoint::new(ConfigPoint::new(x0, 1.0), v0 * params.m, 0.0)?;
    Ok(CompareRow {
        eccentricity: e,
        steps,
        tau_end,
        t_end,
        truth: truth.r().iter().copied().collect(),
        error_regularized: final_error(Rhs::Transformed, &mu0, Parameter::Tau, tau_end),
        error_direct: final_error(Rhs::DirectCartesian, &kappa0, Parameter::T, t_end),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::LinearDrag;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn unit() -> ManevParams {
        ManevParams::kepler(1.0, 1.0).unwrap()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn lift_examples() {
        let mu = lift_initial_conditions(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0]), &unit()).unwrap();
        assert_eq!(mu.r(), &v(&[1.0, 0.0, 0.0]));
        assert_eq!(mu.rn(), 1.0);
        assert_relative_eq!(mu.p(), &v(&[0.0, 1.0, 0.0]));
        assert_eq!(mu.pn(), 0.0);

        let mu = lift_initial_conditions(&v(&[2.0, 0.0, 0.0]), &v(&[0.0, 0.5f64.sqrt(), 0.0]), &unit()).unwrap();
        assert_relative_eq!(mu.rn(), 0.5);
        assert_relative_eq!(mu.p(), &v(&[0.0, 2.0f64.sqrt(), 0.0]), epsilon = 1e-15);
        assert_eq!(mu.pn(), 0.0);

        let p = ManevParams::kepler(2.0, 1.0).unwrap();
        let mu = lift_initial_conditions(&v(&[0.0, 3.0, 0.0]), &v(&[0.0, 0.7, 0.0]), &p).unwrap();
        assert!(mu.p().amax() < 1e-15);
        assert_relative_eq!(to_quasi(&mu).unwrap().pn_tilde, -2.0 * 0.7, max_relative = 1e-15);

        assert!(lift_initial_conditions(&v(&[0.0; 3]), &v(&[1.0, 0.0, 0.0]), &unit()).is_err());
    }

    #[test]
    fn direct_rhs_examples() {
        let kappa = PhasePoint::from_slices(&[1.0, 2.0, 0.0], 1.0, &[0.5, 0.0, 1.0], 0.0).unwrap();
        let free = direct_cartesian_rhs(&kappa, 0.0, &ForceModel::free(), &unit()).unwrap();
        assert_eq!(free.r(), kappa.p());
        assert!(free.p().amax() == 0.0);
        let grav = direct_cartesian_rhs(&kappa, 0.0, &ForceModel::kepler(1.0), &unit()).unwrap();
        let r = kappa.r().norm();
        assert_relative_eq!(grav.p(), &(kappa.r() * (-1.0 / r.powi(3))), epsilon = 1e-15);
        let origin = PhasePoint::from_slices(&[0.0; 3], 1.0, &[0.0; 3], 0.0).unwrap();
        assert!(direct_cartesian_rhs(&origin, 0.0, &ForceModel::kepler(1.0), &unit()).is_err());
    }

    #[test]
    fn circular_orbit_in_s_keeps_fiber_fixed() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let cfg = IntegratorConfig::adaptive(Parameter::S, 1e-12, 1e-14);
        let traj = integrate(Rhs::Transformed, &mu, 5.0, &cfg, &Sampling::EveryStep, &ForceModel::kepler(1.0), &unit())
            .unwrap();
        for s in &traj.samples {
            assert!((s.state.rn() - 1.0).abs() < 1e-12);
            assert!(s.state.pn().abs() < 1e-12);
        }
        let last = traj.samples.last().unwrap();
        assert_eq!(last.clock.s, 5.0);
        assert_relative_eq!(last.clock.t, 5.0, max_relative = 1e-12);
        assert_relative_eq!(last.clock.tau, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn kepler_tau_period_closes() {
        let (x0, v0) = periapsis_state(0.6, 1.0, 3, &unit()).unwrap();
        let mu = lift_initial_conditions(&x0, &v0, &unit()).unwrap();
        let cfg = IntegratorConfig::adaptive(Parameter::Tau, 1e-12, 1e-14);
        let traj =
            integrate(Rhs::Transformed, &mu, 2.0 * PI, &cfg, &Sampling::Uniform(4), &ForceModel::kepler(1.0), &unit())
                .unwrap();
        assert_eq!(traj.samples.len(), 5);
        let end = &traj.samples[4];
        assert!((end.state.to_flat() - mu.to_flat()).amax() < 1e-9);

        let z = to_quasi(&mu).unwrap();
        let sys = LinearSystem::new(&z, unit()).unwrap();
        assert_relative_eq!(end.clock.t, sys.time_of(&z, 2.0 * PI).unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn off_constraint_rejected() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.3, 1.0, 0.0], 0.0).unwrap();
        let err = integrate(
            Rhs::Transformed,
            &mu,
            1.0,
            &IntegratorConfig::default(),
            &Sampling::EveryStep,
            &ForceModel::kepler(1.0),
            &unit(),
        )
        .unwrap_err();
        assert!(matches!(err.error, Error::OffConstraint(..)));
    }

    #[test]
    fn direct_free_particle_is_straight() {
        let kappa = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.5], 0.0).unwrap();
        let cfg = IntegratorConfig::adaptive(Parameter::T, 1e-12, 1e-14);
        let traj =
            integrate(Rhs::DirectCartesian, &kappa, 3.0, &cfg, &Sampling::Uniform(3), &ForceModel::free(), &unit())
                .unwrap();
        let phys = project_trajectory(&traj).unwrap();
        assert_relative_eq!(phys[3].x, v(&[1.0, 3.0, 1.5]), epsilon = 1e-12);
    }

    #[test]
    fn projection_round_trip() {
        let (x0, v0) = (v(&[0.3, -1.2, 0.4]), v(&[0.8, 0.1, -0.3]));
        let p = ManevParams::kepler(1.5, 1.0).unwrap();
        let mu = lift_initial_conditions(&x0, &v0, &p).unwrap();
        let cfg = IntegratorConfig::adaptive(Parameter::Tau, 1e-10, 1e-12);
        let traj =
            integrate(Rhs::Transformed, &mu, 0.5, &cfg, &Sampling::Grid(vec![0.0, 0.5]), &ForceModel::kepler(1.5), &p)
                .unwrap();
        let phys = project_trajectory(&traj).unwrap();
        assert!((&phys[0].x - &x0).amax() < 1e-15);
        assert!((&phys[0].kappa - &v0 * 1.5).amax() < 1e-14);
        assert!(phys[0].normal_residual.abs() < 1e-15);
    }

    #[test]
    fn manev_precesses() {
        let p = ManevParams::new(1.0, 1.0, 0.2).unwrap();
        let model = ForceModel::manev(1.0, 0.2);
        let kappa = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.3, 0.0], 0.0).unwrap();
        let cfg = IntegratorConfig::adaptive(Parameter::T, 1e-11, 1e-13);
        let traj = integrate(Rhs::DirectCartesian, &kappa, 60.0, &cfg, &Sampling::Uniform(6000), &model, &p).unwrap();
        let phys = project_trajectory(&traj).unwrap();
        let radii: Vec<f64> = phys.iter().map(|s| s.x.norm()).collect();
        let mut angles = Vec::new();
        for i in 1..radii.len() - 1 {
            if radii[i] < radii[i - 1] && radii[i] <= radii[i + 1] {
                angles.push(phys[i].x[1].atan2(phys[i].x[0]));
            }
        }
        assert!(angles.len() >= 2);
        // periapsis direction moves forward by the same nonzero angle each revolution
        let first = (angles[1] - angles[0]).rem_euclid(2.0 * PI);
        assert!(first > 0.1 && first < PI);
    }

    #[test]
    fn drag_failure_reports_partial() {
        let model = ForceModel::kepler(1.0).with_force(Arc::new(LinearDrag { coefficient: 0.0 }));
        let cfg = IntegratorConfig { max_steps: 3, ..IntegratorConfig::adaptive(Parameter::T, 1e-12, 1e-14) };
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let err = integrate(Rhs::Transformed, &mu, 10.0, &cfg, &Sampling::EveryStep, &model, &unit()).unwrap_err();
        assert!(matches!(err.error, Error::StepLimit(3)));
        assert!(!err.partial.samples.is_empty());
    }

    #[test]
    fn invalid_config() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0, 0.0], 1.0, &[0.0, 1.0, 0.0], 0.0).unwrap();
        let bad = IntegratorConfig { method: Method::FixedRk4, step: None, ..IntegratorConfig::default() };
        let err = integrate(Rhs::Transformed, &mu, 1.0, &bad, &Sampling::EveryStep, &ForceModel::kepler(1.0), &unit());
        assert!(matches!(err.unwrap_err().error, Error::InvalidConfig(_)));
    }

    #[test]
    fn comparison_circular_both_accurate() {
        let row = compare_fixed_step(0.0, 2000, 3, &unit()).unwrap();
        assert!(row.error_regularized < 1e-10);
        assert!(row.error_direct < 1e-8);
        assert_relative_eq!(row.t_end, 2.0 * PI, max_relative = 1e-10);
    }
}
