//! Seeded property checks over random states and orbits.
//!
//! Random configuration points use spatial components in `[−2, 2]` (norm at least
//! 0.2) and normal components in `[0.5, 2]`; momenta are drawn from `[−2, 2]`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_form::{cartesian_kepler_state, LinearSystem};
use crate::error::Result;
use crate::euclidean::{angular_momentum_sq, q_residual, ConfigPoint, PhasePoint};
use crate::hamiltonian::{
    bracket_diagnostics, eval_h, eval_k, rhs_t, ConstantAcceleration, ForceModel, LinearDrag, ManevParams,
};
use crate::projective::{
    cotangent_lift, cotangent_unlift, induced_metric, jacobians, passive_coords, project_point, unproject_point,
};
use crate::propagator::{
    integrate, lift_initial_conditions, periapsis_state, project_trajectory, IntegratorConfig, Rhs, Sampling,
};
use crate::regularized::{
    from_quasi, rhs_s, rhs_s_via_t, second_order_residual, to_quasi, ParamClock, Parameter, QuasiState,
};

/// How many random samples each family of checks draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyCounts {
    /// Random phase-space points for pointwise identities.
    pub points: usize,
    /// Random orbits for closed-form and integration checks.
    pub orbits: usize,
}

impl Default for VerifyCounts {
    fn default() -> Self {
        Self { points: 1000, orbits: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub dimension: usize,
    pub counts: VerifyCounts,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn random_vector(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(d, |_, _| uniform(rng, lo, hi))
}

pub fn random_config_point(rng: &mut impl Rng, spatial_dim: usize) -> ConfigPoint {
    loop {
        let r = random_vector(rng, spatial_dim, -2.0, 2.0);
        if r.norm() >= 0.2 {
            return ConfigPoint::new(r, uniform(rng, 0.5, 2.0));
        }
    }
}

pub fn random_phase_point(rng: &mut impl Rng, spatial_dim: usize) -> PhasePoint {
    let base = random_config_point(rng, spatial_dim);
    let p = random_vector(rng, spatial_dim, -2.0, 2.0);
    PhasePoint { base, momentum_spatial: p, momentum_normal: uniform(rng, -2.0, 2.0) }
}

/// A random point with `q̂·μ⃗ = 0`, so that `κₙ = 0` after lifting.
pub fn random_compatible_point(rng: &mut impl Rng, spatial_dim: usize) -> PhasePoint {
    let mut mu = random_phase_point(rng, spatial_dim);
    let unit = mu.r().normalize();
    let radial = unit.dot(mu.p());
    mu.momentum_spatial -= unit * radial;
    mu
}

fn random_unit(rng: &mut impl Rng, d: usize) -> DVector<f64> {
    loop {
        let v = random_vector(rng, d, -1.0, 1.0);
        let n = v.norm();
        if n > 0.2 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A bound orbit on `T*Q₁` for the given oscillatory Manev constants.
pub fn random_bound_orbit(rng: &mut impl Rng, spatial_dim: usize, params: &ManevParams) -> QuasiState {
    loop {
        let r = random_unit(rng, spatial_dim);
        let dir = random_unit(rng, spatial_dim);
        let tangent = &dir - &r * r.dot(&dir);
        if tangent.norm() < 0.1 {
            continue;
        }
        let p = tangent.normalize() * (params.m * uniform(rng, 0.7, 1.5));
        let z = QuasiState { r, p, rn: uniform(rng, 0.5, 1.5), pn_tilde: uniform(rng, -0.5, 0.5) };
        let ell_bar = z.ell_bar(params.m);
        let beta_sq = params.beta_sq(ell_bar);
        if beta_sq <= 0.0 {
            continue;
        }
        let beta = beta_sq.sqrt();
        let c = params.k1_bar() / beta_sq;
        let amp = (z.rn - c).hypot(z.pn_tilde / (params.m * beta));
        if amp < 0.9 * c {
            return z;
        }
    }
}

struct Acc {
    name: &'static str,
    tolerance: f64,
    samples: usize,
    max_error: f64,
    failure: Option<String>,
}

impl Acc {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, samples: 0, max_error: 0.0, failure: None }
    }

    fn add(&mut self, err: f64) {
        self.samples += 1;
        if err.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(err);
        }
    }

    fn record<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                if self.failure.is_none() {
                    self.failure = Some(e.to_string());
                }
                None
            }
        }
    }

    fn finish(self) -> CheckResult {
        let passed = self.failure.is_none() && self.samples > 0 && self.max_error <= self.tolerance;
        CheckResult {
            name: self.name.to_string(),
            samples: self.samples,
            max_error: self.max_error,
            tolerance: self.tolerance,
            passed,
            failure: self.failure,
        }
    }
}

fn rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Central-difference Jacobian of `T*ψ` in the flat layout.
pub fn lift_jacobian_fd(mu: &PhasePoint, h: f64) -> Result<DMatrix<f64>> {
    let y = mu.to_flat();
    let n = y.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = y.clone();
        let mut minus = y.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = cotangent_lift(&PhasePoint::from_flat(&plus))?.to_flat();
        let fm = cotangent_lift(&PhasePoint::from_flat(&minus))?.to_flat();
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok(jac)
}

/// The canonical symplectic matrix for the flat `(q̄, p̄)` layout of size `2k`.
pub fn symplectic_form(k: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        omega[(i, k + i)] = 1.0;
        omega[(k + i, i)] = -1.0;
    }
    omega
}

/// Cartesian Kepler state from the inverse-radius formulation, for cross-checking.
pub fn legacy_kepler_state(
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    k1_bar: f64,
    tau: f64,
) -> (DVector<f64>, DVector<f64>) {
    let r = x0.norm();
    let q0 = x0 / r;
    let u0 = 1.0 / r;
    let w0 = -v0.dot(&q0);
    let p0 = (v0 - &q0 * v0.dot(&q0)) * r;
    let ell = p0.norm();
    let rest = k1_bar / (ell * ell);
    let (sin, cos) = tau.sin_cos();
    let u = (u0 - rest) * cos + w0 / ell * sin + rest;
    let x = (&q0 * cos + &p0 * (sin / ell)) / u;
    let p_tau = &q0 * (-ell * sin) + &p0 * cos;
    let v = v0 + (p_tau - p0) * rest;
    (x, v)
}

/// Run every check with the given seed.
pub fn run_verification(seed: u64, counts: VerifyCounts, spatial_dim: usize) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spatial_dim;
    let mut checks = Vec::new();
    let manev = ManevParams { m: 1.3, k1: 0.9, k2: 0.2 };
    let manev_model = ForceModel::manev(manev.k1, manev.k2);
    let orbit_params = ManevParams { m: 1.0, k1: 1.0, k2: 0.1 };

    let mut acc = Acc::new("point_round_trip", 1e-13);
    for _ in 0..counts.points {
        let q = random_config_point(&mut rng, d);
        if let Some(back) = acc.record(project_point(&q).and_then(|x| unproject_point(&x))) {
            acc.add((back.to_vector() - q.to_vector()).norm() / q.norm());
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("lift_round_trip", 1e-12);
    for _ in 0..counts.points {
        let mu = random_phase_point(&mut rng, d);
        if let Some(back) = acc.record(cotangent_lift(&mu).and_then(|k| cotangent_unlift(&k))) {
            acc.add(rel_diff(&back.to_flat(), &mu.to_flat()));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("symplecticity", 1e-5);
    let omega = symplectic_form(d + 1);
    for _ in 0..(counts.points / 10).max(1) {
        let mu = random_phase_point(&mut rng, d);
        if let Some(j) = acc.record(lift_jacobian_fd(&mu, 1e-6)) {
            acc.add((j.transpose() * &omega * &j - &omega).amax());
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("jacobian_inverse", 1e-12);
    for _ in 0..counts.points {
        let q = random_config_point(&mut rng, d);
        if let Some(pair) = acc.record(jacobians(&q)) {
            let n = d + 1;
            acc.add((&pair.inverse_at_image * &pair.forward - DMatrix::identity(n, n)).amax());
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("metric_pullback", 1e-12);
    for _ in 0..counts.points {
        let q = random_config_point(&mut rng, d);
        if let (Some(pair), Some(g)) = (acc.record(jacobians(&q)), acc.record(induced_metric(&q, manev.m))) {
            let pulled = pair.forward.transpose() * &pair.forward * manev.m;
            acc.add((&g.g - &pulled).amax() / pulled.amax().max(1.0));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("hamiltonian_correspondence", 1e-12);
    for _ in 0..counts.points {
        let mu = random_compatible_point(&mut rng, d);
        let h = acc.record(eval_h(&mu, 0.0, &manev_model, &manev));
        let k = acc.record(cotangent_lift(&mu).and_then(|kappa| eval_k(&kappa, 0.0, &manev_model, &manev)));
        if let (Some(h), Some(k)) = (h, k) {
            acc.add((h - k).abs() / (1.0 + k.abs()));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("angular_momentum_lift", 1e-12);
    for _ in 0..counts.points {
        let mu = random_phase_point(&mut rng, d);
        if let Some(kappa) = acc.record(cotangent_lift(&mu)) {
            let a = angular_momentum_sq(mu.r(), mu.p());
            let b = angular_momentum_sq(kappa.r(), kappa.p());
            acc.add((a - b).abs() / a.max(f64::MIN_POSITIVE));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("passive_active", 1e-13);
    for _ in 0..counts.points {
        let kappa = random_phase_point(&mut rng, d);
        let a = acc.record(passive_coords(&kappa));
        let b = acc.record(cotangent_unlift(&kappa));
        if let (Some(a), Some(b)) = (a, b) {
            acc.add((a.to_flat() - b.to_flat()).amax() / b.to_flat().amax().max(1.0));
        }
    }
    checks.push(acc.finish());

    let perturbed = manev_model
        .clone()
        .with_potential(Arc::new(ConstantAcceleration {
            acceleration: DVector::from_fn(d, |i, _| 0.05 * (i as f64 + 1.0)),
            mass: manev.m,
        }))
        .with_force(Arc::new(LinearDrag { coefficient: 0.2 }));

    let mut acc = Acc::new("chart_equivalence", 1e-12);
    for _ in 0..counts.points {
        let mu = random_phase_point(&mut rng, d);
        let Some(z) = acc.record(to_quasi(&mu)) else { continue };
        let clock = ParamClock::default();
        let a = acc.record(rhs_s(&z, &clock, &perturbed, &manev));
        let b = acc.record(rhs_s_via_t(&z, &clock, &perturbed, &manev));
        if let (Some((a, _)), Some(b)) = (a, b) {
            let (a, b) = (a.to_flat(), b.to_flat());
            acc.add((&a - &b).amax() / b.amax().max(1.0));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("hamiltonian_rate", 1e-6);
    for _ in 0..counts.points {
        let mu = random_compatible_point(&mut rng, d);
        let Some(dot) = acc.record(rhs_t(&mu, 0.0, &perturbed, &manev)) else { continue };
        let Some(rates) = acc.record(bracket_diagnostics(&mu, 0.0, &perturbed, &manev)) else { continue };
        let h = 1e-6;
        let step = |s: f64| PhasePoint::from_flat(&(mu.to_flat() + dot.to_flat() * s));
        let hp = acc.record(eval_h(&step(h), 0.0, &perturbed, &manev));
        let hm = acc.record(eval_h(&step(-h), 0.0, &perturbed, &manev));
        if let (Some(hp), Some(hm)) = (hp, hm) {
            acc.add(((hp - hm) / (2.0 * h) - rates.hamiltonian).abs() / rates.hamiltonian.abs().max(1.0));
        }
    }
    checks.push(acc.finish());

    let orbits: Vec<QuasiState> = (0..counts.orbits).map(|_| random_bound_orbit(&mut rng, d, &orbit_params)).collect();
    let orbit_model = ForceModel::new(orbit_params.central());

    let mut acc = Acc::new("closed_form_vs_numeric", 1e-9);
    let taus = [0.1, 1.0, PI, 10.0];
    for z in &orbits {
        let Some(sys) = acc.record(LinearSystem::new(z, orbit_params)) else { continue };
        let Some(mu) = acc.record(from_quasi(z)) else { continue };
        let cfg = IntegratorConfig::adaptive(Parameter::Tau, 1e-12, 1e-14);
        match integrate(Rhs::Transformed, &mu, 10.0, &cfg, &Sampling::Grid(taus.to_vec()), &orbit_model, &orbit_params)
        {
            Ok(traj) => {
                for s in &traj.samples {
                    let exact = sys.state_at(z, s.clock.tau).and_then(|e| from_quasi(&e));
                    if let Some(exact) = acc.record(exact) {
                        acc.add(rel_diff(&s.state.to_flat(), &exact.to_flat()));
                    }
                }
            }
            Err(e) => {
                acc.record::<()>(Err(e.error));
            }
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("flow_property", 1e-11);
    for z in &orbits {
        let Some(sys) = acc.record(LinearSystem::new(z, orbit_params)) else { continue };
        let (t1, t2) = (uniform(&mut rng, 0.0, 5.0), uniform(&mut rng, 0.0, 5.0));
        let direct = acc.record(sys.state_at(z, t1 + t2));
        let composed = acc.record(sys.state_at(z, t1).and_then(|m| sys.state_at(&m, t2)));
        if let (Some(a), Some(b)) = (direct, composed) {
            acc.add(rel_diff(&a.to_flat(), &b.to_flat()));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("closed_form_conservation", 1e-11);
    for z in &orbits {
        let Some(sys) = acc.record(LinearSystem::new(z, orbit_params)) else { continue };
        let Some(mu0) = acc.record(from_quasi(z)) else { continue };
        let Some(h0) = acc.record(eval_h(&mu0, 0.0, &orbit_model, &orbit_params)) else { continue };
        for tau in taus {
            let Some(zt) = acc.record(sys.state_at(z, tau)) else { continue };
            let Some(h) = acc.record(from_quasi(&zt).and_then(|m| eval_h(&m, 0.0, &orbit_model, &orbit_params))) else {
                continue;
            };
            acc.add((h - h0).abs() / h0.abs().max(1.0));
            acc.add((zt.ell_sq() - z.ell_sq()).abs() / z.ell_sq());
            acc.add((zt.r.norm() - z.r.norm()).abs());
            acc.add((zt.r.dot(&zt.p) - z.r.dot(&z.p)).abs());
        }
    }
    checks.push(acc.finish());

    let kepler = ManevParams { m: 1.0, k1: 1.0, k2: 0.0 };
    let mut acc = Acc::new("kepler_closure", 1e-11);
    for z in &orbits {
        let Some(sys) = acc.record(LinearSystem::new(z, kepler)) else { continue };
        if let Some(end) = acc.record(sys.state_at(z, 2.0 * PI)) {
            acc.add(rel_diff(&end.to_flat(), &z.to_flat()));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("legacy_kepler_oracle", 1e-10);
    for z in &orbits {
        let Some(mu) = acc.record(from_quasi(z)) else { continue };
        let Some(kappa0) = acc.record(cotangent_lift(&mu)) else { continue };
        let v0 = kappa0.p() / kepler.m;
        for tau in taus {
            let Some(k) = acc.record(cartesian_kepler_state(&mu, &kepler, tau)) else { continue };
            let (x, v) = legacy_kepler_state(kappa0.r(), &v0, kepler.k1_bar(), tau);
            acc.add(rel_diff(k.r(), &x));
            acc.add(rel_diff(k.p(), &(v * kepler.m)));
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("second_order_residual", 5e-6);
    for z in orbits.iter().take(8) {
        let Some(sys) = acc.record(LinearSystem::new(z, orbit_params)) else { continue };
        let h = 1e-3;
        let window: Vec<QuasiState> =
            (0..200).filter_map(|i| acc.record(sys.state_at(z, sys.ell_bar0 * h * i as f64))).collect();
        if let Some(res) = acc.record(second_order_residual(&window, h, Parameter::S, &orbit_params)) {
            for r in res {
                acc.add(r.amax());
            }
        }
    }
    checks.push(acc.finish());

    let runs: Vec<(f64, usize)> = vec![(0.0, 0), (0.3, 1), (0.7, 2)];
    let mut oracle = Acc::new("oracle_equivalence", 1e-8);
    let mut constraint = Acc::new("constraint_preservation", 1e-9);
    let mut drift = Acc::new("conservation_drift", 1e-9);
    for (e, _) in runs {
        let Some((x0, v0)) = oracle.record(periapsis_state(e, 1.0, d, &kepler)) else { continue };
        let Some(mu0) = oracle.record(lift_initial_conditions(&x0, &v0, &kepler)) else { continue };
        let model = ForceModel::kepler(kepler.k1);
        let cfg = IntegratorConfig::adaptive(Parameter::Tau, 1e-12, 1e-14);
        match integrate(Rhs::Transformed, &mu0, 2.0 * PI, &cfg, &Sampling::Uniform(32), &model, &kepler) {
            Ok(traj) => {
                let times: Vec<f64> = traj.samples.iter().map(|s| s.clock.t).collect();
                let direct_cfg = IntegratorConfig::adaptive(Parameter::T, 1e-12, 1e-14);
                let kappa0 = PhasePoint::new(ConfigPoint::new(x0.clone(), 1.0), &v0 * kepler.m, 0.0).expect("dims");
                let end = *times.last().expect("samples");
                match integrate(
                    Rhs::DirectCartesian,
                    &kappa0,
                    end,
                    &direct_cfg,
                    &Sampling::Grid(times),
                    &model,
                    &kepler,
                ) {
                    Ok(direct) => {
                        let a = oracle.record(project_trajectory(&traj));
                        let b = oracle.record(project_trajectory(&direct));
                        if let (Some(a), Some(b)) = (a, b) {
                            for (sa, sb) in a.iter().zip(&b) {
                                oracle.add(rel_diff(&sa.x, &sb.x));
                                oracle.add(rel_diff(&sa.kappa, &sb.kappa));
                            }
                        }
                    }
                    Err(f) => {
                        oracle.record::<()>(Err(f.error));
                    }
                }
            }
            Err(f) => {
                oracle.record::<()>(Err(f.error));
            }
        }

        match integrate(Rhs::Transformed, &mu0, 20.0 * PI, &cfg, &Sampling::EveryStep, &model, &kepler) {
            Ok(traj) => {
                let first = traj.samples[0].diagnostics;
                for s in &traj.samples {
                    let (a, b) = s.diagnostics.q_residual;
                    constraint.add(a.abs().max(b.abs()));
                    drift.add((s.diagnostics.hamiltonian - first.hamiltonian).abs() / first.hamiltonian.abs().max(1.0));
                    drift.add((s.diagnostics.ell_sq - first.ell_sq).abs() / first.ell_sq);
                }
            }
            Err(f) => {
                constraint.record::<()>(Err(f.error.clone()));
                drift.record::<()>(Err(f.error));
            }
        }
    }
    checks.push(oracle.finish());
    checks.push(constraint.finish());
    checks.push(drift.finish());

    let mut acc = Acc::new("time_recovery", 1e-8);
    for e in [0.0, 0.5] {
        let Some((x0, v0)) = acc.record(periapsis_state(e, 1.0, d, &kepler)) else { continue };
        let Some(mu0) = acc.record(lift_initial_conditions(&x0, &v0, &kepler)) else { continue };
        let Some(z0) = acc.record(to_quasi(&mu0)) else { continue };
        let Some(sys) = acc.record(LinearSystem::new(&z0, kepler)) else { continue };
        if let Some(t) = acc.record(sys.time_of(&z0, 2.0 * PI)) {
            // a = 1 by construction
            let period = 2.0 * PI / kepler.k1_bar().sqrt();
            acc.add((t - period).abs() / period);
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("drag_bookkeeping", 1e-6);
    {
        let model = ForceModel::kepler(kepler.k1).with_force(Arc::new(LinearDrag { coefficient: 0.01 }));
        let run = periapsis_state(0.3, 1.0, d, &kepler).and_then(|(x0, v0)| lift_initial_conditions(&x0, &v0, &kepler));
        if let Some(mu0) = acc.record(run) {
            let cfg = IntegratorConfig::adaptive(Parameter::T, 1e-12, 1e-14);
            match integrate(Rhs::Transformed, &mu0, 2.0 * PI, &cfg, &Sampling::Uniform(2000), &model, &kepler) {
                Ok(traj) => {
                    for w in traj.samples.windows(3) {
                        let fd = (w[2].diagnostics.hamiltonian - w[0].diagnostics.hamiltonian)
                            / (w[2].clock.t - w[0].clock.t);
                        if let Some(r) = acc.record(bracket_diagnostics(&w[1].state, w[1].clock.t, &model, &kepler)) {
                            acc.add((fd - r.hamiltonian).abs());
                        }
                    }
                }
                Err(f) => {
                    acc.record::<()>(Err(f.error));
                }
            }
        }
    }
    checks.push(acc.finish());

    let mut acc = Acc::new("q_residual_examples", 0.0);
    for (r, p, want) in [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], (0.0, 0.0)), ([2.0, 0.0, 0.0], [1.0, 0.0, 0.0], (1.0, 1.0))]
    {
        let mut rv = vec![0.0; d];
        let mut pv = vec![0.0; d];
        let k = 3.min(d);
        rv[..k].copy_from_slice(&r[..k]);
        pv[..k].copy_from_slice(&p[..k]);
        let point = PhasePoint::from_slices(&rv, 1.0, &pv, 0.0).expect("dims");
        if let Some((a, b)) = acc.record(q_residual(&point, 1.0)) {
            acc.add((a - want.0).abs().max((b - want.1).abs()));
        }
    }
    checks.push(acc.finish());

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { seed, dimension: d + 1, counts, passed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_verification(7, VerifyCounts { points: 50, orbits: 3 }, 3);
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(report.passed);
        assert!(report.check("symplecticity").is_some());
    }

    #[test]
    fn deterministic_for_seed() {
        let counts = VerifyCounts { points: 20, orbits: 1 };
        let a = run_verification(11, counts, 3);
        let b = run_verification(11, counts, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn samplers_respect_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let q = random_config_point(&mut rng, 3);
            assert!(q.spatial_norm() >= 0.2 && (0.5..2.0).contains(&q.normal));
            let mu = random_compatible_point(&mut rng, 3);
            assert!(mu.r().normalize().dot(mu.p()).abs() < 1e-12);
        }
    }
}
