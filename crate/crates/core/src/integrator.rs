//! Explicit Runge–Kutta drivers: adaptive Dormand–Prince 5(4) and classical RK4.
//!
//! Steps are clipped so that requested output points are hit exactly.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Integration scheme and its step control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    Dopri5 { rtol: f64, atol: f64, h0: f64 },
    Rk4 { h: f64 },
}

/// Where the driver reports states.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    /// The initial point and every accepted step.
    EveryStep,
    /// Exactly these increasing parameter values.
    Points(Vec<f64>),
}

/// Step counters of a finished run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Scheme plus a cap on the number of attempted steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub scheme: Scheme,
    pub max_steps: usize,
}

/// A failed run with the last state that was accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub error: Error,
    pub at: f64,
    pub last: DVector<f64>,
    pub stats: Stats,
}

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

fn combo(y: &DVector<f64>, h: f64, coeffs: &[f64], ks: &[DVector<f64>]) -> DVector<f64> {
    let mut out = y.clone();
    for (c, k) in coeffs.iter().zip(ks) {
        if *c != 0.0 {
            out.axpy(h * c, k, 1.0);
        }
    }
    out
}

struct Driver<F> {
    f: F,
    stats: Stats,
    max_steps: usize,
}

impl<F> Driver<F>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    fn eval(&mut self, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.stats.evaluations += 1;
        let k = (self.f)(t, y)?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite derivative at {t}")));
        }
        Ok(k)
    }

    /// One Dormand–Prince trial: new state, its derivative and the scaled error.
    fn dopri_trial(
        &mut self,
        t: f64,
        y: &DVector<f64>,
        k1: &DVector<f64>,
        h: f64,
        rtol: f64,
        atol: f64,
    ) -> Result<(DVector<f64>, DVector<f64>, f64)> {
        let mut ks = vec![k1.clone()];
        let y2 = combo(y, h, &[A21], &ks);
        ks.push(self.eval(t + C[0] * h, &y2)?);
        let y3 = combo(y, h, &A3, &ks);
        ks.push(self.eval(t + C[1] * h, &y3)?);
        let y4 = combo(y, h, &A4, &ks);
        ks.push(self.eval(t + C[2] * h, &y4)?);
        let y5 = combo(y, h, &A5, &ks);
        ks.push(self.eval(t + C[3] * h, &y5)?);
        let y6 = combo(y, h, &A6, &ks);
        ks.push(self.eval(t + C[4] * h, &y6)?);
        let next = combo(y, h, &B, &ks);
        let k7 = self.eval(t + h, &next)?;
        ks.push(k7.clone());

        let mut acc = 0.0;
        for i in 0..y.len() {
            let mut e = 0.0;
            for (c, k) in E.iter().zip(&ks) {
                e += c * k[i];
            }
            let sc = atol + rtol * y[i].abs().max(next[i].abs());
            acc += (h * e / sc).powi(2);
        }
        Ok((next, k7, (acc / y.len() as f64).sqrt()))
    }

    fn rk4_step(&mut self, t: f64, y: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
        let k1 = self.eval(t, y)?;
        let k2 = self.eval(t + 0.5 * h, &(y + &k1 * (0.5 * h)))?;
        let k3 = self.eval(t + 0.5 * h, &(y + &k2 * (0.5 * h)))?;
        let k4 = self.eval(t + h, &(y + &k3 * h))?;
        Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
    }
}

/// Integrate `y′ = f(t, y)` from `t0` to `t1 > t0`, calling `observe` at the requested outputs.
///
/// Output points outside `[t0, t1]` are ignored; `t1` itself is always reached exactly.
pub fn solve<F, O>(
    f: F,
    t0: f64,
    y0: DVector<f64>,
    t1: f64,
    settings: Settings,
    output: &Output,
    mut observe: O,
) -> std::result::Result<Stats, Failure>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
    O: FnMut(f64, &DVector<f64>) -> Result<()>,
{
    let mut drv = Driver { f, stats: Stats::default(), max_steps: settings.max_steps };
    let fail =
        |error: Error, at: f64, last: &DVector<f64>, stats: Stats| Failure { error, at, last: last.clone(), stats };

    if !(t1 > t0) || !t1.is_finite() {
        return Err(fail(Error::InvalidConfig(format!("span [{t0}, {t1}] is empty")), t0, &y0, drv.stats));
    }

    let targets: Vec<f64> = match output {
        Output::EveryStep => vec![t1],
        Output::Points(p) => p.iter().copied().filter(|&x| x > t0 && x <= t1).collect(),
    };
    let mut next_target = 0;
    let mut t = t0;
    let mut y = y0;

    let wants_start = match output {
        Output::EveryStep => true,
        Output::Points(p) => p.first().is_some_and(|&x| x == t0),
    };
    if wants_start {
        if let Err(e) = observe(t, &y) {
            return Err(fail(e, t, &y, drv.stats));
        }
    }
    let every = matches!(output, Output::EveryStep);
    let stop = t1;

    match settings.scheme {
        Scheme::Rk4 { h } => {
            if !(h > 0.0) {
                return Err(fail(Error::InvalidConfig("fixed step must be positive".into()), t, &y, drv.stats));
            }
            let mut i: u64 = 0;
            while t < stop {
                if drv.stats.accepted >= drv.max_steps {
                    return Err(fail(Error::StepLimit(drv.max_steps), t, &y, drv.stats));
                }
                let grid_next = (t0 + h * (i + 1) as f64).min(stop);
                let (end, lands) = match targets.get(next_target) {
                    Some(&tt) if tt <= grid_next => (tt, true),
                    _ => (grid_next, false),
                };
                let step = end - t;
                match drv.rk4_step(t, &y, step) {
                    Ok(ny) => {
                        y = ny;
                        t = end;
                    }
                    Err(e) => return Err(fail(wrap_domain(e, t), t, &y, drv.stats)),
                }
                drv.stats.accepted += 1;
                if end >= grid_next {
                    i += 1;
                }
                if every || lands {
                    if lands {
                        next_target += 1;
                    }
                    if let Err(e) = observe(t, &y) {
                        return Err(fail(e, t, &y, drv.stats));
                    }
                }
            }
            Ok(drv.stats)
        }
        Scheme::Dopri5 { rtol, atol, h0 } => {
            if !(rtol > 0.0) || !(atol > 0.0) || !(h0 > 0.0) {
                return Err(fail(
                    Error::InvalidConfig("rtol, atol and the initial step must be positive".into()),
                    t,
                    &y,
                    drv.stats,
                ));
            }
            let mut k1 = match drv.eval(t, &y) {
                Ok(k) => k,
                Err(e) => return Err(fail(wrap_domain(e, t), t, &y, drv.stats)),
            };
            let mut h = h0.min(stop - t0);
            let mut last_rejected = false;
            while t < stop {
                if drv.stats.accepted + drv.stats.rejected >= drv.max_steps {
                    return Err(fail(Error::StepLimit(drv.max_steps), t, &y, drv.stats));
                }
                let min_step = 16.0 * f64::EPSILON * t.abs().max(1.0);
                if h < min_step {
                    return Err(fail(Error::StepUnderflow(t), t, &y, drv.stats));
                }
                let (end, lands) = match targets.get(next_target) {
                    Some(&tt) if tt <= t + h => (tt, true),
                    _ => (t + h, false),
                };
                let step = end - t;
                match drv.dopri_trial(t, &y, &k1, step, rtol, atol) {
                    Ok((ny, nk, err)) if err <= 1.0 => {
                        t = end;
                        y = ny;
                        k1 = nk;
                        drv.stats.accepted += 1;
                        let mut factor = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
                        if last_rejected {
                            factor = factor.min(1.0);
                        }
                        last_rejected = false;
                        if !lands || step >= h {
                            h = step * factor;
                        }
                        if every || lands {
                            if lands {
                                next_target += 1;
                            }
                            if let Err(e) = observe(t, &y) {
                                return Err(fail(e, t, &y, drv.stats));
                            }
                        }
                    }
                    Ok((_, _, err)) => {
                        drv.stats.rejected += 1;
                        last_rejected = true;
                        h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    }
                    Err(e) => {
                        // a stage left the domain; retry with a shorter step
                        drv.stats.rejected += 1;
                        last_rejected = true;
                        h = step * 0.25;
                        if h < min_step {
                            return Err(fail(wrap_domain(e, t), t, &y, drv.stats));
                        }
                    }
                }
            }
            Ok(drv.stats)
        }
    }
}

fn wrap_domain(e: Error, at: f64) -> Error {
    match e {
        Error::Domain(reason) => Error::DomainExit { param: at, reason },
        Error::SingularPotential(r) => {
            Error::DomainExit { param: at, reason: format!("radius {r:e} at the singularity") }
        }
        other => other,
    }
}
