//! Subcommand implementations.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use projreg::{
    compare_fixed_step, eval_h, from_quasi, integrate, run_verification, to_quasi, CompareRow, Error, LinearSystem,
    ParamClock, Parameter, PropagationFailure, Rhs, Sampling, VerifyCounts,
};

use crate::config::{self, RunConfig};
use crate::output::{self, Row, Steps, Summary};

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Check(String),
    Config(String),
    Domain(String),
    Unsupported(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Check(m) | CliError::Config(m) | CliError::Domain(m) | CliError::Unsupported(m) => m,
        }
    }
}

impl From<&Error> for CliError {
    fn from(e: &Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidConfig(_) | Error::DimensionMismatch { .. } | Error::InvalidDimension(_) => {
                CliError::Config(msg)
            }
            Error::Unsupported(_) | Error::NonOscillatory(_) | Error::Rectilinear(_) | Error::OffConstraint(..) => {
                CliError::Unsupported(msg)
            }
            _ => CliError::Domain(msg),
        }
    }
}

pub struct Common {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub param: Option<Parameter>,
    pub quiet: bool,
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let path = common.config.as_deref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    config::load(path).map_err(CliError::Config)
}

fn write_csv(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    output::emit(path, text).map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn report(common: &Common, csv: Option<&Path>, summary: &Summary) {
    if !common.quiet && csv.is_some() {
        print_json(summary);
    }
}

pub fn propagate(common: &Common) -> Result<(), CliError> {
    let cfg = load(common)?;
    let params = cfg.params().map_err(CliError::Config)?;
    let d = cfg.spatial_dim().map_err(CliError::Config)?;
    let model = cfg.model(&params, d).map_err(CliError::Config)?;
    let mu0 = cfg.initial_state(&params).map_err(CliError::Config)?;
    let (param, length) = cfg.span(common.param).map_err(CliError::Config)?;
    let integrator = cfg.integrator(param, length).map_err(CliError::Config)?;
    let sampling = cfg.sampling(length).map_err(CliError::Config)?;
    let csv = cfg.csv_path(common.out.as_deref());

    let result = integrate(Rhs::Transformed, &mu0, length, &integrator, &sampling, &model, &params);
    let (traj, failure) = match result {
        Ok(t) => (t, None),
        Err(PropagationFailure { error, partial }) => (partial, Some(error)),
    };
    let rows: Vec<Row> = traj
        .samples
        .iter()
        .map(|s| Row::new(s.clock, s.state.clone(), s.diagnostics.hamiltonian))
        .collect::<projreg::Result<_>>()
        .map_err(|e| CliError::from(&e))?;

    write_csv(csv.as_deref(), &output::render(d, &rows))?;
    let summary = Summary {
        command: "propagate",
        status: if failure.is_some() { "error" } else { "ok" },
        error: failure.as_ref().map(|e| e.to_string()),
        parameter: param.to_string(),
        rows: rows.len(),
        output: csv.as_ref().map(|p| p.display().to_string()),
        final_state: rows.last().map(Into::into),
        max_drift: output::drift(&rows),
        steps: Some(Steps {
            accepted: traj.stats.accepted,
            rejected: traj.stats.rejected,
            evaluations: traj.stats.evaluations,
        }),
    };
    report(common, csv.as_deref(), &summary);
    match failure {
        Some(e) => Err(CliError::from(&e)),
        None => Ok(()),
    }
}

pub fn closed_form(common: &Common) -> Result<(), CliError> {
    let cfg = load(common)?;
    let params = cfg.params().map_err(CliError::Config)?;
    let d = cfg.spatial_dim().map_err(CliError::Config)?;
    if cfg.is_perturbed() {
        return Err(CliError::Unsupported("closed-form solutions need an unperturbed model".into()));
    }
    let model = cfg.model(&params, d).map_err(CliError::Config)?;
    let mu0 = cfg.initial_state(&params).map_err(CliError::Config)?;
    let (param, length) = cfg.span(common.param).map_err(CliError::Config)?;
    let sampling = match cfg.sampling(length).map_err(CliError::Config)? {
        Sampling::EveryStep => Sampling::Uniform(100),
        other => other,
    };
    let csv = cfg.csv_path(common.out.as_deref());

    let z0 = to_quasi(&mu0).map_err(|e| CliError::from(&e))?;
    let sys = LinearSystem::new(&z0, params).map_err(|e| CliError::from(&e))?;
    let to_tau = match param {
        Parameter::Tau => 1.0,
        Parameter::S => sys.ell_bar0,
        Parameter::T => return Err(CliError::Unsupported("closed-form sampling is available in s or tau".into())),
    };
    let grid: Vec<f64> = match sampling {
        Sampling::Uniform(n) => (0..=n).map(|i| if i == n { length } else { length * i as f64 / n as f64 }).collect(),
        Sampling::Grid(g) => g,
        Sampling::EveryStep => unreachable!(),
    };

    let mut rows = Vec::with_capacity(grid.len());
    let mut failure = None;
    let mut t = 0.0;
    let mut prev_tau = 0.0;
    let mut prev_state = z0.clone();
    for value in grid {
        let tau = value * to_tau;
        let step = sys.time_of(&prev_state, tau - prev_tau).map_err(|e| match e {
            Error::Escape(at) => Error::Escape(prev_tau + at),
            other => other,
        });
        let step = step.and_then(|dt| {
            let z = sys.state_at(&z0, tau)?;
            let mu = from_quasi(&z)?;
            let h = eval_h(&mu, t + dt, &model, &params)?;
            let row = Row::new(ParamClock { t: t + dt, s: sys.s_of(tau), tau }, mu, h)?;
            Ok((dt, z, row))
        });
        match step {
            Ok((dt, z, row)) => {
                t += dt;
                prev_tau = tau;
                prev_state = z;
                rows.push(row);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    write_csv(csv.as_deref(), &output::render(d, &rows))?;
    let summary = Summary {
        command: "closed-form",
        status: if failure.is_some() { "error" } else { "ok" },
        error: failure.as_ref().map(|e| e.to_string()),
        parameter: param.to_string(),
        rows: rows.len(),
        output: csv.as_ref().map(|p| p.display().to_string()),
        final_state: rows.last().map(Into::into),
        max_drift: output::drift(&rows),
        steps: None,
    };
    report(common, csv.as_deref(), &summary);
    match failure {
        Some(e) => Err(CliError::from(&e)),
        None => Ok(()),
    }
}

pub fn verify(common: &Common, seed: u64, counts: VerifyCounts, dimension: usize) -> Result<(), CliError> {
    if dimension < 3 {
        return Err(CliError::Config(format!("dimension must be at least 3, got {dimension}")));
    }
    let report = run_verification(seed, counts, dimension - 1);
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    match &common.out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| CliError::Config(format!("cannot write output: {e}")))?,
        None if !common.quiet => println!("{text}"),
        None => {}
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Check(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    command: &'static str,
    status: &'static str,
    output: Option<String>,
    rows: &'a [CompareRow],
}

pub fn compare_header(spatial_dim: usize) -> String {
    let mut cols = vec![
        "eccentricity".to_string(),
        "steps".into(),
        "tau_end".into(),
        "t_end".into(),
        "error_regularized".into(),
        "error_direct".into(),
    ];
    cols.extend((1..=spatial_dim).map(|i| format!("truth_x{i}")));
    cols.join(",")
}

pub fn compare(common: &Common) -> Result<(), CliError> {
    let cfg = load(common)?;
    let params = cfg.params().map_err(CliError::Config)?;
    let d = cfg.spatial_dim().map_err(CliError::Config)?;
    if cfg.is_perturbed() {
        return Err(CliError::Unsupported("the comparison needs an unperturbed Kepler or Manev model".into()));
    }
    let sweep = cfg.compare.as_ref().ok_or_else(|| CliError::Config("missing [compare] section".into()))?;
    if sweep.eccentricities.is_empty() || sweep.steps.is_empty() {
        return Err(CliError::Config("[compare] needs at least one eccentricity and one step budget".into()));
    }
    if let Some(e) = sweep.eccentricities.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(CliError::Config(format!("eccentricity must lie in [0, 1), got {e}")));
    }
    if sweep.steps.contains(&0) {
        return Err(CliError::Config("step budgets must be positive".into()));
    }
    let csv = cfg.csv_path(common.out.as_deref());

    let cells: Vec<(f64, usize)> =
        sweep.eccentricities.iter().flat_map(|&e| sweep.steps.iter().map(move |&n| (e, n))).collect();
    let rows: Vec<CompareRow> = cells
        .par_iter()
        .map(|&(e, n)| compare_fixed_step(e, n, d, &params))
        .collect::<projreg::Result<_>>()
        .map_err(|e| CliError::from(&e))?;

    let mut text = compare_header(d);
    text.push('\n');
    for r in &rows {
        let mut vals = vec![r.eccentricity, r.steps as f64, r.tau_end, r.t_end, r.error_regularized, r.error_direct];
        vals.extend(&r.truth);
        let mut line = output::format_line(&vals);
        // step budgets are integers
        let mut parts: Vec<String> = line.split(',').map(String::from).collect();
        parts[1] = r.steps.to_string();
        line = parts.join(",");
        text.push_str(&line);
        text.push('\n');
    }
    write_csv(csv.as_deref(), &text)?;
    if !common.quiet && csv.is_some() {
        let rows_json: Vec<CompareRow> =
            rows.iter().map(|r| CompareRow { error_direct: finite_or_max(r.error_direct), ..r.clone() }).collect();
        print_json(&CompareSummary {
            command: "compare",
            status: "ok",
            output: csv.as_ref().map(|p| p.display().to_string()),
            rows: &rows_json,
        });
    }
    Ok(())
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}
