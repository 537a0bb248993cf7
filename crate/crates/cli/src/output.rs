//! CSV rows and the JSON run summary.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use projreg::{angular_momentum_sq, cotangent_lift, q_residual, ParamClock, PhasePoint};

pub fn header(spatial_dim: usize) -> String {
    let mut cols: Vec<String> = vec!["tau".into(), "s".into(), "t".into()];
    cols.extend((1..=spatial_dim).map(|i| format!("q{i}")));
    cols.push("qn".into());
    cols.extend((1..=spatial_dim).map(|i| format!("mu{i}")));
    cols.push("pn_tilde".into());
    cols.extend((1..=spatial_dim).map(|i| format!("x{i}")));
    cols.extend((1..=spatial_dim).map(|i| format!("kappa{i}")));
    cols.extend(["H", "ellsq", "res_q_norm", "res_q_ortho"].map(String::from));
    cols.join(",")
}

/// One CSV row for a transformed state `μ̄` with its `𝓗` value.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub clock: ParamClock,
    pub mu: PhasePoint,
    pub kappa: PhasePoint,
    pub hamiltonian: f64,
    pub ell_sq: f64,
    pub res_q: (f64, f64),
}

impl Row {
    pub fn new(clock: ParamClock, mu: PhasePoint, hamiltonian: f64) -> projreg::Result<Self> {
        let kappa = cotangent_lift(&mu)?;
        let ell_sq = angular_momentum_sq(mu.r(), mu.p());
        let res_q = q_residual(&mu, 1.0)?;
        Ok(Self { clock, mu, kappa, hamiltonian, ell_sq, res_q })
    }

    pub fn pn_tilde(&self) -> f64 {
        self.mu.rn() * self.mu.rn() * self.mu.pn()
    }

    fn values(&self) -> Vec<f64> {
        let mut v = vec![self.clock.tau, self.clock.s, self.clock.t];
        v.extend(self.mu.r().iter());
        v.push(self.mu.rn());
        v.extend(self.mu.p().iter());
        v.push(self.pn_tilde());
        v.extend(self.kappa.r().iter());
        v.extend(self.kappa.p().iter());
        v.extend([self.hamiltonian, self.ell_sq, self.res_q.0, self.res_q.1]);
        v
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_line(values: &[f64]) -> String {
    values.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(",")
}

pub fn render(spatial_dim: usize, rows: &[Row]) -> String {
    let mut out = header(spatial_dim);
    out.push('\n');
    for row in rows {
        out.push_str(&format_line(&row.values()));
        out.push('\n');
    }
    out
}

/// Write `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FinalState {
    pub tau: f64,
    pub s: f64,
    pub t: f64,
    pub q: Vec<f64>,
    pub qn: f64,
    pub mu: Vec<f64>,
    pub pn_tilde: f64,
    pub x: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl From<&Row> for FinalState {
    fn from(row: &Row) -> Self {
        Self {
            tau: row.clock.tau,
            s: row.clock.s,
            t: row.clock.t,
            q: row.mu.r().iter().copied().collect(),
            qn: row.mu.rn(),
            mu: row.mu.p().iter().copied().collect(),
            pn_tilde: row.pn_tilde(),
            x: row.kappa.r().iter().copied().collect(),
            kappa: row.kappa.p().iter().copied().collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Drift {
    pub hamiltonian: f64,
    pub ell_sq: f64,
    pub res_q_norm: f64,
    pub res_q_ortho: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub parameter: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(rename = "final", skip_serializing_if = "Option::is_none")]
    pub final_state: Option<FinalState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_drift: Option<Drift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Steps>,
}

#[derive(Debug, Serialize)]
pub struct Steps {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Largest deviation of `𝓗` and `ℓ²` from the first row and largest constraint residuals.
pub fn drift(rows: &[Row]) -> Option<Drift> {
    let first = rows.first()?;
    let mut d = Drift { hamiltonian: 0.0, ell_sq: 0.0, res_q_norm: 0.0, res_q_ortho: 0.0 };
    for r in rows {
        d.hamiltonian = d.hamiltonian.max((r.hamiltonian - first.hamiltonian).abs());
        d.ell_sq = d.ell_sq.max((r.ell_sq - first.ell_sq).abs());
        d.res_q_norm = d.res_q_norm.max(r.res_q.0.abs());
        d.res_q_ortho = d.res_q_ortho.max(r.res_q.1.abs());
    }
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(header(2), "tau,s,t,q1,q2,qn,mu1,mu2,pn_tilde,x1,x2,kappa1,kappa2,H,ellsq,res_q_norm,res_q_ortho");
        assert_eq!(header(3).split(',').count(), 3 + 4 + 4 + 3 + 3 + 4);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn row_values_follow_header() {
        let mu = PhasePoint::from_slices(&[1.0, 0.0], 2.0, &[0.0, 3.0], 0.5).unwrap();
        let row = Row::new(ParamClock { t: 0.3, s: 0.2, tau: 0.1 }, mu, -1.0).unwrap();
        let v = row.values();
        assert_eq!(v.len(), header(2).split(',').count());
        assert_eq!(&v[..3], &[0.1, 0.2, 0.3]);
        assert_eq!(v[8], 2.0);
        assert_eq!(v[9], 0.5);
        assert_eq!(v[13], -1.0);
    }
}
