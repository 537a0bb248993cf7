//! Run configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DVector;
use serde::Deserialize;

use projreg::{
    from_quasi, lift_initial_conditions, ConstantAcceleration, ForceModel, IntegratorConfig, LinearDrag, ManevParams,
    Method, Parameter, PhasePoint, QuasiState, Sampling,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Augmented dimension `n̄`; inferred from the initial condition when absent.
    pub dimension: Option<usize>,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub model: ModelSection,
    pub ic: Option<IcSection>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub span: Option<SpanSection>,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub m: f64,
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self { m: 1.0, k1: 1.0, k2: 0.0 }
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Kepler,
    Manev,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub kind: ModelKind,
    /// Linear drag coefficient `c` in `f = −c κ⃗`.
    pub drag: Option<f64>,
    /// Uniform external acceleration.
    pub acceleration: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    pub cartesian: Option<CartesianIc>,
    pub transformed: Option<TransformedIc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartesianIc {
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformedIc {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub rn: f64,
    pub pn_tilde: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub step: Option<f64>,
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self { method: d.method, rtol: d.rtol, atol: d.atol, step: d.step, h0: d.h0, max_steps: d.max_steps }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanSection {
    #[serde(default = "default_parameter")]
    pub parameter: Parameter,
    pub length: f64,
}

fn default_parameter() -> Parameter {
    Parameter::Tau
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    /// Number of intervals between evenly spaced samples.
    pub count: Option<usize>,
    /// Spacing between samples.
    pub step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub eccentricities: Vec<f64>,
    pub steps: Vec<usize>,
}

pub fn load(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<ManevParams, String> {
        let p = &self.params;
        let params = ManevParams::new(p.m, p.k1, p.k2).map_err(|e| e.to_string())?;
        if self.model.kind == ModelKind::Kepler && p.k2 != 0.0 {
            return Err("model kind 'kepler' requires k2 = 0".into());
        }
        Ok(params)
    }

    pub fn is_perturbed(&self) -> bool {
        self.model.drag.is_some() || self.model.acceleration.is_some()
    }

    pub fn model(&self, params: &ManevParams, spatial_dim: usize) -> Result<ForceModel, String> {
        let mut model = ForceModel::new(params.central());
        if let Some(c) = self.model.drag {
            if !c.is_finite() {
                return Err("drag coefficient must be finite".into());
            }
            model = model.with_force(Arc::new(LinearDrag { coefficient: c }));
        }
        if let Some(a) = &self.model.acceleration {
            if a.len() != spatial_dim {
                return Err(format!("acceleration has {} components, expected {spatial_dim}", a.len()));
            }
            model = model.with_potential(Arc::new(ConstantAcceleration {
                acceleration: DVector::from_column_slice(a),
                mass: params.m,
            }));
        }
        Ok(model)
    }

    /// Spatial dimension `n̄ − 1`, from the config or the initial condition.
    pub fn spatial_dim(&self) -> Result<usize, String> {
        let from_ic = self.ic.as_ref().and_then(|ic| {
            ic.cartesian.as_ref().map(|c| c.x0.len()).or_else(|| ic.transformed.as_ref().map(|t| t.r.len()))
        });
        let d = match (self.dimension, from_ic) {
            (Some(n), Some(d)) if n != d + 1 => {
                return Err(format!("dimension {n} does not match the initial condition ({} components)", d));
            }
            (Some(n), _) => n.checked_sub(1).ok_or("dimension must be at least 3")?,
            (None, Some(d)) => d,
            (None, None) => 3,
        };
        if d < 2 {
            return Err(format!("dimension must be at least 3, got {}", d + 1));
        }
        Ok(d)
    }

    /// The initial condition in the transformed chart.
    pub fn initial_state(&self, params: &ManevParams) -> Result<PhasePoint, String> {
        let ic = self.ic.as_ref().ok_or("missing [ic] section")?;
        match (&ic.cartesian, &ic.transformed) {
            (Some(c), None) => {
                if c.x0.len() != c.v0.len() {
                    return Err("x0 and v0 lengths differ".into());
                }
                let x0 = DVector::from_column_slice(&c.x0);
                let v0 = DVector::from_column_slice(&c.v0);
                lift_initial_conditions(&x0, &v0, params).map_err(|e| e.to_string())
            }
            (None, Some(t)) => {
                let z = QuasiState::from_slices(&t.r, &t.p, t.rn, t.pn_tilde).map_err(|e| e.to_string())?;
                from_quasi(&z).map_err(|e| e.to_string())
            }
            _ => Err("[ic] needs exactly one of 'cartesian' or 'transformed'".into()),
        }
    }

    pub fn span(&self, param_override: Option<Parameter>) -> Result<(Parameter, f64), String> {
        let span = self.span.as_ref().ok_or("missing [span] section")?;
        if !(span.length > 0.0) || !span.length.is_finite() {
            return Err(format!("span length must be positive, got {}", span.length));
        }
        Ok((param_override.unwrap_or(span.parameter), span.length))
    }

    pub fn integrator(&self, param: Parameter, length: f64) -> Result<IntegratorConfig, String> {
        let s = &self.integrator;
        let cfg = IntegratorConfig {
            method: s.method,
            rtol: s.rtol,
            atol: s.atol,
            step: s.step,
            h0: s.h0,
            max_steps: s.max_steps,
            param,
        };
        cfg.settings(length).map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn sampling(&self, length: f64) -> Result<Sampling, String> {
        match (self.sampling.count, self.sampling.step) {
            (Some(_), Some(_)) => Err("[sampling] takes either 'count' or 'step', not both".into()),
            (Some(0), None) => Err("sampling count must be positive".into()),
            (Some(n), None) => Ok(Sampling::Uniform(n)),
            (None, Some(h)) => {
                if !(h > 0.0) {
                    return Err(format!("sampling step must be positive, got {h}"));
                }
                let n = (length / h * (1.0 + 1e-12)).floor() as usize;
                Ok(Sampling::Grid((0..=n).map(|i| (h * i as f64).min(length)).collect()))
            }
            (None, None) => Ok(Sampling::EveryStep),
        }
    }

    pub fn csv_path(&self, out: Option<&Path>) -> Option<PathBuf> {
        out.map(Path::to_path_buf).or_else(|| self.outputs.csv.clone())
    }
}
