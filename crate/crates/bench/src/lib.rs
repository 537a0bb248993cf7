//! Shared fixtures for the benchmarks.

use projreg::{lift_initial_conditions, periapsis_state, to_quasi, ManevParams, PhasePoint, QuasiState};

/// A bound Kepler orbit with unit semi-major axis, lifted to the transformed chart at periapsis.
pub fn orbit(eccentricity: f64, spatial_dim: usize) -> (PhasePoint, QuasiState, ManevParams) {
    let params = ManevParams::kepler(1.0, 1.0).expect("valid parameters");
    let (x0, v0) = periapsis_state(eccentricity, 1.0, spatial_dim, &params).expect("bound orbit");
    let mu = lift_initial_conditions(&x0, &v0, &params).expect("liftable");
    let z = to_quasi(&mu).expect("off the axis");
    (mu, z, params)
}
