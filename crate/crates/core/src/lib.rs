//! Projective regularization of central-force dynamics.
//!
//! Positions `x̄ = x⃗ + xⁿêₙ` in an augmented Euclidean space are mapped by
//! `ψ(q̄) = q̂/qⁿ + ‖q⃗‖êₙ`, which turns the radius into the inverse of a coordinate.
//! Its cotangent lift carries Kepler and Manev dynamics to a system that is linear
//! after a conformal change of evolution parameter. The crate provides the map and
//! its lift, both Hamiltonians, the regularized vector fields, closed-form
//! solutions, and numerical propagation with diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod euclidean;
pub mod hamiltonian;
pub mod integrator;
pub mod projective;
pub mod propagator;
pub mod quadrature;
pub mod regularized;
pub mod verify;

pub use closed_form::{cartesian_kepler_state, LinearSystem};
pub use error::{Error, Result};
pub use euclidean::{
    angular_momentum, angular_momentum_sq, on_q, on_sigma, q_residual, sigma_residual, AngularMomentum, ConfigPoint,
    Dim, PhasePoint,
};
pub use hamiltonian::{
    bracket_diagnostics, eval_h, eval_k, rhs_t, transform_force, transform_potential, BracketRates, CentralPotential,
    ConstantAcceleration, ForceModel, LinearDrag, ManevParams, NonconservativeForce, PerturbingPotential,
    TransformedForce,
};
pub use projective::{
    cotangent_lift, cotangent_unlift, induced_metric, jacobians, passive_coords, project_point, unproject_point,
    InducedMetric, JacobianPair,
};
pub use propagator::{
    compare_fixed_step, direct_cartesian_rhs, integrate, lift_initial_conditions, periapsis_state, project_trajectory,
    CompareRow, Diagnostics, IntegratorConfig, Method, PhysicalSample, PropagationFailure, Rhs, Sample, Sampling,
    Trajectory,
};
pub use regularized::{
    conformal_factor, from_quasi, rhs_s, rhs_tau, second_order_forcing, second_order_residual, to_quasi, ParamClock,
    Parameter, QuasiState,
};
pub use verify::{run_verification, CheckResult, VerifyCounts, VerifyReport};
