//! Parameterizations: construction from PDE solutions and from the
//! order-(1,2) normal form, symbolic and numeric verification, flat
//! outputs and the Jacobian probe.

mod flat;
mod order12;
mod parameterization;
mod probe;
mod report;
mod verify;

pub use crate::pde::NormalFormST0;
pub use flat::{endogenous_candidate, verify_flat_output, FlatConfig, FlatOutput};
pub use order12::{construct_order12, NormalForm12, Order12Report};
pub use parameterization::{build_from_solution, Evaluator, ParamKind, Parameterization, POINT_TOL};
pub use probe::{jacobian_probe, pi_components, DetSample, JacobianProbeReport, PairSamples, DET_TOL};
pub use report::{Check, VerificationReport};
pub use verify::{
    germ_point, image_at, sample_germs, substitute_solution, symbolic_residual, time_grid, verify_numeric,
    verify_symbolic, verify_symbolic_against, GermConfig, GermPair, ResidualProbe,
};
