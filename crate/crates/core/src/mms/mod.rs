//! Manufactured solution on the split unit square, error norms and observed
//! convergence rates.

mod errors;
mod exact;
mod rates;

use std::sync::Arc;

use crate::forms::{Coefficient, PhysicalParams};
use crate::spaces::BoundaryConditionSet;

pub use errors::{compute_errors, interpolate, ErrorReport, Norm};
pub use exact::{derivative_mismatch, example1, ExactSolution, Gradient, Hessian, MmsParams};
pub use rates::{observed_rate, rates, RateTable, TABLE_LAYOUTS};

/// Exact velocity trace on the free-flow boundary and exact trace pressures on
/// the porous boundary. No mean constraints: the pressure data fixes the level.
pub fn boundary_conditions(exact: &ExactSolution) -> BoundaryConditionSet {
    let (a, b, c) = (*exact, *exact, *exact);
    BoundaryConditionSet::dirichlet(
        Arc::new(move |p| a.stokes_velocity(p)),
        Arc::new(move |p| b.fracture_pressure(p)),
        Arc::new(move |p| c.matrix_pressure(p)),
    )
}

pub fn physical_params(exact: &ExactSolution) -> PhysicalParams {
    let p = exact.params;
    PhysicalParams {
        mu: p.mu,
        kappa_f: Coefficient::Constant(p.kappa_f),
        kappa_m: Coefficient::Constant(p.kappa_m),
        sigma: p.sigma,
        alpha: exact.alpha(),
    }
}
