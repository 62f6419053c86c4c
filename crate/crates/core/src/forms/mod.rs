//! Bilinear forms of the coupled scheme: element kernels, global assembly and
//! static condensation.
//!
//! The discrete system has the symmetric saddle-point structure
//! `[[A, B^T], [B, -C]]` with velocities `(u, u_bar, u^m)` first and pressures
//! `(p, p_bar^s, p_bar^d, p^m, p_bar^m)` second.

mod assembly;
mod condense;
mod kernels;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::spaces::{DiscretizationParams, DofLayout, ScalarFn, VectorFn};

pub use assembly::{assemble, check_well_posed, SaddleSystem};
pub use condense::{condense, CondensedSystem};
pub use kernels::{element_system, facet_system, ElementSystem};

/// A positive coefficient, constant or piecewise constant on cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    PerCell(Vec<f64>),
}

impl Coefficient {
    pub fn at(&self, cell: usize) -> f64 {
        match self {
            Coefficient::Constant(v) => *v,
            Coefficient::PerCell(v) => v[cell],
        }
    }

    fn validate(&self, name: &str, n_cells: usize) -> Result<()> {
        let values: &[f64] = match self {
            Coefficient::Constant(v) => std::slice::from_ref(v),
            Coefficient::PerCell(v) => {
                if v.len() != n_cells {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} has {} values for {n_cells} cells",
                        v.len()
                    )));
                }
                v
            }
        };
        match values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            Some(v) => Err(Error::Config(format!("{name} must be positive and finite, got {v}"))),
            None => Ok(()),
        }
    }
}

/// Material parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Dynamic viscosity.
    pub mu: f64,
    /// Fracture permeability.
    pub kappa_f: Coefficient,
    /// Matrix permeability.
    pub kappa_m: Coefficient,
    /// Shape factor of the fracture-matrix exchange.
    pub sigma: f64,
    /// Slip coefficient on the interface.
    pub alpha: f64,
}

impl PhysicalParams {
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("sigma", self.sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        self.kappa_f.validate("kappa_f", mesh.num_cells())?;
        self.kappa_m.validate("kappa_m", mesh.num_cells())
    }
}

/// Volume sources. `None` means zero.
#[derive(Clone, Default)]
pub struct SourceSet {
    /// Momentum source in the free-flow region.
    pub f: Option<VectorFn>,
    /// Mass source of the fracture system.
    pub g: Option<ScalarFn>,
    /// Momentum source of the fracture Darcy law.
    pub f_d: Option<VectorFn>,
    /// Momentum source of the matrix Darcy law.
    pub f_m: Option<VectorFn>,
    /// Mass source of the matrix system.
    pub g_m: Option<ScalarFn>,
}

impl std::fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceSet")
            .field("f", &self.f.is_some())
            .field("g", &self.g.is_some())
            .field("f_d", &self.f_d.is_some())
            .field("f_m", &self.f_m.is_some())
            .field("g_m", &self.g_m.is_some())
            .finish()
    }
}

/// Everything needed to assemble one discrete problem.
#[derive(Clone, Copy, Debug)]
pub struct Problem<'a> {
    pub mesh: &'a Mesh,
    pub layout: &'a DofLayout,
    pub disc: &'a DiscretizationParams,
    pub params: &'a PhysicalParams,
    pub sources: &'a SourceSet,
}
