use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Picks boundary facets by their midpoint.
#[derive(Clone)]
pub enum FacetSelector {
    All,
    Where(Arc<dyn Fn(Point) -> bool + Send + Sync>),
}

impl FacetSelector {
    pub fn matches(&self, midpoint: Point) -> bool {
        match self {
            FacetSelector::All => true,
            FacetSelector::Where(pred) => pred(midpoint),
        }
    }

    pub fn predicate(f: impl Fn(Point) -> bool + Send + Sync + 'static) -> Self {
        FacetSelector::Where(Arc::new(f))
    }
}

impl fmt::Debug for FacetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FacetSelector::All => f.write_str("All"),
            FacetSelector::Where(_) => f.write_str("Where(..)"),
        }
    }
}

/// Condition on a free-flow boundary facet.
#[derive(Clone)]
pub enum StokesCondition {
    /// Essential velocity trace.
    Velocity(VectorFn),
    /// Zero traction outflow; trace unknowns stay free and no boundary term is
    /// added.
    TractionFree,
}

impl fmt::Debug for StokesCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StokesCondition::Velocity(_) => f.write_str("Velocity(..)"),
            StokesCondition::TractionFree => f.write_str("TractionFree"),
        }
    }
}

/// Condition on a porous boundary facet for one of the two Darcy systems.
#[derive(Clone)]
pub enum DarcyCondition {
    /// Zero normal flux, enforced weakly by the pressure trace equation.
    NoFlux,
    /// Essential pressure trace.
    Pressure(ScalarFn),
}

impl fmt::Debug for DarcyCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DarcyCondition::NoFlux => f.write_str("NoFlux"),
            DarcyCondition::Pressure(_) => f.write_str("Pressure(..)"),
        }
    }
}

/// Boundary rules per field plus the two mean-value constraints.
///
/// Facets not matched by any rule get the homogeneous defaults: zero velocity
/// trace on free-flow boundary facets and zero normal flux on porous boundary
/// facets. A facet matched by more than one rule of the same field is
/// rejected when the layout is built.
#[derive(Clone, Debug)]
pub struct BoundaryConditionSet {
    pub stokes: Vec<(FacetSelector, StokesCondition)>,
    pub fracture: Vec<(FacetSelector, DarcyCondition)>,
    pub matrix: Vec<(FacetSelector, DarcyCondition)>,
    /// Append a Lagrange multiplier enforcing zero mean of `p` over the domain.
    pub mean_pressure: bool,
    /// Append a Lagrange multiplier enforcing zero mean of `p^m` over the porous region.
    pub mean_matrix_pressure: bool,
}

impl Default for BoundaryConditionSet {
    fn default() -> Self {
        BoundaryConditionSet {
            stokes: Vec::new(),
            fracture: Vec::new(),
            matrix: Vec::new(),
            mean_pressure: true,
            mean_matrix_pressure: true,
        }
    }
}

impl BoundaryConditionSet {
    /// Homogeneous conditions: no-slip on free-flow boundaries, no flux on
    /// porous boundaries, pressure levels fixed by mean constraints.
    pub fn homogeneous() -> Self {
        Self::default()
    }

    /// Traction-free outlet and constant trace pressures on the porous
    /// boundary; no mean constraints.
    pub fn wellbore(fracture_pressure: f64, matrix_pressure: f64) -> Self {
        BoundaryConditionSet {
            stokes: vec![(FacetSelector::All, StokesCondition::TractionFree)],
            fracture: vec![(
                FacetSelector::All,
                DarcyCondition::Pressure(Arc::new(move |_| fracture_pressure)),
            )],
            matrix: vec![(
                FacetSelector::All,
                DarcyCondition::Pressure(Arc::new(move |_| matrix_pressure)),
            )],
            mean_pressure: false,
            mean_matrix_pressure: false,
        }
    }

    /// Essential data everywhere: velocity trace on free-flow boundaries,
    /// both pressure traces on porous boundaries.
    pub fn dirichlet(velocity: VectorFn, fracture_pressure: ScalarFn, matrix_pressure: ScalarFn) -> Self {
        BoundaryConditionSet {
            stokes: vec![(FacetSelector::All, StokesCondition::Velocity(velocity))],
            fracture: vec![(FacetSelector::All, DarcyCondition::Pressure(fracture_pressure))],
            matrix: vec![(FacetSelector::All, DarcyCondition::Pressure(matrix_pressure))],
            mean_pressure: false,
            mean_matrix_pressure: false,
        }
    }

    pub fn with_mean_constraints(mut self, pressure: bool, matrix_pressure: bool) -> Self {
        self.mean_pressure = pressure;
        self.mean_matrix_pressure = matrix_pressure;
        self
    }
}
