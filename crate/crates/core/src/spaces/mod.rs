//! Degree-of-freedom layout for the eight discrete fields.
//!
//! Cell fields: velocity `u` (vector `P_k`, every cell), pressure `p`
//! (`P_{k-1}`, every cell), matrix velocity `u^m` and matrix pressure `p^m`
//! (porous cells only). Facet fields: velocity trace and Stokes pressure trace
//! on free-flow facets (interior, boundary and interface), fracture and matrix
//! pressure traces on porous facets (interior, boundary and interface).
//! Optional mean-value multipliers are numbered last.

mod bc;

use std::ops::Range;

use crate::error::{Error, Result};
use crate::fem::{quad_seg, SegBasis, TriBasis};
use crate::mesh::{FacetClass, Mesh, Subdomain};

pub use bc::{
    BoundaryConditionSet, DarcyCondition, FacetSelector, ScalarFn, StokesCondition, VectorFn,
};

/// Polynomial degree and interior penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationParams {
    pub degree: usize,
    pub penalty: f64,
}

impl DiscretizationParams {
    /// Degree `k` with the default penalty `10 k^2`.
    pub fn new(degree: usize) -> Result<Self> {
        Self::with_penalty(degree, 10.0 * (degree * degree) as f64)
    }

    pub fn with_penalty(degree: usize, penalty: f64) -> Result<Self> {
        if !(1..=crate::fem::MAX_DEGREE).contains(&degree) {
            return Err(Error::UnsupportedDegree {
                degree,
                min: 1,
                max: crate::fem::MAX_DEGREE,
            });
        }
        if !(penalty > 0.0) {
            return Err(Error::Config(format!("penalty must be positive, got {penalty}")));
        }
        Ok(DiscretizationParams { degree, penalty })
    }
}

/// The eight discrete fields, in layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Velocity,
    VelocityTrace,
    MatrixVelocity,
    Pressure,
    StokesPressureTrace,
    FracturePressureTrace,
    MatrixPressure,
    MatrixPressureTrace,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::Velocity,
        Field::VelocityTrace,
        Field::MatrixVelocity,
        Field::Pressure,
        Field::StokesPressureTrace,
        Field::FracturePressureTrace,
        Field::MatrixPressure,
        Field::MatrixPressureTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Velocity => "u",
            Field::VelocityTrace => "u_bar",
            Field::MatrixVelocity => "u_m",
            Field::Pressure => "p",
            Field::StokesPressureTrace => "p_bar_s",
            Field::FracturePressureTrace => "p_bar_d",
            Field::MatrixPressure => "p_m",
            Field::MatrixPressureTrace => "p_bar_m",
        }
    }

    fn index(self) -> usize {
        Field::ALL.iter().position(|&f| f == self).unwrap()
    }

    /// Cell-supported fields are eliminated by static condensation.
    pub fn is_cell_field(self) -> bool {
        matches!(
            self,
            Field::Velocity | Field::MatrixVelocity | Field::Pressure | Field::MatrixPressure
        )
    }

    pub fn is_velocity(self) -> bool {
        matches!(self, Field::Velocity | Field::VelocityTrace | Field::MatrixVelocity)
    }
}

const NONE: usize = usize::MAX;

/// Global numbering of all unknowns plus essential-value bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    degree: usize,
    /// dim P_k on a triangle
    vel_dim: usize,
    /// dim P_{k-1} on a triangle
    pres_dim: usize,
    /// dim P_k on a segment
    trace_dim: usize,
    dual_cell: Vec<usize>,
    stokes_facet: Vec<usize>,
    dual_facet: Vec<usize>,
    blocks: [Range<usize>; 8],
    mean_pressure: Option<usize>,
    mean_matrix_pressure: Option<usize>,
    n_dofs: usize,
    free_index: Vec<usize>,
    n_free: usize,
    essential_values: Vec<f64>,
}

impl DofLayout {
    pub fn build(mesh: &Mesh, disc: &DiscretizationParams, bcs: &BoundaryConditionSet) -> Result<Self> {
        let k = disc.degree;
        let vel_dim = (k + 1) * (k + 2) / 2;
        let pres_dim = k * (k + 1) / 2;
        let trace_dim = k + 1;

        let mut dual_cell = vec![NONE; mesh.num_cells()];
        let mut n_dual_cells = 0;
        for (c, cell) in mesh.cells.iter().enumerate() {
            if cell.subdomain == Subdomain::Dual {
                dual_cell[c] = n_dual_cells;
                n_dual_cells += 1;
            }
        }
        let mut stokes_facet = vec![NONE; mesh.facets.len()];
        let mut dual_facet = vec![NONE; mesh.facets.len()];
        let (mut ns, mut nd) = (0, 0);
        for (f, facet) in mesh.facets.iter().enumerate() {
            if facet.class.is_stokes_facet() {
                stokes_facet[f] = ns;
                ns += 1;
            }
            if facet.class.is_dual_facet() {
                dual_facet[f] = nd;
                nd += 1;
            }
        }

        let sizes = [
            mesh.num_cells() * 2 * vel_dim,
            ns * 2 * trace_dim,
            n_dual_cells * 2 * vel_dim,
            mesh.num_cells() * pres_dim,
            ns * trace_dim,
            nd * trace_dim,
            n_dual_cells * pres_dim,
            nd * trace_dim,
        ];
        let mut offset = 0;
        let blocks = sizes.map(|s| {
            let r = offset..offset + s;
            offset += s;
            r
        });
        let mut n_dofs = offset;
        let mean_pressure = bcs.mean_pressure.then(|| {
            n_dofs += 1;
            n_dofs - 1
        });
        let mean_matrix_pressure = (bcs.mean_matrix_pressure && n_dual_cells > 0).then(|| {
            n_dofs += 1;
            n_dofs - 1
        });

        let mut layout = DofLayout {
            degree: k,
            vel_dim,
            pres_dim,
            trace_dim,
            dual_cell,
            stokes_facet,
            dual_facet,
            blocks,
            mean_pressure,
            mean_matrix_pressure,
            n_dofs,
            free_index: Vec::new(),
            n_free: 0,
            essential_values: vec![0.0; n_dofs],
        };
        let essential = layout.resolve_boundary(mesh, bcs)?;
        let mut free_index = vec![NONE; n_dofs];
        let mut n_free = 0;
        for (d, slot) in free_index.iter_mut().enumerate() {
            if !essential[d] {
                *slot = n_free;
                n_free += 1;
            }
        }
        layout.free_index = free_index;
        layout.n_free = n_free;
        Ok(layout)
    }

    /// Marks essential DOFs and stores their values (facet `L^2` projections of
    /// the boundary data).
    fn resolve_boundary(&mut self, mesh: &Mesh, bcs: &BoundaryConditionSet) -> Result<Vec<bool>> {
        let mut essential = vec![false; self.n_dofs];
        let seg = SegBasis::new(self.degree)?;
        let quad = quad_seg(2 * self.degree + 2)?;
        let nt = self.trace_dim;
        let mut chi = Vec::with_capacity(nt);

        for (f, facet) in mesh.facets.iter().enumerate() {
            if !facet.class.is_boundary() {
                continue;
            }
            let [a, b] = mesh.facet_points(f);
            let mid = a.midpoint(b);
            let at = |t: f64| a + (b - a).scale(t);
            match facet.class {
                FacetClass::BoundaryS => {
                    let cond = pick(&bcs.stokes, mid, f, "u_bar")?;
                    match cond {
                        Some(crate::spaces::StokesCondition::TractionFree) => {}
                        Some(crate::spaces::StokesCondition::Velocity(g)) => {
                            let dofs = self.velocity_trace(f).expect("free-flow facet");
                            let mut coef = vec![0.0; 2 * nt];
                            for ([t, _], w) in quad.iter() {
                                seg.eval_into(t, &mut chi);
                                let v = g(at(t));
                                for j in 0..nt {
                                    coef[j] += w * v[0] * chi[j];
                                    coef[nt + j] += w * v[1] * chi[j];
                                }
                            }
                            for (d, c) in dofs.zip(coef) {
                                essential[d] = true;
                                self.essential_values[d] = c;
                            }
                        }
                        None => {
                            for d in self.velocity_trace(f).expect("free-flow facet") {
                                essential[d] = true;
                            }
                        }
                    }
                }
                FacetClass::BoundaryD => {
                    for (rules, field, dofs) in [
                        (&bcs.fracture, "p_bar_d", self.fracture_pressure_trace(f)),
                        (&bcs.matrix, "p_bar_m", self.matrix_pressure_trace(f)),
                    ] {
                        let dofs = dofs.expect("porous facet");
                        if let Some(DarcyCondition::Pressure(g)) = pick(rules, mid, f, field)? {
                            let mut coef = vec![0.0; nt];
                            for ([t, _], w) in quad.iter() {
                                seg.eval_into(t, &mut chi);
                                let v = g(at(t));
                                for j in 0..nt {
                                    coef[j] += w * v * chi[j];
                                }
                            }
                            for (d, c) in dofs.zip(coef) {
                                essential[d] = true;
                                self.essential_values[d] = c;
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        Ok(essential)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of scalar `P_k` functions per cell (per velocity component).
    pub fn velocity_dim(&self) -> usize {
        self.vel_dim
    }

    pub fn pressure_dim(&self) -> usize {
        self.pres_dim
    }

    pub fn trace_dim(&self) -> usize {
        self.trace_dim
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn block(&self, field: Field) -> Range<usize> {
        self.blocks[field.index()].clone()
    }

    pub fn mean_pressure_dof(&self) -> Option<usize> {
        self.mean_pressure
    }

    pub fn mean_matrix_pressure_dof(&self) -> Option<usize> {
        self.mean_matrix_pressure
    }

    pub fn constraint_dofs(&self) -> impl Iterator<Item = usize> {
        self.mean_pressure.into_iter().chain(self.mean_matrix_pressure)
    }

    /// Free-system index of a DOF, `None` when essential.
    pub fn free_index(&self, dof: usize) -> Option<usize> {
        let i = self.free_index[dof];
        (i != NONE).then_some(i)
    }

    pub fn is_essential(&self, dof: usize) -> bool {
        self.free_index[dof] == NONE
    }

    pub fn essential_value(&self, dof: usize) -> f64 {
        self.essential_values[dof]
    }

    pub fn essential_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs).filter(|&d| self.free_index[d] == NONE)
    }

    pub fn velocity(&self, cell: usize) -> Range<usize> {
        let n = 2 * self.vel_dim;
        let o = self.blocks[0].start + cell * n;
        o..o + n
    }

    pub fn pressure(&self, cell: usize) -> Range<usize> {
        let o = self.blocks[3].start + cell * self.pres_dim;
        o..o + self.pres_dim
    }

    pub fn matrix_velocity(&self, cell: usize) -> Option<Range<usize>> {
        let d = self.dual_cell[cell];
        (d != NONE).then(|| {
            let n = 2 * self.vel_dim;
            let o = self.blocks[2].start + d * n;
            o..o + n
        })
    }

    pub fn matrix_pressure(&self, cell: usize) -> Option<Range<usize>> {
        let d = self.dual_cell[cell];
        (d != NONE).then(|| {
            let o = self.blocks[6].start + d * self.pres_dim;
            o..o + self.pres_dim
        })
    }

    pub fn velocity_trace(&self, facet: usize) -> Option<Range<usize>> {
        let s = self.stokes_facet[facet];
        (s != NONE).then(|| {
            let n = 2 * self.trace_dim;
            let o = self.blocks[1].start + s * n;
            o..o + n
        })
    }

    pub fn stokes_pressure_trace(&self, facet: usize) -> Option<Range<usize>> {
        let s = self.stokes_facet[facet];
        (s != NONE).then(|| {
            let o = self.blocks[4].start + s * self.trace_dim;
            o..o + self.trace_dim
        })
    }

    pub fn fracture_pressure_trace(&self, facet: usize) -> Option<Range<usize>> {
        let d = self.dual_facet[facet];
        (d != NONE).then(|| {
            let o = self.blocks[5].start + d * self.trace_dim;
            o..o + self.trace_dim
        })
    }

    pub fn matrix_pressure_trace(&self, facet: usize) -> Option<Range<usize>> {
        let d = self.dual_facet[facet];
        (d != NONE).then(|| {
            let o = self.blocks[7].start + d * self.trace_dim;
            o..o + self.trace_dim
        })
    }
}

fn pick<'a, T>(
    rules: &'a [(FacetSelector, T)],
    midpoint: crate::mesh::Point,
    facet: usize,
    field: &'static str,
) -> Result<Option<&'a T>> {
    let mut hit = None;
    for (selector, cond) in rules {
        if selector.matches(midpoint) {
            if hit.is_some() {
                return Err(Error::ConflictingBoundaryConditions { facet, field });
            }
            hit = Some(cond);
        }
    }
    Ok(hit)
}

/// Sparse row `(dof, weight)` with `row . coefficients = integral of the field`.
pub fn mean_constraint_row(mesh: &Mesh, layout: &DofLayout, field: Field) -> Vec<(usize, f64)> {
    let basis = TriBasis::new(layout.degree - 1).expect("pressure degree is supported");
    let ref_ints = basis.reference_integrals();
    let mut row = Vec::new();
    for c in 0..mesh.num_cells() {
        let dofs = match field {
            Field::Pressure => Some(layout.pressure(c)),
            Field::MatrixPressure => layout.matrix_pressure(c),
            _ => panic!("mean constraints apply to cell pressures only"),
        };
        if let Some(dofs) = dofs {
            let det = 2.0 * mesh.cell_area(c);
            row.extend(dofs.zip(&ref_ints).map(|(d, &w)| (d, det * w)));
        }
    }
    row
}

/// Coefficients of every field, in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub values: Vec<f64>,
}

impl FieldSolution {
    pub fn zeros(layout: &DofLayout) -> Self {
        FieldSolution {
            values: vec![0.0; layout.n_dofs()],
        }
    }

    /// Expands a free-DOF vector, inserting essential values.
    pub fn from_free(layout: &DofLayout, free: &[f64]) -> Result<Self> {
        if free.len() != layout.n_free() {
            return Err(Error::DimensionMismatch(format!(
                "free vector has length {}, layout expects {}",
                free.len(),
                layout.n_free()
            )));
        }
        let values = (0..layout.n_dofs())
            .map(|d| match layout.free_index(d) {
                Some(i) => free[i],
                None => layout.essential_value(d),
            })
            .collect();
        Ok(FieldSolution { values })
    }

    pub fn field<'a>(&'a self, layout: &DofLayout, field: Field) -> &'a [f64] {
        &self.values[layout.block(field)]
    }

    pub fn dofs(&self, range: Range<usize>) -> &[f64] {
        &self.values[range]
    }

    /// Scalar cell field at a point, given the basis values there.
    pub fn scalar_at(&self, dofs: Range<usize>, phi: &[f64]) -> f64 {
        self.values[dofs].iter().zip(phi).map(|(c, v)| c * v).sum()
    }

    /// Vector cell field (component-major coefficients) at a point.
    pub fn vector_at(&self, dofs: Range<usize>, phi: &[f64]) -> [f64; 2] {
        let c = &self.values[dofs];
        let n = phi.len();
        [
            c[..n].iter().zip(phi).map(|(a, v)| a * v).sum(),
            c[n..].iter().zip(phi).map(|(a, v)| a * v).sum(),
        ]
    }

    /// Gradient `g[c][d] = d u_c / d x_d` of a vector cell field, given
    /// physical basis gradients.
    pub fn vector_gradient_at(&self, dofs: Range<usize>, grads: &[[f64; 2]]) -> [[f64; 2]; 2] {
        let c = &self.values[dofs];
        let n = grads.len();
        let mut g = [[0.0; 2]; 2];
        for (a, gr) in grads.iter().enumerate() {
            for d in 0..2 {
                g[0][d] += c[a] * gr[d];
                g[1][d] += c[n + a] * gr[d];
            }
        }
        g
    }

    /// Free-DOF part, in free numbering.
    pub fn to_free(&self, layout: &DofLayout) -> Vec<f64> {
        let mut out = vec![0.0; layout.n_free()];
        for (d, &v) in self.values.iter().enumerate() {
            if let Some(i) = layout.free_index(d) {
                out[i] = v;
            }
        }
        out
    }
}
