use nalgebra::{DMatrix, DVector};

use super::assembly::check_well_posed;
use super::kernels::{element_system_with, facet_system_with, ElementSystem, Reference};
use super::Problem;
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::spaces::{DofLayout, FieldSolution};

const NONE: usize = usize::MAX;

/// Relative pivot size below which a local block counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-13;

/// Back-substitution data of one cell: `x_i = y - X x_e`.
#[derive(Debug, Clone)]
struct CellRecovery {
    interior: Vec<usize>,
    /// global DOFs of the free exterior unknowns, columns of `x`
    exterior: Vec<usize>,
    x: DMatrix<f64>,
    y: DVector<f64>,
}

/// Schur complement on the facet unknowns (and mean-value multipliers) after
/// eliminating every cell unknown.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// global DOF of each condensed unknown
    pub exterior_dofs: Vec<usize>,
    exterior_index: Vec<usize>,
    baseline: Vec<f64>,
    cells: Vec<CellRecovery>,
}

impl CondensedSystem {
    pub fn n_exterior(&self) -> usize {
        self.exterior_dofs.len()
    }

    /// Reconstructs every field from the solved exterior unknowns.
    pub fn recover(&self, exterior: &[f64]) -> Result<FieldSolution> {
        if exterior.len() != self.n_exterior() {
            return Err(Error::DimensionMismatch(format!(
                "exterior vector has length {}, system has {}",
                exterior.len(),
                self.n_exterior()
            )));
        }
        let mut values = self.baseline.clone();
        for (&d, &v) in self.exterior_dofs.iter().zip(exterior) {
            values[d] = v;
        }
        for cell in &self.cells {
            let xe = DVector::from_iterator(
                cell.exterior.len(),
                cell.exterior.iter().map(|&d| exterior[self.exterior_index[d]]),
            );
            let xi = &cell.y - &cell.x * xe;
            for (&d, v) in cell.interior.iter().zip(xi.iter()) {
                values[d] = *v;
            }
        }
        Ok(FieldSolution { values })
    }
}

/// Statically condenses the system cell by cell. Fails with
/// [`Error::SingularCellBlock`] if a local interior block cannot be inverted.
pub fn condense(problem: &Problem) -> Result<CondensedSystem> {
    let Problem {
        mesh, layout, params, ..
    } = *problem;
    params.validate(mesh)?;
    check_well_posed(mesh, layout)?;
    let reference = Reference::new(layout.degree())?;

    let mut interior = vec![false; layout.n_dofs()];
    for c in 0..mesh.num_cells() {
        for r in [Some(layout.velocity(c)), Some(layout.pressure(c)), layout.matrix_velocity(c), layout.matrix_pressure(c)]
            .into_iter()
            .flatten()
        {
            for d in r {
                interior[d] = true;
            }
        }
    }
    let mut exterior_index = vec![NONE; layout.n_dofs()];
    let mut exterior_dofs = Vec::new();
    for d in 0..layout.n_dofs() {
        if !interior[d] && !layout.is_essential(d) {
            exterior_index[d] = exterior_dofs.len();
            exterior_dofs.push(d);
        }
    }
    let n = exterior_dofs.len();
    let mut triplets = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    let mut cells = Vec::with_capacity(mesh.num_cells());

    for c in 0..mesh.num_cells() {
        let sys = element_system_with(problem, &reference, c)?;
        let rec = eliminate(layout, &exterior_index, &sys, &mut triplets, &mut rhs)
            .ok_or(Error::SingularCellBlock { cell: c })?;
        cells.push(rec);
    }
    for f in 0..mesh.facets.len() {
        if let Some(sys) = facet_system_with(problem, &reference, f) {
            eliminate(layout, &exterior_index, &sys, &mut triplets, &mut rhs)
                .expect("facet systems have no interior block");
        }
    }

    let mut baseline = vec![0.0; layout.n_dofs()];
    for d in layout.essential_dofs() {
        baseline[d] = layout.essential_value(d);
    }
    Ok(CondensedSystem {
        matrix: SparseMatrix::finalize(triplets)?,
        rhs,
        exterior_dofs,
        exterior_index,
        baseline,
        cells,
    })
}

fn eliminate(
    layout: &DofLayout,
    exterior_index: &[usize],
    sys: &ElementSystem,
    triplets: &mut TripletBuilder,
    rhs: &mut [f64],
) -> Option<CellRecovery> {
    let ni = sys.n_interior;
    let free: Vec<usize> = (ni..sys.dofs.len()).filter(|&j| !layout.is_essential(sys.dofs[j])).collect();
    let fixed: Vec<usize> = (ni..sys.dofs.len()).filter(|&j| layout.is_essential(sys.dofs[j])).collect();
    let g = DVector::from_iterator(fixed.len(), fixed.iter().map(|&j| layout.essential_value(sys.dofs[j])));

    let a = &sys.matrix;
    let sub = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    let int: Vec<usize> = (0..ni).collect();
    let lift = |rows: &[usize]| {
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|&i| sys.rhs[i]));
        b - sub(rows, &fixed) * &g
    };

    let mut s = sub(&free, &free);
    let mut r = lift(&free);
    let mut recovery = None;
    if ni > 0 {
        let lu = sub(&int, &int).full_piv_lu();
        let diag = lu.u().diagonal().abs();
        let (max, min) = (diag.max(), diag.min());
        if !(max > 0.0) || !(min > PIVOT_TOLERANCE * max) {
            return None;
        }
        let a_ie = sub(&int, &free);
        let x = lu.solve(&a_ie)?;
        let y = lu.solve(&lift(&int))?;
        let a_ei = sub(&free, &int);
        s -= &a_ei * &x;
        r -= &a_ei * &y;
        recovery = Some(CellRecovery {
            interior: sys.dofs[..ni].to_vec(),
            exterior: free.iter().map(|&j| sys.dofs[j]).collect(),
            x,
            y,
        });
    }
    let global: Vec<usize> = free.iter().map(|&j| exterior_index[sys.dofs[j]]).collect();
    for (i, &gi) in global.iter().enumerate() {
        rhs[gi] += r[i];
        for (j, &gj) in global.iter().enumerate() {
            if s[(i, j)] != 0.0 {
                triplets.push(gi, gj, s[(i, j)]);
            }
        }
    }
    Some(recovery.unwrap_or(CellRecovery {
        interior: Vec::new(),
        exterior: Vec::new(),
        x: DMatrix::zeros(0, 0),
        y: DVector::zeros(0),
    }))
}
