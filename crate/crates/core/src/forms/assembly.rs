use super::kernels::{element_system_with, facet_system_with, ElementSystem, Reference};
use super::Problem;
use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{FacetClass, Mesh};
use crate::spaces::{DofLayout, Field};

/// Global system over the free DOFs, essential values lifted to the right-hand side.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

/// Rejects configurations whose pressure level is undetermined: no essential
/// pressure trace, no traction-free boundary and no mean-value constraint.
pub fn check_well_posed(mesh: &Mesh, layout: &DofLayout) -> Result<()> {
    if layout.mean_pressure_dof().is_some() {
        return Ok(());
    }
    let pressure_fixed = [Field::FracturePressureTrace, Field::MatrixPressureTrace]
        .iter()
        .any(|&f| layout.block(f).any(|d| layout.is_essential(d)));
    let traction_free = mesh.facets.iter().enumerate().any(|(f, facet)| {
        facet.class == FacetClass::BoundaryS
            && layout.velocity_trace(f).is_some_and(|mut r| r.any(|d| !layout.is_essential(d)))
    });
    if pressure_fixed || traction_free {
        Ok(())
    } else {
        Err(Error::Config(
            "pressure is only determined up to a constant: enable the mean constraint, \
             prescribe a porous boundary pressure or leave part of the free-flow boundary traction-free"
                .into(),
        ))
    }
}

pub(crate) fn scatter(
    layout: &DofLayout,
    sys: &ElementSystem,
    triplets: &mut TripletBuilder,
    rhs: &mut [f64],
) {
    let free: Vec<Option<usize>> = sys.dofs.iter().map(|&d| layout.free_index(d)).collect();
    for (i, fi) in free.iter().enumerate() {
        let Some(fi) = *fi else { continue };
        rhs[fi] += sys.rhs[i];
        for (j, fj) in free.iter().enumerate() {
            let m = sys.matrix[(i, j)];
            if m == 0.0 {
                continue;
            }
            match fj {
                Some(fj) => triplets.push(fi, *fj, m),
                None => rhs[fi] -= m * layout.essential_value(sys.dofs[j]),
            }
        }
    }
}

/// Assembles the monolithic saddle-point system.
pub fn assemble(problem: &Problem) -> Result<SaddleSystem> {
    let Problem {
        mesh, layout, params, ..
    } = *problem;
    params.validate(mesh)?;
    check_well_posed(mesh, layout)?;
    let reference = Reference::new(layout.degree())?;
    let n = layout.n_free();
    let mut triplets = TripletBuilder::new(n, n);
    let mut rhs = vec![0.0; n];
    for c in 0..mesh.num_cells() {
        let sys = element_system_with(problem, &reference, c)?;
        scatter(layout, &sys, &mut triplets, &mut rhs);
    }
    for f in 0..mesh.facets.len() {
        if let Some(sys) = facet_system_with(problem, &reference, f) {
            scatter(layout, &sys, &mut triplets, &mut rhs);
        }
    }
    Ok(SaddleSystem {
        matrix: SparseMatrix::finalize(triplets)?,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Coefficient, PhysicalParams, SourceSet};
    use crate::linalg::solve_direct;
    use crate::mesh::{build_structured, Geometry};
    use crate::spaces::{BoundaryConditionSet, DiscretizationParams};
    use std::sync::Arc;

    fn params() -> PhysicalParams {
        PhysicalParams {
            mu: 1.0,
            kappa_f: Coefficient::Constant(1.0),
            kappa_m: Coefficient::Constant(1.0),
            sigma: 0.5,
            alpha: 1.0,
        }
    }

    #[test]
    fn global_matrix_is_symmetric_and_solvable() {
        let mesh = build_structured(Geometry::UnitSquareSplit, 4).unwrap();
        for k in 1..=3 {
            let disc = DiscretizationParams::new(k).unwrap();
            let bcs = BoundaryConditionSet::dirichlet(
                Arc::new(|p| [p.y, -p.x]),
                Arc::new(|p| p.x),
                Arc::new(|p| p.y),
            );
            let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
            let params = params();
            let sources = SourceSet::default();
            let problem = Problem {
                mesh: &mesh,
                layout: &layout,
                disc: &disc,
                params: &params,
                sources: &sources,
            };
            let sys = assemble(&problem).unwrap();
            assert_eq!(sys.matrix.nrows(), layout.n_free());
            assert!(sys.matrix.symmetry_defect() < 1e-13, "k={k}");
            let (_, report) = solve_direct(&sys.matrix, &sys.rhs).unwrap();
            assert!(report.relative_residual < 1e-10);
        }
    }

    #[test]
    fn homogeneous_problem_needs_a_pressure_level() {
        let mesh = build_structured(Geometry::UnitSquareSplit, 2).unwrap();
        let disc = DiscretizationParams::new(1).unwrap();
        let bcs = BoundaryConditionSet::homogeneous().with_mean_constraints(false, false);
        let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
        assert!(matches!(check_well_posed(&mesh, &layout), Err(Error::Config(_))));
        let bcs = BoundaryConditionSet::homogeneous();
        let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
        assert!(check_well_posed(&mesh, &layout).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let mesh = build_structured(Geometry::UnitSquareSplit, 2).unwrap();
        let disc = DiscretizationParams::new(1).unwrap();
        let layout = DofLayout::build(&mesh, &disc, &BoundaryConditionSet::homogeneous()).unwrap();
        let mut params = params();
        params.kappa_f = Coefficient::PerCell(vec![1.0; 3]);
        let sources = SourceSet::default();
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        assert!(matches!(assemble(&problem), Err(Error::DimensionMismatch(_))));
        let mut bad = problem.params.clone();
        bad.kappa_f = Coefficient::Constant(1.0);
        bad.mu = -1.0;
        let problem = Problem {
            params: &bad,
            ..problem
        };
        assert!(matches!(assemble(&problem), Err(Error::Config(_))));
    }
}
