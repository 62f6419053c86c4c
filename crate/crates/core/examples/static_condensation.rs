//! Monolithic and condensed solves of the same problem.

use std::time::Instant;

use dps_hdg::forms::{assemble, condense, Problem};
use dps_hdg::linalg::solve_direct;
use dps_hdg::mesh::{build_structured, Geometry};
use dps_hdg::mms::{boundary_conditions, example1, physical_params, MmsParams};
use dps_hdg::spaces::{DiscretizationParams, DofLayout, FieldSolution};

fn main() -> dps_hdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(16, |a| a.parse().expect("n"));
    let (exact, sources) = example1(MmsParams::default());
    let params = physical_params(&exact);
    let bcs = boundary_conditions(&exact);
    let mesh = build_structured(Geometry::UnitSquareSplit, n)?;
    let disc = DiscretizationParams::new(2)?;
    let layout = DofLayout::build(&mesh, &disc, &bcs)?;
    let problem = Problem {
        mesh: &mesh,
        layout: &layout,
        disc: &disc,
        params: &params,
        sources: &sources,
    };

    let t = Instant::now();
    let full = assemble(&problem)?;
    let (x, _) = solve_direct(&full.matrix, &full.rhs)?;
    let mono = FieldSolution::from_free(&layout, &x)?;
    println!("monolithic: {:>7} unknowns {:>9} nonzeros  {:.3}s", full.rhs.len(), full.matrix.nnz(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let schur = condense(&problem)?;
    let (y, _) = solve_direct(&schur.matrix, &schur.rhs)?;
    let cond = schur.recover(&y)?;
    println!("condensed:  {:>7} unknowns {:>9} nonzeros  {:.3}s", schur.n_exterior(), schur.matrix.nnz(), t.elapsed().as_secs_f64());

    let scale = mono.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let diff = mono.values.iter().zip(&cond.values).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
    println!("max difference {:.2e} (relative {:.2e})", diff, diff / scale);
    Ok(())
}
