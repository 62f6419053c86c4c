//! Solves the manufactured problem on a coarse mesh and writes VTK and CSV.

use dps_hdg::driver::solve;
use dps_hdg::forms::Problem;
use dps_hdg::mesh::{build_structured, Geometry, Point, Subdomain};
use dps_hdg::mms::{boundary_conditions, example1, physical_params, MmsParams};
use dps_hdg::postproc::{cell_means, export_fields};
use dps_hdg::spaces::{DiscretizationParams, DofLayout};

fn main() -> dps_hdg::Result<()> {
    let (exact, sources) = example1(MmsParams::default());
    let params = physical_params(&exact);
    let bcs = boundary_conditions(&exact);
    let mesh = build_structured(Geometry::UnitSquareSplit, 8)?;
    let disc = DiscretizationParams::new(2)?;
    let layout = DofLayout::build(&mesh, &disc, &bcs)?;
    let problem = Problem {
        mesh: &mesh,
        layout: &layout,
        disc: &disc,
        params: &params,
        sources: &sources,
    };
    let solved = solve(&problem, true)?;

    let base = std::env::temp_dir().join("dps-hdg-fields");
    let (vtk, csv) = export_fields(&solved.solution, &mesh, &layout, &base)?;
    println!("wrote {}\nwrote {}", vtk.display(), csv.display());

    let means = cell_means(&solved.solution, &mesh, &layout)?;
    for r in means.iter().step_by(29) {
        let x = Point::new(r.x, r.y);
        let e = match mesh.cells[r.cell].subdomain {
            Subdomain::Stokes => exact.stokes_velocity(x),
            Subdomain::Dual => exact.fracture_velocity(x),
        };
        println!("cell {:>3} ({:.3}, {:.3})  u = ({:+.4}, {:+.4})  exact at centroid ({:+.4}, {:+.4})", r.cell, r.x, r.y, r.ux, r.uy, e[0], e[1]);
    }
    Ok(())
}
