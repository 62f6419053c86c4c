use dps_hdg::mesh::{build_structured, refine_uniform, write_mesh_dump, FacetClass, Geometry};

fn main() -> dps_hdg::Result<()> {
    let classes = [
        FacetClass::InteriorS,
        FacetClass::InteriorD,
        FacetClass::Interface,
        FacetClass::BoundaryS,
        FacetClass::BoundaryD,
    ];
    for geometry in [Geometry::UnitSquareSplit, Geometry::VerticalWellbore, Geometry::HorizontalWellbore] {
        let mut mesh = build_structured(geometry, 4)?;
        println!("{geometry:?}");
        for _ in 0..3 {
            let counts: Vec<String> = classes
                .iter()
                .map(|&c| format!("{}={}", c.name(), mesh.count_facets(c)))
                .collect();
            println!("  {:>5} cells  {}", mesh.num_cells(), counts.join(" "));
            mesh = refine_uniform(&mesh);
        }
    }

    let coarse = build_structured(Geometry::UnitSquareSplit, 2)?;
    let mut text = Vec::new();
    write_mesh_dump(&coarse, &mut text).expect("in-memory write");
    println!("{}", String::from_utf8_lossy(&text));
    Ok(())
}
