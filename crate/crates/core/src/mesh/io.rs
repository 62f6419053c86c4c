use std::io::Write;

use super::Mesh;

/// Plain-text mesh listing: `v x y` per vertex, `c i j k tag` per cell
/// (tag 0 = free flow, 1 = dual porosity) and `f i j class` per facet.
pub fn write_mesh_dump<W: Write>(mesh: &Mesh, mut out: W) -> std::io::Result<()> {
    for p in &mesh.points {
        writeln!(out, "v {} {}", p.x, p.y)?;
    }
    for c in &mesh.cells {
        let [i, j, k] = c.vertices;
        writeln!(out, "c {i} {j} {k} {}", c.subdomain.tag())?;
    }
    for f in &mesh.facets {
        writeln!(out, "f {} {} {}", f.vertices[0], f.vertices[1], f.class)?;
    }
    Ok(())
}
