use std::collections::HashMap;

use super::{Cell, Mesh};

/// Splits every triangle into four congruent children through its edge
/// midpoints. Children inherit the parent's subdomain tag.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let mut points = mesh.points.clone();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.facets.len());
    let mut midpoint = |a: usize, b: usize, points: &mut Vec<_>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let p = mesh.points[a].midpoint(mesh.points[b]);
            points.push(p);
            points.len() - 1
        })
    };

    let mut cells = Vec::with_capacity(4 * mesh.cells.len());
    for cell in &mesh.cells {
        let [a, b, c] = cell.vertices;
        let ab = midpoint(a, b, &mut points);
        let bc = midpoint(b, c, &mut points);
        let ca = midpoint(c, a, &mut points);
        for vertices in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            cells.push(Cell {
                vertices,
                subdomain: cell.subdomain,
            });
        }
    }
    Mesh::from_cells(points, cells).expect("refinement of a valid mesh is valid")
}
