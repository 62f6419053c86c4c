use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fem::TriBasis;
use crate::mesh::{Mesh, Subdomain};
use crate::spaces::{DofLayout, FieldSolution};

/// Per-cell means. Matrix fields are zero on free-flow cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRecord {
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub ux: f64,
    pub uy: f64,
    pub p: f64,
    pub umx: f64,
    pub umy: f64,
    pub pm: f64,
}

pub const CELL_CSV_HEADER: &str = "cell,x,y,ux,uy,p,umx,umy,pm";

pub fn cell_means(solution: &FieldSolution, mesh: &Mesh, layout: &DofLayout) -> Result<Vec<CellRecord>> {
    let k = layout.degree();
    let vel = TriBasis::new(k)?.reference_integrals();
    let pres = TriBasis::new(k - 1)?.reference_integrals();
    // mean = (det / |K|) sum c_a int_ref phi_a, and det = 2 |K|
    let mean = |dofs: std::ops::Range<usize>, ints: &[f64]| -> f64 {
        2.0 * solution.dofs(dofs).iter().zip(ints).map(|(c, w)| c * w).sum::<f64>()
    };
    let nv = layout.velocity_dim();
    Ok((0..mesh.num_cells())
        .map(|c| {
            let centroid = mesh.centroid(c);
            let u = layout.velocity(c);
            let mut rec = CellRecord {
                cell: c,
                x: centroid.x,
                y: centroid.y,
                ux: mean(u.start..u.start + nv, &vel),
                uy: mean(u.start + nv..u.end, &vel),
                p: mean(layout.pressure(c), &pres),
                umx: 0.0,
                umy: 0.0,
                pm: 0.0,
            };
            if let (Some(um), Some(pm)) = (layout.matrix_velocity(c), layout.matrix_pressure(c)) {
                rec.umx = mean(um.start..um.start + nv, &vel);
                rec.umy = mean(um.start + nv..um.end, &vel);
                rec.pm = mean(pm, &pres);
            }
            rec
        })
        .collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `<base>.vtk` (legacy ASCII unstructured grid, vertex-averaged point
/// data plus cell means) and `<base>.csv` (cell means). Returns both paths.
pub fn export_fields(
    solution: &FieldSolution,
    mesh: &Mesh,
    layout: &DofLayout,
    base: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let vtk_path = base.with_extension("vtk");
    let csv_path = base.with_extension("csv");
    let records = cell_means(solution, mesh, layout)?;

    let mut csv = create(&csv_path)?;
    let io = |e| Error::io(&csv_path, e);
    writeln!(csv, "{CELL_CSV_HEADER}").map_err(io)?;
    for r in &records {
        writeln!(
            csv,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.cell, r.x, r.y, r.ux, r.uy, r.p, r.umx, r.umy, r.pm
        )
        .map_err(io)?;
    }
    csv.flush().map_err(io)?;

    let nodal = vertex_values(solution, mesh, layout)?;
    let mut out = create(&vtk_path)?;
    write_vtk(&mut out, mesh, &nodal, &records).map_err(|e| Error::io(&vtk_path, e))?;
    Ok((vtk_path, csv_path))
}

/// `[ux, uy, p, umx, umy, pm]` per vertex, averaged over adjacent cells (matrix
/// fields over adjacent porous cells only).
fn vertex_values(solution: &FieldSolution, mesh: &Mesh, layout: &DofLayout) -> Result<Vec<[f64; 6]>> {
    let k = layout.degree();
    let vel = TriBasis::new(k)?;
    let pres = TriBasis::new(k - 1)?;
    let refs = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let vel_at: Vec<_> = refs.iter().map(|&r| vel.eval(r).values).collect();
    let pres_at: Vec<_> = refs.iter().map(|&r| pres.eval(r).values).collect();
    let mut sum = vec![[0.0; 6]; mesh.points.len()];
    let mut count = vec![[0usize; 2]; mesh.points.len()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for (i, &v) in cell.vertices.iter().enumerate() {
            let u = solution.vector_at(layout.velocity(c), &vel_at[i]);
            let p = solution.scalar_at(layout.pressure(c), &pres_at[i]);
            sum[v][0] += u[0];
            sum[v][1] += u[1];
            sum[v][2] += p;
            count[v][0] += 1;
            if cell.subdomain == Subdomain::Dual {
                let um = solution.vector_at(layout.matrix_velocity(c).expect("porous cell"), &vel_at[i]);
                let pm = solution.scalar_at(layout.matrix_pressure(c).expect("porous cell"), &pres_at[i]);
                sum[v][3] += um[0];
                sum[v][4] += um[1];
                sum[v][5] += pm;
                count[v][1] += 1;
            }
        }
    }
    Ok(sum
        .iter()
        .zip(&count)
        .map(|(s, n)| {
            let a = 1.0 / n[0].max(1) as f64;
            let b = 1.0 / n[1].max(1) as f64;
            [s[0] * a, s[1] * a, s[2] * a, s[3] * b, s[4] * b, s[5] * b]
        })
        .collect())
}

fn write_vtk<W: Write>(out: &mut W, mesh: &Mesh, nodal: &[[f64; 6]], cells: &[CellRecord]) -> std::io::Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "dual-porosity/Stokes HDG fields")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.points.len())?;
    for p in &mesh.points {
        writeln!(out, "{:e} {:e} 0", p.x, p.y)?;
    }
    let n = mesh.num_cells();
    writeln!(out, "CELLS {n} {}", 4 * n)?;
    for c in &mesh.cells {
        writeln!(out, "3 {} {} {}", c.vertices[0], c.vertices[1], c.vertices[2])?;
    }
    writeln!(out, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(out, "5")?;
    }

    writeln!(out, "POINT_DATA {}", nodal.len())?;
    writeln!(out, "VECTORS u double")?;
    for v in nodal {
        writeln!(out, "{:e} {:e} 0", v[0], v[1])?;
    }
    writeln!(out, "SCALARS p double 1\nLOOKUP_TABLE default")?;
    for v in nodal {
        writeln!(out, "{:e}", v[2])?;
    }
    writeln!(out, "VECTORS u_m double")?;
    for v in nodal {
        writeln!(out, "{:e} {:e} 0", v[3], v[4])?;
    }
    writeln!(out, "SCALARS p_m double 1\nLOOKUP_TABLE default")?;
    for v in nodal {
        writeln!(out, "{:e}", v[5])?;
    }

    writeln!(out, "CELL_DATA {n}")?;
    writeln!(out, "SCALARS subdomain int 1\nLOOKUP_TABLE default")?;
    for c in &mesh.cells {
        writeln!(out, "{}", c.subdomain.tag())?;
    }
    writeln!(out, "VECTORS u_mean double")?;
    for r in cells {
        writeln!(out, "{:e} {:e} 0", r.ux, r.uy)?;
    }
    writeln!(out, "SCALARS p_mean double 1\nLOOKUP_TABLE default")?;
    for r in cells {
        writeln!(out, "{:e}", r.p)?;
    }
    writeln!(out, "VECTORS u_m_mean double")?;
    for r in cells {
        writeln!(out, "{:e} {:e} 0", r.umx, r.umy)?;
    }
    writeln!(out, "SCALARS p_m_mean double 1\nLOOKUP_TABLE default")?;
    for r in cells {
        writeln!(out, "{:e}", r.pm)?;
    }
    out.flush()
}
