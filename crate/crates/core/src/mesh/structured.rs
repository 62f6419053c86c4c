use serde::{Deserialize, Serialize};

use super::{Cell, Mesh, Point, Subdomain};
use crate::error::{Error, Result};

/// Supported two-subdomain geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    /// Unit square; free flow in the top half, porous medium in the bottom half.
    UnitSquareSplit,
    /// `(0, 3/2)^2` with a vertical free-flow channel `(1/2, 1) x (1/2, 3/2)`
    /// open at the top.
    VerticalWellbore,
    /// `(0, 3/2)^2` with an L-shaped channel: a horizontal leg
    /// `(1/4, 5/4) x (1/4, 1/2)` joined to a vertical leg `(1, 5/4) x (1/2, 3/2)`
    /// open at the top.
    HorizontalWellbore,
}

impl Geometry {
    pub fn extent(self) -> (f64, f64) {
        match self {
            Geometry::UnitSquareSplit => (1.0, 1.0),
            Geometry::VerticalWellbore | Geometry::HorizontalWellbore => (1.5, 1.5),
        }
    }

    /// Coordinates that must fall on grid lines, x and y.
    pub fn breakpoints(self) -> (&'static [f64], &'static [f64]) {
        match self {
            Geometry::UnitSquareSplit => (&[1.0], &[0.5, 1.0]),
            Geometry::VerticalWellbore => (&[0.5, 1.0, 1.5], &[0.5, 1.5]),
            Geometry::HorizontalWellbore => (&[0.25, 1.0, 1.25, 1.5], &[0.25, 0.5, 1.5]),
        }
    }

    /// Whether an interior point of a cell lies in the free flow region.
    pub fn is_stokes(self, p: Point) -> bool {
        let Point { x, y } = p;
        match self {
            Geometry::UnitSquareSplit => y > 0.5,
            Geometry::VerticalWellbore => x > 0.5 && x < 1.0 && y > 0.5,
            Geometry::HorizontalWellbore => {
                (x > 0.25 && x < 1.25 && y > 0.25 && y < 0.5) || (x > 1.0 && x < 1.25 && y > 0.5)
            }
        }
    }

    pub fn area(self) -> f64 {
        let (w, h) = self.extent();
        w * h
    }
}

/// Structured triangulation with `n` grid intervals per unit length.
///
/// Each grid square is split along its south-west to north-east diagonal.
pub fn build_structured(geometry: Geometry, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidMesh("subdivision count must be at least 1".into()));
    }
    let (bx, by) = geometry.breakpoints();
    for &b in bx.iter().chain(by) {
        let scaled = b * n as f64;
        if (scaled - scaled.round()).abs() > 1e-9 {
            return Err(Error::IncompatibleSubdivision { n, breakpoint: b });
        }
    }
    let (w, h) = geometry.extent();
    let nx = (w * n as f64).round() as usize;
    let ny = (h * n as f64).round() as usize;
    let spacing = 1.0 / n as f64;

    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(Point::new(i as f64 * spacing, j as f64 * spacing));
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;

    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let center = Point::new((i as f64 + 0.5) * spacing, (j as f64 + 0.5) * spacing);
            let subdomain = if geometry.is_stokes(center) {
                Subdomain::Stokes
            } else {
                Subdomain::Dual
            };
            cells.push(Cell {
                vertices: [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)],
                subdomain,
            });
            cells.push(Cell {
                vertices: [vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)],
                subdomain,
            });
        }
    }
    Mesh::from_cells(points, cells)
}
