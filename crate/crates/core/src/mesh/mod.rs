//! Conforming triangulations of two-subdomain geometries.
//!
//! Every cell carries a subdomain tag (free flow or dual porosity). Facets are
//! derived from the cell list and classified topologically: a facet between two
//! cells of the same tag is interior to that subdomain, a facet between cells of
//! different tags lies on the interface, and a facet with a single neighbor is a
//! boundary facet of the neighbor's subdomain.

mod io;
mod refine;
mod structured;

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub use io::write_mesh_dump;
pub use refine::refine_uniform;
pub use structured::{build_structured, Geometry};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Which model a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subdomain {
    /// Free flow region, Stokes equations.
    Stokes,
    /// Porous region, coupled microfracture/matrix Darcy systems.
    Dual,
}

impl Subdomain {
    pub fn tag(self) -> u8 {
        match self {
            Subdomain::Stokes => 0,
            Subdomain::Dual => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    /// Counter-clockwise vertex indices.
    pub vertices: [usize; 3],
    pub subdomain: Subdomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FacetClass {
    InteriorS,
    InteriorD,
    BoundaryS,
    BoundaryD,
    Interface,
}

impl FacetClass {
    pub fn name(self) -> &'static str {
        match self {
            FacetClass::InteriorS => "interior_s",
            FacetClass::InteriorD => "interior_d",
            FacetClass::BoundaryS => "boundary_s",
            FacetClass::BoundaryD => "boundary_d",
            FacetClass::Interface => "interface",
        }
    }

    /// Facet carries Stokes trace unknowns (velocity trace, Stokes pressure trace).
    pub fn is_stokes_facet(self) -> bool {
        matches!(
            self,
            FacetClass::InteriorS | FacetClass::BoundaryS | FacetClass::Interface
        )
    }

    /// Facet carries dual-porosity pressure traces.
    pub fn is_dual_facet(self) -> bool {
        matches!(
            self,
            FacetClass::InteriorD | FacetClass::BoundaryD | FacetClass::Interface
        )
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, FacetClass::BoundaryS | FacetClass::BoundaryD)
    }
}

impl fmt::Display for FacetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetSide {
    pub cell: usize,
    /// Local edge index in the cell; edge `e` is opposite vertex `e`.
    pub local_edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Endpoints, sorted by vertex index. Trace polynomials are parametrized
    /// from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    /// `sides[0]` is the cell the normal points out of.
    pub sides: Vec<FacetSide>,
    pub class: FacetClass,
    /// Unit normal: lower to higher cell index on interior facets, free flow
    /// into porous region on interface facets, outward on the boundary.
    pub normal: Point,
}

impl Facet {
    /// Sign that turns the stored normal into the outward normal of `cell`.
    pub fn orientation(&self, cell: usize) -> f64 {
        if self.sides[0].cell == cell {
            1.0
        } else {
            -1.0
        }
    }
}

/// Immutable triangulation with classified facets.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub points: Vec<Point>,
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    /// Facet index of each local edge of each cell.
    pub cell_facets: Vec<[usize; 3]>,
    /// Longest edge of each cell.
    pub diameters: Vec<f64>,
    pub h_max: f64,
}

impl Mesh {
    /// Builds facets, classification and diameters from a cell list.
    pub fn from_cells(points: Vec<Point>, cells: Vec<Cell>) -> Result<Mesh> {
        for (c, cell) in cells.iter().enumerate() {
            let [a, b, d] = cell.vertices;
            if a == b || b == d || a == d {
                return Err(Error::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            if let Some(&v) = cell.vertices.iter().find(|&&v| v >= points.len()) {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} references missing vertex {v}"
                )));
            }
            let area = signed_area(points[a], points[b], points[d]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has non-positive signed area {area:e}"
                )));
            }
        }

        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut facets: Vec<Facet> = Vec::with_capacity(cells.len() * 2);
        let mut cell_facets = vec![[0usize; 3]; cells.len()];
        for (c, cell) in cells.iter().enumerate() {
            for e in 0..3 {
                let a = cell.vertices[(e + 1) % 3];
                let b = cell.vertices[(e + 2) % 3];
                let key = (a.min(b), a.max(b));
                let side = FacetSide {
                    cell: c,
                    local_edge: e,
                };
                let f = *edge_map.entry(key).or_insert_with(|| {
                    facets.push(Facet {
                        vertices: [key.0, key.1],
                        sides: Vec::with_capacity(2),
                        class: FacetClass::BoundaryD,
                        normal: Point::default(),
                    });
                    facets.len() - 1
                });
                if facets[f].sides.len() == 2 {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) shared by more than two cells",
                        key.0, key.1
                    )));
                }
                facets[f].sides.push(side);
                cell_facets[c][e] = f;
            }
        }

        for facet in &mut facets {
            classify(facet, &cells, &points);
        }

        let diameters: Vec<f64> = cells
            .iter()
            .map(|cell| {
                let [a, b, c] = cell.vertices.map(|v| points[v]);
                (b - a).norm().max((c - b).norm()).max((a - c).norm())
            })
            .collect();
        let h_max = diameters.iter().copied().fold(0.0, f64::max);

        Ok(Mesh {
            points,
            cells,
            facets,
            cell_facets,
            diameters,
            h_max,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        self.cells[cell].vertices.map(|v| self.points[v])
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_points(cell);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let [a, b, c] = self.cell_points(cell);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    pub fn facet_points(&self, facet: usize) -> [Point; 2] {
        self.facets[facet].vertices.map(|v| self.points[v])
    }

    /// Length, unit normal (stored convention) and midpoint of a facet.
    pub fn facet_geometry(&self, facet: usize) -> (f64, Point, Point) {
        let [a, b] = self.facet_points(facet);
        ((b - a).norm(), self.facets[facet].normal, a.midpoint(b))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn subdomain_cells(&self, subdomain: Subdomain) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.subdomain == subdomain)
            .map(|(i, _)| i)
    }

    pub fn count_facets(&self, class: FacetClass) -> usize {
        self.facets.iter().filter(|f| f.class == class).count()
    }
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn classify(facet: &mut Facet, cells: &[Cell], points: &[Point]) {
    let tags: Vec<Subdomain> = facet.sides.iter().map(|s| cells[s.cell].subdomain).collect();
    facet.class = match tags.as_slice() {
        [Subdomain::Stokes] => FacetClass::BoundaryS,
        [Subdomain::Dual] => FacetClass::BoundaryD,
        [Subdomain::Stokes, Subdomain::Stokes] => FacetClass::InteriorS,
        [Subdomain::Dual, Subdomain::Dual] => FacetClass::InteriorD,
        _ => FacetClass::Interface,
    };
    // sides[0] is the cell the normal points out of
    if facet.sides.len() == 2 {
        let swap = match facet.class {
            FacetClass::Interface => cells[facet.sides[0].cell].subdomain != Subdomain::Stokes,
            _ => facet.sides[0].cell > facet.sides[1].cell,
        };
        if swap {
            facet.sides.swap(0, 1);
        }
    }
    let a = points[facet.vertices[0]];
    let b = points[facet.vertices[1]];
    let t = b - a;
    let len = t.norm();
    let mut n = Point::new(t.y / len, -t.x / len);
    let from = cells[facet.sides[0].cell].vertices;
    let centroid = Point::new(
        (points[from[0]].x + points[from[1]].x + points[from[2]].x) / 3.0,
        (points[from[0]].y + points[from[1]].y + points[from[2]].y) / 3.0,
    );
    if n.dot(a.midpoint(b) - centroid) < 0.0 {
        n = -n;
    }
    facet.normal = n;
}
