use crate::error::{Error, Result};
use crate::mesh::Point;

/// Affine map `x = v0 + J xi` from the reference triangle onto a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: Point,
    /// Columns are `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// `J^{-T}`, pushes reference gradients to physical gradients.
    pub inv_transpose: [[f64; 2]; 2],
}

impl AffineMap {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let [v0, v1, v2] = vertices;
        let j = [[v1.x - v0.x, v2.x - v0.x], [v1.y - v0.y, v2.y - v0.y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateCell { det });
        }
        // J^{-1} = [[j11, -j01], [-j10, j00]] / det, then transpose
        let inv_transpose = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        Ok(AffineMap {
            origin: v0,
            jacobian: j,
            det,
            inv_transpose,
        })
    }

    pub fn map(&self, xi: [f64; 2]) -> Point {
        let j = &self.jacobian;
        Point::new(
            self.origin.x + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin.y + j[1][0] * xi[0] + j[1][1] * xi[1],
        )
    }

    pub fn inverse(&self, x: Point) -> [f64; 2] {
        let d = x - self.origin;
        // J^{-1} d = (J^{-T})^T d
        let it = &self.inv_transpose;
        [it[0][0] * d.x + it[1][0] * d.y, it[0][1] * d.x + it[1][1] * d.y]
    }

    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let it = &self.inv_transpose;
        [it[0][0] * g[0] + it[0][1] * g[1], it[1][0] * g[0] + it[1][1] * g[1]]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_identity() {
        let m = AffineMap::new([Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)])
            .unwrap();
        assert_eq!(m.det, 1.0);
        assert_eq!(m.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m.inv_transpose, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn right_triangle_determinant() {
        let h = 0.125;
        let m = AffineMap::new([Point::new(0.3, 0.2), Point::new(0.3 + h, 0.2), Point::new(0.3, 0.2 + h)])
            .unwrap();
        assert!((m.det - h * h).abs() < 1e-16);
    }

    #[test]
    fn pushes_gradient_of_x() {
        let verts = [Point::new(0.1, 0.2), Point::new(0.9, 0.4), Point::new(0.3, 1.1)];
        let m = AffineMap::new(verts).unwrap();
        // f(x, y) = x pulled back: f(xi) = v0.x + J[0][0] xi0 + J[0][1] xi1
        let g_ref = [m.jacobian[0][0], m.jacobian[0][1]];
        let g = m.push_gradient(g_ref);
        assert!((g[0] - 1.0).abs() < 1e-14 && g[1].abs() < 1e-14);
        for (xi, v) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().zip(verts) {
            let p = m.map(*xi);
            assert!((p - v).norm() < 1e-15);
            let back = m.inverse(p);
            assert!((back[0] - xi[0]).abs() < 1e-14 && (back[1] - xi[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_degenerate() {
        let flat = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(matches!(AffineMap::new(flat), Err(Error::DegenerateCell { .. })));
        let cw = [Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)];
        assert!(AffineMap::new(cw).is_err());
    }
}
