//! Reference-element polynomial bases, quadrature and affine maps.

mod affine;
mod basis;
mod quadrature;

pub use affine::AffineMap;
pub use basis::{BasisValues, SegBasis, TriBasis, MAX_DEGREE};
pub use quadrature::{gauss_legendre, quad_seg, quad_tri, QuadRule, MAX_QUADRATURE_DEGREE};

/// Symmetric strain of the vector basis function `phi e_c` given the physical
/// gradient of `phi`: returns `[e_xx, e_xy, e_yy]`.
pub fn strain(component: usize, grad: [f64; 2]) -> [f64; 3] {
    match component {
        0 => [grad[0], 0.5 * grad[1], 0.0],
        _ => [0.0, 0.5 * grad[0], grad[1]],
    }
}
