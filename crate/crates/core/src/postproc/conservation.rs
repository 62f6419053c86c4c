use std::fmt::Write as _;

use crate::error::Result;
use crate::fem::{quad_seg, quad_tri, AffineMap, BasisValues, TriBasis};
use crate::forms::{PhysicalParams, SourceSet};
use crate::mesh::{FacetClass, Mesh, Point, Subdomain};
use crate::spaces::{DofLayout, FieldSolution, ScalarFn};

/// Relative threshold on every conservation quantity.
pub const CONSERVATION_TOLERANCE: f64 = 1e-8;

/// Mass balance residuals and facet flux-continuity defects of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// `||div u_h||` over the free-flow region.
    pub stokes_divergence: f64,
    /// `||sigma kappa_m (p_h - p_h^m) + div u_h - Pi g||` over the porous region.
    pub fracture_balance: f64,
    /// `||sigma kappa_m (p_h^m - p_h) + div u_h^m - Pi g_m||` over the porous region.
    pub matrix_balance: f64,
    /// Largest facet `L^2` norm of the normal jump of `u_h` away from the
    /// interface (boundary facets compare with the trace or the no-flux data).
    pub velocity_jump: f64,
    /// Largest facet `L^2` norm of `(u_h - u_bar_h).n` from either side of the interface.
    pub interface_jump: f64,
    /// Largest facet `L^2` norm of the normal jump of `u_h^m`.
    pub matrix_jump: f64,
    /// `||u_h||` over the whole domain.
    pub velocity_norm: f64,
    /// `||u_h^m||` over the porous region.
    pub matrix_velocity_norm: f64,
    /// `||grad u_h||` over the free-flow region, broken.
    pub stokes_gradient_norm: f64,
    /// `||sigma kappa_m (p_h - p_h^m)|| + ||Pi g|| + ||grad u_h||` over the
    /// porous region, broken.
    pub fracture_scale: f64,
    /// `||sigma kappa_m (p_h^m - p_h)|| + ||Pi g_m|| + ||grad u_h^m||`, broken.
    pub matrix_scale: f64,
}

impl ConservationReport {
    /// `(name, value, threshold)` for the six checked quantities.
    pub fn checks(&self, tol: f64) -> [(&'static str, f64, f64); 6] {
        let t = |scale: f64| tol * (1.0 + scale);
        [
            ("stokes_divergence", self.stokes_divergence, t(self.stokes_gradient_norm)),
            ("fracture_balance", self.fracture_balance, t(self.fracture_scale)),
            ("matrix_balance", self.matrix_balance, t(self.matrix_scale)),
            ("velocity_jump", self.velocity_jump, t(self.velocity_norm)),
            ("interface_jump", self.interface_jump, t(self.velocity_norm)),
            ("matrix_jump", self.matrix_jump, t(self.matrix_velocity_norm)),
        ]
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.checks(tol).iter().all(|(_, v, t)| v <= t)
    }

    pub fn to_csv(&self, tol: f64) -> String {
        let mut out = String::from("quantity,value,threshold,pass\n");
        for (name, v, t) in self.checks(tol) {
            let _ = writeln!(out, "{name},{v:.6e},{t:.6e},{}", v <= t);
        }
        out
    }
}

struct Cells<'a> {
    mesh: &'a Mesh,
    layout: &'a DofLayout,
    solution: &'a FieldSolution,
    vel: TriBasis,
    pres: TriBasis,
}

impl Cells<'_> {
    fn normal_flux(&self, cell: usize, x: Point, n: Point, matrix: bool, buf: &mut BasisValues) -> Result<f64> {
        let map = AffineMap::new(self.mesh.cell_points(cell))?;
        self.vel.eval_into(map.inverse(x), buf);
        let dofs = if matrix {
            self.layout.matrix_velocity(cell).expect("porous cell")
        } else {
            self.layout.velocity(cell)
        };
        let u = self.solution.vector_at(dofs, &buf.values);
        Ok(u[0] * n.x + u[1] * n.y)
    }
}

/// Elementwise mass balances and facet normal-flux continuity, by quadrature of
/// degree `2k + 2`. `Pi g` is the cellwise `L^2` projection onto `P_{k-1}`.
pub fn conservation(
    solution: &FieldSolution,
    mesh: &Mesh,
    layout: &DofLayout,
    params: &PhysicalParams,
    sources: &SourceSet,
) -> Result<ConservationReport> {
    let k = layout.degree();
    let cells = Cells {
        mesh,
        layout,
        solution,
        vel: TriBasis::new(k)?,
        pres: TriBasis::new(k - 1)?,
    };
    let tri = quad_tri(2 * k + 2)?;
    let seg = quad_seg(2 * k + 2)?;
    let mut report = ConservationReport {
        stokes_divergence: 0.0,
        fracture_balance: 0.0,
        matrix_balance: 0.0,
        velocity_jump: 0.0,
        interface_jump: 0.0,
        matrix_jump: 0.0,
        velocity_norm: 0.0,
        matrix_velocity_norm: 0.0,
        stokes_gradient_norm: 0.0,
        fracture_scale: 0.0,
        matrix_scale: 0.0,
    };
    let (mut frac_ex, mut frac_src, mut mat_ex, mut mat_src) = (0.0, 0.0, 0.0, 0.0);
    let (mut frac_grad, mut mat_grad) = (0.0, 0.0);
    let mut vb = BasisValues::default();
    let mut pb = BasisValues::default();
    let mut grads = Vec::new();

    for c in 0..mesh.num_cells() {
        let map = AffineMap::new(mesh.cell_points(c))?;
        let dual = mesh.cells[c].subdomain == Subdomain::Dual;
        let exchange = params.sigma * params.kappa_m.at(c);
        let proj_g = dual.then(|| project(&cells.pres, &map, &tri, sources.g.as_ref()));
        let proj_gm = dual.then(|| project(&cells.pres, &map, &tri, sources.g_m.as_ref()));
        for (xi, w) in tri.iter() {
            let wq = w * map.det;
            cells.vel.eval_into(xi, &mut vb);
            cells.pres.eval_into(xi, &mut pb);
            grads.clear();
            grads.extend(vb.gradients.iter().map(|g| map.push_gradient(*g)));
            let u = solution.vector_at(layout.velocity(c), &vb.values);
            let gu = solution.vector_gradient_at(layout.velocity(c), &grads);
            let div = gu[0][0] + gu[1][1];
            report.velocity_norm += wq * (u[0] * u[0] + u[1] * u[1]);
            if !dual {
                report.stokes_divergence += wq * div * div;
                report.stokes_gradient_norm += wq * gu.iter().flatten().map(|v| v * v).sum::<f64>();
                continue;
            }
            let um_dofs = layout.matrix_velocity(c).expect("porous cell");
            let um = solution.vector_at(um_dofs.clone(), &vb.values);
            let gum = solution.vector_gradient_at(um_dofs, &grads);
            let div_m = gum[0][0] + gum[1][1];
            let p = solution.scalar_at(layout.pressure(c), &pb.values);
            let pm = solution.scalar_at(layout.matrix_pressure(c).expect("porous cell"), &pb.values);
            let pg = dot(proj_g.as_deref().unwrap_or(&[]), &pb.values);
            let pgm = dot(proj_gm.as_deref().unwrap_or(&[]), &pb.values);
            let ex = exchange * (p - pm);
            let r = ex + div - pg;
            let rm = -ex + div_m - pgm;
            report.fracture_balance += wq * r * r;
            report.matrix_balance += wq * rm * rm;
            report.matrix_velocity_norm += wq * (um[0] * um[0] + um[1] * um[1]);
            frac_ex += wq * ex * ex;
            mat_ex += wq * ex * ex;
            frac_src += wq * pg * pg;
            mat_src += wq * pgm * pgm;
            frac_grad += wq * gu.iter().flatten().map(|v| v * v).sum::<f64>();
            mat_grad += wq * gum.iter().flatten().map(|v| v * v).sum::<f64>();
        }
    }
    for v in [
        &mut report.stokes_divergence,
        &mut report.fracture_balance,
        &mut report.matrix_balance,
        &mut report.velocity_norm,
        &mut report.matrix_velocity_norm,
        &mut report.stokes_gradient_norm,
    ] {
        *v = v.sqrt();
    }
    report.fracture_scale = f64::sqrt(frac_ex) + f64::sqrt(frac_src) + f64::sqrt(frac_grad);
    report.matrix_scale = f64::sqrt(mat_ex) + f64::sqrt(mat_src) + f64::sqrt(mat_grad);

    // facet flux continuity
    let seg_basis = crate::fem::SegBasis::new(k)?;
    let mut chi = Vec::new();
    for (f, facet) in mesh.facets.iter().enumerate() {
        let [p0, p1] = mesh.facet_points(f);
        let len = (p1 - p0).norm();
        let n = facet.normal;
        let ubar = layout.velocity_trace(f);
        let dual_pressure_free = |trace: Option<std::ops::Range<usize>>| {
            trace.is_some_and(|mut r| !r.any(|d| layout.is_essential(d)))
        };
        let (mut jump, mut jump_s, mut jump_d, mut jump_m) = (0.0, 0.0, 0.0, 0.0);
        for ([t, _], w) in seg.iter() {
            let ws = w * len;
            let x = p0 + (p1 - p0).scale(t);
            let trace_n = match &ubar {
                Some(r) => {
                    seg_basis.eval_into(t, &mut chi);
                    let v = &solution.values[r.clone()];
                    let nt = chi.len();
                    let ux: f64 = v[..nt].iter().zip(&chi).map(|(a, b)| a * b).sum();
                    let uy: f64 = v[nt..].iter().zip(&chi).map(|(a, b)| a * b).sum();
                    ux * n.x + uy * n.y
                }
                None => 0.0,
            };
            let side = |i: usize, matrix: bool, vb: &mut BasisValues| -> Result<f64> {
                let s = facet.sides[i].cell;
                cells.normal_flux(s, x, n.scale(facet.orientation(s)), matrix, vb)
            };
            match facet.class {
                FacetClass::InteriorS => {
                    let d = side(0, false, &mut vb)? + side(1, false, &mut vb)?;
                    jump += ws * d * d;
                }
                FacetClass::InteriorD => {
                    let d = side(0, false, &mut vb)? + side(1, false, &mut vb)?;
                    jump += ws * d * d;
                    let d = side(0, true, &mut vb)? + side(1, true, &mut vb)?;
                    jump_m += ws * d * d;
                }
                FacetClass::BoundaryS => {
                    let d = side(0, false, &mut vb)? - trace_n;
                    jump += ws * d * d;
                }
                FacetClass::BoundaryD => {
                    if dual_pressure_free(layout.fracture_pressure_trace(f)) {
                        let d = side(0, false, &mut vb)?;
                        jump += ws * d * d;
                    }
                    if dual_pressure_free(layout.matrix_pressure_trace(f)) {
                        let d = side(0, true, &mut vb)?;
                        jump_m += ws * d * d;
                    }
                }
                FacetClass::Interface => {
                    for s in &facet.sides {
                        // normal of the Stokes side throughout
                        let un = cells.normal_flux(s.cell, x, n, false, &mut vb)? - trace_n;
                        if mesh.cells[s.cell].subdomain == Subdomain::Stokes {
                            jump_s += ws * un * un;
                        } else {
                            jump_d += ws * un * un;
                            let um = cells.normal_flux(s.cell, x, n, true, &mut vb)?;
                            jump_m += ws * um * um;
                        }
                    }
                }
            }
        }
        report.velocity_jump = report.velocity_jump.max(jump.sqrt());
        report.interface_jump = report.interface_jump.max(jump_s.sqrt()).max(jump_d.sqrt());
        report.matrix_jump = report.matrix_jump.max(jump_m.sqrt());
    }
    Ok(report)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cellwise `L^2` projection coefficients onto the orthonormal pressure basis.
pub(crate) fn project(basis: &TriBasis, map: &AffineMap, rule: &crate::fem::QuadRule, g: Option<&ScalarFn>) -> Vec<f64> {
    let mut coef = vec![0.0; basis.dim()];
    let Some(g) = g else { return coef };
    for (xi, w) in rule.iter() {
        let v = g(map.map(xi));
        for (c, b) in coef.iter_mut().zip(basis.eval(xi).values) {
            // physical mass matrix of the orthonormal basis is det * I
            *c += w * v * b;
        }
    }
    coef
}
