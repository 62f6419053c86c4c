use std::fmt::Write as _;

use super::exact::ExactSolution;
use crate::error::Result;
use crate::fem::{quad_seg, quad_tri, AffineMap, BasisValues, SegBasis, TriBasis};
use crate::mesh::{Mesh, Point, Subdomain};
use crate::postproc::project;
use crate::spaces::{DofLayout, FieldSolution, ScalarFn};

/// Error norms of one refinement level, all `L^2` over the named region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub cells: usize,
    pub h_max: f64,
    pub stokes_u: f64,
    pub stokes_p: f64,
    /// Broken `H^1` seminorm of the velocity error.
    pub stokes_grad_u: f64,
    pub stokes_div_uh: f64,
    pub fracture_u: f64,
    pub fracture_p: f64,
    pub fracture_div_u: f64,
    pub phi: f64,
    pub matrix_u: f64,
    pub matrix_p: f64,
    pub matrix_div_u: f64,
    pub phi_m: f64,
}

/// Every column of [`ErrorReport`] except the mesh data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    StokesU,
    StokesP,
    StokesGradU,
    StokesDivUh,
    FractureU,
    FractureP,
    FractureDivU,
    Phi,
    MatrixU,
    MatrixP,
    MatrixDivU,
    PhiM,
}

impl Norm {
    pub const ALL: [Norm; 12] = [
        Norm::StokesU,
        Norm::StokesP,
        Norm::StokesGradU,
        Norm::StokesDivUh,
        Norm::FractureU,
        Norm::FractureP,
        Norm::FractureDivU,
        Norm::Phi,
        Norm::MatrixU,
        Norm::MatrixP,
        Norm::MatrixDivU,
        Norm::PhiM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Norm::StokesU => "stokes_e_u",
            Norm::StokesP => "stokes_e_p",
            Norm::StokesGradU => "stokes_grad_e_u",
            Norm::StokesDivUh => "stokes_div_u_h",
            Norm::FractureU => "fracture_e_u",
            Norm::FractureP => "fracture_e_p",
            Norm::FractureDivU => "fracture_div_e_u",
            Norm::Phi => "fracture_phi",
            Norm::MatrixU => "matrix_e_u",
            Norm::MatrixP => "matrix_e_p",
            Norm::MatrixDivU => "matrix_div_e_u",
            Norm::PhiM => "matrix_phi",
        }
    }
}

impl ErrorReport {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::StokesU => self.stokes_u,
            Norm::StokesP => self.stokes_p,
            Norm::StokesGradU => self.stokes_grad_u,
            Norm::StokesDivUh => self.stokes_div_uh,
            Norm::FractureU => self.fracture_u,
            Norm::FractureP => self.fracture_p,
            Norm::FractureDivU => self.fracture_div_u,
            Norm::Phi => self.phi,
            Norm::MatrixU => self.matrix_u,
            Norm::MatrixP => self.matrix_p,
            Norm::MatrixDivU => self.matrix_div_u,
            Norm::PhiM => self.phi_m,
        }
    }

    pub fn csv_header() -> String {
        let mut h = String::from("cells,h_max");
        for n in Norm::ALL {
            h.push(',');
            h.push_str(n.name());
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!("{},{:e}", self.cells, self.h_max);
        for n in Norm::ALL {
            let _ = write!(row, ",{:.6e}", self.get(n));
        }
        row
    }
}

/// Errors against the manufactured solution by quadrature of degree `2k + 2`.
/// The two balance residuals use the discrete fields and the projected mass
/// sources only.
pub fn compute_errors(
    solution: &FieldSolution,
    exact: &ExactSolution,
    mesh: &Mesh,
    layout: &DofLayout,
) -> Result<ErrorReport> {
    let k = layout.degree();
    let vel = TriBasis::new(k)?;
    let pres = TriBasis::new(k - 1)?;
    let rule = quad_tri(2 * k + 2)?;
    let exchange = exact.params.sigma * exact.params.kappa_m;
    let e = *exact;
    let g: ScalarFn = std::sync::Arc::new(move |p| e.fracture_mass_source(p));
    let g_m: ScalarFn = std::sync::Arc::new(move |p| e.matrix_mass_source(p));

    let mut sq = [0.0f64; 12];
    let mut vb = BasisValues::default();
    let mut pb = BasisValues::default();
    let mut grads = Vec::new();
    for c in 0..mesh.num_cells() {
        let map = AffineMap::new(mesh.cell_points(c))?;
        let dual = mesh.cells[c].subdomain == Subdomain::Dual;
        let (pg, pgm) = if dual {
            (
                project(&pres, &map, &rule, Some(&g)),
                project(&pres, &map, &rule, Some(&g_m)),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        for (xi, w) in rule.iter() {
            let wq = w * map.det;
            let x = map.map(xi);
            vel.eval_into(xi, &mut vb);
            pres.eval_into(xi, &mut pb);
            grads.clear();
            grads.extend(vb.gradients.iter().map(|g| map.push_gradient(*g)));
            let u = solution.vector_at(layout.velocity(c), &vb.values);
            let gu = solution.vector_gradient_at(layout.velocity(c), &grads);
            let p = solution.scalar_at(layout.pressure(c), &pb.values);
            let div = gu[0][0] + gu[1][1];
            let sq2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
            if !dual {
                let ge = exact.stokes_velocity_gradient(x);
                sq[0] += wq * sq2(u, exact.stokes_velocity(x));
                sq[1] += wq * (p - exact.stokes_pressure(x)).powi(2);
                sq[2] += wq * (0..2).map(|i| sq2(gu[i], ge[i])).sum::<f64>();
                sq[3] += wq * div * div;
                continue;
            }
            let um_dofs = layout.matrix_velocity(c).expect("porous cell");
            let um = solution.vector_at(um_dofs.clone(), &vb.values);
            let gum = solution.vector_gradient_at(um_dofs, &grads);
            let div_m = gum[0][0] + gum[1][1];
            let pm = solution.scalar_at(layout.matrix_pressure(c).expect("porous cell"), &pb.values);
            let gd = exact.fracture_velocity_gradient(x);
            let gm = exact.matrix_velocity_gradient(x);
            let proj = |coef: &[f64]| coef.iter().zip(&pb.values).map(|(a, b)| a * b).sum::<f64>();
            sq[4] += wq * sq2(u, exact.fracture_velocity(x));
            sq[5] += wq * (p - exact.fracture_pressure(x)).powi(2);
            sq[6] += wq * (div - gd[0][0] - gd[1][1]).powi(2);
            sq[7] += wq * (exchange * (p - pm) + div - proj(&pg)).powi(2);
            sq[8] += wq * sq2(um, exact.matrix_velocity(x));
            sq[9] += wq * (pm - exact.matrix_pressure(x)).powi(2);
            sq[10] += wq * (div_m - gm[0][0] - gm[1][1]).powi(2);
            sq[11] += wq * (exchange * (pm - p) + div_m - proj(&pgm)).powi(2);
        }
    }
    let n = sq.map(f64::sqrt);
    Ok(ErrorReport {
        cells: mesh.num_cells(),
        h_max: mesh.h_max,
        stokes_u: n[0],
        stokes_p: n[1],
        stokes_grad_u: n[2],
        stokes_div_uh: n[3],
        fracture_u: n[4],
        fracture_p: n[5],
        fracture_div_u: n[6],
        phi: n[7],
        matrix_u: n[8],
        matrix_p: n[9],
        matrix_div_u: n[10],
        phi_m: n[11],
    })
}

/// Cellwise and facetwise `L^2` projections of the manufactured fields onto
/// the discrete spaces. Mean-value multipliers are zero; essential DOFs keep
/// the layout's boundary data.
pub fn interpolate(exact: &ExactSolution, mesh: &Mesh, layout: &DofLayout) -> Result<FieldSolution> {
    let k = layout.degree();
    let vel = TriBasis::new(k)?;
    let pres = TriBasis::new(k - 1)?;
    let seg = SegBasis::new(k)?;
    let rule = quad_tri(2 * k + 2)?;
    let seg_rule = quad_seg(2 * k + 2)?;
    let mut out = FieldSolution::zeros(layout);
    let nv = layout.velocity_dim();
    let nt = layout.trace_dim();

    let put_vector = |out: &mut FieldSolution, start: usize, n: usize, coef: &[[f64; 2]]| {
        for (a, v) in coef.iter().enumerate() {
            out.values[start + a] = v[0];
            out.values[start + n + a] = v[1];
        }
    };
    for c in 0..mesh.num_cells() {
        let map = AffineMap::new(mesh.cell_points(c))?;
        let dual = mesh.cells[c].subdomain == Subdomain::Dual;
        let mut u = vec![[0.0; 2]; nv];
        let mut um = vec![[0.0; 2]; nv];
        let mut p = vec![0.0; pres.dim()];
        let mut pm = vec![0.0; pres.dim()];
        for (xi, w) in rule.iter() {
            let x = map.map(xi);
            let phi = vel.eval(xi).values;
            let psi = pres.eval(xi).values;
            let (ue, pe) = if dual {
                (exact.fracture_velocity(x), exact.fracture_pressure(x))
            } else {
                (exact.stokes_velocity(x), exact.stokes_pressure(x))
            };
            for a in 0..nv {
                u[a][0] += w * ue[0] * phi[a];
                u[a][1] += w * ue[1] * phi[a];
            }
            for (i, s) in psi.iter().enumerate() {
                p[i] += w * pe * s;
            }
            if dual {
                let v = exact.matrix_velocity(x);
                let q = exact.matrix_pressure(x);
                for a in 0..nv {
                    um[a][0] += w * v[0] * phi[a];
                    um[a][1] += w * v[1] * phi[a];
                }
                for (i, s) in psi.iter().enumerate() {
                    pm[i] += w * q * s;
                }
            }
        }
        put_vector(&mut out, layout.velocity(c).start, nv, &u);
        out.values[layout.pressure(c)].copy_from_slice(&p);
        if dual {
            put_vector(&mut out, layout.matrix_velocity(c).expect("porous cell").start, nv, &um);
            out.values[layout.matrix_pressure(c).expect("porous cell")].copy_from_slice(&pm);
        }
    }

    let mut chi = Vec::new();
    for f in 0..mesh.facets.len() {
        let [p0, p1] = mesh.facet_points(f);
        let at = |t: f64| -> Point { p0 + (p1 - p0).scale(t) };
        let mut project_scalar = |out: &mut FieldSolution, dofs: std::ops::Range<usize>, g: &dyn Fn(Point) -> f64| {
            let mut coef = vec![0.0; nt];
            for ([t, _], w) in seg_rule.iter() {
                seg.eval_into(t, &mut chi);
                let v = g(at(t));
                for j in 0..nt {
                    coef[j] += w * v * chi[j];
                }
            }
            out.values[dofs].copy_from_slice(&coef);
        };
        if let Some(r) = layout.velocity_trace(f) {
            let start = r.start;
            project_scalar(&mut out, start..start + nt, &|x| exact.stokes_velocity(x)[0]);
            project_scalar(&mut out, start + nt..start + 2 * nt, &|x| exact.stokes_velocity(x)[1]);
        }
        if let Some(r) = layout.stokes_pressure_trace(f) {
            project_scalar(&mut out, r, &|x| exact.stokes_pressure(x));
        }
        if let Some(r) = layout.fracture_pressure_trace(f) {
            project_scalar(&mut out, r, &|x| exact.fracture_pressure(x));
        }
        if let Some(r) = layout.matrix_pressure_trace(f) {
            project_scalar(&mut out, r, &|x| exact.matrix_pressure(x));
        }
    }
    for d in layout.essential_dofs() {
        out.values[d] = layout.essential_value(d);
    }
    Ok(out)
}
