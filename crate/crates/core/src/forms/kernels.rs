use nalgebra::{DMatrix, DVector};

use super::Problem;
use crate::error::Result;
use crate::fem::{quad_seg, quad_tri, strain, AffineMap, BasisValues, QuadRule, SegBasis, TriBasis};
use crate::mesh::{FacetClass, Subdomain};

/// Dense local system over a list of global DOFs. The first `n_interior`
/// entries are cell unknowns, the rest live on facets (or are mean-value
/// multipliers).
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub dofs: Vec<usize>,
    pub n_interior: usize,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl ElementSystem {
    fn new(dofs: Vec<usize>, n_interior: usize) -> Self {
        let n = dofs.len();
        ElementSystem {
            dofs,
            n_interior,
            matrix: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
        }
    }

    /// Adds `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.matrix[(i, j)] += v;
        if i != j {
            self.matrix[(j, i)] += v;
        }
    }
}

/// Reference data shared by all cells of one problem.
pub(crate) struct Reference {
    pub vel: TriBasis,
    pub seg: SegBasis,
    pub tri_rule: QuadRule,
    pub seg_rule: QuadRule,
    vel_at_quad: Vec<BasisValues>,
    pres_at_quad: Vec<BasisValues>,
}

impl Reference {
    pub fn new(degree: usize) -> Result<Self> {
        let vel = TriBasis::new(degree)?;
        let pres = TriBasis::new(degree - 1)?;
        let seg = SegBasis::new(degree)?;
        let tri_rule = quad_tri(2 * degree + 2)?;
        let seg_rule = quad_seg(2 * degree + 2)?;
        let vel_at_quad = tri_rule.points.iter().map(|&p| vel.eval(p)).collect();
        let pres_at_quad = tri_rule.points.iter().map(|&p| pres.eval(p)).collect();
        Ok(Reference {
            vel,
            seg,
            tri_rule,
            seg_rule,
            vel_at_quad,
            pres_at_quad,
        })
    }
}

/// Local matrices of one cell with the facet terms of its boundary.
pub fn element_system(problem: &Problem, cell: usize) -> Result<ElementSystem> {
    let reference = Reference::new(problem.layout.degree())?;
    element_system_with(problem, &reference, cell)
}

/// Facet-only couplings (slip and trace-normal terms), `None` on facets that
/// carry none.
pub fn facet_system(problem: &Problem, facet: usize) -> Result<Option<ElementSystem>> {
    let reference = Reference::new(problem.layout.degree())?;
    Ok(facet_system_with(problem, &reference, facet))
}

struct Offsets {
    u: usize,
    p: usize,
    um: usize,
    pm: usize,
    /// velocity trace block per local edge (Stokes cells)
    ubar: [usize; 3],
    /// first pressure trace per local edge: `p_bar^s` or `p_bar^d`
    pbar: [usize; 3],
    /// matrix pressure trace per local edge (dual cells)
    pbar_m: [usize; 3],
}

pub(crate) fn element_system_with(problem: &Problem, r: &Reference, cell: usize) -> Result<ElementSystem> {
    let Problem {
        mesh,
        layout,
        disc,
        params,
        sources,
    } = *problem;
    let nv = layout.velocity_dim();
    let np = layout.pressure_dim();
    let nt = layout.trace_dim();
    let dual = mesh.cells[cell].subdomain == Subdomain::Dual;
    let facets = mesh.cell_facets[cell];

    let mut dofs: Vec<usize> = layout.velocity(cell).chain(layout.pressure(cell)).collect();
    let mut off = Offsets {
        u: 0,
        p: 2 * nv,
        um: 0,
        pm: 0,
        ubar: [0; 3],
        pbar: [0; 3],
        pbar_m: [0; 3],
    };
    if dual {
        off.um = dofs.len();
        dofs.extend(layout.matrix_velocity(cell).expect("dual cell"));
        off.pm = dofs.len();
        dofs.extend(layout.matrix_pressure(cell).expect("dual cell"));
    }
    let n_interior = dofs.len();
    if dual {
        for e in 0..3 {
            off.pbar[e] = dofs.len();
            dofs.extend(layout.fracture_pressure_trace(facets[e]).expect("porous facet"));
        }
        for e in 0..3 {
            off.pbar_m[e] = dofs.len();
            dofs.extend(layout.matrix_pressure_trace(facets[e]).expect("porous facet"));
        }
    } else {
        for e in 0..3 {
            off.ubar[e] = dofs.len();
            dofs.extend(layout.velocity_trace(facets[e]).expect("free-flow facet"));
        }
        for e in 0..3 {
            off.pbar[e] = dofs.len();
            dofs.extend(layout.stokes_pressure_trace(facets[e]).expect("free-flow facet"));
        }
    }
    let mean_p = layout.mean_pressure_dof().map(|d| {
        dofs.push(d);
        dofs.len() - 1
    });
    let mean_pm = if dual {
        layout.mean_matrix_pressure_dof().map(|d| {
            dofs.push(d);
            dofs.len() - 1
        })
    } else {
        None
    };
    let mut sys = ElementSystem::new(dofs, n_interior);

    let map = AffineMap::new(mesh.cell_points(cell))?;
    let mu = params.mu;
    let kf = params.kappa_f.at(cell);
    let km = params.kappa_m.at(cell);
    let exchange = params.sigma * km;
    let mut grads = vec![[0.0; 2]; nv];

    // volume terms
    for ((xi, w), (vb, pb)) in r.tri_rule.iter().zip(r.vel_at_quad.iter().zip(&r.pres_at_quad)) {
        let wq = w * map.det;
        let x = map.map(xi);
        for (g, rg) in grads.iter_mut().zip(&vb.gradients) {
            *g = map.push_gradient(*rg);
        }
        let phi = &vb.values;
        let psi = &pb.values;

        if dual {
            for c in 0..2 {
                for a in 0..nv {
                    for b in 0..=a {
                        let m = wq * phi[a] * phi[b];
                        sys.add_sym(off.u + c * nv + a, off.u + c * nv + b, m / kf);
                        sys.add_sym(off.um + c * nv + a, off.um + c * nv + b, m / km);
                    }
                }
            }
            for i in 0..np {
                for j in 0..=i {
                    let m = wq * exchange * psi[i] * psi[j];
                    sys.add_sym(off.p + i, off.p + j, -m);
                    sys.add_sym(off.pm + i, off.pm + j, -m);
                    sys.matrix[(off.p + i, off.pm + j)] += m;
                    sys.matrix[(off.pm + j, off.p + i)] += m;
                    if i != j {
                        sys.matrix[(off.p + j, off.pm + i)] += m;
                        sys.matrix[(off.pm + i, off.p + j)] += m;
                    }
                }
            }
        } else {
            for c in 0..2 {
                for a in 0..nv {
                    let ea = strain(c, grads[a]);
                    for d in 0..2 {
                        for b in 0..nv {
                            let (i, j) = (off.u + c * nv + a, off.u + d * nv + b);
                            if j > i {
                                continue;
                            }
                            let eb = strain(d, grads[b]);
                            let dd = ea[0] * eb[0] + 2.0 * ea[1] * eb[1] + ea[2] * eb[2];
                            sys.add_sym(i, j, wq * 2.0 * mu * dd);
                        }
                    }
                }
            }
        }

        // -(q, div v) in both regions, matrix system too
        for i in 0..np {
            for c in 0..2 {
                for a in 0..nv {
                    let v = -wq * psi[i] * grads[a][c];
                    sys.add_sym(off.p + i, off.u + c * nv + a, v);
                    if dual {
                        sys.add_sym(off.pm + i, off.um + c * nv + a, v);
                    }
                }
            }
        }

        // loads
        let fu = if dual { &sources.f_d } else { &sources.f };
        if let Some(f) = fu {
            let fv = f(x);
            for c in 0..2 {
                for a in 0..nv {
                    sys.rhs[off.u + c * nv + a] += wq * fv[c] * phi[a];
                }
            }
        }
        if dual {
            if let Some(f) = &sources.f_m {
                let fv = f(x);
                for c in 0..2 {
                    for a in 0..nv {
                        sys.rhs[off.um + c * nv + a] += wq * fv[c] * phi[a];
                    }
                }
            }
            if let Some(g) = &sources.g {
                let gv = g(x);
                for i in 0..np {
                    sys.rhs[off.p + i] -= wq * gv * psi[i];
                }
            }
            if let Some(g) = &sources.g_m {
                let gv = g(x);
                for i in 0..np {
                    sys.rhs[off.pm + i] -= wq * gv * psi[i];
                }
            }
        }

        // mean-value multipliers
        if let Some(l) = mean_p {
            for i in 0..np {
                sys.add_sym(l, off.p + i, wq * psi[i]);
            }
        }
        if let Some(l) = mean_pm {
            for i in 0..np {
                sys.add_sym(l, off.pm + i, wq * psi[i]);
            }
        }
    }

    // boundary of the cell
    let penalty = 2.0 * disc.penalty * mu / mesh.diameters[cell];
    let mut chi = Vec::with_capacity(nt);
    let mut vb = BasisValues::default();
    for (e, &f) in facets.iter().enumerate() {
        let facet = &mesh.facets[f];
        let [p0, p1] = mesh.facet_points(f);
        let len = (p1 - p0).norm();
        let n = facet.normal.scale(facet.orientation(cell));
        let n = [n.x, n.y];
        for ([t, _], w) in r.seg_rule.iter() {
            let ws = w * len;
            let x = p0 + (p1 - p0).scale(t);
            r.vel.eval_into(map.inverse(x), &mut vb);
            r.seg.eval_into(t, &mut chi);
            for (g, rg) in grads.iter_mut().zip(&vb.gradients) {
                *g = map.push_gradient(*rg);
            }
            let phi = &vb.values;

            // <p_bar, v.n> for the fracture (or Stokes) and matrix systems
            for j in 0..nt {
                for c in 0..2 {
                    for a in 0..nv {
                        let v = ws * chi[j] * phi[a] * n[c];
                        sys.add_sym(off.pbar[e] + j, off.u + c * nv + a, v);
                        if dual {
                            sys.add_sym(off.pbar_m[e] + j, off.um + c * nv + a, v);
                        }
                    }
                }
            }
            if dual {
                continue;
            }

            // traction 2 mu eps(phi_a e_c) n
            let traction = |c: usize, a: usize| -> [f64; 2] {
                let s = strain(c, grads[a]);
                [2.0 * mu * (s[0] * n[0] + s[1] * n[1]), 2.0 * mu * (s[1] * n[0] + s[2] * n[1])]
            };
            for c in 0..2 {
                for a in 0..nv {
                    let i = off.u + c * nv + a;
                    let ta = traction(c, a);
                    // u-u: consistency, symmetry and penalty
                    for d in 0..2 {
                        for b in 0..nv {
                            let j = off.u + d * nv + b;
                            if j > i {
                                continue;
                            }
                            let tb = traction(d, b);
                            let mut v = -ta[d] * phi[b] - tb[c] * phi[a];
                            if c == d {
                                v += penalty * phi[a] * phi[b];
                            }
                            sys.add_sym(i, j, ws * v);
                        }
                    }
                    // u-u_bar
                    for d in 0..2 {
                        for jj in 0..nt {
                            let j = off.ubar[e] + d * nt + jj;
                            let mut v = ta[d] * chi[jj];
                            if c == d {
                                v -= penalty * phi[a] * chi[jj];
                            }
                            sys.add_sym(i, j, ws * v);
                        }
                    }
                }
            }
            for c in 0..2 {
                for i in 0..nt {
                    for j in 0..=i {
                        sys.add_sym(
                            off.ubar[e] + c * nt + i,
                            off.ubar[e] + c * nt + j,
                            ws * penalty * chi[i] * chi[j],
                        );
                    }
                }
            }
        }
    }
    Ok(sys)
}

/// Trace-only terms: the slip law and the trace normal couplings on interface
/// facets, and the Stokes trace normal coupling on free-flow boundary facets.
pub(crate) fn facet_system_with(problem: &Problem, r: &Reference, facet: usize) -> Option<ElementSystem> {
    let Problem {
        mesh,
        layout,
        params,
        ..
    } = *problem;
    let fc = &mesh.facets[facet];
    if !matches!(fc.class, FacetClass::Interface | FacetClass::BoundaryS) {
        return None;
    }
    let nt = layout.trace_dim();
    let interface = fc.class == FacetClass::Interface;
    let mut dofs: Vec<usize> = layout.velocity_trace(facet)?.collect();
    let ps = dofs.len();
    dofs.extend(layout.stokes_pressure_trace(facet)?);
    let pd = dofs.len();
    if interface {
        dofs.extend(layout.fracture_pressure_trace(facet)?);
    }
    let mut sys = ElementSystem::new(dofs, 0);

    let [p0, p1] = mesh.facet_points(facet);
    let len = (p1 - p0).norm();
    // stored normal points out of the free-flow side
    let n = [fc.normal.x, fc.normal.y];
    let tangent = [-n[1], n[0]];
    let slip = if interface {
        let porous = fc
            .sides
            .iter()
            .find(|s| mesh.cells[s.cell].subdomain == Subdomain::Dual)
            .expect("interface has a porous side")
            .cell;
        params.alpha * params.mu / params.kappa_f.at(porous).sqrt()
    } else {
        0.0
    };
    let mut chi = Vec::with_capacity(nt);
    for ([t, _], w) in r.seg_rule.iter() {
        let ws = w * len;
        r.seg.eval_into(t, &mut chi);
        for i in 0..nt {
            for j in 0..nt {
                let m = ws * chi[i] * chi[j];
                for c in 0..2 {
                    // -<q_bar^s, v_bar.n^s>, +<q_bar^d, v_bar.n^s>
                    sys.add_sym(ps + i, c * nt + j, -m * n[c]);
                    if interface {
                        sys.add_sym(pd + i, c * nt + j, m * n[c]);
                        for d in 0..2 {
                            sys.matrix[(c * nt + i, d * nt + j)] += slip * m * tangent[c] * tangent[d];
                        }
                    }
                }
            }
        }
    }
    Some(sys)
}

/// Point on a facet at trace parameter `t`.
#[cfg(test)]
fn facet_point(mesh: &crate::mesh::Mesh, facet: usize, t: f64) -> crate::mesh::Point {
    let [p0, p1] = mesh.facet_points(facet);
    p0 + (p1 - p0).scale(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Coefficient, PhysicalParams, SourceSet};
    use crate::mesh::{build_structured, Geometry, Mesh, Point};
    use crate::spaces::{BoundaryConditionSet, DiscretizationParams, DofLayout};

    fn params() -> PhysicalParams {
        PhysicalParams {
            mu: 0.7,
            kappa_f: Coefficient::Constant(0.3),
            kappa_m: Coefficient::Constant(0.05),
            sigma: 0.9,
            alpha: 1.3,
        }
    }

    fn setup(k: usize) -> (Mesh, DiscretizationParams, DofLayout) {
        let mesh = build_structured(Geometry::UnitSquareSplit, 4).unwrap();
        let disc = DiscretizationParams::new(k).unwrap();
        let layout = DofLayout::build(&mesh, &disc, &BoundaryConditionSet::homogeneous()).unwrap();
        (mesh, disc, layout)
    }

    #[test]
    fn element_matrices_are_symmetric() {
        for k in 1..=3 {
            let (mesh, disc, layout) = setup(k);
            let params = params();
            let sources = SourceSet::default();
            let problem = Problem {
                mesh: &mesh,
                layout: &layout,
                disc: &disc,
                params: &params,
                sources: &sources,
            };
            for c in 0..mesh.num_cells() {
                let s = element_system(&problem, c).unwrap();
                let m = &s.matrix;
                assert!((m - m.transpose()).amax() < 1e-12 * m.amax(), "k={k} cell={c}");
            }
            for f in 0..mesh.facets.len() {
                if let Some(s) = facet_system(&problem, f).unwrap() {
                    assert!((&s.matrix - s.matrix.transpose()).amax() < 1e-14);
                }
            }
        }
    }

    /// Coefficients of the L2 projection of `g` onto the cell velocity basis.
    fn project(mesh: &Mesh, r: &Reference, cell: usize, g: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let map = AffineMap::new(mesh.cell_points(cell)).unwrap();
        let nv = r.vel.dim();
        let mut out = vec![0.0; 2 * nv];
        for (xi, w) in r.tri_rule.iter() {
            let v = g(map.map(xi));
            let b = r.vel.eval(xi);
            for c in 0..2 {
                for a in 0..nv {
                    out[c * nv + a] += w * v[c] * b.values[a];
                }
            }
        }
        out
    }

    #[test]
    fn rigid_motion_is_in_the_kernel_of_the_stokes_block() {
        // u = (1 - y, x) with u_bar = trace of u gives zero viscous action
        let k = 2;
        let (mesh, disc, layout) = setup(k);
        let params = params();
        let sources = SourceSet::default();
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        let r = Reference::new(k).unwrap();
        let rigid = |p: Point| [1.0 - p.y, p.x];
        let cell = mesh.subdomain_cells(Subdomain::Stokes).next().unwrap();
        let sys = element_system_with(&problem, &r, cell).unwrap();
        let nv = layout.velocity_dim();
        let nt = layout.trace_dim();
        let mut x = DVector::zeros(sys.dofs.len());
        // map of local positions by global dof
        let u = project(&mesh, &r, cell, rigid);
        for (i, v) in u.iter().enumerate() {
            x[i] = *v;
        }
        for (e, &f) in mesh.cell_facets[cell].iter().enumerate() {
            let start = 2 * nv + layout.pressure_dim() + e * 2 * nt;
            for ([t, _], w) in r.seg_rule.iter() {
                let chi = r.seg.eval(t);
                let g = rigid(facet_point(&mesh, f, t));
                for j in 0..nt {
                    x[start + j] += w * g[0] * chi[j];
                    x[start + nt + j] += w * g[1] * chi[j];
                }
            }
        }
        let y = &sys.matrix * &x;
        // velocity and velocity-trace rows only see the viscous block
        let vel_rows = (0..2 * nv).chain(2 * nv + layout.pressure_dim()..2 * nv + layout.pressure_dim() + 6 * nt);
        for i in vel_rows {
            assert!(y[i].abs() < 1e-12, "row {i}: {}", y[i]);
        }
    }

    #[test]
    fn divergence_coupling_matches_flux() {
        // for constant q the pressure rows give -(1, div u) + <1, u.n> = 0
        let k = 2;
        let (mesh, disc, layout) = setup(k);
        let params = params();
        let sources = SourceSet::default();
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        let r = Reference::new(k).unwrap();
        let field = |p: Point| [p.x * p.x + 0.5 * p.y, p.x * p.y - p.y * p.y];
        for cell in 0..mesh.num_cells() {
            let sys = element_system_with(&problem, &r, cell).unwrap();
            let nv = layout.velocity_dim();
            let np = layout.pressure_dim();
            let nt = layout.trace_dim();
            let u = project(&mesh, &r, cell, field);
            let pbar_start = if mesh.cells[cell].subdomain == Subdomain::Dual {
                4 * nv + 2 * np
            } else {
                2 * nv + np + 6 * nt
            };
            // constant q = 1 on the cell and on each facet
            let q0 = 1.0 / TriBasis::new(layout.degree() - 1).unwrap().eval([0.0, 0.0]).values[0];
            let mut total = q0 * (0..2 * nv).map(|j| sys.matrix[(2 * nv, j)] * u[j]).sum::<f64>();
            for e in 0..3 {
                let row = pbar_start + e * nt;
                total += (0..2 * nv).map(|j| sys.matrix[(row, j)] * u[j]).sum::<f64>();
            }
            assert!(total.abs() < 1e-12, "cell {cell}: {total}");
        }
    }
}
