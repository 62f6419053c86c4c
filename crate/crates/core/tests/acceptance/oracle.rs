//! Independent evaluation of the local bilinear forms on small random meshes.
//!
//! Geometry, quadrature and normals are recomputed here from the vertex
//! coordinates; only the reference bases are shared with the library, since
//! they define what a coefficient means.

use std::collections::HashMap;
use std::sync::Arc;

use dps_hdg::fem::{gauss_legendre, SegBasis, TriBasis};
use dps_hdg::forms::{element_system, facet_system, Coefficient, ElementSystem, PhysicalParams, Problem, SourceSet};
use dps_hdg::mesh::{Cell, FacetClass, Mesh, Point, Subdomain};
use dps_hdg::spaces::{BoundaryConditionSet, DiscretizationParams, DofLayout};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Desc {
    U { cell: usize, c: usize, a: usize },
    P { cell: usize, i: usize },
    Um { cell: usize, c: usize, a: usize },
    Pm { cell: usize, i: usize },
    Ubar { facet: usize, c: usize, j: usize },
    PbarS { facet: usize, j: usize },
    PbarD { facet: usize, j: usize },
    PbarM { facet: usize, j: usize },
    MeanP,
    MeanPm,
}

fn describe(mesh: &Mesh, layout: &DofLayout) -> HashMap<usize, Desc> {
    let nv = layout.velocity_dim();
    let mut map = HashMap::new();
    for cell in 0..mesh.num_cells() {
        for (l, d) in layout.velocity(cell).enumerate() {
            map.insert(d, Desc::U { cell, c: l / nv, a: l % nv });
        }
        for (i, d) in layout.pressure(cell).enumerate() {
            map.insert(d, Desc::P { cell, i });
        }
        if let Some(r) = layout.matrix_velocity(cell) {
            for (l, d) in r.enumerate() {
                map.insert(d, Desc::Um { cell, c: l / nv, a: l % nv });
            }
        }
        if let Some(r) = layout.matrix_pressure(cell) {
            for (i, d) in r.enumerate() {
                map.insert(d, Desc::Pm { cell, i });
            }
        }
    }
    let nt = layout.trace_dim();
    for facet in 0..mesh.facets.len() {
        if let Some(r) = layout.velocity_trace(facet) {
            for (l, d) in r.enumerate() {
                map.insert(d, Desc::Ubar { facet, c: l / nt, j: l % nt });
            }
        }
        let scalar = [
            (layout.stokes_pressure_trace(facet), 0),
            (layout.fracture_pressure_trace(facet), 1),
            (layout.matrix_pressure_trace(facet), 2),
        ];
        for (r, kind) in scalar {
            for (j, d) in r.into_iter().flatten().enumerate() {
                let desc = match kind {
                    0 => Desc::PbarS { facet, j },
                    1 => Desc::PbarD { facet, j },
                    _ => Desc::PbarM { facet, j },
                };
                map.insert(d, desc);
            }
        }
    }
    if let Some(d) = layout.mean_pressure_dof() {
        map.insert(d, Desc::MeanP);
    }
    if let Some(d) = layout.mean_matrix_pressure_dof() {
        map.insert(d, Desc::MeanPm);
    }
    map
}

struct Geo {
    v: [Point; 3],
    j: [[f64; 2]; 2],
    det: f64,
    diameter: f64,
}

impl Geo {
    fn new(mesh: &Mesh, cell: usize) -> Geo {
        let v = mesh.cells[cell].vertices.map(|i| mesh.points[i]);
        let j = [[v[1].x - v[0].x, v[2].x - v[0].x], [v[1].y - v[0].y, v[2].y - v[0].y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let len = |a: Point, b: Point| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
        let diameter = len(v[0], v[1]).max(len(v[1], v[2])).max(len(v[2], v[0]));
        Geo { v, j, det, diameter }
    }

    fn to_physical(&self, xi: [f64; 2]) -> Point {
        Point::new(
            self.v[0].x + self.j[0][0] * xi[0] + self.j[0][1] * xi[1],
            self.v[0].y + self.j[1][0] * xi[0] + self.j[1][1] * xi[1],
        )
    }

    fn to_reference(&self, x: Point) -> [f64; 2] {
        let (dx, dy) = (x.x - self.v[0].x, x.y - self.v[0].y);
        [
            (self.j[1][1] * dx - self.j[0][1] * dy) / self.det,
            (-self.j[1][0] * dx + self.j[0][0] * dy) / self.det,
        ]
    }

    /// Physical gradient from a reference gradient: solves `J^T g = g_ref`.
    fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            (self.j[1][1] * g[0] - self.j[1][0] * g[1]) / self.det,
            (-self.j[0][1] * g[0] + self.j[0][0] * g[1]) / self.det,
        ]
    }

    /// Outward unit normal of local edge `e` (opposite vertex `e`).
    fn outward_normal(&self, e: usize) -> [f64; 2] {
        let (a, b) = (self.v[(e + 1) % 3], self.v[(e + 2) % 3]);
        let (tx, ty) = (b.x - a.x, b.y - a.y);
        let len = (tx * tx + ty * ty).sqrt();
        [ty / len, -tx / len]
    }
}

/// Collapsed Gauss rule on the reference triangle.
fn triangle_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_legendre(n);
    let mut rule = Vec::with_capacity(n * n);
    for (s, ws) in x.iter().zip(&w) {
        for (t, wt) in x.iter().zip(&w) {
            rule.push(([*s, t * (1.0 - s)], ws * wt * (1.0 - s)));
        }
    }
    rule
}

/// Cell fields of each local dof at one point.
#[derive(Default, Clone, Copy)]
struct Vol {
    u: [f64; 2],
    du: [[f64; 2]; 2],
    p: f64,
    um: [f64; 2],
    dum: [[f64; 2]; 2],
    pm: f64,
    lam: f64,
    lam_m: f64,
}

/// Facet fields of each local dof at one point.
#[derive(Default, Clone, Copy)]
struct Tr {
    ubar: [f64; 2],
    ps: f64,
    pd: f64,
    pm: f64,
}

struct Bases {
    vel: TriBasis,
    pres: TriBasis,
    seg: SegBasis,
}

fn vol_values(descs: &[Desc], cell: usize, geo: &Geo, b: &Bases, x: Point) -> Vec<Vol> {
    let xi = geo.to_reference(x);
    let vb = b.vel.eval(xi);
    let pb = b.pres.eval(xi);
    descs
        .iter()
        .map(|d| {
            let mut v = Vol::default();
            match *d {
                Desc::U { cell: k, c, a } if k == cell => {
                    v.u[c] = vb.values[a];
                    v.du[c] = geo.gradient(vb.gradients[a]);
                }
                Desc::Um { cell: k, c, a } if k == cell => {
                    v.um[c] = vb.values[a];
                    v.dum[c] = geo.gradient(vb.gradients[a]);
                }
                Desc::P { cell: k, i } if k == cell => v.p = pb.values[i],
                Desc::Pm { cell: k, i } if k == cell => v.pm = pb.values[i],
                Desc::MeanP => v.lam = 1.0,
                Desc::MeanPm => v.lam_m = 1.0,
                _ => {}
            }
            v
        })
        .collect()
}

fn trace_values(descs: &[Desc], facet: usize, b: &Bases, t: f64) -> Vec<Tr> {
    let chi = b.seg.eval(t);
    descs
        .iter()
        .map(|d| {
            let mut v = Tr::default();
            match *d {
                Desc::Ubar { facet: f, c, j } if f == facet => v.ubar[c] = chi[j],
                Desc::PbarS { facet: f, j } if f == facet => v.ps = chi[j],
                Desc::PbarD { facet: f, j } if f == facet => v.pd = chi[j],
                Desc::PbarM { facet: f, j } if f == facet => v.pm = chi[j],
                _ => {}
            }
            v
        })
        .collect()
}

fn sym_grad(g: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn oracle_cell(problem: &Problem, descs: &[Desc], cell: usize, b: &Bases, npts: usize) -> (DMatrix<f64>, DVector<f64>) {
    let Problem {
        mesh,
        disc,
        params,
        sources,
        ..
    } = *problem;
    let n = descs.len();
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let geo = Geo::new(mesh, cell);
    let dual = mesh.cells[cell].subdomain == Subdomain::Dual;
    let mu = params.mu;
    let kf = params.kappa_f.at(cell);
    let km = params.kappa_m.at(cell);
    let ex = params.sigma * km;

    for (xi, w) in triangle_rule(npts) {
        let wq = w * geo.det;
        let x = geo.to_physical(xi);
        let vals = vol_values(descs, cell, &geo, b, x);
        for i in 0..n {
            let vi = &vals[i];
            let div_i = vi.du[0][0] + vi.du[1][1];
            let divm_i = vi.dum[0][0] + vi.dum[1][1];
            for j in 0..n {
                let vj = &vals[j];
                let div_j = vj.du[0][0] + vj.du[1][1];
                let divm_j = vj.dum[0][0] + vj.dum[1][1];
                let mut a = -vj.p * div_i - vi.p * div_j;
                if dual {
                    a += dot(vi.u, vj.u) / kf + dot(vi.um, vj.um) / km;
                    a += -vj.pm * divm_i - vi.pm * divm_j;
                    a -= ex * (vi.p - vi.pm) * (vj.p - vj.pm);
                    a += vi.lam_m * vj.pm + vj.lam_m * vi.pm;
                } else {
                    let (ei, ej) = (sym_grad(&vi.du), sym_grad(&vj.du));
                    let mut dd = 0.0;
                    for r in 0..2 {
                        for s in 0..2 {
                            dd += ei[r][s] * ej[r][s];
                        }
                    }
                    a += 2.0 * mu * dd;
                }
                a += vi.lam * vj.p + vj.lam * vi.p;
                m[(i, j)] += wq * a;
            }
            let mut f = 0.0;
            if dual {
                if let Some(s) = &sources.f_d {
                    f += dot(s(x), vi.u);
                }
                if let Some(s) = &sources.f_m {
                    f += dot(s(x), vi.um);
                }
                if let Some(s) = &sources.g {
                    f -= s(x) * vi.p;
                }
                if let Some(s) = &sources.g_m {
                    f -= s(x) * vi.pm;
                }
            } else if let Some(s) = &sources.f {
                f += dot(s(x), vi.u);
            }
            rhs[i] += wq * f;
        }
    }

    let penalty = 2.0 * disc.penalty * mu / geo.diameter;
    let (gx, gw) = gauss_legendre(npts);
    for e in 0..3 {
        let facet = mesh.cell_facets[cell][e];
        let nrm = geo.outward_normal(e);
        let (a, bpt) = (geo.v[(e + 1) % 3], geo.v[(e + 2) % 3]);
        let len = ((bpt.x - a.x).powi(2) + (bpt.y - a.y).powi(2)).sqrt();
        let [i0, _] = mesh.facets[facet].vertices;
        let start = mesh.points[i0];
        for (s, ws) in gx.iter().zip(&gw) {
            let x = Point::new(a.x + s * (bpt.x - a.x), a.y + s * (bpt.y - a.y));
            let t = ((x.x - start.x).powi(2) + (x.y - start.y).powi(2)).sqrt() / len;
            let wq = ws * len;
            let vals = vol_values(descs, cell, &geo, b, x);
            let trs = trace_values(descs, facet, b, t);
            let traction = |v: &Vol| {
                let eps = sym_grad(&v.du);
                [
                    2.0 * mu * (eps[0][0] * nrm[0] + eps[0][1] * nrm[1]),
                    2.0 * mu * (eps[1][0] * nrm[0] + eps[1][1] * nrm[1]),
                ]
            };
            for i in 0..n {
                let (vi, ti) = (&vals[i], &trs[i]);
                for j in 0..n {
                    let (vj, tj) = (&vals[j], &trs[j]);
                    let a = if dual {
                        tj.pd * dot(vi.u, nrm) + ti.pd * dot(vj.u, nrm) + tj.pm * dot(vi.um, nrm) + ti.pm * dot(vj.um, nrm)
                    } else {
                        let ji = [vi.u[0] - ti.ubar[0], vi.u[1] - ti.ubar[1]];
                        let jj = [vj.u[0] - tj.ubar[0], vj.u[1] - tj.ubar[1]];
                        -dot(traction(vi), jj) - dot(traction(vj), ji)
                            + penalty * dot(ji, jj)
                            + tj.ps * dot(vi.u, nrm)
                            + ti.ps * dot(vj.u, nrm)
                    };
                    m[(i, j)] += wq * a;
                }
            }
        }
    }
    (m, rhs)
}

fn oracle_facet(problem: &Problem, descs: &[Desc], facet: usize, b: &Bases, npts: usize) -> DMatrix<f64> {
    let mesh = problem.mesh;
    let fc = &mesh.facets[facet];
    let interface = fc.class == FacetClass::Interface;
    let stokes_side = fc
        .sides
        .iter()
        .find(|s| mesh.cells[s.cell].subdomain == Subdomain::Stokes)
        .expect("free-flow side");
    let nrm = Geo::new(mesh, stokes_side.cell).outward_normal(stokes_side.local_edge);
    let tan = [-nrm[1], nrm[0]];
    let slip = match fc.sides.iter().find(|s| mesh.cells[s.cell].subdomain == Subdomain::Dual) {
        Some(s) if interface => problem.params.alpha * problem.params.mu / problem.params.kappa_f.at(s.cell).sqrt(),
        _ => 0.0,
    };
    let [p0, p1] = fc.vertices.map(|v| mesh.points[v]);
    let len = ((p1.x - p0.x).powi(2) + (p1.y - p0.y).powi(2)).sqrt();
    let n = descs.len();
    let mut m = DMatrix::zeros(n, n);
    let (gx, gw) = gauss_legendre(npts);
    for (t, wt) in gx.iter().zip(&gw) {
        let wq = wt * len;
        let trs = trace_values(descs, facet, b, *t);
        for i in 0..n {
            let ti = &trs[i];
            for j in 0..n {
                let tj = &trs[j];
                let mut a = -(ti.ps * dot(tj.ubar, nrm) + tj.ps * dot(ti.ubar, nrm));
                if interface {
                    a += ti.pd * dot(tj.ubar, nrm) + tj.pd * dot(ti.ubar, nrm);
                    a += slip * dot(ti.ubar, tan) * dot(tj.ubar, tan);
                }
                m[(i, j)] += wq * a;
            }
        }
    }
    m
}

/// A free-flow and a porous triangle sharing one edge, with random shape,
/// orientation, vertex numbering and local edge numbering.
fn random_pair(rng: &mut ChaCha8Rng) -> Mesh {
    let mut jitter = |x: f64, y: f64| Point::new(x + rng.random_range(-0.2..0.2), y + rng.random_range(-0.2..0.2));
    let local = [jitter(0.0, 0.0), jitter(1.0, 0.0), jitter(0.5, 0.8), jitter(0.5, -0.8)];
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let scale = 10f64.powf(rng.random_range(-2.0..0.5));
    let (c, s) = (angle.cos(), angle.sin());
    let shift = Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let placed: Vec<Point> = local
        .iter()
        .map(|p| Point::new(shift.x + scale * (c * p.x - s * p.y), shift.y + scale * (s * p.x + c * p.y)))
        .collect();
    let mut perm = [0usize, 1, 2, 3];
    for i in (1..4).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut points = vec![Point::default(); 4];
    for (old, &new) in perm.iter().enumerate() {
        points[new] = placed[old];
    }
    let mut rotate = |v: [usize; 3]| {
        let r = rng.random_range(0..3);
        [v[r], v[(r + 1) % 3], v[(r + 2) % 3]]
    };
    let stokes = rotate([perm[0], perm[1], perm[2]]);
    let dual = rotate([perm[1], perm[0], perm[3]]);
    let mut cells = vec![
        Cell {
            vertices: stokes,
            subdomain: Subdomain::Stokes,
        },
        Cell {
            vertices: dual,
            subdomain: Subdomain::Dual,
        },
    ];
    if rng.random_bool(0.5) {
        cells.swap(0, 1);
    }
    Mesh::from_cells(points, cells).expect("valid pair")
}

fn quadratic(rng: &mut ChaCha8Rng) -> impl Fn(Point) -> f64 + Send + Sync + 'static {
    let a: [f64; 6] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
    move |p: Point| a[0] + a[1] * p.x + a[2] * p.y + a[3] * p.x * p.x + a[4] * p.x * p.y + a[5] * p.y * p.y
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn mismatch(ours: &ElementSystem, m: &DMatrix<f64>, rhs: Option<&DVector<f64>>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst = (&ours.matrix - m).amax() / scale;
    if let Some(r) = rhs {
        let s = r.amax().max(ours.rhs.amax());
        if s > 0.0 {
            worst = worst.max((&ours.rhs - r).amax() / s);
        }
    }
    worst
}

/// Largest relative mismatch over `cases` random pairs and the number of
/// local systems compared.
pub fn kernel_oracle(cases: usize, seed: u64) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..cases {
        let mesh = random_pair(&mut rng);
        let k = rng.random_range(1..=3);
        let disc = DiscretizationParams::with_penalty(k, rng.random_range(1.0..100.0)).unwrap();
        let mut bcs = BoundaryConditionSet::homogeneous();
        bcs.mean_pressure = rng.random_bool(0.5);
        bcs.mean_matrix_pressure = rng.random_bool(0.5);
        let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
        let params = PhysicalParams {
            mu: log_uniform(&mut rng, -3.0, 1.0),
            kappa_f: Coefficient::PerCell((0..2).map(|_| log_uniform(&mut rng, -3.0, 1.0)).collect()),
            kappa_m: Coefficient::PerCell((0..2).map(|_| log_uniform(&mut rng, -6.0, 0.0)).collect()),
            sigma: rng.random_range(0.05..2.0),
            alpha: rng.random_range(0.0..3.0),
        };
        let vector = |rng: &mut ChaCha8Rng| {
            let (a, b) = (quadratic(rng), quadratic(rng));
            Arc::new(move |p: Point| [a(p), b(p)]) as dps_hdg::spaces::VectorFn
        };
        let sources = SourceSet {
            f: Some(vector(&mut rng)),
            g: Some(Arc::new(quadratic(&mut rng))),
            f_d: Some(vector(&mut rng)),
            f_m: Some(vector(&mut rng)),
            g_m: Some(Arc::new(quadratic(&mut rng))),
        };
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        let bases = Bases {
            vel: TriBasis::new(k).unwrap(),
            pres: TriBasis::new(k - 1).unwrap(),
            seg: SegBasis::new(k).unwrap(),
        };
        let map = describe(&mesh, &layout);
        let npts = k + 3;
        for cell in 0..mesh.num_cells() {
            let sys = element_system(&problem, cell).unwrap();
            let descs: Vec<Desc> = sys.dofs.iter().map(|d| map[d]).collect();
            let (m, rhs) = oracle_cell(&problem, &descs, cell, &bases, npts);
            worst = worst.max(mismatch(&sys, &m, Some(&rhs)));
            compared += 1;
        }
        for facet in 0..mesh.facets.len() {
            if let Some(sys) = facet_system(&problem, facet).unwrap() {
                let descs: Vec<Desc> = sys.dofs.iter().map(|d| map[d]).collect();
                let m = oracle_facet(&problem, &descs, facet, &bases, npts);
                worst = worst.max(mismatch(&sys, &m, None));
                compared += 1;
            }
        }
    }
    (worst, compared)
}
