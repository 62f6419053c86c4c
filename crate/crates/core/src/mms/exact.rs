use std::f64::consts::PI;
use std::sync::Arc;

use crate::forms::SourceSet;
use crate::mesh::Point;

/// `g[c][d] = d f_c / d x_d`.
pub type Gradient = [[f64; 2]; 2];
/// `h[c][d][e] = d^2 f_c / d x_d d x_e`.
pub type Hessian = [[[f64; 2]; 2]; 2];

/// Parameters the manufactured fields depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsParams {
    pub mu: f64,
    pub kappa_f: f64,
    pub kappa_m: f64,
    pub sigma: f64,
}

impl Default for MmsParams {
    fn default() -> Self {
        MmsParams {
            mu: 1.0,
            kappa_f: 1.0,
            kappa_m: 1.0,
            sigma: 0.5,
        }
    }
}

/// Closed-form manufactured solution on the unit square split at `y = 1/2`,
/// free flow on top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub params: MmsParams,
}

// u^s_x = -A sin(pi x) e^{y/2}; divergence-free only for A = 1 / (2 pi^2)
const A: f64 = 1.0 / (2.0 * PI * PI);

struct Trig {
    s: f64,
    c: f64,
    e: f64,
}

fn trig(p: Point) -> Trig {
    Trig {
        s: (PI * p.x).sin(),
        c: (PI * p.x).cos(),
        e: (0.5 * p.y).exp(),
    }
}

impl ExactSolution {
    pub fn new(params: MmsParams) -> Self {
        ExactSolution { params }
    }

    /// Slip coefficient that makes the tangential interface condition exact.
    pub fn alpha(&self) -> f64 {
        self.params.kappa_f.sqrt() * (1.0 + 4.0 * PI * PI) / 2.0
    }

    pub fn stokes_velocity(&self, p: Point) -> [f64; 2] {
        let t = trig(p);
        [-A * t.s * t.e, t.c * t.e / PI]
    }

    pub fn stokes_velocity_gradient(&self, p: Point) -> Gradient {
        let t = trig(p);
        [
            [-A * PI * t.c * t.e, -0.5 * A * t.s * t.e],
            [-t.s * t.e, 0.5 * t.c * t.e / PI],
        ]
    }

    pub fn stokes_velocity_hessian(&self, p: Point) -> Hessian {
        let t = trig(p);
        let (se, ce) = (t.s * t.e, t.c * t.e);
        [
            [[A * PI * PI * se, -0.5 * A * PI * ce], [-0.5 * A * PI * ce, -0.25 * A * se]],
            [[-PI * ce, -0.5 * se], [-0.5 * se, 0.25 * ce / PI]],
        ]
    }

    pub fn stokes_pressure(&self, p: Point) -> f64 {
        let MmsParams { mu, kappa_f, .. } = self.params;
        let t = trig(p);
        (kappa_f * mu - 2.0) / (kappa_f * PI) * t.c * t.e
    }

    pub fn stokes_pressure_gradient(&self, p: Point) -> [f64; 2] {
        let MmsParams { mu, kappa_f, .. } = self.params;
        let t = trig(p);
        let k = (kappa_f * mu - 2.0) / (kappa_f * PI);
        [-k * PI * t.s * t.e, 0.5 * k * t.c * t.e]
    }

    pub fn fracture_velocity(&self, p: Point) -> [f64; 2] {
        let t = trig(p);
        [-2.0 * t.s * t.e, t.c * t.e / PI]
    }

    pub fn fracture_velocity_gradient(&self, p: Point) -> Gradient {
        let t = trig(p);
        [
            [-2.0 * PI * t.c * t.e, -t.s * t.e],
            [-t.s * t.e, 0.5 * t.c * t.e / PI],
        ]
    }

    pub fn fracture_pressure(&self, p: Point) -> f64 {
        let t = trig(p);
        -2.0 / (self.params.kappa_f * PI) * t.c * t.e
    }

    pub fn fracture_pressure_gradient(&self, p: Point) -> [f64; 2] {
        let t = trig(p);
        let k = -2.0 / (self.params.kappa_f * PI);
        [-k * PI * t.s * t.e, 0.5 * k * t.c * t.e]
    }

    pub fn matrix_velocity(&self, p: Point) -> [f64; 2] {
        let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
        let (s2, c2) = ((2.0 * PI * p.y).sin(), (2.0 * PI * p.y).cos());
        [-sx * c2, -2.0 * cx * s2]
    }

    pub fn matrix_velocity_gradient(&self, p: Point) -> Gradient {
        let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
        let (s2, c2) = ((2.0 * PI * p.y).sin(), (2.0 * PI * p.y).cos());
        [
            [-PI * cx * c2, 2.0 * PI * sx * s2],
            [2.0 * PI * sx * s2, -4.0 * PI * cx * c2],
        ]
    }

    pub fn matrix_pressure(&self, p: Point) -> f64 {
        (PI * p.x).cos() * (2.0 * PI * p.y).cos() / (self.params.kappa_m * PI)
    }

    pub fn matrix_pressure_gradient(&self, p: Point) -> [f64; 2] {
        let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
        let (s2, c2) = ((2.0 * PI * p.y).sin(), (2.0 * PI * p.y).cos());
        let k = 1.0 / (self.params.kappa_m * PI);
        [-k * PI * sx * c2, -2.0 * k * PI * cx * s2]
    }

    /// `-mu div(2 eps(u)) + grad p` in the free-flow region.
    pub fn stokes_source(&self, p: Point) -> [f64; 2] {
        let h = self.stokes_velocity_hessian(p);
        let gp = self.stokes_pressure_gradient(p);
        let mu = self.params.mu;
        // div(2 eps(u))_c = sum_d (u_c,dd + u_d,cd)
        let mut f = [0.0; 2];
        for c in 0..2 {
            let div_eps: f64 = (0..2).map(|d| h[c][d][d] + h[d][c][d]).sum();
            f[c] = -mu * div_eps + gp[c];
        }
        f
    }

    /// `kappa_f^{-1} u^d + grad p^d`, identically zero for these fields.
    pub fn fracture_momentum_source(&self, p: Point) -> [f64; 2] {
        let u = self.fracture_velocity(p);
        let g = self.fracture_pressure_gradient(p);
        let k = self.params.kappa_f;
        [u[0] / k + g[0], u[1] / k + g[1]]
    }

    /// `kappa_m^{-1} u^m + grad p^m`.
    pub fn matrix_momentum_source(&self, p: Point) -> [f64; 2] {
        let u = self.matrix_velocity(p);
        let g = self.matrix_pressure_gradient(p);
        let k = self.params.kappa_m;
        [u[0] / k + g[0], u[1] / k + g[1]]
    }

    /// `div u^d + sigma kappa_m (p^d - p^m)`.
    pub fn fracture_mass_source(&self, p: Point) -> f64 {
        let g = self.fracture_velocity_gradient(p);
        let MmsParams { sigma, kappa_m, .. } = self.params;
        g[0][0] + g[1][1] + sigma * kappa_m * (self.fracture_pressure(p) - self.matrix_pressure(p))
    }

    /// `div u^m + sigma kappa_m (p^m - p^d)`.
    pub fn matrix_mass_source(&self, p: Point) -> f64 {
        let g = self.matrix_velocity_gradient(p);
        let MmsParams { sigma, kappa_m, .. } = self.params;
        g[0][0] + g[1][1] + sigma * kappa_m * (self.matrix_pressure(p) - self.fracture_pressure(p))
    }

    /// Sources that make these fields solve the coupled problem. The fracture
    /// momentum source vanishes and is left out.
    pub fn sources(&self) -> SourceSet {
        let (a, b, c, d) = (*self, *self, *self, *self);
        SourceSet {
            f: Some(Arc::new(move |p| a.stokes_source(p))),
            g: Some(Arc::new(move |p| b.fracture_mass_source(p))),
            f_d: None,
            f_m: Some(Arc::new(move |p| c.matrix_momentum_source(p))),
            g_m: Some(Arc::new(move |p| d.matrix_mass_source(p))),
        }
    }
}

/// The manufactured solution with its sources for the given parameters.
pub fn example1(params: MmsParams) -> (ExactSolution, SourceSet) {
    let exact = ExactSolution::new(params);
    (exact, exact.sources())
}

/// Largest mismatch between the hand-coded derivatives and central finite
/// differences of the next-lower derivative, over `n` seeded random points of
/// the unit square.
pub fn derivative_mismatch(exact: &ExactSolution, n: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut check = |a: f64, b: f64| worst = worst.max((a - b).abs() / (1.0 + b.abs()));
    for _ in 0..n {
        let p = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let shift = |d: usize, s: f64| match d {
            0 => Point::new(p.x + s, p.y),
            _ => Point::new(p.x, p.y + s),
        };
        for d in 0..2 {
            let (fwd, bwd) = (shift(d, h), shift(d, -h));
            let fd = |f: &dyn Fn(Point) -> f64| (f(fwd) - f(bwd)) / (2.0 * h);
            for (value, gradient) in [
                (
                    &(|q| exact.stokes_pressure(q)) as &dyn Fn(Point) -> f64,
                    exact.stokes_pressure_gradient(p),
                ),
                (&|q| exact.fracture_pressure(q), exact.fracture_pressure_gradient(p)),
                (&|q| exact.matrix_pressure(q), exact.matrix_pressure_gradient(p)),
            ] {
                check(fd(value), gradient[d]);
            }
            for c in 0..2 {
                check(fd(&|q| exact.stokes_velocity(q)[c]), exact.stokes_velocity_gradient(p)[c][d]);
                check(fd(&|q| exact.fracture_velocity(q)[c]), exact.fracture_velocity_gradient(p)[c][d]);
                check(fd(&|q| exact.matrix_velocity(q)[c]), exact.matrix_velocity_gradient(p)[c][d]);
                for e in 0..2 {
                    check(
                        fd(&|q| exact.stokes_velocity_gradient(q)[c][e]),
                        exact.stokes_velocity_hessian(p)[c][e][d],
                    );
                }
            }
        }
    }
    worst
}
