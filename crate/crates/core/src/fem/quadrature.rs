use crate::error::{Error, Result};

pub const MAX_QUADRATURE_DEGREE: usize = 20;

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)` or on the
/// reference segment `[0, 1]` (second coordinate unused).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Segment rule on `[0, 1]` exact for polynomials of degree `degree`.
pub fn quad_seg(degree: usize) -> Result<QuadRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::QuadratureDegree(degree));
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(QuadRule {
        points: x.into_iter().map(|t| [t, 0.0]).collect(),
        weights: w,
        degree: 2 * n - 1,
    })
}

/// Collapsed Gauss rule on the reference triangle exact for degree `degree`.
///
/// Maps `(s, t) in [0,1]^2` to `(s, (1 - s) t)`; the Jacobian `1 - s` raises the
/// degree in `s` by one.
pub fn quad_tri(degree: usize) -> Result<QuadRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::QuadratureDegree(degree));
    }
    let ns = degree.div_ceil(2) + 1;
    let nt = degree / 2 + 1;
    let (s, ws) = gauss_legendre(ns);
    let (t, wt) = gauss_legendre(nt);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (&si, &wsi) in s.iter().zip(&ws) {
        for (&tj, &wtj) in t.iter().zip(&wt) {
            points.push([si, (1.0 - si) * tj]);
            weights.push(wsi * wtj * (1.0 - si));
        }
    }
    Ok(QuadRule {
        points,
        weights,
        degree: (2 * ns - 2).min(2 * nt - 1),
    })
}
