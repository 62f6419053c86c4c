use nalgebra::{DMatrix, Cholesky};

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 4;

/// Basis of `P_k` on the reference triangle, orthonormal in `L^2`.
///
/// Built from the monomials `x^i y^j` (`i + j <= k`) by inverting the Cholesky
/// factor of their exact reference mass matrix.
#[derive(Debug, Clone)]
pub struct TriBasis {
    degree: usize,
    exponents: Vec<(i32, i32)>,
    /// Row `a` holds the monomial coefficients of basis function `a`.
    coeffs: DMatrix<f64>,
}

/// Values and reference gradients of every basis function at one point.
#[derive(Debug, Clone, Default)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
}

impl TriBasis {
    /// Degree 0 is allowed for the piecewise-constant pressure of `k = 1`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree,
                min: 0,
                max: MAX_DEGREE,
            });
        }
        let mut exponents = Vec::new();
        for total in 0..=degree as i32 {
            for j in 0..=total {
                exponents.push((total - j, j));
            }
        }
        let n = exponents.len();
        let mass = DMatrix::from_fn(n, n, |a, b| {
            let (ia, ja) = exponents[a];
            let (ib, jb) = exponents[b];
            monomial_integral((ia + ib) as usize, (ja + jb) as usize)
        });
        let chol = Cholesky::new(mass).expect("monomial mass matrix is SPD");
        let l = chol.l();
        let coeffs = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is nonsingular");
        Ok(TriBasis {
            degree,
            exponents,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn eval(&self, xi: [f64; 2]) -> BasisValues {
        let mut out = BasisValues::default();
        self.eval_into(xi, &mut out);
        out
    }

    pub fn eval_into(&self, xi: [f64; 2], out: &mut BasisValues) {
        let n = self.dim();
        let [x, y] = xi;
        let mut m = [0.0; 15];
        let mut mx = [0.0; 15];
        let mut my = [0.0; 15];
        for (b, &(i, j)) in self.exponents.iter().enumerate() {
            m[b] = x.powi(i) * y.powi(j);
            mx[b] = if i > 0 { i as f64 * x.powi(i - 1) * y.powi(j) } else { 0.0 };
            my[b] = if j > 0 { j as f64 * x.powi(i) * y.powi(j - 1) } else { 0.0 };
        }
        out.values.clear();
        out.gradients.clear();
        for a in 0..n {
            let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for b in 0..=a {
                let c = self.coeffs[(a, b)];
                v += c * m[b];
                gx += c * mx[b];
                gy += c * my[b];
            }
            out.values.push(v);
            out.gradients.push([gx, gy]);
        }
    }

    /// Integral of each basis function over the reference triangle.
    pub fn reference_integrals(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| {
                (0..=a)
                    .map(|b| {
                        let (i, j) = self.exponents[b];
                        self.coeffs[(a, b)] * monomial_integral(i as usize, j as usize)
                    })
                    .sum()
            })
            .collect()
    }
}

/// Orthonormal Legendre basis of `P_k` on `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct SegBasis {
    degree: usize,
}

impl SegBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree {
                degree,
                min: 0,
                max: MAX_DEGREE,
            });
        }
        Ok(SegBasis { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn eval_into(&self, t: f64, out: &mut Vec<f64>) {
        out.clear();
        let x = 2.0 * t - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        for n in 0..=self.degree {
            let p = match n {
                0 => 1.0,
                1 => x,
                _ => {
                    let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            out.push(p * ((2 * n + 1) as f64).sqrt());
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        self.eval_into(t, &mut v);
        v
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact integral of `x^i y^j` over the reference triangle.
pub(crate) fn monomial_integral(i: usize, j: usize) -> f64 {
    factorial(i) * factorial(j) / factorial(i + j + 2)
}
